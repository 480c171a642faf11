//! Simulated teachers answering equivalence, membership and basecase queries
//! from a known target and a pool of instances.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::ingest::parse::serialize_instance;
use crate::learner::{BasecaseOracle, EqAnswer, EquivalenceOracle, Hypothesis, MembershipOracle};
use crate::lp::{auto_depth, covers, Clause, Database, ExtendedInstance, Fact, ProofBudget, DEFAULT_CEILING};

/// The target, its database and the pool of instances it is judged on.
#[derive(Clone, Debug)]
pub struct TargetSpec {
    /// Absent when the pool labels alone define the target.
    pub program: Option<Vec<Clause>>,
    /// Position of the base clause in `program`.
    pub base_index: Option<usize>,
    pub db: Database,
    pub pool: Vec<ExtendedInstance>,
    pub ceiling: u64,
}

fn program_arity(program: &[Clause]) -> usize {
    program
        .iter()
        .flat_map(|c| std::iter::once(&c.head).chain(&c.body))
        .map(|l| l.arity())
        .max()
        .unwrap_or(0)
}

/// Memoized coverage with the automatic depth bound, where `a` is the largest
/// arity among the database, the description and the program.
pub fn auto_covers(program: &[Clause], db: &Database, inst: &ExtendedInstance, ceiling: u64) -> bool {
    let a = db
        .max_arity()
        .max(inst.description.iter().map(Fact::arity).max().unwrap_or(0))
        .max(program_arity(program))
        .max(inst.fact.arity());
    let depth = auto_depth(a, inst.size(), db.len(), inst.fact.arity(), ceiling);
    covers(program, db, inst, ProofBudget::visited(depth))
}

impl TargetSpec {
    /// Labels unlabelled pool instances from the program and checks the rest.
    pub fn new(program: Vec<Clause>, base_index: Option<usize>, db: Database, pool: Vec<ExtendedInstance>) -> Result<Self> {
        let mut spec = TargetSpec {
            program: Some(program),
            base_index,
            db,
            pool,
            ceiling: DEFAULT_CEILING,
        };
        spec.check_labels()?;
        Ok(spec)
    }

    /// A target known only through its labelled pool.
    pub fn from_labels(db: Database, pool: Vec<ExtendedInstance>) -> Result<Self> {
        if let Some(i) = pool.iter().position(|p| p.label.is_none()) {
            return Err(Error::Invalid(format!("pool instance {i} has no label and there is no target program")));
        }
        Ok(TargetSpec {
            program: None,
            base_index: None,
            db,
            pool,
            ceiling: DEFAULT_CEILING,
        })
    }

    fn check_labels(&mut self) -> Result<()> {
        let Some(program) = &self.program else { return Ok(()) };
        for (index, inst) in self.pool.iter_mut().enumerate() {
            let actual = auto_covers(program, &self.db, inst, self.ceiling);
            match inst.label {
                Some(labelled) if labelled != actual => {
                    return Err(Error::PoolLabelMismatch {
                        index,
                        labelled,
                        actual,
                    })
                }
                _ => inst.label = Some(actual),
            }
        }
        Ok(())
    }

    pub fn positives(&self) -> impl Iterator<Item = &ExtendedInstance> {
        self.pool.iter().filter(|i| i.label == Some(true))
    }

    pub fn negatives(&self) -> impl Iterator<Item = &ExtendedInstance> {
        self.pool.iter().filter(|i| i.label == Some(false))
    }

    pub fn covers(&self, program: &[Clause], inst: &ExtendedInstance) -> bool {
        auto_covers(program, &self.db, inst, self.ceiling)
    }

    /// Pool instances on which `program` and the target disagree.
    pub fn disagreements(&self, program: &[Clause]) -> Vec<usize> {
        (0..self.pool.len())
            .filter(|&i| self.covers(program, &self.pool[i]) != self.pool[i].label.unwrap_or(false))
            .collect()
    }

    pub fn membership(&self, fact: &Fact, description: &BTreeSet<Fact>) -> Result<bool> {
        let program = self
            .program
            .as_ref()
            .ok_or_else(|| Error::Teacher("membership needs a target program".into()))?;
        let inst = ExtendedInstance::new(fact.clone(), description.iter().cloned());
        Ok(self.covers(program, &inst))
    }

    /// Coverage by the base clause alone.
    pub fn basecase(&self, inst: &ExtendedInstance) -> Result<bool> {
        let (Some(program), Some(i)) = (&self.program, self.base_index) else {
            return Err(Error::NoBaseClause);
        };
        let base = program.get(i).ok_or(Error::NoBaseClause)?;
        Ok(self.covers(std::slice::from_ref(base), inst))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TeacherPolicy {
    /// Smallest disagreement first, by description size then serialization.
    Exhaustive,
    /// A uniformly chosen disagreement.
    Random(u64),
    /// Draws `m` pool instances and answers yes when none disagrees.
    Pac { m: usize, seed: u64 },
}

impl std::str::FromStr for TeacherPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<u64>().map_err(|_| Error::Invalid(format!("bad number in policy `{s}`")));
        match parts.as_slice() {
            ["exhaustive"] => Ok(TeacherPolicy::Exhaustive),
            ["random", seed] => Ok(TeacherPolicy::Random(num(seed)?)),
            ["pac", m, seed] => Ok(TeacherPolicy::Pac {
                m: num(m)? as usize,
                seed: num(seed)?,
            }),
            _ => Err(Error::Invalid(format!("unknown teacher policy `{s}`"))),
        }
    }
}

pub struct Teacher {
    pub target: TargetSpec,
    policy: TeacherPolicy,
    rng: StdRng,
    /// Pool indices in smallest-first order.
    order: Vec<usize>,
    pub queries: usize,
}

impl Teacher {
    pub fn new(target: TargetSpec, policy: TeacherPolicy) -> Self {
        let seed = match policy {
            TeacherPolicy::Exhaustive => 0,
            TeacherPolicy::Random(s) | TeacherPolicy::Pac { seed: s, .. } => s,
        };
        let keys: Vec<(usize, String)> = target
            .pool
            .iter()
            .map(|i| (i.size(), serialize_instance(&i.with_fact(i.fact.clone()))))
            .collect();
        let mut order: Vec<usize> = (0..target.pool.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        Teacher {
            target,
            policy,
            rng: StdRng::seed_from_u64(seed),
            order,
            queries: 0,
        }
    }

    fn disagrees(&self, program: &[Clause], i: usize) -> bool {
        let inst = &self.target.pool[i];
        self.target.covers(program, inst) != inst.label.unwrap_or(false)
    }

    fn answer(&self, i: usize) -> Result<EqAnswer> {
        let inst = &self.target.pool[i];
        let positive = inst.label.unwrap_or(false);
        Ok(EqAnswer::Counterexample {
            instance: inst.with_fact(inst.fact.clone()).labelled(positive),
            positive,
        })
    }
}

impl EquivalenceOracle for Teacher {
    fn equivalent(&mut self, h: &Hypothesis) -> Result<EqAnswer> {
        self.queries += 1;
        let program = h.program();
        match self.policy {
            TeacherPolicy::Exhaustive => {
                for &i in &self.order {
                    if self.disagrees(&program, i) {
                        return self.answer(i);
                    }
                }
                Ok(EqAnswer::Yes)
            }
            TeacherPolicy::Random(_) => {
                let bad = self.target.disagreements(&program);
                match bad.choose(&mut self.rng) {
                    Some(&i) => self.answer(i),
                    None => Ok(EqAnswer::Yes),
                }
            }
            TeacherPolicy::Pac { m, .. } => {
                let n = self.target.pool.len();
                if n == 0 {
                    return Ok(EqAnswer::Yes);
                }
                for _ in 0..m {
                    let i = self.rng.gen_range(0..n);
                    if self.disagrees(&program, i) {
                        return self.answer(i);
                    }
                }
                Ok(EqAnswer::Yes)
            }
        }
    }
}

impl BasecaseOracle for Teacher {
    fn basecase(&mut self, instance: &ExtendedInstance) -> Result<bool> {
        self.target.basecase(instance)
    }
}

impl MembershipOracle for Teacher {
    fn member(&mut self, fact: &Fact, description: &BTreeSet<Fact>) -> Result<bool> {
        self.target.membership(fact, description)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::lp::Fact;

    fn single() -> TargetSpec {
        TargetSpec::new(vec![append_recursive_clause()], None, list_db(), vec![worked_instance()]).unwrap()
    }

    fn pair() -> TargetSpec {
        TargetSpec::new(append_program(), Some(1), list_db(), append_pool(false)).unwrap()
    }

    #[test]
    fn membership_follows_the_recursion() {
        let t = single();
        let d = worked_instance().description;
        assert!(t.membership(&Fact::from_strs("append", &["l2", "l3", "l23"]), &d).unwrap());
        assert!(!t.membership(&Fact::from_strs("append", &["l2", "l3", "l3"]), &d).unwrap());
        assert!(t.membership(&Fact::from_strs("append", &["nil", "l3", "l3"]), &d).unwrap());
    }

    #[test]
    fn basecase_uses_the_base_clause_only() {
        let t = pair();
        let base = append_instance(&[], &[3], &[3], false);
        assert!(t.basecase(&base).unwrap());
        assert!(!t.basecase(&append_instance(&[1, 2], &[3], &[1, 2, 3], false)).unwrap());
        let inside = worked_instance().with_fact(Fact::from_strs("append", &["nil", "l3", "l3"]));
        assert!(inside.description.contains(&inside.fact));
        assert!(t.basecase(&inside).unwrap());
        assert!(matches!(single().basecase(&base), Err(Error::NoBaseClause)));
    }

    #[test]
    fn policies_parse() {
        assert_eq!("exhaustive".parse::<TeacherPolicy>().unwrap(), TeacherPolicy::Exhaustive);
        assert_eq!("random:7".parse::<TeacherPolicy>().unwrap(), TeacherPolicy::Random(7));
        assert_eq!("pac:20:3".parse::<TeacherPolicy>().unwrap(), TeacherPolicy::Pac { m: 20, seed: 3 });
        assert!("pac:x".parse::<TeacherPolicy>().is_err());
    }

    fn smallest_disagreement(spec: &TargetSpec, program: &[Clause]) -> Option<ExtendedInstance> {
        spec.pool
            .iter()
            .filter(|i| spec.covers(program, i) != i.label.unwrap())
            .min_by_key(|i| (i.size(), serialize_instance(i)))
            .cloned()
    }

    #[test]
    fn exhaustive_returns_the_smallest_counterexample() {
        let spec = pair();
        let bottom = crate::bottom::bottom_star(1, &append_dec()).clause;
        let h = Hypothesis::Pair {
            recursive: bottom.push(crate::ingest::parse::parse_literal("append(V1_2,X2,V1_6)").unwrap()),
            base: bottom,
        };
        let want = smallest_disagreement(&spec, &h.program()).unwrap();
        let mut t = Teacher::new(spec.clone(), TeacherPolicy::Exhaustive);
        let EqAnswer::Counterexample { instance, positive } = t.equivalent(&h).unwrap() else { panic!() };
        assert!(positive);
        assert_eq!(instance.fact, want.fact);
        assert_eq!(instance.description, want.description);
        let mut t2 = Teacher::new(spec.clone(), TeacherPolicy::Exhaustive);
        assert_eq!(t2.equivalent(&h).unwrap(), t.equivalent(&h).unwrap());

        let target = Hypothesis::Pair {
            recursive: append_recursive_clause(),
            base: append_base_clause(),
        };
        assert_eq!(t.equivalent(&target).unwrap(), EqAnswer::Yes);
    }

    #[test]
    fn negative_counterexamples_are_signed() {
        let spec = pair();
        let loose = Hypothesis::Single(Clause::new(append_recursive_clause().head, vec![]));
        for policy in [TeacherPolicy::Exhaustive, TeacherPolicy::Random(1), TeacherPolicy::Pac { m: 200, seed: 1 }] {
            let mut t = Teacher::new(spec.clone(), policy);
            let EqAnswer::Counterexample { instance, positive } = t.equivalent(&loose).unwrap() else { panic!() };
            assert!(!positive);
            assert!(spec.covers(&loose.program(), &instance));
            assert!(!spec.covers(&spec.program.clone().unwrap(), &instance));
        }
    }

    #[test]
    fn pac_yes_implies_small_error() {
        let spec = pair();
        let n = spec.pool.len() as f64;
        // The recursive clause alone misses only the base instances.
        let h = Hypothesis::Single(append_recursive_clause());
        let err = spec.disagreements(&h.program()).len() as f64 / n;
        assert!(err > 0.0);
        let m = 30;
        let mut yes = 0;
        for seed in 0..40 {
            let mut t = Teacher::new(spec.clone(), TeacherPolicy::Pac { m, seed });
            if t.equivalent(&h).unwrap() == EqAnswer::Yes {
                yes += 1;
            }
        }
        let expected = (1.0 - err).powi(m as i32) * 40.0;
        assert!((yes as f64) <= expected + 3.0 * expected.sqrt() + 1.0, "{yes} vs {expected}");
    }
}
