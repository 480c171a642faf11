//! Depth-bounded top-down proof search, with an optional ancestor/visited memo.

use std::collections::{BTreeSet, HashSet};

use super::db::{Database, ExtendedInstance};
use super::syntax::{Clause, Fact, Literal, Substitution, Symbol, Term};
use crate::error::{Error, Result};

/// Default cap for computed depth bounds.
pub const DEFAULT_CEILING: u64 = (1 << 31) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemoPolicy {
    /// Plain depth-bounded search; the proof tree is explored naively.
    DepthOnly,
    /// Fail on a subgoal that repeats an ancestor; reuse subgoals already proved.
    VisitedMemo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProofBudget {
    pub depth: u64,
    pub policy: MemoPolicy,
}

impl ProofBudget {
    pub fn depth_only(depth: u64) -> Self {
        ProofBudget {
            depth,
            policy: MemoPolicy::DepthOnly,
        }
    }

    pub fn visited(depth: u64) -> Self {
        ProofBudget {
            depth,
            policy: MemoPolicy::VisitedMemo,
        }
    }

    /// Memoized search with an effectively unbounded depth.
    pub fn unbounded() -> Self {
        Self::visited(DEFAULT_CEILING)
    }
}

/// `(a*|D| + a*|DB|)^a'`, saturating at `ceiling`.
pub fn auto_depth(a: usize, desc_size: usize, db_size: usize, head_arity: usize, ceiling: u64) -> u64 {
    let a = a as u64;
    let base = a
        .saturating_mul(desc_size as u64)
        .saturating_add(a.saturating_mul(db_size as u64));
    let mut h: u64 = 1;
    for _ in 0..head_arity {
        h = h.saturating_mul(base);
        if h >= ceiling {
            return ceiling;
        }
    }
    h.min(ceiling)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Proved,
    Failed,
    /// Not proved, and at least one branch was cut by the depth bound.
    BudgetExceeded,
}

impl Verdict {
    pub fn is_proved(self) -> bool {
        self == Verdict::Proved
    }
}

/// A body literal that had no solution while trying to prove `goal`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureNote {
    pub goal: Fact,
    pub clause: usize,
    pub literal: usize,
    /// The literal as written in the clause.
    pub written: Literal,
    /// The literal under the bindings current when it failed.
    pub instantiated: Literal,
}

#[derive(Clone, Debug)]
pub struct ProofReport {
    pub verdict: Verdict,
    /// Number of subgoal nodes expanded (clause resolution attempts on a goal).
    pub nodes: u64,
    pub notes: Vec<FailureNote>,
}

const MAX_NOTES: usize = 256;

/// Most general substitution for the unbound variables of `lit` under `sigma`
/// such that the instantiated literal is a fact of `db`.
pub fn lookup_mgs(lit: &Literal, sigma: &Substitution, db: &Database) -> Result<Option<Substitution>> {
    let mut found: Option<(Substitution, &Fact)> = None;
    for fact in db.matching(lit, sigma) {
        let added = lit
            .match_fact(fact, sigma)
            .expect("index returned a non-matching fact");
        match &found {
            None => found = Some((added, fact)),
            Some((prev, first)) => {
                if *prev != added {
                    return Err(Error::DeterminacyViolation {
                        literal: lit.apply(sigma),
                        first: (*first).clone(),
                        second: fact.clone(),
                    });
                }
            }
        }
    }
    Ok(found.map(|(s, _)| s))
}

struct Outcome {
    proved: bool,
    /// Failure depended on an ancestor cut or the depth bound, so it must not be cached.
    tainted: bool,
}

struct Interpreter<'a> {
    program: &'a [Clause],
    db: &'a Database,
    policy: MemoPolicy,
    idb: HashSet<(Symbol, usize)>,
    universe: Option<Vec<Symbol>>,
    ancestors: HashSet<Fact>,
    proved: HashSet<Fact>,
    failed: HashSet<Fact>,
    nodes: u64,
    budget_hit: bool,
    notes: Vec<FailureNote>,
}

impl<'a> Interpreter<'a> {
    fn new(program: &'a [Clause], db: &'a Database, policy: MemoPolicy) -> Self {
        Interpreter {
            program,
            db,
            policy,
            idb: program
                .iter()
                .map(|c| (c.head.pred.clone(), c.head.arity()))
                .collect(),
            universe: None,
            ancestors: HashSet::new(),
            proved: HashSet::new(),
            failed: HashSet::new(),
            nodes: 0,
            budget_hit: false,
            notes: Vec::new(),
        }
    }

    fn is_idb(&self, lit: &Literal) -> bool {
        self.idb.contains(&(lit.pred.clone(), lit.arity()))
    }

    fn universe(&mut self) -> Vec<Symbol> {
        if self.universe.is_none() {
            let mut u: BTreeSet<Symbol> = self.db.constants();
            for c in self.program {
                for l in std::iter::once(&c.head).chain(&c.body) {
                    for t in &l.args {
                        if let Term::Const(k) = t {
                            u.insert(k.clone());
                        }
                    }
                }
            }
            self.universe = Some(u.into_iter().collect());
        }
        self.universe.clone().unwrap_or_default()
    }

    fn prove(&mut self, goal: &Fact, depth: u64) -> Outcome {
        if self.db.contains(goal) {
            return Outcome {
                proved: true,
                tainted: false,
            };
        }
        let memo = self.policy == MemoPolicy::VisitedMemo;
        if memo {
            if self.proved.contains(goal) {
                return Outcome {
                    proved: true,
                    tainted: false,
                };
            }
            if self.ancestors.contains(goal) {
                return Outcome {
                    proved: false,
                    tainted: true,
                };
            }
            if self.failed.contains(goal) {
                return Outcome {
                    proved: false,
                    tainted: false,
                };
            }
        }
        if depth == 0 {
            let resolvable = self.program.iter().any(|c| Substitution::unify(&c.head, goal).is_some());
            if resolvable {
                self.budget_hit = true;
            }
            return Outcome {
                proved: false,
                tainted: resolvable,
            };
        }
        self.nodes += 1;
        if memo {
            self.ancestors.insert(goal.clone());
        }
        let mut tainted = false;
        let mut proved = false;
        for (ci, clause) in self.program.iter().enumerate() {
            let Some(sigma) = Substitution::unify(&clause.head, goal) else {
                continue;
            };
            let mut deepest: Option<(usize, Substitution)> = None;
            let ok = self.solve(goal, ci, clause, 0, sigma, depth - 1, &mut tainted, &mut deepest);
            if ok {
                proved = true;
                break;
            }
            if let Some((li, s)) = deepest {
                if self.notes.len() < MAX_NOTES {
                    self.notes.push(FailureNote {
                        goal: goal.clone(),
                        clause: ci,
                        literal: li,
                        written: clause.body[li].clone(),
                        instantiated: clause.body[li].apply(&s),
                    });
                }
            }
        }
        if memo {
            self.ancestors.remove(goal);
            if proved {
                self.proved.insert(goal.clone());
            } else if !tainted {
                self.failed.insert(goal.clone());
            }
        }
        Outcome { proved, tainted }
    }

    #[allow(clippy::too_many_arguments)]
    fn solve(
        &mut self,
        goal: &Fact,
        ci: usize,
        clause: &Clause,
        index: usize,
        sigma: Substitution,
        sub_depth: u64,
        tainted: &mut bool,
        deepest: &mut Option<(usize, Substitution)>,
    ) -> bool {
        if index == clause.body.len() {
            return true;
        }
        let lit = &clause.body[index];
        let record_failure = |deepest: &mut Option<(usize, Substitution)>, s: &Substitution| {
            if deepest.as_ref().map_or(true, |(i, _)| *i <= index) {
                *deepest = Some((index, s.clone()));
            }
        };
        if self.is_idb(lit) {
            let inst = lit.apply(&sigma);
            let groundings: Vec<Substitution> = if inst.is_ground() {
                vec![Substitution::new()]
            } else {
                self.groundings(&inst)
            };
            let mut any = false;
            for g in groundings {
                let fact = inst.apply(&g).to_fact().expect("grounding is complete");
                let out = self.prove(&fact, sub_depth);
                *tainted |= out.tainted;
                if out.proved {
                    any = true;
                    let mut next = sigma.clone();
                    for v in lit.vars() {
                        if let Some(c) = g.get(v) {
                            next.bind(v.clone(), c.clone());
                        }
                    }
                    if self.solve(goal, ci, clause, index + 1, next, sub_depth, tainted, deepest) {
                        return true;
                    }
                }
            }
            if !any {
                record_failure(deepest, &sigma);
            }
            false
        } else {
            let matches: Vec<Substitution> = self
                .db
                .matching(lit, &sigma)
                .into_iter()
                .filter_map(|f| lit.match_fact(f, &sigma))
                .collect();
            if matches.is_empty() {
                record_failure(deepest, &sigma);
                return false;
            }
            for added in matches {
                let mut next = sigma.clone();
                next.extend(&added);
                if self.solve(goal, ci, clause, index + 1, next, sub_depth, tainted, deepest) {
                    return true;
                }
            }
            false
        }
    }

    /// All ways of grounding the unbound variables of `inst` over the universe.
    fn groundings(&mut self, inst: &Literal) -> Vec<Substitution> {
        let mut vars: Vec<&Symbol> = Vec::new();
        for v in inst.vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let universe = self.universe();
        let mut out = vec![Substitution::new()];
        for v in vars {
            let mut next = Vec::with_capacity(out.len() * universe.len());
            for s in &out {
                for c in &universe {
                    let mut t = s.clone();
                    t.bind(v.clone(), c.clone());
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }
}

/// Attempts to prove a ground `goal` from `program` and `db`.
pub fn prove(program: &[Clause], db: &Database, goal: &Fact, budget: ProofBudget) -> ProofReport {
    let mut it = Interpreter::new(program, db, budget.policy);
    let out = it.prove(goal, budget.depth);
    let verdict = if out.proved {
        Verdict::Proved
    } else if it.budget_hit {
        Verdict::BudgetExceeded
    } else {
        Verdict::Failed
    };
    ProofReport {
        verdict,
        nodes: it.nodes,
        notes: it.notes,
    }
}

/// `db ∧ D ∧ program ⊢ f` within `budget`.
pub fn covers(program: &[Clause], db: &Database, instance: &ExtendedInstance, budget: ProofBudget) -> bool {
    prove_instance(program, db, instance, budget).verdict.is_proved()
}

pub fn prove_instance(
    program: &[Clause],
    db: &Database,
    instance: &ExtendedInstance,
    budget: ProofBudget,
) -> ProofReport {
    if instance.description.is_empty() {
        prove(program, db, &instance.fact, budget)
    } else {
        let full = db.union(&instance.description);
        prove(program, &full, &instance.fact, budget)
    }
}

/// The automatic depth bound for `instance` under a clause language of maximum arity `a`.
pub fn instance_budget(
    a: usize,
    head_arity: usize,
    db: &Database,
    instance: &ExtendedInstance,
    policy: MemoPolicy,
    ceiling: u64,
) -> ProofBudget {
    ProofBudget {
        depth: auto_depth(a, instance.size(), db.len(), head_arity, ceiling),
        policy,
    }
}
