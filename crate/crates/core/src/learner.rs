//! Identification from equivalence queries: Force1_NR, Force1 (linear and
//! k-ary), Force2 with a basecase oracle or basecase rules, and the S-set
//! builder.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use crate::bottom::{bottom_star, enumerate_recursive_literals, with_recursive};
use crate::error::{Error, Result};
use crate::forcesim::{force_sim, force_sim2, force_sim_nr, SimResult};
use crate::ingest::flatten::{COMPONENTS, NIL};
use crate::lp::{
    auto_depth, covers, is_subclause, Clause, Database, Declaration, ExtendedInstance, Fact, MemoPolicy, ProofBudget,
    DEFAULT_CEILING,
};

#[derive(Clone, PartialEq, Eq)]
pub enum Hypothesis {
    Single(Clause),
    Pair { recursive: Clause, base: Clause },
}

impl Hypothesis {
    pub fn program(&self) -> Vec<Clause> {
        match self {
            Hypothesis::Single(c) => vec![c.clone()],
            Hypothesis::Pair { recursive, base } => vec![recursive.clone(), base.clone()],
        }
    }

    pub fn size(&self) -> usize {
        self.program().iter().map(Clause::size).sum()
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.program().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqAnswer {
    Yes,
    /// `positive` is true when the target covers the instance and the hypothesis does not.
    Counterexample { instance: ExtendedInstance, positive: bool },
}

pub trait EquivalenceOracle {
    fn equivalent(&mut self, h: &Hypothesis) -> Result<EqAnswer>;
}

pub trait BasecaseOracle {
    fn basecase(&mut self, instance: &ExtendedInstance) -> Result<bool>;
}

pub trait MembershipOracle {
    fn member(&mut self, fact: &Fact, description: &BTreeSet<Fact>) -> Result<bool>;
}

impl<T: EquivalenceOracle + ?Sized> EquivalenceOracle for &mut T {
    fn equivalent(&mut self, h: &Hypothesis) -> Result<EqAnswer> {
        (**self).equivalent(h)
    }
}

impl<T: BasecaseOracle + ?Sized> BasecaseOracle for &mut T {
    fn basecase(&mut self, instance: &ExtendedInstance) -> Result<bool> {
        (**self).basecase(instance)
    }
}

/// A basecase oracle backed by a closure.
pub struct FnBasecase<F>(pub F);

impl<F: FnMut(&ExtendedInstance) -> Result<bool>> BasecaseOracle for FnBasecase<F> {
    fn basecase(&mut self, instance: &ExtendedInstance) -> Result<bool> {
        (self.0)(instance)
    }
}

#[derive(Clone, Debug)]
pub struct LearnConfig {
    pub d: usize,
    /// Number of recursive literals per candidate.
    pub k: usize,
    /// Leave the head itself out of the recursive candidates.
    pub exclude_self: bool,
    pub policy: MemoPolicy,
    pub ceiling: u64,
    /// Re-check logged counterexamples against each fresh candidate before querying.
    pub replay: bool,
    /// Start the candidate scan here (wrapping around); used to force a given candidate first.
    pub first_candidate: usize,
}

impl LearnConfig {
    pub fn new(d: usize) -> Self {
        LearnConfig {
            d,
            k: 1,
            exclude_self: true,
            policy: MemoPolicy::VisitedMemo,
            ceiling: DEFAULT_CEILING,
            replay: true,
            first_candidate: 0,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Agrees with the teacher on its whole universe of instances.
    Identified(Hypothesis),
    NoConsistentHypothesis,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoggedCounterexample {
    pub instance: ExtendedInstance,
    pub positive: bool,
    /// Candidate index in force when it was received (0 for Force1_NR).
    pub candidate: usize,
    /// Hypothesis size after processing it, if processing succeeded.
    pub size_after: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct LearnResult {
    pub outcome: Outcome,
    pub queries: usize,
    pub candidates_tried: usize,
    /// Number of candidates `p`; zero for Force1_NR.
    pub candidates: usize,
    pub bottom_size: usize,
    pub elapsed: Duration,
    pub log: Vec<LoggedCounterexample>,
}

impl LearnResult {
    /// `(p+1)(|BOTTOM*|+2)`.
    pub fn query_cap(&self) -> usize {
        (self.candidates + 1).saturating_mul(self.bottom_size + 2)
    }

    pub fn hypothesis(&self) -> Option<&Hypothesis> {
        match &self.outcome {
            Outcome::Identified(h) => Some(h),
            Outcome::NoConsistentHypothesis => None,
        }
    }
}

fn arity_a(dec: &Declaration) -> usize {
    dec.max_arity().max(dec.arity)
}

fn budget_for(cfg: &LearnConfig, dec: &Declaration, db: &Database, inst: &ExtendedInstance) -> ProofBudget {
    ProofBudget {
        depth: auto_depth(arity_a(dec), inst.size(), db.len(), dec.arity, cfg.ceiling),
        policy: cfg.policy,
    }
}

struct Session<'t, T> {
    teacher: &'t mut T,
    queries: usize,
    cap: usize,
    log: Vec<LoggedCounterexample>,
}

impl<T: EquivalenceOracle> Session<'_, T> {
    fn ask(&mut self, h: &Hypothesis) -> Result<EqAnswer> {
        if self.queries >= self.cap {
            return Err(Error::Internal(format!("query cap {} reached", self.cap)));
        }
        self.queries += 1;
        self.teacher.equivalent(h)
    }
}

fn finish(
    outcome: Outcome,
    session: Session<'_, impl EquivalenceOracle>,
    candidates_tried: usize,
    candidates: usize,
    bottom_size: usize,
    start: Instant,
) -> LearnResult {
    LearnResult {
        outcome,
        queries: session.queries,
        candidates_tried,
        candidates,
        bottom_size,
        elapsed: start.elapsed(),
        log: session.log,
    }
}

fn require_proper(old: &Clause, new: &Clause) -> Result<()> {
    if new.size() < old.size() && is_subclause(new, old) {
        Ok(())
    } else {
        Err(Error::Internal(format!(
            "update on a positive counterexample is not a proper subclause: {old} -> {new}"
        )))
    }
}

/// Force1_NR: learns a non-recursive depth-`d` determinate clause.
pub fn force1_nr(
    cfg: &LearnConfig,
    dec: &Declaration,
    db: &Database,
    teacher: &mut impl EquivalenceOracle,
) -> Result<LearnResult> {
    let start = Instant::now();
    let bottom = bottom_star(cfg.d, dec).clause;
    let bottom_size = bottom.size();
    let mut s = Session {
        teacher,
        queries: 0,
        cap: bottom_size + 2,
        log: Vec::new(),
    };
    let mut h = bottom;
    loop {
        match s.ask(&Hypothesis::Single(h.clone()))? {
            EqAnswer::Yes => return Ok(finish(Outcome::Identified(Hypothesis::Single(h)), s, 1, 0, bottom_size, start)),
            EqAnswer::Counterexample { instance, positive } => {
                let mut entry = LoggedCounterexample {
                    instance: instance.clone(),
                    positive,
                    candidate: 0,
                    size_after: None,
                };
                if !positive {
                    s.log.push(entry);
                    return Ok(finish(Outcome::NoConsistentHypothesis, s, 1, 0, bottom_size, start));
                }
                let full = db.union(&instance.description);
                match force_sim_nr(&h, &instance.fact, dec, &full)?.result {
                    SimResult::Generalized(next) => {
                        require_proper(&h, &next)?;
                        entry.size_after = Some(next.size());
                        s.log.push(entry);
                        h = next;
                    }
                    SimResult::Failure(_) => {
                        s.log.push(entry);
                        return Ok(finish(Outcome::NoConsistentHypothesis, s, 1, 0, bottom_size, start));
                    }
                }
            }
        }
    }
}

fn candidate_order(p: usize, first: usize) -> impl Iterator<Item = usize> {
    (0..p).map(move |i| (i + first % p.max(1)) % p)
}

/// Force1: learns a closed recursive clause with `cfg.k` recursive literals.
pub fn force1(
    cfg: &LearnConfig,
    dec: &Declaration,
    db: &Database,
    teacher: &mut impl EquivalenceOracle,
) -> Result<LearnResult> {
    let start = Instant::now();
    let bottom = bottom_star(cfg.d, dec).clause;
    let bottom_size = bottom.size();
    let cands = enumerate_recursive_literals(&bottom, dec, cfg.k, cfg.exclude_self);
    let p = cands.len();
    let mut s = Session {
        teacher,
        queries: 0,
        cap: (p + 1).saturating_mul(bottom_size + 2),
        log: Vec::new(),
    };
    let mut tried = 0;
    'candidates: for ci in candidate_order(p, cfg.first_candidate) {
        tried += 1;
        let mut h = with_recursive(&bottom, &cands[ci]);
        if cfg.replay {
            let old: Vec<(ExtendedInstance, bool)> =
                s.log.iter().map(|e| (e.instance.clone(), e.positive)).collect();
            for (inst, positive) in &old {
                let full = db.union(&inst.description);
                let budget = budget_for(cfg, dec, db, inst);
                if *positive {
                    match force_sim(&h, &inst.fact, dec, &full, budget)?.into_generalized() {
                        Some(next) => h = next,
                        None => continue 'candidates,
                    }
                } else if covers(std::slice::from_ref(&h), db, inst, budget) {
                    continue 'candidates;
                }
            }
        }
        loop {
            match s.ask(&Hypothesis::Single(h.clone()))? {
                EqAnswer::Yes => {
                    return Ok(finish(Outcome::Identified(Hypothesis::Single(h)), s, tried, p, bottom_size, start))
                }
                EqAnswer::Counterexample { instance, positive } => {
                    let mut entry = LoggedCounterexample {
                        instance: instance.clone(),
                        positive,
                        candidate: ci,
                        size_after: None,
                    };
                    if !positive {
                        s.log.push(entry);
                        continue 'candidates;
                    }
                    let full = db.union(&instance.description);
                    let budget = budget_for(cfg, dec, db, &instance);
                    match force_sim(&h, &instance.fact, dec, &full, budget)?.result {
                        SimResult::Generalized(next) => {
                            require_proper(&h, &next)?;
                            entry.size_after = Some(next.size());
                            s.log.push(entry);
                            h = next;
                        }
                        SimResult::Failure(_) => {
                            s.log.push(entry);
                            continue 'candidates;
                        }
                    }
                }
            }
        }
    }
    Ok(finish(Outcome::NoConsistentHypothesis, s, tried, p, bottom_size, start))
}

/// Force2: learns a recursive clause and a base clause together.
///
/// `initial_base` replaces the bottom clause as the starting base clause.
pub fn force2(
    cfg: &LearnConfig,
    dec: &Declaration,
    db: &Database,
    teacher: &mut impl EquivalenceOracle,
    basecase: &mut impl BasecaseOracle,
    initial_base: Option<&Clause>,
) -> Result<LearnResult> {
    let start = Instant::now();
    let bottom = bottom_star(cfg.d, dec).clause;
    let bottom_size = bottom.size();
    let base0 = initial_base.cloned().unwrap_or_else(|| bottom.clone());
    let cands = enumerate_recursive_literals(&bottom, dec, cfg.k, cfg.exclude_self);
    let p = cands.len();
    let mut s = Session {
        teacher,
        queries: 0,
        cap: (p + 1).saturating_mul(2 * bottom_size + 2),
        log: Vec::new(),
    };
    let mut tried = 0;
    'candidates: for ci in candidate_order(p, cfg.first_candidate) {
        tried += 1;
        let mut hr = with_recursive(&bottom, &cands[ci]);
        let mut hb = base0.clone();
        let mut simulate = |hr: &Clause,
                            hb: &Clause,
                            inst: &ExtendedInstance|
         -> Result<Option<(Clause, Clause)>> {
            let full = db.union(&inst.description);
            let budget = budget_for(cfg, dec, db, inst);
            let mut oracle = |f: &Fact| basecase.basecase(&inst.with_fact(f.clone()));
            Ok(force_sim2(hr, hb, &inst.fact, dec, &full, budget, &mut oracle)?.into_generalized())
        };
        if cfg.replay {
            let old: Vec<(ExtendedInstance, bool)> =
                s.log.iter().map(|e| (e.instance.clone(), e.positive)).collect();
            for (inst, positive) in &old {
                if *positive {
                    match simulate(&hr, &hb, inst)? {
                        Some((r, b)) => {
                            hr = r;
                            hb = b;
                        }
                        None => continue 'candidates,
                    }
                } else {
                    let budget = budget_for(cfg, dec, db, inst);
                    if covers(&[hr.clone(), hb.clone()], db, inst, budget) {
                        continue 'candidates;
                    }
                }
            }
        }
        loop {
            let hyp = Hypothesis::Pair {
                recursive: hr.clone(),
                base: hb.clone(),
            };
            match s.ask(&hyp)? {
                EqAnswer::Yes => return Ok(finish(Outcome::Identified(hyp), s, tried, p, bottom_size, start)),
                EqAnswer::Counterexample { instance, positive } => {
                    let mut entry = LoggedCounterexample {
                        instance: instance.clone(),
                        positive,
                        candidate: ci,
                        size_after: None,
                    };
                    if !positive {
                        s.log.push(entry);
                        continue 'candidates;
                    }
                    match simulate(&hr, &hb, &instance)? {
                        Some((r, b)) => {
                            if r.size() + b.size() >= hr.size() + hb.size() {
                                return Err(Error::Internal(format!(
                                    "update on a positive counterexample did not shrink the program: {hyp}"
                                )));
                            }
                            entry.size_after = Some(r.size() + b.size());
                            s.log.push(entry);
                            hr = r;
                            hb = b;
                        }
                        None => {
                            s.log.push(entry);
                            continue 'candidates;
                        }
                    }
                }
            }
        }
    }
    Ok(finish(Outcome::NoConsistentHypothesis, s, tried, p, bottom_size, start))
}

type RuleFn = Box<dyn Fn(&ExtendedInstance, &Database) -> bool + Send + Sync>;

/// A fixed decision procedure used in place of the basecase oracle.
pub struct BasecaseRule {
    pub name: String,
    rule: RuleFn,
}

impl BasecaseRule {
    pub fn new(name: impl Into<String>, rule: impl Fn(&ExtendedInstance, &Database) -> bool + Send + Sync + 'static) -> Self {
        BasecaseRule {
            name: name.into(),
            rule: Box::new(rule),
        }
    }

    pub fn applies(&self, inst: &ExtendedInstance, db: &Database) -> bool {
        (self.rule)(inst, db)
    }

    /// Yes iff no argument is a non-empty list, i.e. none has a `components` fact.
    pub fn no_nonnull_list() -> Self {
        BasecaseRule::new("nulllist", |inst, db| {
            inst.fact.args.iter().all(|a| !is_nonnull_list(a.as_str(), inst, db))
        })
    }

    /// Yes iff argument `i` (0-based) is the empty list.
    pub fn arg_null(i: usize) -> Self {
        BasecaseRule::new(format!("arg{}-null", i + 1), move |inst, _| {
            inst.fact.args.get(i).is_some_and(|a| a.as_str() == NIL)
        })
    }

    pub fn always_false() -> Self {
        BasecaseRule::new("never", |_, _| false)
    }
}

impl fmt::Debug for BasecaseRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasecaseRule({})", self.name)
    }
}

fn is_nonnull_list(c: &str, inst: &ExtendedInstance, db: &Database) -> bool {
    let has = |f: &Fact| f.pred.as_str() == COMPONENTS && f.args.first().is_some_and(|x| x.as_str() == c);
    inst.description.iter().any(has) || db.iter().any(has)
}

#[derive(Clone, Debug)]
pub struct RuleRun {
    pub rule: String,
    pub result: LearnResult,
}

/// Runs Force2 once per rule until one run identifies the target.
pub fn force2_with_rules(
    cfg: &LearnConfig,
    dec: &Declaration,
    db: &Database,
    teacher: &mut impl EquivalenceOracle,
    rules: &[BasecaseRule],
) -> Result<(Outcome, Vec<RuleRun>)> {
    let mut runs = Vec::new();
    for rule in rules {
        let mut oracle = FnBasecase(|inst: &ExtendedInstance| Ok(rule.applies(inst, db)));
        let result = force2(cfg, dec, db, teacher, &mut oracle, None)?;
        let done = matches!(result.outcome, Outcome::Identified(_));
        let outcome = result.outcome.clone();
        runs.push(RuleRun {
            rule: rule.name.clone(),
            result,
        });
        if done {
            return Ok((outcome, runs));
        }
    }
    Ok((Outcome::NoConsistentHypothesis, runs))
}

/// Least general recursive clauses, one per candidate, that cover every
/// positive and no negative example.
pub fn s_set(
    cfg: &LearnConfig,
    dec: &Declaration,
    db: &Database,
    positives: &[ExtendedInstance],
    negatives: &[ExtendedInstance],
) -> Result<Vec<Clause>> {
    let bottom = bottom_star(cfg.d, dec).clause;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    'candidates: for cand in enumerate_recursive_literals(&bottom, dec, cfg.k, cfg.exclude_self) {
        let mut h = with_recursive(&bottom, &cand);
        for inst in positives {
            let full = db.union(&inst.description);
            match force_sim(&h, &inst.fact, dec, &full, budget_for(cfg, dec, db, inst))?.into_generalized() {
                Some(next) => h = next,
                None => continue 'candidates,
            }
        }
        for inst in negatives {
            if covers(std::slice::from_ref(&h), db, inst, budget_for(cfg, dec, db, inst)) {
                continue 'candidates;
            }
        }
        if seen.insert(h.clone()) {
            out.push(h);
        }
    }
    Ok(out)
}
