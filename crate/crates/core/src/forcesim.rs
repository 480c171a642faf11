//! Forced simulation: run a clause on a fact, deleting every body literal
//! that would fail (with the literals it supports) so that the result covers
//! the fact.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::lp::{
    first_occurrences, lookup_mgs, satisfies_declaration, Clause, Database, Declaration, Fact, Literal, MemoPolicy,
    ProofBudget, Substitution,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureReason {
    Budget,
    HeadMismatch,
    /// A recursive literal was not ground after the non-recursive pass.
    NonGround(Literal),
    /// The subgoal repeats one of its ancestors.
    Loop(Fact),
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::Budget => f.write_str("depth bound exhausted"),
            FailureReason::HeadMismatch => f.write_str("head does not unify with the goal"),
            FailureReason::NonGround(l) => write!(f, "recursive literal {l} is not ground"),
            FailureReason::Loop(g) => write!(f, "subgoal {g} repeats an ancestor"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimResult<T> {
    Generalized(T),
    Failure(FailureReason),
}

/// One application of the non-recursive pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimStep {
    pub subgoal: Fact,
    /// Literals with no database witness.
    pub failed: Vec<Literal>,
    /// Everything removed at this step: the failed literals and the literals they support.
    pub deleted: Vec<Literal>,
    pub sigma: Substitution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOutcome<T> {
    pub result: SimResult<T>,
    pub trace: Vec<SimStep>,
}

impl<T> SimOutcome<T> {
    pub fn generalized(&self) -> Option<&T> {
        match &self.result {
            SimResult::Generalized(t) => Some(t),
            SimResult::Failure(_) => None,
        }
    }

    pub fn into_generalized(self) -> Option<T> {
        match self.result {
            SimResult::Generalized(t) => Some(t),
            SimResult::Failure(_) => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self.result, SimResult::Failure(_))
    }
}

/// Non-recursive pass over the literals of `clause` outside `skip`.
///
/// Returns the surviving clause and the final substitution, or `None` when
/// the head does not unify with `goal`.
fn nr_pass(
    clause: &Clause,
    goal: &Fact,
    db: &Database,
    skip: &BTreeSet<usize>,
    trace: &mut Vec<SimStep>,
) -> Result<Option<(Clause, Substitution)>> {
    let Some(mut sigma) = Substitution::unify(&clause.head, goal) else {
        return Ok(None);
    };
    let first = first_occurrences(clause);
    let mut alive = vec![true; clause.body.len()];
    let mut failed = Vec::new();
    let mut deleted = Vec::new();
    for i in 0..clause.body.len() {
        if !alive[i] || skip.contains(&i) {
            continue;
        }
        if let Some(added) = lookup_mgs(&clause.body[i], &sigma, db)? {
            sigma.extend(&added);
            continue;
        }
        failed.push(clause.body[i].clone());
        alive[i] = false;
        deleted.push(clause.body[i].clone());
        let mut dead_vars: HashSet<_> = clause.body[i]
            .vars()
            .filter(|v| first.get(*v) == Some(&Some(i)))
            .cloned()
            .collect();
        for j in (i + 1)..clause.body.len() {
            if !alive[j] || skip.contains(&j) {
                continue;
            }
            if clause.body[j].vars().any(|v| dead_vars.contains(v)) {
                alive[j] = false;
                deleted.push(clause.body[j].clone());
                dead_vars.extend(
                    clause.body[j]
                        .vars()
                        .filter(|v| first.get(*v) == Some(&Some(j)))
                        .cloned(),
                );
            }
        }
    }
    let body = (0..clause.body.len())
        .filter(|&i| alive[i])
        .map(|i| clause.body[i].clone())
        .collect();
    trace.push(SimStep {
        subgoal: goal.clone(),
        failed,
        deleted,
        sigma: sigma.clone(),
    });
    Ok(Some((clause.with_body(body), sigma)))
}

fn check_dec(clause: &Clause, dec: &Declaration) -> Result<()> {
    if satisfies_declaration(clause, dec) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("clause does not satisfy the declaration: {clause}")))
    }
}

/// Forced simulation of a non-recursive clause.
pub fn force_sim_nr(h: &Clause, f: &Fact, dec: &Declaration, db: &Database) -> Result<SimOutcome<Clause>> {
    check_dec(h, dec)?;
    let mut trace = Vec::new();
    if db.contains(f) {
        return Ok(SimOutcome {
            result: SimResult::Generalized(h.clone()),
            trace,
        });
    }
    let result = match nr_pass(h, f, db, &BTreeSet::new(), &mut trace)? {
        None => SimResult::Failure(FailureReason::HeadMismatch),
        Some((c, _)) => SimResult::Generalized(c),
    };
    Ok(SimOutcome { result, trace })
}

/// What the engine does when a goal is reached.
enum Mode<'o> {
    /// `f ∈ DB` ends a branch; the bound is checked as `h < 0`.
    Single,
    /// A basecase oracle decides whether the base clause takes over; the
    /// bound is checked as `h < 1`.
    Pair {
        base: Clause,
        oracle: &'o mut dyn FnMut(&Fact) -> Result<bool>,
        dec: &'o Declaration,
    },
}

struct Frame {
    goal: Fact,
    depth: i64,
    subgoals: Vec<Fact>,
    next: usize,
}

enum Entered {
    Done,
    Expand(Vec<Fact>),
}

struct Engine<'a, 'o> {
    clause: Clause,
    db: &'a Database,
    memo: bool,
    mode: Mode<'o>,
    ancestors: HashSet<Fact>,
    proved: HashSet<Fact>,
    trace: Vec<SimStep>,
}

impl Engine<'_, '_> {
    fn enter(&mut self, goal: &Fact, depth: i64) -> Result<std::result::Result<Entered, FailureReason>> {
        let floor = match self.mode {
            Mode::Single => 0,
            Mode::Pair { .. } => 1,
        };
        if depth < floor {
            return Ok(Err(FailureReason::Budget));
        }
        if matches!(self.mode, Mode::Single) && self.db.contains(goal) {
            return Ok(Ok(Entered::Done));
        }
        if self.memo {
            if self.proved.contains(goal) {
                return Ok(Ok(Entered::Done));
            }
            if self.ancestors.contains(goal) {
                return Ok(Err(FailureReason::Loop(goal.clone())));
            }
        }
        if let Mode::Pair { base, oracle, dec } = &mut self.mode {
            if oracle(goal)? {
                let out = force_sim_nr(base, goal, dec, self.db)?;
                self.trace.extend(out.trace);
                return Ok(match out.result {
                    SimResult::Generalized(b) => {
                        *base = b;
                        if self.memo {
                            self.proved.insert(goal.clone());
                        }
                        Ok(Entered::Done)
                    }
                    SimResult::Failure(r) => Err(r),
                });
            }
        }
        let rec: BTreeSet<usize> = self.clause.recursive_positions().into_iter().collect();
        let Some((generalized, sigma)) = nr_pass(&self.clause, goal, self.db, &rec, &mut self.trace)? else {
            return Ok(Err(FailureReason::HeadMismatch));
        };
        self.clause = generalized;
        let mut subgoals = Vec::new();
        for i in self.clause.recursive_positions() {
            let lit = self.clause.body[i].apply(&sigma);
            match lit.to_fact() {
                Some(f) => subgoals.push(f),
                None => return Ok(Err(FailureReason::NonGround(self.clause.body[i].clone()))),
            }
        }
        Ok(Ok(Entered::Expand(subgoals)))
    }

    fn run(&mut self, goal: &Fact, depth: i64) -> Result<Option<FailureReason>> {
        let mut stack: Vec<Frame> = Vec::new();
        match self.enter(goal, depth)? {
            Err(r) => return Ok(Some(r)),
            Ok(Entered::Done) => return Ok(None),
            Ok(Entered::Expand(subgoals)) => {
                self.ancestors.insert(goal.clone());
                stack.push(Frame {
                    goal: goal.clone(),
                    depth,
                    subgoals,
                    next: 0,
                });
            }
        }
        while let Some(top) = stack.last_mut() {
            if top.next == top.subgoals.len() {
                let done = stack.pop().expect("nonempty");
                self.ancestors.remove(&done.goal);
                if self.memo {
                    self.proved.insert(done.goal);
                }
                if let Some(parent) = stack.last_mut() {
                    parent.next += 1;
                }
                continue;
            }
            let sub = top.subgoals[top.next].clone();
            let sub_depth = top.depth - 1;
            match self.enter(&sub, sub_depth)? {
                Err(r) => return Ok(Some(r)),
                Ok(Entered::Done) => {
                    if let Some(t) = stack.last_mut() {
                        t.next += 1;
                    }
                }
                Ok(Entered::Expand(subgoals)) => {
                    self.ancestors.insert(sub.clone());
                    stack.push(Frame {
                        goal: sub,
                        depth: sub_depth,
                        subgoals,
                        next: 0,
                    });
                }
            }
        }
        Ok(None)
    }
}

fn depth_of(budget: ProofBudget) -> i64 {
    i64::try_from(budget.depth).unwrap_or(i64::MAX)
}

/// Forced simulation of a closed recursive clause with any number of
/// recursive literals, which are processed left to right at each level.
pub fn force_sim(
    h: &Clause,
    f: &Fact,
    dec: &Declaration,
    db: &Database,
    budget: ProofBudget,
) -> Result<SimOutcome<Clause>> {
    check_dec(h, dec)?;
    let mut engine = Engine {
        clause: h.clone(),
        db,
        memo: budget.policy == MemoPolicy::VisitedMemo,
        mode: Mode::Single,
        ancestors: HashSet::new(),
        proved: HashSet::new(),
        trace: Vec::new(),
    };
    let failure = engine.run(f, depth_of(budget))?;
    Ok(SimOutcome {
        result: match failure {
            Some(r) => SimResult::Failure(r),
            None => SimResult::Generalized(engine.clause),
        },
        trace: engine.trace,
    })
}

/// Forced simulation of a recursive clause `hr` and a base clause `hb`,
/// with `basecase` deciding which clause handles each goal.
pub fn force_sim2(
    hr: &Clause,
    hb: &Clause,
    f: &Fact,
    dec: &Declaration,
    db: &Database,
    budget: ProofBudget,
    basecase: &mut dyn FnMut(&Fact) -> Result<bool>,
) -> Result<SimOutcome<(Clause, Clause)>> {
    check_dec(hr, dec)?;
    check_dec(hb, dec)?;
    let mut engine = Engine {
        clause: hr.clone(),
        db,
        memo: budget.policy == MemoPolicy::VisitedMemo,
        mode: Mode::Pair {
            base: hb.clone(),
            oracle: basecase,
            dec,
        },
        ancestors: HashSet::new(),
        proved: HashSet::new(),
        trace: Vec::new(),
    };
    let failure = engine.run(f, depth_of(budget))?;
    let Mode::Pair { base, .. } = engine.mode else {
        unreachable!("pair mode is fixed at construction")
    };
    Ok(SimOutcome {
        result: match failure {
            Some(r) => SimResult::Failure(r),
            None => SimResult::Generalized((engine.clause, base)),
        },
        trace: engine.trace,
    })
}
