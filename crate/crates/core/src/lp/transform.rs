//! Equality augmentation and per-mode predicate splitting, plus the inverse
//! rewrite that turns a clause over split predicates back into the original
//! vocabulary.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::db::{Database, ExtendedInstance};
use super::mode::{equality_mode, Declaration, Mode};
use super::syntax::{Clause, Fact, Literal, Symbol, Term, Var, EQUAL};
use crate::error::{Error, Result};

fn is_equality(f: &Fact) -> bool {
    f.pred.as_str() == EQUAL
}

pub fn equality_facts<'a>(constants: impl IntoIterator<Item = &'a Symbol>) -> Vec<Fact> {
    constants
        .into_iter()
        .map(|c| Fact::new(EQUAL, vec![c.clone(), c.clone()]))
        .collect()
}

/// Adds `equal(c,c)` for every constant of `db` and the mode `equal(+,+)`.
///
/// An existing `equal` relation is accepted only if it is the identity on
/// the constants it mentions.
pub fn augment_equality(db: &Database, dec: &Declaration) -> Result<(Database, Declaration)> {
    for f in db.iter().filter(|f| is_equality(f)) {
        if f.arity() != 2 || f.args[0] != f.args[1] {
            return Err(Error::PredicateCollision(f.clone()));
        }
    }
    let constants = db.constants();
    let out = Database::new(db.iter().cloned().chain(equality_facts(&constants)));
    Ok((out, dec.with_mode(equality_mode())))
}

/// Adds `equal(c,c)` to the description for every constant of the instance.
pub fn augment_instance_equality(inst: &ExtendedInstance) -> ExtendedInstance {
    let mut out = inst.clone();
    let constants = inst.constants();
    out.description.extend(equality_facts(&constants));
    out
}

/// Inverse map from split predicate names to the original predicate and mode.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RenameTable {
    split: BTreeMap<Symbol, (Symbol, Mode)>,
    /// Original (predicate, arity) to its split names, in mode order.
    forward: BTreeMap<(Symbol, usize), Vec<Symbol>>,
}

impl RenameTable {
    /// Built from the original declaration. Predicates with one mode keep
    /// their name; so does the head predicate.
    pub fn from_declaration(dec: &Declaration) -> Self {
        let mut groups: BTreeMap<(Symbol, usize), Vec<Mode>> = BTreeMap::new();
        for m in dec.modes() {
            if dec.is_head_mode(m) {
                continue;
            }
            groups.entry((m.pred.clone(), m.arity())).or_default().push(m.clone());
        }
        let mut t = RenameTable::default();
        for (key, modes) in groups {
            if modes.len() < 2 {
                continue;
            }
            let mut names = Vec::new();
            for m in modes {
                let name = Symbol::from(format!("{}__{}", m.pred, m.signature()));
                t.split.insert(name.clone(), (m.pred.clone(), m));
                names.push(name);
            }
            t.forward.insert(key, names);
        }
        t
    }

    pub fn is_identity(&self) -> bool {
        self.split.is_empty()
    }

    pub fn original(&self, name: &Symbol) -> Option<&(Symbol, Mode)> {
        self.split.get(name)
    }

    /// The split copies of a fact (the fact itself if its predicate is not split).
    pub fn split_fact(&self, f: &Fact) -> Vec<Fact> {
        match self.forward.get(&(f.pred.clone(), f.arity())) {
            None => vec![f.clone()],
            Some(names) => names.iter().map(|n| Fact::new(n.clone(), f.args.clone())).collect(),
        }
    }

    pub fn split_instance(&self, inst: &ExtendedInstance) -> ExtendedInstance {
        let mut out = inst.clone();
        out.description = inst.description.iter().flat_map(|f| self.split_fact(f)).collect();
        out
    }

    fn restore(&self, lit: &Literal) -> Literal {
        match self.split.get(&lit.pred) {
            Some((orig, _)) => Literal::new(orig.clone(), lit.args.clone()),
            None => lit.clone(),
        }
    }
}

/// Gives every predicate with several modes one predicate per mode.
pub fn split_modes(db: &Database, dec: &Declaration) -> (Database, Declaration, RenameTable) {
    let table = RenameTable::from_declaration(dec);
    let facts: Vec<Fact> = db.iter().flat_map(|f| table.split_fact(f)).collect();
    let modes: Vec<Mode> = dec
        .modes()
        .iter()
        .map(|m| {
            let renamed = table
                .forward
                .get(&(m.pred.clone(), m.arity()))
                .and_then(|names| names.iter().find(|n| table.split[*n].1 == *m));
            match renamed {
                Some(n) => Mode::new(n.clone(), m.io.clone()),
                None => m.clone(),
            }
        })
        .collect();
    (Database::new(facts), dec.with_modes(modes), table)
}

/// Removes every `equal(S,T)` body literal by unifying `S` and `T`, then
/// restores split predicate names. Duplicate literals produced by the
/// unification are dropped. `equal` between two distinct constants is kept,
/// since it is simply false.
pub fn unsplit_clause(clause: &Clause, table: &RenameTable) -> Clause {
    let mut c = Clause::new(
        table.restore(&clause.head),
        clause.body.iter().map(|l| table.restore(l)).collect(),
    );
    loop {
        let pos = c.body.iter().position(|l| {
            l.pred.as_str() == EQUAL
                && l.arity() == 2
                && !matches!((&l.args[0], &l.args[1]), (Term::Const(a), Term::Const(b)) if a != b)
        });
        let Some(i) = pos else { break };
        let lit = c.body.remove(i);
        let (a, b) = (lit.args[0].clone(), lit.args[1].clone());
        if a == b {
            continue;
        }
        let order: HashMap<Var, usize> = c
            .variables()
            .into_iter()
            .enumerate()
            .map(|(k, v)| (v, k))
            .collect();
        let (keep, drop) = match (&a, &b) {
            (Term::Const(_), Term::Var(v)) => (a.clone(), v.clone()),
            (Term::Var(v), Term::Const(_)) => (b.clone(), v.clone()),
            (Term::Var(x), Term::Var(y)) => {
                let ox = order.get(x).copied().unwrap_or(usize::MAX);
                let oy = order.get(y).copied().unwrap_or(usize::MAX);
                if ox <= oy {
                    (a.clone(), y.clone())
                } else {
                    (b.clone(), x.clone())
                }
            }
            _ => unreachable!("distinct constants are skipped"),
        };
        let map = HashMap::from([(drop, keep)]);
        c = c.rename(&map);
    }
    let mut seen = BTreeSet::new();
    let body = c.body.iter().filter(|l| seen.insert((*l).clone())).cloned().collect();
    c.with_body(body)
}
