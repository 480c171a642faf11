//! Ground databases and extended instances.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::syntax::{Fact, Literal, Substitution, Symbol, Term};

#[derive(Clone, PartialEq, Eq, Hash)]
struct ArgKey {
    pred: Symbol,
    arity: usize,
    pos: usize,
    value: Symbol,
}

/// An immutable set of ground facts with argument indexes.
#[derive(Clone, Default)]
pub struct Database {
    facts: Vec<Fact>,
    set: HashSet<Fact>,
    by_relation: HashMap<(Symbol, usize), Vec<usize>>,
    by_arg: HashMap<ArgKey, Vec<usize>>,
}

impl Database {
    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Self {
        let sorted: BTreeSet<Fact> = facts.into_iter().collect();
        let facts: Vec<Fact> = sorted.into_iter().collect();
        let mut by_relation: HashMap<(Symbol, usize), Vec<usize>> = HashMap::new();
        let mut by_arg: HashMap<ArgKey, Vec<usize>> = HashMap::new();
        for (i, f) in facts.iter().enumerate() {
            by_relation
                .entry((f.pred.clone(), f.arity()))
                .or_default()
                .push(i);
            for (pos, value) in f.args.iter().enumerate() {
                by_arg
                    .entry(ArgKey {
                        pred: f.pred.clone(),
                        arity: f.arity(),
                        pos,
                        value: value.clone(),
                    })
                    .or_default()
                    .push(i);
            }
        }
        let set = facts.iter().cloned().collect();
        Database {
            facts,
            set,
            by_relation,
            by_arg,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Size measure: cardinality.
    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.set.contains(f)
    }

    /// Facts in canonical order.
    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    /// This database together with `extra` facts.
    pub fn union<'a>(&self, extra: impl IntoIterator<Item = &'a Fact>) -> Database {
        Database::new(self.facts.iter().cloned().chain(extra.into_iter().cloned()))
    }

    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.facts.iter().flat_map(|f| f.args.iter().cloned()).collect()
    }

    pub fn max_arity(&self) -> usize {
        self.facts.iter().map(Fact::arity).max().unwrap_or(0)
    }

    pub fn predicates(&self) -> BTreeSet<(Symbol, usize)> {
        self.by_relation.keys().cloned().collect()
    }

    pub fn facts_of(&self, pred: &Symbol, arity: usize) -> impl Iterator<Item = &Fact> {
        self.by_relation
            .get(&(pred.clone(), arity))
            .into_iter()
            .flatten()
            .map(move |&i| &self.facts[i])
    }

    /// Facts unifying with `lit` under `sigma`, found through the narrowest index.
    pub fn matching<'a>(&'a self, lit: &Literal, sigma: &Substitution) -> Vec<&'a Fact> {
        let mut best: Option<&Vec<usize>> = None;
        for (pos, t) in lit.args.iter().enumerate() {
            let value = match t {
                Term::Const(c) => Some(c),
                Term::Var(v) => sigma.get(v),
            };
            if let Some(value) = value {
                let key = ArgKey {
                    pred: lit.pred.clone(),
                    arity: lit.arity(),
                    pos,
                    value: value.clone(),
                };
                match self.by_arg.get(&key) {
                    None => return Vec::new(),
                    Some(bucket) => {
                        if best.map_or(true, |b| bucket.len() < b.len()) {
                            best = Some(bucket);
                        }
                    }
                }
            }
        }
        let candidates: Box<dyn Iterator<Item = &usize>> = match best {
            Some(bucket) => Box::new(bucket.iter()),
            None => match self.by_relation.get(&(lit.pred.clone(), lit.arity())) {
                Some(all) => Box::new(all.iter()),
                None => return Vec::new(),
            },
        };
        candidates
            .map(|&i| &self.facts[i])
            .filter(|f| lit.match_fact(f, sigma).is_some())
            .collect()
    }
}

impl std::fmt::Debug for Database {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(&self.facts).finish()
    }
}

impl PartialEq for Database {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
    }
}

impl Eq for Database {}

impl FromIterator<Fact> for Database {
    fn from_iter<T: IntoIterator<Item = Fact>>(iter: T) -> Self {
        Database::new(iter)
    }
}

/// An example: a ground instance fact plus a private description.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedInstance {
    pub fact: Fact,
    pub description: BTreeSet<Fact>,
    /// `Some(true)` for a positive example, `Some(false)` for a negative one.
    pub label: Option<bool>,
}

impl ExtendedInstance {
    pub fn new(fact: Fact, description: impl IntoIterator<Item = Fact>) -> Self {
        ExtendedInstance {
            fact,
            description: description.into_iter().collect(),
            label: None,
        }
    }

    pub fn labelled(mut self, positive: bool) -> Self {
        self.label = Some(positive);
        self
    }

    /// Size measure: cardinality of the description.
    pub fn size(&self) -> usize {
        self.description.len()
    }

    /// The same description with a different instance fact (used for subgoals).
    pub fn with_fact(&self, fact: Fact) -> Self {
        ExtendedInstance {
            fact,
            description: self.description.clone(),
            label: None,
        }
    }

    /// Constants mentioned by the fact or the description.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.fact
            .args
            .iter()
            .chain(self.description.iter().flat_map(|f| f.args.iter()))
            .cloned()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lit(p: &str, args: &[&str]) -> Literal {
        Literal::new(
            p,
            args.iter()
                .map(|a| {
                    if a.starts_with(|c: char| c.is_ascii_uppercase()) {
                        Term::var(a)
                    } else {
                        Term::constant(a)
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn union_and_membership() {
        let db = Database::new([Fact::from_strs("null", &["nil"])]);
        let ext = db.union(&[Fact::from_strs("odd", &["1"])]);
        assert_eq!(ext.len(), 2);
        assert!(ext.contains(&Fact::from_strs("null", &["nil"])));
        assert_eq!(ext.constants().len(), 2);
    }

    proptest! {
        #[test]
        fn index_lookup_agrees_with_linear_scan(
            facts in proptest::collection::vec((0u8..3, 0u8..4, 0u8..4), 0..40),
            pattern in (0u8..3, proptest::option::of(0u8..4), proptest::option::of(0u8..4)),
        ) {
            let preds = ["p", "q", "r"];
            let consts = ["a", "b", "c", "d"];
            let db = Database::new(facts.iter().map(|&(p, x, y)| {
                Fact::from_strs(preds[p as usize], &[consts[x as usize], consts[y as usize]])
            }));
            let a0 = pattern.1.map_or("X", |i| consts[i as usize]);
            let a1 = pattern.2.map_or("Y", |i| consts[i as usize]);
            let l = lit(preds[pattern.0 as usize], &[a0, a1]);
            let indexed: BTreeSet<Fact> = db.matching(&l, &Substitution::new()).into_iter().cloned().collect();
            let scanned: BTreeSet<Fact> = db
                .iter()
                .filter(|f| l.match_fact(f, &Substitution::new()).is_some())
                .cloned()
                .collect();
            prop_assert_eq!(indexed, scanned);
        }
    }
}
