//! Function-free terms, literals, facts, clauses and substitutions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// An interned-ish name. Cheap to clone, ordered by its text.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A variable name. Kept distinct from constants at the type level.
pub type Var = Symbol;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Symbol),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(Symbol::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v.as_str()),
        }
    }
}

/// A predicate applied to constants and variables. Arity is `args.len()`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(pred: impl Into<Symbol>, args: Vec<Term>) -> Self {
        Literal {
            pred: pred.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Variables in argument order, with repeats.
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn same_relation(&self, other: &Literal) -> bool {
        self.pred == other.pred && self.arity() == other.arity()
    }

    /// Applies `sigma`; unbound variables are left in place.
    pub fn apply(&self, sigma: &Substitution) -> Literal {
        Literal {
            pred: self.pred.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => match sigma.get(v) {
                        Some(c) => Term::Const(c.clone()),
                        None => t.clone(),
                    },
                    Term::Const(_) => t.clone(),
                })
                .collect(),
        }
    }

    pub fn to_fact(&self) -> Option<Fact> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Fact {
            pred: self.pred.clone(),
            args,
        })
    }

    /// Renames variables; variables missing from the map are kept.
    pub fn rename(&self, map: &HashMap<Var, Term>) -> Literal {
        Literal {
            pred: self.pred.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
                    Term::Const(_) => t.clone(),
                })
                .collect(),
        }
    }

    /// Matches this literal against a ground fact, extending `sigma`.
    /// Returns the bindings added, or `None` on a clash.
    pub fn match_fact(&self, fact: &Fact, sigma: &Substitution) -> Option<Substitution> {
        if self.pred != fact.pred || self.arity() != fact.arity() {
            return None;
        }
        let mut added = Substitution::new();
        for (t, c) in self.args.iter().zip(&fact.args) {
            match t {
                Term::Const(k) => {
                    if k != c {
                        return None;
                    }
                }
                Term::Var(v) => {
                    let bound = sigma.get(v).or_else(|| added.get(v));
                    match bound {
                        Some(b) if b != c => return None,
                        Some(_) => {}
                        None => {
                            added.bind(v.clone(), c.clone());
                        }
                    }
                }
            }
        }
        Some(added)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A ground atom. Contains no variables by construction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub pred: Symbol,
    pub args: Vec<Symbol>,
}

impl Fact {
    pub fn new(pred: impl Into<Symbol>, args: Vec<Symbol>) -> Self {
        Fact {
            pred: pred.into(),
            args,
        }
    }

    /// Convenience constructor from string slices.
    pub fn from_strs(pred: &str, args: &[&str]) -> Self {
        Fact::new(pred, args.iter().map(|a| Symbol::new(a)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn to_literal(&self) -> Literal {
        Literal {
            pred: self.pred.clone(),
            args: self.args.iter().cloned().map(Term::Const).collect(),
        }
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_literal(), f)
    }
}

/// A definite clause with an ordered body.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub head: Literal,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn new(head: Literal, body: Vec<Literal>) -> Self {
        Clause { head, body }
    }

    /// Size measure: number of body literals.
    pub fn size(&self) -> usize {
        self.body.len()
    }

    pub fn is_recursive_literal(&self, lit: &Literal) -> bool {
        lit.same_relation(&self.head)
    }

    /// Body positions holding recursive literals.
    pub fn recursive_positions(&self) -> Vec<usize> {
        (0..self.body.len())
            .filter(|&i| self.is_recursive_literal(&self.body[i]))
            .collect()
    }

    pub fn is_recursive(&self) -> bool {
        self.body.iter().any(|l| self.is_recursive_literal(l))
    }

    /// Distinct variables in order of first appearance, head first.
    pub fn variables(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for lit in std::iter::once(&self.head).chain(&self.body) {
            for v in lit.vars() {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn with_body(&self, body: Vec<Literal>) -> Clause {
        Clause {
            head: self.head.clone(),
            body,
        }
    }

    /// Keeps the body positions in `keep` (ascending order preserved).
    pub fn restrict(&self, keep: impl IntoIterator<Item = usize>) -> Clause {
        self.with_body(keep.into_iter().map(|i| self.body[i].clone()).collect())
    }

    pub fn push(&self, lit: Literal) -> Clause {
        let mut c = self.clone();
        c.body.push(lit);
        c
    }

    pub fn rename(&self, map: &HashMap<Var, Term>) -> Clause {
        Clause {
            head: self.head.rename(map),
            body: self.body.iter().map(|l| l.rename(map)).collect(),
        }
    }

    /// True iff `other` equals `self` up to a bijective renaming of variables.
    pub fn is_variant_of(&self, other: &Clause) -> bool {
        if self.body.len() != other.body.len() {
            return false;
        }
        let mut fwd: HashMap<&Var, &Var> = HashMap::new();
        let mut bwd: HashMap<&Var, &Var> = HashMap::new();
        let pairs = std::iter::once((&self.head, &other.head)).chain(self.body.iter().zip(&other.body));
        for (a, b) in pairs {
            if !a.same_relation(b) {
                return false;
            }
            for (x, y) in a.args.iter().zip(&b.args) {
                match (x, y) {
                    (Term::Const(p), Term::Const(q)) if p == q => {}
                    (Term::Var(p), Term::Var(q)) => {
                        if *fwd.entry(p).or_insert(q) != q || *bwd.entry(q).or_insert(p) != p {
                            return false;
                        }
                    }
                    _ => return false,
                }
            }
        }
        true
    }

    /// Drops literals that are redundant given the equality axioms:
    /// `equal(V,V)`, and `equal(W,V)` when `equal(V,W)` occurs earlier.
    pub fn without_redundant_equalities(&self) -> Clause {
        let mut seen: BTreeSet<(Term, Term)> = BTreeSet::new();
        let body = self
            .body
            .iter()
            .filter(|l| {
                if l.pred.as_str() != EQUAL || l.arity() != 2 {
                    return true;
                }
                let (a, b) = (&l.args[0], &l.args[1]);
                if a == b {
                    return false;
                }
                if seen.contains(&(b.clone(), a.clone())) || seen.contains(&(a.clone(), b.clone())) {
                    return false;
                }
                seen.insert((a.clone(), b.clone()));
                true
            })
            .cloned()
            .collect();
        self.with_body(body)
    }
}

/// Name of the equality predicate.
pub const EQUAL: &str = "equal";

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

/// A finite function from variables to constants.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    bindings: BTreeMap<Var, Symbol>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Symbol> {
        self.bindings.get(v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.bindings.contains_key(v)
    }

    /// Binds `v`. Rebinding to a different constant is a logic error.
    pub fn bind(&mut self, v: Var, c: Symbol) {
        let prev = self.bindings.insert(v, c.clone());
        debug_assert!(prev.map_or(true, |p| p == c), "substitution must stay functional");
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Symbol)> {
        self.bindings.iter()
    }

    /// Union of two substitutions with disjoint domains; `None` otherwise.
    pub fn compose(&self, other: &Substitution) -> Option<Substitution> {
        if other.bindings.keys().any(|k| self.bindings.contains_key(k)) {
            return None;
        }
        let mut out = self.clone();
        out.bindings
            .extend(other.bindings.iter().map(|(k, v)| (k.clone(), v.clone())));
        Some(out)
    }

    /// In-place union; bindings already present must agree.
    pub fn extend(&mut self, other: &Substitution) {
        for (k, v) in &other.bindings {
            self.bind(k.clone(), v.clone());
        }
    }

    /// Keeps only the given variables.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> Substitution {
        let mut out = Substitution::new();
        for v in vars {
            if let Some(c) = self.bindings.get(v) {
                out.bindings.insert(v.clone(), c.clone());
            }
        }
        out
    }

    /// Most general unifier of a (possibly non-linear) literal with a fact.
    pub fn unify(lit: &Literal, fact: &Fact) -> Option<Substitution> {
        lit.match_fact(fact, &Substitution::new())
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}
