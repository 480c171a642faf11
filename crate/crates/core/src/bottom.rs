//! Most-specific clauses built from a declaration: DEEPEN, CONSTRAIN,
//! their composition, and candidate closed recursive literals.
//!
//! Ordering inside one pass: variables are numbered by first appearance
//! (head first). DEEPEN emits candidates by input tuple, then by position of
//! the mode in the declaration. CONSTRAIN groups literals by their number of
//! inputs, then orders by tuple, then by mode position.

use std::collections::{BTreeSet, HashSet};

use crate::lp::{literal_mode, Clause, Declaration, Io, Literal, Mode, Symbol, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    /// Present in the clause the construction started from.
    Given,
    /// Added by the given DEEPEN round (1-based).
    Deepen(usize),
    Constrain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottomClause {
    pub clause: Clause,
    /// One entry per body literal.
    pub origins: Vec<Origin>,
    rounds: usize,
}

/// Input-position arguments of a literal under a mode, as the DEEPEN key.
type Key = (Mode, Vec<Term>);

fn key_of(mode: &Mode, lit: &Literal) -> Key {
    (
        mode.clone(),
        mode.input_positions().iter().map(|&i| lit.args[i].clone()).collect(),
    )
}

fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 0..n {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

impl BottomClause {
    /// `p(X1,...,Xa') <-` for the declaration's head.
    pub fn from_head(dec: &Declaration) -> Self {
        let args = (1..=dec.arity).map(|i| Term::var(&format!("X{i}"))).collect();
        BottomClause {
            clause: Clause::new(Literal::new(dec.head.clone(), args), Vec::new()),
            origins: Vec::new(),
            rounds: 0,
        }
    }

    pub fn from_clause(clause: Clause) -> Self {
        let origins = vec![Origin::Given; clause.body.len()];
        let rounds = next_free_round(&clause) - 1;
        BottomClause {
            clause,
            origins,
            rounds,
        }
    }

    pub fn size(&self) -> usize {
        self.clause.size()
    }

    pub fn variables(&self) -> Vec<Var> {
        self.clause.variables()
    }

    pub fn deepen(&mut self, dec: &Declaration) {
        self.rounds += 1;
        let round = self.rounds;
        let vars = self.clause.variables();
        let taken: HashSet<Var> = vars.iter().cloned().collect();
        let mut keys: HashSet<Key> = (0..self.clause.body.len())
            .map(|i| key_of(&literal_mode(&self.clause, i), &self.clause.body[i]))
            .collect();
        let modes: Vec<(usize, &Mode)> = dec
            .body_modes()
            .enumerate()
            .filter(|(_, m)| m.num_outputs() > 0)
            .collect();
        let mut cands: Vec<(Vec<usize>, usize)> = Vec::new();
        for (mi, m) in &modes {
            for t in tuples(vars.len(), m.input_positions().len()) {
                cands.push((t, *mi));
            }
        }
        cands.sort();
        let mut counter = 0usize;
        let mut fresh = || loop {
            counter += 1;
            let name = Symbol::from(format!("V{round}_{counter}"));
            if !taken.contains(&name) {
                return name;
            }
        };
        let by_index: Vec<&Mode> = dec.body_modes().collect();
        for (tuple, mi) in cands {
            let m = by_index[mi];
            let inputs: Vec<Term> = tuple.iter().map(|&v| Term::Var(vars[v].clone())).collect();
            let key = (m.clone(), inputs.clone());
            if keys.contains(&key) {
                continue;
            }
            let mut it = inputs.into_iter();
            let args = m
                .io
                .iter()
                .map(|io| match io {
                    Io::In => it.next().expect("tuple matches input count"),
                    Io::Out => Term::Var(fresh()),
                })
                .collect();
            self.clause.body.push(Literal::new(m.pred.clone(), args));
            self.origins.push(Origin::Deepen(round));
            keys.insert(key);
        }
    }

    pub fn constrain(&mut self, dec: &Declaration) {
        let vars = self.clause.variables();
        let mut present: HashSet<Literal> = self.clause.body.iter().cloned().collect();
        let mut cands: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        for (mi, m) in dec.body_modes().enumerate() {
            if m.num_outputs() > 0 {
                continue;
            }
            for t in tuples(vars.len(), m.arity()) {
                cands.push((m.arity(), t, mi));
            }
        }
        cands.sort();
        let by_index: Vec<&Mode> = dec.body_modes().collect();
        for (_, tuple, mi) in cands {
            let lit = Literal::new(
                by_index[mi].pred.clone(),
                tuple.iter().map(|&v| Term::Var(vars[v].clone())).collect(),
            );
            if present.insert(lit.clone()) {
                self.clause.body.push(lit);
                self.origins.push(Origin::Constrain);
            }
        }
    }
}

fn next_free_round(clause: &Clause) -> usize {
    let used: BTreeSet<usize> = clause
        .variables()
        .iter()
        .filter_map(|v| {
            let rest = v.as_str().strip_prefix('V')?;
            let (r, _) = rest.split_once('_')?;
            r.parse().ok()
        })
        .collect();
    used.iter().next_back().map_or(1, |r| r + 1)
}

/// One DEEPEN pass over `clause`.
pub fn deepen(clause: &Clause, dec: &Declaration) -> Clause {
    let mut b = BottomClause::from_clause(clause.clone());
    b.deepen(dec);
    b.clause
}

/// One CONSTRAIN pass over `clause`.
pub fn constrain(clause: &Clause, dec: &Declaration) -> Clause {
    let mut b = BottomClause::from_clause(clause.clone());
    b.constrain(dec);
    b.clause
}

/// CONSTRAIN applied after `d` rounds of DEEPEN on the bare head.
pub fn bottom_star(d: usize, dec: &Declaration) -> BottomClause {
    let mut b = BottomClause::from_head(dec);
    for _ in 0..d {
        b.deepen(dec);
    }
    b.constrain(dec);
    b
}

fn pow(base: u128, exp: usize) -> u128 {
    let mut r: u128 = 1;
    for _ in 0..exp {
        r = r.saturating_mul(base);
    }
    r
}

/// `n + (a n)^(a-1) n_r`, with `n` the body size of the input clause.
pub fn deepen_size_bound(n: usize, a: usize, n_r: usize) -> u128 {
    let an = (a as u128) * (n as u128);
    (n as u128).saturating_add(pow(an, a.saturating_sub(1)).saturating_mul(n_r as u128))
}

/// `n + (a n)^a n_r`, with `n` the body size of the input clause.
pub fn constrain_size_bound(n: usize, a: usize, n_r: usize) -> u128 {
    let an = (a as u128) * (n as u128);
    (n as u128).saturating_add(pow(an, a).saturating_mul(n_r as u128))
}

/// Bound on the number of literals one pass can add when the clause has `v`
/// variables: `n_r * v^(a-1)` for DEEPEN and `n_r * v^a` for CONSTRAIN.
pub fn added_literals_bound(v: usize, a: usize, n_r: usize, constrain: bool) -> u128 {
    let exp = if constrain { a } else { a.saturating_sub(1) };
    pow(v as u128, exp).saturating_mul(n_r as u128)
}

/// Candidate closed recursive literals, grouped into `k`-tuples.
///
/// For `k = 1` these are all `p(V1,...,Va')` with `Vi` ranging over the
/// clause's variables, in lexicographic order of variable index. For larger
/// `k` they are multisets of such literals, as nondecreasing index tuples.
/// With `exclude_self`, literals identical to the head are left out.
pub fn enumerate_recursive_literals(
    bottom: &Clause,
    dec: &Declaration,
    k: usize,
    exclude_self: bool,
) -> Vec<Vec<Literal>> {
    let vars = bottom.variables();
    let singles: Vec<Literal> = tuples(vars.len(), dec.arity)
        .into_iter()
        .map(|t| {
            Literal::new(
                dec.head.clone(),
                t.iter().map(|&i| Term::Var(vars[i].clone())).collect(),
            )
        })
        .filter(|l| !(exclude_self && *l == bottom.head))
        .collect();
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out: Vec<Vec<usize>> = (0..singles.len()).map(|i| vec![i]).collect();
    for _ in 1..k {
        let mut next = Vec::new();
        for t in &out {
            let last = *t.last().expect("nonempty");
            for j in last..singles.len() {
                let mut u = t.clone();
                u.push(j);
                next.push(u);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|t| t.into_iter().map(|i| singles[i].clone()).collect())
        .collect()
}

/// `bottom` with the given recursive literals appended.
pub fn with_recursive(bottom: &Clause, lits: &[Literal]) -> Clause {
    let mut c = bottom.clone();
    c.body.extend(lits.iter().cloned());
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{satisfies_declaration, Mode};

    fn d0() -> Declaration {
        Declaration::new(
            "p",
            2,
            ["mother+-", "father+-", "male+", "female+", "equal++"].iter().map(|s| {
                let cut = s.find(['+', '-']).unwrap();
                Mode::parse_signs(&s[..cut], &s[cut..]).unwrap()
            }),
        )
    }

    #[test]
    fn deepen_once_and_twice() {
        let dec = d0();
        let mut b = BottomClause::from_head(&dec);
        b.deepen(&dec);
        assert_eq!(
            b.clause.to_string(),
            "p(X1,X2) :- mother(X1,V1_1), father(X1,V1_2), mother(X2,V1_3), father(X2,V1_4)."
        );
        b.deepen(&dec);
        assert_eq!(b.size(), 12);
        assert_eq!(b.clause.body[4].to_string(), "mother(V1_1,V2_1)");
        assert!(satisfies_declaration(&b.clause, &dec));
    }

    #[test]
    fn bottom_zero_and_one() {
        let dec = d0();
        let b0 = bottom_star(0, &dec);
        assert_eq!(b0.size(), 8);
        let b1 = bottom_star(1, &dec);
        assert_eq!(b1.size(), 52);
        assert!(satisfies_declaration(&b1.clause, &dec));
        assert_eq!(b1.clause.body[4].to_string(), "male(X1)");
        assert_eq!(b1.clause.body[5].to_string(), "female(X1)");
        assert_eq!(b1, bottom_star(1, &dec));
    }

    #[test]
    fn empty_mode_set() {
        let dec = Declaration::new("p", 2, vec![]);
        assert_eq!(bottom_star(3, &dec).size(), 0);
        let only_eq = Declaration::new("p", 1, vec![crate::lp::equality_mode()]);
        assert_eq!(bottom_star(2, &only_eq).clause.to_string(), "p(X1) :- equal(X1,X1).");
    }

    #[test]
    fn recursive_candidates() {
        let dec = Declaration::new("p", 1, vec![Mode::parse_signs("q", "+-").unwrap()]);
        let b = bottom_star(0, &dec);
        assert!(enumerate_recursive_literals(&b.clause, &dec, 1, true).is_empty());
        assert_eq!(enumerate_recursive_literals(&b.clause, &dec, 1, false).len(), 1);
        let b = bottom_star(1, &dec);
        assert_eq!(enumerate_recursive_literals(&b.clause, &dec, 1, false).len(), 2);
        assert_eq!(enumerate_recursive_literals(&b.clause, &dec, 2, false).len(), 3);
        assert_eq!(enumerate_recursive_literals(&b.clause, &dec, 2, true).len(), 1);
    }

    #[test]
    fn bound_formulas() {
        assert_eq!(deepen_size_bound(4, 2, 5), 4 + 8 * 5);
        assert_eq!(constrain_size_bound(4, 2, 5), 4 + 64 * 5);
        assert_eq!(added_literals_bound(6, 2, 5, true), 180);
    }
}
