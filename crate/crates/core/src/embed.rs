//! Mapping a determinate clause onto an equivalent subclause of a bottom
//! clause through the variable map θ_C.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::bottom::BottomClause;
use crate::error::{Error, Result};
use crate::lp::{
    clause_modes, literal_mode, variable_depths, Clause, Declaration, Io, Literal, Mode, Symbol, Term, Var, EQUAL,
};

fn fresh_var(taken: &mut HashSet<Var>, stem: &str) -> Var {
    let mut i = 0usize;
    loop {
        i += 1;
        let v = Symbol::from(format!("{stem}{i}"));
        if taken.insert(v.clone()) {
            return v;
        }
    }
}

fn inputs_under(mode: &Mode, lit: &Literal) -> Vec<Term> {
    mode.input_positions().iter().map(|&i| lit.args[i].clone()).collect()
}

/// Merges literals that share predicate, mode and input arguments: the later
/// literal's outputs are identified with the earlier one's and it is dropped.
/// An output repeated in the later literal but not the earlier one becomes an
/// `equal` literal.
pub fn merge_duplicate_literals(clause: &Clause) -> Clause {
    let mut c = clause.clone();
    'outer: loop {
        let modes = clause_modes(&c);
        let mut seen: HashMap<(Mode, Vec<Term>), usize> = HashMap::new();
        for (i, lit) in c.body.iter().enumerate() {
            if modes[i].num_outputs() == 0 {
                continue;
            }
            let key = (modes[i].clone(), inputs_under(&modes[i], lit));
            let Some(&j) = seen.get(&key) else {
                seen.insert(key, i);
                continue;
            };
            let earlier = &c.body[j];
            let mut map: HashMap<Var, Term> = HashMap::new();
            let mut extra = Vec::new();
            for p in modes[i].output_positions() {
                let Term::Var(v) = &lit.args[p] else { continue };
                let target = earlier.args[p].clone();
                match map.get(v) {
                    None => {
                        map.insert(v.clone(), target);
                    }
                    Some(prev) if *prev != target => {
                        extra.push(Literal::new(EQUAL, vec![prev.clone(), target]));
                    }
                    Some(_) => {}
                }
            }
            let mut body: Vec<Literal> = c.body[..i].to_vec();
            body.extend(extra);
            body.extend(c.body[i + 1..].iter().cloned());
            c = c.with_body(body).rename(&map);
            continue 'outer;
        }
        return c;
    }
}

/// Rewrites literals whose mode is not declared but becomes declared after
/// turning some inputs into outputs: each such argument is replaced by a
/// fresh variable tied to the old one by an `equal` literal placed right
/// after it.
pub fn repair_modes(clause: &Clause, dec: &Declaration) -> Result<Clause> {
    let mut taken: HashSet<Var> = clause.variables().into_iter().collect();
    let mut c = clause.clone();
    let mut i = 0;
    while i < c.body.len() {
        let lit = c.body[i].clone();
        if c.is_recursive_literal(&lit) {
            i += 1;
            continue;
        }
        let mode = literal_mode(&c, i);
        if dec.contains(&mode) {
            i += 1;
            continue;
        }
        let fix = dec.body_modes().find(|m| {
            m.pred == mode.pred
                && m.arity() == mode.arity()
                && m.io.iter().zip(&mode.io).all(|(want, have)| want == have || (*want == Io::Out && *have == Io::In))
        });
        let Some(fix) = fix.cloned() else {
            return Err(Error::EmbeddingFailure(format!("mode {mode} of {lit} is not declared")));
        };
        if !dec.has_equality_mode() {
            return Err(Error::EmbeddingFailure(format!(
                "mode {mode} of {lit} needs equal(+,+) to be repaired"
            )));
        }
        let mut args = lit.args.clone();
        let mut ties = Vec::new();
        for (p, (want, have)) in fix.io.iter().zip(&mode.io).enumerate() {
            if *want == Io::Out && *have == Io::In {
                if !args[p].is_var() {
                    return Err(Error::EmbeddingFailure(format!("constant in {lit}")));
                }
                let f = fresh_var(&mut taken, "F");
                ties.push(Literal::new(EQUAL, vec![Term::Var(f.clone()), args[p].clone()]));
                args[p] = Term::Var(f);
            }
        }
        c.body[i] = Literal::new(lit.pred.clone(), args);
        let n = ties.len();
        for (k, t) in ties.into_iter().enumerate() {
            c.body.insert(i + 1 + k, t);
        }
        i += 1 + n;
    }
    Ok(c)
}

/// Duplicate merging and mode repair, repeated until nothing changes.
pub fn normalize_for_embedding(clause: &Clause, dec: &Declaration) -> Result<Clause> {
    let mut c = merge_duplicate_literals(clause);
    loop {
        let next = merge_duplicate_literals(&repair_modes(&c, dec)?);
        if next == c {
            return Ok(c);
        }
        c = next;
    }
}

/// θ_C: bottom-clause variables to variables of `c`.
pub fn theta(c: &Clause, bottom: &Clause) -> Result<HashMap<Var, Var>> {
    let mut th: HashMap<Var, Var> = HashMap::new();
    if bottom.head.pred != c.head.pred || bottom.head.arity() != c.head.arity() {
        return Err(Error::EmbeddingFailure("head predicates differ".into()));
    }
    for (b, t) in bottom.head.args.iter().zip(&c.head.args) {
        match (b, t) {
            (Term::Var(x), Term::Var(y)) => {
                th.insert(x.clone(), y.clone());
            }
            _ => return Err(Error::EmbeddingFailure(format!("constant in head {}", c.head))),
        }
    }
    let bmodes = clause_modes(bottom);
    let cmodes = clause_modes(c);
    for (i, lit) in c.body.iter().enumerate() {
        if c.is_recursive_literal(lit) {
            continue;
        }
        if lit.args.iter().any(|t| !t.is_var()) {
            return Err(Error::EmbeddingFailure(format!("constant in {lit}")));
        }
        let m = &cmodes[i];
        let want = inputs_under(m, lit);
        let mut found = false;
        for (j, cand) in bottom.body.iter().enumerate() {
            if bmodes[j] != *m || cand.pred != lit.pred {
                continue;
            }
            let matches = inputs_under(m, cand).iter().zip(&want).all(|(tb, tc)| match (tb, tc) {
                (Term::Var(x), Term::Var(y)) => th.get(x) == Some(y),
                _ => false,
            });
            if !matches {
                continue;
            }
            found = true;
            for p in m.output_positions() {
                if let (Term::Var(u), Term::Var(v)) = (&cand.args[p], &lit.args[p]) {
                    th.insert(u.clone(), v.clone());
                }
            }
        }
        if !found {
            return Err(Error::EmbeddingFailure(format!("no image for {lit}")));
        }
    }
    Ok(th)
}

/// The subclause C' of `bottom` selected by θ_C for `c`.
///
/// `c` is first normalized (see [`normalize_for_embedding`]). Fails when
/// `c` is deeper than `d`, contains constants, or has a literal without an
/// image in the bottom clause.
pub fn embed_subclause(c: &Clause, dec: &Declaration, bottom: &BottomClause, d: usize) -> Result<Clause> {
    let c = normalize_for_embedding(c, dec)?;
    let (_, depth) = variable_depths(&c);
    if depth > d {
        return Err(Error::EmbeddingFailure(format!("clause depth {depth} exceeds {d}")));
    }
    let b = &bottom.clause;
    let th = theta(&c, b)?;
    let image = |l: &Literal| -> Option<Literal> {
        let args = l
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => th.get(v).map(|w| Term::Var(w.clone())),
                Term::Const(_) => Some(t.clone()),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Literal::new(l.pred.clone(), args))
    };
    let body: BTreeSet<&Literal> = c.body.iter().collect();
    let mut out = Vec::new();
    for l in &b.body {
        let Some(img) = image(l) else { continue };
        let keep = if l.pred.as_str() == EQUAL && l.arity() == 2 {
            let flipped = Literal::new(EQUAL, vec![img.args[1].clone(), img.args[0].clone()]);
            img.args[0] == img.args[1] || body.contains(&img) || body.contains(&flipped)
        } else {
            body.contains(&img)
        };
        if keep {
            out.push(l.clone());
        }
    }
    Ok(b.with_body(out))
}

/// Canonical form for comparing clauses that differ only in redundant
/// equalities: reflexive and symmetric duplicates are dropped and each
/// remaining `equal` is oriented by first appearance of its variables.
pub fn canonical_equalities(c: &Clause) -> Clause {
    let order: HashMap<Var, usize> = c.variables().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    let rank = |t: &Term| match t {
        Term::Var(v) => order.get(v).copied().unwrap_or(usize::MAX),
        Term::Const(_) => usize::MAX,
    };
    let oriented = c.with_body(
        c.body
            .iter()
            .map(|l| {
                if l.pred.as_str() == EQUAL && l.arity() == 2 && rank(&l.args[1]) < rank(&l.args[0]) {
                    Literal::new(EQUAL, vec![l.args[1].clone(), l.args[0].clone()])
                } else {
                    l.clone()
                }
            })
            .collect(),
    );
    oriented.without_redundant_equalities()
}
