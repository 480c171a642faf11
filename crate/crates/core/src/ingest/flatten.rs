//! Flattening of list terms into extended instances.
//!
//! Every distinct non-empty list gets a constant named from its content and
//! contributes one `components(List, Head, Tail)` fact to the description.
//! The empty list is the constant `nil`; `null(nil)` belongs in the database.

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use super::parse::{TermExample, TermValue};
use crate::error::{Error, Result};
use crate::lp::{covers, Clause, Database, ExtendedInstance, Fact, ProofBudget, Substitution, Symbol};

pub const NIL: &str = "nil";
pub const COMPONENTS: &str = "components";

#[derive(Clone, Debug, Default)]
pub struct FlattenOptions {
    /// Base clause whose ground consequences over the instance's constants are
    /// added to the description (for single-clause recursive targets).
    pub base_clause: Option<Clause>,
    /// Database consulted when evaluating `base_clause`.
    pub base_db: Database,
}

struct Flattener {
    description: BTreeSet<Fact>,
}

fn printed(t: &TermValue) -> String {
    match t {
        TermValue::Atom(a) | TermValue::Var(a) => a.clone(),
        TermValue::List(items, tail) => {
            let mut s = String::from("[");
            s.push_str(&items.iter().map(printed).collect::<Vec<_>>().join(","));
            if let Some(t) = tail {
                s.push('|');
                s.push_str(&printed(t));
            }
            s.push(']');
            s
        }
        TermValue::Compound(f, args) => {
            format!("{f}({})", args.iter().map(printed).collect::<Vec<_>>().join(","))
        }
    }
}

/// Constant name for a non-empty list: `l` plus the elements when they are all
/// one-character atoms (so `[1,2]` is `l12`), otherwise a content digest.
fn list_name(items: &[TermValue], tail: &Option<Box<TermValue>>) -> String {
    let simple = tail.is_none()
        && items
            .iter()
            .all(|t| matches!(t, TermValue::Atom(a) if a.chars().count() == 1));
    if simple {
        let mut s = String::from("l");
        for t in items {
            if let TermValue::Atom(a) = t {
                s.push_str(a);
            }
        }
        s
    } else {
        let digest = Sha256::digest(printed(&TermValue::List(items.to_vec(), tail.clone())).as_bytes());
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        format!("l_{hex}")
    }
}

impl Flattener {
    fn constant(&mut self, t: &TermValue) -> Result<Symbol> {
        match t {
            TermValue::Atom(a) => Ok(Symbol::new(a)),
            TermValue::Var(v) => Err(Error::Invalid(format!("example contains variable {v}"))),
            TermValue::Compound(f, _) => Err(Error::NonListFunctor(f.clone())),
            TermValue::List(items, tail) => self.list(items, tail),
        }
    }

    fn list(&mut self, items: &[TermValue], tail: &Option<Box<TermValue>>) -> Result<Symbol> {
        if items.is_empty() {
            return match tail {
                None => Ok(Symbol::new(NIL)),
                Some(t) => self.constant(t),
            };
        }
        let name = Symbol::from(list_name(items, tail));
        let head = self.constant(&items[0])?;
        let rest = self.list(&items[1..], tail)?;
        self.description
            .insert(Fact::new(COMPONENTS, vec![name.clone(), head, rest]));
        Ok(name)
    }
}

/// Flattens one term example.
pub fn flatten(example: &TermExample, opts: &FlattenOptions) -> Result<ExtendedInstance> {
    let mut fl = Flattener {
        description: BTreeSet::new(),
    };
    let args = example
        .args
        .iter()
        .map(|a| fl.constant(a))
        .collect::<Result<Vec<_>>>()?;
    let mut inst = ExtendedInstance::new(Fact::new(example.pred.as_str(), args), fl.description);
    if let Some(base) = &opts.base_clause {
        inst.description.extend(base_facts(base, &opts.base_db, &inst));
    }
    Ok(inst)
}

/// Ground instances of `base`'s head over the constants of `inst` that `base` proves.
pub fn base_facts(base: &Clause, db: &Database, inst: &ExtendedInstance) -> Vec<Fact> {
    let mut consts = inst.constants();
    consts.insert(Symbol::new(NIL));
    let consts: Vec<Symbol> = consts.into_iter().collect();
    let mut vars = Vec::new();
    for v in base.head.vars() {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    let full = db.union(&inst.description);
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    if consts.is_empty() && !vars.is_empty() {
        return out;
    }
    loop {
        let mut s = Substitution::new();
        for (v, &i) in vars.iter().zip(&idx) {
            s.bind(v.clone(), consts[i].clone());
        }
        if let Some(f) = base.head.apply(&s).to_fact() {
            let probe = ExtendedInstance::new(f.clone(), []);
            if covers(std::slice::from_ref(base), &full, &probe, ProofBudget::depth_only(1)) {
                out.push(f);
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < consts.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
