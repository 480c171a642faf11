//! Modes, declarations, variable depth, determinacy and literal support.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::syntax::{Clause, Fact, Literal, Symbol, Term, Var, EQUAL};

/// Input (`+`) or output (`-`) argument position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Io {
    In,
    Out,
}

impl Io {
    pub fn sign(self) -> char {
        match self {
            Io::In => '+',
            Io::Out => '-',
        }
    }
}

/// A mode string: predicate symbol plus one `+`/`-` marker per argument.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub pred: Symbol,
    pub io: Vec<Io>,
}

impl Mode {
    pub fn new(pred: impl Into<Symbol>, io: Vec<Io>) -> Self {
        Mode {
            pred: pred.into(),
            io,
        }
    }

    /// Parses the compact `+`/`-` notation, e.g. `Mode::parse_signs("components", "+--")`.
    pub fn parse_signs(pred: &str, signs: &str) -> Option<Self> {
        let io = signs
            .chars()
            .map(|c| match c {
                '+' => Some(Io::In),
                '-' | '−' => Some(Io::Out),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Mode::new(pred, io))
    }

    pub fn arity(&self) -> usize {
        self.io.len()
    }

    pub fn input_positions(&self) -> Vec<usize> {
        (0..self.io.len()).filter(|&i| self.io[i] == Io::In).collect()
    }

    pub fn output_positions(&self) -> Vec<usize> {
        (0..self.io.len()).filter(|&i| self.io[i] == Io::Out).collect()
    }

    pub fn num_outputs(&self) -> usize {
        self.io.iter().filter(|&&m| m == Io::Out).count()
    }

    pub fn inputs_of<'f>(&self, fact: &'f Fact) -> Vec<&'f Symbol> {
        self.input_positions().into_iter().map(|i| &fact.args[i]).collect()
    }

    pub fn outputs_of<'f>(&self, fact: &'f Fact) -> Vec<&'f Symbol> {
        self.output_positions().into_iter().map(|i| &fact.args[i]).collect()
    }

    pub fn applies_to(&self, fact: &Fact) -> bool {
        fact.pred == self.pred && fact.arity() == self.arity()
    }

    /// The signature suffix used when a predicate is split per mode, e.g. `io` for `(+,-)`.
    pub fn signature(&self) -> String {
        self.io
            .iter()
            .map(|m| match m {
                Io::In => 'i',
                Io::Out => 'o',
            })
            .collect()
    }
}

impl fmt::Display for Mode {
    /// Prolog-style notation: `components(+,-,-)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, m) in self.io.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", m.sign())?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Mode {
    /// Compact notation: `components+--`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        for m in &self.io {
            write!(f, "{}", m.sign())?;
        }
        Ok(())
    }
}

/// The hypothesis-space bias `(p, a', R)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Declaration {
    pub head: Symbol,
    pub arity: usize,
    modes: Vec<Mode>,
}

impl Declaration {
    /// Duplicate modes are dropped; the first occurrence fixes the order.
    pub fn new(head: impl Into<Symbol>, arity: usize, modes: impl IntoIterator<Item = Mode>) -> Self {
        let mut out: Vec<Mode> = Vec::new();
        for m in modes {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Declaration {
            head: head.into(),
            arity,
            modes: out,
        }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn contains(&self, mode: &Mode) -> bool {
        self.modes.contains(mode)
    }

    /// Size measure: cardinality of R.
    pub fn size(&self) -> usize {
        self.modes.len()
    }

    /// Largest arity among the mode strings (the `a` of a-DEC).
    pub fn max_arity(&self) -> usize {
        self.modes.iter().map(Mode::arity).max().unwrap_or(0)
    }

    pub fn is_head_mode(&self, m: &Mode) -> bool {
        m.pred == self.head && m.arity() == self.arity
    }

    /// Modes usable for non-recursive body literals.
    pub fn body_modes(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter().filter(move |m| !self.is_head_mode(m))
    }

    pub fn is_unique_mode(&self) -> bool {
        let mut seen: HashMap<(&Symbol, usize), &Mode> = HashMap::new();
        for m in &self.modes {
            if let Some(prev) = seen.insert((&m.pred, m.arity()), m) {
                if prev != m {
                    return false;
                }
            }
        }
        true
    }

    pub fn has_equality_mode(&self) -> bool {
        self.modes.contains(&equality_mode())
    }

    pub fn with_mode(&self, mode: Mode) -> Declaration {
        let mut modes = self.modes.clone();
        modes.push(mode);
        Declaration::new(self.head.clone(), self.arity, modes)
    }

    pub fn with_modes(&self, modes: Vec<Mode>) -> Declaration {
        Declaration::new(self.head.clone(), self.arity, modes)
    }

    /// The all-input mode for the head predicate, used by closed recursive literals.
    pub fn closed_recursive_mode(&self) -> Mode {
        Mode::new(self.head.clone(), vec![Io::In; self.arity])
    }
}

pub fn equality_mode() -> Mode {
    Mode::new(EQUAL, vec![Io::In, Io::In])
}

/// For every variable, the body position where it first occurs (`None` = head).
pub fn first_occurrences(clause: &Clause) -> HashMap<Var, Option<usize>> {
    let mut first = HashMap::new();
    for v in clause.head.vars() {
        first.entry(v.clone()).or_insert(None);
    }
    for (i, lit) in clause.body.iter().enumerate() {
        for v in lit.vars() {
            first.entry(v.clone()).or_insert(Some(i));
        }
    }
    first
}

fn mode_given(lit: &Literal, index: usize, first: &HashMap<Var, Option<usize>>) -> Mode {
    let io = lit
        .args
        .iter()
        .map(|t| match t {
            Term::Const(_) => Io::In,
            Term::Var(v) => match first.get(v) {
                Some(Some(j)) if *j >= index => Io::Out,
                _ => Io::In,
            },
        })
        .collect();
    Mode::new(lit.pred.clone(), io)
}

/// Mode of the body literal at `index`. Constants count as inputs.
pub fn literal_mode(clause: &Clause, index: usize) -> Mode {
    let first = first_occurrences(clause);
    mode_given(&clause.body[index], index, &first)
}

/// Modes of all body literals.
pub fn clause_modes(clause: &Clause) -> Vec<Mode> {
    let first = first_occurrences(clause);
    clause
        .body
        .iter()
        .enumerate()
        .map(|(i, l)| mode_given(l, i, &first))
        .collect()
}

/// Output variables of the body literal at `index`, in argument order without repeats.
pub fn output_vars(clause: &Clause, index: usize) -> Vec<Var> {
    let first = first_occurrences(clause);
    let mut out: Vec<Var> = Vec::new();
    for v in clause.body[index].vars() {
        if first.get(v) == Some(&Some(index)) && !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

/// Input variables of the body literal at `index`, in argument order (repeats kept).
pub fn input_vars(clause: &Clause, index: usize) -> Vec<Var> {
    let first = first_occurrences(clause);
    clause.body[index]
        .vars()
        .filter(|v| first.get(*v) != Some(&Some(index)))
        .cloned()
        .collect()
}

/// Per-variable depth and the clause depth.
///
/// Head variables have depth 0; any other variable gets one more than the
/// deepest input variable of the first literal that mentions it. A literal
/// with no input variables gives its outputs depth 1.
pub fn variable_depths(clause: &Clause) -> (BTreeMap<Var, usize>, usize) {
    let mut depth: BTreeMap<Var, usize> = BTreeMap::new();
    for v in clause.head.vars() {
        depth.insert(v.clone(), 0);
    }
    for lit in &clause.body {
        let inputs: Vec<usize> = lit.vars().filter_map(|v| depth.get(v).copied()).collect();
        let d = inputs.into_iter().max().map_or(1, |m| m + 1);
        for v in lit.vars() {
            depth.entry(v.clone()).or_insert(d);
        }
    }
    let max = depth.values().copied().max().unwrap_or(0);
    (depth, max)
}

pub fn satisfies_declaration(clause: &Clause, dec: &Declaration) -> bool {
    clause.head.pred == dec.head
        && clause.head.arity() == dec.arity
        && clause_modes(clause).iter().all(|m| dec.contains(m))
}

/// True iff the inputs of `mode` functionally determine its outputs over `universe`.
/// Facts of other predicates are ignored.
pub fn is_determinate_mode<'a>(mode: &Mode, universe: impl IntoIterator<Item = &'a Fact>) -> bool {
    let mut table: HashMap<Vec<&Symbol>, Vec<&Symbol>> = HashMap::new();
    for f in universe.into_iter().filter(|f| mode.applies_to(f)) {
        let outs = mode.outputs_of(f);
        match table.get(&mode.inputs_of(f)) {
            Some(prev) if *prev != outs => return false,
            Some(_) => {}
            None => {
                table.insert(mode.inputs_of(f), outs);
            }
        }
    }
    true
}

/// Body positions supported, directly or transitively, by the literal at `index`.
pub fn support_closure(clause: &Clause, index: usize) -> BTreeSet<usize> {
    let first = first_occurrences(clause);
    let introduced_at = |j: usize| -> BTreeSet<&Var> {
        clause.body[j]
            .vars()
            .filter(|v| first.get(*v) == Some(&Some(j)))
            .collect()
    };
    let mut closure = BTreeSet::new();
    let mut frontier = vec![index];
    while let Some(i) = frontier.pop() {
        let outs = introduced_at(i);
        if outs.is_empty() {
            continue;
        }
        for j in (i + 1)..clause.body.len() {
            if !closure.contains(&j) && clause.body[j].vars().any(|v| outs.contains(v)) {
                closure.insert(j);
                frontier.push(j);
            }
        }
    }
    closure
}
