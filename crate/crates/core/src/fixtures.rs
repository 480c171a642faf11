//! Small worked data sets: a family database, flattened list append,
//! `less_than` over successor, and binary tree / DAG recursion.
//!
//! Pools are returned unlabelled; [`crate::teacher::TargetSpec::new`] labels
//! them from the target program.

use crate::ingest::flatten::{base_facts, flatten, FlattenOptions};
use crate::ingest::parse::{parse_clause, parse_declaration, TermExample, TermValue};
use crate::lp::transform::{augment_instance_equality, equality_facts};
use crate::lp::{Clause, Database, Declaration, ExtendedInstance, Fact, Symbol};

fn clause(src: &str) -> Clause {
    parse_clause(src).expect("fixture clause")
}

fn dec(src: &str) -> Declaration {
    parse_declaration(src).expect("fixture declaration")
}

fn fact(p: &str, args: &[&str]) -> Fact {
    Fact::from_strs(p, args)
}

fn with_equality(facts: Vec<Fact>) -> Database {
    let db = Database::new(facts);
    let consts = db.constants();
    db.union(&equality_facts(&consts))
}

// ---------------------------------------------------------------- family

/// D0: `p/2` over mother, father, male, female and equality.
pub fn family_dec() -> Declaration {
    dec("head: p/2\nmode: mother(+,-)\nmode: father(+,-)\nmode: male(+)\nmode: female(+)\nmode: equal(+,+)\n")
}

const PARENTS: &[(&str, &str, &str)] = &[
    ("ann", "gma", "gpa"),
    ("bob", "gma", "gpa"),
    ("cat", "nan", "pop"),
    ("dan", "nan", "pop"),
    ("eve", "ann", "dan"),
    ("fay", "ann", "dan"),
    ("gus", "cat", "bob"),
    ("hal", "cat", "bob"),
    ("ivy", "ann", "dan"),
    ("jon", "ann", "dan"),
];

const MALES: &[&str] = &["gpa", "pop", "bob", "dan", "gus", "hal", "jon"];
const FEMALES: &[&str] = &["gma", "nan", "ann", "cat", "eve", "fay", "ivy"];

/// Three generations with a single mother and father per person.
pub fn family_db() -> Database {
    let mut facts = Vec::new();
    for (c, m, f) in PARENTS {
        facts.push(fact("mother", &[c, m]));
        facts.push(fact("father", &[c, f]));
    }
    facts.extend(MALES.iter().map(|m| fact("male", &[m])));
    facts.extend(FEMALES.iter().map(|f| fact("female", &[f])));
    with_equality(facts)
}

/// Every ordered pair of people with known parents, empty descriptions.
pub fn family_pool() -> Vec<ExtendedInstance> {
    let people: Vec<&str> = PARENTS.iter().map(|p| p.0).collect();
    let mut out = Vec::new();
    for x in &people {
        for y in &people {
            out.push(ExtendedInstance::new(fact("p", &[x, y]), []));
        }
    }
    out
}

/// D1: X is a brother of Y (or Y itself when male).
pub fn brother_clause() -> Clause {
    clause("p(X,Y) :- mother(X,XM), father(X,XF), mother(Y,YM), father(Y,YF), male(X), equal(XM,YM), equal(XF,YF).")
}

// ---------------------------------------------------------------- append

pub fn append_dec() -> Declaration {
    dec("head: append/3\nmode: components(+,-,-)\nmode: null(+)\nmode: equal(+,+)\nmode: odd(+)\nmode: append(+,+,+)\n")
}

/// `null(nil)`, `odd(1)`, `odd(3)` and equality on `nil`, 1, 2, 3.
pub fn list_db() -> Database {
    let mut facts = vec![fact("null", &["nil"]), fact("odd", &["1"]), fact("odd", &["3"])];
    facts.extend(["nil", "1", "2", "3"].iter().map(|c| fact("equal", &[c, c])));
    Database::new(facts)
}

pub fn append_recursive_clause() -> Clause {
    clause("append(Xs,Ys,Zs) :- components(Xs,X1,Xs1), components(Zs,Z1,Zs1), equal(X1,Z1), append(Xs1,Ys,Zs1).")
}

pub fn append_base_clause() -> Clause {
    clause("append(Xs,Ys,Zs) :- null(Xs), equal(Ys,Zs).")
}

/// Recursive clause first, base clause second.
pub fn append_program() -> Vec<Clause> {
    vec![append_recursive_clause(), append_base_clause()]
}

fn list_value(items: &[u8]) -> TermValue {
    TermValue::List(items.iter().map(|i| TermValue::Atom(i.to_string())).collect(), None)
}

/// Flattened `append(A,B,C)` with equality facts for its constants and,
/// when `base` is set, the base-clause facts over those constants.
pub fn append_instance(a: &[u8], b: &[u8], c: &[u8], base: bool) -> ExtendedInstance {
    let ex = TermExample {
        pred: "append".into(),
        args: vec![list_value(a), list_value(b), list_value(c)],
    };
    let inst = augment_instance_equality(&flatten(&ex, &FlattenOptions::default()).expect("list example"));
    if !base {
        return inst;
    }
    let extra = base_facts(&append_base_clause(), &list_db(), &inst);
    let mut inst = inst;
    inst.description.extend(extra);
    inst
}

/// The flattened `append([1,2],[3],[1,2,3])` with `append(nil,l3,l3)` in its
/// description.
pub fn worked_instance() -> ExtendedInstance {
    let mut inst = append_instance(&[1, 2], &[3], &[1, 2, 3], false);
    inst.description.insert(fact("append", &["nil", "l3", "l3"]));
    inst
}

fn lists_upto(len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for l in &frontier {
            for x in 1..=3u8 {
                let mut m: Vec<u8> = l.clone();
                m.push(x);
                next.push(m);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Triples over lists of 1, 2 and 3: every correct `append(A,B,A++B)` with
/// `|A| <= 2`, `|B| <= 1`, and near misses of each as negatives.
pub fn append_triples() -> Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> {
    let mut out: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> = Vec::new();
    let mut push = |t: (Vec<u8>, Vec<u8>, Vec<u8>)| {
        if !out.contains(&t) {
            out.push(t);
        }
    };
    for a in lists_upto(2) {
        for b in lists_upto(1) {
            let c: Vec<u8> = a.iter().chain(&b).copied().collect();
            push((a.clone(), b.clone(), c.clone()));
            if let Some(last) = c.last() {
                let mut wrong = c.clone();
                *wrong.last_mut().unwrap() = last % 3 + 1;
                push((a.clone(), b.clone(), wrong));
                push((a.clone(), b.clone(), c[1..].to_vec()));
            }
            let swapped: Vec<u8> = b.iter().chain(&a).copied().collect();
            push((a.clone(), b.clone(), swapped));
            let mut longer = c.clone();
            longer.push(2);
            push((a.clone(), b.clone(), longer));
        }
    }
    out
}

/// Pool for the append targets; `base` adds base facts to every description.
pub fn append_pool(base: bool) -> Vec<ExtendedInstance> {
    append_triples()
        .into_iter()
        .map(|(a, b, c)| append_instance(&a, &b, &c, base))
        .collect()
}

// ---------------------------------------------------------------- less_than

pub fn less_than_dec() -> Declaration {
    dec("head: less_than/2\nmode: successor(+,-)\nmode: equal(+,+)\nmode: less_than(+,+)\n")
}

/// Successor on 1..9, equality, and the base facts `less_than(i,i+1)`.
pub fn less_than_db() -> Database {
    let mut facts = Vec::new();
    for i in 1..9 {
        let (a, b) = (i.to_string(), (i + 1).to_string());
        facts.push(fact("successor", &[&a, &b]));
        facts.push(fact("less_than", &[&a, &b]));
    }
    with_equality(facts)
}

pub fn less_than_clause() -> Clause {
    clause("less_than(A,B) :- successor(A,C), less_than(C,B).")
}

/// All pairs over 1..8.
pub fn less_than_pool() -> Vec<ExtendedInstance> {
    let mut out = Vec::new();
    for i in 1..=8 {
        for j in 1..=8 {
            out.push(ExtendedInstance::new(fact("less_than", &[&i.to_string(), &j.to_string()]), []));
        }
    }
    out
}

// ---------------------------------------------------------------- trees

pub fn tree_dec() -> Declaration {
    dec("head: p/1\nmode: left(+,-)\nmode: right(+,-)\nmode: even(+)\nmode: p(+)\n")
}

/// Two recursive literals: holds when both subtrees hold.
pub fn tree_clause() -> Clause {
    clause("p(X) :- left(X,L), right(X,R), p(L), p(R).")
}

fn node(i: usize) -> String {
    format!("n{i}")
}

/// Complete binary tree on `n1..n31` in heap order. Leaves are in `p`
/// except `n21` and `n30`; `even` marks even-numbered nodes.
pub fn tree_db() -> Database {
    let mut facts = Vec::new();
    for i in 1..=31 {
        if 2 * i + 1 <= 31 {
            facts.push(fact("left", &[&node(i), &node(2 * i)]));
            facts.push(fact("right", &[&node(i), &node(2 * i + 1)]));
        } else if i != 21 && i != 30 {
            facts.push(fact("p", &[&node(i)]));
        }
        if i % 2 == 0 {
            facts.push(fact("even", &[&node(i)]));
        }
    }
    Database::new(facts)
}

pub fn tree_pool() -> Vec<ExtendedInstance> {
    (1..=31)
        .map(|i| ExtendedInstance::new(fact("p", &[&node(i)]), []))
        .collect()
}

/// Fibonacci-shaped DAG on `f0..fn`: `left(fk,fk-1)`, `right(fk,fk-2)`, with
/// `p(f0)` and `p(f1)` as facts. The proof tree of `p(fn)` under
/// [`tree_clause`] has exponentially many nodes but only `n+1` distinct goals.
pub fn fib_dag_db(n: usize) -> Database {
    let name = |k: usize| Symbol::from(format!("f{k}"));
    let mut facts = vec![
        Fact::new("p", vec![name(0)]),
        Fact::new("p", vec![name(1)]),
    ];
    for k in 2..=n {
        facts.push(Fact::new("left", vec![name(k), name(k - 1)]));
        facts.push(Fact::new("right", vec![name(k), name(k - 2)]));
    }
    Database::new(facts)
}

pub fn fib_dag_goal(n: usize) -> Fact {
    Fact::new("p", vec![Symbol::from(format!("f{n}"))])
}
