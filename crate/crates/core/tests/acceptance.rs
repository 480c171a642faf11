//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use forcelearn::bottom::{
    bottom_star, constrain, constrain_size_bound, deepen, deepen_size_bound, added_literals_bound, BottomClause,
};
use forcelearn::embed::{canonical_equalities, embed_subclause};
use forcelearn::fixtures::*;
use forcelearn::forcesim::{force_sim, force_sim_nr};
use forcelearn::ingest::parse::{parse_clause, parse_declaration, parse_literal};
use forcelearn::learner::{force1, force1_nr, force2, FnBasecase, Hypothesis, LearnConfig, LearnResult, Outcome};
use forcelearn::lp::{
    augment_equality, covers, is_subclause, literal_mode, prove, prove_instance, satisfies_declaration, split_modes,
    unsplit_clause, variable_depths, Clause, Database, Declaration, ExtendedInstance, Fact, Literal, Mode,
    ProofBudget, Term, Var, Verdict,
};
use forcelearn::teacher::{TargetSpec, Teacher, TeacherPolicy};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn clause(src: &str) -> Clause {
    parse_clause(src).unwrap()
}

/// Variable map from `paper` to `ours`, read off the head and the first
/// `upto` body literals, which must line up position by position.
fn alignment(paper: &Clause, ours: &Clause, upto: usize) -> Result<HashMap<Var, Term>, String> {
    let mut map = HashMap::new();
    let pairs = std::iter::once((&paper.head, &ours.head)).chain(paper.body.iter().zip(&ours.body).take(upto));
    for (a, b) in pairs {
        ensure(a.same_relation(b), || format!("{a} does not line up with {b}"))?;
        for (x, y) in a.args.iter().zip(&b.args) {
            if let Term::Var(v) = x {
                if let Some(prev) = map.insert(v.clone(), y.clone()) {
                    ensure(prev == *y, || format!("{v} maps to both {prev} and {y}"))?;
                }
            }
        }
    }
    Ok(map)
}

fn body_multiset(c: &Clause) -> Vec<Literal> {
    let mut b = c.body.clone();
    b.sort();
    b
}

// ------------------------------------------------------------------ 1

const DEEPEN1: &str = "p(X,Y) :- mother(X,XM), father(X,XF), mother(Y,YM), father(Y,YF).";
const DEEPEN2: &str = "p(X,Y) :- mother(X,XM), father(X,XF), mother(Y,YM), father(Y,YF), \
    mother(XM,XMM), father(XM,XMF), mother(XF,XFM), father(XF,XFF), \
    mother(YM,YMM), father(YM,YMF), mother(YF,YFM), father(YF,YFF).";

fn constrain_listing() -> Clause {
    let mut body = vec![
        "mother(X,XM)".to_string(),
        "father(X,XF)".into(),
        "mother(Y,YM)".into(),
        "father(Y,YF)".into(),
    ];
    for v in ["X", "Y", "XM", "XF", "YM", "YF"] {
        body.push(format!("male({v})"));
        body.push(format!("female({v})"));
    }
    let order = ["X", "XM", "XF", "Y", "YM", "YF"];
    for a in order {
        for b in order {
            body.push(format!("equal({a},{b})"));
        }
    }
    clause(&format!("p(X,Y) :- {}.", body.join(", ")))
}

fn criterion1() -> Check {
    let dec = family_dec();
    let head = BottomClause::from_head(&dec).clause;
    let d1 = deepen(&head, &dec);
    let paper1 = clause(DEEPEN1);
    ensure(d1.is_variant_of(&paper1), || format!("DEEPEN gave {d1}"))?;
    let d2 = deepen(&d1, &dec);
    ensure(d2.body.len() == 12, || format!("DEEPEN^2 has {} literals", d2.body.len()))?;
    let paper2 = clause(DEEPEN2);
    let map2 = alignment(&paper2, &d2, 12)?;
    ensure(d2.is_variant_of(&paper2) || body_multiset(&paper2.rename(&map2)) == body_multiset(&d2), || {
        format!("DEEPEN^2 gave {d2}")
    })?;
    let c = constrain(&d1, &dec);
    ensure(c.body.len() == 52, || format!("CONSTRAIN(DEEPEN) has {} literals", c.body.len()))?;
    let listing = constrain_listing();
    let map = alignment(&listing, &c, 4)?;
    let renamed = listing.rename(&map);
    ensure(body_multiset(&renamed) == body_multiset(&c), || format!("CONSTRAIN(DEEPEN) gave {c}"))?;
    ensure(renamed.body[..16] == c.body[..16], || "DEEPEN part and unary CONSTRAIN literals out of order".into())?;
    let bottom = bottom_star(1, &dec).clause;
    ensure(bottom == c, || "BOTTOM*_1 differs from CONSTRAIN(DEEPEN)".into())?;
    let d1 = clause(
        "p(X,Y) :- mother(X,XM), father(X,XF), mother(Y,YM), father(Y,YF), male(X), equal(XM,YM), equal(XF,YF).",
    )
    .rename(&map);
    let d2c = clause("p(X,Y) :- father(X,XF), female(X), equal(XF,Y).").rename(&map);
    ensure(is_subclause(&d1, &bottom), || format!("D1 {d1} is not a subclause"))?;
    ensure(is_subclause(&d2c, &bottom), || format!("D2 {d2c} is not a subclause"))?;
    let equal_in_order = renamed == c;
    Ok(format!(
        "4 / 12 / 52 literals; D1, D2 subclauses; equal literals in listing order: {equal_in_order}"
    ))
}

// ------------------------------------------------------------------ 2, 3

fn append_alignment() -> HashMap<Var, Term> {
    let dec = append_dec();
    let ours = deepen(&BottomClause::from_head(&dec).clause, &dec);
    let paper = clause("append(Xs,Ys,Zs) :- components(Xs,X1,Xs1), components(Ys,Y1,Ys1), components(Zs,Z1,Zs1).");
    alignment(&paper, &ours, 3).unwrap()
}

fn criterion2() -> Check {
    let dec = append_dec();
    let map = append_alignment();
    let lr = parse_literal("append(Xs1,Ys,Zs1)").unwrap().rename(&map);
    let h = bottom_star(1, &dec).clause.push(lr);
    let inst = worked_instance();
    let db = list_db().union(&inst.description);
    let out = force_sim(&h, &inst.fact, &dec, &db, ProofBudget::depth_only(10)).map_err(|e| e.to_string())?;
    let g = out.generalized().ok_or_else(|| format!("{:?}", out.result))?.clone();
    let want = clause(
        "append(Xs,Ys,Zs) :- components(Xs,X1,Xs1), components(Ys,Y1,Ys1), components(Zs,Z1,Zs1), \
         null(Ys1), odd(Y1), equal(X1,Z1), append(Xs1,Ys,Zs1).",
    )
    .rename(&map);
    let got = canonical_equalities(&g);
    ensure(body_multiset(&got) == body_multiset(&want), || format!("got {got}"))?;
    ensure(got.body.last() == want.body.last(), || "recursive literal is not last".into())?;
    ensure(out.trace.len() == 2, || format!("{} levels", out.trace.len()))?;
    let level1: BTreeSet<String> = out.trace[1].deleted.iter().map(|l| l.rename(&inverse(&map)).to_string()).collect();
    ensure(
        level1.contains("odd(X1)") && level1.contains("odd(Z1)"),
        || format!("level 1 deleted {level1:?}"),
    )?;
    let plain = ExtendedInstance::new(inst.fact.clone(), []);
    for budget in [ProofBudget::depth_only(10), ProofBudget::visited(10)] {
        ensure(covers(std::slice::from_ref(&g), &db, &plain, budget), || "result does not cover".into())?;
    }
    Ok(format!("{} literals after dropping reflexive equalities; covers the instance", got.body.len()))
}

fn inverse(map: &HashMap<Var, Term>) -> HashMap<Var, Term> {
    map.iter()
        .filter_map(|(k, v)| v.as_var().map(|w| (w.clone(), Term::Var(k.clone()))))
        .collect()
}

fn criterion3() -> Check {
    let overfit = clause(
        "append(Xs,Ys,Zs) :- components(Xs,X1,Xs1), components(Ys,Y1,Ys1), components(Zs,Z1,Zs1), \
         null(Ys1), equal(X1,Z1), odd(X1), odd(Y1), odd(Z1), append(Xs1,Ys,Zs1).",
    );
    let inst = worked_instance();
    let db = list_db();
    ensure(!covers(std::slice::from_ref(&overfit), &db, &inst, ProofBudget::visited(100)), || "covered".into())?;
    let report = prove_instance(std::slice::from_ref(&overfit), &db, &inst, ProofBudget::depth_only(100));
    ensure(report.verdict == Verdict::Failed, || format!("{:?}", report.verdict))?;
    let note = report
        .notes
        .iter()
        .find(|n| n.goal == Fact::from_strs("append", &["l2", "l3", "l23"]))
        .ok_or("no failure recorded for append(l2,l3,l23)")?;
    ensure(note.written.to_string() == "odd(X1)" && note.instantiated.to_string() == "odd(2)", || {
        format!("failed at {} ({})", note.written, note.instantiated)
    })?;
    Ok(format!("fails on append(l2,l3,l23) at {} with {}", note.written, note.instantiated))
}

// ------------------------------------------------------------------ 4

fn small_dec(rng: &mut StdRng) -> Declaration {
    let arity = rng.gen_range(1..=2);
    let mut src = format!("head: p/{arity}\nmode: q(+,-)\nmode: r(+)\nmode: s(+,+)\n");
    if rng.gen_bool(0.5) {
        src.push_str("mode: t(+,-)\n");
    }
    src.push_str(&format!("mode: p({})\n", vec!["+"; arity].join(",")));
    parse_declaration(&src).unwrap()
}

const CONSTS: &[&str] = &["a", "b", "c", "d"];

fn small_db(rng: &mut StdRng, head_arity: usize) -> Database {
    let mut facts = Vec::new();
    for pred in ["q", "t"] {
        for c in CONSTS {
            if rng.gen_bool(0.7) {
                facts.push(Fact::from_strs(pred, &[c, CONSTS.choose(rng).unwrap()]));
            }
        }
    }
    for c in CONSTS {
        if rng.gen_bool(0.5) {
            facts.push(Fact::from_strs("r", &[c]));
        }
    }
    for _ in 0..6 {
        facts.push(Fact::from_strs("s", &[CONSTS.choose(rng).unwrap(), CONSTS.choose(rng).unwrap()]));
    }
    for _ in 0..2 {
        let args: Vec<&str> = (0..head_arity).map(|_| *CONSTS.choose(rng).unwrap()).collect();
        facts.push(Fact::from_strs("p", &args));
    }
    Database::new(facts)
}

/// A random subclause of BOTTOM*_1 with at most `max` body literals that
/// satisfies the declaration.
fn small_clause(rng: &mut StdRng, dec: &Declaration, max: usize) -> Clause {
    let bottom = bottom_star(1, dec).clause;
    loop {
        let mut keep: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..bottom.body.len()).collect();
        order.shuffle(rng);
        let n = rng.gen_range(0..=max);
        keep.extend(order.into_iter().take(n));
        keep.sort();
        let c = bottom.restrict(keep);
        if satisfies_declaration(&c, dec) {
            return c;
        }
    }
}

fn unique_max(h: &Clause, free: &[usize], admissible: impl Fn(&Clause) -> bool) -> Result<Option<Clause>, String> {
    let mut best: Vec<u64> = Vec::new();
    for mask in 0u64..(1 << free.len()) {
        let keep: Vec<usize> = (0..h.body.len())
            .filter(|i| match free.iter().position(|f| f == i) {
                Some(b) => mask >> b & 1 == 1,
                None => true,
            })
            .collect();
        let c = h.restrict(keep);
        if admissible(&c) {
            best.push(mask);
        }
    }
    if best.is_empty() {
        return Ok(None);
    }
    let top = best.iter().copied().max_by_key(|m| m.count_ones()).unwrap();
    if best.iter().any(|m| m & !top != 0) {
        return Err(format!("no unique maximum for {h}"));
    }
    let keep: Vec<usize> = (0..h.body.len())
        .filter(|i| match free.iter().position(|f| f == i) {
            Some(b) => top >> b & 1 == 1,
            None => true,
        })
        .collect();
    Ok(Some(h.restrict(keep)))
}

fn criterion4() -> Check {
    let mut rng = StdRng::seed_from_u64(4);
    let cases = 200;
    let (mut nr_fail, mut rec_fail) = (0, 0);
    for case in 0..cases {
        let dec = small_dec(&mut rng);
        let db = small_db(&mut rng, dec.arity);
        let args: Vec<&str> = (0..dec.arity).map(|_| *CONSTS.choose(&mut rng).unwrap()).collect();
        let f = Fact::from_strs("p", &args);

        let h = small_clause(&mut rng, &dec, 12);
        let free: Vec<usize> = (0..h.body.len()).collect();
        let oracle = unique_max(&h, &free, |c| {
            satisfies_declaration(c, &dec)
                && covers(std::slice::from_ref(c), &db, &ExtendedInstance::new(f.clone(), []), ProofBudget::depth_only(1))
        })?;
        let out = force_sim_nr(&h, &f, &dec, &db).map_err(|e| format!("case {case}: {e}"))?;
        if out.generalized() != oracle.as_ref() {
            nr_fail += 1;
            if nr_fail == 1 {
                eprintln!("  nr case {case}: {h} on {f}: got {:?}, oracle {:?}", out.result, oracle);
            }
        }

        let base = small_clause(&mut rng, &dec, 11);
        let vars = base.variables();
        let lr = Literal::new("p", (0..dec.arity).map(|_| Term::Var(vars.choose(&mut rng).unwrap().clone())).collect());
        let h = base.push(lr);
        let depth = rng.gen_range(0..=4);
        let budget = ProofBudget::depth_only(depth);
        let free: Vec<usize> = (0..h.body.len() - 1).collect();
        let oracle = unique_max(&h, &free, |c| {
            satisfies_declaration(c, &dec)
                && covers(std::slice::from_ref(c), &db, &ExtendedInstance::new(f.clone(), []), budget)
        })?;
        let out = force_sim(&h, &f, &dec, &db, budget).map_err(|e| format!("case {case}: {e}"))?;
        if out.generalized() != oracle.as_ref() {
            rec_fail += 1;
            if rec_fail == 1 {
                eprintln!("  rec case {case}: {h} on {f} at {depth}: got {:?}, oracle {:?}", out.result, oracle);
            }
        }
    }
    ensure(nr_fail == 0 && rec_fail == 0, || {
        format!("{nr_fail} non-recursive and {rec_fail} recursive disagreements out of {cases} each")
    })?;
    Ok(format!("{cases} non-recursive and {cases} recursive cases agree with the exhaustive oracle"))
}

// ------------------------------------------------------------------ 5

fn random_dec(rng: &mut StdRng) -> Declaration {
    let arity = rng.gen_range(1..=2);
    let mut src = format!("head: p/{arity}\nmode: equal(+,+)\nmode: q(+,-)\n");
    for (line, p) in [("mode: r(+)\n", 0.8), ("mode: s(+,+)\n", 0.6), ("mode: t(+,-)\n", 0.5), ("mode: t(+,+)\n", 0.5)] {
        if rng.gen_bool(p) {
            src.push_str(line);
        }
    }
    parse_declaration(&src).unwrap()
}

const WIDE: &[&str] = &["a", "b", "c", "d", "e"];

fn random_db(rng: &mut StdRng) -> Database {
    let mut facts = Vec::new();
    for c in WIDE {
        facts.push(Fact::from_strs("q", &[c, WIDE.choose(rng).unwrap()]));
        if rng.gen_bool(0.8) {
            facts.push(Fact::from_strs("t", &[c, WIDE.choose(rng).unwrap()]));
        }
        if rng.gen_bool(0.6) {
            facts.push(Fact::from_strs("r", &[c]));
        }
        facts.push(Fact::from_strs("equal", &[c, c]));
    }
    for a in WIDE {
        for b in WIDE {
            if rng.gen_bool(0.4) {
                facts.push(Fact::from_strs("s", &[a, b]));
            }
        }
    }
    Database::new(facts)
}

/// A random determinate clause of depth at most 2 that satisfies `dec`.
fn random_clause(rng: &mut StdRng, dec: &Declaration) -> Clause {
    loop {
        let head_args: Vec<Term> = if dec.arity == 2 && rng.gen_bool(0.15) {
            vec![Term::var("A"), Term::var("A")]
        } else {
            (0..dec.arity).map(|i| Term::var(&format!("H{i}"))).collect()
        };
        let mut depth: Vec<(Var, usize)> = Vec::new();
        for t in &head_args {
            if let Term::Var(v) = t {
                if !depth.iter().any(|(w, _)| w == v) {
                    depth.push((v.clone(), 0));
                }
            }
        }
        let modes: Vec<Mode> = dec.body_modes().cloned().collect();
        let mut body: Vec<Literal> = Vec::new();
        let mut fresh = 0;
        for _ in 0..rng.gen_range(1..=5) {
            if !body.is_empty() && rng.gen_bool(0.1) {
                // Same inputs as an earlier literal, fresh outputs.
                let prev = body.choose(rng).unwrap().clone();
                let pos = body.iter().position(|l| *l == prev).unwrap();
                let m = literal_mode(&Clause::new(Literal::new("p", head_args.clone()), body.clone()), pos);
                let mut args = prev.args.clone();
                for p in m.output_positions() {
                    fresh += 1;
                    let v = Var::from(format!("W{fresh}"));
                    let d = m
                        .input_positions()
                        .iter()
                        .filter_map(|&i| args[i].as_var().and_then(|x| depth.iter().find(|(w, _)| w == x)).map(|p| p.1))
                        .max()
                        .unwrap_or(0)
                        + 1;
                    depth.push((v.clone(), d));
                    args[p] = Term::Var(v);
                }
                body.push(Literal::new(prev.pred.clone(), args));
                continue;
            }
            let m = modes.choose(rng).unwrap();
            let has_out = m.num_outputs() > 0;
            let pool: Vec<&(Var, usize)> = depth.iter().filter(|(_, d)| !has_out || *d < 2).collect();
            if pool.is_empty() {
                continue;
            }
            let mut args = vec![Term::var("_"); m.arity()];
            let mut d_in = 0;
            for i in m.input_positions() {
                let (v, d) = pool.choose(rng).unwrap();
                args[i] = Term::Var(v.clone());
                d_in = d_in.max(*d);
            }
            for i in m.output_positions() {
                fresh += 1;
                let v = Var::from(format!("W{fresh}"));
                depth.push((v.clone(), d_in + 1));
                args[i] = Term::Var(v);
            }
            body.push(Literal::new(m.pred.clone(), args));
        }
        let c = Clause::new(Literal::new(dec.head.clone(), head_args), body);
        if satisfies_declaration(&c, dec) && variable_depths(&c).1 <= 2 {
            return c;
        }
    }
}

fn criterion5() -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    let decs: Vec<Declaration> = (0..3).map(|_| random_dec(&mut rng)).collect();
    let mut checked = 0;
    let mut sizes = Vec::new();
    for dec in &decs {
        let bottom = bottom_star(2, dec);
        sizes.push(bottom.size());
        for _ in 0..40 {
            let c = random_clause(&mut rng, dec);
            let db = random_db(&mut rng);
            let e = embed_subclause(&c, dec, &bottom, 2).map_err(|err| format!("{c}: {err}"))?;
            ensure(is_subclause(&e, &bottom.clause), || format!("{e} is not a subclause"))?;
            for a in WIDE {
                for b in WIDE {
                    let args: Vec<&str> = [*a, *b][..dec.arity].to_vec();
                    let inst = ExtendedInstance::new(Fact::from_strs("p", &args), []);
                    let budget = ProofBudget::depth_only(1);
                    let (x, y) = (
                        covers(std::slice::from_ref(&c), &db, &inst, budget),
                        covers(std::slice::from_ref(&e), &db, &inst, budget),
                    );
                    ensure(x == y, || format!("{c} and {e} differ on {}", inst.fact))?;
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} clauses under 3 declarations (bottom sizes {sizes:?})"))
}

// ------------------------------------------------------------------ 6

fn check_identified(name: &str, r: &LearnResult, t: &Teacher) -> Result<String, String> {
    let h = r.hypothesis().ok_or_else(|| format!("{name}: no consistent hypothesis"))?;
    let bad = t.target.disagreements(&h.program());
    ensure(bad.is_empty(), || format!("{name}: {} pool disagreements", bad.len()))?;
    ensure(r.queries <= r.query_cap(), || format!("{name}: {} queries > cap {}", r.queries, r.query_cap()))?;
    Ok(format!("{name} {}q/{}", r.queries, r.query_cap()))
}

fn learned_programs() -> Result<(Vec<String>, Vec<Vec<Clause>>), String> {
    let mut notes = Vec::new();
    let mut programs = Vec::new();
    let err = |e: forcelearn::Error| e.to_string();

    let spec = TargetSpec::new(vec![append_recursive_clause()], None, list_db(), append_pool(true)).map_err(err)?;
    ensure(spec.pool.len() >= 40, || "append pool too small".into())?;
    let mut t = Teacher::new(spec, TeacherPolicy::Exhaustive);
    let r = force1(&LearnConfig::new(1), &append_dec(), &list_db(), &mut t).map_err(err)?;
    notes.push(check_identified("append", &r, &t)?);
    programs.push(r.hypothesis().unwrap().program());

    let spec = TargetSpec::new(vec![less_than_clause()], None, less_than_db(), less_than_pool()).map_err(err)?;
    ensure(spec.pool.len() >= 40, || "less_than pool too small".into())?;
    let mut t = Teacher::new(spec, TeacherPolicy::Exhaustive);
    let r = force1(&LearnConfig::new(1), &less_than_dec(), &less_than_db(), &mut t).map_err(err)?;
    notes.push(check_identified("less_than", &r, &t)?);
    programs.push(r.hypothesis().unwrap().program());

    let spec = TargetSpec::new(append_program(), Some(1), list_db(), append_pool(false)).map_err(err)?;
    let oracle_spec = spec.clone();
    let mut t = Teacher::new(spec, TeacherPolicy::Exhaustive);
    let mut basecase = FnBasecase(|i: &ExtendedInstance| oracle_spec.basecase(i));
    let r = force2(&LearnConfig::new(1), &append_dec(), &list_db(), &mut t, &mut basecase, None).map_err(err)?;
    notes.push(check_identified("two-clause append", &r, &t)?);
    ensure(matches!(r.outcome, Outcome::Identified(Hypothesis::Pair { .. })), || "not a pair".into())?;
    programs.push(r.hypothesis().unwrap().program());

    let spec = TargetSpec::new(vec![tree_clause()], None, tree_db(), tree_pool()).map_err(err)?;
    let mut t = Teacher::new(spec, TeacherPolicy::Exhaustive);
    let r = force1(&LearnConfig::new(1).with_k(2), &tree_dec(), &tree_db(), &mut t).map_err(err)?;
    notes.push(check_identified("k=2 tree", &r, &t)?);
    programs.push(r.hypothesis().unwrap().program());
    Ok((notes, programs))
}

fn criterion6() -> Check {
    Ok(learned_programs()?.0.join(", "))
}

// ------------------------------------------------------------------ 7

fn criterion7() -> Check {
    let dec = parse_declaration(
        "head: p/2\nmode: mother(+,-)\nmode: mother(+,+)\nmode: father(+,-)\nmode: father(+,+)\nmode: male(+)\nmode: female(+)\n",
    )
    .unwrap();
    let target = clause("p(X,Y) :- mother(X,M), mother(Y,M), male(X).");
    ensure(satisfies_declaration(&target, &dec), || "target does not satisfy the declaration".into())?;
    ensure(!dec.is_unique_mode() && !dec.has_equality_mode(), || "declaration should be multi-mode".into())?;
    let db: Database = family_db().iter().filter(|f| f.pred.as_str() != "equal").cloned().collect();
    let original = TargetSpec::new(vec![target.clone()], None, db.clone(), family_pool()).map_err(|e| e.to_string())?;

    let (sdb, sdec, table) = split_modes(&db, &dec);
    let (sdb, sdec) = augment_equality(&sdb, &sdec).map_err(|e| e.to_string())?;
    ensure(sdec.is_unique_mode() && sdec.has_equality_mode(), || "transformed declaration".into())?;
    let pool: Vec<ExtendedInstance> = original.pool.iter().map(|i| table.split_instance(i)).collect();
    let mut t = Teacher::new(TargetSpec::from_labels(sdb.clone(), pool).unwrap(), TeacherPolicy::Exhaustive);
    let r = force1_nr(&LearnConfig::new(1), &sdec, &sdb, &mut t).map_err(|e| e.to_string())?;
    let Some(Hypothesis::Single(h)) = r.hypothesis() else {
        return Err("no consistent hypothesis after the transformation".into());
    };
    let restored = unsplit_clause(h, &table);
    ensure(restored.body.iter().all(|l| l.pred.as_str() != "equal"), || format!("{restored}"))?;
    let bad = original.disagreements(std::slice::from_ref(&restored));
    ensure(bad.is_empty(), || format!("{restored} disagrees on {} instances", bad.len()))?;
    Ok(format!("restored {} literals, pool-equal to the target", restored.body.len()))
}

// ------------------------------------------------------------------ 8

struct Audit {
    steps: usize,
    formula_violations: Vec<String>,
    variable_violations: Vec<String>,
}

fn audit_dec(dec: &Declaration, max_depth: usize, audit: &mut Audit) {
    let a = dec.max_arity().max(dec.arity);
    let n_r = dec.size();
    let mut c = BottomClause::from_head(dec).clause;
    for round in 0..=max_depth {
        let is_constrain = round == max_depth;
        let next = if is_constrain { constrain(&c, dec) } else { deepen(&c, dec) };
        let n = c.size();
        let bound = if is_constrain {
            constrain_size_bound(n, a, n_r)
        } else {
            deepen_size_bound(n, a, n_r)
        };
        let added = (next.size() - n) as u128;
        let vbound = added_literals_bound(c.variables().len(), a, n_r, is_constrain);
        audit.steps += 1;
        let what = if is_constrain { "CONSTRAIN" } else { "DEEPEN" };
        if next.size() as u128 > bound {
            audit
                .formula_violations
                .push(format!("{what} on {}/{} n={n}: {} > {bound}", dec.head, dec.arity, next.size()));
        }
        if added > vbound {
            audit.variable_violations.push(format!("{what} on {}/{}: added {added} > {vbound}", dec.head, dec.arity));
        }
        if is_constrain {
            break;
        }
        c = next;
    }
}

fn criterion8() -> Check {
    let mut audit = Audit {
        steps: 0,
        formula_violations: Vec::new(),
        variable_violations: Vec::new(),
    };
    let mut decs = vec![family_dec(), append_dec(), less_than_dec(), tree_dec()];
    let mut rng = StdRng::seed_from_u64(5);
    decs.extend((0..3).map(|_| random_dec(&mut rng)));
    let mut rng = StdRng::seed_from_u64(4);
    decs.extend((0..20).map(|_| small_dec(&mut rng)));
    for dec in &decs {
        for d in 0..=2 {
            audit_dec(dec, d, &mut audit);
        }
    }
    let summary = format!(
        "{} applications; n + (an)^(a-1) n_r / n + (an)^a n_r with n = body size violated {} times, \
         {} of them with n > 0 (e.g. {}); per-variable bound n_r*v^(a-1) / n_r*v^a violated {} times",
        audit.steps,
        audit.formula_violations.len(),
        audit.formula_violations.iter().filter(|v| !v.contains(" n=0:")).count(),
        audit.formula_violations.first().map(String::as_str).unwrap_or("none"),
        audit.variable_violations.len()
    );
    if audit.formula_violations.is_empty() && audit.variable_violations.is_empty() {
        Ok(summary)
    } else {
        Err(summary)
    }
}

// ------------------------------------------------------------------ 9

/// Nodes of the plain depth-first proof tree for `p(fn)` in the fib DAG:
/// one resolution node per goal not in the database.
fn naive_nodes(n: usize) -> u64 {
    let mut t = vec![0u64; n + 1];
    for k in 2..=n {
        t[k] = 1 + t[k - 1] + t[k - 2];
    }
    t[n]
}

fn criterion9() -> Check {
    let (_, learned) = learned_programs()?;
    let mut suites: Vec<(Vec<Clause>, Database, Vec<ExtendedInstance>)> = vec![
        (vec![brother_clause()], family_db(), family_pool()),
        (vec![append_recursive_clause()], list_db(), append_pool(true)),
        (append_program(), list_db(), append_pool(false)),
        (vec![less_than_clause()], less_than_db(), less_than_pool()),
        (vec![tree_clause()], tree_db(), tree_pool()),
    ];
    let dbs = [
        (list_db(), append_pool(true)),
        (less_than_db(), less_than_pool()),
        (list_db(), append_pool(false)),
        (tree_db(), tree_pool()),
    ];
    for (prog, (db, pool)) in learned.into_iter().zip(dbs) {
        suites.push((prog, db, pool));
    }
    let mut compared = 0;
    for (prog, db, pool) in &suites {
        for inst in pool {
            let memo = covers(prog, db, inst, ProofBudget::visited(64));
            let naive = covers(prog, db, inst, ProofBudget::depth_only(64));
            ensure(memo == naive, || format!("memo {memo} vs naive {naive} on {}", inst.fact))?;
            compared += 1;
        }
    }

    let prog = [tree_clause()];
    for n in [5, 10, 15] {
        let r = prove(&prog, &fib_dag_db(n), &fib_dag_goal(n), ProofBudget::depth_only(n as u64 + 1));
        ensure(r.nodes == naive_nodes(n) && r.verdict == Verdict::Proved, || {
            format!("naive run at n={n}: {} nodes, formula {}", r.nodes, naive_nodes(n))
        })?;
    }
    let n = 32;
    let db = fib_dag_db(n);
    let start = Instant::now();
    let r = prove(&prog, &db, &fib_dag_goal(n), ProofBudget::visited(n as u64 + 1));
    let took = start.elapsed();
    ensure(r.verdict == Verdict::Proved, || "memo run did not prove the goal".into())?;
    ensure(took < Duration::from_secs(1), || format!("memo run took {took:?}"))?;
    ensure(naive_nodes(n) > 1_000_000, || "naive tree too small".into())?;
    Ok(format!(
        "{compared} instances agree; fib DAG n={n}: memo {} nodes in {took:?}, naive tree {} nodes",
        r.nodes,
        naive_nodes(n)
    ))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("bottom clause worked example", criterion1),
        ("forced simulation trace", criterion2),
        ("membership pitfall", criterion3),
        ("forced simulation vs exhaustive oracle", criterion4),
        ("embedding into the bottom clause", criterion5),
        ("end-to-end identification", criterion6),
        ("mode splitting pipeline", criterion7),
        ("size-bound audit", criterion8),
        ("interpreter cross-check", criterion9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("criterion {}: PASS ({name}, {secs:.2}s) {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL ({name}, {secs:.2}s) {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
