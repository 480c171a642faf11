use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use forcelearn::bottom::bottom_star;
use forcelearn::forcesim::{force_sim, force_sim_nr, SimOutcome, SimResult};
use forcelearn::ingest::flatten::{flatten, FlattenOptions};
use forcelearn::ingest::parse::{
    parse_database, parse_declaration, parse_instances, parse_program, parse_term_examples, serialize_declaration,
    serialize_facts, serialize_instances, serialize_program,
};
use forcelearn::learner::{
    force1, force1_nr, force2, force2_with_rules, s_set, BasecaseOracle, BasecaseRule, EqAnswer, EquivalenceOracle,
    FnBasecase, Hypothesis, LearnConfig, LearnResult, Outcome,
};
use forcelearn::lp::{
    augment_equality, auto_depth, prove_instance, split_modes, unsplit_clause, Clause, Database, Declaration,
    ExtendedInstance, MemoPolicy, ProofBudget, RenameTable, DEFAULT_CEILING,
};
use forcelearn::protocol::{serve, ProtocolTeacher};
use forcelearn::teacher::{auto_covers, TargetSpec, Teacher, TeacherPolicy};

#[derive(Parser)]
#[command(name = "forcelearn", version, about = "Bottom clauses, forced simulation and exact identification of determinate clauses")]
struct Cli {
    /// Seed for teacher policies given without one.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Upper limit for automatically computed proof depths.
    #[arg(long, global = true, default_value_t = DEFAULT_CEILING)]
    budget_ceiling: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print BOTTOM*_d for a declaration.
    Bottom {
        #[arg(long)]
        dec: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
    /// Forcibly simulate a clause on one instance.
    Forcesim {
        #[arg(long)]
        clause: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        dec: PathBuf,
        #[arg(long)]
        db: Option<PathBuf>,
        /// Depth bound for recursive clauses.
        #[arg(long, conflicts_with = "auto_budget")]
        budget: Option<u64>,
        /// Use the (a|D| + a|DB|)^a' bound (the default).
        #[arg(long)]
        auto_budget: bool,
    },
    /// Run an identification algorithm against a teacher.
    Learn(LearnArgs),
    /// Least general consistent recursive clauses for a labelled pool.
    Sset {
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        dec: PathBuf,
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        pool: PathBuf,
    },
    /// Serve teacher queries on stdin/stdout.
    Teach {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value = "exhaustive")]
        policy: String,
    },
    /// Check which instances a program covers.
    Eval {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        db: Option<PathBuf>,
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        /// Plain depth-bounded search instead of the memoized interpreter.
        #[arg(long)]
        naive: bool,
    },
    /// Turn list-term examples into extended instances.
    Flatten {
        #[arg(long)]
        examples: PathBuf,
        /// Base clause whose consequences are added to every description.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        db: Option<PathBuf>,
    },
    /// Equality augmentation, mode splitting and its inverse.
    Transform {
        #[command(subcommand)]
        op: TransformOp,
    },
}

#[derive(Subcommand)]
enum TransformOp {
    /// Add equal(c,c) facts and the equal(+,+) mode.
    Augment {
        #[arg(long)]
        dec: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// One predicate per mode, then augment with equality.
    Split {
        #[arg(long)]
        dec: PathBuf,
        #[arg(long)]
        db: PathBuf,
        /// Pool to rewrite alongside the database.
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Rewrite clauses over split predicates back to the original declaration.
    Unsplit {
        #[arg(long)]
        clause: PathBuf,
        /// The original (unsplit) declaration.
        #[arg(long)]
        dec: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Force1nr,
    Force1,
    Force2,
    Forcek,
}

#[derive(Args)]
struct TargetArgs {
    /// Target program; without it every pool instance must be labelled.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    db: Option<PathBuf>,
    #[arg(long)]
    pool: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Recursive literals per clause (forcek only).
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    dec: PathBuf,
    #[arg(long)]
    db: Option<PathBuf>,
    /// Simulated teacher: target program (optional) and pool.
    #[arg(long, required_unless_present = "teacher_cmd")]
    pool: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value = "exhaustive")]
    policy: String,
    /// Shell command of a teacher process speaking the line protocol.
    #[arg(long, conflicts_with_all = ["pool", "target"])]
    teacher_cmd: Option<String>,
    /// force2: `nulllist`, `argN-null`, `never`, or a file with a base clause.
    /// Several may be given; they are tried in order.
    #[arg(long)]
    basecase_rule: Vec<String>,
    /// Keep the head itself among the recursive candidates.
    #[arg(long)]
    include_self: bool,
    /// Do not replay logged counterexamples on a new candidate.
    #[arg(long)]
    no_replay: bool,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_dec(path: &Path) -> anyhow::Result<Declaration> {
    parse_declaration(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_db(path: Option<&Path>) -> anyhow::Result<Database> {
    match path {
        None => Ok(Database::empty()),
        Some(p) => parse_database(&read(p)?).with_context(|| format!("in {}", p.display())),
    }
}

fn load_program(path: &Path) -> anyhow::Result<Vec<Clause>> {
    parse_program(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_instances(path: &Path) -> anyhow::Result<Vec<ExtendedInstance>> {
    parse_instances(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_target(args: &TargetArgs, ceiling: u64) -> anyhow::Result<TargetSpec> {
    let db = load_db(args.db.as_deref())?;
    let pool = load_instances(&args.pool)?;
    let mut spec = match &args.target {
        Some(t) => {
            let program = load_program(t)?;
            let base = if program.len() == 2 {
                program.iter().position(|c| !c.is_recursive())
            } else {
                None
            };
            TargetSpec::new(program, base, db, pool)?
        }
        None => TargetSpec::from_labels(db, pool)?,
    };
    spec.ceiling = ceiling;
    Ok(spec)
}

fn policy(s: &str, seed: u64) -> anyhow::Result<TeacherPolicy> {
    Ok(match s {
        "random" => TeacherPolicy::Random(seed),
        _ => s.parse()?,
    })
}

fn print_outcome<T>(out: &SimOutcome<T>, show: impl Fn(&T) -> String) {
    for (i, step) in out.trace.iter().enumerate() {
        print!("% level {i}: {}", step.subgoal);
        if !step.deleted.is_empty() {
            let del: Vec<String> = step.deleted.iter().map(ToString::to_string).collect();
            print!("  deleted {}", del.join(", "));
        }
        println!();
    }
    match &out.result {
        SimResult::Generalized(c) => println!("{}", show(c)),
        SimResult::Failure(r) => println!("FAILURE: {r}"),
    }
}

fn cmd_forcesim(
    clause: &Path,
    instance: &Path,
    dec: &Path,
    db: Option<&Path>,
    budget: Option<u64>,
    ceiling: u64,
) -> anyhow::Result<u8> {
    let program = load_program(clause)?;
    let [h] = program.as_slice() else {
        bail!("{} must contain exactly one clause", clause.display());
    };
    let dec = load_dec(dec)?;
    let db = load_db(db)?;
    let insts = load_instances(instance)?;
    let [inst] = insts.as_slice() else {
        bail!("{} must contain exactly one instance", instance.display());
    };
    let full = db.union(&inst.description);
    let out = if h.is_recursive() {
        let depth = budget.unwrap_or_else(|| {
            auto_depth(dec.max_arity().max(dec.arity), inst.size(), db.len(), dec.arity, ceiling)
        });
        force_sim(h, &inst.fact, &dec, &full, ProofBudget::visited(depth))?
    } else {
        force_sim_nr(h, &inst.fact, &dec, &full)?
    };
    print_outcome(&out, ToString::to_string);
    Ok(if out.is_failure() { 1 } else { 0 })
}

fn report(r: &LearnResult) -> u8 {
    match &r.outcome {
        Outcome::Identified(h) => {
            println!("% identified");
            println!("{h}");
        }
        Outcome::NoConsistentHypothesis => println!("% no consistent hypothesis"),
    }
    println!(
        "% queries {} (cap {}), candidates tried {} of {}, bottom size {}, {:.3}s",
        r.queries,
        r.query_cap(),
        r.candidates_tried,
        r.candidates,
        r.bottom_size,
        r.elapsed.as_secs_f64()
    );
    match r.outcome {
        Outcome::Identified(_) => 0,
        Outcome::NoConsistentHypothesis => 1,
    }
}

fn basecase_rule(spec: &str) -> anyhow::Result<BasecaseRule> {
    match spec {
        "nulllist" => return Ok(BasecaseRule::no_nonnull_list()),
        "never" => return Ok(BasecaseRule::always_false()),
        _ => {}
    }
    if let Some(n) = spec.strip_prefix("arg").and_then(|s| s.strip_suffix("-null")) {
        let i: usize = n.parse().map_err(|_| anyhow!("bad rule `{spec}`"))?;
        if i == 0 {
            bail!("argument positions start at 1");
        }
        return Ok(BasecaseRule::arg_null(i - 1));
    }
    let program = load_program(Path::new(spec))?;
    Ok(BasecaseRule::new(spec.to_string(), move |inst, db| {
        auto_covers(&program, db, inst, DEFAULT_CEILING)
    }))
}

/// A teacher process driven over pipes.
struct Remote {
    child: std::process::Child,
    client: Option<ProtocolTeacher<BufReader<std::process::ChildStdout>, std::process::ChildStdin>>,
}

impl Remote {
    fn spawn(cmd: &str) -> anyhow::Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(cmd)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .with_context(|| format!("starting teacher `{cmd}`"))?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = child.stdout.take().expect("piped");
        Ok(Remote {
            child,
            client: Some(ProtocolTeacher::new(BufReader::new(stdout), stdin)),
        })
    }

    fn client(&mut self) -> &mut ProtocolTeacher<BufReader<std::process::ChildStdout>, std::process::ChildStdin> {
        self.client.as_mut().expect("open")
    }

    fn close(mut self) -> anyhow::Result<()> {
        if let Some(c) = self.client.take() {
            c.quit()?;
        }
        self.child.wait()?;
        Ok(())
    }
}

impl EquivalenceOracle for Remote {
    fn equivalent(&mut self, h: &Hypothesis) -> forcelearn::Result<EqAnswer> {
        self.client().equivalent(h)
    }
}

impl BasecaseOracle for Remote {
    fn basecase(&mut self, inst: &ExtendedInstance) -> forcelearn::Result<bool> {
        self.client().basecase(inst)
    }
}

enum AnyTeacher {
    Local(Teacher),
    Remote(Remote),
}

impl EquivalenceOracle for AnyTeacher {
    fn equivalent(&mut self, h: &Hypothesis) -> forcelearn::Result<EqAnswer> {
        match self {
            AnyTeacher::Local(t) => t.equivalent(h),
            AnyTeacher::Remote(r) => r.equivalent(h),
        }
    }
}

impl BasecaseOracle for AnyTeacher {
    fn basecase(&mut self, inst: &ExtendedInstance) -> forcelearn::Result<bool> {
        match self {
            AnyTeacher::Local(t) => t.basecase(inst),
            AnyTeacher::Remote(r) => r.basecase(inst),
        }
    }
}

fn cmd_learn(a: &LearnArgs, seed: u64, ceiling: u64) -> anyhow::Result<u8> {
    let dec = load_dec(&a.dec)?;
    let db = load_db(a.db.as_deref())?;
    let mut cfg = LearnConfig::new(a.depth);
    cfg.ceiling = ceiling;
    cfg.exclude_self = !a.include_self;
    cfg.replay = !a.no_replay;
    cfg.policy = MemoPolicy::VisitedMemo;
    let mut teacher = match &a.teacher_cmd {
        Some(cmd) => AnyTeacher::Remote(Remote::spawn(cmd)?),
        None => {
            let target = TargetArgs {
                target: a.target.clone(),
                db: a.db.clone(),
                pool: a.pool.clone().expect("clap requires --pool"),
            };
            AnyTeacher::Local(Teacher::new(load_target(&target, ceiling)?, policy(&a.policy, seed)?))
        }
    };
    let code = match a.algo {
        Algo::Force1nr => report(&force1_nr(&cfg, &dec, &db, &mut teacher)?),
        Algo::Force1 => report(&force1(&cfg, &dec, &db, &mut teacher)?),
        Algo::Forcek => report(&force1(&cfg.clone().with_k(a.k), &dec, &db, &mut teacher)?),
        Algo::Force2 if a.basecase_rule.is_empty() => {
            // The teacher answers basecase queries itself.
            let cell = std::cell::RefCell::new(teacher);
            let mut bc = FnBasecase(|i: &ExtendedInstance| cell.borrow_mut().basecase(i));
            let mut eq = Shared(&cell);
            let r = force2(&cfg, &dec, &db, &mut eq, &mut bc, None)?;
            teacher = cell.into_inner();
            report(&r)
        }
        Algo::Force2 => {
            let rules = a
                .basecase_rule
                .iter()
                .map(|s| basecase_rule(s))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let (outcome, runs) = force2_with_rules(&cfg, &dec, &db, &mut teacher, &rules)?;
            for run in &runs {
                println!("% rule {}: {} queries", run.rule, run.result.queries);
            }
            match runs.last() {
                Some(r) if matches!(outcome, Outcome::Identified(_)) => report(&r.result),
                _ => {
                    println!("% no consistent hypothesis");
                    1
                }
            }
        }
    };
    if let AnyTeacher::Remote(r) = teacher {
        r.close()?;
    }
    Ok(code)
}

struct Shared<'a>(&'a std::cell::RefCell<AnyTeacher>);

impl EquivalenceOracle for Shared<'_> {
    fn equivalent(&mut self, h: &Hypothesis) -> forcelearn::Result<EqAnswer> {
        self.0.borrow_mut().equivalent(h)
    }
}

fn cmd_eval(program: &Path, db: Option<&Path>, instances: &Path, budget: Option<u64>, naive: bool, ceiling: u64) -> anyhow::Result<u8> {
    let program = load_program(program)?;
    let db = load_db(db)?;
    let mut all = true;
    for inst in load_instances(instances)? {
        let ok = match budget {
            None if !naive => auto_covers(&program, &db, &inst, ceiling),
            b => {
                let depth = b.unwrap_or(ceiling);
                let budget = if naive {
                    ProofBudget::depth_only(depth)
                } else {
                    ProofBudget::visited(depth)
                };
                let report = prove_instance(&program, &db, &inst, budget);
                report.verdict.is_proved()
            }
        };
        let mark = if ok { '+' } else { '-' };
        match inst.label {
            Some(l) if l != ok => {
                all = false;
                println!("{mark} {}  % labelled {}", inst.fact, if l { '+' } else { '-' });
            }
            _ => println!("{mark} {}", inst.fact),
        }
    }
    Ok(if all { 0 } else { 1 })
}

fn write_or_print(out_dir: Option<&Path>, files: &[(&str, String)]) -> anyhow::Result<()> {
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (name, body) in files {
                fs::write(dir.join(name), body).with_context(|| format!("writing {name}"))?;
            }
        }
        None => {
            for (name, body) in files {
                println!("% ---- {name}");
                print!("{body}");
            }
        }
    }
    Ok(())
}

fn cmd_transform(op: &TransformOp) -> anyhow::Result<u8> {
    match op {
        TransformOp::Augment { dec, db, out_dir } => {
            let (db, dec) = augment_equality(&load_db(Some(db))?, &load_dec(dec)?)?;
            write_or_print(
                out_dir.as_deref(),
                &[("dec", serialize_declaration(&dec)), ("db", serialize_facts(db.iter()))],
            )?;
        }
        TransformOp::Split { dec, db, pool, out_dir } => {
            let (db, dec, table) = split_modes(&load_db(Some(db))?, &load_dec(dec)?);
            let (db, dec) = augment_equality(&db, &dec)?;
            let mut files = vec![("dec", serialize_declaration(&dec)), ("db", serialize_facts(db.iter()))];
            if let Some(p) = pool {
                let pool: Vec<ExtendedInstance> = load_instances(p)?.iter().map(|i| table.split_instance(i)).collect();
                files.push(("pool", serialize_instances(&pool)));
            }
            write_or_print(out_dir.as_deref(), &files)?;
        }
        TransformOp::Unsplit { clause, dec } => {
            let table = RenameTable::from_declaration(&load_dec(dec)?);
            let out: Vec<Clause> = load_program(clause)?.iter().map(|c| unsplit_clause(c, &table)).collect();
            print!("{}", serialize_program(&out));
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let ceiling = cli.budget_ceiling;
    match cli.cmd {
        Cmd::Bottom { dec, depth } => {
            println!("{}", bottom_star(depth, &load_dec(&dec)?).clause);
            Ok(0)
        }
        Cmd::Forcesim {
            clause,
            instance,
            dec,
            db,
            budget,
            auto_budget: _,
        } => cmd_forcesim(&clause, &instance, &dec, db.as_deref(), budget, ceiling),
        Cmd::Learn(a) => cmd_learn(&a, cli.seed, ceiling),
        Cmd::Sset { depth, k, dec, db, pool } => {
            let dec = load_dec(&dec)?;
            let db = load_db(db.as_deref())?;
            let pool = load_instances(&pool)?;
            if pool.iter().any(|i| i.label.is_none()) {
                bail!("every pool instance needs a label");
            }
            let (pos, neg): (Vec<_>, Vec<_>) = pool.into_iter().partition(|i| i.label == Some(true));
            let mut cfg = LearnConfig::new(depth).with_k(k);
            cfg.ceiling = ceiling;
            let set = s_set(&cfg, &dec, &db, &pos, &neg)?;
            print!("{}", serialize_program(&set));
            println!("% {} clauses", set.len());
            Ok(if set.is_empty() { 1 } else { 0 })
        }
        Cmd::Teach { target, policy: p } => {
            let mut t = Teacher::new(load_target(&target, ceiling)?, policy(&p, cli.seed)?);
            let stdin = io::stdin();
            let mut out = io::stdout().lock();
            serve(&mut t, &mut stdin.lock(), &mut out)?;
            out.flush()?;
            Ok(0)
        }
        Cmd::Eval {
            program,
            db,
            instances,
            budget,
            naive,
        } => cmd_eval(&program, db.as_deref(), &instances, budget, naive, ceiling),
        Cmd::Flatten { examples, base, db } => {
            let mut opts = FlattenOptions {
                base_clause: None,
                base_db: load_db(db.as_deref())?,
            };
            if let Some(b) = base {
                let prog = load_program(&b)?;
                let [c] = prog.as_slice() else {
                    bail!("{} must contain exactly one clause", b.display());
                };
                opts.base_clause = Some(c.clone());
            }
            let exs = parse_term_examples(&read(&examples)?).with_context(|| format!("in {}", examples.display()))?;
            let out = exs
                .iter()
                .map(|e| flatten(e, &opts))
                .collect::<forcelearn::Result<Vec<_>>>()?;
            print!("{}", serialize_instances(&out));
            Ok(0)
        }
        Cmd::Transform { op } => cmd_transform(&op),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use forcelearn::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Internal(_) | E::Teacher(_) | E::BasecaseOracle(_) => 3,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
