use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use contensor::compiler::{lower, CompileError, Fact, LowerOptions, Params, Plan, Tensors};
use contensor::exec::{run, ExecError, ExecOptions, Stats, SumMode};
use contensor::ir::EvalError;
use contensor::kernels::{self, Kernel, CHROMOSOMES};
use contensor::lang::{parse, Program};
use contensor::{io, oracle};

#[derive(Parser)]
#[command(name = "ctc", about = "Compile and run continuous tensor kernels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a kernel and run it.
    Run(RunArgs),
    /// Run a kernel and compare against the reference evaluator.
    Check(CheckArgs),
    /// Time the genomic overlap kernel with and without the grid index.
    Bench(BenchArgs),
    /// Print an intermediate form.
    Dump(DumpArgs),
    /// List the shipped kernels.
    Kernels,
    /// Write the tensors of a shipped kernel's demonstration instance as JSON files.
    Export {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct Source {
    /// Kernel source file.
    #[arg(long, conflicts_with = "kernel")]
    program: Option<PathBuf>,
    /// Shipped kernel by name; its demonstration tensors are used for any
    /// tensor or parameter not bound explicitly.
    #[arg(long)]
    kernel: Option<String>,
    /// `NAME=file.json`
    #[arg(long = "bind", value_name = "NAME=FILE")]
    binds: Vec<String>,
    /// `NAME=value`
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct CompileArgs {
    /// Remove guards and bounds the prover can discharge.
    #[arg(long)]
    opt_bounds: bool,
    /// Extra facts for the prover, e.g. `a.start <= b.stop`.
    #[arg(long, value_name = "FACT")]
    assume: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    src: Source,
    #[command(flatten)]
    compile: CompileArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print execution counters as JSON.
    #[arg(long)]
    stats: bool,
    /// Skip `+=` updates over regions of positive length instead of failing.
    #[arg(long)]
    sum_skip_intervals: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    src: Source,
    #[command(flatten)]
    compile: CompileArgs,
    /// Check every shipped kernel on its demonstration instance and on random instances.
    #[arg(long, conflicts_with_all = ["program", "kernel"])]
    corpus: bool,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sum_skip_intervals: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "genomic-overlap")]
    kernel: String,
    #[arg(long, conflicts_with = "grid")]
    naive: bool,
    #[arg(long)]
    grid: bool,
    /// Number of query intervals.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Number of data intervals.
    #[arg(long, default_value_t = 50_000)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    runs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ir {
    Looplets,
    Plan,
    PostSimplify,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    ir: Ir,
    #[command(flatten)]
    src: Source,
    #[command(flatten)]
    compile: CompileArgs,
}

enum Failure {
    User(String),
    Mismatch(String),
    Internal(String),
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Unlowered(_) => Failure::Internal(e.to_string()),
            e => Failure::User(e.to_string()),
        }
    }
}

impl From<ExecError> for Failure {
    fn from(e: ExecError) -> Self {
        match e {
            ExecError::Eval(EvalError::Unresolved(_)) => Failure::Internal(e.to_string()),
            e => Failure::User(e.to_string()),
        }
    }
}

impl From<oracle::OracleError> for Failure {
    fn from(e: oracle::OracleError) -> Self {
        Failure::User(format!("reference evaluator: {e}"))
    }
}

type Res<T> = Result<T, Failure>;

fn user<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::User(msg.into()))
}

fn split_pair(s: &str) -> Res<(&str, &str)> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.trim(), v.trim())),
        _ => user(format!("expected NAME=VALUE, found `{s}`")),
    }
}

fn find_kernel(name: &str) -> Res<Kernel> {
    Kernel::by_name(name).ok_or_else(|| Failure::User(format!("no shipped kernel named `{name}`; see `ctc kernels`")))
}

struct Loaded {
    program: Program,
    tensors: Tensors,
    params: Params,
}

fn load(src: &Source) -> Res<Loaded> {
    let (program, mut tensors, mut params) = match (&src.program, &src.kernel) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).or_else(|e| user(format!("{}: {e}", path.display())))?;
            let program = parse(&text).or_else(|e| user(format!("{}:{e}", path.display())))?;
            (program, Tensors::new(), Params::new())
        }
        (None, Some(name)) => {
            let k = find_kernel(name)?;
            let inst = kernels::fixture(&k);
            (k.program(), inst.tensors, inst.params)
        }
        (None, None) => return user("give --program FILE or --kernel NAME"),
    };
    for b in &src.binds {
        let (name, file) = split_pair(b)?;
        let mut t = io::load(file).or_else(|e| user(format!("{file}: {e}")))?;
        t.name = name.to_string();
        tensors.insert(name.to_string(), t);
    }
    for p in &src.params {
        let (name, v) = split_pair(p)?;
        let v: f64 = v.parse().or_else(|_| user(format!("parameter {name}: `{v}` is not a number")))?;
        params.insert(name.to_string(), v);
    }
    Ok(Loaded { program, tensors, params })
}

fn options(program: &Program, c: &CompileArgs) -> Res<LowerOptions> {
    let inputs = program.inputs();
    let assume = c.assume.iter().map(|f| Fact::parse(f, &inputs).map_err(Failure::User)).collect::<Res<Vec<_>>>()?;
    Ok(LowerOptions { opt_bounds: c.opt_bounds, assume, ..Default::default() })
}

fn sum_mode(skip: bool) -> SumMode {
    if skip {
        SumMode::SkipIntervals
    } else {
        SumMode::Strict
    }
}

fn cmd_run(a: &RunArgs) -> Res<()> {
    let l = load(&a.src)?;
    let plan = lower(&l.program, &l.tensors, &l.params, &options(&l.program, &a.compile)?)?;
    let (out, stats) = run(&plan, &l.tensors, ExecOptions { sum_mode: sum_mode(a.sum_skip_intervals) })?;
    let stats_json = serde_json::to_string(&stats).unwrap();
    match &a.out {
        Some(path) => {
            io::save(&out, path).or_else(|e| user(format!("{}: {e}", path.display())))?;
            if a.stats {
                println!("{stats_json}");
            }
        }
        None => {
            print!("{}", io::save_string(&out));
            if a.stats {
                eprintln!("{stats_json}");
            }
        }
    }
    if stats.nan_values > 0 {
        eprintln!("warning: {} updates carried NaN values", stats.nan_values);
    }
    Ok(())
}

fn check_one(label: &str, k_integral: bool, l: &Loaded, opts: &LowerOptions, mode: SumMode) -> Res<()> {
    let plan = lower(&l.program, &l.tensors, &l.params, opts)?;
    let (got, _) = run(&plan, &l.tensors, ExecOptions { sum_mode: mode })?;
    let want = oracle::eval(&l.program, &l.tensors, &l.params, mode)?;
    let rel = if k_integral { 1e-9 } else { 0.0 };
    kernels::compare(&got, &want, rel).map_err(|d| Failure::Mismatch(format!("{label}: {d}")))
}

fn is_integral(p: &Program) -> bool {
    p.assignments().iter().any(|(_, _, rhs)| {
        let mut hit = false;
        rhs.visit(&mut |e| hit |= matches!(e, contensor::lang::Expr::Diff(_)));
        hit
    })
}

fn cmd_check(a: &CheckArgs) -> Res<()> {
    let mode = sum_mode(a.sum_skip_intervals);
    if !a.corpus {
        let l = load(&a.src)?;
        check_one("check", is_integral(&l.program), &l, &options(&l.program, &a.compile)?, mode)?;
        println!("ok");
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for k in kernels::ALL {
        let program = k.program();
        let opts = options(&program, &a.compile)?;
        let inst = kernels::fixture(&k);
        check_one(k.name, k.integral, &Loaded { program: program.clone(), tensors: inst.tensors, params: inst.params }, &opts, mode)?;
        for i in 0..a.instances {
            let inst = kernels::random_instance(&k, &mut rng);
            let l = Loaded { program: program.clone(), tensors: inst.tensors, params: inst.params };
            check_one(&format!("{} instance {i}", k.name), k.integral, &l, &opts, mode)?;
        }
        println!("{}: ok", k.name);
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Res<()> {
    if Kernel::by_name(&a.kernel).map(|k| k.name) != Some("genomic_overlap") {
        return user("only genomic-overlap can be benchmarked");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let data = kernels::random_genome(&mut rng, a.m, 1e6, 1000.0, CHROMOSOMES);
    let query = kernels::random_genome(&mut rng, a.n, 1e6, 1000.0, CHROMOSOMES);
    let mut inst = kernels::genomic_instance(&query, &data);
    let kernel = if a.grid {
        inst = inst.with(data.grid(None));
        kernels::GENOMIC_OVERLAP_GRID
    } else {
        kernels::GENOMIC_OVERLAP
    };
    let plan = lower(&kernel.program(), &inst.tensors, &inst.params, &LowerOptions::default())?;
    let (times, stats, hits) = time_runs(&plan, &inst.tensors, a.runs.max(1))?;
    let report = json!({
        "kernel": kernel.name,
        "n": a.n,
        "m": a.m,
        "seed": a.seed,
        "runs_ms": times,
        "median_ms": median(&times),
        "overlapping_queries": hits,
        "stats": stats,
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn time_runs(plan: &Plan, tensors: &Tensors, runs: usize) -> Res<(Vec<f64>, Stats, usize)> {
    let mut times = Vec::with_capacity(runs);
    let mut last = None;
    for _ in 0..runs {
        let t = Instant::now();
        let r = run(plan, tensors, ExecOptions::default())?;
        times.push(t.elapsed().as_secs_f64() * 1e3);
        last = Some(r);
    }
    let (out, stats) = last.unwrap();
    Ok((times, stats, out.values.iter().filter(|v| v.truthy()).count()))
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn cmd_dump(a: &DumpArgs) -> Res<()> {
    let l = load(&a.src)?;
    let mut opts = options(&l.program, &a.compile)?;
    opts.no_simplify = matches!(a.ir, Ir::Plan);
    let plan = lower(&l.program, &l.tensors, &l.params, &opts)?;
    match a.ir {
        Ir::Looplets => print!("{}", plan.looplets),
        Ir::Plan | Ir::PostSimplify => print!("{plan}"),
    }
    Ok(())
}

fn cmd_export(kernel: &str, dir: &Path) -> Res<()> {
    let k = find_kernel(kernel)?;
    let inst = kernels::fixture(&k);
    std::fs::create_dir_all(dir).or_else(|e| user(format!("{}: {e}", dir.display())))?;
    std::fs::write(dir.join(format!("{}.ct", k.name)), k.source).or_else(|e| user(e.to_string()))?;
    let mut names: Vec<&String> = inst.tensors.keys().collect();
    names.sort();
    let mut cmd = format!("ctc run --program {}", dir.join(format!("{}.ct", k.name)).display());
    for name in names {
        let path = dir.join(format!("{name}.json"));
        io::save(&inst.tensors[name], &path).or_else(|e| user(format!("{}: {e}", path.display())))?;
        cmd.push_str(&format!(" --bind {name}={}", path.display()));
    }
    let mut params: Vec<_> = inst.params.iter().collect();
    params.sort_by(|a, b| a.0.cmp(b.0));
    for (k, v) in params {
        cmd.push_str(&format!(" --param {k}={v}"));
    }
    println!("{cmd}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Dump(a) => cmd_dump(a),
        Cmd::Kernels => {
            for k in kernels::ALL {
                println!("{}", k.name);
            }
            Ok(())
        }
        Cmd::Export { kernel, dir } => cmd_export(kernel, dir),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch(m)) => {
            eprintln!("mismatch: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
