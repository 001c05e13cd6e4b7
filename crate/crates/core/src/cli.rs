//! Command-line front end. [`run`] takes the argument vector and output
//! streams so it can be driven from tests; the binary only forwards to it.
//!
//! Exit codes: 0 when the solve succeeds, 1 when the solver stops with any
//! other status, 2 on usage errors (bad flags, unknown option keys,
//! unreadable problem files).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    builtin_entry, load_problem, performance_profile, records_csv, run_bench, BenchOptions, BenchProblem,
    BenchSolver, ProfileMetric, BUILTIN_NAMES,
};
use crate::crossover::solve_with_crossover;
use crate::error::SolverError;
use crate::ipm::{IterLog, Status};
use crate::model::MpccProblem;
use crate::options::{Algorithm, Options, OPTIONS_ENV, OPTION_TABLE};
use crate::penalty::solve_penalty;
use crate::relax::solve_relaxation;
use crate::result::SolveResult;

#[derive(Debug, Parser)]
#[command(name = "mpccip", version, about = "Interior-point solvers for MPCCs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem file or builtin.
    Solve(SolveArgs),
    /// Run a benchmark sweep and write records and a performance profile.
    Bench(BenchArgs),
    /// List builtins or options.
    List(ListArgs),
}

#[derive(Debug, Args)]
pub struct OptionArgs {
    /// Overall tolerance (`tol`).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap (`max_iter`).
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Option override `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Option file (`key = value` lines); defaults to $MPCCIP_OPTIONS.
    #[arg(long = "options-file")]
    pub options_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// QPCC problem file (JSON).
    pub file: Option<PathBuf>,
    #[arg(long, conflicts_with = "file")]
    pub builtin: Option<String>,
    #[arg(long, default_value = "relaxation")]
    pub algorithm: Algorithm,
    /// Follow the solve (at `crossover.tol`) with crossover.
    #[arg(long)]
    pub crossover: bool,
    #[command(flatten)]
    pub options: OptionArgs,
    /// Per-iteration CSV log, headed by the effective options.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Result record as JSON.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// QPCC problem files; all builtins when none are given.
    pub files: Vec<PathBuf>,
    /// Builtins to include; repeatable.
    #[arg(long)]
    pub builtin: Vec<String>,
    /// Algorithms to compare; repeatable (default: both).
    #[arg(long)]
    pub algorithm: Vec<Algorithm>,
    #[arg(long)]
    pub crossover: bool,
    #[command(flatten)]
    pub options: OptionArgs,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Per-run time limit in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Records CSV (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Performance-profile table CSV.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Profile metric: iterations | time.
    #[arg(long, default_value = "iterations")]
    pub metric: ProfileMetric,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    /// List options with defaults.
    #[arg(long)]
    pub options: bool,
    /// List builtin problems.
    #[arg(long)]
    pub builtins: bool,
}

/// Usage-level failure (exit code 2).
struct Usage(String);

impl From<SolverError> for Usage {
    fn from(e: SolverError) -> Self {
        Usage(e.to_string())
    }
}

fn options_from(args: &OptionArgs) -> Result<Options, Usage> {
    let mut o = match &args.options_file {
        Some(p) => {
            let mut o = Options::default();
            o.apply_file(p)?;
            o
        }
        None => Options::from_env().map_err(|e| Usage(format!("{OPTIONS_ENV}: {e}")))?,
    };
    if let Some(t) = args.tol {
        o.set("tol", &t.to_string())?;
    }
    if let Some(m) = args.max_iter {
        o.set("max_iter", &m.to_string())?;
    }
    for pair in &args.set {
        o.set_pair(pair)?;
    }
    Ok(o)
}

fn load(file: Option<&Path>, builtin: Option<&str>) -> Result<(String, MpccProblem), Usage> {
    match (file, builtin) {
        (Some(p), None) => Ok((p.display().to_string(), load_problem(p)?)),
        (None, Some(b)) => Ok((b.to_string(), builtin_entry(b)?.problem()?)),
        _ => Err(Usage("give a problem file or --builtin <name>".into())),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Usage> {
    std::fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

/// Option echo plus iteration CSV.
pub fn log_text(problem: &str, alg: Algorithm, crossover: bool, opts: &Options, logs: &[IterLog]) -> String {
    let mut out = format!("# problem={problem}\n# algorithm={alg}\n# crossover={crossover}\n");
    for (k, v) in opts.effective(alg) {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(IterLog::CSV_HEADER);
    out.push('\n');
    for l in logs {
        out.push_str(&l.csv_row());
        out.push('\n');
    }
    out
}

fn solve_cmd(args: &SolveArgs, out: &mut dyn Write) -> Result<i32, Usage> {
    let opts = options_from(&args.options)?;
    let (name, problem) = load(args.file.as_deref(), args.builtin.as_deref())?;
    let solved = if args.crossover {
        solve_with_crossover(&problem, args.algorithm, &opts).map(|(first, c)| (first.logs.clone(), c.result.clone(), Some(c)))
    } else {
        match args.algorithm {
            Algorithm::Relaxation => solve_relaxation(&problem, &opts),
            Algorithm::Penalty => solve_penalty(&problem, &opts),
        }
        .map(|r| (r.logs.clone(), r, None))
    };
    let (logs, result, cross) = match solved {
        Ok(v) => v,
        Err(e @ SolverError::Evaluation(_)) => {
            let _ = writeln!(out, "status=failure\nmessage={e}");
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };
    let _ = writeln!(out, "problem={name}");
    for line in result.summary_lines() {
        let _ = writeln!(out, "{line}");
    }
    if let Some(m) = &result.message {
        let _ = writeln!(out, "message={m}");
    }
    if let Some(c) = &cross {
        let _ = writeln!(out, "lpec_count={}\nbnlp_count={}", c.lpec_count, c.bnlp_count);
        let _ = write!(out, "\n{}", c.table());
    }
    if let Some(p) = &args.log {
        write_file(p, &log_text(&name, args.algorithm, args.crossover, &opts, &logs))?;
    }
    if let Some(p) = &args.output {
        write_file(p, &result_json(&result))?;
    }
    Ok(if result.status == Status::Success { 0 } else { 1 })
}

/// Result record as pretty JSON; non-finite numbers become `null`.
pub fn result_json(r: &SolveResult) -> String {
    serde_json::to_string_pretty(r).expect("result serializes")
}

fn bench_cmd(args: &BenchArgs, out: &mut dyn Write) -> Result<i32, Usage> {
    let opts = options_from(&args.options)?;
    let mut problems = Vec::new();
    for f in &args.files {
        problems.push(BenchProblem {
            name: f.display().to_string(),
            problem: load_problem(f)?,
        });
    }
    let names: Vec<String> = if args.builtin.is_empty() && args.files.is_empty() {
        BUILTIN_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.builtin.clone()
    };
    for n in names {
        let problem = builtin_entry(&n)?.problem()?;
        problems.push(BenchProblem { name: n, problem });
    }
    let algs = if args.algorithm.is_empty() {
        vec![Algorithm::Relaxation, Algorithm::Penalty]
    } else {
        args.algorithm.clone()
    };
    let solvers: Vec<BenchSolver> = algs
        .into_iter()
        .map(|a| {
            let mut s = BenchSolver::new(a, opts.clone());
            if args.crossover {
                s.crossover = true;
                s.name = format!("{a}+crossover");
            }
            s
        })
        .collect();
    let bench_opts = BenchOptions {
        timeout: args.timeout,
        workers: args.workers,
    };
    let records = run_bench(&solvers, &problems, &bench_opts);
    let csv = records_csv(&records);
    match &args.output {
        Some(p) => write_file(p, &csv)?,
        None => {
            let _ = write!(out, "{csv}");
        }
    }
    if let Some(p) = &args.profile {
        write_file(p, &performance_profile(&records, args.metric).table_csv())?;
    }
    Ok(if records.iter().all(|r| r.status == Status::Success) { 0 } else { 1 })
}

fn list_cmd(args: &ListArgs, out: &mut dyn Write) -> i32 {
    let both = !args.options && !args.builtins;
    if args.builtins || both {
        for n in BUILTIN_NAMES {
            let b = builtin_entry(n).expect("registered builtins verify");
            let _ = writeln!(out, "{n}\t{}\tf*={}", b.description, b.optimum);
        }
    }
    if args.options || both {
        for s in OPTION_TABLE {
            let _ = writeln!(out, "{}\t{}\t{}", s.name, s.default, s.description);
        }
    }
    0
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let res = match &cli.command {
        Command::Solve(a) => solve_cmd(a, out),
        Command::Bench(a) => bench_cmd(a, out),
        Command::List(a) => Ok(list_cmd(a, out)),
    };
    match res {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}
