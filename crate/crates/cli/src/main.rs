use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynorient::batch::{self, Job};
use dynorient::error::Error;
use dynorient::graph::{Epsilon, Params};
use dynorient::harness::{self, Mode, RunConfig, RunReport};
use dynorient::trace::{generate, GenKind, GenSpec, Trace};

/// Gamma used when `--gamma` is absent; the recipe value is capped here.
const DEFAULT_GAMMA_CAP: u32 = 16;

#[derive(Parser)]
#[command(name = "dynorient", version, about = "Dynamic low out-degree orientations on update traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trace and print a JSON report.
    Run(RunArgs),
    /// Generate a trace.
    Gen(GenArgs),
    /// Time every op of a trace and print CSV.
    Bench(RunArgs),
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, default_value = "orient")]
    mode: String,
    /// Vertex count; defaults to the largest id in the trace plus one.
    #[arg(long)]
    n: Option<u32>,
    /// Slack as `p/q` or a decimal in (0, 1].
    #[arg(long, default_value = "1/2")]
    epsilon: String,
    /// Copies per edge; defaults to the recipe value capped at 16.
    #[arg(long)]
    gamma: Option<u32>,
    #[arg(long)]
    alpha_max: Option<u32>,
    /// Verify every k-th update; 0 verifies only at checkpoints.
    #[arg(long, default_value_t = 0)]
    verify_every: usize,
    #[arg(long)]
    paranoid: bool,
}

#[derive(Args)]
struct GenSource {
    /// Generate the trace instead of reading one.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0.0)]
    query_rate: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Trace file; stdin when absent or `-`.
    trace: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    source: GenSource,
    /// With `--kind`, run this many consecutive seeds and print a JSON array.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "random")]
    kind: String,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    alpha_max: u32,
    #[arg(long, default_value_t = 0.0)]
    query_rate: f64,
}

enum Failure {
    Violation,
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// A closed stdout (say, piped into `head`) is not an error.
fn quiet_pipe(r: io::Result<()>) -> Result<(), Failure> {
    match r {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_trace(path: Option<&PathBuf>) -> Result<Trace, Failure> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Ok(Trace::parse(&text).map_err(Error::from)?)
}

fn gen_spec(kind: &str, n: u32, source: &GenSource, alpha_max: u32) -> Result<GenSpec, Failure> {
    let kind: GenKind = kind.parse()?;
    Ok(GenSpec::new(kind, n, source.steps, source.seed, alpha_max).with_queries(source.query_rate))
}

fn config(engine: &EngineArgs, n: u32) -> Result<RunConfig, Failure> {
    let mode: Mode = engine.mode.parse()?;
    let epsilon: Epsilon = engine.epsilon.parse().map_err(Error::from)?;
    let params = match engine.gamma {
        Some(g) => Params::new(n, g, 2, 1, epsilon),
        None => Params::recipe(n, epsilon, DEFAULT_GAMMA_CAP),
    }
    .map_err(Error::from)?;
    let params = match engine.alpha_max {
        Some(a) => params.with_alpha_max(a),
        None => params,
    };
    Ok(RunConfig { mode, params, verify_every: engine.verify_every, paranoid: engine.paranoid })
}

/// The trace and run configuration described by the arguments.
fn load(args: &RunArgs) -> Result<(RunConfig, Trace, Option<GenSpec>), Failure> {
    let (trace, spec) = match &args.source.kind {
        Some(kind) => {
            let n = args.engine.n.ok_or_else(|| usage("--kind needs --n"))?;
            let alpha = args.engine.alpha_max.ok_or_else(|| usage("--kind needs --alpha-max"))?;
            let spec = gen_spec(kind, n, &args.source, alpha)?;
            (generate(&spec)?, Some(spec))
        }
        None => (read_trace(args.trace.as_ref())?, None),
    };
    let n = args.engine.n.unwrap_or_else(|| trace.min_n().max(1));
    Ok((config(&args.engine, n)?, trace, spec))
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| usage(e.to_string()))?;
    let mut out = io::stdout().lock();
    quiet_pipe(writeln!(out, "{text}").and_then(|()| out.flush()))
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let (config, trace, spec) = load(args)?;
    if args.seeds > 1 {
        let spec = spec.ok_or_else(|| usage("--seeds needs --kind"))?;
        let jobs: Vec<Job> = batch::seed_sweep(config, &spec, args.seeds);
        let reports = batch::run_jobs(&jobs).into_iter().collect::<Result<Vec<RunReport>, Error>>()?;
        print_json(&reports)?;
        return if reports.iter().all(RunReport::ok) { Ok(()) } else { Err(Failure::Violation) };
    }
    let report = harness::run(config, &trace)?;
    print_json(&report)?;
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn cmd_bench(args: &RunArgs) -> Result<(), Failure> {
    let (config, trace, _) = load(args)?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    match harness::bench(config, &trace, &mut out) {
        Err(Error::Io { kind: io::ErrorKind::BrokenPipe, .. }) => return Ok(()),
        r => r?,
    }
    quiet_pipe(out.flush())
}

fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let source = GenSource { kind: None, seed: args.seed, steps: args.steps, query_rate: args.query_rate };
    let spec = gen_spec(&args.kind, args.n, &source, args.alpha_max)?;
    let trace = generate(&spec)?;
    let mut out = io::stdout().lock();
    quiet_pipe(write!(out, "{trace}").and_then(|()| out.flush()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
