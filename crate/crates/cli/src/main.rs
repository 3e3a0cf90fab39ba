//! `mechdock`: generate instances, attack mechanisms, sweep bounds, fuzz weak
//! monotonicity and verify stored reports.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 incomplete strategy, 4 mechanism failure;
//! `verify` exits 1 on any defect.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mechdock_core::adversary::{replay, verify_verdict, AdversaryError, Report, Strategy, Verdict};
use mechdock_core::exactnum::{parse_rational, Rational};
use mechdock_core::exec::Exec;
use mechdock_core::forge::{build_main, build_small, bounds_sweep, MainParams, SearchRange, SmallConstruction};
use mechdock_core::mechlib::{open, parse_builtin, SelectorError};
use mechdock_core::schedmodel::{Instance, MechanismError};
use mechdock_core::wmon::{exhaustive_2x2, fuzz, FuzzSpec};

const EXIT_USAGE: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;
const EXIT_MECHANISM: u8 = 4;
const EXIT_DEFECT: u8 = 1;

#[derive(Parser)]
#[command(name = "mechdock", version, about = "Lower-bound adversaries and monotonicity checks for scheduling mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file for one of the constructions.
    Gen(GenArgs),
    /// Run an adaptive strategy against a mechanism and write a report.
    Attack(AttackArgs),
    /// Certified bounds per block count as CSV.
    Bounds(BoundsArgs),
    /// Search for weak-monotonicity violations.
    Wmon(WmonArgs),
    /// Re-check a stored report.
    Verify(VerifyArgs),
    /// Serve a built-in mechanism over the line protocol on stdin/stdout.
    #[command(hide = true)]
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    An,
    D2x2,
    E3x3,
    F3x4,
    Bnr,
    Bckv,
    Ckv,
    Bnew,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyName {
    Main,
    S2x2,
    S3x3,
    S3x4,
}

/// Numeric parameters shared by `gen` and `attack`; exact values like `1873/1000` or `1.873`.
#[derive(Args)]
struct Params {
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    kc: Option<usize>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    b1: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    construction: Construction,
    #[command(flatten)]
    params: Params,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_enum)]
    strategy: StrategyName,
    /// `minwork`, `optmakespan`, `dictator:<i>`, `random:<seed>` or `extern:<command>`.
    #[arg(long)]
    mechanism: String,
    #[command(flatten)]
    params: Params,
    /// Report file; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Block counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3, 4, 5, 10, 30, 36])]
    r: Vec<usize>,
    /// Chain length; defaults to `r`.
    #[arg(long)]
    kc: Option<usize>,
    /// Also search for the best `a` per row.
    #[arg(long)]
    optimize: bool,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WmonArgs {
    #[arg(long)]
    mechanism: String,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enumerate all 2 × 2 instances over `--grid` instead of sampling.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3])]
    grid: Vec<i64>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    lo: i64,
    #[arg(long, default_value_t = 5)]
    hi: i64,
    #[arg(long)]
    sequential: bool,
    /// Violations file (JSON array); stdout summary only when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    report: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    mechanism: String,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: EXIT_USAGE, error: error.into() }
}

fn mechanism_failure(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: EXIT_MECHANISM, error: error.into() }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_DEFECT, error }
    }
}

fn selector_failure(e: SelectorError) -> Failure {
    match e {
        SelectorError::Mechanism(m) => mechanism_failure(m),
        other => usage(other),
    }
}

fn rational(name: &str, text: &Option<String>, default: Option<&str>) -> Result<Rational, Failure> {
    let text = text.as_deref().or(default).ok_or_else(|| usage(anyhow!("--{name} is required")))?;
    parse_rational(text).map_err(|e| usage(anyhow!("--{name}: {e}")))
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(Failure::from),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main_params(p: &Params) -> Result<MainParams, Failure> {
    let r = p.r.unwrap_or(3);
    let a = rational("a", &p.a, Some("1873/1000"))?;
    MainParams::new(a, r, p.kc.unwrap_or(r)).map_err(usage)
}

fn cmd_gen(args: &GenArgs) -> Result<u8, Failure> {
    let p = &args.params;
    let t: Instance = match args.construction {
        Construction::An => build_main(&main_params(p)?).map_err(usage)?,
        other => {
            let which = match other {
                Construction::D2x2 => SmallConstruction::D2x2,
                Construction::E3x3 => SmallConstruction::E3x3 {
                    a: rational("a", &p.a, Some("1"))?,
                    b: rational("b", &p.b, Some("22055/10000"))?,
                    c: rational("c", &p.c, Some("26589/10000"))?,
                },
                Construction::F3x4 => SmallConstruction::F3x4 { x: rational("x", &p.x, Some("141421/100000"))? },
                Construction::Bnr => SmallConstruction::BNr,
                Construction::Bckv => SmallConstruction::BCkv,
                Construction::Ckv => SmallConstruction::CKv { a: rational("a", &p.a, Some("2"))?, k: p.k.unwrap_or(3) },
                Construction::Bnew => SmallConstruction::BNew { a: rational("a", &p.a, Some("1873/1000"))?, b1: rational("b1", &p.b1, Some("1"))? },
                Construction::An => unreachable!("handled above"),
            };
            build_small(&which).map_err(usage)?
        }
    };
    let text = serde_json::to_string_pretty(&t).context("serializing instance")?;
    write_output(&args.out, &text)?;
    Ok(0)
}

fn strategy_from(args: &AttackArgs) -> Result<Strategy, Failure> {
    let p = &args.params;
    Ok(match args.strategy {
        StrategyName::Main => {
            let mp = main_params(p)?;
            Strategy::Main { a: mp.a, r: mp.r, k_c: mp.k_c }
        }
        StrategyName::S2x2 => Strategy::S2x2,
        StrategyName::S3x3 => Strategy::S3x3 {
            a: rational("a", &p.a, Some("1"))?,
            b: rational("b", &p.b, Some("22055/10000"))?,
            c: rational("c", &p.c, Some("26589/10000"))?,
        },
        StrategyName::S3x4 => Strategy::S3x4 { x: rational("x", &p.x, Some("141421/100000"))? },
    })
}

fn cmd_attack(args: &AttackArgs) -> Result<u8, Failure> {
    let strategy = strategy_from(args)?;
    strategy.initial_instance().map_err(usage)?;
    let mut mech = open(&args.mechanism).map_err(selector_failure)?;
    let run = strategy.run(&mut mech).map_err(|e| match e {
        AdversaryError::Params(_) | AdversaryError::Forge(_) => usage(e),
        other => mechanism_failure(other),
    })?;
    let queries = run.queries();
    let report = Report::new(&strategy, &args.mechanism, run);
    let summary = format!("kind={} bound={} queries={}", report.verdict.kind(), report.verdict.bound_text(), queries);
    match &args.report {
        Some(path) => {
            fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
            println!("{summary}");
        }
        None => {
            println!("{}", report.to_json());
            eprintln!("{summary}");
        }
    }
    if let Verdict::StrategyIncomplete { step, diagnostic } = &report.verdict {
        eprintln!("strategy incomplete at {step}: {diagnostic}");
        return Ok(EXIT_INCOMPLETE);
    }
    Ok(0)
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8, Failure> {
    let exec = if args.sequential { Exec::Sequential } else { Exec::default() };
    let range = SearchRange::default();
    let rows = bounds_sweep(&args.r, args.kc, args.optimize.then_some(&range), exec).map_err(usage)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "n", "k_c", "a", "bound", "feasible", "source"]).context("writing csv")?;
    for row in &rows {
        w.write_record(row.fields()).context("writing csv")?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("flushing csv: {e}"))?;
    let text = String::from_utf8(bytes).context("csv is utf-8")?;
    match &args.out {
        Some(p) => fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_wmon(args: &WmonArgs) -> Result<u8, Failure> {
    let exec = if args.sequential { Exec::Sequential } else { Exec::default() };
    let mech = open(&args.mechanism).map_err(selector_failure)?;
    let violations = if args.exhaustive {
        if args.grid.is_empty() || args.grid.iter().any(|&v| v < 0) {
            return Err(usage(anyhow!("--grid needs nonnegative values")));
        }
        exhaustive_2x2(&mech, &args.grid, exec)
    } else {
        if args.n == 0 || args.m == 0 || args.lo < 0 || args.lo > args.hi {
            return Err(usage(anyhow!("need n, m >= 1 and 0 <= lo <= hi")));
        }
        fuzz(&mech, &FuzzSpec { n: args.n, m: args.m, lo: args.lo, hi: args.hi }, args.trials, args.seed, exec)
    }
    .map_err(|e: MechanismError| mechanism_failure(e))?;
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&violations).context("serializing violations")?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let mode = if args.exhaustive { format!("exhaustive grid {:?}", args.grid) } else { format!("{} trials, seed {}", args.trials, args.seed) };
    println!("mechanism={} {mode}: violations={}", args.mechanism, violations.len());
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let report = read_report(&args.report)?;
    if let Err(d) = verify_verdict(&report.verdict) {
        println!("defect: {d}");
        return Ok(EXIT_DEFECT);
    }
    match parse_builtin(&report.mechanism) {
        Ok(Some(_)) => {
            let mech = open(&report.mechanism).map_err(selector_failure)?;
            if let Err(d) = replay(&report, &mech) {
                println!("defect: {d}");
                return Ok(EXIT_DEFECT);
            }
            println!("ok: {} verified and replayed", report.verdict.kind());
        }
        Ok(None) => println!("ok: {} verified (external mechanism not replayed)", report.verdict.kind()),
        Err(e) => {
            println!("defect: {e}");
            return Ok(EXIT_DEFECT);
        }
    }
    Ok(0)
}

fn read_report(path: &Path) -> Result<Report, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn cmd_serve(args: &ServeArgs) -> Result<u8, Failure> {
    let mut mech = match parse_builtin(&args.mechanism).map_err(selector_failure)? {
        Some(_) => open(&args.mechanism).map_err(selector_failure)?,
        None => return Err(usage(anyhow!("serve needs a built-in mechanism"))),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for line in io::stdin().lock().lines() {
        let line = line.context("reading stdin")?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Instance = serde_json::from_str(&line).context("parsing instance")?;
        let x = mech.query(&t).map_err(mechanism_failure)?;
        writeln!(out, "{}", x.to_json()).and_then(|_| out.flush()).context("writing stdout")?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Wmon(a) => cmd_wmon(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
