//! `grand-relay`: BER sweeps, barrier reports and self-checks.
//!
//! Settings resolve in three layers, later winning: a preset or config
//! file, then command-line flags. The resolved configuration is written
//! next to the results so a run can be repeated exactly.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grand_relay::analysis::{barrier_analysis, curves_from_rows, write_barrier_csv, Consensus};
use grand_relay::config::{
    preset, Budget, RunConfig, SnrAxis, BARRIER_FILE, CONFIG_ECHO_FILE, PRESETS, RESULTS_FILE,
};
use grand_relay::montecarlo::{read_results_csv, run_sweep_with_progress, write_results_csv};
use grand_relay::{selftest, ChannelKind, DecoderKind, Error, FadingMode, Scenario, StoppingRule};

#[derive(Parser, Debug)]
#[command(name = "grand-relay", version, about = "GRAND/ORBGRAND multihop BER simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a BER sweep and write results.csv, barrier.csv and the resolved config.
    Sweep(Box<SweepArgs>),
    /// Locate the GRAND barrier in an existing results CSV.
    Barrier(BarrierArgs),
    /// Run the built-in oracle suites.
    Selftest,
    /// List the shipped presets, or print one as TOML.
    Presets(PresetsArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Start from a shipped preset (see `presets`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Preset budget: fast or full.
    #[arg(long, default_value = "fast", requires = "preset")]
    budget: String,
    /// Start from a TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_u64)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Print the cell count and trial budget, run nothing.
    #[arg(long)]
    dry_run: bool,

    /// Eb/N0 points in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    eb_n0: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    relays: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    scenario: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    decoder: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    channel: Option<Vec<String>>,
    #[arg(long)]
    fading: Option<String>,
    /// Stop each cell after exactly this many blocks.
    #[arg(long, conflicts_with_all = ["error_target", "max_trials"])]
    fixed_trials: Option<u64>,
    /// Stop each cell after this many block errors...
    #[arg(long)]
    error_target: Option<u64>,
    /// ...or this many blocks, whichever comes first.
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    max_queries: Option<u64>,
    #[arg(long)]
    max_weight: Option<usize>,
}

#[derive(Args, Debug)]
struct BarrierArgs {
    /// Results CSV produced by `sweep`.
    results: PathBuf,
    /// Report path (default: barrier.csv beside the results).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest crossing spread still reported as one barrier, in dB.
    #[arg(long, default_value_t = grand_relay::analysis::DEFAULT_CONSENSUS_TOLERANCE_DB)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct PresetsArgs {
    /// Print this preset's resolved TOML.
    #[arg(long)]
    show: Option<String>,
    #[arg(long, default_value = "fast")]
    budget: String,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(_) | Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("{s:?}: {e}"))
}

fn parse_list<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>, Failure> {
    items.iter().map(|s| s.parse().map_err(Failure::from)).collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sweep(args) => cmd_sweep(*args),
        Command::Barrier(args) => cmd_barrier(args),
        Command::Selftest => cmd_selftest(),
        Command::Presets(args) => cmd_presets(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn resolve_config(args: &SweepArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), _) => preset(name, args.budget.parse::<Budget>()?)?,
        (None, Some(path)) => RunConfig::load(path)?,
        (None, None) => {
            return Err(Failure::Usage("sweep needs --preset or --config".into()));
        }
    };
    let g = &mut cfg.grid;
    if let Some(v) = &args.eb_n0 {
        g.eb_n0_db = SnrAxis::List(v.clone());
    }
    if let Some(v) = &args.relays {
        g.relay_counts = v.clone();
    }
    if let Some(v) = &args.scenario {
        g.scenarios = parse_list::<Scenario>(v)?;
    }
    if let Some(v) = &args.decoder {
        g.decoders = parse_list::<DecoderKind>(v)?;
    }
    if let Some(v) = &args.channel {
        g.channels = parse_list::<ChannelKind>(v)?;
    }
    if let Some(f) = &args.fading {
        g.fading = f.parse::<FadingMode>()?;
    }
    if args.seed.is_some() {
        g.seed = args.seed;
    }
    if let Some(trials) = args.fixed_trials {
        cfg.stopping = StoppingRule::FixedTrials { trials };
    } else if args.error_target.is_some() || args.max_trials.is_some() {
        let (mut e, mut m, min) = match cfg.stopping {
            StoppingRule::ErrorTarget { block_errors, max_trials, min_trials } => {
                (block_errors, max_trials, min_trials)
            }
            StoppingRule::FixedTrials { trials } => (200, trials, 0),
        };
        e = args.error_target.unwrap_or(e);
        m = args.max_trials.unwrap_or(m);
        cfg.stopping = StoppingRule::ErrorTarget { block_errors: e, max_trials: m, min_trials: min.min(m) };
    }
    if let Some(q) = args.max_queries {
        cfg.budget.max_queries = q;
    }
    if let Some(w) = args.max_weight {
        cfg.budget.max_weight = w;
    }
    if args.workers.is_some() {
        cfg.run.workers = args.workers;
    }
    if let Some(out) = &args.out {
        cfg.run.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg = resolve_config(&args)?;
    let seed_note = if cfg.grid.seed.is_none() { " (default)" } else { "" };
    eprintln!("*** seed {:#X}{seed_note} ***", cfg.seed());
    let cells = cfg.cell_count()?;
    let budget = cfg.trial_budget()?;
    if args.dry_run {
        println!("cells: {cells}");
        println!("trial budget: at most {budget} blocks ({})", cfg.stopping);
        return Ok(());
    }

    let sweep = cfg.sweep_config()?;
    let out_dir = &cfg.run.out_dir;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(CONFIG_ECHO_FILE), cfg.to_toml_string()?)?;
    eprintln!("{cells} cells, at most {budget} blocks");

    let records = run_sweep_with_progress(&sweep, |rec, done, total| {
        let c = &rec.cell;
        eprintln!(
            "[{done}/{total}] {} {} {} relays={} {:.2} dB: trials={} ber={:.3e}{}",
            c.scenario,
            c.decoder,
            c.channel,
            c.num_relays,
            c.eb_n0_db,
            rec.trials,
            rec.ber(),
            if rec.upper_bound_only() { " (upper bound only)" } else { "" },
        );
    })?;
    let results_path = out_dir.join(RESULTS_FILE);
    let mut w = BufWriter::new(File::create(&results_path)?);
    write_results_csv(&mut w, &sweep, &records)?;
    w.flush()?;
    println!("wrote {}", results_path.display());

    let rows = read_results_csv(File::open(&results_path)?)?;
    let curves = curves_from_rows(&rows)?;
    match barrier_analysis(&curves, cfg.run.consensus_tolerance_db) {
        Ok(est) => {
            let path = out_dir.join(BARRIER_FILE);
            write_barrier_csv(BufWriter::new(File::create(&path)?), &est, cfg.run.consensus_tolerance_db)?;
            print_barrier(&est);
            println!("wrote {}", path.display());
        }
        Err(Error::NeedCurves) => eprintln!("no ALL_NODES/NO_GRAND pairs; skipping barrier report"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn print_barrier(estimates: &[grand_relay::analysis::BarrierEstimate]) {
    for est in estimates {
        let crossings: Vec<String> = est.crossings().iter().map(|x| format!("{x:.2}")).collect();
        let verdict = match est.consensus {
            Consensus::Agreed { eb_n0_db, spread_db } => {
                format!("barrier {eb_n0_db:.2} dB (spread {spread_db:.2} dB)")
            }
            Consensus::Dispersed { spread_db } => format!("DISPERSED (spread {spread_db:.2} dB)"),
            Consensus::Insufficient => "INSUFFICIENT crossings".to_string(),
        };
        println!(
            "{} {} {}: {verdict}; crossings [{}]",
            est.channel,
            est.fading,
            est.decoder,
            crossings.join(", ")
        );
    }
}

fn cmd_barrier(args: BarrierArgs) -> Result<(), Failure> {
    let file = File::open(&args.results)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", args.results.display())))?;
    let rows = read_results_csv(file)?;
    if rows.is_empty() {
        return Err(Error::NoRecords.into());
    }
    let curves = curves_from_rows(&rows)?;
    let estimates = barrier_analysis(&curves, args.tolerance)?;
    let out = args.out.unwrap_or_else(|| {
        args.results
            .parent()
            .unwrap_or(Path::new("."))
            .join(BARRIER_FILE)
    });
    write_barrier_csv(BufWriter::new(File::create(&out)?), &estimates, args.tolerance)?;
    print_barrier(&estimates);
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_selftest() -> Result<(), Failure> {
    let results = selftest::run_all();
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<28} {:>7.2}s  {}", r.name, r.elapsed_s, r.detail);
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("selftest failed: {}", failed.join(", "))))
    }
}

fn cmd_presets(args: PresetsArgs) -> Result<(), Failure> {
    let budget: Budget = args.budget.parse()?;
    if let Some(name) = args.show {
        print!("{}", preset(&name, budget)?.to_toml_string()?);
        return Ok(());
    }
    for p in &PRESETS {
        let cfg = preset(p.name, budget)?;
        println!(
            "{:<6} {:<62} {:>3} cells",
            p.name,
            p.summary(),
            cfg.cell_count()?
        );
    }
    Ok(())
}
