use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use leo_pla::detection::{optimize_threshold, DEFAULT_TOL};
use leo_pla::fusion::FusionRule;
use leo_pla::geometry::DEFAULT_COND_THRESHOLD;
use leo_pla::harness::{
    fusion_sweep, identifiability_report, linspace, roc_sweep, run_experiment, write_experiment_csv,
    write_fusion_csv, write_json, write_roc_csv, BetaSpec, FusionSweep, OutputFormat, RunOptions, Scenario,
};
use leo_pla::{PlaError, Result};

#[derive(Parser)]
#[command(name = "leo-pla", version, about = "Doppler-fingerprint authentication of LEO inter-satellite links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-receiver ROC: closed-form (alpha, P_f, P_d) over an alpha grid.
    Roc {
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long = "slot-length", default_value_t = 10)]
        slot_length: usize,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint detection / false-alarm probabilities per fusion rule over a beta sweep.
    Fusion(FusionArgs),
    /// Monte Carlo experiment from a scenario file.
    Simulate(SimulateArgs),
    /// Doppler fingerprints and identifiability of Alice and Eve.
    Identify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long = "cond-threshold", default_value_t = DEFAULT_COND_THRESHOLD)]
        cond_threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal threshold coefficient for one receiver.
    OptimizeThreshold {
        #[arg(long)]
        beta: f64,
        #[arg(long = "slot-length", default_value_t = 10)]
        slot_length: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Args)]
struct FusionArgs {
    /// Take the receiver count and slot length from a scenario file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    satellites: usize,
    #[arg(long = "slot-length")]
    slot_length: Option<usize>,
    /// Restrict to one rule (or, and, majority).
    #[arg(long)]
    rule: Option<FusionRule>,
    #[arg(long)]
    quorum: Option<usize>,
    /// Evaluate a single beta instead of the default sweep.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "beta-min", default_value_t = 0.1)]
    beta_min: f64,
    #[arg(long = "beta-max", default_value_t = 4.0)]
    beta_max: f64,
    /// Number of beta points.
    #[arg(long, default_value_t = 40)]
    grid: usize,
    /// Monte Carlo slots per hypothesis and beta (0 = analytic only).
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    rule: Option<FusionRule>,
    #[arg(long)]
    quorum: Option<usize>,
    /// Homogeneous beta for every receiver, overriding the scenario.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "slot-length")]
    slot_length: Option<usize>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Record the wall-clock time in the result metadata.
    #[arg(long)]
    stamp: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn apply_quorum(rule: FusionRule, quorum: Option<usize>) -> Result<FusionRule> {
    match (rule, quorum) {
        (r, None) => Ok(r),
        (FusionRule::Majority { .. }, Some(q)) => Ok(FusionRule::majority_with_quorum(q)),
        (r, Some(_)) => Err(PlaError::config("--quorum", format!("only applies to the majority rule, not {r}"))),
    }
}

fn open_out(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn roc(beta: f64, slot_length: usize, grid: usize, out: Option<PathBuf>) -> Result<()> {
    let rows = roc_sweep(beta, slot_length, grid)?;
    match out {
        None => write_roc_csv(&rows, io::stdout().lock()),
        Some(p) => match OutputFormat::from_path(&p)? {
            OutputFormat::Csv => write_roc_csv(&rows, open_out(&p)?),
            OutputFormat::Json => write_json(&rows, open_out(&p)?),
        },
    }
}

fn fusion(args: FusionArgs) -> Result<()> {
    let (mut receivers, mut slot_length) = (args.satellites, 10);
    if let Some(path) = &args.scenario {
        let scn = Scenario::load(path)?;
        receivers = scn.receiver_count();
        slot_length = scn.slot_length;
    }
    if let Some(t) = args.slot_length {
        slot_length = t;
    }
    let mut cfg = FusionSweep::new(receivers, slot_length);
    cfg.betas = match args.beta {
        Some(b) => vec![b],
        None => linspace(args.beta_min, args.beta_max, args.grid),
    };
    if cfg.betas.is_empty() {
        return Err(PlaError::config("--grid", "must be at least 1"));
    }
    cfg.rules = match args.rule {
        Some(r) => vec![apply_quorum(r, args.quorum)?],
        None => {
            let majority = apply_quorum(FusionRule::majority(), args.quorum)?;
            vec![FusionRule::Or, FusionRule::And, majority]
        }
    };
    cfg.trials = args.trials;
    cfg.seed = args.seed;
    let rows = fusion_sweep(&cfg)?;
    match args.out {
        None => write_fusion_csv(&rows, io::stdout().lock()),
        Some(p) => match OutputFormat::from_path(&p)? {
            OutputFormat::Csv => write_fusion_csv(&rows, open_out(&p)?),
            OutputFormat::Json => write_json(&rows, open_out(&p)?),
        },
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut scn = Scenario::load(&args.scenario)?;
    if let Some(s) = args.seed {
        scn.seed = s;
    }
    if let Some(t) = args.trials {
        scn.trials = t;
    }
    if let Some(t) = args.slot_length {
        scn.slot_length = t;
    }
    if let Some(r) = args.rule {
        scn.fusion = r;
    }
    scn.fusion = apply_quorum(scn.fusion, args.quorum)?;
    if let Some(b) = args.beta {
        scn.attacker_beta = BetaSpec::Explicit(vec![b; scn.receiver_count()]);
    }
    scn.validate()?;
    let opts = RunOptions {
        threads: args.threads,
        timestamp: args.stamp.then(|| {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            format!("unix:{secs}")
        }),
    };
    let result = run_experiment(&scn, &opts)?;
    match args.out {
        None => write_json(&result, io::stdout().lock()),
        Some(p) => match OutputFormat::from_path(&p)? {
            OutputFormat::Csv => write_experiment_csv(&result, open_out(&p)?),
            OutputFormat::Json => write_json(&result, open_out(&p)?),
        },
    }
}

fn identify(scenario: PathBuf, cond_threshold: f64, out: Option<PathBuf>) -> Result<()> {
    let scn = Scenario::load(&scenario)?;
    let report = identifiability_report(&scn, cond_threshold)?;
    match out {
        None => write_json(&report, io::stdout().lock()),
        Some(p) => match OutputFormat::from_path(&p)? {
            OutputFormat::Json => write_json(&report, open_out(&p)?),
            OutputFormat::Csv => Err(PlaError::config("--out", "identify writes JSON only")),
        },
    }
}

fn optimize(beta: f64, slot_length: usize, tol: f64) -> Result<()> {
    let r = optimize_threshold(beta, slot_length, tol)?;
    let mut out = io::stdout().lock();
    writeln!(out, "alpha* = {}", r.alpha)?;
    writeln!(out, "objective = {}", r.objective)?;
    writeln!(out, "p_detect = {}", r.p_detect)?;
    writeln!(out, "p_false_alarm = {}", r.p_false_alarm)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Roc {
            beta,
            slot_length,
            grid,
            out,
        } => roc(beta, slot_length, grid, out),
        Command::Fusion(a) => fusion(a),
        Command::Simulate(a) => simulate(a),
        Command::Identify {
            scenario,
            cond_threshold,
            out,
        } => identify(scenario, cond_threshold, out),
        Command::OptimizeThreshold { beta, slot_length, tol } => optimize(beta, slot_length, tol),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
