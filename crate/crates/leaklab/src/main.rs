//! Thin command-line front end over the experiment runners in `leaklab::exp`.
//!
//! Every subcommand prints one JSON report (with the resolved config embedded)
//! to stdout and exits 0 when the checked property held, 2 when it was
//! violated or a bound was exceeded, and 1 on usage or config errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use leaklab::error::Error;
use leaklab::exp::{self, DpCalcArgs, ExperimentConfig};
use leaklab::lemmas::{self, Verdict};

#[derive(Parser)]
#[command(
    name = "leaklab",
    version,
    about = "Leakage, learning, and privacy experiments over an idealized order-revealing oracle"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by every experiment; unset flags fall back to `--config`
/// file values, then to per-experiment defaults.
#[derive(Args, Default)]
struct Opts {
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required, here or in the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Domain width in bits (plaintexts live in [1, 2^d]).
    #[arg(long)]
    d: Option<u8>,
    /// Distance kind: floorlog, exact, or order_only_stub.
    #[arg(long)]
    kind: Option<String>,
    /// Bisection sweep mode: exhaustive or sampled.
    #[arg(long)]
    mode: Option<String>,
    /// Sampled-mode triple count.
    #[arg(long)]
    triples: Option<u64>,
    /// Sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Online-game horizon.
    #[arg(long)]
    rounds: Option<u64>,
    /// Fixed concept threshold (default: drawn per trial).
    #[arg(long)]
    threshold: Option<u64>,
    /// Learner name (halving, lencthr, largest_positive, constant_zero, exp_mech).
    #[arg(long)]
    learner: Option<String>,
    /// Adversary name (random, adaptive, two_front).
    #[arg(long)]
    adversary: Option<String>,
    /// Example flavor: plain or encrypted.
    #[arg(long)]
    flavor: Option<String>,
    /// Disable learner probing between rounds.
    #[arg(long)]
    oblivious: bool,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Second mechanism's epsilon (dp-calc compose).
    #[arg(long)]
    epsilon2: Option<f64>,
    /// Second mechanism's delta (dp-calc compose).
    #[arg(long)]
    delta2: Option<f64>,
    /// Group size (dp-calc group).
    #[arg(long)]
    k: Option<u32>,
    /// Subsample size (dp-calc subsample).
    #[arg(long)]
    m: Option<u64>,
    /// Probe points per interval (verify-loginv) or checks per round (ore-stress).
    #[arg(long)]
    probes: Option<usize>,
    /// Claimed success probability for lemma verifiers.
    #[arg(long)]
    claimed: Option<f64>,
    /// Band-radius override for verify-fldspread (0 is a negative control).
    #[arg(long)]
    radius: Option<f64>,
    /// First cell probability (advantage-id).
    #[arg(long)]
    p_first: Option<f64>,
    /// Second cell probability (advantage-id).
    #[arg(long)]
    p_second: Option<f64>,
    /// Sweep the 5x5 probability grid (advantage-id).
    #[arg(long)]
    grid: bool,
    /// Agreement-profile cell count (jump-core).
    #[arg(long)]
    cells: Option<usize>,
    /// Random instance count (jump-core).
    #[arg(long)]
    instances: Option<u64>,
    /// Focus-index mode for the attack: boundary or uniform.
    #[arg(long)]
    focus: Option<String>,
    /// Removal-set mode for the attack: direct or bands.
    #[arg(long)]
    removal: Option<String>,
    /// Challenge-pair sampling attempts per attack trial.
    #[arg(long)]
    pair_attempts: Option<u32>,
    /// Monte Carlo samples per generalization-error estimate.
    #[arg(long)]
    samples: Option<u64>,
    /// Error level for accuracy CDF summaries.
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest acceptable |simulated - closed form| (advantage-id).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Worker threads (default: all cores; LEAKLAB_JOBS as fallback).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the report to this file as well as stdout.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Output format: json, or csv for online-game transcripts.
    #[arg(long)]
    format: Option<String>,
}

impl Opts {
    fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: None,
            seed: self.seed,
            d: self.d,
            kind: self.kind.clone(),
            mode: self.mode.clone(),
            n: self.n,
            trials: self.trials,
            rounds: self.rounds,
            threshold: self.threshold,
            learner: self.learner.clone(),
            adversary: self.adversary.clone(),
            flavor: self.flavor.clone(),
            oblivious: self.oblivious.then_some(true),
            triples: self.triples,
            epsilon: self.epsilon,
            delta: self.delta,
            epsilon2: self.epsilon2,
            delta2: self.delta2,
            k: self.k,
            m: self.m,
            probes: self.probes,
            claimed: self.claimed,
            radius: self.radius,
            p_first: self.p_first,
            p_second: self.p_second,
            grid: self.grid.then_some(true),
            cells: self.cells,
            instances: self.instances,
            focus: self.focus.clone(),
            removal: self.removal.clone(),
            pair_attempts: self.pair_attempts,
            samples: self.samples,
            alpha: self.alpha,
            tolerance: self.tolerance,
            jobs: self.jobs,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            format: self.format.clone(),
        }
    }

    /// Flags merged over the config file, with the experiment-name guard.
    fn resolve(&self, command_name: &str) -> Result<ExperimentConfig, Error> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let merged = self.to_config().over(base);
        if let Some(name) = &merged.experiment {
            if name != command_name {
                return Err(Error::Config(format!(
                    "config is for experiment {name:?}, but {command_name:?} was invoked"
                )));
            }
        }
        Ok(merged)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the bisection property of a distance kind.
    VerifyBisection(Opts),
    /// Check that per-focus band sets stay within the polylog budget.
    VerifyRegularity(Opts),
    /// Check that no sample bucket exceeds the surgery radius.
    VerifyBuckets(Opts),
    /// Check floor-log agreement outside each removal set.
    VerifyFldspread(Opts),
    /// Check leakage blindness inside surviving intervals.
    VerifyLoginv(Opts),
    /// Run mistake-bounded online threshold games.
    OnlineGame(Opts),
    /// Stress the learner under order-only leakage with paired fronts.
    OreStress(Opts),
    /// Run the learner-to-distinguisher reduction in the security game.
    Attack(Opts),
    /// Compare the guessing-advantage identity against simulation.
    AdvantageId(Opts),
    /// Check the adjacent-jump conclusion on random agreement profiles.
    JumpCore(Opts),
    /// Closed-form privacy parameter calculators.
    DpCalc {
        #[command(subcommand)]
        op: DpOp,
    },
    /// Run the whole battery once and summarize pass/fail per component.
    Report(Opts),
}

#[derive(Subcommand)]
enum DpOp {
    /// Group-privacy degradation over k-neighboring datasets.
    Group(Opts),
    /// Sequential composition of two mechanisms.
    Compose(Opts),
    /// Privacy amplification by m-of-n subsampling.
    Subsample(Opts),
}

fn require(value: Option<f64>, flag: &str) -> Result<f64, Error> {
    value.ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

/// Writes the report everywhere it needs to go and returns the exit code.
fn emit<T: Serialize>(report: &T, pass: bool, opts: &Opts, csv: Option<String>) -> Result<ExitCode, Error> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    println!("{json}");
    if let Some(out) = &opts.out {
        let body = match &csv {
            Some(csv) => csv.clone(),
            None => format!("{json}\n"),
        };
        std::fs::write(out, body).map_err(|e| Error::Config(format!("{}: {e}", out.display())))?;
        let meta = serde_json::json!({
            "written_unix_ms": std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            "jobs": opts.jobs,
        });
        let meta_path = out.with_extension(match out.extension() {
            Some(ext) => format!("{}.meta.json", ext.to_string_lossy()),
            None => "meta.json".to_string(),
        });
        std::fs::write(&meta_path, format!("{meta}\n"))
            .map_err(|e| Error::Config(format!("{}: {e}", meta_path.display())))?;
    }
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn jobs_of(opts: &Opts) -> Option<usize> {
    opts.jobs.or_else(|| {
        std::env::var("LEAKLAB_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn want_csv(opts: &Opts, cfg: &ExperimentConfig) -> Result<bool, Error> {
    match cfg.format.as_deref().or(opts.format.as_deref()) {
        None | Some("json") => Ok(false),
        Some("csv") => Ok(true),
        Some(other) => Err(Error::Config(format!(
            "unknown format {other:?}; expected json or csv"
        ))),
    }
}

fn run(cmd: &Cmd) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::VerifyBisection(opts) => {
            let cfg = opts.resolve("verify-bisection")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("verify-bisection emits JSON only".into()));
            }
            let args = exp::BisectionArgs::from_config(&cfg)?;
            let report = exp::with_jobs(jobs_of(opts), || exp::run_bisection(&args))?;
            let pass = report.outcome.holds();
            emit(&report, pass, opts, None)
        }
        Cmd::VerifyRegularity(opts) => {
            let cfg = opts.resolve("verify-regularity")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("verify-regularity emits JSON only".into()));
            }
            let (n, d, trials, seed) = lemma_params(&cfg, 128, 40, 400)?;
            let report = exp::with_jobs(jobs_of(opts), || {
                lemmas::verify_regularity(n, d, trials, seed, cfg.claimed)
            })?;
            let pass = report.verdict == Verdict::Consistent;
            emit(&report, pass, opts, None)
        }
        Cmd::VerifyBuckets(opts) => {
            let cfg = opts.resolve("verify-buckets")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("verify-buckets emits JSON only".into()));
            }
            let (n, d, trials, seed) = lemma_params(&cfg, 128, 40, 400)?;
            let report = exp::with_jobs(jobs_of(opts), || {
                lemmas::verify_bucket_sizes(n, d, trials, seed, cfg.claimed)
            })?;
            let pass = report.verdict == Verdict::Consistent;
            emit(&report, pass, opts, None)
        }
        Cmd::VerifyFldspread(opts) => {
            let cfg = opts.resolve("verify-fldspread")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("verify-fldspread emits JSON only".into()));
            }
            let (n, d, trials, seed) = lemma_params(&cfg, 256, 40, 500)?;
            let report = exp::with_jobs(jobs_of(opts), || {
                lemmas::verify_fld_spread(n, d, trials, seed, cfg.claimed, cfg.radius)
            })?;
            let pass = report.verdict == Verdict::Consistent;
            emit(&report, pass, opts, None)
        }
        Cmd::VerifyLoginv(opts) => {
            let cfg = opts.resolve("verify-loginv")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("verify-loginv emits JSON only".into()));
            }
            let (n, d, trials, seed) = lemma_params(&cfg, 128, 30, 200)?;
            let probes = cfg.probes.unwrap_or(8);
            let report = exp::with_jobs(jobs_of(opts), || {
                lemmas::verify_log_invariance(n, d, trials, probes, seed, cfg.claimed)
            })?;
            let pass = report.cond1.verdict == Verdict::Consistent;
            emit(&report, pass, opts, None)
        }
        Cmd::OnlineGame(opts) => {
            let cfg = opts.resolve("online-game")?;
            let csv = want_csv(opts, &cfg)?;
            let mut args = exp::OnlineGameArgs::from_config(&cfg)?;
            args.include_transcript = csv;
            let report = exp::with_jobs(jobs_of(opts), || exp::run_online_game(&args))?;
            let pass = report.all_within_bound && report.potential_monotone != Some(false);
            let csv_body = if csv {
                match &report.transcript {
                    Some(t) => Some(t.to_csv(true)),
                    None => return Err(Error::Config("no transcript to export".into())),
                }
            } else {
                None
            };
            emit(&report, pass, opts, csv_body)
        }
        Cmd::OreStress(opts) => {
            let cfg = opts.resolve("ore-stress")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("ore-stress emits JSON only".into()));
            }
            let args = exp::OreStressArgs::from_config(&cfg)?;
            let report = exp::with_jobs(jobs_of(opts), || exp::run_ore_stress(&args))?;
            let pass = report.all_projections_equal;
            emit(&report, pass, opts, None)
        }
        Cmd::Attack(opts) => {
            let cfg = opts.resolve("attack")?;
            let csv = want_csv(opts, &cfg)?;
            let args = exp::AttackArgs::from_config(&cfg)?;
            let report = exp::with_jobs(jobs_of(opts), || exp::run_attack(&args))?;
            // Per-trial rows go to --out as JSON lines when csv is requested.
            let rows = csv.then(|| report.rows_jsonl());
            emit(&report, true, opts, rows)
        }
        Cmd::AdvantageId(opts) => {
            let cfg = opts.resolve("advantage-id")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("advantage-id emits JSON only".into()));
            }
            let args = exp::IdentityArgs::from_config(&cfg)?;
            let report = exp::with_jobs(jobs_of(opts), || exp::run_advantage_identity(&args))?;
            let pass = report.within_tolerance;
            emit(&report, pass, opts, None)
        }
        Cmd::JumpCore(opts) => {
            let cfg = opts.resolve("jump-core")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("jump-core emits JSON only".into()));
            }
            let args = exp::JumpCoreArgs::from_config(&cfg)?;
            let report = exp::with_jobs(jobs_of(opts), || exp::run_jump_core(&args))?;
            let pass = report.violated == 0;
            emit(&report, pass, opts, None)
        }
        Cmd::DpCalc { op } => {
            let (opts, args) = match op {
                DpOp::Group(opts) => {
                    let cfg = opts.resolve("dp-calc")?;
                    let args = DpCalcArgs::Group {
                        epsilon: require(cfg.epsilon, "epsilon")?,
                        delta: require(cfg.delta, "delta")?,
                        k: cfg
                            .k
                            .ok_or_else(|| Error::Config("--k is required".into()))?,
                    };
                    (opts, args)
                }
                DpOp::Compose(opts) => {
                    let cfg = opts.resolve("dp-calc")?;
                    let args = DpCalcArgs::Compose {
                        epsilon: require(cfg.epsilon, "epsilon")?,
                        delta: require(cfg.delta, "delta")?,
                        epsilon2: require(cfg.epsilon2, "epsilon2")?,
                        delta2: require(cfg.delta2, "delta2")?,
                    };
                    (opts, args)
                }
                DpOp::Subsample(opts) => {
                    let cfg = opts.resolve("dp-calc")?;
                    let args = DpCalcArgs::Subsample {
                        epsilon: require(cfg.epsilon, "epsilon")?,
                        delta: require(cfg.delta, "delta")?,
                        m: cfg
                            .m
                            .ok_or_else(|| Error::Config("--m is required".into()))?,
                        n: cfg.n.map(|n| n as u64).ok_or_else(|| {
                            Error::Config("--n is required".into())
                        })?,
                    };
                    (opts, args)
                }
            };
            let report = exp::run_dp_calc(&args)?;
            emit(&report, true, opts, None)
        }
        Cmd::Report(opts) => {
            let cfg = opts.resolve("report")?;
            if want_csv(opts, &cfg)? {
                return Err(Error::Config("report emits JSON only".into()));
            }
            let args = exp::ReportArgs::from_config(&cfg)?;
            let report = exp::with_jobs(jobs_of(opts), || exp::run_report(&args))?;
            let pass = report.all_pass;
            emit(&report, pass, opts, None)
        }
    }
}

fn lemma_params(
    cfg: &ExperimentConfig,
    default_n: usize,
    default_d: u8,
    default_trials: u64,
) -> Result<(usize, u8, u64, u64), Error> {
    Ok((
        cfg.n.unwrap_or(default_n),
        cfg.d.unwrap_or(default_d),
        cfg.trials.unwrap_or(default_trials),
        cfg.seed()?,
    ))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            print!("{err}");
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            let line = err
                .to_string()
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("usage error")
                .to_string();
            eprintln!("{line}");
            return ExitCode::FAILURE;
        }
    };
    match run(&cli.cmd) {
        Ok(code) => code,
        Err(err) => {
            let msg = err.to_string();
            let line = msg.lines().next().unwrap_or("error");
            let mut stderr = std::io::stderr().lock();
            let _ = writeln!(stderr, "{line}");
            ExitCode::FAILURE
        }
    }
}
