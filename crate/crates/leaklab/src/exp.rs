//! Experiment runners and their configuration plumbing.
//!
//! Every runner takes a fully resolved argument struct, embeds it in the
//! report it returns, and derives all randomness from the mandatory seed
//! with per-trial counter streams, so a report is byte-identical across
//! runs and thread counts. Wall-clock metadata never enters a report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{
    advantage_identity_check, attack_concept, jump_core_check, AttackConfig, FocusMode,
    IdentityReport, JumpCoreInstance, JumpCoreOutcome, ReductionAdversary, RemovalMode,
};
use crate::concepts::{generalization_error, sample_sorted_dataset, ThresholdConcept};
use crate::dp::{compose, group_privacy, subsample_amplify, OfflineLearnerKind, PrivacyParams};
use crate::error::{Error, Result};
use crate::fre::{run_security_game, AdvantageEstimate, GameAdversary, SecurityGameConfig};
use crate::leakage::{
    check_bisection, domain_max, leak_raw, BisectionMode, BisectionOutcome, DistanceFunctionKind,
    MAX_EXHAUSTIVE_WIDTH,
};
use crate::online::{
    AdversaryMove, EncThresholdLearner, GameFlavor, GameTranscript, HalvingLearner, OnlineAdversary,
    OnlineGame, OnlineLearner, Prober, RandomAdversary, Round, TwoFrontAdversary,
    WorstCaseAdversary,
};

/// Raw experiment configuration, as read from a JSON file or CLI flags.
/// Unknown keys are rejected; `seed` is mandatory everywhere.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Subcommand name; when set it must match the command being run.
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    /// Domain width in bits.
    pub d: Option<u8>,
    pub kind: Option<String>,
    /// Bisection sweep mode: "exhaustive" or "sampled".
    pub mode: Option<String>,
    pub n: Option<usize>,
    pub trials: Option<u64>,
    /// Online-game horizon.
    pub rounds: Option<u64>,
    pub threshold: Option<u64>,
    pub learner: Option<String>,
    pub adversary: Option<String>,
    pub flavor: Option<String>,
    pub oblivious: Option<bool>,
    pub triples: Option<u64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon2: Option<f64>,
    pub delta2: Option<f64>,
    pub k: Option<u32>,
    pub m: Option<u64>,
    pub probes: Option<usize>,
    pub claimed: Option<f64>,
    pub radius: Option<f64>,
    pub p_first: Option<f64>,
    pub p_second: Option<f64>,
    pub grid: Option<bool>,
    pub cells: Option<usize>,
    pub instances: Option<u64>,
    pub focus: Option<String>,
    pub removal: Option<String>,
    pub pair_attempts: Option<u32>,
    pub samples: Option<u64>,
    pub alpha: Option<f64>,
    pub tolerance: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<String>,
    pub format: Option<String>,
}

impl ExperimentConfig {
    /// Reads a config file, rejecting unknown keys by name.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Field-wise overlay: values set in `self` win over `base`.
    pub fn over(self, base: ExperimentConfig) -> ExperimentConfig {
        macro_rules! pick {
            ($($f:ident),* $(,)?) => {
                ExperimentConfig { $($f: self.$f.or(base.$f)),* }
            };
        }
        pick!(
            experiment, seed, d, kind, mode, n, trials, rounds, threshold, learner, adversary,
            flavor, oblivious, triples, epsilon, delta, epsilon2, delta2, k, m, probes,
            claimed, radius, p_first, p_second, grid, cells, instances, focus, removal,
            pair_attempts, samples, alpha, tolerance, jobs, out, format,
        )
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("seed is required".into()))
    }

    fn kind_or(&self, default: DistanceFunctionKind) -> Result<DistanceFunctionKind> {
        match &self.kind {
            Some(s) => s.parse(),
            None => Ok(default),
        }
    }
}

/// Runs `f` on a dedicated thread pool when a worker count is given.
/// Results never depend on the pool size; this only bounds parallelism.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match jobs {
        Some(j) if j > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_add(1));
    rng
}

// ---------------------------------------------------------------------------
// Bisection

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionArgs {
    pub kind: DistanceFunctionKind,
    pub width: u8,
    /// `None` runs the exhaustive sweep (small widths only).
    pub triples: Option<u64>,
    pub seed: u64,
}

impl BisectionArgs {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let width = cfg.d.unwrap_or(8);
        let triples = match cfg.mode.as_deref() {
            Some("exhaustive") => None,
            Some("sampled") => Some(cfg.triples.unwrap_or(1_000_000)),
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown mode {other:?}; expected exhaustive or sampled"
                )))
            }
            None => match cfg.triples {
                Some(t) => Some(t),
                None if width > MAX_EXHAUSTIVE_WIDTH => Some(1_000_000),
                None => None,
            },
        };
        Ok(Self {
            kind: cfg.kind_or(DistanceFunctionKind::FloorLog)?,
            width,
            triples,
            seed: cfg.seed()?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BisectionReport {
    pub config: BisectionArgs,
    pub outcome: BisectionOutcome,
}

pub fn run_bisection(args: &BisectionArgs) -> Result<BisectionReport> {
    let mode = match args.triples {
        None => BisectionMode::Exhaustive,
        Some(triples) => BisectionMode::Sampled {
            triples,
            seed: args.seed,
        },
    };
    Ok(BisectionReport {
        config: *args,
        outcome: check_bisection(args.kind, args.width, mode)?,
    })
}

// ---------------------------------------------------------------------------
// Online games

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineGameArgs {
    pub width: u8,
    pub kind: DistanceFunctionKind,
    pub flavor: GameFlavor,
    pub learner: String,
    pub adversary: String,
    /// Fixed threshold; `None` draws one per trial.
    pub threshold: Option<u64>,
    pub horizon: u64,
    pub trials: u64,
    pub oblivious: bool,
    pub include_transcript: bool,
    pub seed: u64,
}

impl OnlineGameArgs {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let flavor = match cfg.flavor.as_deref() {
            None | Some("encrypted") => GameFlavor::Encrypted,
            Some("plain") => GameFlavor::Plain,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown flavor {other:?}; expected plain or encrypted"
                )))
            }
        };
        let learner = cfg.learner.clone().unwrap_or_else(|| {
            match flavor {
                GameFlavor::Plain => "halving",
                GameFlavor::Encrypted => "enc_threshold",
            }
            .to_string()
        });
        Ok(Self {
            width: cfg.d.unwrap_or(16),
            kind: cfg.kind_or(DistanceFunctionKind::FloorLog)?,
            flavor,
            learner,
            adversary: cfg.adversary.clone().unwrap_or_else(|| "random".into()),
            threshold: cfg.threshold,
            horizon: cfg.rounds.unwrap_or(2000),
            trials: cfg.trials.unwrap_or(20),
            oblivious: cfg.oblivious.unwrap_or(false),
            include_transcript: false,
            seed: cfg.seed()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnlineTrialSummary {
    pub trial: u64,
    pub threshold: u64,
    pub rounds: u64,
    pub mistakes: u64,
    pub probes_used: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnlineGameReport {
    pub config: OnlineGameArgs,
    pub trials: Vec<OnlineTrialSummary>,
    pub max_mistakes: u64,
    pub mean_mistakes: f64,
    /// Mistake budget asserted for the configured learner.
    pub mistake_bound: u64,
    pub all_within_bound: bool,
    /// Whether the anchor potential strictly decreased on every mistake
    /// made while anchors were live; `None` when no trial had anchors.
    pub potential_monotone: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<GameTranscript>,
}

fn build_learner(name: &str, width: u8, flavor: GameFlavor) -> Result<Box<dyn OnlineLearner>> {
    match (name, flavor) {
        ("halving", GameFlavor::Plain) => Ok(Box::new(HalvingLearner::new(width)?)),
        ("halving", GameFlavor::Encrypted) => Err(Error::Config(
            "halving learns plain values; use flavor = plain".into(),
        )),
        ("lencthr" | "enc_threshold", GameFlavor::Encrypted) => {
            Ok(Box::new(EncThresholdLearner::new()))
        }
        ("lencthr" | "enc_threshold", GameFlavor::Plain) => Err(Error::Config(
            "enc_threshold needs encrypted examples; use flavor = encrypted".into(),
        )),
        (other, _) => Err(Error::Config(format!(
            "unknown learner {other:?}; expected halving, lencthr, or enc_threshold"
        ))),
    }
}

fn build_adversary(
    name: &str,
    width: u8,
    flavor: GameFlavor,
    t: u64,
    seed: u64,
) -> Result<Box<dyn OnlineAdversary>> {
    match name {
        "random" => Ok(Box::new(RandomAdversary::new(width, flavor, seed)?)),
        "adaptive" | "worst_case" => Ok(Box::new(WorstCaseAdversary::new(width, t, flavor, seed)?)),
        "two_front" | "twofront" => {
            if flavor != GameFlavor::Encrypted {
                return Err(Error::Config("two_front plays encrypted games only".into()));
            }
            let adv = TwoFrontAdversary::new(width, seed)?;
            if t != adv.threshold() {
                return Err(Error::Config(format!(
                    "two_front fixes the threshold at {}, got {t}",
                    adv.threshold()
                )));
            }
            Ok(Box::new(adv))
        }
        other => Err(Error::Config(format!(
            "unknown adversary {other:?}; expected random, adaptive, or two_front"
        ))),
    }
}

fn potential_monotone(rounds: &[Round]) -> (bool, bool) {
    let mut seen = false;
    let mut ok = true;
    for pair in rounds.windows(2) {
        if let (Some(before), true) = (pair[0].potential_after, pair[1].mistake) {
            seen = true;
            match pair[1].potential_after {
                Some(after) if after < before => {}
                _ => ok = false,
            }
        }
    }
    (seen, ok)
}

pub fn run_online_game(args: &OnlineGameArgs) -> Result<OnlineGameReport> {
    let max = domain_max(args.width)?;
    if let Some(t) = args.threshold {
        ThresholdConcept::new(t, args.width)?;
    }
    // Fail fast on bad names before spawning trials.
    build_learner(&args.learner, args.width, args.flavor)?;
    build_adversary(
        &args.adversary,
        args.width,
        args.flavor,
        args.threshold.unwrap_or(max / 2).max(1),
        0,
    )?;

    let outcomes: Vec<(OnlineTrialSummary, GameTranscript)> = (0..args.trials)
        .into_par_iter()
        .map(|trial| -> Result<(OnlineTrialSummary, GameTranscript)> {
            let mut rng = trial_rng(args.seed, trial);
            let t = match args.threshold {
                Some(t) => t,
                None => rng.random_range(1..=max),
            };
            let game_seed = rng.random::<u64>();
            let adv_seed = rng.random::<u64>();
            let mut game = OnlineGame::new(args.width, args.kind, t, args.flavor, game_seed)?;
            let mut learner = build_learner(&args.learner, args.width, args.flavor)?;
            let mut adversary =
                build_adversary(&args.adversary, args.width, args.flavor, t, adv_seed)?;
            let transcript = game.run(
                learner.as_mut(),
                adversary.as_mut(),
                args.horizon,
                args.oblivious,
            )?;
            let summary = OnlineTrialSummary {
                trial,
                threshold: t,
                rounds: transcript.rounds.len() as u64,
                mistakes: transcript.mistakes(),
                probes_used: transcript.probes_used,
            };
            Ok((summary, transcript))
        })
        .collect::<Result<Vec<_>>>()?;

    let mistake_bound = match args.learner.as_str() {
        "halving" => u64::from(args.width),
        _ => u64::from(args.width) + 4,
    };
    let max_mistakes = outcomes.iter().map(|(s, _)| s.mistakes).max().unwrap_or(0);
    let mean_mistakes = if outcomes.is_empty() {
        0.0
    } else {
        outcomes.iter().map(|(s, _)| s.mistakes).sum::<u64>() as f64 / outcomes.len() as f64
    };
    let mut any_seen = false;
    let mut all_ok = true;
    for (_, transcript) in &outcomes {
        let (seen, ok) = potential_monotone(&transcript.rounds);
        any_seen |= seen;
        all_ok &= ok;
    }
    let transcript = args
        .include_transcript
        .then(|| outcomes.first().map(|(_, t)| t.clone()))
        .flatten();
    Ok(OnlineGameReport {
        config: args.clone(),
        trials: outcomes.iter().map(|(s, _)| *s).collect(),
        max_mistakes,
        mean_mistakes,
        mistake_bound,
        all_within_bound: max_mistakes <= mistake_bound,
        potential_monotone: any_seen.then_some(all_ok),
        transcript,
    })
}

// ---------------------------------------------------------------------------
// Order-only stress game

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OreStressArgs {
    pub width: u8,
    pub horizon: u64,
    pub trials: u64,
    /// Cap on sampled leakage-triple equality checks per round.
    pub check_cap: usize,
    pub seed: u64,
}

impl OreStressArgs {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            width: cfg.d.unwrap_or(32),
            horizon: cfg.rounds.unwrap_or(2000),
            trials: cfg.trials.unwrap_or(20),
            check_cap: cfg.probes.unwrap_or(32),
            seed: cfg.seed()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OreStressTrial {
    pub trial: u64,
    pub rounds: u64,
    pub mistakes: u64,
    pub mistake_rate: f64,
    pub projections_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OreStressReport {
    pub config: OreStressArgs,
    pub trials: Vec<OreStressTrial>,
    pub mean_mistake_rate: f64,
    pub min_mistake_rate: f64,
    pub max_mistake_rate: f64,
    pub all_projections_equal: bool,
}

/// Wraps the two-front adversary and, before every coin flip, verifies that
/// both candidate values are indistinguishable to the learner: identical
/// order relations against everything presented so far, and identical
/// order-only leakage on sampled history triples.
struct CheckedTwoFront {
    inner: TwoFrontAdversary,
    presented: Vec<u64>,
    rng: ChaCha12Rng,
    check_cap: usize,
    projections_equal: bool,
}

impl OnlineAdversary for CheckedTwoFront {
    fn next_move(&mut self, history: &[Round], prober: &mut Prober<'_>) -> Option<AdversaryMove> {
        let kind = DistanceFunctionKind::OrderOnlyStub;
        if let (Some(lo), Some(hi)) = self.inner.candidates() {
            for &p in &self.presented {
                if crate::leakage::comp_raw(lo, p) != crate::leakage::comp_raw(hi, p) {
                    self.projections_equal = false;
                }
            }
            let m = self.presented.len();
            if m >= 2 {
                for _ in 0..self.check_cap {
                    let a = self.presented[self.rng.random_range(0..m)];
                    let b = self.presented[self.rng.random_range(0..m)];
                    if leak_raw(kind, lo, a, b) != leak_raw(kind, hi, a, b) {
                        self.projections_equal = false;
                    }
                }
            }
        }
        let mv = self.inner.next_move(history, prober);
        if let Some(AdversaryMove::Enc(x)) = mv {
            self.presented.push(x);
        }
        mv
    }
}

pub fn run_ore_stress(args: &OreStressArgs) -> Result<OreStressReport> {
    let max = domain_max(args.width)?;
    let t = max / 2;
    let trials: Vec<OreStressTrial> = (0..args.trials)
        .into_par_iter()
        .map(|trial| -> Result<OreStressTrial> {
            let mut rng = trial_rng(args.seed, trial);
            let game_seed = rng.random::<u64>();
            let adv_seed = rng.random::<u64>();
            let check_seed = rng.random::<u64>();
            let mut game = OnlineGame::new(
                args.width,
                DistanceFunctionKind::OrderOnlyStub,
                t,
                GameFlavor::Encrypted,
                game_seed,
            )?;
            let mut learner = EncThresholdLearner::new();
            let mut adversary = CheckedTwoFront {
                inner: TwoFrontAdversary::new(args.width, adv_seed)?,
                presented: Vec::new(),
                rng: ChaCha12Rng::seed_from_u64(check_seed),
                check_cap: args.check_cap,
                projections_equal: true,
            };
            let transcript = game.run(&mut learner, &mut adversary, args.horizon, true)?;
            let rounds = transcript.rounds.len() as u64;
            let mistakes = transcript.mistakes();
            Ok(OreStressTrial {
                trial,
                rounds,
                mistakes,
                mistake_rate: mistakes as f64 / rounds.max(1) as f64,
                projections_equal: adversary.projections_equal,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rates: Vec<f64> = trials.iter().map(|t| t.mistake_rate).collect();
    Ok(OreStressReport {
        config: *args,
        mean_mistake_rate: rates.iter().sum::<f64>() / rates.len().max(1) as f64,
        min_mistake_rate: rates.iter().cloned().fold(f64::INFINITY, f64::min),
        max_mistake_rate: rates.iter().cloned().fold(0.0, f64::max),
        all_projections_equal: trials.iter().all(|t| t.projections_equal),
        trials,
    })
}

// ---------------------------------------------------------------------------
// Reduction attack

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackArgs {
    pub width: u8,
    pub kind: DistanceFunctionKind,
    pub n: usize,
    pub trials: u64,
    pub learner: OfflineLearnerKind,
    pub focus: FocusMode,
    pub removal: RemovalMode,
    pub pair_attempts: u32,
    pub seed: u64,
}

impl AttackArgs {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let learner = match cfg.learner.as_deref() {
            None => OfflineLearnerKind::LargestPositive,
            Some(name) => {
                let kind: OfflineLearnerKind = name.parse()?;
                kind.with_epsilon(cfg.epsilon.unwrap_or(1.0))
            }
        };
        let focus = match cfg.focus.as_deref() {
            None | Some("boundary") => FocusMode::Boundary,
            Some("uniform") => FocusMode::Uniform,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown focus {other:?}; expected boundary or uniform"
                )))
            }
        };
        let removal = match cfg.removal.as_deref() {
            None | Some("direct") => RemovalMode::Direct,
            Some("bands") => RemovalMode::AiIntersection,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown removal {other:?}; expected direct or bands"
                )))
            }
        };
        Ok(Self {
            width: cfg.d.unwrap_or(40),
            kind: cfg.kind_or(DistanceFunctionKind::FloorLog)?,
            n: cfg.n.unwrap_or(100),
            trials: cfg.trials.unwrap_or(1000),
            learner,
            focus,
            removal,
            pair_attempts: cfg.pair_attempts.unwrap_or(32),
            seed: cfg.seed()?,
        })
    }
}

/// One attack trial, in JSONL-friendly shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackTrialRow {
    pub trial: u64,
    pub i: Option<u64>,
    pub aborted: bool,
    pub r_size: Option<u64>,
    pub b: u8,
    pub b_guess: u8,
    pub agree: Option<bool>,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReport {
    pub config: AttackArgs,
    pub estimate: AdvantageEstimate,
    pub abort_rate: f64,
    pub invalid_rate: f64,
    pub rows: Vec<AttackTrialRow>,
}

impl AttackReport {
    /// Per-trial records as JSON lines.
    pub fn rows_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row).expect("row serializes"));
            out.push('\n');
        }
        out
    }
}

pub fn run_attack(args: &AttackArgs) -> Result<AttackReport> {
    let attack_cfg = AttackConfig {
        width: args.width,
        kind: args.kind,
        n: args.n,
        learner: args.learner,
        focus: args.focus,
        removal: args.removal,
        pair_attempts: args.pair_attempts,
    };
    // Validate eagerly; the factory below must not fail.
    ReductionAdversary::new(attack_cfg, 0)?;
    attack_concept(args.width)?;
    let game_cfg = SecurityGameConfig {
        width: args.width,
        kind: args.kind,
        trials: args.trials,
        seed: args.seed,
    };
    let outcome = run_security_game(&game_cfg, |seed| {
        Box::new(ReductionAdversary::new(attack_cfg, seed).expect("config validated"))
            as Box<dyn GameAdversary>
    })?;

    let rows: Vec<AttackTrialRow> = outcome
        .records
        .iter()
        .map(|rec| {
            let detail = rec.detail.as_ref();
            let get_u64 = |key: &str| detail.and_then(|d| d.get(key)).and_then(|v| v.as_u64());
            let aborted = detail
                .and_then(|d| d.get("aborted"))
                .and_then(|v| v.as_bool())
                .unwrap_or(false);
            AttackTrialRow {
                trial: rec.trial,
                i: get_u64("i"),
                aborted,
                r_size: get_u64("r_size"),
                b: u8::from(rec.b),
                b_guess: u8::from(rec.output),
                agree: detail
                    .and_then(|d| d.get("agree"))
                    .and_then(|v| v.as_bool()),
                valid: rec.valid,
            }
        })
        .collect();
    let aborted = rows.iter().filter(|r| r.aborted).count() as f64;
    let invalid = rows.iter().filter(|r| !r.valid).count() as f64;
    let total = rows.len().max(1) as f64;
    Ok(AttackReport {
        config: *args,
        estimate: outcome.estimate,
        abort_rate: aborted / total,
        invalid_rate: invalid / total,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Advantage identity

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityArgs {
    pub p_first: f64,
    pub p_second: f64,
    pub trials: u64,
    /// Sweep the 5x5 grid over {0, 1/4, 1/2, 3/4, 1} instead of one pair.
    pub grid: bool,
    /// Largest acceptable |simulated - closed_form| per cell.
    pub tolerance: f64,
    pub seed: u64,
}

impl IdentityArgs {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            p_first: cfg.p_first.unwrap_or(0.75),
            p_second: cfg.p_second.unwrap_or(0.25),
            trials: cfg.trials.unwrap_or(1_000_000),
            grid: cfg.grid.unwrap_or(false),
            tolerance: cfg.tolerance.unwrap_or(0.005),
            seed: cfg.seed()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySweepReport {
    pub config: IdentityArgs,
    pub rows: Vec<IdentityReport>,
    pub max_abs_diff: f64,
    pub within_tolerance: bool,
}

pub fn run_advantage_identity(args: &IdentityArgs) -> Result<IdentitySweepReport> {
    let pairs: Vec<(f64, f64)> = if args.grid {
        let levels = [0.0, 0.25, 0.5, 0.75, 1.0];
        levels
            .iter()
            .flat_map(|&a| levels.iter().map(move |&b| (a, b)))
            .collect()
    } else {
        vec![(args.p_first, args.p_second)]
    };
    let rows: Vec<IdentityReport> = pairs
        .into_par_iter()
        .enumerate()
        .map(|(idx, (a, b))| {
            advantage_identity_check(a, b, args.trials, args.seed.wrapping_add(idx as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    Ok(IdentitySweepReport {
        config: *args,
        rows,
        max_abs_diff,
        within_tolerance: max_abs_diff <= args.tolerance,
    })
}

// ---------------------------------------------------------------------------
// Jump core

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpCoreArgs {
    pub cells: usize,
    pub instances: u64,
    pub seed: u64,
}

impl JumpCoreArgs {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            cells: cfg.cells.unwrap_or(64),
            instances: cfg.instances.unwrap_or(1000),
            seed: cfg.seed()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpCoreReport {
    pub config: JumpCoreArgs,
    pub holds: u64,
    pub inapplicable: u64,
    pub violated: u64,
    pub min_observed_gap: Option<f64>,
    pub bound: f64,
}

fn random_half_masses(rng: &mut ChaCha12Rng, cells: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..cells)
        .map(|_| -(rng.random::<f64>().max(1e-12)).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| 0.5 * w / total).collect()
}

/// Random accuracy profile biased toward a step at the split cell, so most
/// draws clear the 3/4 accuracy precondition.
fn random_jump_instance(rng: &mut ChaCha12Rng, cells: usize) -> JumpCoreInstance {
    loop {
        let k = rng.random_range(0..cells);
        let eta = rng.random::<f64>() * 0.15;
        let agree_probs: Vec<f64> = (0..cells)
            .map(|i| {
                let base = if i <= k { 1.0 - eta } else { eta };
                (base + (rng.random::<f64>() - 0.5) * 0.1).clamp(0.0, 1.0)
            })
            .collect();
        let below = random_half_masses(rng, k + 1);
        let above = random_half_masses(rng, cells - k);
        let len_a = below[k];
        let len_b = above[cells - k - 1];
        let mut lengths = vec![0.0f64; cells];
        lengths[..k].copy_from_slice(&below[..k]);
        lengths[k + 1..].copy_from_slice(&above[..cells - k - 1]);
        lengths[k] = len_a + len_b;
        let inst = JumpCoreInstance {
            agree_probs,
            lengths,
            len_a,
            len_b,
            k,
        };
        match jump_core_check(&inst) {
            Ok(JumpCoreOutcome::Inapplicable { .. }) => continue,
            _ => return inst,
        }
    }
}

pub fn run_jump_core(args: &JumpCoreArgs) -> Result<JumpCoreReport> {
    if args.cells < 2 {
        return Err(Error::SampleTooSmall {
            min: 2,
            got: args.cells,
        });
    }
    let outcomes: Vec<JumpCoreOutcome> = (0..args.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(args.seed, i);
            let inst = random_jump_instance(&mut rng, args.cells);
            jump_core_check(&inst)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut holds = 0;
    let mut inapplicable = 0;
    let mut violated = 0;
    let mut min_gap: Option<f64> = None;
    for out in &outcomes {
        match out {
            JumpCoreOutcome::Holds {
                max_adjacent_gap, ..
            } => {
                holds += 1;
                min_gap = Some(min_gap.map_or(*max_adjacent_gap, |g: f64| {
                    g.min(*max_adjacent_gap)
                }));
            }
            JumpCoreOutcome::Inapplicable { .. } => inapplicable += 1,
            JumpCoreOutcome::Violated { .. } => violated += 1,
        }
    }
    Ok(JumpCoreReport {
        config: *args,
        holds,
        inapplicable,
        violated,
        min_observed_gap: min_gap,
        bound: 1.0 / (2.0 * args.cells as f64),
    })
}

// ---------------------------------------------------------------------------
// Privacy calculus

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum DpCalcArgs {
    Group {
        epsilon: f64,
        delta: f64,
        k: u32,
    },
    Compose {
        epsilon: f64,
        delta: f64,
        epsilon2: f64,
        delta2: f64,
    },
    Subsample {
        epsilon: f64,
        delta: f64,
        m: u64,
        n: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpCalcReport {
    pub config: DpCalcArgs,
    pub result: PrivacyParams,
    /// Twelve-significant-digit rendering of the result.
    pub epsilon_display: String,
    pub delta_display: String,
}

/// Scientific notation with twelve significant digits.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn run_dp_calc(args: &DpCalcArgs) -> Result<DpCalcReport> {
    let result = match *args {
        DpCalcArgs::Group { epsilon, delta, k } => {
            group_privacy(PrivacyParams::new(epsilon, delta)?, k)?
        }
        DpCalcArgs::Compose {
            epsilon,
            delta,
            epsilon2,
            delta2,
        } => compose(
            PrivacyParams::new(epsilon, delta)?,
            PrivacyParams::new(epsilon2, delta2)?,
        )?,
        DpCalcArgs::Subsample {
            epsilon,
            delta,
            m,
            n,
        } => subsample_amplify(PrivacyParams::new(epsilon, delta)?, m, n)?,
    };
    Ok(DpCalcReport {
        config: *args,
        result,
        epsilon_display: format_sig12(result.epsilon),
        delta_display: format_sig12(result.delta),
    })
}

// ---------------------------------------------------------------------------
// Offline accuracy harness

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyArgs {
    pub width: u8,
    pub n: usize,
    pub learner: OfflineLearnerKind,
    /// Fixed target threshold; `None` draws one per trial.
    pub threshold: Option<u64>,
    pub trials: u64,
    pub mc_samples: u64,
    /// Error level the CDF is reported against.
    pub alpha: f64,
    pub seed: u64,
}

impl AccuracyArgs {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let learner = match cfg.learner.as_deref() {
            None => OfflineLearnerKind::ExpMechThreshold {
                epsilon: cfg.epsilon.unwrap_or(1.0),
            },
            Some(name) => {
                let kind: OfflineLearnerKind = name.parse()?;
                kind.with_epsilon(cfg.epsilon.unwrap_or(1.0))
            }
        };
        Ok(Self {
            width: cfg.d.unwrap_or(20),
            n: cfg.n.unwrap_or(500),
            learner,
            threshold: cfg.threshold,
            trials: cfg.trials.unwrap_or(50),
            mc_samples: cfg.samples.unwrap_or(20_000),
            alpha: cfg.alpha.unwrap_or(0.05),
            seed: cfg.seed()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub config: AccuracyArgs,
    /// Generalization error per trial, sorted ascending.
    pub errors: Vec<f64>,
    pub mean_error: f64,
    pub median_error: f64,
    pub fraction_within_alpha: f64,
}

pub fn run_accuracy(args: &AccuracyArgs) -> Result<AccuracyReport> {
    let max = domain_max(args.width)?;
    if args.n == 0 || args.trials == 0 {
        return Err(Error::Config("accuracy harness needs n and trials >= 1".into()));
    }
    let kind = match args.learner {
        OfflineLearnerKind::ExpMechThreshold { .. } => DistanceFunctionKind::Exact,
        _ => DistanceFunctionKind::FloorLog,
    };
    let mut errors: Vec<f64> = (0..args.trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let mut rng = trial_rng(args.seed, trial);
            let key_seed = rng.random::<u64>();
            let data_seed = rng.random::<u64>();
            let mc_seed = rng.random::<u64>();
            let t = match args.threshold {
                Some(t) => t,
                None => rng.random_range(1..=max),
            };
            let mut reg = crate::fre::KeyRegistry::new();
            let (sk, _) = reg.gen(args.width, kind, key_seed)?;
            let concept = ThresholdConcept::new(t, args.width)?;
            let data = sample_sorted_dataset(&mut reg, sk, concept, args.n, data_seed)?;
            let hyp = args.learner.fit(&data, &reg, &mut rng)?;
            generalization_error(&mut reg, sk, concept, &hyp, args.mc_samples, mc_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    errors.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
    let median_error = errors[errors.len() / 2];
    let within = errors.iter().filter(|&&e| e <= args.alpha).count() as f64;
    Ok(AccuracyReport {
        config: *args,
        errors: errors.clone(),
        mean_error,
        median_error,
        fraction_within_alpha: within / errors.len() as f64,
    })
}

// ---------------------------------------------------------------------------
// Combined battery

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportArgs {
    pub seed: u64,
}

impl ReportArgs {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self { seed: cfg.seed()? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub name: String,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub config: ReportArgs,
    pub components: Vec<ComponentSummary>,
    pub all_pass: bool,
}

/// Runs a compact pass over every checkable claim in the crate and collects
/// one pass/fail line per component. Negative controls count as passing
/// when they fail the way they are supposed to.
pub fn run_report(args: &ReportArgs) -> Result<BatteryReport> {
    let seed = args.seed;
    let mut components: Vec<ComponentSummary> = Vec::new();
    let mut push = |name: &str, pass: bool, note: String| {
        components.push(ComponentSummary {
            name: name.into(),
            pass,
            note,
        })
    };

    let b = run_bisection(&BisectionArgs {
        kind: DistanceFunctionKind::FloorLog,
        width: 8,
        triples: None,
        seed,
    })?;
    push("bisection_floorlog", b.outcome.holds(), format!("{:?}", b.outcome));

    let b = run_bisection(&BisectionArgs {
        kind: DistanceFunctionKind::OrderOnlyStub,
        width: 8,
        triples: None,
        seed,
    })?;
    push(
        "bisection_stub_negative_control",
        !b.outcome.holds(),
        format!("{:?}", b.outcome),
    );

    let r = crate::lemmas::verify_regularity(64, 30, 200, seed, None)?;
    push(
        "regularity",
        r.verdict == crate::lemmas::Verdict::Consistent,
        format!("rate {:.4} claimed {:.4}", r.rate, r.claimed),
    );
    let r = crate::lemmas::verify_bucket_sizes(64, 30, 200, seed, None)?;
    push(
        "bucket_sizes",
        r.verdict == crate::lemmas::Verdict::Consistent,
        format!("rate {:.4} claimed {:.4}", r.rate, r.claimed),
    );
    let r = crate::lemmas::verify_fld_spread(64, 30, 200, seed, None, None)?;
    push(
        "fld_spread",
        r.verdict == crate::lemmas::Verdict::Consistent,
        format!("rate {:.4} claimed {:.4}", r.rate, r.claimed),
    );
    let r = crate::lemmas::verify_fld_spread(64, 30, 100, seed, None, Some(0.0))?;
    push(
        "fld_spread_negative_control",
        r.verdict == crate::lemmas::Verdict::Violated,
        format!("rate {:.4} claimed {:.4}", r.rate, r.claimed),
    );
    let r = crate::lemmas::verify_log_invariance(48, 20, 100, 8, seed, None)?;
    push(
        "log_invariance",
        r.cond1.verdict == crate::lemmas::Verdict::Consistent,
        format!(
            "cond1 rate {:.4}, cond2 rate {:.4}",
            r.cond1.rate, r.cond2_rate
        ),
    );

    let g = run_online_game(&OnlineGameArgs {
        width: 10,
        kind: DistanceFunctionKind::FloorLog,
        flavor: GameFlavor::Plain,
        learner: "halving".into(),
        adversary: "adaptive".into(),
        threshold: None,
        horizon: 500,
        trials: 25,
        oblivious: false,
        include_transcript: false,
        seed,
    })?;
    push(
        "halving_bound",
        g.all_within_bound,
        format!("max {} of bound {}", g.max_mistakes, g.mistake_bound),
    );
    let g = run_online_game(&OnlineGameArgs {
        width: 10,
        kind: DistanceFunctionKind::FloorLog,
        flavor: GameFlavor::Encrypted,
        learner: "lencthr".into(),
        adversary: "adaptive".into(),
        threshold: None,
        horizon: 500,
        trials: 25,
        oblivious: false,
        include_transcript: false,
        seed,
    })?;
    push(
        "enc_threshold_bound",
        g.all_within_bound && g.potential_monotone != Some(false),
        format!("max {} of bound {}", g.max_mistakes, g.mistake_bound),
    );

    let o = run_ore_stress(&OreStressArgs {
        width: 16,
        horizon: 500,
        trials: 10,
        check_cap: 16,
        seed,
    })?;
    push(
        "ore_stress",
        o.all_projections_equal && o.mean_mistake_rate > 0.4 && o.mean_mistake_rate < 0.6,
        format!("mean mistake rate {:.4}", o.mean_mistake_rate),
    );

    let i = run_advantage_identity(&IdentityArgs {
        p_first: 0.75,
        p_second: 0.25,
        trials: 200_000,
        grid: false,
        tolerance: 0.01,
        seed,
    })?;
    push(
        "advantage_identity",
        i.within_tolerance,
        format!("max |diff| {:.5}", i.max_abs_diff),
    );

    let j = run_jump_core(&JumpCoreArgs {
        cells: 16,
        instances: 500,
        seed,
    })?;
    push(
        "jump_core",
        j.violated == 0,
        format!("{} holds, {} violated", j.holds, j.violated),
    );

    let dp = run_dp_calc(&DpCalcArgs::Subsample {
        epsilon: 1.0,
        delta: 1e-5,
        m: 100,
        n: 1000,
    })?;
    let expect = 1.0f64.exp_m1() / 10.0;
    push(
        "dp_subsample_example",
        (dp.result.epsilon - expect).abs() < 1e-12 && (dp.result.delta - 1e-6).abs() < 1e-18,
        format!("epsilon {}", dp.epsilon_display),
    );

    let a = run_attack(&AttackArgs {
        width: 24,
        kind: DistanceFunctionKind::FloorLog,
        n: 16,
        trials: 400,
        learner: OfflineLearnerKind::LargestPositive,
        focus: FocusMode::Boundary,
        removal: RemovalMode::Direct,
        pair_attempts: 32,
        seed,
    })?;
    push(
        "attack_submissions",
        a.invalid_rate == 0.0 && a.abort_rate < 0.2,
        format!(
            "invalid {:.4}, aborted {:.4}, advantage {:.4} (ci {:.4})",
            a.invalid_rate, a.abort_rate, a.estimate.advantage, a.estimate.ci_halfwidth
        ),
    );

    let all_pass = components.iter().all(|c| c.pass);
    Ok(BatteryReport {
        config: *args,
        components,
        all_pass,
    })
}
