//! Mistake-bounded online learning of thresholds, in the plain domain and
//! through the leakage oracle, plus the adversaries that stress the
//! learners.
//!
//! The engine plays rounds of: adversary picks an example (optionally after
//! probing the learner's current predictions), the learner predicts, the
//! concept labels, the learner observes. Every round is recorded together
//! with a harness-side potential: the floor-log distance between the
//! learner's two anchors, when it has them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::concepts::{EncExample, ThresholdConcept};
use crate::error::{Error, Result};
use crate::fre::{CiphertextHandle, EvalOracle, KeyRegistry, ParamsTag, SecretKeyHandle};
use crate::leakage::{domain_max, DistanceFunctionKind, Plaintext};

/// Whether a game presents raw values or encrypted handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameFlavor {
    Plain,
    Encrypted,
}

/// An example as the learner sees it.
#[derive(Debug, Clone, Copy)]
pub enum Example {
    Plain(Plaintext),
    Enc(EncExample),
}

/// An example as the adversary requests it. The engine materializes raw
/// values into fresh encryptions for encrypted games.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryMove {
    /// Raw value, plain games only.
    Plain(u64),
    /// Fresh encryption of the value under the game key.
    Enc(u64),
    /// Fabricated handle that claims the game key but never decrypts.
    Forged,
    /// Fresh encryption under a decoy key, claiming the decoy's tag.
    WrongParams(u64),
}

/// Move category recorded in transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Plain,
    Enc,
    Forged,
    WrongParams,
}

impl AdversaryMove {
    fn kind(&self) -> MoveKind {
        match self {
            AdversaryMove::Plain(_) => MoveKind::Plain,
            AdversaryMove::Enc(_) => MoveKind::Enc,
            AdversaryMove::Forged => MoveKind::Forged,
            AdversaryMove::WrongParams(_) => MoveKind::WrongParams,
        }
    }
}

/// One played round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub index: u64,
    pub move_kind: MoveKind,
    /// Harness-only view of the presented value; `None` for forged handles.
    pub plain_value: Option<u64>,
    pub prediction: bool,
    pub label: bool,
    pub mistake: bool,
    /// `|fld|` between the learner's anchors after observing, when both
    /// anchors exist and decrypt under the game key.
    pub potential_after: Option<u32>,
}

/// Full record of one game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub rounds: Vec<Round>,
    pub probes_used: u64,
}

impl GameTranscript {
    pub fn mistakes(&self) -> u64 {
        self.rounds.iter().filter(|r| r.mistake).count() as u64
    }

    /// CSV export: one row per round; the plaintext column is harness-only.
    pub fn to_csv(&self, include_plaintexts: bool) -> String {
        let mut out = String::new();
        if include_plaintexts {
            out.push_str("round,move,prediction,label,mistake,potential,plaintext\n");
        } else {
            out.push_str("round,move,prediction,label,mistake,potential\n");
        }
        for r in &self.rounds {
            let kind = match r.move_kind {
                MoveKind::Plain => "plain",
                MoveKind::Enc => "enc",
                MoveKind::Forged => "forged",
                MoveKind::WrongParams => "wrong_params",
            };
            let pot = r
                .potential_after
                .map(|p| p.to_string())
                .unwrap_or_default();
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                r.index,
                kind,
                u8::from(r.prediction),
                u8::from(r.label),
                u8::from(r.mistake),
                pot
            );
            if include_plaintexts {
                let v = r.plain_value.map(|v| v.to_string()).unwrap_or_default();
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Online learner interface. `predict` is deterministic and must not mutate,
/// which lets the engine expose cheap prediction probes to adversaries.
pub trait OnlineLearner {
    fn predict(&self, example: &Example, oracle: &dyn EvalOracle) -> bool;

    fn observe(&mut self, example: &Example, label: bool, oracle: &dyn EvalOracle);

    /// Positive and negative anchor handles, once the learner holds both.
    fn anchors(&self) -> Option<(CiphertextHandle, CiphertextHandle)> {
        None
    }
}

/// Adversary interface. `history` carries full per-round feedback; in
/// oblivious mode the prober is disabled and implementations must base
/// their choice on labels only.
pub trait OnlineAdversary {
    fn next_move(&mut self, history: &[Round], prober: &mut Prober<'_>) -> Option<AdversaryMove>;
}

/// Query surface that lets an adaptive adversary ask for the learner's
/// current prediction on a hypothetical move without affecting the game.
pub struct Prober<'a> {
    reg: &'a mut KeyRegistry,
    sk: SecretKeyHandle,
    params: ParamsTag,
    decoy_sk: SecretKeyHandle,
    decoy_params: ParamsTag,
    learner: &'a dyn OnlineLearner,
    flavor: GameFlavor,
    width: u8,
    enabled: bool,
    probes_used: u64,
}

impl Prober<'_> {
    /// The learner's prediction on `mv`, or `None` when probing is disabled
    /// or the move does not fit the game flavor.
    pub fn predict_on(&mut self, mv: &AdversaryMove) -> Option<bool> {
        if !self.enabled {
            return None;
        }
        self.probes_used += 1;
        match (self.flavor, mv) {
            (GameFlavor::Plain, AdversaryMove::Plain(x)) => {
                let pt = Plaintext::new(*x, self.width).ok()?;
                Some(self.learner.predict(&Example::Plain(pt), self.reg))
            }
            (GameFlavor::Encrypted, AdversaryMove::Enc(x)) => {
                let (params, learner) = (self.params, self.learner);
                self.reg
                    .with_probe(self.sk, *x, |reg, ct| {
                        learner.predict(&Example::Enc(EncExample { ct, params }), reg)
                    })
                    .ok()
            }
            (GameFlavor::Encrypted, AdversaryMove::Forged) => {
                let ct = self.reg.forged_handle(self.params);
                Some(self.learner.predict(
                    &Example::Enc(EncExample {
                        ct,
                        params: self.params,
                    }),
                    self.reg,
                ))
            }
            (GameFlavor::Encrypted, AdversaryMove::WrongParams(x)) => {
                let (params, learner) = (self.decoy_params, self.learner);
                self.reg
                    .with_probe(self.decoy_sk, *x, |reg, ct| {
                        learner.predict(&Example::Enc(EncExample { ct, params }), reg)
                    })
                    .ok()
            }
            _ => None,
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }
}

/// Engine for one online game: holds the key material, the concept, and the
/// round loop.
pub struct OnlineGame {
    reg: KeyRegistry,
    sk: SecretKeyHandle,
    params: ParamsTag,
    decoy_sk: SecretKeyHandle,
    decoy_params: ParamsTag,
    concept: ThresholdConcept,
    flavor: GameFlavor,
    width: u8,
}

impl OnlineGame {
    pub fn new(
        width: u8,
        kind: DistanceFunctionKind,
        t: u64,
        flavor: GameFlavor,
        seed: u64,
    ) -> Result<Self> {
        let concept = ThresholdConcept::new(t, width)?;
        let mut seeder = ChaCha12Rng::seed_from_u64(seed);
        let mut reg = KeyRegistry::new();
        let (sk, params) = reg.gen(width, kind, seeder.random())?;
        let (decoy_sk, decoy_params) = reg.gen(width, kind, seeder.random())?;
        Ok(Self {
            reg,
            sk,
            params,
            decoy_sk,
            decoy_params,
            concept,
            flavor,
            width,
        })
    }

    pub fn params(&self) -> ParamsTag {
        self.params
    }

    pub fn concept(&self) -> ThresholdConcept {
        self.concept
    }

    fn materialize(&mut self, mv: &AdversaryMove) -> Result<(Example, Option<u64>)> {
        match (self.flavor, mv) {
            (GameFlavor::Plain, AdversaryMove::Plain(x)) => {
                let pt = Plaintext::new(*x, self.width)?;
                Ok((Example::Plain(pt), Some(*x)))
            }
            (GameFlavor::Encrypted, AdversaryMove::Enc(x)) => {
                let ct = self.reg.enc_value(self.sk, *x)?;
                Ok((
                    Example::Enc(EncExample {
                        ct,
                        params: self.params,
                    }),
                    Some(*x),
                ))
            }
            (GameFlavor::Encrypted, AdversaryMove::Forged) => {
                let ct = self.reg.forged_handle(self.params);
                Ok((
                    Example::Enc(EncExample {
                        ct,
                        params: self.params,
                    }),
                    None,
                ))
            }
            (GameFlavor::Encrypted, AdversaryMove::WrongParams(x)) => {
                let ct = self.reg.enc_value(self.decoy_sk, *x)?;
                Ok((
                    Example::Enc(EncExample {
                        ct,
                        params: self.decoy_params,
                    }),
                    Some(*x),
                ))
            }
            _ => Err(Error::ExampleKindMismatch),
        }
    }

    fn label_of(&self, example: &Example) -> Result<bool> {
        match example {
            Example::Plain(pt) => self.concept.label(*pt),
            Example::Enc(e) => {
                if e.params != self.params {
                    return Ok(false);
                }
                Ok(match self.reg.dec(self.sk, e.ct) {
                    Some(m) => self.concept.label_value(m.value()),
                    None => false,
                })
            }
        }
    }

    fn potential(&self, learner: &dyn OnlineLearner) -> Option<u32> {
        let (below, above) = learner.anchors()?;
        let lo = self.reg.dec(self.sk, below)?;
        let hi = self.reg.dec(self.sk, above)?;
        Some(crate::leakage::fld(lo, hi).ok()?.magnitude() as u32)
    }

    /// Plays up to `horizon` rounds, stopping early if the adversary halts.
    pub fn run(
        &mut self,
        learner: &mut dyn OnlineLearner,
        adversary: &mut dyn OnlineAdversary,
        horizon: u64,
        oblivious: bool,
    ) -> Result<GameTranscript> {
        let mut rounds: Vec<Round> = Vec::new();
        let mut probes_used = 0u64;
        for index in 0..horizon {
            let mv = {
                let mut prober = Prober {
                    reg: &mut self.reg,
                    sk: self.sk,
                    params: self.params,
                    decoy_sk: self.decoy_sk,
                    decoy_params: self.decoy_params,
                    learner,
                    flavor: self.flavor,
                    width: self.width,
                    enabled: !oblivious,
                    probes_used: 0,
                };
                let mv = adversary.next_move(&rounds, &mut prober);
                probes_used += prober.probes_used;
                mv
            };
            let Some(mv) = mv else { break };
            let (example, plain_value) = self.materialize(&mv)?;
            let prediction = learner.predict(&example, &self.reg);
            let label = self.label_of(&example)?;
            learner.observe(&example, label, &self.reg);
            rounds.push(Round {
                index,
                move_kind: mv.kind(),
                plain_value,
                prediction,
                label,
                mistake: prediction != label,
                potential_after: self.potential(learner),
            });
        }
        Ok(GameTranscript {
            rounds,
            probes_used,
        })
    }
}

/// Plain-domain halving learner. Keeps the open bracket
/// `(low, high]` known to contain the threshold (`low` starts at the
/// sentinel 0, `high` at `2^width`), predicts positively below the bracket
/// midpoint, and shrinks the bracket on every mistake, so it makes at most
/// `width` mistakes against any adversary.
#[derive(Debug, Clone)]
pub struct HalvingLearner {
    low: u64,
    high: u64,
}

impl HalvingLearner {
    pub fn new(width: u8) -> Result<Self> {
        Ok(Self {
            low: 0,
            high: domain_max(width)?,
        })
    }

    fn midpoint(&self) -> u64 {
        (self.low + self.high) / 2
    }

    pub fn bracket(&self) -> (u64, u64) {
        (self.low, self.high)
    }
}

impl OnlineLearner for HalvingLearner {
    fn predict(&self, example: &Example, _oracle: &dyn EvalOracle) -> bool {
        match example {
            Example::Plain(pt) => pt.value() <= self.midpoint(),
            Example::Enc(_) => false,
        }
    }

    fn observe(&mut self, example: &Example, label: bool, oracle: &dyn EvalOracle) {
        let Example::Plain(pt) = example else { return };
        let prediction = self.predict(example, oracle);
        if prediction == label {
            return;
        }
        // Bracket invariant low < t <= high survives both updates, and the
        // bracket length at least halves per mistake.
        if label {
            self.low = pt.value();
        } else {
            self.high = pt.value();
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum LearnerPhase {
    Scanning,
    Anchored {
        params: ParamsTag,
        below: CiphertextHandle,
    },
    Bracketed {
        params: ParamsTag,
        below: CiphertextHandle,
        above: CiphertextHandle,
    },
}

/// Oracle-only threshold learner for encrypted examples.
///
/// It predicts 0 until the first positive example hands it a positive
/// anchor, then predicts 1 on every well-formed example until a negative
/// anchor arrives, and from then on classifies by which anchor the example
/// is closer to under the leaked distance. Every anchored mistake moves an
/// anchor strictly closer to the other in floor-log distance, so against a
/// bisecting distance the total mistake count stays within `width + 1`.
#[derive(Debug, Clone)]
pub struct EncThresholdLearner {
    state: LearnerPhase,
}

impl EncThresholdLearner {
    pub fn new() -> Self {
        Self {
            state: LearnerPhase::Scanning,
        }
    }
}

impl Default for EncThresholdLearner {
    fn default() -> Self {
        Self::new()
    }
}

impl OnlineLearner for EncThresholdLearner {
    fn predict(&self, example: &Example, oracle: &dyn EvalOracle) -> bool {
        let Example::Enc(e) = example else {
            return false;
        };
        match self.state {
            LearnerPhase::Scanning => false,
            LearnerPhase::Anchored { params, below } => {
                e.params == params && oracle.eval(params, e.ct, below, below).is_some()
            }
            LearnerPhase::Bracketed {
                params,
                below,
                above,
            } => {
                if e.params != params {
                    return false;
                }
                let Some(out) = oracle.eval(params, below, e.ct, above) else {
                    return false;
                };
                if out.c01.is_ge() {
                    // x at or below the positive anchor.
                    return true;
                }
                if out.c12.is_ge() {
                    // x at or above the negative anchor.
                    return false;
                }
                // Strictly between the anchors: side with the closer anchor.
                out.closeness_bit
            }
        }
    }

    fn observe(&mut self, example: &Example, label: bool, oracle: &dyn EvalOracle) {
        let prediction = self.predict(example, oracle);
        if prediction == label {
            return;
        }
        let Example::Enc(e) = example else { return };
        match self.state {
            // A false negative here proves the example is well-formed and
            // below the threshold.
            LearnerPhase::Scanning => {
                self.state = LearnerPhase::Anchored {
                    params: e.params,
                    below: e.ct,
                };
            }
            // A false positive proves the example is at or above the
            // threshold.
            LearnerPhase::Anchored { params, below } => {
                self.state = LearnerPhase::Bracketed {
                    params,
                    below,
                    above: e.ct,
                };
            }
            LearnerPhase::Bracketed {
                params,
                ref mut below,
                ref mut above,
            } => {
                debug_assert_eq!(e.params, params);
                if prediction {
                    *above = e.ct;
                } else {
                    *below = e.ct;
                }
            }
        }
    }

    fn anchors(&self) -> Option<(CiphertextHandle, CiphertextHandle)> {
        match self.state {
            LearnerPhase::Bracketed { below, above, .. } => Some((below, above)),
            _ => None,
        }
    }
}

/// Presents independent uniform examples every round.
pub struct RandomAdversary {
    max: u64,
    flavor: GameFlavor,
    rng: ChaCha12Rng,
}

impl RandomAdversary {
    pub fn new(width: u8, flavor: GameFlavor, seed: u64) -> Result<Self> {
        Ok(Self {
            max: domain_max(width)?,
            flavor,
            rng: ChaCha12Rng::seed_from_u64(seed),
        })
    }
}

impl OnlineAdversary for RandomAdversary {
    fn next_move(&mut self, _history: &[Round], _prober: &mut Prober<'_>) -> Option<AdversaryMove> {
        let x = self.rng.random_range(1..=self.max);
        Some(match self.flavor {
            GameFlavor::Plain => AdversaryMove::Plain(x),
            GameFlavor::Encrypted => AdversaryMove::Enc(x),
        })
    }
}

/// Oblivious adversary that walks two fronts toward the threshold
/// `t = 2^(width-1)`: a fair coin picks either the next unused value below
/// `t` (counting up from 1) or the next unused value at or above `t`
/// (counting down from `2^width`). Both candidates always induce the same
/// leakage projection onto the history under an order-only distance, which
/// is what makes the coin unpredictable for oracle-only learners.
pub struct TwoFrontAdversary {
    t: u64,
    low: u64,
    high: u64,
    rng: ChaCha12Rng,
}

impl TwoFrontAdversary {
    pub fn new(width: u8, seed: u64) -> Result<Self> {
        let max = domain_max(width)?;
        Ok(Self {
            t: max / 2,
            low: 0,
            high: max + 1,
            rng: ChaCha12Rng::seed_from_u64(seed),
        })
    }

    pub fn threshold(&self) -> u64 {
        self.t
    }

    /// Next candidate on each front, while that front has unused values.
    pub fn candidates(&self) -> (Option<u64>, Option<u64>) {
        let lo = (self.low + 1 < self.t).then_some(self.low + 1);
        let hi = (self.high - 1 >= self.t).then_some(self.high - 1);
        (lo, hi)
    }
}

impl OnlineAdversary for TwoFrontAdversary {
    fn next_move(&mut self, _history: &[Round], _prober: &mut Prober<'_>) -> Option<AdversaryMove> {
        let (lo, hi) = self.candidates();
        let pick_low = match (lo, hi) {
            (None, None) => return None,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(_), Some(_)) => self.rng.random::<bool>(),
        };
        let x = if pick_low {
            self.low += 1;
            self.low
        } else {
            self.high -= 1;
            self.high
        };
        Some(AdversaryMove::Enc(x))
    }
}

/// Adaptive adversary that binary-searches the learner's implicit decision
/// boundary through prediction probes and presents a disagreement point
/// right next to it; malformed probes are tried first in encrypted games.
/// With probing disabled it falls back to uniform examples.
pub struct WorstCaseAdversary {
    t: u64,
    max: u64,
    flavor: GameFlavor,
    rng: ChaCha12Rng,
}

impl WorstCaseAdversary {
    pub fn new(width: u8, t: u64, flavor: GameFlavor, seed: u64) -> Result<Self> {
        let max = domain_max(width)?;
        if t == 0 || t > max {
            return Err(Error::ValueOutOfRange { value: t, width });
        }
        Ok(Self {
            t,
            max,
            flavor,
            rng: ChaCha12Rng::seed_from_u64(seed),
        })
    }

    fn value_move(&self, x: u64) -> AdversaryMove {
        match self.flavor {
            GameFlavor::Plain => AdversaryMove::Plain(x),
            GameFlavor::Encrypted => AdversaryMove::Enc(x),
        }
    }

    fn filler(&mut self) -> AdversaryMove {
        let x = self.rng.random_range(1..=self.max);
        self.value_move(x)
    }
}

impl OnlineAdversary for WorstCaseAdversary {
    fn next_move(&mut self, _history: &[Round], prober: &mut Prober<'_>) -> Option<AdversaryMove> {
        if !prober.is_enabled() {
            return Some(self.filler());
        }
        if self.flavor == GameFlavor::Encrypted {
            // Malformed examples always carry label 0, so a positive
            // prediction on one is a free mistake.
            if prober.predict_on(&AdversaryMove::Forged) == Some(true) {
                return Some(AdversaryMove::Forged);
            }
            let wrong = AdversaryMove::WrongParams(self.max / 2);
            if prober.predict_on(&wrong) == Some(true) {
                return Some(wrong);
            }
        }
        let predicts = |p: &mut Prober<'_>, x: u64, me: &Self| {
            p.predict_on(&me.value_move(x)).unwrap_or(false)
        };
        // Largest x predicted positive, assuming predictions are
        // nonincreasing in x; 0 when the positive region is empty.
        let boundary = if predicts(prober, self.max, self) {
            self.max
        } else if !predicts(prober, 1, self) {
            0
        } else {
            let (mut lo, mut hi) = (1u64, self.max);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if predicts(prober, mid, self) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let x = if self.t <= boundary {
            // Predicted 1 but labeled 0 at the boundary itself.
            boundary
        } else if self.t > boundary + 1 {
            // Predicted 0 but labeled 1 just above the boundary.
            boundary + 1
        } else {
            return Some(self.filler());
        };
        let expected = self.t <= boundary;
        if predicts(prober, x, self) != expected {
            // Non-monotone prediction region; no reliable forcing point.
            return Some(self.filler());
        }
        Some(self.value_move(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    const KIND: DistanceFunctionKind = DistanceFunctionKind::FloorLog;

    fn play_plain(
        width: u8,
        t: u64,
        adversary: &mut dyn OnlineAdversary,
        horizon: u64,
        oblivious: bool,
    ) -> GameTranscript {
        let mut game = OnlineGame::new(width, KIND, t, GameFlavor::Plain, 1000 + t).unwrap();
        let mut learner = HalvingLearner::new(width).unwrap();
        game.run(&mut learner, adversary, horizon, oblivious).unwrap()
    }

    #[test]
    fn halving_handles_a_known_stream_without_mistakes() {
        let mut game = OnlineGame::new(3, KIND, 5, GameFlavor::Plain, 9).unwrap();
        let mut learner = HalvingLearner::new(3).unwrap();
        struct Fixed(Vec<u64>, usize);
        impl OnlineAdversary for Fixed {
            fn next_move(&mut self, _h: &[Round], _p: &mut Prober<'_>) -> Option<AdversaryMove> {
                let x = *self.0.get(self.1)?;
                self.1 += 1;
                Some(AdversaryMove::Plain(x))
            }
        }
        let mut adv = Fixed(vec![4, 6, 5], 0);
        let transcript = game.run(&mut learner, &mut adv, 10, false).unwrap();
        assert_eq!(transcript.mistakes(), 0);
        assert_eq!(
            transcript.rounds.iter().map(|r| r.prediction).collect::<Vec<_>>(),
            vec![true, false, false]
        );
    }

    #[test]
    fn halving_stays_within_width_mistakes_for_every_threshold() {
        let width = 6u8;
        for t in 1..=64u64 {
            let mut adv =
                WorstCaseAdversary::new(width, t, GameFlavor::Plain, 77 + t).unwrap();
            let transcript = play_plain(width, t, &mut adv, 200, false);
            assert!(
                transcript.mistakes() <= u64::from(width),
                "t = {t}: {} mistakes",
                transcript.mistakes()
            );
        }
    }

    #[test]
    fn adaptive_adversary_forces_nearly_width_mistakes() {
        let width = 10u8;
        let t = 1u64 << width;
        let mut adv = WorstCaseAdversary::new(width, t, GameFlavor::Plain, 5).unwrap();
        let transcript = play_plain(width, t, &mut adv, 400, false);
        assert!(
            transcript.mistakes() >= 8,
            "only {} mistakes forced",
            transcript.mistakes()
        );
    }

    /// Exhaustive search over adversary strategies at width 3: from each
    /// reachable learner bracket, try every mistake-forcing example.
    #[test]
    fn exhaustive_adversary_search_matches_width_bound() {
        fn worst(memo: &mut HashMap<(u64, u64, u64), u64>, low: u64, high: u64, t: u64) -> u64 {
            if let Some(&v) = memo.get(&(low, high, t)) {
                return v;
            }
            let mid = (low + high) / 2;
            let mut best = 0;
            for x in 1..=8u64 {
                let prediction = x <= mid;
                let label = x < t;
                if prediction == label {
                    continue;
                }
                let (nl, nh) = if label { (x, high) } else { (low, x) };
                best = best.max(1 + worst(memo, nl, nh, t));
            }
            memo.insert((low, high, t), best);
            best
        }
        let mut memo = HashMap::new();
        let overall = (1..=8u64).map(|t| worst(&mut memo, 0, 8, t)).max().unwrap();
        assert_eq!(overall, 3);
    }

    #[test]
    fn enc_learner_acquires_anchors_and_stays_bounded() {
        let width = 8u8;
        for (t, seed) in [(7u64, 1u64), (128, 2), (200, 3), (256, 4), (1, 5)] {
            let mut game =
                OnlineGame::new(width, KIND, t, GameFlavor::Encrypted, seed).unwrap();
            let mut learner = EncThresholdLearner::new();
            let mut adv =
                RandomAdversary::new(width, GameFlavor::Encrypted, seed * 11).unwrap();
            let transcript = game.run(&mut learner, &mut adv, 3000, false).unwrap();
            assert!(
                transcript.mistakes() <= u64::from(width) + 1,
                "t = {t}: {} mistakes",
                transcript.mistakes()
            );
        }
    }

    #[test]
    fn enc_learner_survives_adaptive_and_malformed_pressure() {
        let width = 8u8;
        for t in [1u64, 2, 100, 129, 255, 256] {
            let mut game =
                OnlineGame::new(width, KIND, t, GameFlavor::Encrypted, 900 + t).unwrap();
            let mut learner = EncThresholdLearner::new();
            let mut adv =
                WorstCaseAdversary::new(width, t, GameFlavor::Encrypted, 33 + t).unwrap();
            let transcript = game.run(&mut learner, &mut adv, 500, false).unwrap();
            assert!(
                transcript.mistakes() <= u64::from(width) + 1,
                "t = {t}: {} mistakes",
                transcript.mistakes()
            );
        }
    }

    #[test]
    fn enc_learner_ignores_malformed_examples() {
        let width = 8u8;
        let mut game = OnlineGame::new(width, KIND, 100, GameFlavor::Encrypted, 4).unwrap();
        let mut learner = EncThresholdLearner::new();
        struct Script(Vec<AdversaryMove>, usize);
        impl OnlineAdversary for Script {
            fn next_move(&mut self, _h: &[Round], _p: &mut Prober<'_>) -> Option<AdversaryMove> {
                let mv = *self.0.get(self.1)?;
                self.1 += 1;
                Some(mv)
            }
        }
        let mut adv = Script(
            vec![
                AdversaryMove::Forged,
                AdversaryMove::WrongParams(10),
                AdversaryMove::Enc(10),
                AdversaryMove::Forged,
                AdversaryMove::WrongParams(10),
                AdversaryMove::Enc(200),
                AdversaryMove::Forged,
                AdversaryMove::WrongParams(10),
            ],
            0,
        );
        let transcript = game.run(&mut learner, &mut adv, 20, false).unwrap();
        // Malformed rounds all predict 0 and label 0.
        for r in &transcript.rounds {
            if matches!(r.move_kind, MoveKind::Forged | MoveKind::WrongParams) {
                assert!(!r.prediction);
                assert!(!r.label);
                assert!(!r.mistake);
            }
        }
        // The two genuine examples are the only possible mistakes.
        assert!(transcript.mistakes() <= 2);
    }

    #[test]
    fn potential_strictly_decreases_on_bracketed_mistakes() {
        let width = 10u8;
        for seed in 0..5u64 {
            let t = 37 + seed * 101;
            let mut game =
                OnlineGame::new(width, KIND, t, GameFlavor::Encrypted, seed).unwrap();
            let mut learner = EncThresholdLearner::new();
            let mut adv =
                WorstCaseAdversary::new(width, t, GameFlavor::Encrypted, seed + 50).unwrap();
            let transcript = game.run(&mut learner, &mut adv, 400, false).unwrap();
            let mut seen_potential = false;
            for pair in transcript.rounds.windows(2) {
                let (prev, cur) = (&pair[0], &pair[1]);
                if let (Some(before), true) = (prev.potential_after, cur.mistake) {
                    seen_potential = true;
                    let after = cur.potential_after.expect("anchors persist");
                    assert!(
                        after < before,
                        "potential {before} -> {after} on a mistake"
                    );
                    assert!(after >= 1);
                }
            }
            assert!(seen_potential, "seed {seed} never reached the bracket");
        }
    }

    #[test]
    fn two_front_adversary_exhausts_both_fronts() {
        let width = 4u8;
        let mut game = OnlineGame::new(width, KIND, 8, GameFlavor::Encrypted, 3).unwrap();
        let mut learner = EncThresholdLearner::new();
        let mut adv = TwoFrontAdversary::new(width, 12).unwrap();
        let transcript = game.run(&mut learner, &mut adv, 100, true).unwrap();
        // Fronts cover 1..=7 and 8..=16, then the adversary halts.
        assert_eq!(transcript.rounds.len(), 16);
        let mut values: Vec<u64> = transcript.rounds.iter().filter_map(|r| r.plain_value).collect();
        values.sort_unstable();
        assert_eq!(values, (1..=16).collect::<Vec<_>>());
    }

    #[test]
    fn oblivious_mode_disables_probing() {
        let width = 6u8;
        let mut game = OnlineGame::new(width, KIND, 30, GameFlavor::Encrypted, 8).unwrap();
        let mut learner = EncThresholdLearner::new();
        let mut adv = WorstCaseAdversary::new(width, 30, GameFlavor::Encrypted, 9).unwrap();
        let transcript = game.run(&mut learner, &mut adv, 50, true).unwrap();
        assert_eq!(transcript.probes_used, 0);
        let mut adaptive = WorstCaseAdversary::new(width, 30, GameFlavor::Encrypted, 9).unwrap();
        let mut learner2 = EncThresholdLearner::new();
        let mut game2 = OnlineGame::new(width, KIND, 30, GameFlavor::Encrypted, 8).unwrap();
        let transcript2 = game2.run(&mut learner2, &mut adaptive, 50, false).unwrap();
        assert!(transcript2.probes_used > 0);
    }

    #[test]
    fn transcript_csv_has_harness_only_plaintext_column() {
        let width = 4u8;
        let mut game = OnlineGame::new(width, KIND, 8, GameFlavor::Encrypted, 3).unwrap();
        let mut learner = EncThresholdLearner::new();
        let mut adv = RandomAdversary::new(width, GameFlavor::Encrypted, 5).unwrap();
        let transcript = game.run(&mut learner, &mut adv, 4, false).unwrap();
        let blind = transcript.to_csv(false);
        let full = transcript.to_csv(true);
        assert!(blind.starts_with("round,move,prediction,label,mistake,potential\n"));
        assert!(full.starts_with("round,move,prediction,label,mistake,potential,plaintext\n"));
        assert_eq!(full.lines().count(), 5);
    }

    #[test]
    fn plain_game_rejects_encrypted_moves() {
        let mut game = OnlineGame::new(4, KIND, 8, GameFlavor::Plain, 3).unwrap();
        let mut learner = HalvingLearner::new(4).unwrap();
        struct EncOnly;
        impl OnlineAdversary for EncOnly {
            fn next_move(&mut self, _h: &[Round], _p: &mut Prober<'_>) -> Option<AdversaryMove> {
                Some(AdversaryMove::Enc(3))
            }
        }
        let err = game.run(&mut learner, &mut EncOnly, 5, false).unwrap_err();
        assert_eq!(err, Error::ExampleKindMismatch);
    }
}
