//! Idealized function-revealing encryption: an in-memory key registry that
//! hands out opaque ciphertext handles and evaluates the three-point leakage
//! on them, plus the left-or-right indistinguishability game played against
//! that oracle.
//!
//! Ciphertexts carry no information outside the registry; every query that
//! involves a foreign or malformed handle evaluates to `None` rather than an
//! error, mirroring the bottom output of the ideal functionality.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leakage::{
    domain_max, leak_raw, Comparison, DistanceFunctionKind, LeakOutput, Plaintext,
};

/// Nonces with this bit set are reserved for short-lived probe entries and
/// fabricated handles; regular encryptions never use them.
const PROBE_BIT: u128 = 1 << 127;
/// Distinguishes fabricated (never-inserted) nonces from probe nonces.
const FORGED_BIT: u128 = 1 << 126;

/// Public evaluation parameters of one generated key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamsTag(u128);

impl ParamsTag {
    pub fn as_hex(self) -> String {
        format!("{:032x}", self.0)
    }
}

impl fmt::Display for ParamsTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_hex())
    }
}

/// Capability to encrypt and decrypt under one registry key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SecretKeyHandle {
    index: usize,
}

/// Opaque ciphertext: a random nonce plus the tag it claims to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CiphertextHandle {
    nonce: u128,
    params: ParamsTag,
}

impl CiphertextHandle {
    pub fn params(self) -> ParamsTag {
        self.params
    }

    pub fn nonce_hex(self) -> String {
        format!("{:032x}", self.nonce)
    }
}

struct KeyEntry {
    tag: u128,
    width: u8,
    kind: DistanceFunctionKind,
    table: HashMap<u128, u64>,
    rng: ChaCha12Rng,
    probe_counter: u64,
}

/// In-memory ideal encryption oracle holding every generated key.
#[derive(Default)]
pub struct KeyRegistry {
    entries: Vec<KeyEntry>,
    by_tag: HashMap<u128, usize>,
    forged_counter: u64,
}

impl KeyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Generates a key for the given domain width and distance kind. The
    /// params tag and all nonces are drawn from a stream seeded by `seed`,
    /// so identical call sequences reproduce identical handles.
    pub fn gen(
        &mut self,
        width: u8,
        kind: DistanceFunctionKind,
        seed: u64,
    ) -> Result<(SecretKeyHandle, ParamsTag)> {
        domain_max(width)?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut tag = rng.random::<u128>();
        while self.by_tag.contains_key(&tag) {
            tag = rng.random::<u128>();
        }
        let index = self.entries.len();
        self.entries.push(KeyEntry {
            tag,
            width,
            kind,
            table: HashMap::new(),
            rng,
            probe_counter: 0,
        });
        self.by_tag.insert(tag, index);
        Ok((SecretKeyHandle { index }, ParamsTag(tag)))
    }

    fn entry(&self, sk: SecretKeyHandle) -> Result<&KeyEntry> {
        self.entries.get(sk.index).ok_or(Error::UnknownKey)
    }

    pub fn params_of(&self, sk: SecretKeyHandle) -> Result<ParamsTag> {
        Ok(ParamsTag(self.entry(sk)?.tag))
    }

    pub fn width_of(&self, sk: SecretKeyHandle) -> Result<u8> {
        Ok(self.entry(sk)?.width)
    }

    pub fn kind_of(&self, sk: SecretKeyHandle) -> Result<DistanceFunctionKind> {
        Ok(self.entry(sk)?.kind)
    }

    /// Encrypts `m` under `sk` with a fresh random nonce.
    pub fn enc(&mut self, sk: SecretKeyHandle, m: Plaintext) -> Result<CiphertextHandle> {
        let entry = self.entries.get_mut(sk.index).ok_or(Error::UnknownKey)?;
        if m.width() != entry.width {
            return Err(Error::WidthMismatch(m.width(), entry.width));
        }
        let nonce = loop {
            let n = entry.rng.random::<u128>() & !(PROBE_BIT | FORGED_BIT);
            if !entry.table.contains_key(&n) {
                break n;
            }
        };
        entry.table.insert(nonce, m.value());
        Ok(CiphertextHandle {
            nonce,
            params: ParamsTag(entry.tag),
        })
    }

    /// Encrypts a raw domain value, validating it against the key's width.
    pub fn enc_value(&mut self, sk: SecretKeyHandle, value: u64) -> Result<CiphertextHandle> {
        let width = self.entry(sk)?.width;
        let m = Plaintext::new(value, width)?;
        self.enc(sk, m)
    }

    /// Decrypts a handle; `None` when the handle belongs to another key or
    /// was never produced by this one.
    pub fn dec(&self, sk: SecretKeyHandle, ct: CiphertextHandle) -> Option<Plaintext> {
        let entry = self.entries.get(sk.index)?;
        if ct.params.0 != entry.tag {
            return None;
        }
        let value = *entry.table.get(&ct.nonce)?;
        Some(Plaintext::new(value, entry.width).expect("registry table holds domain values"))
    }

    /// Inserts a short-lived entry for `value`, runs `f` with its handle,
    /// then removes the entry. The probe nonce comes from a dedicated
    /// counter, so the key's encryption stream is left untouched.
    pub fn with_probe<R>(
        &mut self,
        sk: SecretKeyHandle,
        value: u64,
        f: impl FnOnce(&Self, CiphertextHandle) -> R,
    ) -> Result<R> {
        let entry = self.entries.get_mut(sk.index).ok_or(Error::UnknownKey)?;
        Plaintext::new(value, entry.width)?;
        let nonce = PROBE_BIT | u128::from(entry.probe_counter);
        entry.probe_counter += 1;
        let tag = entry.tag;
        entry.table.insert(nonce, value);
        let ct = CiphertextHandle {
            nonce,
            params: ParamsTag(tag),
        };
        let out = f(self, ct);
        self.entries[sk.index].table.remove(&nonce);
        Ok(out)
    }

    /// Fabricates a handle that claims `params` but never decrypts.
    pub fn forged_handle(&mut self, params: ParamsTag) -> CiphertextHandle {
        let nonce = PROBE_BIT | FORGED_BIT | u128::from(self.forged_counter);
        self.forged_counter += 1;
        CiphertextHandle { nonce, params }
    }
}

/// Read-only query surface handed to learners and adversaries.
pub trait EvalOracle {
    /// Leakage of three handles under the key identified by `params`;
    /// `None` if any handle fails to decrypt under that key.
    fn eval(
        &self,
        params: ParamsTag,
        c0: CiphertextHandle,
        c1: CiphertextHandle,
        c2: CiphertextHandle,
    ) -> Option<LeakOutput>;

    /// Exact signed gap `m_a - m_b`; only available when the key's distance
    /// kind is [`DistanceFunctionKind::Exact`].
    fn exact_gap(
        &self,
        params: ParamsTag,
        a: CiphertextHandle,
        b: CiphertextHandle,
    ) -> Option<i64>;
}

impl EvalOracle for KeyRegistry {
    fn eval(
        &self,
        params: ParamsTag,
        c0: CiphertextHandle,
        c1: CiphertextHandle,
        c2: CiphertextHandle,
    ) -> Option<LeakOutput> {
        let idx = *self.by_tag.get(&params.0)?;
        let entry = &self.entries[idx];
        let val = |ct: CiphertextHandle| -> Option<u64> {
            if ct.params.0 != entry.tag {
                return None;
            }
            entry.table.get(&ct.nonce).copied()
        };
        let v0 = val(c0)?;
        let v1 = val(c1)?;
        let v2 = val(c2)?;
        Some(leak_raw(entry.kind, v0, v1, v2))
    }

    fn exact_gap(
        &self,
        params: ParamsTag,
        a: CiphertextHandle,
        b: CiphertextHandle,
    ) -> Option<i64> {
        let idx = *self.by_tag.get(&params.0)?;
        let entry = &self.entries[idx];
        if entry.kind != DistanceFunctionKind::Exact {
            return None;
        }
        let va = *entry.table.get(&a.nonce).filter(|_| a.params.0 == entry.tag)?;
        let vb = *entry.table.get(&b.nonce).filter(|_| b.params.0 == entry.tag)?;
        Some(va as i64 - vb as i64)
    }
}

/// Pairwise order of two handles, recovered through a degenerate eval query.
pub fn comp_via_eval(
    oracle: &dyn EvalOracle,
    params: ParamsTag,
    a: CiphertextHandle,
    b: CiphertextHandle,
) -> Option<Comparison> {
    oracle.eval(params, a, b, b).map(|out| out.c01)
}

/// Two equal-length plaintext sequences proposed by a game adversary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeSubmission {
    left: Vec<u64>,
    right: Vec<u64>,
    width: u8,
}

impl ChallengeSubmission {
    pub fn new(left: Vec<u64>, right: Vec<u64>, width: u8) -> Result<Self> {
        let max = domain_max(width)?;
        for &v in left.iter().chain(right.iter()) {
            if v == 0 || v > max {
                return Err(Error::ValueOutOfRange { value: v, width });
            }
        }
        Ok(Self { left, right, width })
    }

    pub fn left(&self) -> &[u64] {
        &self.left
    }

    pub fn right(&self) -> &[u64] {
        &self.right
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn side(&self, b: bool) -> &[u64] {
        if b {
            &self.right
        } else {
            &self.left
        }
    }
}

/// Outcome of submission validation. The violating triple, when present, is
/// the lexicographically first ordered index triple (repeats allowed,
/// zero-based) whose leakage differs between the two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum SubmissionCheck {
    Valid,
    LengthMismatch { left: usize, right: usize },
    LeakMismatch { i: usize, j: usize, k: usize },
}

impl SubmissionCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, SubmissionCheck::Valid)
    }
}

/// Checks that both sides induce identical leakage on every ordered index
/// triple, which makes the challenge information-theoretically harmless.
pub fn validate_submission(
    sub: &ChallengeSubmission,
    kind: DistanceFunctionKind,
) -> SubmissionCheck {
    if sub.left.len() != sub.right.len() {
        return SubmissionCheck::LengthMismatch {
            left: sub.left.len(),
            right: sub.right.len(),
        };
    }
    let q = sub.left.len();
    for i in 0..q {
        for j in 0..q {
            for k in 0..q {
                let l = leak_raw(kind, sub.left[i], sub.left[j], sub.left[k]);
                let r = leak_raw(kind, sub.right[i], sub.right[j], sub.right[k]);
                if l != r {
                    return SubmissionCheck::LeakMismatch { i, j, k };
                }
            }
        }
    }
    SubmissionCheck::Valid
}

/// Adversary for the left-or-right game. One instance plays one trial.
pub trait GameAdversary: Send {
    /// The two candidate plaintext sequences.
    fn submission(&mut self) -> ChallengeSubmission;

    /// Guess of the challenge bit, given handles for the chosen side.
    fn guess(
        &mut self,
        params: ParamsTag,
        cts: &[CiphertextHandle],
        oracle: &dyn EvalOracle,
    ) -> bool;

    /// Optional per-trial diagnostics, recorded after `guess`.
    fn trial_detail(&self) -> Option<serde_json::Value> {
        None
    }
}

/// Parameters of a security-game run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityGameConfig {
    pub width: u8,
    pub kind: DistanceFunctionKind,
    pub trials: u64,
    pub seed: u64,
}

/// One played trial of the game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub b: bool,
    pub output: bool,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

/// Distinguishing advantage with a two-proportion normal interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    pub advantage: f64,
    pub rate_b0: f64,
    pub rate_b1: f64,
    pub trials: u64,
    pub trials_b0: u64,
    pub trials_b1: u64,
    pub invalid_trials: u64,
    pub ci_halfwidth: f64,
}

/// Aggregate of a full game run, with per-trial records in trial order.
pub struct SecurityGameOutcome {
    pub estimate: AdvantageEstimate,
    pub records: Vec<TrialRecord>,
}

/// Plays `trials` independent games and estimates the advantage
/// `|Pr[output = 1 | b = 0] - Pr[output = 1 | b = 1]|`.
///
/// Each trial derives its own generator stream from `cfg.seed`, so results
/// are independent of thread count. Invalid submissions get a uniform
/// output bit and are flagged in the records.
pub fn run_security_game<F>(cfg: &SecurityGameConfig, factory: F) -> Result<SecurityGameOutcome>
where
    F: Fn(u64) -> Box<dyn GameAdversary> + Sync,
{
    domain_max(cfg.width)?;
    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialRecord> {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial.wrapping_add(1));
            let adv_seed = rng.random::<u64>();
            let key_seed = rng.random::<u64>();
            let b = rng.random::<bool>();
            let mut adv = factory(adv_seed);
            let sub = adv.submission();
            let valid =
                sub.width() == cfg.width && validate_submission(&sub, cfg.kind).is_valid();
            let output = if valid {
                let mut reg = KeyRegistry::new();
                let (sk, params) = reg.gen(cfg.width, cfg.kind, key_seed)?;
                let cts = sub
                    .side(b)
                    .iter()
                    .map(|&v| reg.enc_value(sk, v))
                    .collect::<Result<Vec<_>>>()?;
                adv.guess(params, &cts, &reg)
            } else {
                rng.random::<bool>()
            };
            Ok(TrialRecord {
                trial,
                b,
                output,
                valid,
                detail: adv.trial_detail(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let estimate = estimate_advantage(&records);
    Ok(SecurityGameOutcome { estimate, records })
}

fn estimate_advantage(records: &[TrialRecord]) -> AdvantageEstimate {
    let mut n = [0u64; 2];
    let mut ones = [0u64; 2];
    let mut invalid = 0u64;
    for r in records {
        let side = usize::from(r.b);
        n[side] += 1;
        ones[side] += u64::from(r.output);
        invalid += u64::from(!r.valid);
    }
    let rate = |s: usize| {
        if n[s] == 0 {
            0.0
        } else {
            ones[s] as f64 / n[s] as f64
        }
    };
    let (r0, r1) = (rate(0), rate(1));
    let ci = if n[0] == 0 || n[1] == 0 {
        f64::INFINITY
    } else {
        let pooled = (ones[0] + ones[1]) as f64 / (n[0] + n[1]) as f64;
        1.96 * (pooled * (1.0 - pooled) * (1.0 / n[0] as f64 + 1.0 / n[1] as f64)).sqrt()
    };
    AdvantageEstimate {
        advantage: (r0 - r1).abs(),
        rate_b0: r0,
        rate_b1: r1,
        trials: records.len() as u64,
        trials_b0: n[0],
        trials_b1: n[1],
        invalid_trials: invalid,
        ci_halfwidth: ci,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leakage::leak_from_dist;

    const W: u8 = 16;
    const KIND: DistanceFunctionKind = DistanceFunctionKind::FloorLog;

    fn setup() -> (KeyRegistry, SecretKeyHandle, ParamsTag) {
        let mut reg = KeyRegistry::new();
        let (sk, params) = reg.gen(W, KIND, 42).unwrap();
        (reg, sk, params)
    }

    #[test]
    fn enc_dec_round_trip() {
        let (mut reg, sk, _) = setup();
        let m = Plaintext::new(1234, W).unwrap();
        let ct = reg.enc(sk, m).unwrap();
        assert_eq!(reg.dec(sk, ct), Some(m));
    }

    #[test]
    fn dec_rejects_foreign_and_forged_handles() {
        let (mut reg, sk, params) = setup();
        let (sk2, _) = reg.gen(W, KIND, 43).unwrap();
        let ct2 = reg.enc_value(sk2, 7).unwrap();
        assert_eq!(reg.dec(sk, ct2), None);
        let forged = reg.forged_handle(params);
        assert_eq!(reg.dec(sk, forged), None);
    }

    #[test]
    fn eval_matches_plaintext_leakage() {
        let (mut reg, sk, params) = setup();
        let vals = [(3u64, 9u64, 200u64), (9, 9, 9), (200, 9, 3), (1, 2, 3)];
        for (a, b, c) in vals {
            let ca = reg.enc_value(sk, a).unwrap();
            let cb = reg.enc_value(sk, b).unwrap();
            let cc = reg.enc_value(sk, c).unwrap();
            let want = leak_from_dist(
                KIND,
                Plaintext::new(a, W).unwrap(),
                Plaintext::new(b, W).unwrap(),
                Plaintext::new(c, W).unwrap(),
            )
            .unwrap();
            assert_eq!(reg.eval(params, ca, cb, cc), Some(want));
        }
    }

    #[test]
    fn eval_bottoms_on_malformed_inputs() {
        let (mut reg, sk, params) = setup();
        let (sk2, params2) = reg.gen(W, KIND, 99).unwrap();
        let good = reg.enc_value(sk, 5).unwrap();
        let foreign = reg.enc_value(sk2, 5).unwrap();
        let forged = reg.forged_handle(params);
        assert_eq!(reg.eval(params, good, good, foreign), None);
        assert_eq!(reg.eval(params, good, forged, good), None);
        assert_eq!(reg.eval(params2, good, good, good), None);
        assert_eq!(reg.eval(params, good, good, good).is_some(), true);
    }

    #[test]
    fn exact_gap_requires_exact_kind() {
        let mut reg = KeyRegistry::new();
        let (sk, params) = reg.gen(W, DistanceFunctionKind::Exact, 5).unwrap();
        let a = reg.enc_value(sk, 100).unwrap();
        let b = reg.enc_value(sk, 37).unwrap();
        assert_eq!(reg.exact_gap(params, a, b), Some(63));
        assert_eq!(reg.exact_gap(params, b, a), Some(-63));

        let (mut reg2, sk2, params2) = setup();
        let a2 = reg2.enc_value(sk2, 100).unwrap();
        assert_eq!(reg2.exact_gap(params2, a2, a2), None);
    }

    #[test]
    fn comp_via_eval_reports_order() {
        let (mut reg, sk, params) = setup();
        let a = reg.enc_value(sk, 10).unwrap();
        let b = reg.enc_value(sk, 20).unwrap();
        assert_eq!(comp_via_eval(&reg, params, a, b), Some(Comparison::Less));
        assert_eq!(comp_via_eval(&reg, params, b, a), Some(Comparison::Greater));
        assert_eq!(comp_via_eval(&reg, params, a, a), Some(Comparison::Equal));
    }

    #[test]
    fn same_seed_reproduces_tags_and_nonces() {
        let run = || {
            let (mut reg, sk, params) = setup();
            let c1 = reg.enc_value(sk, 11).unwrap();
            let c2 = reg.enc_value(sk, 22).unwrap();
            (params, c1, c2)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn probe_leaves_encryption_stream_untouched() {
        let (mut reg_a, sk_a, params) = setup();
        let (mut reg_b, sk_b, _) = setup();
        let a1 = reg_a.enc_value(sk_a, 1).unwrap();
        let seen = reg_a
            .with_probe(sk_a, 500, |reg, ct| reg.dec(sk_a, ct).map(|m| m.value()))
            .unwrap();
        assert_eq!(seen, Some(500));
        let a2 = reg_a.enc_value(sk_a, 2).unwrap();
        assert_eq!(reg_a.eval(params, a1, a2, a2).is_some(), true);

        let b1 = reg_b.enc_value(sk_b, 1).unwrap();
        let b2 = reg_b.enc_value(sk_b, 2).unwrap();
        assert_eq!((a1, a2), (b1, b2));
    }

    #[test]
    fn validate_accepts_identical_sides() {
        let sub = ChallengeSubmission::new(vec![3, 1, 4, 1], vec![3, 1, 4, 1], W).unwrap();
        assert_eq!(validate_submission(&sub, KIND), SubmissionCheck::Valid);
    }

    #[test]
    fn validate_accepts_leak_equivalent_sides() {
        // Shifting every value by a constant preserves all gaps.
        let sub = ChallengeSubmission::new(vec![10, 20, 40], vec![110, 120, 140], W).unwrap();
        assert_eq!(validate_submission(&sub, KIND), SubmissionCheck::Valid);
    }

    #[test]
    fn validate_reports_first_violating_triple() {
        let sub = ChallengeSubmission::new(vec![1, 2, 3], vec![1, 2, 4], W).unwrap();
        assert_eq!(
            validate_submission(&sub, KIND),
            SubmissionCheck::LeakMismatch { i: 0, j: 1, k: 2 }
        );
    }

    #[test]
    fn validate_reports_length_mismatch() {
        let sub = ChallengeSubmission::new(vec![1, 2], vec![1, 2, 3], W).unwrap();
        assert_eq!(
            validate_submission(&sub, KIND),
            SubmissionCheck::LengthMismatch { left: 2, right: 3 }
        );
    }

    struct CoinAdversary {
        rng: ChaCha12Rng,
    }

    impl GameAdversary for CoinAdversary {
        fn submission(&mut self) -> ChallengeSubmission {
            ChallengeSubmission::new(vec![5, 9], vec![105, 109], W).unwrap()
        }

        fn guess(
            &mut self,
            _params: ParamsTag,
            _cts: &[CiphertextHandle],
            _oracle: &dyn EvalOracle,
        ) -> bool {
            self.rng.random::<bool>()
        }
    }

    #[test]
    fn coin_guessing_has_no_advantage() {
        let cfg = SecurityGameConfig {
            width: W,
            kind: KIND,
            trials: 4000,
            seed: 314,
        };
        let out = run_security_game(&cfg, |seed| {
            Box::new(CoinAdversary {
                rng: ChaCha12Rng::seed_from_u64(seed),
            }) as Box<dyn GameAdversary>
        })
        .unwrap();
        assert_eq!(out.estimate.invalid_trials, 0);
        assert!(
            out.estimate.advantage < 0.05,
            "advantage {} too large for a coin",
            out.estimate.advantage
        );
    }

    struct BadSubmissionAdversary;

    impl GameAdversary for BadSubmissionAdversary {
        fn submission(&mut self) -> ChallengeSubmission {
            ChallengeSubmission::new(vec![1, 2, 3], vec![1, 2, 4], W).unwrap()
        }

        fn guess(
            &mut self,
            _params: ParamsTag,
            _cts: &[CiphertextHandle],
            _oracle: &dyn EvalOracle,
        ) -> bool {
            true
        }
    }

    #[test]
    fn invalid_submissions_are_flagged_and_randomized() {
        let cfg = SecurityGameConfig {
            width: W,
            kind: KIND,
            trials: 2000,
            seed: 11,
        };
        let out =
            run_security_game(&cfg, |_| Box::new(BadSubmissionAdversary) as Box<dyn GameAdversary>)
                .unwrap();
        assert_eq!(out.estimate.invalid_trials, 2000);
        assert!(out.estimate.advantage < 0.06);
    }

    #[test]
    fn game_runs_are_reproducible() {
        let cfg = SecurityGameConfig {
            width: W,
            kind: KIND,
            trials: 500,
            seed: 2718,
        };
        let run = || {
            run_security_game(&cfg, |seed| {
                Box::new(CoinAdversary {
                    rng: ChaCha12Rng::seed_from_u64(seed),
                }) as Box<dyn GameAdversary>
            })
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.records, b.records);
    }
}
