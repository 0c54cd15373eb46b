//! Differential-privacy parameter calculus and offline learners over
//! encrypted training sets.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::concepts::{Dataset, EncExample, Hypothesis};
use crate::error::{Error, Result};
use crate::fre::{comp_via_eval, CiphertextHandle, EvalOracle, ParamsTag};
use crate::leakage::Comparison;

/// An `(epsilon, delta)` privacy budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 || !delta.is_finite() || !(0.0..=1.0).contains(&delta)
        {
            return Err(Error::BadPrivacyParams { epsilon, delta });
        }
        Ok(Self { epsilon, delta })
    }
}

/// Group privacy for groups of size `k`:
/// `(eps, delta) -> (k eps, delta (e^{k eps} - 1) / (e^eps - 1))`.
///
/// The delta factor is the geometric series `sum_{i<k} e^{i eps}`, evaluated
/// through `exp_m1` for stability; at `eps = 0` it degenerates to `k`.
pub fn group_privacy(p: PrivacyParams, k: u32) -> Result<PrivacyParams> {
    PrivacyParams::new(p.epsilon, p.delta)?;
    let kf = f64::from(k);
    let factor = if p.epsilon == 0.0 {
        kf
    } else {
        (kf * p.epsilon).exp_m1() / p.epsilon.exp_m1()
    };
    Ok(PrivacyParams {
        epsilon: kf * p.epsilon,
        delta: p.delta * factor,
    })
}

/// Basic composition: budgets add in both coordinates.
pub fn compose(a: PrivacyParams, b: PrivacyParams) -> Result<PrivacyParams> {
    PrivacyParams::new(a.epsilon, a.delta)?;
    PrivacyParams::new(b.epsilon, b.delta)?;
    Ok(PrivacyParams {
        epsilon: a.epsilon + b.epsilon,
        delta: a.delta + b.delta,
    })
}

/// Amplification by subsampling `m` of `n` records without replacement:
/// `(eps, delta) -> ((e^eps - 1) m / n, delta m / n)`, requiring
/// `eps <= 1` and `n >= 2m`.
pub fn subsample_amplify(p: PrivacyParams, m: u64, n: u64) -> Result<PrivacyParams> {
    PrivacyParams::new(p.epsilon, p.delta)?;
    if p.epsilon > 1.0 {
        return Err(Error::EpsilonTooLarge(p.epsilon));
    }
    if m == 0 || n < 2 * m {
        return Err(Error::SubsampleRatio { m, n });
    }
    let ratio = m as f64 / n as f64;
    Ok(PrivacyParams {
        epsilon: p.epsilon.exp_m1() * ratio,
        delta: p.delta * ratio,
    })
}

/// Decision rule of a one-sided threshold hypothesis, anchored at a handle.
#[derive(Debug, Clone, Copy)]
pub enum CutRule {
    /// Classify everything 0.
    Never,
    /// Positive strictly below the anchor.
    Below(CiphertextHandle),
    /// Positive at or below the anchor.
    AtOrBelow(CiphertextHandle),
}

/// Threshold hypothesis queried through the leakage oracle. Examples with a
/// foreign tag or handles that fail to evaluate classify as 0.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdHyp {
    params: ParamsTag,
    rule: CutRule,
}

impl ThresholdHyp {
    pub fn new(params: ParamsTag, rule: CutRule) -> Self {
        Self { params, rule }
    }

    pub fn rule(&self) -> CutRule {
        self.rule
    }
}

impl Hypothesis for ThresholdHyp {
    fn classify(&self, example: &EncExample, oracle: &dyn EvalOracle) -> bool {
        if example.params != self.params {
            return false;
        }
        match self.rule {
            CutRule::Never => false,
            CutRule::Below(anchor) => {
                comp_via_eval(oracle, self.params, example.ct, anchor) == Some(Comparison::Less)
            }
            CutRule::AtOrBelow(anchor) => matches!(
                comp_via_eval(oracle, self.params, example.ct, anchor),
                Some(Comparison::Less) | Some(Comparison::Equal)
            ),
        }
    }
}

/// Offline learners that train through the oracle only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "learner")]
pub enum OfflineLearnerKind {
    /// Ignores the data; a null baseline.
    ConstantZero,
    /// Anchors at the largest positively labeled example.
    LargestPositive,
    /// Exponential mechanism over threshold intervals; needs exact gaps.
    ExpMechThreshold { epsilon: f64 },
}

impl FromStr for OfflineLearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant_zero" => Ok(OfflineLearnerKind::ConstantZero),
            "largest_positive" | "largest_positive_learner" => {
                Ok(OfflineLearnerKind::LargestPositive)
            }
            "exp_mech" => Ok(OfflineLearnerKind::ExpMechThreshold { epsilon: 1.0 }),
            other => Err(Error::Config(format!(
                "unknown learner {other:?}; expected constant_zero, largest_positive, or exp_mech"
            ))),
        }
    }
}

impl OfflineLearnerKind {
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        match self {
            OfflineLearnerKind::ExpMechThreshold { .. } => {
                OfflineLearnerKind::ExpMechThreshold { epsilon }
            }
            other => other,
        }
    }

    /// Trains on the dataset through the oracle. `rng` drives randomized
    /// learners; deterministic ones ignore it.
    pub fn fit(
        &self,
        data: &Dataset,
        oracle: &dyn EvalOracle,
        rng: &mut dyn RngCore,
    ) -> Result<ThresholdHyp> {
        match self {
            OfflineLearnerKind::ConstantZero => {
                Ok(ThresholdHyp::new(data.params(), CutRule::Never))
            }
            OfflineLearnerKind::LargestPositive => fit_largest_positive(data, oracle),
            OfflineLearnerKind::ExpMechThreshold { epsilon } => {
                fit_exp_mech(data, oracle, *epsilon, rng)
            }
        }
    }
}

fn fit_largest_positive(data: &Dataset, oracle: &dyn EvalOracle) -> Result<ThresholdHyp> {
    let params = data.params();
    let mut anchor: Option<CiphertextHandle> = None;
    for ex in data.examples().iter().filter(|ex| ex.label) {
        anchor = Some(match anchor {
            None => ex.ct,
            Some(a) => {
                if comp_via_eval(oracle, params, ex.ct, a) == Some(Comparison::Greater) {
                    ex.ct
                } else {
                    a
                }
            }
        });
    }
    Ok(match anchor {
        Some(a) => ThresholdHyp::new(params, CutRule::AtOrBelow(a)),
        None => ThresholdHyp::new(params, CutRule::Never),
    })
}

/// Exponential mechanism over the `n + 1` threshold intervals cut by the
/// training points, with utility equal to minus the training error.
///
/// This is the exponential mechanism over all `2^width` thresholds with the
/// per-threshold error utility: utility is constant on each interval, so
/// intervals are weighted by `length * exp(eps * utility / 2)`. Interior
/// interval lengths are the exact gaps; the two boundary intervals split the
/// leftover mass evenly, since absolute positions are not revealed by the
/// oracle. Utility has sensitivity 1, which gives `eps`-differential
/// privacy over neighboring training sets.
fn fit_exp_mech(
    data: &Dataset,
    oracle: &dyn EvalOracle,
    epsilon: f64,
    rng: &mut dyn RngCore,
) -> Result<ThresholdHyp> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::BadPrivacyParams {
            epsilon,
            delta: 0.0,
        });
    }
    let params = data.params();
    let n = data.len();
    let base = data.examples()[0].ct;
    // Signed offsets from the first example; available only under the
    // exact-distance kind.
    let offsets: Vec<i64> = data
        .examples()
        .iter()
        .map(|ex| {
            oracle
                .exact_gap(params, ex.ct, base)
                .ok_or_else(|| Error::UnsupportedLeakage("exact gaps unavailable".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| offsets[i]);

    let sorted_offsets: Vec<i64> = order.iter().map(|&i| offsets[i]).collect();
    let sorted_labels: Vec<bool> = order.iter().map(|&i| data.examples()[i].label).collect();
    let span = (sorted_offsets[n - 1] - sorted_offsets[0]) as f64;
    let domain = (1u64 << data.width()) as f64;
    let boundary_len = (domain - span) / 2.0;

    // errors(j) for the hypothesis positive exactly on sorted indices <= j.
    let positives_total: u64 = sorted_labels.iter().map(|&b| u64::from(b)).sum();
    let mut lengths = Vec::with_capacity(n + 1);
    let mut utilities = Vec::with_capacity(n + 1);
    let mut positives_prefix = 0u64;
    for j in 0..=n {
        if j == 0 {
            lengths.push(boundary_len);
        } else if j == n {
            lengths.push(boundary_len);
        } else {
            lengths.push((sorted_offsets[j] - sorted_offsets[j - 1]) as f64);
        }
        // j examples are classified positive; errors = negatives among them
        // plus positives among the rest.
        let negatives_prefix = j as u64 - positives_prefix;
        let errors = negatives_prefix + (positives_total - positives_prefix);
        utilities.push(-(errors as f64));
        if j < n {
            positives_prefix += u64::from(sorted_labels[j]);
        }
    }

    let log_weights: Vec<f64> = lengths
        .iter()
        .zip(&utilities)
        .map(|(&len, &u)| {
            if len <= 0.0 {
                f64::NEG_INFINITY
            } else {
                len.ln() + epsilon * u / 2.0
            }
        })
        .collect();
    let max_lw = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|&lw| (lw - max_lw).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.random::<f64>() * total;
    let mut chosen = weights.len() - 1;
    for (j, &w) in weights.iter().enumerate() {
        if draw < w {
            chosen = j;
            break;
        }
        draw -= w;
    }

    Ok(if chosen == 0 {
        ThresholdHyp::new(params, CutRule::Below(data.examples()[order[0]].ct))
    } else {
        ThresholdHyp::new(params, CutRule::AtOrBelow(data.examples()[order[chosen - 1]].ct))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{sample_sorted_dataset, LabeledExample, ThresholdConcept};
    use crate::fre::KeyRegistry;
    use crate::leakage::DistanceFunctionKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn group_privacy_geometric_factor() {
        let p = PrivacyParams::new(0.1, 1e-6).unwrap();
        let g = group_privacy(p, 3).unwrap();
        assert!((g.epsilon - 0.3).abs() < 1e-15);
        let want = 1e-6 * (0.3f64.exp_m1() / 0.1f64.exp_m1());
        assert!((g.delta - want).abs() < 1e-18);
        // Explicit geometric series 1 + e^eps + e^{2 eps}.
        let series = 1.0 + 0.1f64.exp() + 0.2f64.exp();
        assert!((g.delta - 1e-6 * series).abs() < 1e-18);
    }

    #[test]
    fn group_privacy_degenerate_cases() {
        let p = PrivacyParams::new(0.0, 1e-3).unwrap();
        let g = group_privacy(p, 7).unwrap();
        assert_eq!(g.epsilon, 0.0);
        assert!((g.delta - 7e-3).abs() < 1e-18);

        let q = PrivacyParams::new(0.5, 1e-4).unwrap();
        let id = group_privacy(q, 1).unwrap();
        assert_eq!(id, q);
        let zero = group_privacy(q, 0).unwrap();
        assert_eq!(zero.epsilon, 0.0);
        assert_eq!(zero.delta, 0.0);
    }

    #[test]
    fn compose_adds() {
        let a = PrivacyParams::new(0.5, 1e-6).unwrap();
        let b = PrivacyParams::new(0.25, 2e-6).unwrap();
        let c = compose(a, b).unwrap();
        assert!((c.epsilon - 0.75).abs() < 1e-15);
        assert!((c.delta - 3e-6).abs() < 1e-18);
    }

    #[test]
    fn subsample_amplification_and_preconditions() {
        let p = PrivacyParams::new(1.0, 1e-5).unwrap();
        let s = subsample_amplify(p, 100, 1000).unwrap();
        assert!((s.epsilon - 1.0f64.exp_m1() * 0.1).abs() < 1e-15);
        assert!((s.delta - 1e-6).abs() < 1e-18);

        let big = PrivacyParams::new(1.5, 1e-5).unwrap();
        assert_eq!(
            subsample_amplify(big, 100, 1000).unwrap_err(),
            Error::EpsilonTooLarge(1.5)
        );
        assert_eq!(
            subsample_amplify(p, 600, 1000).unwrap_err(),
            Error::SubsampleRatio { m: 600, n: 1000 }
        );
    }

    #[test]
    fn rejects_bad_privacy_params() {
        assert!(PrivacyParams::new(-0.1, 0.0).is_err());
        assert!(PrivacyParams::new(f64::NAN, 0.0).is_err());
        assert!(PrivacyParams::new(0.1, 1.5).is_err());
    }

    fn exact_setup(
        n: usize,
        t: u64,
        seed: u64,
    ) -> (KeyRegistry, crate::fre::SecretKeyHandle, Dataset) {
        let mut reg = KeyRegistry::new();
        let (sk, _) = reg.gen(10, DistanceFunctionKind::Exact, seed).unwrap();
        let concept = ThresholdConcept::new(t, 10).unwrap();
        let data = sample_sorted_dataset(&mut reg, sk, concept, n, seed + 1).unwrap();
        (reg, sk, data)
    }

    #[test]
    fn largest_positive_anchors_at_the_boundary() {
        let (mut reg, sk, data) = exact_setup(40, 500, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let hyp = OfflineLearnerKind::LargestPositive
            .fit(&data, &reg, &mut rng)
            .unwrap();
        let boundary = *data
            .plaintext_values()
            .iter()
            .filter(|&&v| v < 500)
            .max()
            .expect("some positive example");
        let params = data.params();
        for probe in [1u64, boundary - 1, boundary, boundary + 1, 1000] {
            let want = probe <= boundary;
            let got = reg
                .with_probe(sk, probe, |oracle, ct| {
                    hyp.classify(&EncExample { ct, params }, oracle)
                })
                .unwrap();
            assert_eq!(got, want, "probe {probe}");
        }
    }

    #[test]
    fn largest_positive_without_positives_is_constant_zero() {
        let mut reg = KeyRegistry::new();
        let (sk, params) = reg.gen(10, DistanceFunctionKind::Exact, 9).unwrap();
        let ct = reg.enc_value(sk, 700).unwrap();
        let data = Dataset::from_labeled(
            params,
            10,
            vec![LabeledExample { ct, label: false }],
            vec![700],
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let hyp = OfflineLearnerKind::LargestPositive
            .fit(&data, &reg, &mut rng)
            .unwrap();
        assert!(matches!(hyp.rule(), CutRule::Never));
    }

    #[test]
    fn exp_mech_requires_exact_kind() {
        let mut reg = KeyRegistry::new();
        let (sk, _) = reg.gen(10, DistanceFunctionKind::FloorLog, 4).unwrap();
        let concept = ThresholdConcept::new(500, 10).unwrap();
        let data = sample_sorted_dataset(&mut reg, sk, concept, 8, 5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let err = OfflineLearnerKind::ExpMechThreshold { epsilon: 1.0 }
            .fit(&data, &reg, &mut rng)
            .unwrap_err();
        assert!(matches!(err, Error::UnsupportedLeakage(_)));
    }

    #[test]
    fn exp_mech_single_example_matches_closed_form() {
        // One example: two intervals of equal convention length, utilities
        // 0 and -1 in some order, so the worse interval has probability
        // 1 / (1 + e^{eps/2}).
        let epsilon = 1.3f64;
        let mut reg = KeyRegistry::new();
        let (sk, params) = reg.gen(10, DistanceFunctionKind::Exact, 21).unwrap();
        let ct = reg.enc_value(sk, 300).unwrap();
        let data = Dataset::from_labeled(
            params,
            10,
            vec![LabeledExample { ct, label: true }],
            vec![300],
        )
        .unwrap();
        let learner = OfflineLearnerKind::ExpMechThreshold { epsilon };
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        let draws = 100_000u32;
        let mut all_zero = 0u32;
        for _ in 0..draws {
            let hyp = learner.fit(&data, &reg, &mut rng).unwrap();
            // Interval 0 is I(x < c); with the single positive example the
            // all-zero-on-training hypothesis is the erring one.
            if matches!(hyp.rule(), CutRule::Below(_)) {
                all_zero += 1;
            }
        }
        let got = f64::from(all_zero) / f64::from(draws);
        let want = 1.0 / (1.0 + (epsilon / 2.0).exp());
        assert!(
            (got - want).abs() < 0.01,
            "P[all-zero] = {got}, closed form {want}"
        );
    }

    #[test]
    fn exp_mech_neighboring_ratio_smoke() {
        let epsilon = 1.0f64;
        let n = 16usize;
        let mut reg = KeyRegistry::new();
        let (sk, params) = reg.gen(10, DistanceFunctionKind::Exact, 77).unwrap();
        let values: Vec<u64> = (1..=n as u64).map(|i| i * 60).collect();
        let make = |reg: &mut KeyRegistry, flip_last: bool| {
            let examples: Vec<LabeledExample> = values
                .iter()
                .enumerate()
                .map(|(i, &v)| LabeledExample {
                    ct: reg.enc_value(sk, v).unwrap(),
                    label: if flip_last && i == n - 1 { true } else { v < 500 },
                })
                .collect();
            Dataset::from_labeled(params, 10, examples, values.clone()).unwrap()
        };
        let d1 = make(&mut reg, false);
        let d2 = make(&mut reg, true);
        let learner = OfflineLearnerKind::ExpMechThreshold { epsilon };
        // Event: the fresh point 510 classifies positive.
        let mut rate = |data: &Dataset, seed: u64| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let runs = 4000u32;
            let mut hits = 0u32;
            for _ in 0..runs {
                let hyp = learner.fit(data, &reg, &mut rng).unwrap();
                let got = reg
                    .with_probe(sk, 510, |oracle, ct| {
                        hyp.classify(&EncExample { ct, params }, oracle)
                    })
                    .unwrap();
                hits += u32::from(got);
            }
            f64::from(hits) / f64::from(runs)
        };
        let p1 = rate(&d1, 1);
        let p2 = rate(&d2, 2);
        let sigma = (0.5 / 4000.0f64).sqrt();
        assert!(p1 <= epsilon.exp() * p2 + 3.0 * sigma, "p1 = {p1}, p2 = {p2}");
        assert!(p2 <= epsilon.exp() * p1 + 3.0 * sigma, "p1 = {p1}, p2 = {p2}");
    }

    #[test]
    fn exp_mech_concentrates_on_low_error_with_large_epsilon() {
        let (mut reg, sk, data) = exact_setup(30, 400, 13);
        let learner = OfflineLearnerKind::ExpMechThreshold { epsilon: 200.0 };
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let hyp = learner.fit(&data, &reg, &mut rng).unwrap();
        let params = data.params();
        let mut errors = 0u32;
        for (ex, &v) in data.examples().iter().zip(data.plaintext_values()) {
            let got = hyp.classify(&EncExample { ct: ex.ct, params }, &reg);
            errors += u32::from(got != (v < 400));
        }
        assert!(errors <= 1, "training errors = {errors}");
        let _ = sk;
        let _ = &mut reg;
    }
}
