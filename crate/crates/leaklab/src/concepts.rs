//! Threshold concepts over the plain and encrypted domains, labeled sample
//! generation, and Monte Carlo generalization error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fre::{CiphertextHandle, EvalOracle, KeyRegistry, ParamsTag, SecretKeyHandle};
use crate::leakage::{domain_max, Plaintext};

/// Threshold function `f_t(x) = 1` iff `x < t`, for `t` in `[1, 2^width]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdConcept {
    t: u64,
    width: u8,
}

impl ThresholdConcept {
    pub fn new(t: u64, width: u8) -> Result<Self> {
        let max = domain_max(width)?;
        if t == 0 || t > max {
            return Err(Error::ValueOutOfRange { value: t, width });
        }
        Ok(Self { t, width })
    }

    pub fn t(self) -> u64 {
        self.t
    }

    pub fn width(self) -> u8 {
        self.width
    }

    pub fn label(self, x: Plaintext) -> Result<bool> {
        if x.width() != self.width {
            return Err(Error::WidthMismatch(x.width(), self.width));
        }
        Ok(x.value() < self.t)
    }

    /// Label of a raw domain value; the caller guarantees the range.
    pub fn label_value(self, x: u64) -> bool {
        debug_assert!(x >= 1 && x <= 1u64 << self.width);
        x < self.t
    }
}

/// An example in the encrypted domain: a handle plus the tag the example
/// claims to be encrypted under. Forged handles and foreign tags are legal
/// inputs and simply label as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncExample {
    pub ct: CiphertextHandle,
    pub params: ParamsTag,
}

/// Threshold concept lifted to the encrypted domain for one specific key:
/// an example is positive iff it claims the right tag, decrypts under the
/// key, and the plaintext is below the threshold.
#[derive(Debug, Clone, Copy)]
pub struct EncThresholdConcept {
    pub concept: ThresholdConcept,
    pub sk: SecretKeyHandle,
    pub params: ParamsTag,
}

impl EncThresholdConcept {
    pub fn label(&self, reg: &KeyRegistry, example: &EncExample) -> bool {
        if example.params != self.params {
            return false;
        }
        match reg.dec(self.sk, example.ct) {
            Some(m) => m.value() < self.concept.t(),
            None => false,
        }
    }
}

/// Binary classifier over encrypted examples, queried through the oracle.
pub trait Hypothesis {
    fn classify(&self, example: &EncExample, oracle: &dyn EvalOracle) -> bool;
}

/// One labeled encrypted example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledExample {
    pub ct: CiphertextHandle,
    pub label: bool,
}

/// A labeled training set under one key, with the generating plaintexts
/// retained on the side for harness reporting only.
#[derive(Debug, Clone)]
pub struct Dataset {
    params: ParamsTag,
    width: u8,
    examples: Vec<LabeledExample>,
    values: Vec<u64>,
}

impl Dataset {
    pub fn from_labeled(
        params: ParamsTag,
        width: u8,
        examples: Vec<LabeledExample>,
        values: Vec<u64>,
    ) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if examples.len() != values.len() {
            return Err(Error::Config(format!(
                "examples ({}) and plaintext values ({}) differ in length",
                examples.len(),
                values.len()
            )));
        }
        Ok(Self {
            params,
            width,
            examples,
            values,
        })
    }

    pub fn params(&self) -> ParamsTag {
        self.params
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    /// Harness-only view of the plaintexts behind the handles; nothing a
    /// learner receives exposes these.
    pub fn plaintext_values(&self) -> &[u64] {
        &self.values
    }

    /// CSV export: `index,nonce,params,label` plus a harness-only
    /// `plaintext` column when requested.
    pub fn to_csv(&self, include_plaintexts: bool) -> String {
        let mut out = String::new();
        if include_plaintexts {
            out.push_str("index,nonce,params,label,plaintext\n");
        } else {
            out.push_str("index,nonce,params,label\n");
        }
        for (i, ex) in self.examples.iter().enumerate() {
            let _ = write!(
                out,
                "{},{},{},{}",
                i,
                ex.ct.nonce_hex(),
                ex.ct.params(),
                u8::from(ex.label)
            );
            if include_plaintexts {
                let _ = write!(out, ",{}", self.values[i]);
            }
            out.push('\n');
        }
        out
    }
}

/// Draws `n` uniform plaintexts, sorts them ascending, encrypts in sorted
/// order, and labels them by the concept.
pub fn sample_sorted_dataset(
    reg: &mut KeyRegistry,
    sk: SecretKeyHandle,
    concept: ThresholdConcept,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let width = reg.width_of(sk)?;
    if width != concept.width() {
        return Err(Error::WidthMismatch(width, concept.width()));
    }
    let max = domain_max(width)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut values: Vec<u64> = (0..n).map(|_| rng.random_range(1..=max)).collect();
    values.sort_unstable();
    let params = reg.params_of(sk)?;
    let examples = values
        .iter()
        .map(|&v| {
            Ok(LabeledExample {
                ct: reg.enc_value(sk, v)?,
                label: concept.label_value(v),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_labeled(params, width, examples, values)
}

/// Monte Carlo disagreement rate between a hypothesis and the concept on
/// fresh uniform examples. Samples are encrypted as short-lived probes, so
/// the registry state seen by later callers is unchanged.
pub fn generalization_error(
    reg: &mut KeyRegistry,
    sk: SecretKeyHandle,
    concept: ThresholdConcept,
    hypothesis: &dyn Hypothesis,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Config("generalization error needs samples >= 1".into()));
    }
    let width = reg.width_of(sk)?;
    if width != concept.width() {
        return Err(Error::WidthMismatch(width, concept.width()));
    }
    let max = domain_max(width)?;
    let params = reg.params_of(sk)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut disagreements = 0u64;
    for _ in 0..samples {
        let x = rng.random_range(1..=max);
        let truth = concept.label_value(x);
        let predicted = reg.with_probe(sk, x, |oracle, ct| {
            hypothesis.classify(&EncExample { ct, params }, oracle)
        })?;
        disagreements += u64::from(predicted != truth);
    }
    Ok(disagreements as f64 / samples as f64)
}
