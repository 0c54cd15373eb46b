//! Monte Carlo verifiers for the sample-structure lemmas behind the
//! reduction: band regularity, bucket sizes, distance-value spread around a
//! focus, and the removal-based log-invariance conditions.
//!
//! Each verifier plays independent seeded trials and compares the success
//! rate against the claimed probability with a one-sided normal interval:
//! the verdict is `Violated` only when `rate + ci < claimed`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::surgery_radius;
use crate::error::{Error, Result};
use crate::leakage::{domain_max, fld_raw, leak_raw, DistanceFunctionKind};

/// Verdict of a rate-versus-claim comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
}

/// Outcome of one lemma verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub n: usize,
    pub width: u8,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub ci_halfwidth: f64,
    pub claimed: f64,
    pub verdict: Verdict,
    /// First few failure descriptions, for drill-down.
    pub diagnostics: Vec<String>,
}

fn make_report(
    lemma: &str,
    n: usize,
    width: u8,
    claimed: f64,
    results: Vec<(bool, Option<String>)>,
) -> LemmaReport {
    let trials = results.len() as u64;
    let successes = results.iter().filter(|(ok, _)| *ok).count() as u64;
    let rate = successes as f64 / trials as f64;
    let ci_halfwidth = 1.96 * (rate * (1.0 - rate) / trials as f64).sqrt();
    let verdict = if rate + ci_halfwidth < claimed {
        Verdict::Violated
    } else {
        Verdict::Consistent
    };
    let diagnostics = results
        .into_iter()
        .filter_map(|(_, d)| d)
        .take(5)
        .collect();
    LemmaReport {
        lemma: lemma.to_string(),
        n,
        width,
        trials,
        successes,
        rate,
        ci_halfwidth,
        claimed,
        verdict,
        diagnostics,
    }
}

fn sorted_sample(rng: &mut ChaCha12Rng, n: usize, max: u64) -> Vec<u64> {
    let mut values: Vec<u64> = (0..n).map(|_| rng.random_range(1..=max)).collect();
    values.sort_unstable();
    values
}

/// Whether `gap` lies within `radius` of a power of two `2^z`, `z < width`.
fn in_band(gap: u64, radius: f64, width: u8) -> bool {
    if gap == 0 {
        return radius >= 1.0;
    }
    let gf = gap as f64;
    let lo = (gf - radius).max(1.0).log2().ceil() as i64;
    let hi = (gf + radius).log2().floor() as i64;
    let z_lo = lo.max(0);
    let z_hi = hi.min(i64::from(width) - 1);
    (z_lo..=z_hi).any(|z| {
        let p = (1u64 << z) as f64;
        (gf - p).abs() <= radius
    })
}

/// Indices of sample points whose gap to `values[i]` falls in a band.
fn band_set(values: &[u64], i: usize, radius: f64, width: u8) -> Vec<usize> {
    let center = values[i];
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| in_band(v.abs_diff(center), radius, width))
        .map(|(j, _)| j)
        .collect()
}

fn run_trials<F>(trials: u64, seed: u64, f: F) -> Vec<(bool, Option<String>)>
where
    F: Fn(&mut ChaCha12Rng, u64) -> (bool, Option<String>) + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(t.wrapping_add(1));
            f(&mut rng, t)
        })
        .collect()
}

/// Checks that every band set stays within the `50 log2(n)^2` budget;
/// claimed to hold with probability at least `1 - 1/n` over the sample.
pub fn verify_regularity(
    n: usize,
    width: u8,
    trials: u64,
    seed: u64,
    claimed: Option<f64>,
) -> Result<LemmaReport> {
    let max = domain_max(width)?;
    let radius = surgery_radius(n, width)?;
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let budget = 50.0 * (n as f64).log2().powi(2);
    let claimed = claimed.unwrap_or(1.0 - 1.0 / n as f64);
    let results = run_trials(trials, seed, |rng, t| {
        let values = sorted_sample(rng, n, max);
        for i in 0..n {
            let size = band_set(&values, i, radius, width).len();
            if size as f64 > budget {
                return (
                    false,
                    Some(format!("trial {t}: |A_{i} ∩ S| = {size} > {budget:.1}")),
                );
            }
        }
        (true, None)
    });
    Ok(make_report("regularity", n, width, claimed, results))
}

/// Checks that every consecutive gap (with sentinels 0 and `2^width`) stays
/// below the surgery radius; claimed probability at least `1 - 1/n`.
pub fn verify_bucket_sizes(
    n: usize,
    width: u8,
    trials: u64,
    seed: u64,
    claimed: Option<f64>,
) -> Result<LemmaReport> {
    let max = domain_max(width)?;
    let radius = surgery_radius(n, width)?;
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let claimed = claimed.unwrap_or(1.0 - 1.0 / n as f64);
    let results = run_trials(trials, seed, |rng, t| {
        let values = sorted_sample(rng, n, max);
        let mut prev = 0u64;
        for (idx, &v) in values.iter().chain(std::iter::once(&max)).enumerate() {
            let gap = v - prev;
            if gap as f64 > radius {
                return (
                    false,
                    Some(format!("trial {t}: bucket {idx} has size {gap} > {radius:.1}")),
                );
            }
            prev = v;
        }
        (true, None)
    });
    Ok(make_report("bucket_sizes", n, width, claimed, results))
}

/// Checks that outside each band set the signed floor-log distance to the
/// two focus neighbors is identical; claimed probability at least
/// `1 - 2/n`. `radius_override` substitutes the band radius (0 makes a
/// negative control that must come out `Violated`).
pub fn verify_fld_spread(
    n: usize,
    width: u8,
    trials: u64,
    seed: u64,
    claimed: Option<f64>,
    radius_override: Option<f64>,
) -> Result<LemmaReport> {
    let max = domain_max(width)?;
    if n < 3 {
        return Err(Error::SampleTooSmall { min: 3, got: n });
    }
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let radius = match radius_override {
        Some(r) => r,
        None => surgery_radius(n, width)?,
    };
    let budget = 50.0 * (n as f64).log2().powi(2);
    let claimed = claimed.unwrap_or(1.0 - 2.0 / n as f64);
    let results = run_trials(trials, seed, |rng, t| {
        let values = sorted_sample(rng, n, max);
        for i in 1..n - 1 {
            let r_i = band_set(&values, i, radius, width);
            if r_i.len() as f64 > budget {
                return (
                    false,
                    Some(format!("trial {t}: |R_{i}| = {} > {budget:.1}", r_i.len())),
                );
            }
            let (a, b) = (values[i - 1], values[i + 1]);
            for j in 0..n {
                if r_i.binary_search(&j).is_ok() {
                    continue;
                }
                let da = fld_raw(values[j], a);
                let db = fld_raw(values[j], b);
                if da != db {
                    return (
                        false,
                        Some(format!(
                            "trial {t}: fld(m_{j}, m_{}) = {da} but fld(m_{j}, m_{}) = {db}",
                            i - 1,
                            i + 1
                        )),
                    );
                }
            }
        }
        (true, None)
    });
    Ok(make_report("fld_spread", n, width, claimed, results))
}

/// Log-invariance verification around band removal sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogInvarianceReport {
    /// Condition 1: surviving context keeps a constant distance value (and
    /// full leakage tuple) across the challenge interval.
    pub cond1: LemmaReport,
    /// Condition 2: closeness bit constant across challenge pairs; rate
    /// reported without an asserted bound, since the band radius does not
    /// cover every pair geometry.
    pub cond2_checks: u64,
    pub cond2_passes: u64,
    pub cond2_rate: f64,
    pub probes: usize,
}

/// Probes the two log-invariance conditions on random samples: for each
/// interior focus, remove the band set, then check surviving context points
/// against at least 8 probe values spread over the open interval between
/// the focus neighbors (endpoints, midpoint, uniform fill).
pub fn verify_log_invariance(
    n: usize,
    width: u8,
    trials: u64,
    probes: usize,
    seed: u64,
    claimed: Option<f64>,
) -> Result<LogInvarianceReport> {
    let max = domain_max(width)?;
    if n < 3 {
        return Err(Error::SampleTooSmall { min: 3, got: n });
    }
    if probes < 8 {
        return Err(Error::Config(format!("need at least 8 probes, got {probes}")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let radius = surgery_radius(n, width)?;
    let claimed = claimed.unwrap_or(1.0 - 2.0 / n as f64);
    let kind = DistanceFunctionKind::FloorLog;

    struct TrialOut {
        ok: bool,
        diag: Option<String>,
        cond2_checks: u64,
        cond2_passes: u64,
    }

    let outs: Vec<TrialOut> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(t.wrapping_add(1));
            let values = sorted_sample(&mut rng, n, max);
            let mut ok = true;
            let mut diag = None;
            let mut cond2_checks = 0u64;
            let mut cond2_passes = 0u64;
            for i in 1..n - 1 {
                let (a, b) = (values[i - 1], values[i + 1]);
                if b - a < 2 {
                    continue;
                }
                let r_i = band_set(&values, i, radius, width);
                let survivors: Vec<u64> = (0..n)
                    .filter(|j| r_i.binary_search(j).is_err())
                    .map(|j| values[j])
                    .collect();
                if survivors.is_empty() {
                    continue;
                }
                // Probe values inside the open interval (a, b).
                let mut zs = vec![a + 1, b - 1, a + (b - a) / 2];
                while zs.len() < probes {
                    zs.push(rng.random_range(a + 1..b));
                }
                zs.sort_unstable();
                zs.dedup();

                if ok {
                    'cond1: for &y in &survivors {
                        let first = fld_raw(y, zs[0]);
                        for &z in &zs[1..] {
                            if fld_raw(y, z) != first {
                                ok = false;
                                diag = Some(format!(
                                    "trial {t}, focus {i}: fld({y}, {}) = {first} but fld({y}, {z}) = {}",
                                    zs[0],
                                    fld_raw(y, z)
                                ));
                                break 'cond1;
                            }
                        }
                    }
                    // Full leakage tuples on sampled survivor pairs.
                    if ok && survivors.len() >= 2 {
                        for _ in 0..8 {
                            let y1 = survivors[rng.random_range(0..survivors.len())];
                            let y2 = survivors[rng.random_range(0..survivors.len())];
                            let z1 = zs[rng.random_range(0..zs.len())];
                            let z2 = zs[rng.random_range(0..zs.len())];
                            if leak_raw(kind, y1, y2, z1) != leak_raw(kind, y1, y2, z2) {
                                ok = false;
                                diag = Some(format!(
                                    "trial {t}, focus {i}: tuple ({y1},{y2},z) differs at z = {z1} vs {z2}"
                                ));
                                break;
                            }
                        }
                    }
                }

                // Condition 2 rate: closeness bit stability across pairs.
                for &y in &survivors {
                    let mut bits = zs
                        .iter()
                        .enumerate()
                        .flat_map(|(pi, &z1)| {
                            zs[pi + 1..]
                                .iter()
                                .map(move |&z2| (z1, z2))
                        })
                        .map(|(z1, z2)| leak_raw(kind, y, z1, z2).closeness_bit);
                    cond2_checks += 1;
                    let first = bits.next().unwrap_or(false);
                    if bits.all(|bit| bit == first) {
                        cond2_passes += 1;
                    }
                }
            }
            TrialOut {
                ok,
                diag,
                cond2_checks,
                cond2_passes,
            }
        })
        .collect();

    let results: Vec<(bool, Option<String>)> =
        outs.iter().map(|o| (o.ok, o.diag.clone())).collect();
    let cond2_checks: u64 = outs.iter().map(|o| o.cond2_checks).sum();
    let cond2_passes: u64 = outs.iter().map(|o| o.cond2_passes).sum();
    Ok(LogInvarianceReport {
        cond1: make_report("log_invariance_cond1", n, width, claimed, results),
        cond2_checks,
        cond2_passes,
        cond2_rate: if cond2_checks == 0 {
            1.0
        } else {
            cond2_passes as f64 / cond2_checks as f64
        },
        probes,
    })
}
