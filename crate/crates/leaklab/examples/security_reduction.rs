//! Drives the learner-to-distinguisher reduction inside the security game:
//! plan a challenge around a removal set, submit it, train the offline
//! learner on the surviving context, and guess the bit from whether the
//! trained hypothesis separates the challenge pair.
//!
//! Every submission below validates (identical leakage on all index
//! triples), which is exactly why the measured advantage sits at zero: the
//! oracle view carries no information about the bit, so the reduction only
//! distinguishes when handed a learner that is accurate on both neighboring
//! distributions at once.

use leaklab::attack::{FocusMode, RemovalMode};
use leaklab::dp::OfflineLearnerKind;
use leaklab::exp::{run_attack, AttackArgs};
use leaklab::leakage::DistanceFunctionKind;

fn main() -> leaklab::Result<()> {
    for (label, learner) in [
        ("largest-positive", OfflineLearnerKind::LargestPositive),
        ("constant-zero control", OfflineLearnerKind::ConstantZero),
    ] {
        let report = run_attack(&AttackArgs {
            width: 24,
            kind: DistanceFunctionKind::FloorLog,
            n: 16,
            trials: 20_000,
            learner,
            focus: FocusMode::Boundary,
            removal: RemovalMode::Direct,
            pair_attempts: 32,
            seed: 23,
        })?;
        println!(
            "{label}: advantage {:+.4} (ci {:.4}), abort {:.3}, invalid {:.3}, guess rates b=0 {:.3} / b=1 {:.3}",
            report.estimate.advantage,
            report.estimate.ci_halfwidth,
            report.abort_rate,
            report.invalid_rate,
            report.estimate.rate_b0,
            report.estimate.rate_b1,
        );
    }
    Ok(())
}
