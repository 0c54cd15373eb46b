//! Accuracy of the exponential-mechanism threshold learner on encrypted
//! samples, compared against the non-private baseline that anchors on the
//! largest positive example.

use leaklab::dp::OfflineLearnerKind;
use leaklab::exp::{run_accuracy, AccuracyArgs};

fn main() -> leaklab::Result<()> {
    let base = AccuracyArgs {
        width: 20,
        n: 500,
        learner: OfflineLearnerKind::ExpMechThreshold { epsilon: 1.0 },
        threshold: None,
        trials: 50,
        mc_samples: 10_000,
        alpha: 0.25,
        seed: 31,
    };
    for (label, learner) in [
        ("exp-mech eps=1.0", OfflineLearnerKind::ExpMechThreshold { epsilon: 1.0 }),
        ("exp-mech eps=0.1", OfflineLearnerKind::ExpMechThreshold { epsilon: 0.1 }),
        ("largest-positive", OfflineLearnerKind::LargestPositive),
    ] {
        let report = run_accuracy(&AccuracyArgs {
            learner,
            ..base
        })?;
        println!(
            "{label:>18}: mean error {:.4}, median {:.4}, error <= {} in {:.0}% of trials",
            report.mean_error,
            report.median_error,
            base.alpha,
            report.fraction_within_alpha * 100.0
        );
    }
    Ok(())
}
