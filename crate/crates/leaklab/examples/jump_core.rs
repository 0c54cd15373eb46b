//! An accurate hypothesis over a split interval partition must jump: some
//! adjacent pair of cells differs in agreement probability by more than
//! 1/(2n). One hand-built instance, then random sweeps at three sizes.

use leaklab::attack::{jump_core_check, JumpCoreInstance, JumpCoreOutcome};
use leaklab::exp::{run_jump_core, JumpCoreArgs};

fn main() -> leaklab::Result<()> {
    // Step profile: agrees on everything left of the split, nothing right
    // of it. The split cell's own mass sits in len_a / len_b.
    let inst = JumpCoreInstance {
        agree_probs: vec![0.97, 0.95, 0.9, 0.1, 0.05],
        lengths: vec![0.2, 0.15, 0.1, 0.0, 0.3],
        len_a: 0.05,
        len_b: 0.2,
        k: 3,
    };
    match jump_core_check(&inst)? {
        JumpCoreOutcome::Holds {
            accuracy,
            max_adjacent_gap,
            bound,
        } => println!(
            "hand-built: accuracy {accuracy:.3}, max adjacent gap {max_adjacent_gap:.3} > bound {bound:.3}"
        ),
        other => println!("hand-built: {other:?}"),
    }

    for cells in [4usize, 16, 64] {
        let report = run_jump_core(&JumpCoreArgs {
            cells,
            instances: 20_000,
            seed: 61 + cells as u64,
        })?;
        println!(
            "{cells:>3} cells: {} hold / {} inapplicable / {} violated, min observed gap {:.4} (bound {:.4})",
            report.holds,
            report.inapplicable,
            report.violated,
            report.min_observed_gap.unwrap_or(f64::NAN),
            report.bound
        );
    }
    Ok(())
}
