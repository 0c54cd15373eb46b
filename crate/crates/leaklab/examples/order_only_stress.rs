//! With order-only leakage the two-front adversary keeps two candidate
//! values that every query answers identically, so the learner's mistake
//! rate is pinned to a coin flip no matter how long it trains.

use leaklab::exp::{run_ore_stress, OreStressArgs};

fn main() -> leaklab::Result<()> {
    let report = run_ore_stress(&OreStressArgs {
        width: 32,
        horizon: 2_000,
        trials: 40,
        check_cap: 32,
        seed: 11,
    })?;
    println!(
        "40 trials x 2000 rounds: mistake rate min {:.3} / mean {:.3} / max {:.3}",
        report.min_mistake_rate, report.mean_mistake_rate, report.max_mistake_rate
    );
    println!(
        "candidate views identical every round: {}",
        report.all_projections_equal
    );
    Ok(())
}
