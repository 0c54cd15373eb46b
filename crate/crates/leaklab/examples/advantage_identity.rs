//! Simulates the two-point agreement game: a guesser sees two hypothesis
//! evaluations, drawn from one cell (b = 0) or one from each (b = 1), and
//! says "different cells" exactly when they disagree. Its success rate has
//! the closed form (1 + (p_first - p_second)^2) / 2, confirmed here across
//! a probability grid.

use leaklab::exp::{run_advantage_identity, IdentityArgs};

fn main() -> leaklab::Result<()> {
    let report = run_advantage_identity(&IdentityArgs {
        p_first: 0.0,
        p_second: 0.0,
        trials: 200_000,
        grid: true,
        tolerance: 0.005,
        seed: 53,
    })?;
    println!("p_first  p_second  closed   simulated  |diff|");
    for row in &report.rows {
        println!(
            "  {:.2}     {:.2}    {:+.4}    {:+.4}    {:.5}",
            row.p_first, row.p_second, row.closed_form, row.simulated, row.abs_diff
        );
    }
    println!(
        "\nmax |diff| {:.5} over {} cells at {} trials each (tolerance {})",
        report.max_abs_diff,
        report.rows.len(),
        200_000,
        report.config.tolerance
    );
    Ok(())
}
