//! The three privacy bookkeeping operations, printed at 12 significant
//! digits: group privacy over k hops, sequential composition, and
//! subsampling amplification.

use leaklab::exp::{run_dp_calc, DpCalcArgs};

fn main() -> leaklab::Result<()> {
    let ops = [
        DpCalcArgs::Group {
            epsilon: 0.5,
            delta: 1e-6,
            k: 4,
        },
        DpCalcArgs::Group {
            epsilon: 0.0,
            delta: 1e-6,
            k: 4,
        },
        DpCalcArgs::Compose {
            epsilon: 0.5,
            delta: 1e-6,
            epsilon2: 0.25,
            delta2: 1e-7,
        },
        DpCalcArgs::Subsample {
            epsilon: 1.0,
            delta: 1e-5,
            m: 100,
            n: 1_000,
        },
    ];
    for op in ops {
        let report = run_dp_calc(&op)?;
        println!(
            "{:?}\n  -> epsilon {}  delta {}",
            report.config, report.epsilon_display, report.delta_display
        );
    }
    Ok(())
}
