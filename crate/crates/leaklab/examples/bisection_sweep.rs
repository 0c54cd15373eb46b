//! Checks the bisection property of the floor-log distance: exhaustively at
//! a small width, by sampling at a large one, and shows that the order-only
//! stub fails it almost immediately.

use leaklab::exp::{run_bisection, BisectionArgs};
use leaklab::leakage::{BisectionOutcome, DistanceFunctionKind};

fn describe(label: &str, outcome: &BisectionOutcome) {
    match outcome {
        BisectionOutcome::Holds { triples_checked } => {
            println!("{label}: holds over {triples_checked} triples");
        }
        BisectionOutcome::Counterexample { x, y, z } => {
            println!("{label}: counterexample at ({x}, {y}, {z})");
        }
    }
}

fn main() -> leaklab::Result<()> {
    let exhaustive = run_bisection(&BisectionArgs {
        kind: DistanceFunctionKind::FloorLog,
        width: 8,
        triples: None,
        seed: 1,
    })?;
    describe("floor-log, width 8, exhaustive", &exhaustive.outcome);

    let sampled = run_bisection(&BisectionArgs {
        kind: DistanceFunctionKind::FloorLog,
        width: 32,
        triples: Some(2_000_000),
        seed: 1,
    })?;
    describe("floor-log, width 32, 2M sampled", &sampled.outcome);

    let stub = run_bisection(&BisectionArgs {
        kind: DistanceFunctionKind::OrderOnlyStub,
        width: 8,
        triples: None,
        seed: 1,
    })?;
    describe("order-only stub, width 8", &stub.outcome);
    Ok(())
}
