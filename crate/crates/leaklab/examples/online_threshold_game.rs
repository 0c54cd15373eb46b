//! Runs the encrypted threshold learner against an adaptive adversary and
//! prints one trial's transcript: every mistake, and how the anchor
//! potential shrinks once both anchors are live.

use leaklab::exp::{run_online_game, OnlineGameArgs};
use leaklab::leakage::DistanceFunctionKind;
use leaklab::online::GameFlavor;

fn main() -> leaklab::Result<()> {
    let args = OnlineGameArgs {
        width: 16,
        kind: DistanceFunctionKind::FloorLog,
        flavor: GameFlavor::Encrypted,
        learner: "enc_threshold".into(),
        adversary: "adaptive".into(),
        threshold: None,
        horizon: 2_000,
        trials: 1,
        oblivious: false,
        include_transcript: true,
        seed: 7,
    };
    let report = run_online_game(&args)?;
    let trial = &report.trials[0];
    println!(
        "width {}, threshold {}, {} rounds, {} mistakes (budget {})",
        args.width, trial.threshold, trial.rounds, trial.mistakes, report.mistake_bound
    );

    let transcript = report.transcript.as_ref().expect("transcript requested");
    println!("\nmistake rounds (value, guess -> label, potential after):");
    for round in transcript.rounds.iter().filter(|r| r.mistake) {
        let value = round
            .plain_value
            .map_or_else(|| "forged".into(), |v| v.to_string());
        let potential = round
            .potential_after
            .map_or_else(|| "-".into(), |p| p.to_string());
        println!(
            "  round {:>4}: {:>6}  {} -> {}  potential {}",
            round.index, value, round.prediction as u8, round.label as u8, potential
        );
    }

    // The same setup over many trials and both adversary styles.
    for adversary in ["adaptive", "random"] {
        let batch = run_online_game(&OnlineGameArgs {
            adversary: adversary.into(),
            trials: 50,
            include_transcript: false,
            ..args.clone()
        })?;
        println!(
            "\n{adversary}: 50 trials, max {} / mean {:.2} mistakes, within budget: {}",
            batch.max_mistakes, batch.mean_mistakes, batch.all_within_bound
        );
    }
    Ok(())
}
