//! Tour of the idealized function-revealing encryption oracle: handles
//! decrypt only under their own key, evaluation leaks exactly the triple
//! comparisons plus the closeness bit, and anything malformed returns
//! bottom. Ends with submission validation for the left-or-right game.

use leaklab::fre::{validate_submission, ChallengeSubmission, EvalOracle, KeyRegistry};
use leaklab::leakage::DistanceFunctionKind;

fn main() -> leaklab::Result<()> {
    let mut reg = KeyRegistry::new();
    let (sk, params) = reg.gen(16, DistanceFunctionKind::FloorLog, 3)?;

    let c100 = reg.enc_value(sk, 100)?;
    let c300 = reg.enc_value(sk, 300)?;
    let c305 = reg.enc_value(sk, 305)?;
    println!("dec(enc(100)) = {:?}", reg.dec(sk, c100).map(|m| m.value()));

    let leak = reg.eval(params, c100, c300, c305).expect("well-formed triple");
    println!(
        "eval(100, 300, 305): comps {:?} {:?} {:?}, lower pair strictly closer: {}",
        leak.c01, leak.c02, leak.c12, leak.closeness_bit
    );

    // Handles from another key, or forged outright, evaluate to bottom.
    let (sk2, _) = reg.gen(16, DistanceFunctionKind::FloorLog, 4)?;
    let foreign = reg.enc_value(sk2, 100)?;
    let forged = reg.forged_handle(params);
    println!(
        "foreign handle -> {:?}, forged handle -> {:?}",
        reg.eval(params, c100, c300, foreign),
        reg.eval(params, c100, c300, forged)
    );

    // A valid challenge pair leaks identically on every index triple. The
    // broken pair keeps the ordering but drags the top value far enough to
    // flip the closeness bit; validation names the first witness triple.
    let valid = ChallengeSubmission::new(vec![100, 300, 305], vec![100, 301, 306], 16)?;
    let broken = ChallengeSubmission::new(vec![100, 300, 305], vec![100, 300, 16_000], 16)?;
    println!(
        "valid pair -> {:?}, broken pair -> {:?}",
        validate_submission(&valid, DistanceFunctionKind::FloorLog),
        validate_submission(&broken, DistanceFunctionKind::FloorLog)
    );
    Ok(())
}
