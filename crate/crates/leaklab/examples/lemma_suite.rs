//! Empirical checks for the structural lemmas behind the reduction: sorted
//! samples are regular (no two closer than the band radius), bucket gaps
//! stay under the radius, challenge intervals keep a wide floor-log spread
//! to the surviving context, and distance values are invariant across the
//! challenge interval. A zero-radius negative control shows the harness
//! can reject.

use leaklab::lemmas::{
    verify_bucket_sizes, verify_fld_spread, verify_log_invariance, verify_regularity,
};

fn main() -> leaklab::Result<()> {
    let reg = verify_regularity(128, 40, 400, 41, None)?;
    println!(
        "regularity      n=128 d=40: {:?} rate {:.4} (claimed >= {:.4})",
        reg.verdict,
        reg.rate,
        reg.claimed
    );

    let buckets = verify_bucket_sizes(128, 40, 400, 42, None)?;
    println!(
        "bucket gaps     n=128 d=40: {:?} rate {:.4} (claimed >= {:.4})",
        buckets.verdict, buckets.rate, buckets.claimed
    );

    let spread = verify_fld_spread(256, 40, 300, 43, None, None)?;
    println!(
        "fld spread      n=256 d=40: {:?} rate {:.4} (claimed >= {:.4})",
        spread.verdict, spread.rate, spread.claimed
    );

    let control = verify_fld_spread(256, 40, 200, 44, None, Some(0.0))?;
    println!(
        "radius-0 control          : {:?} rate {:.4} (expected Violated)",
        control.verdict, control.rate
    );

    let loginv = verify_log_invariance(128, 30, 200, 8, 45, None)?;
    println!(
        "log invariance  n=128 d=30: {:?} rate {:.4}; closeness bit constant on {}/{} pair probes",
        loginv.cond1.verdict, loginv.cond1.rate, loginv.cond2_passes, loginv.cond2_checks
    );
    Ok(())
}
