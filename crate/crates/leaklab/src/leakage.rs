//! Distance functions over a bounded integer domain and the three-point
//! leakage profile they induce.
//!
//! The plaintext domain is `[1, 2^d]` for a width `d` between 1 and 62.
//! A distance function assigns every ordered pair a signed value whose sign
//! matches the order of the pair. The leakage of a triple is the three
//! pairwise order relations plus one *closeness bit*: after sorting the
//! triple, whether the lower gap is strictly smaller in magnitude than the
//! upper gap. The default distance is the signed floor-log of the gap, which
//! satisfies the bisection property checked by [`check_bisection`].

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Maximum supported plaintext width; keeps every gap inside `i64`.
pub const MAX_WIDTH: u8 = 62;

/// Largest width for which [`BisectionMode::Exhaustive`] is accepted.
pub const MAX_EXHAUSTIVE_WIDTH: u8 = 10;

/// Returns the largest value of the domain `[1, 2^width]`.
pub fn domain_max(width: u8) -> Result<u64> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::WidthOutOfRange(width));
    }
    Ok(1u64 << width)
}

/// A value in `[1, 2^width]` tagged with its domain width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Plaintext {
    value: u64,
    width: u8,
}

impl Plaintext {
    pub fn new(value: u64, width: u8) -> Result<Self> {
        let max = domain_max(width)?;
        if value == 0 || value > max {
            return Err(Error::ValueOutOfRange { value, width });
        }
        Ok(Self { value, width })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn width(self) -> u8 {
        self.width
    }
}

impl fmt::Display for Plaintext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Order relation between two plaintexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparison {
    Less,
    Equal,
    Greater,
}

impl Comparison {
    fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Comparison::Less,
            Ordering::Equal => Comparison::Equal,
            Ordering::Greater => Comparison::Greater,
        }
    }

    /// True for `Less` and `Equal`.
    pub fn is_le(self) -> bool {
        matches!(self, Comparison::Less | Comparison::Equal)
    }

    /// True for `Greater` and `Equal`.
    pub fn is_ge(self) -> bool {
        matches!(self, Comparison::Greater | Comparison::Equal)
    }
}

/// Which distance function drives the leakage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceFunctionKind {
    /// Signed floor-log of the gap; the default, satisfies bisection.
    FloorLog,
    /// Raw signed difference; reveals exact gaps.
    Exact,
    /// Sign of the difference only; every distinct pair has magnitude 1,
    /// so the closeness bit carries no information beyond order.
    OrderOnlyStub,
}

impl fmt::Display for DistanceFunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DistanceFunctionKind::FloorLog => "floor_log",
            DistanceFunctionKind::Exact => "exact",
            DistanceFunctionKind::OrderOnlyStub => "order_only_stub",
        };
        f.write_str(s)
    }
}

impl FromStr for DistanceFunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "floorlog" | "floor_log" => Ok(DistanceFunctionKind::FloorLog),
            "exact" => Ok(DistanceFunctionKind::Exact),
            "orderonly" | "order_only_stub" => Ok(DistanceFunctionKind::OrderOnlyStub),
            other => Err(Error::Config(format!(
                "unknown distance kind {other:?}; expected floorlog, exact, or order_only_stub"
            ))),
        }
    }
}

/// Signed distance value; zero exactly when the two inputs are equal.
///
/// For [`DistanceFunctionKind::FloorLog`] the value lies in `[-(d+1), d+1]`;
/// for `Exact` it is the raw difference; for `OrderOnlyStub` it is the sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistanceValue(i64);

impl DistanceValue {
    pub fn value(self) -> i64 {
        self.0
    }

    pub fn magnitude(self) -> u64 {
        self.0.unsigned_abs()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Leakage of an ordered triple: pairwise order plus the closeness bit.
///
/// `closeness_bit` is computed on the *sorted* triple `y0 <= y1 <= y2` and is
/// set when `|dist(y0, y1)| < |dist(y1, y2)|`, so it is invariant under
/// permutations of the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LeakOutput {
    pub c01: Comparison,
    pub c12: Comparison,
    pub c02: Comparison,
    pub closeness_bit: bool,
}

pub(crate) fn comp_raw(a: u64, b: u64) -> Comparison {
    Comparison::from_ordering(a.cmp(&b))
}

/// Signed floor-log distance on raw values: 0 on equality, otherwise
/// `sign(a - b) * (floor(log2(|a - b|)) + 1)`.
pub(crate) fn fld_raw(a: u64, b: u64) -> i64 {
    match a.cmp(&b) {
        Ordering::Equal => 0,
        Ordering::Greater => i64::from((a - b).ilog2()) + 1,
        Ordering::Less => -(i64::from((b - a).ilog2()) + 1),
    }
}

pub(crate) fn dist_raw(kind: DistanceFunctionKind, a: u64, b: u64) -> i64 {
    match kind {
        DistanceFunctionKind::FloorLog => fld_raw(a, b),
        DistanceFunctionKind::Exact => a as i64 - b as i64,
        DistanceFunctionKind::OrderOnlyStub => match a.cmp(&b) {
            Ordering::Equal => 0,
            Ordering::Greater => 1,
            Ordering::Less => -1,
        },
    }
}

/// Distance magnitude without sign bookkeeping; used on sorted pairs.
pub(crate) fn mag_raw(kind: DistanceFunctionKind, a: u64, b: u64) -> u64 {
    match kind {
        DistanceFunctionKind::FloorLog => {
            let gap = a.abs_diff(b);
            if gap == 0 {
                0
            } else {
                u64::from(gap.ilog2()) + 1
            }
        }
        DistanceFunctionKind::Exact => a.abs_diff(b),
        DistanceFunctionKind::OrderOnlyStub => u64::from(a != b),
    }
}

pub(crate) fn leak_raw(kind: DistanceFunctionKind, x0: u64, x1: u64, x2: u64) -> LeakOutput {
    let mut sorted = [x0, x1, x2];
    sorted.sort_unstable();
    LeakOutput {
        c01: comp_raw(x0, x1),
        c12: comp_raw(x1, x2),
        c02: comp_raw(x0, x2),
        closeness_bit: mag_raw(kind, sorted[0], sorted[1]) < mag_raw(kind, sorted[1], sorted[2]),
    }
}

fn ensure_same_width(a: Plaintext, b: Plaintext) -> Result<()> {
    if a.width == b.width {
        Ok(())
    } else {
        Err(Error::WidthMismatch(a.width, b.width))
    }
}

/// Order relation of two plaintexts of the same width.
pub fn comp(a: Plaintext, b: Plaintext) -> Result<Comparison> {
    ensure_same_width(a, b)?;
    Ok(comp_raw(a.value, b.value))
}

/// Signed floor-log distance; the default distance function.
pub fn fld(a: Plaintext, b: Plaintext) -> Result<DistanceValue> {
    ensure_same_width(a, b)?;
    Ok(DistanceValue(fld_raw(a.value, b.value)))
}

/// Distance under the selected kind; sign always matches `sign(a - b)`.
pub fn dist(kind: DistanceFunctionKind, a: Plaintext, b: Plaintext) -> Result<DistanceValue> {
    ensure_same_width(a, b)?;
    Ok(DistanceValue(dist_raw(kind, a.value, b.value)))
}

/// Leakage profile of a plaintext triple under the selected distance kind.
pub fn leak_from_dist(
    kind: DistanceFunctionKind,
    x0: Plaintext,
    x1: Plaintext,
    x2: Plaintext,
) -> Result<LeakOutput> {
    ensure_same_width(x0, x1)?;
    ensure_same_width(x1, x2)?;
    Ok(leak_raw(kind, x0.value, x1.value, x2.value))
}

/// How [`check_bisection`] explores the triple space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BisectionMode {
    /// Every sorted triple `x < y < z`; only for widths up to
    /// [`MAX_EXHAUSTIVE_WIDTH`].
    Exhaustive,
    /// `triples` random sorted triples drawn from a seeded generator.
    Sampled { triples: u64, seed: u64 },
}

/// Result of a bisection check; a counterexample is the lexicographically
/// first violating triple in exhaustive mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum BisectionOutcome {
    Holds { triples_checked: u64 },
    Counterexample { x: u64, y: u64, z: u64 },
}

impl BisectionOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, BisectionOutcome::Holds { .. })
    }
}

fn bisection_triple_ok(kind: DistanceFunctionKind, x: u64, y: u64, z: u64) -> bool {
    let outer = mag_raw(kind, x, z);
    mag_raw(kind, x, y) < outer || mag_raw(kind, y, z) < outer
}

/// Checks the bisection property of a distance function: for every
/// `x < y < z`, one of the two inner gaps is strictly smaller in magnitude
/// than the outer gap, and distinct points never have distance zero.
pub fn check_bisection(
    kind: DistanceFunctionKind,
    width: u8,
    mode: BisectionMode,
) -> Result<BisectionOutcome> {
    let max = domain_max(width)?;
    match mode {
        BisectionMode::Exhaustive => {
            if width > MAX_EXHAUSTIVE_WIDTH {
                return Err(Error::ExhaustiveBudget {
                    max: MAX_EXHAUSTIVE_WIDTH,
                    got: width,
                });
            }
            check_bisection_exhaustive(kind, max)
        }
        BisectionMode::Sampled { triples, seed } => {
            check_bisection_sampled(kind, max, triples, seed)
        }
    }
}

fn check_bisection_exhaustive(kind: DistanceFunctionKind, max: u64) -> Result<BisectionOutcome> {
    use rayon::prelude::*;

    // Distinct pairs must have nonzero distance; O(max^2) scan.
    for x in 1..=max {
        for y in (x + 1)..=max {
            if dist_raw(kind, x, y) == 0 {
                return Ok(BisectionOutcome::Counterexample { x, y, z: y });
            }
        }
    }
    let hit = (1..=max)
        .into_par_iter()
        .find_map_first(|x| {
            for y in (x + 1)..=max {
                for z in (y + 1)..=max {
                    if !bisection_triple_ok(kind, x, y, z) {
                        return Some((x, y, z));
                    }
                }
            }
            None
        });
    Ok(match hit {
        Some((x, y, z)) => BisectionOutcome::Counterexample { x, y, z },
        None => BisectionOutcome::Holds {
            triples_checked: max * (max - 1) * (max - 2) / 6,
        },
    })
}

fn check_bisection_sampled(
    kind: DistanceFunctionKind,
    max: u64,
    triples: u64,
    seed: u64,
) -> Result<BisectionOutcome> {
    use rand::Rng;
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut checked = 0u64;
    while checked < triples {
        let mut t = [
            rng.random_range(1..=max),
            rng.random_range(1..=max),
            rng.random_range(1..=max),
        ];
        t.sort_unstable();
        let [x, y, z] = t;
        if x < y && dist_raw(kind, x, y) == 0 {
            return Ok(BisectionOutcome::Counterexample { x, y, z: y });
        }
        if x == y || y == z {
            continue;
        }
        if !bisection_triple_ok(kind, x, y, z) {
            return Ok(BisectionOutcome::Counterexample { x, y, z });
        }
        checked += 1;
    }
    Ok(BisectionOutcome::Holds {
        triples_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: u64, w: u8) -> Plaintext {
        Plaintext::new(v, w).unwrap()
    }

    #[test]
    fn domain_bounds() {
        assert!(Plaintext::new(0, 4).is_err());
        assert!(Plaintext::new(17, 4).is_err());
        assert!(Plaintext::new(16, 4).is_ok());
        assert!(Plaintext::new(1, 0).is_err());
        assert!(Plaintext::new(1, 63).is_err());
        assert_eq!(domain_max(62).unwrap(), 1u64 << 62);
    }

    #[test]
    fn fld_reference_values() {
        let cases = [
            (1u64, 1u64, 0i64),
            (2, 1, 1),
            (1, 2, -1),
            (3, 1, 2),
            (4, 1, 2),
            (5, 1, 3),
            (1, 5, -3),
            (1 << 8, 1, 8),
            ((1 << 8) + 1, 1, 9),
        ];
        for (a, b, want) in cases {
            assert_eq!(fld(p(a, 10), p(b, 10)).unwrap().value(), want, "fld({a},{b})");
        }
    }

    #[test]
    fn fld_magnitude_bounded_by_width() {
        let w = 6u8;
        let max = domain_max(w).unwrap();
        for a in 1..=max {
            for b in 1..=max {
                let m = fld(p(a, w), p(b, w)).unwrap().magnitude();
                assert!(m <= u64::from(w), "|fld({a},{b})| = {m} > {w}");
            }
        }
    }

    #[test]
    fn width_mismatch_rejected() {
        assert_eq!(
            comp(p(1, 4), p(1, 5)).unwrap_err(),
            Error::WidthMismatch(4, 5)
        );
        assert!(fld(p(1, 4), p(1, 5)).is_err());
    }

    #[test]
    fn leak_reference_triples() {
        let w = 8u8;
        let out = leak_from_dist(DistanceFunctionKind::FloorLog, p(1, w), p(2, w), p(10, w))
            .unwrap();
        assert_eq!(
            out,
            LeakOutput {
                c01: Comparison::Less,
                c12: Comparison::Less,
                c02: Comparison::Less,
                closeness_bit: true,
            }
        );
        let rev = leak_from_dist(DistanceFunctionKind::FloorLog, p(10, w), p(2, w), p(1, w))
            .unwrap();
        assert_eq!(
            rev,
            LeakOutput {
                c01: Comparison::Greater,
                c12: Comparison::Greater,
                c02: Comparison::Greater,
                closeness_bit: true,
            }
        );
    }

    #[test]
    fn leak_with_ties_is_total() {
        let w = 4u8;
        let out = leak_from_dist(DistanceFunctionKind::FloorLog, p(1, w), p(1, w), p(2, w))
            .unwrap();
        assert_eq!(out.c01, Comparison::Equal);
        assert!(out.closeness_bit, "zero lower gap is strictly closer");
        let all_eq = leak_from_dist(DistanceFunctionKind::FloorLog, p(4, w), p(4, w), p(4, w))
            .unwrap();
        assert!(!all_eq.closeness_bit, "0 < 0 is false");
    }

    #[test]
    fn floor_log_bisection_holds_exhaustively() {
        let out = check_bisection(
            DistanceFunctionKind::FloorLog,
            6,
            BisectionMode::Exhaustive,
        )
        .unwrap();
        assert_eq!(
            out,
            BisectionOutcome::Holds {
                triples_checked: 64 * 63 * 62 / 6
            }
        );
    }

    #[test]
    fn exact_bisection_holds_exhaustively() {
        let out = check_bisection(DistanceFunctionKind::Exact, 5, BisectionMode::Exhaustive)
            .unwrap();
        assert!(out.holds());
    }

    #[test]
    fn order_only_stub_fails_bisection_at_first_triple() {
        let out = check_bisection(
            DistanceFunctionKind::OrderOnlyStub,
            4,
            BisectionMode::Exhaustive,
        )
        .unwrap();
        assert_eq!(out, BisectionOutcome::Counterexample { x: 1, y: 2, z: 3 });
    }

    #[test]
    fn sampled_mode_agrees_on_stub() {
        let out = check_bisection(
            DistanceFunctionKind::OrderOnlyStub,
            16,
            BisectionMode::Sampled {
                triples: 1000,
                seed: 7,
            },
        )
        .unwrap();
        assert!(!out.holds());
    }

    #[test]
    fn exhaustive_budget_enforced() {
        let err = check_bisection(
            DistanceFunctionKind::FloorLog,
            11,
            BisectionMode::Exhaustive,
        )
        .unwrap_err();
        assert_eq!(err, Error::ExhaustiveBudget { max: 10, got: 11 });
    }

    #[test]
    fn kind_round_trips_through_str() {
        for kind in [
            DistanceFunctionKind::FloorLog,
            DistanceFunctionKind::Exact,
            DistanceFunctionKind::OrderOnlyStub,
        ] {
            assert_eq!(kind.to_string().parse::<DistanceFunctionKind>().unwrap(), kind);
        }
        assert!("md5".parse::<DistanceFunctionKind>().is_err());
    }

    proptest! {
        #[test]
        fn fld_antisymmetric(a in 1u64..=1 << 16, b in 1u64..=1 << 16) {
            prop_assert_eq!(fld_raw(a, b), -fld_raw(b, a));
        }

        #[test]
        fn fld_sign_matches_order(a in 1u64..=1 << 16, b in 1u64..=1 << 16) {
            let d = fld_raw(a, b);
            prop_assert_eq!(d.signum(), (a as i64 - b as i64).signum());
        }

        #[test]
        fn fld_magnitude_brackets_gap(a in 1u64..=1 << 30, b in 1u64..=1 << 30) {
            prop_assume!(a != b);
            let z = fld_raw(a, b).unsigned_abs() as u32;
            let gap = a.abs_diff(b);
            prop_assert!(gap >= 1u64 << (z - 1));
            prop_assert!(gap < 1u64 << z);
        }

        #[test]
        fn magnitude_monotone_in_gap(
            kind in prop_oneof![
                Just(DistanceFunctionKind::FloorLog),
                Just(DistanceFunctionKind::Exact),
            ],
            base in 1u64..=1 << 20,
            g1 in 0u64..=1 << 20,
            g2 in 0u64..=1 << 20,
        ) {
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            prop_assert!(mag_raw(kind, base, base + lo) <= mag_raw(kind, base, base + hi));
        }

        #[test]
        fn closeness_bit_permutation_invariant(
            x in 1u64..=1 << 12,
            y in 1u64..=1 << 12,
            z in 1u64..=1 << 12,
        ) {
            let kind = DistanceFunctionKind::FloorLog;
            let b = leak_raw(kind, x, y, z).closeness_bit;
            for (a, c, d) in [(x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
                prop_assert_eq!(leak_raw(kind, a, c, d).closeness_bit, b);
            }
        }

        #[test]
        fn bisection_holds_on_random_floor_log_triples(
            mut t in proptest::array::uniform3(1u64..=1 << 40)
        ) {
            t.sort_unstable();
            let [x, y, z] = t;
            prop_assume!(x < y && y < z);
            prop_assert!(bisection_triple_ok(DistanceFunctionKind::FloorLog, x, y, z));
        }
    }
}
