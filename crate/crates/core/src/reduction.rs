//! Point counts over prime fields, reduction types at odd primes and the
//! conductor.
//!
//! Point counts always include the point at infinity and, for bad primes,
//! the singular point of the reduced curve. With that convention the value
//! `p + 1 - #E(F_p)` is +1 for split multiplicative, -1 for nonsplit
//! multiplicative and 0 for additive reduction, which is how split and
//! nonsplit are told apart below.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::curve::{self, WeierstrassModel};
use crate::error::{Error, Result};
use crate::numtheory::{self, Prime};

/// Largest prime accepted by [`count_points`].
pub const POINT_COUNT_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ReductionKind {
    Good,
    MultSplit,
    MultNonsplit,
    AddPotGood,
    AddPotMult,
}

impl ReductionKind {
    pub fn is_good(self) -> bool {
        self == ReductionKind::Good
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, ReductionKind::MultSplit | ReductionKind::MultNonsplit)
    }

    pub fn is_additive(self) -> bool {
        matches!(self, ReductionKind::AddPotGood | ReductionKind::AddPotMult)
    }

    /// Required value of p + 1 - #E(F_p) at a bad prime.
    pub fn bad_trace(self) -> Option<i64> {
        match self {
            ReductionKind::Good => None,
            ReductionKind::MultSplit => Some(1),
            ReductionKind::MultNonsplit => Some(-1),
            ReductionKind::AddPotGood | ReductionKind::AddPotMult => Some(0),
        }
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionKind::Good => "good",
            ReductionKind::MultSplit => "split multiplicative",
            ReductionKind::MultNonsplit => "nonsplit multiplicative",
            ReductionKind::AddPotGood => "additive, potentially good",
            ReductionKind::AddPotMult => "additive, potentially multiplicative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionData {
    pub p: Prime,
    pub kind: ReductionKind,
    /// Projective points of the reduced equation, singular point included.
    pub points: u64,
    pub a_p: i64,
}

impl ReductionData {
    /// Checks the kind against `p + 1 - points` (and Hasse at good primes).
    pub fn is_consistent(&self) -> bool {
        let trace = self.p as i64 + 1 - self.points as i64;
        match self.kind.bad_trace() {
            None => trace == self.a_p && (self.a_p * self.a_p) as u64 <= 4 * self.p,
            Some(t) => trace == t && self.a_p == t,
        }
    }
}

fn check_prime(p: Prime) -> Result<()> {
    if p > POINT_COUNT_BOUND {
        return Err(Error::PrimeTooLarge(p));
    }
    if !numtheory::is_prime_u64(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    Ok(())
}

fn reduce(n: &BigInt, p: Prime) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

/// Reference count by enumerating all of F_p x F_p. O(p^2).
pub fn count_points_naive(e: &WeierstrassModel, p: Prime) -> Result<u64> {
    check_prime(p)?;
    let [a1, a2, a3, a4, a6] = e.coeffs().map(|a| reduce(a, p));
    let mut count = 1u64;
    for x in 0..p {
        let rhs = (((x + a2) % p * x % p + a4) % p * x % p + a6) % p;
        for y in 0..p {
            let lhs = (y * y % p + a1 * x % p * y % p + a3 * y % p) % p;
            if lhs == rhs {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Number of square roots of each residue mod an odd prime.
pub(crate) struct SquareTable {
    p: u64,
    roots: Vec<u8>,
}

impl SquareTable {
    pub(crate) fn new(p: u64) -> Self {
        let mut roots = vec![0u8; p as usize];
        for y in 0..p {
            roots[(y * y % p) as usize] += 1;
        }
        SquareTable { p, roots }
    }

    /// #{x in F_p : (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6}, summed
    /// over x, plus the point at infinity.
    pub(crate) fn count(&self, e: &WeierstrassModel) -> u64 {
        let p = self.p;
        let b2 = reduce(&(&e.a1 * &e.a1 + 4 * &e.a2), p);
        let b4x2 = reduce(&(2 * (2 * &e.a4 + &e.a1 * &e.a3)), p);
        let b6 = reduce(&(&e.a3 * &e.a3 + 4 * &e.a6), p);
        let four = 4 % p;
        let mut count = 1u64;
        for x in 0..p {
            let f = (((four * x + b2) % p * x + b4x2) % p * x + b6) % p;
            count += self.roots[f as usize] as u64;
        }
        count
    }
}

/// #E(F_p), projective, singular point included. O(p) for odd p.
pub fn count_points(e: &WeierstrassModel, p: Prime) -> Result<u64> {
    check_prime(p)?;
    if p == 2 {
        return count_points_naive(e, p);
    }
    Ok(SquareTable::new(p).count(e))
}

fn valuation_or_inf(n: &BigInt, p: Prime) -> u32 {
    if n.is_zero() {
        u32::MAX
    } else {
        numtheory::valuation_int(n, p).expect("nonzero")
    }
}

/// Model that is minimal at `p` (p odd), or an error when that cannot be
/// produced or certified.
pub fn p_minimal_model(e: &WeierstrassModel, p: Prime) -> Result<WeierstrassModel> {
    match p {
        2 => Err(Error::UnsupportedPrime(2)),
        3 => {
            if curve::is_minimal_at(e, 3)? {
                Ok(e.clone())
            } else {
                Err(Error::NonMinimalModel(3))
            }
        }
        _ => curve::minimalize_at(e, p),
    }
}

/// Reduction type at an odd prime. Models are minimalized first for p >= 5.
pub fn classify(e: &WeierstrassModel, p: Prime) -> Result<ReductionData> {
    check_prime(p)?;
    let model = p_minimal_model(e, p)?;
    let inv = curve::invariants(&model)?;
    let v_delta = valuation_or_inf(&inv.delta, p);
    let v_c4 = valuation_or_inf(&inv.c4, p);
    let points = count_points(&model, p)?;
    let trace = p as i64 + 1 - points as i64;

    let kind = if v_delta == 0 {
        ReductionKind::Good
    } else if v_c4 == 0 {
        match trace {
            1 => ReductionKind::MultSplit,
            -1 => ReductionKind::MultNonsplit,
            t => unreachable!("multiplicative reduction with p + 1 - #E = {t}"),
        }
    } else if numtheory::valuation(&inv.j, p).is_ok_and(|v| v < 0) {
        ReductionKind::AddPotMult
    } else {
        ReductionKind::AddPotGood
    };
    let a_p = if kind.is_additive() { 0 } else { trace };
    let data = ReductionData { p, kind, points, a_p };
    debug_assert!(data.is_consistent(), "{data:?}");
    Ok(data)
}

/// Primes dividing the discriminant of the given model.
pub fn discriminant_primes(e: &WeierstrassModel) -> Result<Vec<Prime>> {
    let delta = e.discriminant();
    Ok(numtheory::factor(delta.magnitude())?.primes().collect())
}

/// Bad primes with their reduction data. 2 must be a good prime (or the
/// model must be multiplicative there, in which case it is skipped here and
/// handled by [`conductor`]).
pub fn bad_reduction(e: &WeierstrassModel) -> Result<Vec<ReductionData>> {
    let mut out = Vec::new();
    for p in discriminant_primes(e)? {
        let data = classify(e, p)?;
        if !data.kind.is_good() {
            out.push(data);
        }
    }
    Ok(out)
}

/// Conductor: p for multiplicative primes, p^2 for additive primes p >= 5.
///
/// The model is assumed minimal at 2 and 3. Additive reduction at 2 or 3 is
/// rejected.
pub fn conductor(e: &WeierstrassModel) -> Result<u64> {
    let inv = curve::invariants(e)?;
    let mut n: u64 = 1;
    let overflow = || Error::InvalidArgument("conductor does not fit in 64 bits".into());
    for p in discriminant_primes(e)? {
        let exponent = match p {
            2 | 3 => {
                if valuation_or_inf(&inv.c4, p) == 0 {
                    1
                } else {
                    return Err(Error::UnsupportedReduction(p));
                }
            }
            _ => {
                let kind = classify(e, p)?.kind;
                if kind.is_good() {
                    0
                } else if kind.is_multiplicative() {
                    1
                } else {
                    2
                }
            }
        };
        n = n.checked_mul(p.checked_pow(exponent).ok_or_else(overflow)?).ok_or_else(overflow)?;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::quadratic_twist;

    fn e15() -> WeierstrassModel {
        WeierstrassModel::from_coeffs([1, 1, 1, -10, -10]).unwrap()
    }

    fn e21() -> WeierstrassModel {
        WeierstrassModel::from_coeffs([1, 0, 0, -4, -1]).unwrap()
    }

    #[test]
    fn point_count_examples() {
        assert_eq!(count_points(&e15(), 7).unwrap(), 8);
        assert_eq!(count_points(&e21(), 5).unwrap(), 8);
        assert_eq!(count_points(&e15(), 3).unwrap(), 5);
        assert_eq!(count_points_naive(&e15(), 3).unwrap(), 5);
        assert_eq!(count_points(&e15(), 5).unwrap(), 5);
    }

    #[test]
    fn point_count_errors() {
        assert_eq!(count_points(&e15(), 1_000_003), Err(Error::PrimeTooLarge(1_000_003)));
        assert!(matches!(count_points(&e15(), 9), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn fast_count_matches_naive() {
        for e in [e15(), e21(), quadratic_twist(&e15(), 17).unwrap(), quadratic_twist(&e21(), -3).unwrap()] {
            for p in numtheory::primes_up_to(60) {
                assert_eq!(count_points(&e, p).unwrap(), count_points_naive(&e, p).unwrap(), "p = {p}");
            }
        }
    }

    #[test]
    fn classify_table_curves() {
        let d = classify(&e15(), 3).unwrap();
        assert_eq!((d.kind, d.a_p, d.points), (ReductionKind::MultNonsplit, -1, 5));
        let d = classify(&e15(), 5).unwrap();
        assert_eq!((d.kind, d.a_p), (ReductionKind::MultSplit, 1));
        let d = classify(&e15(), 7).unwrap();
        assert_eq!((d.kind, d.a_p), (ReductionKind::Good, 0));
        assert!(classify(&e21(), 3).unwrap().kind.is_multiplicative());
        assert!(classify(&e21(), 7).unwrap().kind.is_multiplicative());
    }

    #[test]
    fn classify_twist_at_twisting_prime() {
        let t = quadratic_twist(&e15(), 17).unwrap();
        let d = classify(&t, 17).unwrap();
        assert_eq!(d.kind, ReductionKind::AddPotGood);
        assert!(d.is_consistent());
        // twisting a multiplicative prime gives potentially multiplicative
        let t = quadratic_twist(&e15(), -5).unwrap();
        assert_eq!(classify(&t, 5).unwrap().kind, ReductionKind::AddPotMult);
    }

    #[test]
    fn classify_rejects_two_and_nonminimal_three() {
        assert_eq!(classify(&e15(), 2), Err(Error::UnsupportedPrime(2)));
        let u = BigInt::from(3);
        let e = e15();
        let scaled = WeierstrassModel::new(
            &e.a1 * &u,
            &e.a2 * u.pow(2),
            &e.a3 * u.pow(3),
            &e.a4 * u.pow(4),
            &e.a6 * u.pow(6),
        )
        .unwrap();
        assert_eq!(classify(&scaled, 3), Err(Error::NonMinimalModel(3)));
    }

    #[test]
    fn conductors() {
        assert_eq!(conductor(&e15()).unwrap(), 15);
        assert_eq!(conductor(&e21()).unwrap(), 21);
        assert_eq!(conductor(&quadratic_twist(&e15(), 17).unwrap()).unwrap(), 17 * 17 * 15);
        // d = 3 mod 4 twists pick up additive reduction at 2
        assert_eq!(
            conductor(&quadratic_twist(&e15(), 7).unwrap()),
            Err(Error::UnsupportedReduction(2))
        );
    }

    #[test]
    fn twist_at_multiplicative_prime_is_additive() {
        // 3 | d: not minimal-certifiable at 3 or additive at 3
        let t = quadratic_twist(&e15(), -3).unwrap();
        assert!(conductor(&t).is_err());
    }

    #[test]
    fn hasse_bound_and_table_consistency() {
        for e in [e15(), e21(), quadratic_twist(&e21(), 17).unwrap()] {
            for p in numtheory::primes_up_to(200).into_iter().skip(1) {
                let d = classify(&e, p).unwrap();
                assert!(d.is_consistent(), "{d:?}");
            }
        }
    }
}
