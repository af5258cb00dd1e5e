//! Hypothesis check for Serre's surjectivity criterion for mod-ell
//! representations: ell must not divide the exponent of any prime in the
//! denominator of j, nor the point count at an auxiliary good prime.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::curve::{self, WeierstrassModel};
use crate::error::{Error, Result};
use crate::numtheory::{self, Prime};
use crate::reduction;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JExponentCheck {
    pub q: Prime,
    /// v_q(j), always negative here.
    pub valuation: i64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxCheck {
    pub q: Prime,
    pub count: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurjectivityReport {
    pub ell: Prime,
    pub j_exponent_checks: Vec<JExponentCheck>,
    pub aux: AuxCheck,
    /// Every listed check passed.
    pub overall: bool,
}

impl SurjectivityReport {
    /// v_q(j) for the potentially multiplicative primes q.
    pub fn j_exponents(&self) -> Vec<(Prime, i64)> {
        self.j_exponent_checks.iter().map(|c| (c.q, c.valuation)).collect()
    }
}

impl fmt::Display for SurjectivityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |b: bool| if b { "pass" } else { "FAIL" };
        writeln!(f, "ell = {}", self.ell)?;
        for c in &self.j_exponent_checks {
            writeln!(
                f,
                "  v_{}(j) = {:>3}   {} does not divide {}: {}",
                c.q,
                c.valuation,
                self.ell,
                c.valuation.abs(),
                mark(c.pass)
            )?;
        }
        writeln!(
            f,
            "  #E(F_{}) = {}   {} does not divide {}: {}",
            self.aux.q,
            self.aux.count,
            self.ell,
            self.aux.count,
            mark(self.aux.pass)
        )?;
        write!(
            f,
            "  overall: {}",
            if self.overall {
                "criterion hypotheses verified (surjectivity follows by Serre's criterion)"
            } else {
                "criterion hypotheses not met"
            }
        )
    }
}

/// Auxiliary good prime used by default for a table label.
pub fn default_aux_prime(label: &str) -> Option<Prime> {
    match label.to_ascii_lowercase().as_str() {
        "15a1" => Some(7),
        "21a1" => Some(5),
        _ => None,
    }
}

/// Smallest prime >= 5 of good reduction that differs from `ell`.
pub fn first_good_prime(e: &WeierstrassModel, ell: Prime) -> Prime {
    let delta = e.discriminant();
    (5u64..)
        .filter(|&q| numtheory::is_prime_u64(q) && q != ell)
        .find(|&q| !delta.mod_floor(&BigInt::from(q)).is_zero())
        .expect("a nonzero discriminant has finitely many prime factors")
}

pub fn serre_check(e: &WeierstrassModel, ell: Prime, aux: Prime) -> Result<SurjectivityReport> {
    if ell < 3 || !numtheory::is_prime_u64(ell) {
        return Err(Error::InvalidArgument(format!("ell = {ell} must be an odd prime")));
    }
    if !numtheory::is_prime_u64(aux) {
        return Err(Error::InvalidArgument(format!("auxiliary q = {aux} is not prime")));
    }
    if e.discriminant().mod_floor(&BigInt::from(aux)).is_zero() {
        return Err(Error::BadAuxPrime(aux));
    }
    let j = curve::invariants(e)?.j;
    let mut checks = Vec::new();
    if !j.denom().is_one() {
        let den = j.denom().magnitude().clone();
        for q in numtheory::factor(&den)?.primes() {
            let v = numtheory::valuation(&j, q)?;
            checks.push(JExponentCheck { q, valuation: v, pass: v.unsigned_abs() % ell != 0 });
        }
    }
    let count = reduction::count_points(e, aux)?;
    let aux = AuxCheck { q: aux, count, pass: count % ell != 0 };
    let overall = aux.pass && checks.iter().all(|c| c.pass);
    Ok(SurjectivityReport { ell, j_exponent_checks: checks, aux, overall })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e15() -> WeierstrassModel {
        WeierstrassModel::from_coeffs([1, 1, 1, -10, -10]).unwrap()
    }

    fn e21() -> WeierstrassModel {
        WeierstrassModel::from_coeffs([1, 0, 0, -4, -1]).unwrap()
    }

    #[test]
    fn table_curve_reports() {
        let r = serre_check(&e15(), 5, 7).unwrap();
        assert_eq!(r.j_exponents(), vec![(3, -4), (5, -4)]);
        assert_eq!(r.aux.count, 8);
        assert!(r.overall);

        let r = serre_check(&e21(), 3, 5).unwrap();
        assert_eq!(r.j_exponents(), vec![(3, -4), (7, -2)]);
        assert_eq!(r.aux.count, 8);
        assert!(r.overall);
    }

    #[test]
    fn failing_hypotheses_are_reported() {
        assert!(matches!(serre_check(&e15(), 2, 7), Err(Error::InvalidArgument(_))));
        assert!(matches!(serre_check(&e15(), 9, 7), Err(Error::InvalidArgument(_))));
        assert!(matches!(serre_check(&e15(), 5, 3), Err(Error::BadAuxPrime(3))));
        // 11a1: j = -2^12 31^3 / 11^5
        let e11 = WeierstrassModel::from_coeffs([0, -1, 1, -10, -20]).unwrap();
        let r = serre_check(&e11, 5, 3).unwrap();
        assert_eq!(r.j_exponents(), vec![(11, -5)]);
        assert!(!r.j_exponent_checks[0].pass);
        assert!(!r.overall);
    }

    #[test]
    fn aux_count_divisible_by_ell_fails() {
        let e = e15();
        let q = (7u64..200)
            .filter(|&q| numtheory::is_prime_u64(q))
            .find(|&q| reduction::count_points(&e, q).is_ok_and(|c| c % 3 == 0))
            .unwrap();
        let r = serre_check(&e, 3, q).unwrap();
        assert!(!r.aux.pass);
        assert!(!r.overall);
    }

    #[test]
    fn default_aux_primes() {
        assert_eq!(default_aux_prime("15A1"), Some(7));
        assert_eq!(default_aux_prime("21a1"), Some(5));
        assert_eq!(default_aux_prime("11a1"), None);
        assert_eq!(first_good_prime(&e15(), 5), 7);
        assert_eq!(first_good_prime(&e21(), 5), 11);
    }
}
