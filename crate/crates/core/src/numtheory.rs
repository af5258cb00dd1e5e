//! Exact integer primitives: trial-division factorization, squarefree parts,
//! Jacobi symbols and p-adic valuations.
//!
//! Everything here works at "desk scale": inputs whose prime factors are
//! below [`TRIAL_DIVISION_BOUND`] apart from at most one large prime cofactor
//! that Miller-Rabin can certify deterministically.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Prime = u64;

/// Trial division runs over candidates up to this bound.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// A cofactor left after trial division and below this bound is prime.
pub const COFACTOR_BOUND: u64 = 1_000_000_000_000;

/// Prime factorization of a positive integer, factors sorted by prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub value: BigUint,
    pub factors: Vec<(Prime, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = Prime> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn exponent_of(&self, p: Prime) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Product of the listed prime powers.
    pub fn product(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, &(p, e)| acc * BigUint::from(p).pow(e))
    }
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Candidate divisors 2, 3, 5, 7, 11, 13, ... (the 6k +- 1 wheel).
fn trial_candidates() -> impl Iterator<Item = u64> {
    [2u64, 3]
        .into_iter()
        .chain((1..).flat_map(|k: u64| [6 * k - 1, 6 * k + 1]))
        .take_while(|&p| p <= TRIAL_DIVISION_BOUND)
}

/// Factors `n >= 1` by trial division up to [`TRIAL_DIVISION_BOUND`].
pub fn factor(n: &BigUint) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut factors: Vec<(Prime, u32)> = Vec::new();
    let mut push = |p: u64, e: u32| {
        if e > 0 {
            factors.push((p, e));
        }
    };

    let mut big = n.clone();
    let mut candidates = trial_candidates().peekable();

    // Large phase: divide on the BigUint until the remainder fits a u128.
    while big.bits() > 127 {
        let Some(p) = candidates.next() else { break };
        let mut e = 0;
        loop {
            let (q, r) = big.div_rem(&BigUint::from(p));
            if !r.is_zero() {
                break;
            }
            big = q;
            e += 1;
        }
        push(p, e);
    }

    let rest = match big.to_u128() {
        Some(r) => r,
        None => return Err(Error::CompositeResidue(big.to_string())),
    };
    let mut rem = rest;
    let mut exhausted = true;
    for p in candidates {
        let pp = p as u128;
        if pp * pp > rem {
            exhausted = false;
            break;
        }
        let mut e = 0;
        while rem % pp == 0 {
            rem /= pp;
            e += 1;
        }
        push(p, e);
    }
    if rem > 1 {
        let certified = !exhausted
            || rem <= COFACTOR_BOUND as u128
            || u64::try_from(rem).is_ok_and(is_prime_u64);
        match u64::try_from(rem) {
            Ok(r) if certified => push(r, 1),
            _ => return Err(Error::CompositeResidue(rem.to_string())),
        }
    }
    factors.sort_unstable();
    Ok(Factorization { value: n.clone(), factors })
}

pub fn factor_u64(n: u64) -> Result<Factorization> {
    factor(&BigUint::from(n))
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    if n == 0 {
        return Ok(false);
    }
    Ok(factor_u64(n)?.factors.iter().all(|&(_, e)| e == 1))
}

/// `sign(n)` times the product of primes dividing `n` to an odd power.
pub fn squarefree_part(n: i64) -> Result<i64> {
    if n == 0 {
        return Err(Error::ZeroInput);
    }
    let f = factor_u64(n.unsigned_abs())?;
    let core = f
        .factors
        .iter()
        .filter(|&&(_, e)| e % 2 == 1)
        .map(|&(p, _)| p as i64)
        .product::<i64>();
    Ok(n.signum() * core)
}

/// Jacobi symbol (a/n) for odd positive `n`. Returns 0 when gcd(a, n) > 1.
pub fn jacobi(a: i64, n: u64) -> Result<i8> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenModulus(n));
    }
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut sign = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        // (2/n) = -1 iff n = 3, 5 mod 8
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

/// `v_p(n)` for a nonzero integer.
pub fn valuation_int(n: &BigInt, p: Prime) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    let p = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Ok(v);
        }
        m = q;
        v += 1;
    }
}

/// `v_p(x) = v_p(numerator) - v_p(denominator)` for a nonzero rational.
pub fn valuation(x: &BigRational, p: Prime) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    Ok(valuation_int(x.numer(), p)? as i64 - valuation_int(x.denom(), p)? as i64)
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<Prime> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest prime factor table for `0..=n` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// True if the nonnegative integer is a perfect square.
pub fn is_square(n: &BigInt) -> bool {
    match n.sign() {
        Sign::Minus => false,
        Sign::NoSign => true,
        Sign::Plus => {
            let r = n.sqrt();
            &r * &r == *n
        }
    }
}

/// True if the rational is the square of a rational.
pub fn is_rational_square(x: &BigRational) -> bool {
    // BigRational is kept reduced with a positive denominator.
    is_square(x.numer()) && is_square(x.denom())
}

/// Square root of a rational square; `None` if it is not one.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if !is_rational_square(x) {
        return None;
    }
    Some(BigRational::new(x.numer().sqrt(), x.denom().sqrt()))
}
