//! Local and global root numbers of elliptic curves over Q.
//!
//! Local rules, by place v:
//! * archimedean, or split multiplicative: -1
//! * good, or nonsplit multiplicative: +1
//! * additive, potentially multiplicative, residue characteristic p >= 3:
//!   (-1/p)
//! * additive, potentially good, p >= 5: (-1)^floor(v_p(Delta_min) * p / 12)
//!
//! Anything else (additive at 2, additive potentially good at 3) is reported
//! as unsupported rather than guessed.

use std::fmt;
use std::ops::Mul;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::curve::{self, WeierstrassModel};
use crate::error::{Error, Result};
use crate::numtheory::{self, Prime};
use crate::reduction::{self, ReductionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i8(v: i8) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// (-1)^n
    pub fn parity(n: u64) -> Sign {
        if n.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.to_i8())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Infinity,
    Finite(Prime),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => f.write_str("inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Which local rule produced a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    Archimedean,
    Good,
    SplitMult,
    NonsplitMult,
    AddPotMult,
    AddPotGood,
}

impl CaseTag {
    /// Short description of the rule that fired.
    pub fn rule(self) -> &'static str {
        match self {
            CaseTag::Archimedean => "real place: -1",
            CaseTag::SplitMult => "split multiplicative: -1",
            CaseTag::Good => "good: +1",
            CaseTag::NonsplitMult => "nonsplit multiplicative: +1",
            CaseTag::AddPotMult => "additive pot. multiplicative: (-1/p)",
            CaseTag::AddPotGood => "additive pot. good: (-1)^floor(v(Delta_min) p / 12)",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::Archimedean => "archimedean",
            CaseTag::Good => "good",
            CaseTag::SplitMult => "split-mult",
            CaseTag::NonsplitMult => "nonsplit-mult",
            CaseTag::AddPotMult => "add-pot-mult",
            CaseTag::AddPotGood => "add-pot-good",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LocalFactor {
    pub place: Place,
    pub sign: Sign,
    pub case: CaseTag,
}

/// Global root number together with the local factors it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootNumber {
    pub value: Sign,
    pub local_factors: Vec<LocalFactor>,
}

impl RootNumber {
    fn from_factors(local_factors: Vec<LocalFactor>) -> Self {
        let value = local_factors.iter().fold(Sign::Plus, |acc, f| acc * f.sign);
        RootNumber { value, local_factors }
    }

    /// The recorded value is the product of the ledger.
    pub fn is_consistent(&self) -> bool {
        self.value == self.local_factors.iter().fold(Sign::Plus, |acc, f| acc * f.sign)
    }

    pub fn factor_at(&self, place: Place) -> Option<&LocalFactor> {
        self.local_factors.iter().find(|f| f.place == place)
    }
}

impl fmt::Display for RootNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w = {}  [", self.value)?;
        for (i, lf) in self.local_factors.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {} {}", lf.place, lf.sign, lf.case)?;
        }
        f.write_str("]")
    }
}

/// Local root number at a place.
pub fn local_root_number(e: &WeierstrassModel, place: Place) -> Result<LocalFactor> {
    let p = match place {
        Place::Infinity => {
            return Ok(LocalFactor { place, sign: Sign::Minus, case: CaseTag::Archimedean });
        }
        Place::Finite(p) => p,
    };
    if p == 2 {
        return if e.discriminant().is_odd() {
            Ok(LocalFactor { place, sign: Sign::Plus, case: CaseTag::Good })
        } else {
            Err(Error::UnsupportedPlace { place: 2, reason: "bad reduction at 2" })
        };
    }
    let data = reduction::classify(e, p)?;
    let (sign, case) = match data.kind {
        ReductionKind::Good => (Sign::Plus, CaseTag::Good),
        ReductionKind::MultSplit => (Sign::Minus, CaseTag::SplitMult),
        ReductionKind::MultNonsplit => (Sign::Plus, CaseTag::NonsplitMult),
        ReductionKind::AddPotMult => (Sign::parity((p - 1) / 2), CaseTag::AddPotMult),
        ReductionKind::AddPotGood => {
            if p < 5 {
                return Err(Error::UnsupportedPlace {
                    place: p,
                    reason: "additive potentially good reduction at 3",
                });
            }
            let minimal = curve::minimalize_at(e, p)?;
            let v = numtheory::valuation_int(&minimal.discriminant(), p)? as u64;
            (Sign::parity(v * p / 12), CaseTag::AddPotGood)
        }
    };
    Ok(LocalFactor { place, sign, case })
}

/// Product of local root numbers over infinity and the bad primes.
pub fn global_root_number(e: &WeierstrassModel) -> Result<RootNumber> {
    let mut factors = vec![local_root_number(e, Place::Infinity)?];
    for p in reduction::discriminant_primes(e)? {
        let lf = local_root_number(e, Place::Finite(p))?;
        if lf.case != CaseTag::Good {
            factors.push(lf);
        }
    }
    let rn = RootNumber::from_factors(factors);
    debug_assert!(rn.is_consistent());
    Ok(rn)
}

/// Checks the hypotheses of the twist formula and returns the conductor.
fn twist_formula_conductor(e: &WeierstrassModel, d: i64) -> Result<u64> {
    let violation = |s: String| Error::HypothesisViolation(s);
    let n = reduction::conductor(e).map_err(|err| violation(format!("conductor unavailable: {err}")))?;
    if n % 2 == 0 {
        return Err(violation(format!("even conductor {n}")));
    }
    if let Some((p, _)) = numtheory::factor_u64(n)?.factors.into_iter().find(|&(_, k)| k > 1) {
        return Err(violation(format!("additive reduction at {p}")));
    }
    if d <= 0 {
        return Err(violation(format!("d = {d} is not positive")));
    }
    if !numtheory::is_squarefree(d as u64)? {
        return Err(violation(format!("d = {d} is not squarefree")));
    }
    if d % 4 != 1 {
        return Err(violation(format!("d = {d} is not 1 mod 4")));
    }
    if (d as u64).gcd(&n) != 1 {
        return Err(violation(format!("d = {d} shares a factor with N = {n}")));
    }
    Ok(n)
}

/// w(E^(d)) = (d/N) w(E) for semistable E of odd conductor N, squarefree
/// d > 0, d = 1 mod 4, gcd(d, N) = 1.
pub fn twist_root_number_formula(e: &WeierstrassModel, d: i64) -> Result<Sign> {
    let n = twist_formula_conductor(e, d)?;
    let chi = Sign::from_i8(numtheory::jacobi(d, n)?).expect("d coprime to N");
    Ok(chi * global_root_number(e)?.value)
}

/// One row of a formula-versus-direct comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistComparison {
    pub d: i64,
    pub formula: Sign,
    pub direct: RootNumber,
}

impl TwistComparison {
    pub fn agrees(&self) -> bool {
        self.formula == self.direct.value
    }
}

/// Every d the twist formula applies to, up to `dmax`.
pub fn formula_twists(e: &WeierstrassModel, dmax: i64) -> Result<Vec<i64>> {
    let n = reduction::conductor(e)?;
    let mut out = Vec::new();
    for d in (1..=dmax).step_by(4) {
        if (d as u64).gcd(&n) == 1 && numtheory::is_squarefree(d as u64)? {
            out.push(d);
        }
    }
    Ok(out)
}

/// Compares the twist formula with the local-product root number of the
/// explicitly constructed twist, for every applicable d <= dmax.
pub fn twist_formula_sweep(e: &WeierstrassModel, dmax: i64) -> Result<Vec<TwistComparison>> {
    let ds = formula_twists(e, dmax)?;
    ds.par_iter()
        .map(|&d| {
            let formula = twist_root_number_formula(e, d)?;
            let twist = curve::quadratic_twist(e, d)?;
            let direct = global_root_number(&twist)?;
            Ok(TwistComparison { d, formula, direct })
        })
        .collect()
}
