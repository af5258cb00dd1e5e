//! Admissible tuples (d_1, ..., d_r) of real quadratic discriminants for
//! X = X0(3p), p in {5, 7}, and the per-character twist check over the
//! composite field K = Q(sqrt d_1, ..., sqrt d_r).

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigUint;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{self, WeierstrassModel};
use crate::descent::Character;
use crate::error::{Error, Result};
use crate::lseries::{self, LSeriesConfig, LValueEstimate, Verdict};
use crate::numtheory::{self, Prime};
use crate::rootnum::{self, RootNumber, Sign};

pub const MAX_BOUND: u64 = 10_000;

/// Guard against combinatorial blow-up in [`search`].
pub const MAX_CANDIDATE_TUPLES: u128 = 50_000_000;

fn check_p(p: u64) -> Result<()> {
    if p == 5 || p == 7 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p = {p}: only 5 and 7 are supported")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AdmissibleTuple {
    pub p: u64,
    pub ds: Vec<u64>,
}

impl AdmissibleTuple {
    pub fn rank(&self) -> usize {
        self.ds.len()
    }
}

impl fmt::Display for AdmissibleTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.ds.iter().join(", "))
    }
}

/// Admissibility conditions, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    NonEmpty,
    Squarefree,
    OneModFour,
    CoprimeTo3p,
    JacobiOne,
    IndependentModSquares,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::NonEmpty => "at least one d",
            Condition::Squarefree => "d squarefree",
            Condition::OneModFour => "d = 1 mod 4",
            Condition::CoprimeTo3p => "gcd(d, 3p) = 1",
            Condition::JacobiOne => "(d / 3p) = 1",
            Condition::IndependentModSquares => "no subset product is a square",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibilityFailure {
    pub condition: Condition,
    /// Index of the offending d; `None` for conditions on the whole tuple.
    pub index: Option<usize>,
}

impl fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "d_{} fails: {}", i + 1, self.condition),
            None => write!(f, "tuple fails: {}", self.condition),
        }
    }
}

/// The first four conditions, which concern a single d.
pub fn single_condition_failure(p: u64, d: u64) -> Result<Option<Condition>> {
    let n = 3 * p;
    if d == 0 || !numtheory::is_squarefree(d)? {
        return Ok(Some(Condition::Squarefree));
    }
    if d % 4 != 1 {
        return Ok(Some(Condition::OneModFour));
    }
    if d.gcd(&n) != 1 {
        return Ok(Some(Condition::CoprimeTo3p));
    }
    if numtheory::jacobi(d as i64, n)? != 1 {
        return Ok(Some(Condition::JacobiOne));
    }
    Ok(None)
}

/// Checks the conditions in order and names the first one that fails.
pub fn is_admissible(p: u64, ds: &[u64]) -> Result<std::result::Result<AdmissibleTuple, AdmissibilityFailure>> {
    check_p(p)?;
    if ds.is_empty() {
        return Ok(Err(AdmissibilityFailure { condition: Condition::NonEmpty, index: None }));
    }
    for condition in [Condition::Squarefree, Condition::OneModFour, Condition::CoprimeTo3p, Condition::JacobiOne] {
        for (i, &d) in ds.iter().enumerate() {
            let first = single_condition_failure(p, d)?;
            if first == Some(condition) {
                return Ok(Err(AdmissibilityFailure { condition, index: Some(i) }));
            }
        }
    }
    if !subset_products_nonsquare(ds) {
        return Ok(Err(AdmissibilityFailure { condition: Condition::IndependentModSquares, index: None }));
    }
    Ok(Ok(AdmissibleTuple { p, ds: ds.to_vec() }))
}

/// No nonempty subset of `ds` multiplies to a perfect square, by enumeration.
pub fn subset_products_nonsquare(ds: &[u64]) -> bool {
    (1u64..1 << ds.len()).all(|mask| {
        let product: BigUint = ds
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &d)| BigUint::from(d))
            .product();
        product.sqrt().pow(2) != product
    })
}

/// Rank over GF(2) of the exponent vectors of `ds`.
pub fn exponent_rank_mod2(ds: &[u64]) -> Result<usize> {
    let factored: Vec<Vec<(Prime, u32)>> =
        ds.iter().map(|&d| numtheory::factor_u64(d).map(|f| f.factors)).collect::<Result<_>>()?;
    let primes: Vec<Prime> = factored.iter().flatten().map(|&(q, _)| q).collect::<BTreeSet<_>>().into_iter().collect();
    let mut rows: Vec<Vec<bool>> = factored
        .iter()
        .map(|f| primes.iter().map(|q| f.iter().any(|&(p, e)| p == *q && e % 2 == 1)).collect())
        .collect();
    let mut rank = 0;
    for col in 0..primes.len() {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        for i in 0..rows.len() {
            if i != rank && rows[i][col] {
                let pivot_row = rows[rank].clone();
                for (a, b) in rows[i].iter_mut().zip(pivot_row) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// Squarefree part of the product of the d_i on which s is -1.
pub fn character_discriminant(tuple: &AdmissibleTuple, s: &Character) -> Result<u64> {
    if s.rank() != tuple.rank() {
        return Err(Error::InvalidArgument(format!(
            "character of length {} for a tuple of length {}",
            s.rank(),
            tuple.rank()
        )));
    }
    let mut odd = BTreeSet::new();
    for (d, sign) in tuple.ds.iter().zip(&s.signs) {
        if *sign == Sign::Minus {
            for (q, e) in numtheory::factor_u64(*d)?.factors {
                if e % 2 == 1 && !odd.remove(&q) {
                    odd.insert(q);
                }
            }
        }
    }
    odd.into_iter().try_fold(1u64, |acc, q| {
        acc.checked_mul(q).ok_or_else(|| Error::InvalidArgument("character discriminant overflows".into()))
    })
}

/// All admissible d_1 < ... < d_r <= bound, in lexicographic order.
pub fn search(p: u64, r: usize, bound: u64) -> Result<Vec<AdmissibleTuple>> {
    check_p(p)?;
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    if bound > MAX_BOUND {
        return Err(Error::InvalidArgument(format!("bound {bound} exceeds {MAX_BOUND}")));
    }
    let mut candidates = Vec::new();
    for d in 1..=bound {
        if single_condition_failure(p, d)?.is_none() {
            candidates.push(d);
        }
    }
    let n = candidates.len() as u128;
    let combos = (0..r as u128).fold(1u128, |acc, i| acc * (n.saturating_sub(i)) / (i + 1));
    if combos > MAX_CANDIDATE_TUPLES {
        return Err(Error::InvalidArgument(format!("{combos} candidate tuples exceed {MAX_CANDIDATE_TUPLES}")));
    }
    Ok(candidates
        .into_iter()
        .combinations(r)
        .filter(|ds| subset_products_nonsquare(ds))
        .map(|ds| AdmissibleTuple { p, ds })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterCheck {
    pub character: Character,
    pub discriminant: u64,
    pub root_number: RootNumber,
    /// Root number predicted by the twist formula (for the trivial character,
    /// the base curve's own root number).
    pub formula: Sign,
    pub lvalue: LValueEstimate,
}

impl CharacterCheck {
    pub fn formula_agrees(&self) -> bool {
        self.formula == self.root_number.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// Every twist has root number +1 and nonzero L-value evidence.
    Verified,
    RootNumberObstruction,
    InconclusiveLValue,
    /// Direct and formula root numbers disagree somewhere.
    FormulaMismatch,
    NotAdmissible,
}

impl Outcome {
    pub fn is_verified(self) -> bool {
        self == Outcome::Verified
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Verified => {
                "Verified*: every character twist has root number +1 and L(E,1) != 0 beyond the tail \
                 bound (* rank 0 conditional on analytic rank 0 implying rank 0)"
            }
            Outcome::RootNumberObstruction => "root number obstruction: some twist has root number -1",
            Outcome::InconclusiveLValue => "inconclusive: some L-value is not separated from zero",
            Outcome::FormulaMismatch => "twist formula disagrees with the local product",
            Outcome::NotAdmissible => "tuple is not admissible",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub p: u64,
    pub ds: Vec<u64>,
    pub failure: Option<AdmissibilityFailure>,
    pub per_character: Vec<CharacterCheck>,
    /// Ramification facts implied by admissibility.
    pub unramified: Vec<String>,
    pub overall: Outcome,
}

fn aggregate(checks: &[CharacterCheck]) -> Outcome {
    if checks.iter().any(|c| !c.formula_agrees()) {
        Outcome::FormulaMismatch
    } else if checks.iter().any(|c| c.root_number.value == Sign::Minus) {
        Outcome::RootNumberObstruction
    } else if checks.iter().any(|c| c.lvalue.verdict != Verdict::NonzeroEvidence) {
        Outcome::InconclusiveLValue
    } else {
        Outcome::Verified
    }
}

fn check_character(
    x: &WeierstrassModel,
    base_sign: Sign,
    tuple: &AdmissibleTuple,
    s: &Character,
    config: &LSeriesConfig,
) -> Result<CharacterCheck> {
    let discriminant = character_discriminant(tuple, s)?;
    let (twist, formula) = if discriminant == 1 {
        (x.clone(), base_sign)
    } else {
        let d = discriminant as i64;
        (curve::quadratic_twist(x, d)?, rootnum::twist_root_number_formula(x, d)?)
    };
    let root_number = rootnum::global_root_number(&twist)?;
    let lvalue = lseries::l_value_with_retry(&twist, config)?;
    Ok(CharacterCheck { character: s.clone(), discriminant, root_number, formula, lvalue })
}

/// Runs every character twist of `x` over the field cut out by `ds`.
pub fn check_hypothesis_for(
    x: &WeierstrassModel,
    p: u64,
    ds: &[u64],
    config: &LSeriesConfig,
) -> Result<HypothesisReport> {
    let tuple = match is_admissible(p, ds)? {
        Ok(t) => t,
        Err(failure) => {
            return Ok(HypothesisReport {
                p,
                ds: ds.to_vec(),
                failure: Some(failure),
                per_character: Vec::new(),
                unramified: Vec::new(),
                overall: Outcome::NotAdmissible,
            })
        }
    };
    let base_sign = rootnum::global_root_number(x)?.value;
    let per_character = Character::all(tuple.rank())
        .par_iter()
        .map(|s| {
            check_character(x, base_sign, &tuple, s, config)
                .map_err(|e| Error::InCharacter { character: s.to_string(), source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let unramified = vec![
        "every d_i is odd and 1 mod 4, so K/Q is unramified at 2".to_string(),
        format!("every d_i is prime to {}, so K/Q is unramified at 3 and {p}", 3 * p),
    ];
    let overall = aggregate(&per_character);
    Ok(HypothesisReport { p, ds: ds.to_vec(), failure: None, per_character, unramified, overall })
}

/// [`check_hypothesis_for`] with X = X0(3p) from the bundled table.
pub fn check_hypothesis(p: u64, ds: &[u64], config: &LSeriesConfig) -> Result<HypothesisReport> {
    check_p(p)?;
    check_hypothesis_for(&curve::x0(p)?, p, ds, config)
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p = {}, d = [{}]", self.p, self.ds.iter().join(", "))?;
        if let Some(failure) = &self.failure {
            writeln!(f, "  {failure}")?;
        }
        if !self.per_character.is_empty() {
            writeln!(f, "  {:<10} {:>12} {:>5} {:>8}  L-value", "character", "d_s", "w", "formula")?;
        }
        for c in &self.per_character {
            writeln!(
                f,
                "  {:<10} {:>12} {:>5} {:>8}  {}",
                c.character.to_string(),
                c.discriminant,
                c.root_number.value.to_string(),
                c.formula.to_string(),
                c.lvalue
            )?;
        }
        for note in &self.unramified {
            writeln!(f, "  {note}")?;
        }
        write!(f, "  overall: {}", self.overall)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rejected(p: u64, ds: &[u64]) -> AdmissibilityFailure {
        is_admissible(p, ds).unwrap().unwrap_err()
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(5, &[17, 61]).unwrap().is_ok());
        assert_eq!(rejected(5, &[13]), AdmissibilityFailure { condition: Condition::JacobiOne, index: Some(0) });
        assert_eq!(rejected(5, &[21]), AdmissibilityFailure { condition: Condition::CoprimeTo3p, index: Some(0) });
        assert_eq!(rejected(5, &[17, 9]).condition, Condition::Squarefree);
        assert_eq!(rejected(5, &[17, 19]), AdmissibilityFailure { condition: Condition::OneModFour, index: Some(1) });
        assert_eq!(rejected(5, &[1]).condition, Condition::IndependentModSquares);
        assert_eq!(rejected(5, &[17, 17]).condition, Condition::IndependentModSquares);
        assert_eq!(rejected(5, &[]).condition, Condition::NonEmpty);
        assert!(is_admissible(11, &[17]).is_err());
    }

    #[test]
    fn conditions_are_checked_in_order() {
        // 21 fails coprimality, 13 fails Jacobi; coprimality is reported first
        assert_eq!(rejected(5, &[13, 21]).condition, Condition::CoprimeTo3p);
        assert_eq!(rejected(5, &[13, 21]).index, Some(1));
    }

    #[test]
    fn independence_two_ways() {
        for ds in [vec![17, 61], vec![17, 61, 1037], vec![1], vec![109, 409, 17 * 109 * 409], vec![5, 6, 30]] {
            let by_rank = exponent_rank_mod2(&ds).unwrap() == ds.len();
            assert_eq!(by_rank, subset_products_nonsquare(&ds), "{ds:?}");
        }
    }

    #[test]
    fn discriminants() {
        let t = AdmissibleTuple { p: 5, ds: vec![17, 61] };
        assert_eq!(character_discriminant(&t, &Character::trivial(2)).unwrap(), 1);
        assert_eq!(character_discriminant(&t, &Character::from_mask(2, 0b01)).unwrap(), 17);
        assert_eq!(character_discriminant(&t, &Character::from_mask(2, 0b11)).unwrap(), 1037);
        let t = AdmissibleTuple { p: 7, ds: vec![85, 221] };
        assert_eq!(character_discriminant(&t, &Character::from_mask(2, 0b11)).unwrap(), 65);
        assert!(character_discriminant(&t, &Character::trivial(3)).is_err());
    }

    #[test]
    fn small_searches() {
        let one: Vec<Vec<u64>> = search(5, 1, 20).unwrap().into_iter().map(|t| t.ds).collect();
        assert_eq!(one, vec![vec![17]]);
        let two = search(5, 2, 100).unwrap();
        assert!(two.iter().any(|t| t.ds == [17, 61]));
        for t in search(7, 1, 300).unwrap() {
            assert_eq!(numtheory::jacobi(t.ds[0] as i64, 21).unwrap(), 1);
        }
        assert!(search(5, 0, 20).is_err());
        assert!(search(5, 1, MAX_BOUND + 1).is_err());
        assert!(search(5, 5, MAX_BOUND).is_err());
    }

    #[test]
    fn not_admissible_report() {
        let r = check_hypothesis(5, &[13], &LSeriesConfig::default()).unwrap();
        assert_eq!(r.overall, Outcome::NotAdmissible);
        assert!(r.per_character.is_empty());
    }

    #[test]
    fn single_field_report() {
        let r = check_hypothesis(5, &[17], &LSeriesConfig::default()).unwrap();
        assert_eq!(r.per_character.len(), 2);
        assert_eq!(r.per_character[0].discriminant, 1);
        assert_eq!(r.per_character[1].discriminant, 17);
        assert!(r.per_character.iter().all(|c| c.root_number.value == Sign::Plus && c.formula_agrees()));
        assert_eq!(r.overall, Outcome::Verified);
    }
}
