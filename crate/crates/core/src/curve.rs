//! Integral Weierstrass models over Q.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{self, Prime};
use crate::util::ser_display;

/// y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct WeierstrassModel {
    #[serde(serialize_with = "ser_display")]
    pub a1: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub a2: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub a3: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub a4: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub a6: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveInvariants {
    #[serde(serialize_with = "ser_display")]
    pub b2: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub b4: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub b6: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub b8: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub c4: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub c6: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub delta: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub j: BigRational,
}

impl WeierstrassModel {
    /// Builds a model, rejecting singular equations.
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Result<Self> {
        let model = WeierstrassModel { a1, a2, a3, a4, a6 };
        model.invariants()?;
        Ok(model)
    }

    pub fn from_coeffs(a: [i64; 5]) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
        Self::new(a1, a2, a3, a4, a6)
    }

    pub fn coeffs(&self) -> [&BigInt; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    pub fn invariants(&self) -> Result<CurveInvariants> {
        invariants(self)
    }

    pub fn discriminant(&self) -> BigInt {
        let (b2, b4, b6, b8) = self.b_quantities();
        discriminant_from_b(&b2, &b4, &b6, &b8)
    }

    fn b_quantities(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        let WeierstrassModel { a1, a2, a3, a4, a6 } = self;
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        (b2, b4, b6, b8)
    }

    /// Applies (x, y) -> (u^2 x' + r, u^3 y' + s u^2 x' + t). Fails if the
    /// result is not integral.
    fn change_coordinates(&self, u: &BigInt, r: &BigInt, s: &BigInt, t: &BigInt) -> Option<Self> {
        let WeierstrassModel { a1, a2, a3, a4, a6 } = self;
        let n1 = a1 + 2 * s;
        let n2 = a2 - s * a1 + 3 * r - s * s;
        let n3 = a3 + r * a1 + 2 * t;
        let n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        let div = |n: BigInt, k: u32| {
            let (q, rem) = n.div_rem(&u.pow(k));
            rem.is_zero().then_some(q)
        };
        Some(WeierstrassModel {
            a1: div(n1, 1)?,
            a2: div(n2, 2)?,
            a3: div(n3, 3)?,
            a4: div(n4, 4)?,
            a6: div(n6, 6)?,
        })
    }
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{},{}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

fn discriminant_from_b(b2: &BigInt, b4: &BigInt, b6: &BigInt, b8: &BigInt) -> BigInt {
    -(b2 * b2 * b8) - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
}

/// Standard b-, c-quantities, discriminant and j-invariant.
pub fn invariants(e: &WeierstrassModel) -> Result<CurveInvariants> {
    let (b2, b4, b6, b8) = e.b_quantities();
    let c4 = &b2 * &b2 - 24 * &b4;
    let c6 = -(&b2 * &b2 * &b2) + 36 * &b2 * &b4 - 216 * &b6;
    let num: BigInt = &c4 * &c4 * &c4 - &c6 * &c6;
    let (delta, rem) = num.div_rem(&BigInt::from(1728));
    debug_assert!(rem.is_zero());
    debug_assert_eq!(delta, discriminant_from_b(&b2, &b4, &b6, &b8));
    if delta.is_zero() {
        return Err(Error::SingularCurve);
    }
    let j = BigRational::new(&c4 * &c4 * &c4, delta.clone());
    Ok(CurveInvariants { b2, b4, b6, b8, c4, c6, delta, j })
}

/// Short model Y^2 = X^3 + A X + B over Q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShortModel {
    #[serde(serialize_with = "ser_display")]
    pub a: BigRational,
    #[serde(serialize_with = "ser_display")]
    pub b: BigRational,
}

impl ShortModel {
    pub fn new(a: BigRational, b: BigRational) -> Result<Self> {
        let m = ShortModel { a, b };
        if m.discriminant().is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(m)
    }

    /// -16 (4A^3 + 27B^2)
    pub fn discriminant(&self) -> BigRational {
        let four = BigRational::from_integer(4.into());
        let t27 = BigRational::from_integer(27.into());
        -BigRational::from_integer(16.into())
            * (four * &self.a * &self.a * &self.a + t27 * &self.b * &self.b)
    }

    pub fn j_invariant(&self) -> BigRational {
        let a3 = &self.a * &self.a * &self.a;
        let num = BigRational::from_integer(6912.into()) * &a3;
        num / (BigRational::from_integer(4.into()) * a3 + BigRational::from_integer(27.into()) * &self.b * &self.b)
    }

    /// x^3 + A x + B
    pub fn rhs(&self, x: &BigRational) -> BigRational {
        x * x * x + &self.a * x + &self.b
    }

    pub fn contains(&self, x: &BigRational, y: &BigRational) -> bool {
        y * y == self.rhs(x)
    }

    /// Y^2 = X^3 + A d^2 X + B d^3
    pub fn twist(&self, d: i64) -> ShortModel {
        let d = BigRational::from_integer(d.into());
        ShortModel { a: &self.a * &d * &d, b: &self.b * &d * &d * &d }
    }
}

/// (A, B) = (-c4/48, -c6/864).
pub fn short_form(e: &WeierstrassModel) -> ShortModel {
    let inv = invariants(e).expect("models are nonsingular by construction");
    ShortModel {
        a: -BigRational::new(inv.c4, 48.into()),
        b: -BigRational::new(inv.c6, 864.into()),
    }
}

/// Smallest u > 0 with u^i * a_i integral for every (i, a_i).
fn clearing_scale(coeffs: &[(u32, &BigRational)]) -> Result<BigInt> {
    let mut u = BigInt::one();
    for &(weight, c) in coeffs {
        let den = c.denom().to_u64().ok_or_else(|| {
            Error::InvalidArgument("twist denominator out of range".into())
        })?;
        for (q, e) in numtheory::factor_u64(den)?.factors {
            let need = e.div_ceil(weight);
            let have = numtheory::valuation_int(&u, q)?;
            if need > have {
                u *= BigInt::from(q).pow(need - have);
            }
        }
    }
    Ok(u)
}

/// Quadratic twist by a squarefree `d`.
///
/// The twist is built from the long model, keeping a1 and scaling a3 by d, so
/// that for odd d = 1 mod 4 the result is integral with discriminant d^6 Delta
/// and the 2- and 3-adic shape of the input is untouched. Other d need a
/// final (u^2, u^3) rescaling to clear denominators.
pub fn quadratic_twist(e: &WeierstrassModel, d: i64) -> Result<WeierstrassModel> {
    if d == 0 || !numtheory::is_squarefree(d.unsigned_abs())? {
        return Err(Error::NotSquarefree(d));
    }
    let q = |n: &BigInt| BigRational::from_integer(n.clone());
    let dd = BigRational::from_integer(d.into());
    let one = BigRational::one();
    let (a1, a2, a3, a4, a6) = (q(&e.a1), q(&e.a2), q(&e.a3), q(&e.a4), q(&e.a6));
    let dm1 = &dd - &one;
    let four = BigRational::from_integer(4.into());
    let two = BigRational::from_integer(2.into());

    let t1 = a1.clone();
    let t2 = &a2 * &dd + &a1 * &a1 * &dm1 / &four;
    let t3 = &a3 * &dd;
    let t4 = &a4 * &dd * &dd + &a1 * &a3 * &dd * &dm1 / &two;
    let t6 = &a6 * &dd * &dd * &dd + &a3 * &a3 * &dd * &dd * &dm1 / &four;

    let u = clearing_scale(&[(1, &t1), (2, &t2), (3, &t3), (4, &t4), (6, &t6)])?;
    let scale = |c: BigRational, k: u32| -> BigInt {
        let v = c * BigRational::from_integer(u.pow(k));
        debug_assert!(v.is_integer());
        v.to_integer()
    };
    WeierstrassModel::new(scale(t1, 1), scale(t2, 2), scale(t3, 3), scale(t4, 4), scale(t6, 6))
}

fn val_or_inf(n: &BigInt, p: Prime) -> u32 {
    if n.is_zero() {
        u32::MAX
    } else {
        numtheory::valuation_int(n, p).expect("nonzero")
    }
}

/// True if the model is minimal at `p` (valid test for p >= 5, and the
/// sufficient condition used at p = 3).
pub fn is_minimal_at(e: &WeierstrassModel, p: Prime) -> Result<bool> {
    let inv = invariants(e)?;
    Ok(val_or_inf(&inv.c4, p) < 4 || val_or_inf(&inv.delta, p) < 12)
}

fn inverse_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    debug_assert!(g.gcd.is_one());
    g.x.mod_floor(m)
}

/// Reduces the model at a prime p >= 5 until v_p(c4) < 4 or v_p(Delta) < 12.
pub fn minimalize_at(e: &WeierstrassModel, p: Prime) -> Result<WeierstrassModel> {
    if p < 5 {
        return Err(Error::UnsupportedPrime(p));
    }
    let pb = BigInt::from(p);
    let two = BigInt::from(2);
    let three = BigInt::from(3);
    let mut cur = e.clone();
    while !is_minimal_at(&cur, p)? {
        let m1 = pb.clone();
        let m2 = pb.pow(2);
        let m3 = pb.pow(3);
        let s = (-&cur.a1 * inverse_mod(&two, &m1)).mod_floor(&m1);
        let r = ((&s * &s + &s * &cur.a1 - &cur.a2) * inverse_mod(&three, &m2)).mod_floor(&m2);
        let t = (-(&cur.a3 + &r * &cur.a1) * inverse_mod(&two, &m3)).mod_floor(&m3);
        cur = cur
            .change_coordinates(&pb, &r, &s, &t)
            .expect("a non-minimal model at p >= 5 always admits the p-scaling");
    }
    Ok(cur)
}

/// Curve together with its table label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveLabel {
    pub label: String,
    pub model: WeierstrassModel,
}

/// Environment variable naming an alternate curve table.
pub const CURVES_ENV: &str = "TWISTGATE_CURVES";

const BUNDLED_TABLE: &str = include_str!("../data/curves.tsv");

type Factorization = &'static [(u64, u32)];

/// j-invariants the table models must reproduce: (label, numerator
/// factorization, denominator factorization).
const ANCHORED_J: [(&str, Factorization, Factorization); 2] = [
    ("15a1", &[(13, 3), (37, 3)], &[(3, 4), (5, 4)]),
    ("21a1", &[(193, 3)], &[(3, 4), (7, 2)]),
];

/// Expected j-invariant for the anchored labels.
pub fn anchored_j(label: &str) -> Option<BigRational> {
    let pp = |fs: &[(u64, u32)]| {
        fs.iter().fold(BigInt::one(), |acc, &(p, e)| acc * BigInt::from(p).pow(e))
    };
    ANCHORED_J
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|(_, n, d)| BigRational::new(pp(n), pp(d)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveTable {
    entries: Vec<CurveLabel>,
}

impl CurveTable {
    /// Parses the tab-separated table format `label a1 a2 a3 a4 a6`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<CurveLabel> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::CurveTable { line: line_no, msg };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 6 {
                return Err(err(format!("expected 6 tab-separated fields, found {}", fields.len())));
            }
            let label = fields[0].trim().to_string();
            if label.is_empty() {
                return Err(err("empty label".into()));
            }
            let mut coeffs = Vec::with_capacity(5);
            for f in &fields[1..] {
                let v: BigInt = f
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("not an integer: {f:?}")))?;
                coeffs.push(v);
            }
            let [a1, a2, a3, a4, a6]: [BigInt; 5] = coeffs.try_into().expect("5 fields");
            let model = WeierstrassModel::new(a1, a2, a3, a4, a6).map_err(|e| err(e.to_string()))?;
            if entries.iter().any(|c| c.label == label) {
                return Err(err(format!("duplicate label {label}")));
            }
            if let Some(j) = anchored_j(&label) {
                if invariants(&model)?.j != j {
                    return Err(err(format!("model for {label} does not have j = {j}")));
                }
            }
            entries.push(CurveLabel { label, model });
        }
        Ok(CurveTable { entries })
    }

    /// The table shipped with the crate. Contains exactly 15a1 and 21a1.
    pub fn bundled() -> Self {
        let table = Self::parse(BUNDLED_TABLE).expect("bundled curve table is valid");
        for (label, _, _) in ANCHORED_J {
            assert!(table.get(label).is_ok(), "bundled table lacks {label}");
        }
        table
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::CurveTable {
            line: 0,
            msg: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// Table named by `TWISTGATE_CURVES`, else the bundled one.
    pub fn load() -> Result<Self> {
        match std::env::var_os(CURVES_ENV) {
            Some(path) => Self::from_path(Path::new(&path)),
            None => Ok(Self::bundled()),
        }
    }

    pub fn get(&self, label: &str) -> Result<&WeierstrassModel> {
        self.entries
            .iter()
            .find(|c| c.label.eq_ignore_ascii_case(label))
            .map(|c| &c.model)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn entries(&self) -> &[CurveLabel] {
        &self.entries
    }
}

/// X0(3p) for p = 5 or 7, as a table label.
pub fn x0_label(p: u64) -> Result<&'static str> {
    match p {
        5 => Ok("15a1"),
        7 => Ok("21a1"),
        _ => Err(Error::InvalidArgument(format!("p must be 5 or 7, got {p}"))),
    }
}

/// Model for X0(3p) from the bundled table.
pub fn x0(p: u64) -> Result<WeierstrassModel> {
    Ok(CurveTable::bundled().get(x0_label(p)?)?.clone())
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.label, self.model)
    }
}
