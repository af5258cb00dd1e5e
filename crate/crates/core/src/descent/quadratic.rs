use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::ShortModel;
use crate::error::{Error, Result};
use crate::numtheory;
use crate::util::ser_display;

pub const MAX_HEIGHT: i64 = 10_000;

/// a + b sqrt(d) in Q(sqrt d).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct QuadElt {
    #[serde(serialize_with = "ser_display")]
    pub a: BigRational,
    #[serde(serialize_with = "ser_display")]
    pub b: BigRational,
    pub d: i64,
}

impl QuadElt {
    pub fn new(a: BigRational, b: BigRational, d: i64) -> Self {
        QuadElt { a, b, d }
    }

    pub fn rational(a: BigRational, d: i64) -> Self {
        QuadElt { a, b: BigRational::zero(), d }
    }

    /// b sqrt(d)
    pub fn pure(b: BigRational, d: i64) -> Self {
        QuadElt { a: BigRational::zero(), b, d }
    }

    pub fn conj(&self) -> Self {
        QuadElt { a: self.a.clone(), b: -&self.b, d: self.d }
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.into())
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// In sqrt(d) Q.
    pub fn is_pure(&self) -> bool {
        self.a.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        QuadElt { a: &self.a * c, b: &self.b * c, d: self.d }
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let c = self.conj();
        Some(QuadElt { a: c.a / &n, b: c.b / n, d: self.d })
    }

    fn check_field(&self, other: &Self) {
        assert_eq!(self.d, other.d, "elements of different quadratic fields");
    }
}

impl Add for &QuadElt {
    type Output = QuadElt;
    fn add(self, o: &QuadElt) -> QuadElt {
        self.check_field(o);
        QuadElt { a: &self.a + &o.a, b: &self.b + &o.b, d: self.d }
    }
}

impl Sub for &QuadElt {
    type Output = QuadElt;
    fn sub(self, o: &QuadElt) -> QuadElt {
        self.check_field(o);
        QuadElt { a: &self.a - &o.a, b: &self.b - &o.b, d: self.d }
    }
}

impl Mul for &QuadElt {
    type Output = QuadElt;
    fn mul(self, o: &QuadElt) -> QuadElt {
        self.check_field(o);
        let d = BigRational::from_integer(self.d.into());
        QuadElt {
            a: &self.a * &o.a + &self.b * &o.b * d,
            b: &self.a * &o.b + &self.b * &o.a,
            d: self.d,
        }
    }
}

impl Neg for &QuadElt {
    type Output = QuadElt;
    fn neg(self) -> QuadElt {
        QuadElt { a: -&self.a, b: -&self.b, d: self.d }
    }
}

impl fmt::Display for QuadElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt({})", self.b, self.d),
            (false, false) if self.b.is_negative() => {
                write!(f, "{} - {}*sqrt({})", self.a, -&self.b, self.d)
            }
            _ => write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d),
        }
    }
}

/// Affine point of a short model over Q(sqrt d).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadPoint {
    pub x: QuadElt,
    pub y: QuadElt,
    pub curve: ShortModel,
}

impl QuadPoint {
    pub fn new(x: QuadElt, y: QuadElt, curve: ShortModel) -> Result<Self> {
        let p = QuadPoint { x, y, curve };
        if p.is_on_curve() {
            Ok(p)
        } else {
            Err(Error::NotOnCurve)
        }
    }

    pub fn is_on_curve(&self) -> bool {
        if self.x.d != self.y.d {
            return false;
        }
        let d = self.x.d;
        let lhs = &self.y * &self.y;
        let x3 = &(&self.x * &self.x) * &self.x;
        let rhs = &(&x3 + &self.x.scale(&self.curve.a)) + &QuadElt::rational(self.curve.b.clone(), d);
        lhs == rhs
    }

    /// Image under the Galois conjugation of Q(sqrt d).
    pub fn conj(&self) -> Self {
        QuadPoint { x: self.x.conj(), y: self.y.conj(), curve: self.curve.clone() }
    }

    pub fn neg(&self) -> Self {
        QuadPoint { x: self.x.clone(), y: -&self.y, curve: self.curve.clone() }
    }

    /// Fixed by conjugation: both coordinates rational.
    pub fn is_invariant(&self) -> bool {
        self.conj() == *self
    }

    /// Conjugation acts as negation: x rational, y in sqrt(d) Q.
    pub fn is_anti_invariant(&self) -> bool {
        self.conj() == self.neg()
    }

    pub fn rational_coords(&self) -> Option<(BigRational, BigRational)> {
        (self.x.is_rational() && self.y.is_rational()).then(|| (self.x.a.clone(), self.y.a.clone()))
    }
}

impl fmt::Display for QuadPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

fn check_field_discriminant(d: i64) -> Result<()> {
    if d <= 1 || !numtheory::is_squarefree(d as u64)? {
        return Err(Error::InvalidArgument(format!("d = {d} must be squarefree and > 1")));
    }
    Ok(())
}

/// Reduced fractions m/n with |m| <= h, 1 <= n <= h, in (n, m) order.
pub fn height_box(h: i64) -> Vec<BigRational> {
    let mut out = Vec::new();
    for n in 1..=h {
        for m in -h..=h {
            if m.gcd(&n) == 1 {
                out.push(BigRational::new(m.into(), n.into()));
            }
        }
    }
    out
}

fn check_height(h: i64) -> Result<()> {
    if !(1..=MAX_HEIGHT).contains(&h) {
        return Err(Error::InvalidArgument(format!("height {h} outside 1..={MAX_HEIGHT}")));
    }
    Ok(())
}

/// Points (x, y) over Q(sqrt d) with x of height at most `height` and y either
/// rational or in sqrt(d) Q. Both signs of y are listed.
pub fn quad_point_search(curve: &ShortModel, d: i64, height: i64) -> Result<Vec<QuadPoint>> {
    check_field_discriminant(d)?;
    check_height(height)?;
    let dq = BigRational::from_integer(d.into());
    let found: Vec<Vec<QuadPoint>> = height_box(height)
        .into_par_iter()
        .map(|x| {
            let f = curve.rhs(&x);
            let xq = QuadElt::rational(x, d);
            let y = if f.is_zero() {
                return vec![QuadPoint { x: xq, y: QuadElt::rational(f, d), curve: curve.clone() }];
            } else if let Some(y) = numtheory::rational_sqrt(&f) {
                QuadElt::rational(y, d)
            } else if let Some(y0) = numtheory::rational_sqrt(&(&f / &dq)) {
                QuadElt::pure(y0, d)
            } else {
                return Vec::new();
            };
            let neg = -&y;
            vec![
                QuadPoint { x: xq.clone(), y, curve: curve.clone() },
                QuadPoint { x: xq, y: neg, curve: curve.clone() },
            ]
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// (x, y) -> (d x, d sqrt(d) y), from E over Q(sqrt d) onto
/// Y^2 = X^3 + A d^2 X + B d^3.
pub fn twist_map(p: &QuadPoint, d: i64) -> Result<QuadPoint> {
    if !p.is_on_curve() || p.x.d != d {
        return Err(Error::NotOnCurve);
    }
    let dq = BigRational::from_integer(d.into());
    let x = p.x.scale(&dq);
    // sqrt(d) (a + b sqrt d) = b d + a sqrt d
    let y = QuadElt::new(&p.y.b * &dq * &dq, &p.y.a * &dq, d);
    QuadPoint::new(x, y, p.curve.twist(d))
}

/// Rational affine points of `curve` whose x-coordinate lies in `xs`.
pub fn rational_point_search(curve: &ShortModel, xs: &[BigRational]) -> Vec<(BigRational, BigRational)> {
    let found: Vec<Vec<(BigRational, BigRational)>> = xs
        .par_iter()
        .map(|x| match numtheory::rational_sqrt(&curve.rhs(x)) {
            Some(y) if y.is_zero() => vec![(x.clone(), y)],
            Some(y) => vec![(x.clone(), y.clone()), (x.clone(), -y)],
            None => Vec::new(),
        })
        .collect();
    found.into_iter().flatten().collect()
}

type RatPoint = (BigRational, BigRational);

/// Comparison of the two eigenspaces of conjugation on the points found by
/// [`quad_point_search`] with independently searched rational points.
#[derive(Debug, Clone, Serialize)]
pub struct EigenspaceReport {
    pub d: i64,
    pub height: i64,
    pub quad_points: usize,
    /// Anti-invariant points, mapped through the twist.
    pub anti_invariant: usize,
    /// Rational points on the twist with X/d in the height box.
    pub twist_rational: usize,
    /// Invariant points.
    pub invariant: usize,
    /// Rational points on E with x in the height box.
    pub base_rational: usize,
    /// Every anti-invariant point maps to a rational point on the twist.
    pub anti_maps_rational: bool,
    /// Every invariant point with y != 0 maps to a non-rational point.
    pub invariant_maps_irrational: bool,
    /// Anti-invariant images equal the twist's rational points.
    pub anti_bijection: bool,
    /// Invariant points equal E's rational points.
    pub invariant_bijection: bool,
}

impl EigenspaceReport {
    pub fn pass(&self) -> bool {
        self.anti_maps_rational && self.invariant_maps_irrational && self.anti_bijection && self.invariant_bijection
    }
}

fn key(p: &RatPoint) -> (String, String) {
    (p.0.to_string(), p.1.to_string())
}

pub fn eigenspace_check(curve: &ShortModel, d: i64, height: i64) -> Result<EigenspaceReport> {
    let points = quad_point_search(curve, d, height)?;
    for p in &points {
        if !p.is_on_curve() {
            return Err(Error::NotOnCurve);
        }
    }
    let twist = curve.twist(d);
    let dq = BigRational::from_integer(d.into());

    let mut anti_images = BTreeSet::new();
    let mut anti_maps_rational = true;
    let mut invariant_maps_irrational = true;
    let mut invariant = BTreeSet::new();
    for p in &points {
        let image = twist_map(p, d)?;
        if p.is_anti_invariant() {
            match image.rational_coords() {
                Some(q) if twist.contains(&q.0, &q.1) => {
                    anti_images.insert(key(&q));
                }
                _ => anti_maps_rational = false,
            }
        }
        if p.is_invariant() {
            invariant.insert(key(&(p.x.a.clone(), p.y.a.clone())));
            if !p.y.is_zero() && image.rational_coords().is_some() {
                invariant_maps_irrational = false;
            }
        }
    }

    let xs = height_box(height);
    let twist_xs: Vec<BigRational> = xs.iter().map(|x| x * &dq).collect();
    let twist_points: BTreeSet<_> = rational_point_search(&twist, &twist_xs).iter().map(key).collect();
    let base_points: BTreeSet<_> = rational_point_search(curve, &xs).iter().map(key).collect();

    Ok(EigenspaceReport {
        d,
        height,
        quad_points: points.len(),
        anti_invariant: anti_images.len(),
        twist_rational: twist_points.len(),
        invariant: invariant.len(),
        base_rational: base_points.len(),
        anti_maps_rational,
        invariant_maps_irrational,
        anti_bijection: anti_images == twist_points,
        invariant_bijection: invariant == base_points,
    })
}
