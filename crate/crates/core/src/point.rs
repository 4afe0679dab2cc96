//! Points of complex projective space in floating-point and exact form.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Rational;

/// Coordinates within this much of the largest modulus count as tied; the
/// lowest index among them is made real positive.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Chordal distance below which two float points are treated as equal.
pub const PROJECTIVE_EQ_TOL: f64 = 1e-9;

/// A point of P^k with complex double coordinates, kept in canonical form:
/// sup-norm 1 and the coordinate of largest modulus real positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

impl ProjectivePoint {
    /// Canonicalizes `coords`. Fails on the zero vector or non-finite input.
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericOverflow);
        }
        let max = coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 || coords.is_empty() {
            return Err(Error::ZeroPoint);
        }
        let lead = coords
            .iter()
            .position(|z| z.norm() / max >= 1.0 - TIE_TOLERANCE)
            .unwrap();
        let inv = coords[lead].inv();
        let mut scaled: Vec<Complex64> = coords.iter().map(|z| z * inv).collect();
        scaled[lead] = Complex64::one();
        let sup = scaled.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if sup > 1.0 {
            for z in &mut scaled {
                *z /= sup;
            }
        }
        Ok(ProjectivePoint { coords: scaled })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Projective dimension k.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Index of the coordinate normalized to 1; the natural affine chart.
    pub fn chart_index(&self) -> usize {
        let max = self.coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.coords
            .iter()
            .position(|z| z.norm() / max >= 1.0 - TIE_TOLERANCE)
            .unwrap()
    }

    pub fn approx_eq(&self, other: &ProjectivePoint) -> bool {
        chordal_distance(self, other) < PROJECTIVE_EQ_TOL
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, z) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            if z.im == 0.0 {
                write!(f, "{}", z.re)?;
            } else {
                write!(f, "{z}")?;
            }
        }
        write!(f, "]")
    }
}

impl Serialize for ProjectivePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coords.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

/// Fubini-Study chordal distance `|p ∧ q| / (|p| |q|)`, the sine of the
/// angle between the representing lines. Lies in [0, 1].
///
/// The wedge form keeps full relative precision for nearby points, where
/// `sqrt(1 - cos^2)` would cancel.
pub fn chordal_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> f64 {
    chordal_distance_raw(&p.coords, &q.coords)
}

pub fn chordal_distance_raw(p: &[Complex64], q: &[Complex64]) -> f64 {
    assert_eq!(p.len(), q.len(), "points live in different dimensions");
    let np: f64 = p.iter().map(|z| z.norm_sqr()).sum();
    let nq: f64 = q.iter().map(|z| z.norm_sqr()).sum();
    let mut wedge = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            wedge += (p[i] * q[j] - p[j] * q[i]).norm_sqr();
        }
    }
    (wedge / (np * nq)).sqrt().min(1.0)
}

/// A point of P^k with rational coordinates, canonical with its first nonzero
/// coordinate equal to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    coords: Vec<Rational>,
}

impl RationalPoint {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        let Some(lead) = coords.iter().find(|c| !c.is_zero()).cloned() else {
            return Err(Error::ZeroPoint);
        };
        let inv = lead.recip();
        Ok(RationalPoint {
            coords: coords.into_iter().map(|c| c * &inv).collect(),
        })
    }

    pub fn from_ints(coords: &[i64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| crate::poly::rat(c)).collect())
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn to_float(&self) -> ProjectivePoint {
        use num_traits::ToPrimitive;
        ProjectivePoint::new(
            self.coords
                .iter()
                .map(|c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0))
                .collect(),
        )
        .expect("canonical rational point is nonzero and finite")
    }

    /// Integer coordinates, when every coordinate is integral.
    pub fn to_ints(&self) -> Option<Vec<i64>> {
        use num_traits::ToPrimitive;
        self.coords
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
            .collect()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}
