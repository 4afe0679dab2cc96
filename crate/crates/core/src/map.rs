//! Homogeneous polynomial maps of P^k and the symmetric map of degree k+3.
//!
//! The symmetric map has components
//!
//! ```text
//! g_l(x) = x_l^3 * sum_{s=0}^{k} (-1)^s (s+1)/(s+3) * x_l^s * e_{k-s}(x)
//! ```
//!
//! where `e_j` is the elementary symmetric polynomial of degree `j` in the
//! k+1 homogeneous coordinates. It is stored with integer coefficients: the
//! rational formula is scaled to the primitive integer representative, which
//! defines the same map of projective space.

use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::point::{ProjectivePoint, RationalPoint};
use crate::poly::{content_scale, rat, Polynomial, Rational};

/// Default largest supported projective dimension.
pub const DEFAULT_MAX_K: usize = 6;

/// Largest dimension for the exact Jacobian determinant.
pub const MAX_EXACT_DET_K: usize = 3;

/// Environment variable overriding [`DEFAULT_MAX_K`].
pub const MAX_K_ENV: &str = "EQUIDYN_MAX_K";

/// The configured dimension cap: `EQUIDYN_MAX_K` if set and valid, else 6.
pub fn max_k() -> usize {
    std::env::var(MAX_K_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&k| k >= 1)
        .unwrap_or(DEFAULT_MAX_K)
}

pub fn check_dimension(k: usize) -> Result<()> {
    let max = max_k();
    if k == 0 || k > max {
        return Err(Error::DimensionUnsupported { k, max });
    }
    Ok(())
}

fn elementary_symmetric_with<T, F, G>(values: &[T], zero: T, one: T, add: F, mul: G) -> Vec<T>
where
    T: Clone,
    F: Fn(&T, &T) -> T,
    G: Fn(&T, &T) -> T,
{
    // e[j] holds e_j of the values consumed so far; the product
    // (t + x_1)...(t + x_n) gains one factor per step.
    let mut e = vec![zero; values.len() + 1];
    e[0] = one;
    for (i, x) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] = add(&e[j], &mul(x, &e[j - 1]));
        }
    }
    e
}

/// All elementary symmetric functions `e_0 = 1, e_1, ..., e_n` of `values`.
pub fn elementary_symmetric_all<T>(values: &[T]) -> Vec<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
{
    elementary_symmetric_with(
        values,
        T::zero(),
        T::one(),
        |a, b| a.clone() + b.clone(),
        |a, b| a.clone() * b.clone(),
    )
}

/// The elementary symmetric polynomials in `n` variables.
pub fn elementary_symmetric_polys(n: usize) -> Vec<Polynomial> {
    let vars: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
    elementary_symmetric_with(
        &vars,
        Polynomial::zero(n),
        Polynomial::one(n),
        |a, b| a + b,
        |a, b| a * b,
    )
}

/// A map of P^k given by k+1 homogeneous polynomials of one degree in k+1
/// variables, not all zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialMap {
    k: usize,
    degree: u32,
    components: Vec<Polynomial>,
}

impl PolynomialMap {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::DegenerateMap);
        }
        if let Some(bad) = components.iter().find(|c| c.n_vars() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.n_vars(),
            });
        }
        let mut degree = None;
        for c in &components {
            if !c.is_homogeneous() {
                return Err(Error::NotHomogeneous);
            }
            if let Some(d) = c.degree() {
                if degree.is_some_and(|e| e != d) {
                    return Err(Error::NotHomogeneous);
                }
                degree = Some(d);
            }
        }
        let degree = degree.ok_or(Error::DegenerateMap)?;
        Ok(PolynomialMap {
            k: n - 1,
            degree,
            components,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_vars(&self) -> usize {
        self.k + 1
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    /// Scales all components so the coefficients are coprime integers.
    pub fn content_normalized(&self) -> PolynomialMap {
        let s = content_scale(&self.components).expect("map has a nonzero component");
        self.scale(&s)
    }

    pub fn scale(&self, c: &Rational) -> PolynomialMap {
        PolynomialMap {
            k: self.k,
            degree: self.degree,
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// `self ∘ m`: substitutes `x_i := sum_j m[i][j] x_j` in every component.
    pub fn compose_linear(&self, m: &IntMatrix) -> Result<PolynomialMap> {
        self.check_square(m)?;
        let n = self.n_vars();
        let forms: Vec<Polynomial> = (0..n).map(|i| Polynomial::linear_form(m.row(i))).collect();
        PolynomialMap::new(self.components.iter().map(|c| c.substitute(&forms)).collect())
    }

    /// `m ∘ self`: the components are recombined by the rows of `m`.
    pub fn apply_linear(&self, m: &IntMatrix) -> Result<PolynomialMap> {
        self.check_square(m)?;
        let n = self.n_vars();
        let comps = (0..n)
            .map(|i| {
                let mut acc = Polynomial::zero(n);
                for (j, c) in self.components.iter().enumerate() {
                    if m[(i, j)] != 0 {
                        acc = &acc + &c.scale(&rat(m[(i, j)]));
                    }
                }
                acc
            })
            .collect();
        PolynomialMap::new(comps)
    }

    fn check_square(&self, m: &IntMatrix) -> Result<()> {
        let n = self.n_vars();
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if m.rows() != n { m.rows() } else { m.cols() },
            });
        }
        Ok(())
    }

    /// Entry (i, j) is the partial derivative of component i in `x_{j+1}`.
    pub fn jacobian_matrix(&self) -> Vec<Vec<Polynomial>> {
        self.components
            .iter()
            .map(|c| (0..self.n_vars()).map(|j| c.partial(j)).collect())
            .collect()
    }

    /// Exact determinant of the Jacobian of the homogeneous lift, by cofactor
    /// expansion. Limited to k <= 3.
    pub fn jacobian_det(&self) -> Result<Polynomial> {
        if self.k > MAX_EXACT_DET_K {
            return Err(Error::DeterminantUnsupported {
                k: self.k,
                max: MAX_EXACT_DET_K,
            });
        }
        let jac = self.jacobian_matrix();
        let cols: Vec<usize> = (0..self.n_vars()).collect();
        Ok(cofactor_det(&jac, 0, &cols))
    }

    /// Raw component values at a rational vector.
    pub fn eval_vector(&self, x: &[Rational]) -> Vec<Rational> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Exact image of a rational point.
    pub fn evaluate_exact(&self, p: &RationalPoint) -> Result<RationalPoint> {
        if p.coords().len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                got: p.coords().len(),
            });
        }
        RationalPoint::new(self.eval_vector(p.coords())).map_err(|_| Error::HolomorphyViolation {
            point: p.to_string(),
        })
    }

    /// Compiles the map to floating-point form for iteration.
    pub fn to_float(&self) -> FloatMap {
        FloatMap::new(self)
    }
}

fn cofactor_det(m: &[Vec<Polynomial>], row: usize, cols: &[usize]) -> Polynomial {
    let n = m[0][0].n_vars();
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = Polynomial::zero(n);
    for (idx, &c) in cols.iter().enumerate() {
        let entry = &m[row][c];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = entry * &cofactor_det(m, row + 1, &rest);
        acc = if idx % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Builds the S_{k+2}-equivariant map of degree k+3 on P^k.
pub fn build_equivariant_map(k: usize) -> Result<PolynomialMap> {
    check_dimension(k)?;
    let n = k + 1;
    let e = elementary_symmetric_polys(n);
    let components = (0..n)
        .map(|l| {
            let x = Polynomial::var(n, l);
            let mut acc = Polynomial::zero(n);
            let mut x_pow = x.pow(3);
            for s in 0..=k {
                let sign = if s % 2 == 0 { 1 } else { -1 };
                let coeff = Rational::new((sign * (s as i64 + 1)).into(), (s as i64 + 3).into());
                acc = &acc + &(&x_pow * &e[k - s]).scale(&coeff);
                x_pow = &x_pow * &x;
            }
            acc
        })
        .collect();
    Ok(PolynomialMap::new(components)?.content_normalized())
}

#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<(Complex64, Vec<u32>)>,
}

impl CompiledPoly {
    fn new(p: &Polynomial) -> Self {
        CompiledPoly {
            terms: p
                .terms()
                .map(|(m, c)| {
                    (
                        Complex64::new(c.to_f64().expect("coefficient fits in f64"), 0.0),
                        m.exponents().to_vec(),
                    )
                })
                .collect(),
        }
    }

    fn eval(&self, powers: &[Vec<Complex64>]) -> Complex64 {
        let mut sum = Complex64::zero();
        for (c, e) in &self.terms {
            let mut t = *c;
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    t *= powers[i][ei as usize];
                }
            }
            sum += t;
        }
        sum
    }
}

/// Complex number with double-double parts, for orbits that must be tracked
/// beyond double precision.
pub type DdComplex = num_complex::Complex<TwoFloat>;

pub fn dd_from(z: Complex64) -> DdComplex {
    DdComplex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

pub fn dd_to_f64(z: &DdComplex) -> Complex64 {
    Complex64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

/// Floating-point evaluator of a [`PolynomialMap`] and its Jacobian.
#[derive(Clone, Debug)]
pub struct FloatMap {
    k: usize,
    degree: u32,
    components: Vec<CompiledPoly>,
    jacobian: Vec<Vec<CompiledPoly>>,
}

impl FloatMap {
    pub fn new(map: &PolynomialMap) -> Self {
        FloatMap {
            k: map.k,
            degree: map.degree,
            components: map.components.iter().map(CompiledPoly::new).collect(),
            jacobian: map
                .jacobian_matrix()
                .iter()
                .map(|row| row.iter().map(CompiledPoly::new).collect())
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    fn powers(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        x.iter()
            .map(|&xi| {
                let mut v = Vec::with_capacity(self.degree as usize + 1);
                let mut acc = Complex64::one();
                for _ in 0..=self.degree {
                    v.push(acc);
                    acc *= xi;
                }
                v
            })
            .collect()
    }

    /// Component values of the homogeneous lift at a vector.
    pub fn eval_vector(&self, x: &[Complex64]) -> Vec<Complex64> {
        let pw = self.powers(x);
        self.components.iter().map(|c| c.eval(&pw)).collect()
    }

    /// Component values in double-double arithmetic.
    pub fn eval_vector_dd(&self, x: &[DdComplex]) -> Vec<DdComplex> {
        let one = DdComplex::new(TwoFloat::from(1.0), TwoFloat::from(0.0));
        let pw: Vec<Vec<DdComplex>> = x
            .iter()
            .map(|xi| {
                let mut v = Vec::with_capacity(self.degree as usize + 1);
                let mut acc = one;
                for _ in 0..=self.degree {
                    v.push(acc);
                    acc = acc * xi;
                }
                v
            })
            .collect();
        self.components
            .iter()
            .map(|c| {
                let mut sum = DdComplex::new(TwoFloat::from(0.0), TwoFloat::from(0.0));
                for (coef, e) in &c.terms {
                    let mut t = dd_from(*coef);
                    for (i, &ei) in e.iter().enumerate() {
                        if ei > 0 {
                            t = t * pw[i][ei as usize];
                        }
                    }
                    sum = sum + t;
                }
                sum
            })
            .collect()
    }

    /// Jacobian of the homogeneous lift at a vector.
    pub fn jacobian_vector(&self, x: &[Complex64]) -> Vec<Vec<Complex64>> {
        let pw = self.powers(x);
        self.jacobian
            .iter()
            .map(|row| row.iter().map(|c| c.eval(&pw)).collect())
            .collect()
    }

    /// Canonical image of a point.
    pub fn evaluate(&self, p: &ProjectivePoint) -> Result<ProjectivePoint> {
        let y = self.eval_vector(p.coords());
        ProjectivePoint::new(y).map_err(|e| match e {
            Error::ZeroPoint => Error::HolomorphyViolation {
                point: p.to_string(),
            },
            other => other,
        })
    }

    /// Derivative of the map read in affine charts: the source chart divides
    /// by coordinate `src` at `p`, the target chart by coordinate `dst`.
    /// Returns a k×k matrix (rows: target coordinates except `dst`, columns:
    /// source coordinates except `src`).
    pub fn chart_derivative(&self, p: &ProjectivePoint, src: usize, dst: usize) -> DMatrix<Complex64> {
        let lead = p.coords()[src];
        let x: Vec<Complex64> = p.coords().iter().map(|z| z / lead).collect();
        let g = self.eval_vector(&x);
        let dg = self.jacobian_vector(&x);
        let gd = g[dst];
        let n = self.k + 1;
        let rows: Vec<usize> = (0..n).filter(|&a| a != dst).collect();
        let cols: Vec<usize> = (0..n).filter(|&b| b != src).collect();
        DMatrix::from_fn(self.k, self.k, |r, c| {
            let (a, b) = (rows[r], cols[c]);
            (dg[a][b] * gd - g[a] * dg[dst][b]) / (gd * gd)
        })
    }

    /// Determinant of the homogeneous Jacobian at a vector.
    pub fn jacobian_det(&self, x: &[Complex64]) -> Complex64 {
        let n = self.k + 1;
        let j = self.jacobian_vector(x);
        DMatrix::from_fn(n, n, |r, c| j[r][c]).determinant()
    }
}
