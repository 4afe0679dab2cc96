//! Exact certificates for the algebraic structure of a map: invariant
//! hyperplanes, the critical divisor, and superattracting fixed points.

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::Result;
use crate::map::{FloatMap, PolynomialMap, MAX_EXACT_DET_K};
use crate::point::RationalPoint;
use crate::poly::{Division, Polynomial, Rational};
use crate::symmetry::Hyperplane;

/// Outcome of an invariance check for `{ℓ = 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Invariance {
    /// `ℓ ∘ map = ℓ · q` with `q` of this degree.
    Holds { quotient_degree: u32 },
    /// `ℓ ∘ map` is the zero polynomial: the map sends everything into `{ℓ = 0}`.
    Collapses,
    Fails { remainder: Polynomial },
}

impl Invariance {
    pub fn holds(&self) -> bool {
        matches!(self, Invariance::Holds { .. })
    }
}

/// Checks that `{covector · x = 0}` is invariant: the pullback of the linear
/// form is divisible by the form itself.
pub fn verify_invariant_form(map: &PolynomialMap, covector: &[i64]) -> Result<Invariance> {
    let n = map.n_vars();
    let mut pullback = Polynomial::zero(n);
    for (c, comp) in covector.iter().zip(map.components()) {
        if *c != 0 {
            pullback = &pullback + &comp.scale(&crate::poly::rat(*c));
        }
    }
    if pullback.is_zero() {
        return Ok(Invariance::Collapses);
    }
    let form = Polynomial::linear_form(covector);
    Ok(match pullback.divide_exact(&form)? {
        Division::Exact(q) => Invariance::Holds {
            quotient_degree: q.degree().unwrap_or(0),
        },
        Division::Remainder(r) => Invariance::Fails { remainder: r },
    })
}

pub fn verify_invariant_hyperplane(map: &PolynomialMap, h: Hyperplane) -> Result<Invariance> {
    verify_invariant_form(map, &h.covector(map.k()))
}

/// Fitted vanishing order of the Jacobian determinant across one hyperplane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub covector: Vec<i64>,
    pub min_exponent: f64,
    pub max_exponent: f64,
}

/// Outcome of the critical-divisor check.
#[derive(Clone, Debug, PartialEq)]
pub enum CriticalFactorization {
    /// `det = constant · ∏ ℓ^2` exactly.
    Exact { constant: Rational },
    /// Every fitted exponent lies in the accepted band around 2.
    Numeric { fits: Vec<ExponentFit> },
    Fails { reason: String },
}

impl CriticalFactorization {
    pub fn holds(&self) -> bool {
        !matches!(self, CriticalFactorization::Fails { .. })
    }
}

/// Accepted band for the numerically fitted vanishing order.
pub const EXPONENT_BAND: (f64, f64) = (1.9, 2.1);

/// Checks that the Jacobian determinant is a constant times the product of
/// the squared linear forms. Exact for k <= 3; beyond that, falls back to
/// [`numeric_vanishing_orders`] with 20 points per form.
pub fn verify_critical_factorization(map: &PolynomialMap, covectors: &[Vec<i64>]) -> Result<CriticalFactorization> {
    let k = map.k();
    let expected_degree = (k as u32 + 1) * (map.degree() - 1);
    if expected_degree != 2 * covectors.len() as u32 {
        return Ok(CriticalFactorization::Fails {
            reason: format!(
                "determinant degree {expected_degree} differs from twice the number of forms ({})",
                covectors.len()
            ),
        });
    }
    if k > MAX_EXACT_DET_K {
        let fits = numeric_vanishing_orders(&map.to_float(), covectors, 20, 0x5eed);
        let bad = fits
            .iter()
            .find(|f| f.min_exponent < EXPONENT_BAND.0 || f.max_exponent > EXPONENT_BAND.1);
        return Ok(match bad {
            Some(f) => CriticalFactorization::Fails {
                reason: format!(
                    "vanishing order on {:?} fitted in [{:.3}, {:.3}]",
                    f.covector, f.min_exponent, f.max_exponent
                ),
            },
            None => CriticalFactorization::Numeric { fits },
        });
    }
    let det = map.jacobian_det()?;
    let squares: Vec<Polynomial> = covectors
        .iter()
        .flat_map(|c| {
            let f = Polynomial::linear_form(c);
            [f.clone(), f]
        })
        .collect();
    Ok(match det.divide_by_product(&squares)? {
        Division::Exact(q) => match q.as_constant() {
            Some(c) if !c.is_zero() => CriticalFactorization::Exact { constant: c },
            _ => CriticalFactorization::Fails {
                reason: format!("quotient is not a nonzero constant: {q}"),
            },
        },
        Division::Remainder(r) => CriticalFactorization::Fails {
            reason: format!("not divisible; remainder {r}"),
        },
    })
}

/// Vanishing order of `det` along each form, with the cofactor left over.
pub fn critical_multiplicities(det: &Polynomial, covectors: &[Vec<i64>]) -> Result<(Vec<u32>, Polynomial)> {
    let mut rest = det.clone();
    let mut mults = Vec::with_capacity(covectors.len());
    for c in covectors {
        let (m, q) = rest.multiplicity_of(&Polynomial::linear_form(c))?;
        mults.push(m);
        rest = q;
    }
    Ok((mults, rest))
}

/// Least-squares slope of `log|det(x + ε n)|` against `log ε` at random
/// points `x` of each hyperplane, `n` its unit normal, `ε` from 1e-3 to 1e-5.
/// Points are kept at chordal distance at least 0.05 from the other forms.
pub fn numeric_vanishing_orders(
    map: &FloatMap,
    covectors: &[Vec<i64>],
    points_per_form: usize,
    seed: u64,
) -> Vec<ExponentFit> {
    let n = map.k() + 1;
    let eps: Vec<f64> = (0..5).map(|i| 10f64.powf(-3.0 - 0.5 * i as f64)).collect();
    covectors
        .iter()
        .enumerate()
        .map(|(fi, cov)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(fi as u64);
            let l: Vec<f64> = cov.iter().map(|&c| c as f64).collect();
            let ll: f64 = l.iter().map(|v| v * v).sum();
            let normal: Vec<Complex64> = l.iter().map(|v| Complex64::new(v / ll.sqrt(), 0.0)).collect();
            let others: Vec<UnitForm> = covectors
                .iter()
                .filter(|c| !proportional(c, cov))
                .map(|c| UnitForm::new(c))
                .collect();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for _ in 0..points_per_form {
                let z = loop {
                    let mut z: Vec<Complex64> = (0..n)
                        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                        .collect();
                    let dot: Complex64 = z.iter().zip(&l).map(|(zi, li)| zi * li).sum();
                    for (zi, li) in z.iter_mut().zip(&l) {
                        *zi -= dot * (li / ll);
                    }
                    let norm = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                    z.iter_mut().for_each(|v| *v /= norm);
                    if others.iter().all(|o| o.distance(&z) >= SEPARATION) {
                        break z;
                    }
                };
                let samples: Vec<(f64, f64)> = eps
                    .iter()
                    .map(|&e| {
                        let x: Vec<Complex64> = z.iter().zip(&normal).map(|(a, b)| a + b * e).collect();
                        (e.ln(), map.jacobian_det(&x).norm().ln())
                    })
                    .collect();
                let slope = least_squares_slope(&samples);
                lo = lo.min(slope);
                hi = hi.max(slope);
            }
            ExponentFit {
                covector: cov.clone(),
                min_exponent: lo,
                max_exponent: hi,
            }
        })
        .collect()
}

/// Sample points closer than this (chordal) to another hyperplane are
/// redrawn: there the cubic term of the determinant biases the fit.
const SEPARATION: f64 = 0.05;

struct UnitForm(Vec<f64>);

impl UnitForm {
    fn new(c: &[i64]) -> Self {
        let norm = c.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        UnitForm(c.iter().map(|&v| v as f64 / norm).collect())
    }

    /// `|ℓ·z|` for a unit vector `z`.
    fn distance(&self, z: &[Complex64]) -> f64 {
        self.0.iter().zip(z).map(|(a, b)| b * *a).sum::<Complex64>().norm()
    }
}

fn proportional(a: &[i64], b: &[i64]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| a[i] * b[j] == a[j] * b[i]))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Outcome of the superattraction check at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Superattraction {
    Holds,
    NotFixed { image: RationalPoint },
    /// Entry of the chart derivative (target row, source column, both
    /// skipping the chart coordinate) that is nonzero.
    NonzeroDerivative { row: usize, col: usize, value: Rational },
}

impl Superattraction {
    pub fn holds(&self) -> bool {
        matches!(self, Superattraction::Holds)
    }
}

/// Checks exactly that `p` is fixed and that the derivative of the map in
/// the affine chart at `p` vanishes.
pub fn verify_superattracting(map: &PolynomialMap, p: &RationalPoint) -> Result<Superattraction> {
    let image = map.evaluate_exact(p)?;
    if image != *p {
        return Ok(Superattraction::NotFixed { image });
    }
    let x = p.coords();
    let j = x.iter().position(|c| !c.is_zero()).expect("nonzero point");
    let g = map.eval_vector(x);
    let jac: Vec<Vec<Rational>> = map
        .jacobian_matrix()
        .iter()
        .map(|row| row.iter().map(|e| e.eval(x)).collect())
        .collect();
    let gj = &g[j];
    let others: Vec<usize> = (0..x.len()).filter(|&i| i != j).collect();
    for (r, &a) in others.iter().enumerate() {
        for (c, &b) in others.iter().enumerate() {
            let num = &jac[a][b] * gj - &g[a] * &jac[j][b];
            if !num.is_zero() {
                return Ok(Superattraction::NonzeroDerivative {
                    row: r,
                    col: c,
                    value: num / (gj * gj),
                });
            }
        }
    }
    Ok(Superattraction::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::build_equivariant_map;
    use crate::symmetry::{enumerate_superattractors, hyperplane_arrangement};

    #[test]
    fn k1_coordinate_line_invariant() {
        let g = build_equivariant_map(1).unwrap();
        assert_eq!(
            verify_invariant_hyperplane(&g, Hyperplane::Coord(1)).unwrap(),
            Invariance::Holds { quotient_degree: 3 }
        );
    }

    #[test]
    fn k2_all_hyperplanes_invariant() {
        let g = build_equivariant_map(2).unwrap();
        for h in hyperplane_arrangement(2) {
            assert!(verify_invariant_hyperplane(&g, h).unwrap().holds(), "{h}");
        }
    }

    #[test]
    fn generic_line_not_invariant() {
        let g = build_equivariant_map(2).unwrap();
        assert!(matches!(
            verify_invariant_form(&g, &[1, 2, 0]).unwrap(),
            Invariance::Fails { .. }
        ));
    }

    fn covectors(k: usize) -> Vec<Vec<i64>> {
        hyperplane_arrangement(k).iter().map(|h| h.covector(k)).collect()
    }

    #[test]
    fn exact_factorization_k1_k2() {
        for k in 1..=2 {
            let g = build_equivariant_map(k).unwrap();
            let out = verify_critical_factorization(&g, &covectors(k)).unwrap();
            assert!(matches!(out, CriticalFactorization::Exact { .. }), "k={k}: {out:?}");
        }
    }

    #[test]
    fn missing_form_is_reported() {
        let g = build_equivariant_map(1).unwrap();
        let mut cov = covectors(1);
        cov.pop();
        assert!(!verify_critical_factorization(&g, &cov).unwrap().holds());
    }

    #[test]
    fn numeric_fit_agrees_with_exact_route_k2() {
        let g = build_equivariant_map(2).unwrap().to_float();
        for fit in numeric_vanishing_orders(&g, &covectors(2), 5, 1) {
            assert!(fit.min_exponent > 1.9 && fit.max_exponent < 2.1, "{fit:?}");
        }
    }

    #[test]
    fn superattractors_k1_k2() {
        for k in 1..=2 {
            let g = build_equivariant_map(k).unwrap();
            for p in enumerate_superattractors(k) {
                assert_eq!(verify_superattracting(&g, &p).unwrap(), Superattraction::Holds, "{p}");
            }
        }
    }

    #[test]
    fn non_fixed_point_reported() {
        let g = build_equivariant_map(1).unwrap();
        let p = RationalPoint::from_ints(&[2, 1]).unwrap();
        assert!(matches!(
            verify_superattracting(&g, &p).unwrap(),
            Superattraction::NotFixed { .. }
        ));
    }
}
