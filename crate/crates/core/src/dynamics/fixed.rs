//! Fixed points and multipliers of maps of the projective line.

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use twofloat::TwoFloat;

use crate::map::{dd_from, dd_to_f64, DdComplex, PolynomialMap};
use crate::point::ProjectivePoint;
use crate::poly::{Monomial, Polynomial, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    pub point: ProjectivePoint,
    /// Derivative of the map in the affine chart at the point.
    pub multiplier: Complex64,
    pub multiplicity: usize,
}

/// Roots closer than this (relative) are merged into one multiple root.
const CLUSTER_TOL: f64 = 1e-6;

/// All fixed points of a map of P^1, with multiplicity, from the
/// fixed-point form `x2·g1(x) − x1·g2(x)` of degree `d + 1`.
///
/// Finite fixed points are the roots of that form in the chart `x2 = 1`;
/// the point at infinity `[1:0]` carries the degree deficit as multiplicity.
pub fn find_fixed_points_dim1(map: &PolynomialMap) -> Result<Vec<FixedPoint>> {
    if map.k() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: map.k() });
    }
    let top = map.degree() + 1;
    let coeffs: Vec<Complex64> = fixed_point_form(map)
        .iter()
        .map(|c| Complex64::new(c.to_f64().unwrap_or(0.0), 0.0))
        .collect();
    let fmap = map.to_float();
    let mut out = Vec::new();
    let Some(deg) = coeffs.iter().rposition(|c| !c.is_zero()) else {
        return Err(Error::InvalidArgument("the identity map has a continuum of fixed points".into()));
    };
    let inf_mult = top as usize - deg;
    let roots = polynomial_roots(&coeffs[..=deg])?;
    for cluster in cluster_roots(&roots) {
        let z = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        let point = ProjectivePoint::new(vec![z, Complex64::new(1.0, 0.0)])?;
        out.push(FixedPoint {
            multiplier: chart_multiplier(&fmap, &point),
            point,
            multiplicity: cluster.len(),
        });
    }
    if inf_mult > 0 {
        let point = ProjectivePoint::from_real(&[1.0, 0.0])?;
        out.push(FixedPoint {
            multiplier: chart_multiplier(&fmap, &point),
            point,
            multiplicity: inf_mult,
        });
    }
    Ok(out)
}

/// Coefficients of `x2·g1 − x1·g2` in the chart `x2 = 1`, constant first.
fn fixed_point_form(map: &PolynomialMap) -> Vec<Rational> {
    let [g1, g2] = map.components() else { unreachable!() };
    let x1 = Polynomial::var(2, 0);
    let x2 = Polynomial::var(2, 1);
    let form = &(&x2 * g1) - &(&x1 * g2);
    let top = map.degree() + 1;
    // coefficient of z^a is that of x1^a x2^(d+1-a)
    (0..=top)
        .map(|a| form.coefficient(&Monomial::new(vec![a, top - a])))
        .collect()
}

/// Newton-polishes a simple finite fixed point in double-double precision and
/// returns homogeneous coordinates `[z : 1]`. The point at infinity is exact.
pub fn refine_fixed_point(map: &PolynomialMap, fp: &FixedPoint) -> Result<Vec<DdComplex>> {
    if map.k() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: map.k() });
    }
    let c = fp.point.coords();
    let one = DdComplex::new(TwoFloat::from(1.0), TwoFloat::from(0.0));
    if c[1].norm() < 1e-12 {
        return Ok(vec![one, DdComplex::new(TwoFloat::from(0.0), TwoFloat::from(0.0))]);
    }
    let coeffs: Vec<DdComplex> = fixed_point_form(map)
        .iter()
        .map(|q| {
            let num = TwoFloat::from(q.numer().to_f64().unwrap_or(f64::NAN));
            let den = TwoFloat::from(q.denom().to_f64().unwrap_or(f64::NAN));
            DdComplex::new(num / den, TwoFloat::from(0.0))
        })
        .collect();
    let mut z = dd_from(c[0] / c[1]);
    for _ in 0..4 {
        let zero = DdComplex::new(TwoFloat::from(0.0), TwoFloat::from(0.0));
        let (mut p, mut dp) = (zero, zero);
        for &a in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        if dd_to_f64(&dp).norm() == 0.0 {
            return Err(Error::RootSolver { residual: dd_to_f64(&p).norm() });
        }
        z = z - p / dp;
    }
    Ok(vec![z, one])
}

fn chart_multiplier(map: &crate::map::FloatMap, p: &ProjectivePoint) -> Complex64 {
    let j = p.chart_index();
    map.chart_derivative(p, j, j)[(0, 0)]
}

fn cluster_roots(roots: &[Complex64]) -> Vec<Vec<Complex64>> {
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for &r in roots {
        let scale = r.norm().max(1.0);
        match clusters.iter_mut().find(|c| (c[0] - r).norm() < CLUSTER_TOL * scale) {
            Some(c) => c.push(r),
            None => clusters.push(vec![r]),
        }
    }
    clusters
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of `sum coeffs[i] z^i` (leading coefficient nonzero),
/// by Aberth-Ehrlich iteration followed by Newton polishing.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    // Cauchy bound on root moduli
    let radius = 1.0 + coeffs[..n].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(radius * 0.5, 0.4 + std::f64::consts::TAU * i as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(coeffs, z[i]);
            if p.is_zero() {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step < 1e-16 {
            break;
        }
    }
    for zi in &mut z {
        for _ in 0..3 {
            let (p, dp) = horner(coeffs, *zi);
            if dp.is_zero() || p.is_zero() {
                break;
            }
            *zi -= p / dp;
        }
        let (p, _) = horner(coeffs, *zi);
        let scale: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm() * zi.norm().powi(i as i32))
            .sum();
        let residual = if p.is_zero() { 0.0 } else { p.norm() / scale };
        if !residual.is_finite() || residual > 1e-10 {
            return Err(Error::RootSolver { residual });
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::build_equivariant_map;
    use crate::point::chordal_distance;

    #[test]
    fn roots_of_known_polynomial() {
        // (z - 1)(z + 2)(z - i) expanded
        let i = Complex64::i();
        let c = |re, im| Complex64::new(re, im);
        let coeffs = vec![c(0.0, 2.0), c(-2.0, -1.0), c(1.0, -1.0), c(1.0, 0.0)];
        let mut roots = polynomial_roots(&coeffs).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expected = [c(-2.0, 0.0), i, c(1.0, 0.0)];
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn fixed_points_of_degree_four_map() {
        let g = build_equivariant_map(1).unwrap();
        let fps = find_fixed_points_dim1(&g).unwrap();
        assert_eq!(fps.iter().map(|f| f.multiplicity).sum::<usize>(), 5);
        let fmap = g.to_float();
        for f in &fps {
            assert!(chordal_distance(&fmap.evaluate(&f.point).unwrap(), &f.point) < 1e-9);
        }
        let superattracting = fps.iter().filter(|f| f.multiplier.norm() < 1e-9).count();
        assert_eq!(superattracting, 3);
        let repelling: Vec<_> = fps.iter().filter(|f| f.multiplier.norm() > 1.0).collect();
        assert_eq!(repelling.len(), 2);
        for f in repelling {
            assert!((f.multiplier - Complex64::new(2.0, 0.0)).norm() < 1e-9, "{}", f.multiplier);
        }
    }

    #[test]
    fn rejects_higher_dimensions() {
        let g = build_equivariant_map(2).unwrap();
        assert!(find_fixed_points_dim1(&g).is_err());
    }
}
