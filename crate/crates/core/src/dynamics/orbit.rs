//! Floating-point orbits, distance to the critical set, and basin labels.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::map::FloatMap;
use crate::point::{chordal_distance, ProjectivePoint};
use crate::symmetry::Hyperplane;

/// A union of hyperplanes through the origin, used as the critical set.
#[derive(Clone, Debug)]
pub struct CriticalSet {
    forms: Vec<Vec<f64>>,
}

impl CriticalSet {
    pub fn from_hyperplanes(k: usize, hyperplanes: &[Hyperplane]) -> Self {
        Self::from_covectors(hyperplanes.iter().map(|h| h.covector(k)))
    }

    pub fn from_covectors<I: IntoIterator<Item = Vec<i64>>>(covectors: I) -> Self {
        CriticalSet {
            forms: covectors
                .into_iter()
                .map(|c| {
                    let norm = c.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                    c.iter().map(|&v| v as f64 / norm).collect()
                })
                .collect(),
        }
    }

    /// Chordal distance from `p` to the nearest hyperplane,
    /// `min |ℓ·x| / (|ℓ| |x|)`.
    pub fn distance(&self, p: &ProjectivePoint) -> f64 {
        let x = p.coords();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        self.forms
            .iter()
            .map(|l| l.iter().zip(x).map(|(a, z)| z * *a).sum::<Complex64>().norm() / norm)
            .fold(f64::INFINITY, f64::min)
    }
}

/// An orbit `p, g(p), ..., g^n(p)` in canonical coordinates.
#[derive(Clone, Debug)]
pub struct OrbitRecord {
    pub start: ProjectivePoint,
    pub points: Vec<ProjectivePoint>,
    /// Distance to the critical set at each recorded point, when requested.
    pub min_dist_to_critical: Option<Vec<f64>>,
}

pub fn iterate(map: &FloatMap, start: &ProjectivePoint, n: usize, critical: Option<&CriticalSet>) -> Result<OrbitRecord> {
    let mut points = Vec::with_capacity(n + 1);
    points.push(start.clone());
    for i in 0..n {
        let next = map.evaluate(&points[i])?;
        points.push(next);
    }
    let min_dist_to_critical = critical.map(|c| points.iter().map(|p| c.distance(p)).collect());
    Ok(OrbitRecord {
        start: start.clone(),
        points,
        min_dist_to_critical,
    })
}

/// Basin classification of a single orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasinLabel {
    Captured { attractor: usize, iterations: usize },
    Unresolved { max_iterations: usize },
}

impl BasinLabel {
    pub fn attractor(&self) -> Option<usize> {
        match *self {
            BasinLabel::Captured { attractor, .. } => Some(attractor),
            BasinLabel::Unresolved { .. } => None,
        }
    }
}

/// Iterates until the orbit is within `capture_tol` of an attractor and the
/// next iterate is strictly closer to it (or lands on it exactly).
///
/// Points on the Julia set never satisfy this in exact arithmetic, but a
/// floating-point orbit started at a repelling cycle drifts off it after
/// roughly `-log2(1e-16) / log2|multiplier|` steps, so such points are only
/// reported as unresolved for iteration caps below that horizon.
pub fn classify_basin(
    map: &FloatMap,
    start: &ProjectivePoint,
    attractors: &[ProjectivePoint],
    max_iter: usize,
    capture_tol: f64,
) -> Result<BasinLabel> {
    let mut x = start.clone();
    for it in 0..=max_iter {
        let (j, d) = nearest(&x, attractors);
        let next = map.evaluate(&x)?;
        if d < capture_tol {
            let d_next = chordal_distance(&next, &attractors[j]);
            if d_next < d || d_next == 0.0 {
                return Ok(BasinLabel::Captured {
                    attractor: j,
                    iterations: it,
                });
            }
        }
        x = next;
    }
    Ok(BasinLabel::Unresolved {
        max_iterations: max_iter,
    })
}

fn nearest(x: &ProjectivePoint, attractors: &[ProjectivePoint]) -> (usize, f64) {
    attractors
        .iter()
        .enumerate()
        .map(|(i, a)| (i, chordal_distance(x, a)))
        .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::build_equivariant_map;
    use crate::point::PROJECTIVE_EQ_TOL;
    use crate::symmetry::{enumerate_superattractors, hyperplane_arrangement};

    fn setup(k: usize) -> (FloatMap, Vec<ProjectivePoint>, CriticalSet) {
        let g = build_equivariant_map(k).unwrap().to_float();
        let att = enumerate_superattractors(k).iter().map(|p| p.to_float()).collect();
        (g, att, CriticalSet::from_hyperplanes(k, &hyperplane_arrangement(k)))
    }

    #[test]
    fn orbit_examples() {
        let (g, att, crit) = setup(1);
        let fixed = &att[2];
        let o = iterate(&g, fixed, 7, None).unwrap();
        assert!(o.points.iter().all(|p| p == fixed));
        let o = iterate(&g, &ProjectivePoint::from_real(&[2.0, 1.0]).unwrap(), 3, Some(&crit)).unwrap();
        let zero = ProjectivePoint::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(o.points[1], zero);
        assert_eq!(o.points[3], zero);
        assert_eq!(o.min_dist_to_critical.unwrap()[1], 0.0);
        let o = iterate(&g, &zero, 0, None).unwrap();
        assert_eq!(o.points, vec![zero]);
    }

    #[test]
    fn orbit_consistency() {
        let (g, _, _) = setup(2);
        let p = ProjectivePoint::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.7, 0.2), Complex64::new(1.0, 0.0)]).unwrap();
        let o = iterate(&g, &p, 20, None).unwrap();
        for w in o.points.windows(2) {
            assert!(chordal_distance(&g.evaluate(&w[0]).unwrap(), &w[1]) < PROJECTIVE_EQ_TOL);
        }
    }

    #[test]
    fn classify_examples() {
        let (g, att, _) = setup(1);
        for (i, a) in att.iter().enumerate() {
            assert_eq!(
                classify_basin(&g, a, &att, 10, 1e-8).unwrap(),
                BasinLabel::Captured { attractor: i, iterations: 0 }
            );
        }
        let label = classify_basin(&g, &ProjectivePoint::from_real(&[2.0, 1.0]).unwrap(), &att, 100, 1e-8).unwrap();
        match label {
            BasinLabel::Captured { attractor, iterations } => {
                assert_eq!(att[attractor], ProjectivePoint::from_real(&[0.0, 1.0]).unwrap());
                assert!(iterations <= 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repelling_fixed_point_unresolved_within_horizon() {
        let (g, att, _) = setup(1);
        let w = ProjectivePoint::new(vec![Complex64::new(0.5, 3f64.sqrt() / 2.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(
            classify_basin(&g, &w, &att, 30, 1e-8).unwrap(),
            BasinLabel::Unresolved { max_iterations: 30 }
        );
    }

    #[test]
    fn distance_to_critical_set() {
        let (_, att, crit) = setup(2);
        for a in &att {
            assert_eq!(crit.distance(a), 0.0);
        }
        let p = ProjectivePoint::from_real(&[1.0, 3.0, 7.0]).unwrap();
        // nearest is {x1 = 0}: 1 / |(1,3,7)|
        assert!((crit.distance(&p) - 1.0 / 59f64.sqrt()).abs() < 1e-15);
    }
}
