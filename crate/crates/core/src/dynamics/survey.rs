//! Monte Carlo survey of the basins of the superattracting fixed points.
//!
//! Sample `i` of a survey with seed `s` is drawn from the ChaCha8 stream `i`
//! of seed `s`, so every sample, and therefore every report, is independent
//! of how rayon schedules the work.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dynamics::orbit::{classify_basin, BasinLabel};
use crate::error::Result;
use crate::map::PolynomialMap;
use crate::point::{ProjectivePoint, RationalPoint};
use crate::symmetry::enumerate_superattractors;

/// Fubini-Study uniform random point of P^k: independent standard complex
/// Gaussian coordinates, canonicalized.
pub fn sample_point(k: usize, seed: u64, index: u64) -> ProjectivePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        let coords: Vec<Complex64> = (0..=k)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(p) = ProjectivePoint::new(coords) {
            return p;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurveyParams {
    pub sample_count: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub capture_tol: f64,
}

impl Default for SurveyParams {
    fn default() -> Self {
        SurveyParams {
            sample_count: 10_000,
            seed: 42,
            max_iter: 5000,
            capture_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinReport {
    pub k: usize,
    pub degree: u32,
    pub params: SurveyParams,
    pub attractors: Vec<RationalPoint>,
    pub per_attractor_counts: Vec<usize>,
    /// Mean iterations to capture per attractor (0 when never hit).
    pub per_attractor_mean_iters: Vec<f64>,
    pub unresolved_count: usize,
    pub mean_capture_iterations: f64,
    pub wall_time: Duration,
}

impl BasinReport {
    pub fn resolved_fraction(&self) -> f64 {
        if self.params.sample_count == 0 {
            return 1.0;
        }
        1.0 - self.unresolved_count as f64 / self.params.sample_count as f64
    }
}

/// Classifies `sample_count` random points against the 0/1 superattractors.
pub fn basin_survey(map: &PolynomialMap, params: SurveyParams) -> Result<BasinReport> {
    let started = Instant::now();
    let k = map.k();
    let exact = enumerate_superattractors(k);
    let attractors: Vec<ProjectivePoint> = exact.iter().map(RationalPoint::to_float).collect();
    let fmap = map.to_float();
    let labels: Vec<BasinLabel> = (0..params.sample_count as u64)
        .into_par_iter()
        .map(|i| {
            let p = sample_point(k, params.seed, i);
            classify_basin(&fmap, &p, &attractors, params.max_iter, params.capture_tol)
        })
        .collect::<Result<_>>()?;

    let mut counts = vec![0usize; attractors.len()];
    let mut iter_sums = vec![0u64; attractors.len()];
    let mut unresolved = 0;
    for label in &labels {
        match *label {
            BasinLabel::Captured { attractor, iterations } => {
                counts[attractor] += 1;
                iter_sums[attractor] += iterations as u64;
            }
            BasinLabel::Unresolved { .. } => unresolved += 1,
        }
    }
    let captured: usize = counts.iter().sum();
    let mean_capture_iterations = if captured == 0 {
        0.0
    } else {
        iter_sums.iter().sum::<u64>() as f64 / captured as f64
    };
    Ok(BasinReport {
        k,
        degree: map.degree(),
        params,
        per_attractor_mean_iters: counts
            .iter()
            .zip(&iter_sums)
            .map(|(&c, &s)| if c == 0 { 0.0 } else { s as f64 / c as f64 })
            .collect(),
        attractors: exact,
        per_attractor_counts: counts,
        unresolved_count: unresolved,
        mean_capture_iterations,
        wall_time: started.elapsed(),
    })
}

/// Largest standardized deviation `|n_i - N p| / sqrt(N p (1 - p))` within
/// each class of attractors expected to have equal basin mass, with `p`
/// the pooled class frequency.
pub fn max_class_deviation(report: &BasinReport, classes: &[Vec<usize>]) -> f64 {
    let n = report.params.sample_count as f64;
    let mut worst: f64 = 0.0;
    for class in classes.iter().filter(|c| c.len() > 1) {
        let pooled: usize = class.iter().map(|&i| report.per_attractor_counts[i]).sum();
        let p = pooled as f64 / (class.len() as f64 * n);
        let sigma = (n * p * (1.0 - p)).sqrt();
        if sigma == 0.0 {
            continue;
        }
        for &i in class {
            worst = worst.max((report.per_attractor_counts[i] as f64 - n * p).abs() / sigma);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::build_equivariant_map;

    #[test]
    fn empty_survey() {
        let g = build_equivariant_map(1).unwrap();
        let r = basin_survey(&g, SurveyParams { sample_count: 0, ..Default::default() }).unwrap();
        assert_eq!(r.per_attractor_counts, vec![0, 0, 0]);
        assert_eq!(r.unresolved_count, 0);
    }

    #[test]
    fn counts_are_conserved() {
        let g = build_equivariant_map(2).unwrap();
        let params = SurveyParams { sample_count: 500, seed: 7, ..Default::default() };
        let r = basin_survey(&g, params).unwrap();
        assert_eq!(r.per_attractor_counts.iter().sum::<usize>() + r.unresolved_count, 500);
        assert_eq!(r.attractors.len(), 7);
    }

    #[test]
    fn samples_depend_only_on_seed_and_index() {
        assert_eq!(sample_point(2, 3, 17), sample_point(2, 3, 17));
        assert_ne!(sample_point(2, 3, 17), sample_point(2, 3, 18));
        assert_ne!(sample_point(2, 3, 17), sample_point(2, 4, 17));
    }
}
