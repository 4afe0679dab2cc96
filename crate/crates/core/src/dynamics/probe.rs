//! Numerical expansion probe on orbits that stay away from the critical set.
//!
//! For an orbit `x_0, ..., x_n` the chart derivatives `D_i` (source chart at
//! `x_i`, target chart at `x_{i+1}`) compose to `M = D_{n-1} ... D_0`, whose
//! smallest singular value measures the weakest expansion along the orbit.
//! It is computed as `1 / σ_max(D_0^{-1} ... D_{n-1}^{-1})`, with the partial
//! products rescaled every step, which keeps full relative precision even
//! when `M` is badly conditioned.
//!
//! The orbit itself is carried in double-double arithmetic. In double
//! precision an orbit on a repelling cycle of multiplier 2 has already moved
//! by about `2^40 · 1e-16` after 40 steps, which is visible in the exponent.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::orbit::CriticalSet;
use crate::dynamics::survey::sample_point;
use crate::error::{Error, Result};
use crate::map::{dd_from, dd_to_f64, DdComplex, FloatMap};
use crate::point::ProjectivePoint;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeParams {
    pub sample_count: usize,
    pub seed: u64,
    pub n_steps: usize,
    pub delta: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams {
            sample_count: 10_000,
            seed: 42,
            n_steps: 40,
            delta: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionProbeResult {
    pub k: usize,
    pub delta: f64,
    pub n_steps: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub surviving_orbits: usize,
    /// `(1/n) log σ_min` for each surviving orbit, in sample order.
    pub growth_exponents: Vec<f64>,
}

impl ExpansionProbeResult {
    pub fn is_empty(&self) -> bool {
        self.surviving_orbits == 0
    }

    pub fn min(&self) -> Option<f64> {
        self.growth_exponents.iter().copied().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.growth_exponents.iter().copied().reduce(f64::max)
    }

    pub fn median(&self) -> Option<f64> {
        if self.growth_exponents.is_empty() {
            return None;
        }
        let mut v = self.growth_exponents.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
    }
}

/// Growth exponent `(1/n) log σ_min(D g^n)` along the orbit of `start`, or
/// `None` if the orbit comes within `delta` of the critical set at any of
/// `x_0, ..., x_n`.
pub fn probe_orbit(
    map: &FloatMap,
    critical: &CriticalSet,
    start: &ProjectivePoint,
    n_steps: usize,
    delta: f64,
) -> Result<Option<f64>> {
    let start: Vec<DdComplex> = start.coords().iter().map(|&z| dd_from(z)).collect();
    probe_orbit_dd(map, critical, &start, n_steps, delta)
}

/// [`probe_orbit`] from a start vector given in double-double precision.
pub fn probe_orbit_dd(
    map: &FloatMap,
    critical: &CriticalSet,
    start: &[DdComplex],
    n_steps: usize,
    delta: f64,
) -> Result<Option<f64>> {
    let k = map.k();
    let mut x_dd = normalize_dd(start.to_vec())?;
    let mut x = round(&x_dd)?;
    if critical.distance(&x) < delta {
        return Ok(None);
    }
    let mut inv_product = DMatrix::<Complex64>::identity(k, k);
    let mut log_scale = 0.0;
    for _ in 0..n_steps {
        let next_dd = normalize_dd(map.eval_vector_dd(&x_dd))?;
        let next = round(&next_dd)?;
        if critical.distance(&next) < delta {
            return Ok(None);
        }
        let d = map.chart_derivative(&x, x.chart_index(), next.chart_index());
        let Some(d_inv) = d.try_inverse() else {
            return Ok(None);
        };
        inv_product = inv_product * d_inv;
        let norm = inv_product.norm();
        inv_product /= Complex64::new(norm, 0.0);
        log_scale += norm.ln();
        x_dd = next_dd;
        x = next;
    }
    if n_steps == 0 {
        return Ok(Some(0.0));
    }
    let sigma_max = inv_product.singular_values().max();
    Ok(Some(-(log_scale + sigma_max.ln()) / n_steps as f64))
}

/// Divides by the coordinate of largest modulus.
fn normalize_dd(v: Vec<DdComplex>) -> Result<Vec<DdComplex>> {
    let (j, m) = v
        .iter()
        .map(|z| dd_to_f64(z).norm())
        .enumerate()
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if m == 0.0 {
        return Err(Error::ZeroPoint);
    }
    if !m.is_finite() {
        return Err(Error::NumericOverflow);
    }
    let pivot = v[j];
    Ok(v.into_iter().map(|z| z / pivot).collect())
}

fn round(v: &[DdComplex]) -> Result<ProjectivePoint> {
    ProjectivePoint::new(v.iter().map(dd_to_f64).collect())
}

/// Runs [`probe_orbit`] on `sample_count` seeded uniform samples.
pub fn expansion_probe(map: &FloatMap, critical: &CriticalSet, params: ProbeParams) -> Result<ExpansionProbeResult> {
    let k = map.k();
    let outcomes: Vec<Option<f64>> = (0..params.sample_count as u64)
        .into_par_iter()
        .map(|i| {
            let p = sample_point(k, params.seed, i);
            probe_orbit(map, critical, &p, params.n_steps, params.delta)
        })
        .collect::<Result<_>>()?;
    let growth_exponents: Vec<f64> = outcomes.into_iter().flatten().collect();
    Ok(ExpansionProbeResult {
        k,
        delta: params.delta,
        n_steps: params.n_steps,
        sample_count: params.sample_count,
        seed: params.seed,
        surviving_orbits: growth_exponents.len(),
        growth_exponents,
    })
}
