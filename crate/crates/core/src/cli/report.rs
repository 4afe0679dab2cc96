//! JSON report shapes written by the command-line tool.

use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::Value;

use crate::dynamics::{BasinReport, ExpansionProbeResult};
use crate::map::PolynomialMap;
use crate::point::RationalPoint;
use crate::poly::Rational;

/// Per-orbit exponents beyond this many are dropped from probe reports.
pub const MAX_LISTED_EXPONENTS: usize = 1000;

/// Integral rationals become JSON integers when they fit, everything else a
/// string such as `"-3/7"`.
pub fn rational_json(q: &Rational) -> Value {
    if q.is_integer() {
        if let Some(v) = q.to_integer().to_i64() {
            return Value::from(v);
        }
    }
    Value::from(q.to_string())
}

pub fn point_json(p: &RationalPoint) -> Value {
    Value::Array(p.coords().iter().map(rational_json).collect())
}

#[derive(Debug, Serialize)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coefficient: Value,
}

/// Components of a map as lists of monomials with coefficients.
pub fn map_json(map: &PolynomialMap) -> Vec<Vec<Term>> {
    map.components()
        .iter()
        .map(|c| {
            c.terms()
                .map(|(m, q)| Term { exponents: m.exponents().to_vec(), coefficient: rational_json(q) })
                .collect()
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Certificate {
    pub name: String,
    pub subject: String,
    pub passed: bool,
    pub detail: String,
    pub millis: f64,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub k: usize,
    pub degree: u32,
    pub group_elements: usize,
    pub hyperplanes: Vec<String>,
    pub attractors: Vec<Value>,
    pub certificates: Vec<Certificate>,
    pub all_passed: bool,
}

#[derive(Debug, Serialize)]
pub struct AttractorEntry {
    pub point: Value,
    pub count: usize,
    pub mean_iters: f64,
}

#[derive(Debug, Serialize)]
pub struct BasinsJson {
    pub k: usize,
    pub degree: u32,
    pub seed: u64,
    pub samples: usize,
    pub max_iter: usize,
    pub capture_tol: f64,
    pub attractors: Vec<AttractorEntry>,
    pub unresolved: usize,
    pub wall_ms: f64,
}

impl From<&BasinReport> for BasinsJson {
    fn from(r: &BasinReport) -> Self {
        BasinsJson {
            k: r.k,
            degree: r.degree,
            seed: r.params.seed,
            samples: r.params.sample_count,
            max_iter: r.params.max_iter,
            capture_tol: r.params.capture_tol,
            attractors: r
                .attractors
                .iter()
                .zip(&r.per_attractor_counts)
                .zip(&r.per_attractor_mean_iters)
                .map(|((p, &count), &mean_iters)| AttractorEntry { point: point_json(p), count, mean_iters })
                .collect(),
            unresolved: r.unresolved_count,
            wall_ms: r.wall_time.as_secs_f64() * 1e3,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ProbeJson {
    pub k: usize,
    pub seed: u64,
    pub samples: usize,
    pub delta: f64,
    pub n_steps: usize,
    pub surviving: usize,
    pub empty: bool,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
    pub growth_exponents: Vec<f64>,
    pub truncated: bool,
}

impl From<&ExpansionProbeResult> for ProbeJson {
    fn from(r: &ExpansionProbeResult) -> Self {
        ProbeJson {
            k: r.k,
            seed: r.seed,
            samples: r.sample_count,
            delta: r.delta,
            n_steps: r.n_steps,
            surviving: r.surviving_orbits,
            empty: r.is_empty(),
            min: r.min(),
            median: r.median(),
            max: r.max(),
            growth_exponents: r.growth_exponents.iter().take(MAX_LISTED_EXPONENTS).copied().collect(),
            truncated: r.growth_exponents.len() > MAX_LISTED_EXPONENTS,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CriticalJson {
    pub form: Vec<i64>,
    pub ambient: Vec<String>,
    pub multiplicity: u32,
    pub point: Option<Value>,
}

#[derive(Debug, Serialize)]
pub struct RestrictJson {
    pub k: usize,
    pub hyperplanes: Vec<String>,
    pub flat_dimension: usize,
    /// Columns span the flat: ambient point = embedding · flat coordinates.
    pub embedding: Vec<Vec<i64>>,
    pub degree: u32,
    pub components: Vec<Vec<Term>>,
    pub stripped_forms: Vec<(Vec<i64>, u32)>,
    pub critical_set: Vec<CriticalJson>,
    pub critical_set_in_arrangement: Option<bool>,
    /// `m + 3`, the degree of the map of the same family on P^m.
    pub family_degree: u32,
    /// The restricted degree differs from `family_degree`, so the restriction
    /// is not conjugate to the family map of that dimension.
    pub not_conjugate_to_family: bool,
    pub certificates: Vec<Certificate>,
    pub all_passed: bool,
}
