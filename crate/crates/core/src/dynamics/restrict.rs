//! Restriction of a map to an invariant flat, expressed in flat coordinates.

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::verify::{critical_multiplicities, verify_invariant_hyperplane, verify_superattracting, Superattraction};
use crate::error::{Error, Result};
use crate::linalg::{invert, rref};
use crate::map::{PolynomialMap, MAX_EXACT_DET_K};
use crate::point::RationalPoint;
use crate::poly::{rat, Division, Polynomial, Rational};
use crate::symmetry::{enumerate_superattractors, Flat, Hyperplane};

/// A map restricted to a flat `L^m`, acting on P^m.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub flat: Flat,
    pub map: PolynomialMap,
    /// Induced linear forms divided out of every component, with powers.
    pub stripped: Vec<(Vec<i64>, u32)>,
    /// `c` in `map ∘ E = c · P · (E ∘ restricted)` where `P` is the product
    /// of the stripped forms.
    pub identity_scalar: Rational,
    /// Rows of the embedding used to read off flat coordinates.
    pivot_rows: Vec<usize>,
    pivot_inverse: Vec<Vec<Rational>>,
}

impl Restriction {
    /// Flat coordinates of an ambient point lying on the flat.
    pub fn flat_coordinates(&self, p: &RationalPoint) -> Option<RationalPoint> {
        let rows: Vec<Rational> = self.pivot_rows.iter().map(|&i| p.coords()[i].clone()).collect();
        let y: Vec<Rational> = self
            .pivot_inverse
            .iter()
            .map(|row| row.iter().zip(&rows).fold(Rational::zero(), |a, (u, v)| a + u * v))
            .collect();
        let back = self.flat.embed(&y).ok()?;
        (back == *p).then(|| RationalPoint::new(y).ok()).flatten()
    }
}

/// Restricts `map` to `flat`. The flat's hyperplanes must be invariant.
pub fn restrict_map(map: &PolynomialMap, flat: &Flat) -> Result<Restriction> {
    let k = map.k();
    if flat.k != k {
        return Err(Error::DimensionMismatch { expected: k, got: flat.k });
    }
    for &h in &flat.hyperplanes {
        if !verify_invariant_hyperplane(map, h)?.holds() {
            return Err(Error::InvarianceViolation);
        }
    }
    let e = &flat.embedding;
    let m1 = flat.m + 1;
    let images: Vec<Polynomial> = (0..=k).map(|i| Polynomial::linear_form(e.row(i))).collect();
    let pulled: Vec<Polynomial> = map.components().iter().map(|c| c.substitute(&images)).collect();

    // an invertible (m+1)×(m+1) block of rows of the embedding
    let (_, pivots) = rref(e.transpose().to_rational());
    let block: Vec<Vec<Rational>> = pivots.iter().map(|&i| e.row(i).iter().map(|&v| rat(v)).collect()).collect();
    let inverse = invert(&block).ok_or(Error::InvarianceViolation)?;
    let mut comps: Vec<Polynomial> = inverse
        .iter()
        .map(|row| {
            row.iter()
                .zip(&pivots)
                .fold(Polynomial::zero(m1), |acc, (c, &i)| &acc + &pulled[i].scale(c))
        })
        .collect();
    if embed_components(flat, &comps) != pulled {
        return Err(Error::InvarianceViolation);
    }

    let mut stripped = Vec::new();
    if flat.m >= 1 {
        for (form, _) in flat.induced_forms() {
            let lf = Polynomial::linear_form(&form);
            let mut power = 0;
            loop {
                let divided: Option<Vec<Polynomial>> = comps
                    .iter()
                    .map(|c| c.divide_exact(&lf).ok().and_then(Division::exact))
                    .collect();
                match divided {
                    Some(d) => {
                        comps = d;
                        power += 1;
                    }
                    None => break,
                }
            }
            if power > 0 {
                stripped.push((form, power));
            }
        }
        if comps.iter().any(Polynomial::is_zero) {
            return Err(Error::DegenerateMap);
        }
    }
    let restricted = PolynomialMap::new(comps)?.content_normalized();
    check_no_common_zero(&restricted)?;

    // map ∘ E = c · P · (E ∘ restricted)
    let factor = stripped.iter().fold(Polynomial::one(m1), |acc, (f, p)| {
        &acc * &Polynomial::linear_form(f).pow(*p)
    });
    let rhs: Vec<Polynomial> = embed_components(flat, restricted.components())
        .iter()
        .map(|c| c * &factor)
        .collect();
    let identity_scalar = pulled
        .iter()
        .zip(&rhs)
        .find_map(|(a, b)| b.terms().next().map(|(mono, cb)| a.coefficient(mono) / cb))
        .ok_or(Error::InvarianceViolation)?;
    if identity_scalar.is_zero() || pulled.iter().zip(&rhs).any(|(a, b)| *a != b.scale(&identity_scalar)) {
        return Err(Error::InvarianceViolation);
    }

    Ok(Restriction {
        flat: flat.clone(),
        map: restricted,
        stripped,
        identity_scalar,
        pivot_rows: pivots,
        pivot_inverse: inverse,
    })
}

fn embed_components(flat: &Flat, comps: &[Polynomial]) -> Vec<Polynomial> {
    let n = comps[0].n_vars();
    (0..=flat.k)
        .map(|i| {
            flat.embedding
                .row(i)
                .iter()
                .zip(comps)
                .fold(Polynomial::zero(n), |acc, (&a, c)| if a == 0 { acc } else { &acc + &c.scale(&rat(a)) })
        })
        .collect()
}

/// Components must not vanish together at 50 seeded random points.
fn check_no_common_zero(map: &PolynomialMap) -> Result<()> {
    let f = map.to_float();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let x: Vec<Complex64> = (0..map.n_vars())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if f.eval_vector(&x).iter().all(|v| v.norm() == 0.0) {
            return Err(Error::HolomorphyViolation {
                point: format!("{x:?}"),
            });
        }
    }
    Ok(())
}

/// One irreducible component of the critical set of a restricted map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalComponent {
    /// Linear form in flat coordinates.
    pub form: Vec<i64>,
    /// Ambient arrangement hyperplanes inducing the form.
    pub ambient: Vec<Hyperplane>,
    pub multiplicity: u32,
    /// The ambient point, when the flat is a line and the component a point.
    pub point: Option<RationalPoint>,
}

/// Critical set of the restricted map in terms of the induced arrangement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedCriticalSet {
    pub components: Vec<CriticalComponent>,
    /// Determinant left after dividing out every induced form; a nonzero
    /// constant when the critical set lies in the induced arrangement.
    pub residual: Polynomial,
}

impl RestrictedCriticalSet {
    pub fn contained_in_arrangement(&self) -> bool {
        self.residual.as_constant().is_some_and(|c| !c.is_zero())
    }

    pub fn points(&self) -> Vec<RationalPoint> {
        self.components.iter().filter_map(|c| c.point.clone()).collect()
    }
}

/// Exact critical set of a restriction to a flat of dimension 1..=3.
pub fn restricted_critical_set(r: &Restriction) -> Result<RestrictedCriticalSet> {
    let m = r.flat.m;
    if m == 0 {
        return Err(Error::InvalidArgument("a point has no critical set".into()));
    }
    if m > MAX_EXACT_DET_K {
        return Err(Error::DeterminantUnsupported { k: m, max: MAX_EXACT_DET_K });
    }
    let forms = r.flat.induced_forms();
    let covs: Vec<Vec<i64>> = forms.iter().map(|(f, _)| f.clone()).collect();
    let det = r.map.jacobian_det()?;
    let (mults, residual) = critical_multiplicities(&det, &covs)?;
    let components = forms
        .into_iter()
        .zip(mults)
        .filter(|(_, mult)| *mult > 0)
        .map(|((form, ambient), multiplicity)| {
            let point = (m == 1).then(|| {
                // zero of a y1 + b y2 is [-b : a]
                r.flat.embed(&[rat(-form[1]), rat(form[0])]).expect("nonzero")
            });
            CriticalComponent { form, ambient, multiplicity, point }
        })
        .collect();
    Ok(RestrictedCriticalSet { components, residual })
}

/// Ambient superattractors on the flat with the superattraction check run on
/// the restricted map in flat coordinates.
pub fn restricted_superattractors(r: &Restriction) -> Result<Vec<(RationalPoint, RationalPoint, Superattraction)>> {
    let mut out = Vec::new();
    for p in enumerate_superattractors(r.flat.k) {
        if let Some(y) = r.flat_coordinates(&p) {
            let status = if r.flat.m == 0 {
                let img = r.map.evaluate_exact(&y)?;
                if img == y { Superattraction::Holds } else { Superattraction::NotFixed { image: img } }
            } else {
                verify_superattracting(&r.map, &y)?
            };
            out.push((p, y, status));
        }
    }
    Ok(out)
}
