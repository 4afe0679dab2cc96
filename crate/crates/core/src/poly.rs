//! Exact multivariate polynomials over the rationals.
//!
//! Polynomials are stored sparsely as a map from exponent vectors to nonzero
//! rational coefficients. Only the operations needed for the equivariant maps
//! are provided: ring arithmetic, formal partial derivatives, substitution of
//! polynomials for variables, and exact division by linear forms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Monomials as one byte per exponent, so multiplication is addition.
type PackedTerms = HashMap<u64, i128>;

const PACKED_VARS: usize = 8;

fn pack(e: &[u32]) -> Option<u64> {
    if e.len() > PACKED_VARS {
        return None;
    }
    e.iter().enumerate().try_fold(0u64, |acc, (i, &v)| {
        (v <= u8::MAX as u32).then(|| acc | (v as u64) << (8 * i))
    })
}

fn unpack(m: u64, n: usize) -> Vec<u32> {
    (0..n).map(|i| ((m >> (8 * i)) & 0xff) as u32).collect()
}

fn to_packed(p: &Polynomial) -> Option<PackedTerms> {
    p.terms
        .iter()
        .map(|(m, c)| {
            let v = if c.is_integer() { i128::try_from(c.to_integer()).ok()? } else { None? };
            Some((pack(&m.0)?, v))
        })
        .collect()
}

/// Product of packed polynomials; callers keep total degrees below 256.
fn packed_mul(a: &PackedTerms, b: &PackedTerms) -> Option<PackedTerms> {
    let mut out = PackedTerms::with_capacity(a.len() * b.len());
    for (ma, ca) in a {
        for (mb, cb) in b {
            let slot = out.entry(ma + mb).or_insert(0);
            *slot = slot.checked_add(ca.checked_mul(*cb)?)?;
        }
    }
    out.retain(|_, c| *c != 0);
    Some(out)
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exponent vector of a monomial, one entry per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(n_vars: usize) -> Self {
        Monomial(vec![0; n_vars])
    }

    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Sparse polynomial in a fixed number of variables with rational coefficients.
///
/// Every stored coefficient is nonzero; the zero polynomial has no terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    n_vars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

/// Outcome of an exact division attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Division {
    Exact(Polynomial),
    /// The division left this nonzero remainder (free of the pivot variable).
    Remainder(Polynomial),
}

impl Division {
    pub fn exact(self) -> Option<Polynomial> {
        match self {
            Division::Exact(q) => Some(q),
            Division::Remainder(_) => None,
        }
    }
}

impl Polynomial {
    pub fn zero(n_vars: usize) -> Self {
        Polynomial {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, Rational::one())
    }

    pub fn constant(n_vars: usize, c: Rational) -> Self {
        Self::monomial(n_vars, Monomial::one(n_vars), c)
    }

    /// The variable `x_{i+1}` (zero-based index `i`).
    pub fn var(n_vars: usize, i: usize) -> Self {
        assert!(i < n_vars, "variable index out of range");
        Self::monomial(n_vars, Monomial::var(n_vars, i), Rational::one())
    }

    pub fn monomial(n_vars: usize, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.0.len(), n_vars, "monomial arity mismatch");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { n_vars, terms }
    }

    /// Linear form `sum_i coeffs[i] * x_i`.
    pub fn linear_form(coeffs: &[i64]) -> Self {
        let n = coeffs.len();
        let mut p = Polynomial::zero(n);
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(n, i), rat(c));
        }
        p
    }

    pub fn from_terms<I>(n_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Polynomial::zero(n_vars);
        for (e, c) in terms {
            assert_eq!(e.len(), n_vars, "monomial arity mismatch");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    /// The constant value, if the polynomial has degree zero (or is zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.degree() {
            None => Some(Rational::zero()),
            Some(0) => Some(self.coefficient(&Monomial::one(self.n_vars))),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.n_vars);
        }
        Polynomial {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.n_vars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to `x_{i+1}`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.n_vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, c * rat(e as i64));
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.n_vars, "point arity mismatch");
        let mut sum = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            sum += t;
        }
        sum
    }

    /// Substitutes `images[i]` for `x_{i+1}`. The images must share one
    /// variable count, which becomes the variable count of the result.
    pub fn substitute(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), self.n_vars, "substitution arity mismatch");
        if images.iter().all(|p| p.terms.len() == 1) {
            return self.substitute_monomials(images);
        }
        if let Some(p) = self.substitute_integral(images) {
            return p;
        }
        let target_vars = images.first().map_or(0, |p| p.n_vars);
        // powers[i][e] = images[i]^e, built lazily up to the largest exponent used
        let mut powers: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|p| vec![Polynomial::one(target_vars), p.clone()])
            .collect();
        let mut out = Polynomial::zero(target_vars);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target_vars, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let e = e as usize;
                while powers[i].len() <= e {
                    let next = powers[i].last().unwrap() * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e];
            }
            for (tm, tc) in t.terms {
                out.add_term(tm, tc);
            }
        }
        out
    }

    /// Substitution where every image is a single term, e.g. a signed
    /// permutation of the variables: each term maps to one term.
    fn substitute_monomials(&self, images: &[Polynomial]) -> Polynomial {
        let target_vars = images[0].n_vars;
        let singles: Vec<(&Monomial, &Rational)> = images.iter().map(|p| p.terms.iter().next().unwrap()).collect();
        let mut out = Polynomial::zero(target_vars);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; target_vars];
            let mut coef = c.clone();
            for (&k, (im, ic)) in m.0.iter().zip(&singles) {
                if k == 0 {
                    continue;
                }
                for (slot, &d) in e.iter_mut().zip(&im.0) {
                    *slot += k * d;
                }
                coef *= ic.pow(k as i32);
            }
            out.add_term(Monomial(e), coef);
        }
        out
    }

    /// [`Polynomial::substitute`] in 128-bit integer arithmetic with
    /// exponents packed one byte per variable. `None` when a coefficient is
    /// not an integer, the packing does not fit, or a value overflows.
    fn substitute_integral(&self, images: &[Polynomial]) -> Option<Polynomial> {
        let target_vars = images.first().map_or(0, |p| p.n_vars);
        let image_degree = images.iter().filter_map(Polynomial::degree).max().unwrap_or(0);
        let out_degree = self.degree().unwrap_or(0).checked_mul(image_degree)?;
        if target_vars > PACKED_VARS || out_degree > u8::MAX as u32 {
            return None;
        }
        let own = to_packed(self)?;
        let images: Vec<PackedTerms> = images.iter().map(to_packed).collect::<Option<_>>()?;
        let one: PackedTerms = HashMap::from([(0, 1)]);
        let mut powers: Vec<Vec<PackedTerms>> = images.iter().map(|p| vec![one.clone(), p.clone()]).collect();
        let mut out = PackedTerms::new();
        for (m, c) in &own {
            let mut t: PackedTerms = HashMap::from([(0, *c)]);
            for (i, e) in unpack(*m, self.n_vars).into_iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let e = e as usize;
                while powers[i].len() <= e {
                    let next = packed_mul(powers[i].last().unwrap(), &images[i])?;
                    powers[i].push(next);
                }
                t = packed_mul(&t, &powers[i][e])?;
            }
            for (tm, tc) in t {
                let slot = out.entry(tm).or_insert(0);
                *slot = slot.checked_add(tc)?;
            }
        }
        Some(Polynomial::from_terms(
            target_vars,
            out.into_iter()
                .filter(|(_, c)| *c != 0)
                .map(|(m, c)| (unpack(m, target_vars), Rational::from_integer(BigInt::from(c)))),
        ))
    }

    /// Whether every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Exact division by a nonzero constant or a linear form.
    ///
    /// For a linear form `a_p x_p + r(x)` with `x_p` the first variable that
    /// occurs, this performs long division in `x_p`. The remainder is
    /// the substitution `x_p := -r(x)/a_p`, which is zero exactly when the
    /// linear form divides `self`.
    pub fn divide_exact(&self, div: &Polynomial) -> Result<Division> {
        if div.n_vars != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                got: div.n_vars,
            });
        }
        if div.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(c) = div.as_constant() {
            return Ok(Division::Exact(self.scale(&c.recip())));
        }
        if div.degree() != Some(1) || !div.is_homogeneous() {
            return Err(Error::UnsupportedDivisor);
        }
        let coeffs: Vec<Rational> = (0..self.n_vars)
            .map(|i| div.coefficient(&Monomial::var(self.n_vars, i)))
            .collect();
        let pivot = coeffs.iter().position(|c| !c.is_zero()).unwrap();
        let inv_lead = coeffs[pivot].recip();

        let mut buckets: BTreeMap<u32, BTreeMap<Monomial, Rational>> = BTreeMap::new();
        for (m, c) in &self.terms {
            buckets
                .entry(m.0[pivot])
                .or_default()
                .insert(m.clone(), c.clone());
        }
        let top = buckets.keys().next_back().copied().unwrap_or(0);
        let mut quotient = Polynomial::zero(self.n_vars);
        for e in (1..=top).rev() {
            let Some(bucket) = buckets.remove(&e) else {
                continue;
            };
            for (m, c) in bucket {
                if c.is_zero() {
                    continue;
                }
                let q = &c * &inv_lead;
                let mut qm = m;
                qm.0[pivot] -= 1;
                for (j, a) in coeffs.iter().enumerate() {
                    if j == pivot || a.is_zero() {
                        continue;
                    }
                    let mut tm = qm.clone();
                    tm.0[j] += 1;
                    let slot = buckets.entry(e - 1).or_default().entry(tm).or_insert_with(Rational::zero);
                    *slot -= &q * a;
                }
                quotient.add_term(qm, q);
            }
        }
        let mut remainder = Polynomial::zero(self.n_vars);
        if let Some(rest) = buckets.remove(&0) {
            for (m, c) in rest {
                remainder.add_term(m, c);
            }
        }
        if remainder.is_zero() {
            Ok(Division::Exact(quotient))
        } else {
            Ok(Division::Remainder(remainder))
        }
    }

    /// Exact division by a product of linear forms, one factor at a time.
    pub fn divide_by_product(&self, factors: &[Polynomial]) -> Result<Division> {
        let mut q = self.clone();
        for f in factors {
            match q.divide_exact(f)? {
                Division::Exact(next) => q = next,
                rem => return Ok(rem),
            }
        }
        Ok(Division::Exact(q))
    }

    /// Largest power of `form` dividing `self` (for a nonzero polynomial).
    pub fn multiplicity_of(&self, form: &Polynomial) -> Result<(u32, Polynomial)> {
        let mut q = self.clone();
        let mut mult = 0;
        if q.is_zero() {
            return Ok((0, q));
        }
        while let Division::Exact(next) = q.divide_exact(form)? {
            q = next;
            mult += 1;
        }
        Ok((mult, q))
    }
}

/// `(lcm of denominators, gcd of numerators)` over a set of polynomials, so
/// that multiplying by `lcm / gcd` yields a primitive integer family.
pub fn content_scale<'a, I>(polys: I) -> Option<Rational>
where
    I: IntoIterator<Item = &'a Polynomial>,
{
    let mut lcm = BigInt::one();
    let mut gcd = BigInt::zero();
    let mut any = false;
    for p in polys {
        for c in p.terms.values() {
            any = true;
            lcm = lcm.lcm(c.denom());
            gcd = gcd.gcd(c.numer());
        }
    }
    any.then(|| Rational::new(lcm, gcd.abs()))
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n_vars, rhs.n_vars, "polynomial arity mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n_vars, rhs.n_vars, "polynomial arity mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n_vars, rhs.n_vars, "polynomial arity mismatch");
        let mut out = Polynomial::zero(self.n_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&rat(-1))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let a = c.abs();
            let is_const = m.degree() == 0;
            if !a.is_one() || is_const {
                write!(f, "{a}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", i + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    #[test]
    fn difference_of_squares() {
        let (a, b) = (x(2, 0), x(2, 1));
        let num = &(&a * &a) - &(&b * &b);
        let q = num.divide_exact(&(&a - &b)).unwrap().exact().unwrap();
        assert_eq!(q, &a + &b);
    }

    #[test]
    fn cube_by_variable() {
        let a = x(2, 0);
        let q = a.pow(3).divide_exact(&a).unwrap().exact().unwrap();
        assert_eq!(q, a.pow(2));
    }

    #[test]
    fn sum_of_squares_leaves_substitution_remainder() {
        let (a, b) = (x(2, 0), x(2, 1));
        let num = &(&a * &a) + &(&b * &b);
        match num.divide_exact(&(&a - &b)).unwrap() {
            Division::Remainder(r) => assert_eq!(r, b.pow(2).scale(&rat(2))),
            other => panic!("expected remainder, got {other:?}"),
        }
    }

    #[test]
    fn nonlinear_divisor_is_rejected() {
        let a = x(2, 0);
        assert_eq!(a.pow(3).divide_exact(&a.pow(2)), Err(Error::UnsupportedDivisor));
        assert_eq!(a.divide_exact(&Polynomial::zero(2)), Err(Error::DivisionByZero));
    }

    #[test]
    fn pivot_other_than_first_variable() {
        // (x2 + 2 x3) * (x1 - x3) over three variables
        let l = Polynomial::linear_form(&[0, 1, 2]);
        let r = Polynomial::linear_form(&[1, 0, -1]);
        let q = (&l * &r).divide_exact(&l).unwrap().exact().unwrap();
        assert_eq!(q, r);
    }

    #[test]
    fn partial_derivatives() {
        // d/dx1 of x1^3 (-x1 + 2 x2) = -4 x1^3 + 6 x1^2 x2
        let (a, b) = (x(2, 0), x(2, 1));
        let g = &a.pow(3) * &(&b.scale(&rat(2)) - &a);
        let expected = &a.pow(3).scale(&rat(-4)) + &(&a.pow(2) * &b).scale(&rat(6));
        assert_eq!(g.partial(0), expected);
        assert!(Polynomial::constant(2, rat(5)).partial(1).is_zero());
    }

    #[test]
    fn substitution_composes() {
        let (a, b) = (x(2, 0), x(2, 1));
        let p = &a.pow(2) + &b;
        // x1 := x1 + x2, x2 := x1 * x2
        let s = p.substitute(&[&a + &b, &a * &b]);
        let expected = &(&a + &b).pow(2) + &(&a * &b);
        assert_eq!(s, expected);
    }

    #[test]
    fn substitution_overflowing_i128() {
        let a = x(1, 0);
        let s = a.pow(9).substitute(&[a.scale(&rat(100_000))]);
        let big = Rational::from_integer(BigInt::from(10).pow(45));
        assert_eq!(s, a.pow(9).scale(&big));
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(a.pow(2).substitute(&[a.scale(&half)]), a.pow(2).scale(&(&half * &half)));
    }

    #[test]
    fn substitution_by_signed_permutation() {
        let (a, b) = (x(2, 0), x(2, 1));
        let p = &a.pow(3) * &(&b.scale(&rat(2)) - &a);
        let swapped = p.substitute(&[-&b, a.clone()]);
        let expected = &(-&b).pow(3) * &(&a.scale(&rat(2)) + &b);
        assert_eq!(swapped, expected);
    }

    #[test]
    fn display_is_readable() {
        let (a, b) = (x(2, 0), x(2, 1));
        let g = &a.pow(3) * &(&b.scale(&rat(2)) - &a);
        assert_eq!(g.to_string(), "-x1^4 + 2*x1^3*x2");
    }

    #[test]
    fn content_scale_makes_primitive() {
        let p = Polynomial::from_terms(
            1,
            [
                (vec![2], Rational::new(4.into(), 3.into())),
                (vec![2], Rational::new(2.into(), 5.into())),
            ],
        );
        let s = content_scale([&p]).unwrap();
        let q = p.scale(&s);
        assert!(q.is_integral());
        assert_eq!(q.coefficient(&Monomial::new(vec![2])), rat(1));
    }
}
