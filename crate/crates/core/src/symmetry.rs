//! The S_{k+2} action on P^k, its transposition hyperplanes and their flats.
//!
//! S_{k+2} permutes the coordinates of C^{k+2} and preserves the hyperplane
//! `u_1 + ... + u_{k+2} = 0`. In the coordinates `x_i = u_i - u_{k+2}` the
//! subgroup S_{k+1} acts by permutation matrices and the transposition
//! `(1, k+2)` acts by the matrix `T` with first column all `-1`. Each
//! transposition fixes a hyperplane pointwise: `{x_i = x_j}` for `(i, j)` and
//! `{x_i = 0}` for `(i, k+2)`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{integer_kernel, primitive_integer_vector, IntMatrix};
use crate::map::{check_dimension, PolynomialMap};
use crate::point::RationalPoint;
use crate::poly::{Monomial, Polynomial, Rational};

/// An element of the group acting on P^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub matrix: IntMatrix,
    /// Generator indices whose product (left to right) gives `matrix`.
    pub word: Vec<usize>,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        GroupElement {
            matrix: IntMatrix::identity(n),
            word: Vec::new(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    /// Whether the element is a coordinate permutation (unitary for the
    /// standard Hermitian form).
    pub fn is_permutation(&self) -> bool {
        let m = &self.matrix;
        (0..m.rows()).all(|i| {
            let row = m.row(i);
            row.iter().filter(|&&v| v == 1).count() == 1 && row.iter().all(|&v| v == 0 || v == 1)
        }) && (&m.transpose() * m).is_identity()
    }

    /// Image of a rational point under the projective transformation.
    pub fn act(&self, p: &RationalPoint) -> RationalPoint {
        let m = &self.matrix;
        let coords = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .zip(p.coords())
                    .fold(Rational::zero(), |acc, (&a, x)| acc + x * crate::poly::rat(a))
            })
            .collect();
        RationalPoint::new(coords).expect("invertible matrix maps nonzero to nonzero")
    }
}

/// The matrix of the transposition `(1, k+2)` in x-coordinates.
pub fn t_matrix(k: usize) -> GroupElement {
    let n = k + 1;
    let mut m = IntMatrix::identity(n);
    for i in 0..n {
        m[(i, 0)] = -1;
    }
    GroupElement {
        matrix: m,
        word: vec![k],
    }
}

/// Adjacent transpositions of S_{k+1} followed by `T`.
pub fn generators(k: usize) -> Vec<GroupElement> {
    let n = k + 1;
    let mut gens: Vec<GroupElement> = (0..k)
        .map(|i| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(i, i + 1);
            GroupElement {
                matrix: IntMatrix::permutation(&perm),
                word: vec![i],
            }
        })
        .collect();
    gens.push(t_matrix(k));
    gens
}

/// Breadth-first closure of [`generators`], deduplicated up to projective
/// scale. Has (k+2)! elements.
pub fn generate_group(k: usize) -> Result<Vec<GroupElement>> {
    check_dimension(k)?;
    let order: usize = (1..=k + 2).product();
    let limit = 2 * order;
    let gens = generators(k);
    let id = GroupElement::identity(k + 1);
    let mut seen = HashSet::from([id.matrix.projective_key()]);
    let mut elements = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for (gi, s) in gens.iter().enumerate() {
            let m = &g.matrix * &s.matrix;
            if seen.insert(m.projective_key()) {
                let mut word = g.word.clone();
                word.push(gi);
                let e = GroupElement { matrix: m, word };
                elements.push(e.clone());
                queue.push_back(e);
                if elements.len() > limit {
                    return Err(Error::GroupClosure { limit });
                }
            }
        }
    }
    Ok(elements)
}

/// Result of testing `map ∘ r = c · (r ∘ map)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivariance {
    Holds { scalar: Rational },
    Fails {
        component: usize,
        monomial: Monomial,
        composed: Rational,
        conjugated: Rational,
    },
}

impl Equivariance {
    pub fn holds(&self) -> bool {
        matches!(self, Equivariance::Holds { .. })
    }
}

/// Exact equivariance test of `map` under one group element.
pub fn check_equivariance(map: &PolynomialMap, r: &GroupElement) -> Result<Equivariance> {
    let lhs = map.compose_linear(&r.matrix)?;
    let rhs = map.apply_linear(&r.matrix)?;
    let scalar = lhs
        .components()
        .iter()
        .zip(rhs.components())
        .find_map(|(a, b)| {
            let (m, cb) = b.terms().next()?;
            Some(a.coefficient(m) / cb)
        })
        .unwrap_or_else(|| Rational::from_integer(1.into()));
    for (i, (a, b)) in lhs.components().iter().zip(rhs.components()).enumerate() {
        let scaled = b.scale(&scalar);
        if *a != scaled {
            let monomial = a
                .terms()
                .map(|(m, _)| m)
                .chain(scaled.terms().map(|(m, _)| m))
                .find(|m| a.coefficient(m) != scaled.coefficient(m))
                .expect("unequal polynomials differ in some monomial")
                .clone();
            return Ok(Equivariance::Fails {
                component: i,
                composed: a.coefficient(&monomial),
                conjugated: b.coefficient(&monomial),
                monomial,
            });
        }
    }
    if scalar.is_zero() {
        return Ok(Equivariance::Fails {
            component: 0,
            monomial: Monomial::one(map.n_vars()),
            composed: Rational::zero(),
            conjugated: Rational::zero(),
        });
    }
    Ok(Equivariance::Holds { scalar })
}

/// [`check_equivariance`] for every element of `group`, each with the time
/// spent on it.
pub fn check_equivariance_group(map: &PolynomialMap, group: &[GroupElement]) -> Result<Vec<(Equivariance, Duration)>> {
    group
        .iter()
        .map(|r| {
            let start = Instant::now();
            let e = check_equivariance(map, r)?;
            Ok((e, start.elapsed()))
        })
        .collect()
}

/// A transposition hyperplane. Indices are 1-based as in `{x_i = x_j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hyperplane {
    /// `{x_i = 0}`
    Coord(usize),
    /// `{x_i = x_j}` with `i < j`
    Diff(usize, usize),
}

impl Hyperplane {
    pub fn covector(&self, k: usize) -> Vec<i64> {
        let mut v = vec![0; k + 1];
        match *self {
            Hyperplane::Coord(i) => v[i - 1] = 1,
            Hyperplane::Diff(i, j) => {
                v[i - 1] = 1;
                v[j - 1] = -1;
            }
        }
        v
    }

    pub fn linear_form(&self, k: usize) -> Polynomial {
        Polynomial::linear_form(&self.covector(k))
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        let ok = match *self {
            Hyperplane::Coord(i) => (1..=k + 1).contains(&i),
            Hyperplane::Diff(i, j) => i >= 1 && i < j && j <= k + 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidHyperplane(format!("{self} is not a hyperplane of P^{k}")))
        }
    }

    /// The arrangement member with covector `±v`, if any.
    pub fn from_covector(v: &[i64]) -> Option<Hyperplane> {
        let nz: Vec<(usize, i64)> = v.iter().copied().enumerate().filter(|(_, c)| *c != 0).collect();
        match nz.as_slice() {
            [(i, a)] if a.abs() == 1 => Some(Hyperplane::Coord(i + 1)),
            [(i, a), (j, b)] if a.abs() == 1 && *a == -*b => Some(Hyperplane::Diff(i + 1, j + 1)),
            _ => None,
        }
    }

    /// Parses a comma-separated list such as `c:1,d:1,2` (also accepts `;`).
    pub fn parse_list(s: &str) -> Result<Vec<Hyperplane>> {
        let tokens: Vec<&str> = s
            .split([',', ';'])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let t = tokens[i];
            if t.starts_with("d:") || t.starts_with("D:") {
                let second = tokens
                    .get(i + 1)
                    .ok_or_else(|| Error::InvalidHyperplane(format!("'{t}' needs two indices")))?;
                out.push(format!("{t},{second}").parse()?);
                i += 2;
            } else {
                out.push(t.parse()?);
                i += 1;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperplane::Coord(i) => write!(f, "c:{i}"),
            Hyperplane::Diff(i, j) => write!(f, "d:{i},{j}"),
        }
    }
}

impl FromStr for Hyperplane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidHyperplane(format!("cannot parse '{s}' (expected c:i or d:i,j)"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let idx: Vec<usize> = rest
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind.trim().to_ascii_lowercase().as_str(), idx.as_slice()) {
            ("c", [i]) if *i >= 1 => Ok(Hyperplane::Coord(*i)),
            ("d", [i, j]) if *i >= 1 && *j >= 1 && i != j => {
                Ok(Hyperplane::Diff(*i.min(j), *i.max(j)))
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for Hyperplane {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// All `(k+1)(k+2)/2` transposition hyperplanes: the coordinate hyperplanes
/// first, then the differences in lexicographic order.
pub fn hyperplane_arrangement(k: usize) -> Vec<Hyperplane> {
    let n = k + 1;
    let mut out: Vec<Hyperplane> = (1..=n).map(Hyperplane::Coord).collect();
    for i in 1..=n {
        for j in i + 1..=n {
            out.push(Hyperplane::Diff(i, j));
        }
    }
    out
}

/// The arrangement hyperplane fixed pointwise by `r`, when `r` is a
/// reflection (its eigenvalue-1 eigenspace has codimension one).
pub fn pointwise_fixed_hyperplane(r: &GroupElement) -> Option<Hyperplane> {
    let diff = r.matrix.sub_identity();
    if diff.rank() != 1 {
        return None;
    }
    let row = (0..diff.rows()).map(|i| diff.row(i)).find(|row| row.iter().any(|&v| v != 0))?;
    let v: Vec<Rational> = row.iter().map(|&x| crate::poly::rat(x)).collect();
    Hyperplane::from_covector(&primitive_integer_vector(&v))
}

/// The points with every coordinate in {0, 1}, in lexicographic order of
/// their 0/1 vectors. There are `2^{k+1} - 1` of them.
pub fn enumerate_superattractors(k: usize) -> Vec<RationalPoint> {
    let n = k + 1;
    (1u64..(1 << n))
        .map(|bits| {
            let coords: Vec<i64> = (0..n).map(|i| ((bits >> (n - 1 - i)) & 1) as i64).collect();
            RationalPoint::from_ints(&coords).unwrap()
        })
        .collect()
}

/// Arrangement hyperplanes through a rational point.
pub fn hyperplanes_through(k: usize, p: &RationalPoint) -> Vec<Hyperplane> {
    hyperplane_arrangement(k)
        .into_iter()
        .filter(|h| {
            h.covector(k)
                .iter()
                .zip(p.coords())
                .fold(Rational::zero(), |acc, (&a, x)| acc + x * crate::poly::rat(a))
                .is_zero()
        })
        .collect()
}

/// Partitions point indices into orbits under the coordinate permutations.
pub fn permutation_classes(points: &[RationalPoint], group: &[GroupElement]) -> Vec<Vec<usize>> {
    let index: HashMap<&RationalPoint, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut class_of = vec![usize::MAX; points.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let perms: Vec<&GroupElement> = group.iter().filter(|g| g.is_permutation()).collect();
    for i in 0..points.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        let mut members: Vec<usize> = perms
            .iter()
            .filter_map(|g| index.get(&g.act(&points[i])).copied())
            .collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            class_of[m] = classes.len();
        }
        classes.push(members);
    }
    classes
}

/// An intersection of transposition hyperplanes, `L^m ≅ P^m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flat {
    pub k: usize,
    pub m: usize,
    /// Every arrangement hyperplane containing the flat.
    pub hyperplanes: Vec<Hyperplane>,
    /// (k+1)×(m+1) integer matrix whose columns span the flat.
    pub embedding: IntMatrix,
}

impl Flat {
    /// The whole space, with identity embedding.
    pub fn whole(k: usize) -> Flat {
        Flat {
            k,
            m: k,
            hyperplanes: Vec::new(),
            embedding: IntMatrix::identity(k + 1),
        }
    }

    /// Ambient point of flat coordinates `y`.
    pub fn embed(&self, y: &[Rational]) -> Result<RationalPoint> {
        let e = &self.embedding;
        let coords = (0..e.rows())
            .map(|i| {
                e.row(i)
                    .iter()
                    .zip(y)
                    .fold(Rational::zero(), |acc, (&a, v)| acc + v * crate::poly::rat(a))
            })
            .collect();
        RationalPoint::new(coords)
    }

    /// Linear forms on the flat induced by arrangement hyperplanes that do not
    /// contain it, deduplicated up to sign and primitive. Each entry lists the
    /// ambient hyperplanes inducing it.
    pub fn induced_forms(&self) -> Vec<(Vec<i64>, Vec<Hyperplane>)> {
        let mut out: Vec<(Vec<i64>, Vec<Hyperplane>)> = Vec::new();
        for h in hyperplane_arrangement(self.k) {
            let v = self.embedding.left_apply(&h.covector(self.k));
            if v.iter().all(|&c| c == 0) {
                continue;
            }
            let mut p = primitive_integer_vector(&v.iter().map(|&c| crate::poly::rat(c)).collect::<Vec<_>>());
            if p.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0) {
                p.iter_mut().for_each(|c| *c = -*c);
            }
            match out.iter_mut().find(|(q, _)| *q == p) {
                Some((_, hs)) => hs.push(h),
                None => out.push((p, vec![h])),
            }
        }
        out
    }
}

/// The flat cut out by `subset`.
pub fn flat_from_hyperplanes(k: usize, subset: &[Hyperplane]) -> Result<Flat> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("a flat needs at least one hyperplane".into()));
    }
    for h in subset {
        h.validate(k)?;
    }
    let rows: Vec<Vec<i64>> = subset.iter().map(|h| h.covector(k)).collect();
    let basis = integer_kernel(&rows, k + 1);
    if basis.is_empty() {
        return Err(Error::NotAFlat);
    }
    let embedding = IntMatrix::from_columns(&basis, k + 1);
    let hyperplanes = hyperplane_arrangement(k)
        .into_iter()
        .filter(|h| embedding.left_apply(&h.covector(k)).iter().all(|&c| c == 0))
        .collect();
    Ok(Flat {
        k,
        m: basis.len() - 1,
        hyperplanes,
        embedding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::build_equivariant_map;

    #[test]
    fn t_matrix_shape() {
        assert_eq!(t_matrix(1).matrix.to_rows(), vec![vec![-1, 0], vec![-1, 1]]);
        assert_eq!(
            t_matrix(2).matrix.to_rows(),
            vec![vec![-1, 0, 0], vec![-1, 1, 0], vec![-1, 0, 1]]
        );
        for k in 1..=5 {
            let t = t_matrix(k).matrix;
            assert!((&t * &t).is_identity());
        }
    }

    #[test]
    fn generators_are_involutions() {
        assert_eq!(generators(1).len(), 2);
        assert_eq!(generators(2).len(), 3);
        for g in generators(3) {
            assert!((&g.matrix * &g.matrix).is_identity());
        }
    }

    #[test]
    fn group_orders() {
        assert_eq!(generate_group(1).unwrap().len(), 6);
        assert_eq!(generate_group(2).unwrap().len(), 24);
        assert!(generate_group(2).unwrap()[0].is_identity());
    }

    #[test]
    fn swap_equivariance_scalar_one() {
        let g = build_equivariant_map(1).unwrap();
        let swap = &generators(1)[0];
        assert_eq!(
            check_equivariance(&g, swap).unwrap(),
            Equivariance::Holds { scalar: crate::poly::rat(1) }
        );
        let id = GroupElement::identity(2);
        assert_eq!(
            check_equivariance(&g, &id).unwrap(),
            Equivariance::Holds { scalar: crate::poly::rat(1) }
        );
    }

    #[test]
    fn non_equivariant_map_gives_witness() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let f = PolynomialMap::new(vec![x.pow(2), &x * &y]).unwrap();
        let swap = &generators(1)[0];
        assert!(!check_equivariance(&f, swap).unwrap().holds());
        let group = generate_group(1).unwrap();
        let all = check_equivariance_group(&f, &group).unwrap();
        assert!(all.iter().any(|(e, _)| !e.holds()));
    }

    #[test]
    fn arrangement_sizes() {
        assert_eq!(hyperplane_arrangement(1).len(), 3);
        assert_eq!(hyperplane_arrangement(2).len(), 6);
        assert_eq!(hyperplane_arrangement(3).len(), 10);
    }

    #[test]
    fn fixed_hyperplanes_of_generators() {
        assert_eq!(pointwise_fixed_hyperplane(&generators(2)[0]), Some(Hyperplane::Diff(1, 2)));
        for k in 1..=4 {
            assert_eq!(pointwise_fixed_hyperplane(&t_matrix(k)), Some(Hyperplane::Coord(1)));
        }
        assert_eq!(pointwise_fixed_hyperplane(&GroupElement::identity(3)), None);
    }

    #[test]
    fn superattractor_lists() {
        let names = |k| -> Vec<Vec<i64>> {
            enumerate_superattractors(k).iter().map(|p| p.to_ints().unwrap()).collect()
        };
        assert_eq!(names(1), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        let mut k2 = names(2);
        k2.sort();
        let mut listed = vec![
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![1, 1, 1],
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
        ];
        listed.sort();
        assert_eq!(k2, listed);
        assert_eq!(names(3).len(), 15);
    }

    #[test]
    fn flats_examples() {
        let f = flat_from_hyperplanes(2, &[Hyperplane::Coord(1)]).unwrap();
        assert_eq!(f.m, 1);
        assert_eq!(f.embedding.to_rows(), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        let p = flat_from_hyperplanes(2, &[Hyperplane::Coord(1), Hyperplane::Coord(2)]).unwrap();
        assert_eq!(p.m, 0);
        assert_eq!(p.embedding.column(0), vec![0, 0, 1]);
        assert_eq!(
            flat_from_hyperplanes(2, &[Hyperplane::Coord(1), Hyperplane::Coord(2), Hyperplane::Coord(3)]),
            Err(Error::NotAFlat)
        );
        // {x1 = 0} ∩ {x2 = 0} also lies on {x1 = x2}
        assert_eq!(
            p.hyperplanes,
            vec![Hyperplane::Coord(1), Hyperplane::Coord(2), Hyperplane::Diff(1, 2)]
        );
    }

    #[test]
    fn parse_hyperplane_lists() {
        assert_eq!(
            Hyperplane::parse_list("d:1,2,c:1").unwrap(),
            vec![Hyperplane::Diff(1, 2), Hyperplane::Coord(1)]
        );
        assert_eq!(Hyperplane::parse_list("c:1; d:3,2").unwrap(), vec![Hyperplane::Coord(1), Hyperplane::Diff(2, 3)]);
        assert!(Hyperplane::parse_list("x:1").is_err());
        assert!(Hyperplane::parse_list("d:1").is_err());
        assert!(Hyperplane::Coord(4).validate(2).is_err());
    }

    #[test]
    fn permutation_classes_k2() {
        let group = generate_group(2).unwrap();
        let pts = enumerate_superattractors(2);
        let classes = permutation_classes(&pts, &group);
        let sizes: Vec<usize> = classes.iter().map(Vec::len).collect();
        let mut sorted = sizes.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 3, 3]);
    }
}
