//! The bigraded algebra `A = P[mu_1..mu_r, lambda_1..lambda_s]`.
//!
//! A term `mu^a lambda^b X^m` has weight `q = |a| + |b|` and twist
//! `l = deg(m) - a.d - b.e`. The piece `A_q(l)` is the direct sum, over all
//! weight indices `(a, b)` with `|a| + |b| = q`, of the degree
//! `a.d + b.e + l` forms times `mu^a lambda^b`. Pieces with `q < 0` are zero,
//! and so are blocks whose polynomial degree is negative.
//!
//! Only finitely many pieces are ever built, and elements always live in a
//! single piece.

use std::collections::HashMap;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::SparseLinearMap;
use crate::poly::{count_monomials, monomial_basis, Monomial};

/// The bidegree `(q, l)` indexing `A_q(l)` and `B_q(l)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct BiDegree {
    pub q: i64,
    pub l: i64,
}

impl BiDegree {
    pub const fn new(q: i64, l: i64) -> Self {
        Self { q, l }
    }
}

impl Add for BiDegree {
    type Output = BiDegree;
    fn add(self, rhs: BiDegree) -> BiDegree {
        BiDegree::new(self.q + rhs.q, self.l + rhs.l)
    }
}

impl fmt::Display for BiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.l)
    }
}

/// Exponents `(a, b)` of `mu^a lambda^b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightIndex {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

impl WeightIndex {
    pub fn weight(&self) -> u32 {
        self.a.iter().sum::<u32>() + self.b.iter().sum::<u32>()
    }
}

/// A term `mu^a lambda^b X^m`, stored flat as `[a | b | m]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgMonomial(pub Vec<u32>);

impl AlgMonomial {
    pub fn mul(&self, other: &AlgMonomial) -> AlgMonomial {
        AlgMonomial(self.0.iter().zip(&other.0).map(|(x, y)| x + y).collect())
    }
}

/// The shape of `A`: number of variables and the degrees attached to the
/// `mu_i` and `lambda_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    n: usize,
    d: Vec<u32>,
    e: Vec<u32>,
}

impl Grading {
    pub fn new(n: usize, d: Vec<u32>, e: Vec<u32>) -> Self {
        Self { n, d, e }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        self.d.len()
    }
    pub fn s(&self) -> usize {
        self.e.len()
    }
    pub fn nvars(&self) -> usize {
        self.n + 1
    }
    /// Length of a flat [`AlgMonomial`].
    pub fn width(&self) -> usize {
        self.r() + self.s() + self.n + 1
    }

    /// All weight indices of total weight `q`, sorted lexicographically by
    /// `(a, b)`.
    pub fn weight_indices(&self, q: i64) -> Vec<WeightIndex> {
        if q < 0 {
            return Vec::new();
        }
        let k = self.r() + self.s();
        let mut out = Vec::new();
        if k == 0 {
            if q == 0 {
                out.push(WeightIndex { a: vec![], b: vec![] });
            }
            return out;
        }
        let mut cur = vec![0u32; k];
        compositions(&mut cur, 0, q as u32, &mut out, self.r());
        out.sort();
        out
    }

    fn block_degree(&self, w: &WeightIndex, l: i64) -> i64 {
        let ad: i64 = w.a.iter().zip(&self.d).map(|(a, d)| (*a * *d) as i64).sum();
        let be: i64 = w.b.iter().zip(&self.e).map(|(b, e)| (*b * *e) as i64).sum();
        ad + be + l
    }

    pub fn piece_basis(&self, bd: BiDegree) -> GradedPieceBasis {
        let mut blocks = Vec::new();
        let mut elements = Vec::new();
        for w in self.weight_indices(bd.q) {
            let monos = monomial_basis(self.n, self.block_degree(&w, bd.l));
            for m in &monos {
                elements.push(self.term(&w, m));
            }
            blocks.push((w, monos));
        }
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        GradedPieceBasis {
            bidegree: bd,
            blocks,
            elements,
            index,
        }
    }

    /// `dim A_q(l)` from the binomial formula, without building the basis.
    pub fn dim_piece(&self, bd: BiDegree) -> usize {
        self.weight_indices(bd.q)
            .iter()
            .map(|w| count_monomials(self.n, self.block_degree(w, bd.l)))
            .sum()
    }

    pub fn term(&self, w: &WeightIndex, m: &Monomial) -> AlgMonomial {
        let mut v = Vec::with_capacity(self.width());
        v.extend_from_slice(&w.a);
        v.extend_from_slice(&w.b);
        v.extend_from_slice(m.exponents());
        AlgMonomial(v)
    }

    pub fn split(&self, t: &AlgMonomial) -> (WeightIndex, Monomial) {
        let (r, s) = (self.r(), self.s());
        (
            WeightIndex {
                a: t.0[..r].to_vec(),
                b: t.0[r..r + s].to_vec(),
            },
            Monomial(t.0[r + s..].to_vec()),
        )
    }

    pub fn bidegree_of(&self, t: &AlgMonomial) -> BiDegree {
        let (w, m) = self.split(t);
        let q = w.weight() as i64;
        BiDegree::new(q, m.degree() as i64 - self.block_degree(&w, 0))
    }

    /// Multiplication by `g` as a map `A_q(l) -> A_{q+p}(l+m)` where `g` has
    /// bidegree `(p, m)`.
    pub fn multiplication_matrix<F: Field>(
        &self,
        field: &F,
        g: &AlgElement<F>,
        source: BiDegree,
    ) -> Result<SparseLinearMap<F>> {
        let gb = self.piece_basis(g.bidegree);
        let poly = AlgPoly::from_element(field, &gb, g)?;
        self.multiplication_by_poly(field, &poly, source)
    }

    pub fn multiplication_by_poly<F: Field>(
        &self,
        field: &F,
        g: &AlgPoly<F>,
        source: BiDegree,
    ) -> Result<SparseLinearMap<F>> {
        let src = self.piece_basis(source);
        let dst = self.piece_basis(source + g.bidegree);
        self.multiplication_between(field, g, &src, &dst)
    }

    /// Same as [`Grading::multiplication_by_poly`] with prebuilt bases.
    pub fn multiplication_between<F: Field>(
        &self,
        field: &F,
        g: &AlgPoly<F>,
        src: &GradedPieceBasis,
        dst: &GradedPieceBasis,
    ) -> Result<SparseLinearMap<F>> {
        let expected = src.bidegree + g.bidegree;
        if dst.bidegree != expected {
            return Err(Error::BidegreeMismatch {
                expected,
                found: dst.bidegree,
            });
        }
        let columns = src.elements.iter().map(|t| {
            g.terms
                .iter()
                .map(|(gt, c)| {
                    let idx = dst
                        .index_of(&gt.mul(t))
                        .expect("product lies in the target piece");
                    (idx, c.clone())
                })
                .collect::<Vec<_>>()
        });
        Ok(
            SparseLinearMap::from_column_terms(field.clone(), dst.dim(), columns)?
                .with_tags(format!("A{}", src.bidegree), format!("A{}", dst.bidegree)),
        )
    }
}

fn compositions(cur: &mut [u32], pos: usize, left: u32, out: &mut Vec<WeightIndex>, r: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(WeightIndex {
            a: cur[..r].to_vec(),
            b: cur[r..].to_vec(),
        });
        return;
    }
    for x in 0..=left {
        cur[pos] = x;
        compositions(cur, pos + 1, left - x, out, r);
    }
    cur[pos] = 0;
}

/// Ordered basis of one piece `A_q(l)`.
#[derive(Debug, Clone)]
pub struct GradedPieceBasis {
    pub bidegree: BiDegree,
    blocks: Vec<(WeightIndex, Vec<Monomial>)>,
    elements: Vec<AlgMonomial>,
    index: HashMap<AlgMonomial, usize>,
}

impl GradedPieceBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
    pub fn blocks(&self) -> &[(WeightIndex, Vec<Monomial>)] {
        &self.blocks
    }
    pub fn elements(&self) -> &[AlgMonomial] {
        &self.elements
    }
    pub fn element(&self, i: usize) -> &AlgMonomial {
        &self.elements[i]
    }
    pub fn index_of(&self, t: &AlgMonomial) -> Option<usize> {
        self.index.get(t).copied()
    }
}

/// An element of one piece, as coordinates over its [`GradedPieceBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlgElement<F: Field> {
    pub bidegree: BiDegree,
    pub coords: Vec<F::Elem>,
}

impl<F: Field> AlgElement<F> {
    pub fn zero(field: &F, basis: &GradedPieceBasis) -> Self {
        Self {
            bidegree: basis.bidegree,
            coords: vec![field.zero(); basis.dim()],
        }
    }

    pub fn unit(field: &F, basis: &GradedPieceBasis, i: usize) -> Self {
        let mut e = Self::zero(field, basis);
        e.coords[i] = field.one();
        e
    }
}

/// A sparse homogeneous element of `A`, used for generators and products.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgPoly<F: Field> {
    pub bidegree: BiDegree,
    terms: Vec<(AlgMonomial, F::Elem)>,
}

impl<F: Field> AlgPoly<F> {
    /// Collect terms, summing repeats and dropping zeros. Every term must
    /// have the stated bidegree.
    pub fn new(
        field: &F,
        grading: &Grading,
        bidegree: BiDegree,
        terms: impl IntoIterator<Item = (AlgMonomial, F::Elem)>,
    ) -> Result<Self> {
        let mut acc: std::collections::BTreeMap<AlgMonomial, F::Elem> = Default::default();
        for (t, c) in terms {
            let found = grading.bidegree_of(&t);
            if found != bidegree {
                return Err(Error::BidegreeMismatch {
                    expected: bidegree,
                    found,
                });
            }
            let slot = acc.entry(t).or_insert_with(|| field.zero());
            *slot = field.add(slot, &c);
        }
        Ok(Self {
            bidegree,
            terms: acc.into_iter().filter(|(_, c)| !field.is_zero(c)).collect(),
        })
    }

    pub fn zero(bidegree: BiDegree) -> Self {
        Self {
            bidegree,
            terms: Vec::new(),
        }
    }

    pub fn terms(&self) -> &[(AlgMonomial, F::Elem)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_element(field: &F, basis: &GradedPieceBasis, el: &AlgElement<F>) -> Result<Self> {
        if el.bidegree != basis.bidegree {
            return Err(Error::BidegreeMismatch {
                expected: basis.bidegree,
                found: el.bidegree,
            });
        }
        if el.coords.len() != basis.dim() {
            return Err(Error::InconsistentDimensions(format!(
                "{} coordinates for a piece of dimension {}",
                el.coords.len(),
                basis.dim()
            )));
        }
        Ok(Self {
            bidegree: el.bidegree,
            terms: el
                .coords
                .iter()
                .enumerate()
                .filter(|(_, c)| !field.is_zero(c))
                .map(|(i, c)| (basis.element(i).clone(), c.clone()))
                .collect(),
        })
    }

    pub fn to_element(&self, field: &F, basis: &GradedPieceBasis) -> Result<AlgElement<F>> {
        if self.bidegree != basis.bidegree {
            return Err(Error::BidegreeMismatch {
                expected: basis.bidegree,
                found: self.bidegree,
            });
        }
        let mut el = AlgElement::zero(field, basis);
        for (t, c) in &self.terms {
            let i = basis
                .index_of(t)
                .ok_or_else(|| Error::InconsistentDimensions("term outside piece".into()))?;
            el.coords[i] = c.clone();
        }
        Ok(el)
    }

    pub fn mul(&self, field: &F, other: &Self) -> Self {
        let mut acc: HashMap<AlgMonomial, F::Elem> = HashMap::new();
        for (t1, c1) in &self.terms {
            for (t2, c2) in &other.terms {
                let slot = acc.entry(t1.mul(t2)).or_insert_with(|| field.zero());
                *slot = field.add(slot, &field.mul(c1, c2));
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !field.is_zero(c)).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Self {
            bidegree: self.bidegree + other.bidegree,
            terms,
        }
    }

    pub fn add(&self, field: &F, other: &Self) -> Result<Self> {
        if self.bidegree != other.bidegree && !self.is_zero() && !other.is_zero() {
            return Err(Error::BidegreeMismatch {
                expected: self.bidegree,
                found: other.bidegree,
            });
        }
        let bidegree = if self.is_zero() {
            other.bidegree
        } else {
            self.bidegree
        };
        let mut acc: std::collections::BTreeMap<AlgMonomial, F::Elem> =
            self.terms.iter().cloned().collect();
        for (t, c) in &other.terms {
            let slot = acc.entry(t.clone()).or_insert_with(|| field.zero());
            *slot = field.add(slot, c);
        }
        Ok(Self {
            bidegree,
            terms: acc.into_iter().filter(|(_, c)| !field.is_zero(c)).collect(),
        })
    }

    pub fn scale(&self, field: &F, c: &F::Elem) -> Self {
        Self {
            bidegree: self.bidegree,
            terms: self
                .terms
                .iter()
                .map(|(t, x)| (t.clone(), field.mul(x, c)))
                .filter(|(_, x)| !field.is_zero(x))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, RationalField};
    use crate::linalg::rank;
    use crate::poly::binomial;
    use proptest::prelude::*;

    #[test]
    fn cubic_plus_line_piece() {
        let g = Grading::new(2, vec![3], vec![1]);
        let b = g.piece_basis(BiDegree::new(1, 0));
        assert_eq!(b.dim(), 13);
        assert_eq!(b.blocks().len(), 2);
        // (a, b) = (0, 1) sorts before (1, 0)
        assert_eq!(b.blocks()[0].0, WeightIndex { a: vec![0], b: vec![1] });
        assert_eq!(b.blocks()[0].1.len(), 3);
        assert_eq!(b.blocks()[1].1.len(), 10);
        assert_eq!(g.dim_piece(BiDegree::new(1, 0)), 13);
        assert!(g.piece_basis(BiDegree::new(-1, 5)).is_empty());
    }

    #[test]
    fn quartic_pieces() {
        let g = Grading::new(3, vec![4], vec![]);
        assert_eq!(g.piece_basis(BiDegree::new(1, 0)).dim(), 35);
        assert_eq!(g.dim_piece(BiDegree::new(2, 0)), 165);
        for l in 0..6 {
            assert_eq!(g.dim_piece(BiDegree::new(0, l)), binomial(3 + l as usize, 3));
        }
    }

    #[test]
    fn blocks_with_negative_degree_are_empty() {
        let g = Grading::new(2, vec![3], vec![1]);
        let b = g.piece_basis(BiDegree::new(1, -2));
        // P^1 mu survives, P^{-1} lambda is empty
        assert_eq!(b.dim(), 3);
        assert_eq!(b.blocks().len(), 2);
        assert!(b.blocks()[0].1.is_empty());
    }

    #[test]
    fn multiplication_by_one_and_by_variables() {
        let f = RationalField;
        let g = Grading::new(2, vec![3], vec![1]);
        let one = AlgElement::unit(&f, &g.piece_basis(BiDegree::new(0, 0)), 0);
        let m = g
            .multiplication_matrix(&f, &one, BiDegree::new(1, 0))
            .unwrap();
        assert_eq!((m.rows(), m.cols()), (13, 13));
        assert_eq!(rank(&m).unwrap().rank, 13);
        assert!(m.entries().all(|(r, c, _)| r == c));

        let b01 = g.piece_basis(BiDegree::new(0, 1));
        let x0 = AlgElement::unit(&f, &b01, 0);
        let m = g.multiplication_matrix(&f, &x0, BiDegree::new(0, 1)).unwrap();
        assert_eq!((m.rows(), m.cols()), (6, 3));
        assert_eq!(rank(&m).unwrap().rank, 3);

        // mu * X_0^2 has bidegree (1, -1); times P^1 lands in P^3 mu
        let mu_x0sq = AlgPoly::new(
            &f,
            &g,
            BiDegree::new(1, -1),
            [(AlgMonomial(vec![1, 0, 2, 0, 0]), f.one())],
        )
        .unwrap();
        let m = g
            .multiplication_by_poly(&f, &mu_x0sq, BiDegree::new(0, 1))
            .unwrap();
        assert_eq!(m.cols(), 3);
        assert_eq!(m.rows(), 13);
        assert_eq!(rank(&m).unwrap().rank, 3);
    }

    #[test]
    fn mismatched_terms_are_rejected() {
        let f = RationalField;
        let g = Grading::new(2, vec![3], vec![1]);
        let bad = AlgPoly::new(
            &f,
            &g,
            BiDegree::new(0, 0),
            [(AlgMonomial(vec![1, 0, 0, 0, 0]), f.one())],
        );
        assert!(matches!(bad, Err(Error::BidegreeMismatch { .. })));
    }

    #[test]
    fn dim_piece_is_monotone_in_twist() {
        let g = Grading::new(3, vec![2, 2], vec![1, 3]);
        for q in 0..4 {
            let dims: Vec<usize> = (-3..8).map(|l| g.dim_piece(BiDegree::new(q, l))).collect();
            assert!(dims.windows(2).all(|w| w[0] <= w[1]), "q={q}: {dims:?}");
            for (l, d) in (-3..8).zip(&dims) {
                assert_eq!(g.piece_basis(BiDegree::new(q, l)).dim(), *d);
            }
        }
    }

    fn random_term(g: &Grading, bd: BiDegree, pick: usize) -> AlgMonomial {
        let b = g.piece_basis(bd);
        b.element(pick % b.dim()).clone()
    }

    proptest! {
        #[test]
        fn matrix_of_product_is_composition(i in 0usize..100, j in 0usize..100, k in 0usize..40) {
            let f = PrimeField::new(1_000_003).unwrap();
            let g = Grading::new(2, vec![2], vec![1]);
            let gt = random_term(&g, BiDegree::new(1, 0), i);
            let ht = random_term(&g, BiDegree::new(0, 1), j);
            let gp = AlgPoly::new(&f, &g, BiDegree::new(1, 0), [(gt, 3), (random_term(&g, BiDegree::new(1, 0), k), 5)]).unwrap();
            let hp = AlgPoly::new(&f, &g, BiDegree::new(0, 1), [(ht, 7)]).unwrap();
            let src = BiDegree::new(1, 1);
            let mh = g.multiplication_by_poly(&f, &hp, src).unwrap();
            let mg = g.multiplication_by_poly(&f, &gp, src + hp.bidegree).unwrap();
            let mgh = g.multiplication_by_poly(&f, &gp.mul(&f, &hp), src).unwrap();
            prop_assert_eq!(mg.compose(&mh).unwrap().to_dense(), mgh.to_dense());
            prop_assert_eq!(mgh.rows(), g.dim_piece(src + gp.bidegree + hp.bidegree));
        }
    }
}
