//! Homogeneous polynomials in `X_0..X_n` with rational coefficients.
//!
//! Prime-field instances store their coefficients as residues in `[0, p)`;
//! the coefficient field only matters once a polynomial is mapped into a
//! concrete [`Field`].

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{parse_rational, rational_to_string, Field, FieldSpec};

/// Exponent vector of a monomial.
///
/// The derived order is not used for bases; [`Ord`] is graded lex with
/// `X_0 > X_1 > ... > X_n`, and sorting ascending lists larger monomials first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if a == 1 {
                write!(f, "X{k}")?;
            } else {
                write!(f, "X{k}^{a}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// All monomials of degree `l` in `n + 1` variables, graded-lex descending
/// (`X_0^l` first). Empty when `l < 0`.
pub fn monomial_basis(n: usize, l: i64) -> Vec<Monomial> {
    let mut out = Vec::new();
    if l < 0 {
        return out;
    }
    let mut cur = vec![0u32; n + 1];
    fill_monomials(&mut cur, 0, l as u32, &mut out);
    out
}

fn fill_monomials(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Monomial>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(Monomial(cur.clone()));
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        fill_monomials(cur, pos + 1, left - a, out);
    }
    cur[pos] = 0;
}

/// `C(n + l, n)`, the number of degree-`l` monomials in `n + 1` variables.
pub fn count_monomials(n: usize, l: i64) -> usize {
    if l < 0 {
        return 0;
    }
    binomial(n + l as usize, n)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// A homogeneous polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogPoly {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, BigRational>,
}

impl HomogPoly {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        Self {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars, 0);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero(m.nvars(), m.degree());
        p.add_term(m, c);
        p
    }

    /// Build from terms; every monomial must have the given degree.
    pub fn from_terms(
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Result<Self> {
        let mut p = Self::zero(nvars, degree);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(Error::InvalidInstance(format!(
                    "monomial {m} has {} variables, expected {nvars}",
                    m.nvars()
                )));
            }
            if m.degree() != degree {
                return Err(Error::InvalidInstance(format!(
                    "monomial {m} has degree {}, expected {degree}",
                    m.degree()
                )));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    /// `sum_k X_k^d` in `n + 1` variables.
    pub fn fermat(n: usize, d: u32) -> Self {
        let terms = (0..=n).map(|k| {
            let mut e = vec![0; n + 1];
            e[k] = d;
            (Monomial(e), BigRational::one())
        });
        Self::from_terms(n + 1, d, terms).expect("fermat terms are homogeneous")
    }

    /// Build from integer coefficients; convenient in tests.
    pub fn from_int_terms(nvars: usize, degree: u32, terms: &[(&[u32], i64)]) -> Result<Self> {
        Self::from_terms(
            nvars,
            degree,
            terms.iter().map(|(e, c)| {
                (
                    Monomial(e.to_vec()),
                    BigRational::from_integer(BigInt::from(*c)),
                )
            }),
        )
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }
    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Formal partial derivative by `X_k`. The derivative of a constant is the
    /// zero polynomial of degree 0.
    pub fn partial_derivative(&self, k: usize) -> HomogPoly {
        let mut out = HomogPoly::zero(self.nvars, self.degree.saturating_sub(1));
        for (m, c) in &self.terms {
            let a = m.0[k];
            if a == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[k] -= 1;
            out.add_term(Monomial(e), c * BigRational::from_integer(BigInt::from(a)));
        }
        out
    }

    pub fn multiply(&self, other: &HomogPoly) -> HomogPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = HomogPoly::zero(self.nvars, self.degree + other.degree);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn add(&self, other: &HomogPoly) -> Result<HomogPoly> {
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::DegreeMismatch {
                expected: self.degree as usize,
                found: other.degree as usize,
            });
        }
        let mut out = if self.is_zero() {
            other.clone()
        } else {
            self.clone()
        };
        if !self.is_zero() {
            for (m, c) in &other.terms {
                out.add_term(m.clone(), c.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> HomogPoly {
        let mut out = HomogPoly::zero(self.nvars, self.degree);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Reduce coefficients into a field, dropping terms that vanish there.
    pub fn coefficients_in<F: Field>(&self, field: &F) -> Result<Vec<(Monomial, F::Elem)>> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let x = field.from_rational(c).ok_or_else(|| match field.spec() {
                FieldSpec::PrimeField(p) => Error::BadReduction(p),
                FieldSpec::Rationals => unreachable!("rationals never fail"),
            })?;
            if !field.is_zero(&x) {
                out.push((m.clone(), x));
            }
        }
        Ok(out)
    }

    /// Evaluate at a point of `F^{n+1}`.
    pub fn evaluate<F: Field>(&self, field: &F, point: &[F::Elem]) -> Result<F::Elem> {
        let mut acc = field.zero();
        for (m, c) in self.coefficients_in(field)? {
            let mut t = c;
            for (x, &a) in point.iter().zip(&m.0) {
                for _ in 0..a {
                    t = field.mul(&t, x);
                }
            }
            acc = field.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Permute variables: `X_k` becomes `X_{perm[k]}`.
    pub fn permute_variables(&self, perm: &[usize]) -> HomogPoly {
        let mut out = HomogPoly::zero(self.nvars, self.degree);
        for (m, c) in &self.terms {
            let mut e = vec![0; self.nvars];
            for (k, &a) in m.0.iter().enumerate() {
                e[perm[k]] = a;
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Serialized as `[[exponents...], "coeff"]` pairs.
    pub fn to_wire(&self) -> Vec<(Vec<u32>, String)> {
        self.terms
            .iter()
            .map(|(m, c)| (m.0.clone(), rational_to_string(c)))
            .collect()
    }

    pub fn from_wire(nvars: usize, degree: u32, wire: &[(Vec<u32>, String)]) -> Result<Self> {
        let mut terms = Vec::with_capacity(wire.len());
        for (exps, c) in wire {
            let c = parse_rational(c).ok_or_else(|| {
                Error::InvalidInstance(format!("cannot parse coefficient {c:?}"))
            })?;
            terms.push((Monomial(exps.clone()), c));
        }
        Self::from_terms(nvars, degree, terms)
    }
}

impl fmt::Display for HomogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})*{}", rational_to_string(c), m)?;
        }
        Ok(())
    }
}

/// A seed-deterministic random form of degree `l`: every one of the
/// `C(n + l, n)` coefficients is drawn uniformly from `F_p`, or from the
/// nonzero integers in `[-10, 10]` over the rationals.
pub fn random_homog(n: usize, l: u32, field: FieldSpec, seed: u64) -> HomogPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_homog_with(&mut rng, n, l, field)
}

pub fn random_homog_with<R: Rng>(rng: &mut R, n: usize, l: u32, field: FieldSpec) -> HomogPoly {
    let terms = monomial_basis(n, l as i64).into_iter().map(|m| {
        let c = match field {
            FieldSpec::PrimeField(p) => BigInt::from(rng.gen_range(0..p)),
            FieldSpec::Rationals => {
                let v: i64 = rng.gen_range(1..=10);
                BigInt::from(if rng.gen_bool(0.5) { v } else { -v })
            }
        };
        (m, BigRational::from_integer(c))
    });
    HomogPoly::from_terms(n + 1, l, terms).expect("basis monomials are homogeneous")
}
