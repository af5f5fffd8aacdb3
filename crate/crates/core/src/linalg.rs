//! Exact sparse linear algebra over [`Field`]s.
//!
//! Matrices are stored column-major: every quotient and structure check in the
//! crate asks for the span of the columns of a map (an ideal piece, a Koszul
//! differential, a pairing), so elimination works on columns. The core engine
//! is [`Echelon`], an incremental row-echelon basis keyed by leading
//! coordinate. Its pivot set depends only on the span that was inserted, not on
//! the insertion order, which makes quotient representatives deterministic.
//!
//! Over the rationals there are two routes to the rank: the multi-modular fast
//! path ([`rank_multimodular`]) and fraction-free integer elimination
//! ([`rank_fraction_free`]).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{random_prime, Field, PrimeField, RationalField, MODULAR_PRIME_RANGE};

/// Sparse vector: strictly increasing indices, no stored zeros.
pub type SparseVec<E> = Vec<(usize, E)>;

/// Environment variable overriding the default matrix budget.
pub const BUDGET_ENV: &str = "JACRING_MAX_MATRIX_CELLS";

const DEFAULT_BUDGET: usize = 2_000_000_000;

/// The matrix budget in cells (`rows * cols`), read once from the environment.
pub fn default_budget() -> usize {
    static BUDGET: OnceLock<usize> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_BUDGET)
    })
}

pub fn check_budget(rows: usize, cols: usize, budget: usize) -> Result<()> {
    if rows.saturating_mul(cols) > budget {
        return Err(Error::DimensionOverflow { rows, cols, budget });
    }
    Ok(())
}

/// A linear map between finite-dimensional coordinate spaces.
#[derive(Debug, Clone)]
pub struct SparseLinearMap<F: Field> {
    field: F,
    rows: usize,
    columns: Vec<SparseVec<F::Elem>>,
    pub domain_tag: String,
    pub codomain_tag: String,
}

impl<F: Field> SparseLinearMap<F> {
    pub fn zero(field: F, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            columns: vec![Vec::new(); cols],
            domain_tag: String::new(),
            codomain_tag: String::new(),
        }
    }

    /// Build from `(row, col, coefficient)` triplets. Rejects duplicates,
    /// explicit zeros and out-of-range indices.
    pub fn from_triplets(
        field: F,
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, F::Elem)>,
    ) -> Result<Self> {
        let mut columns: Vec<SparseVec<F::Elem>> = vec![Vec::new(); cols];
        for (r, c, v) in entries {
            if r >= rows || c >= cols {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            if field.is_zero(&v) {
                return Err(Error::InvalidMatrix(format!("explicit zero at ({r}, {c})")));
            }
            columns[c].push((r, v));
        }
        for (c, col) in columns.iter_mut().enumerate() {
            col.sort_by_key(|(r, _)| *r);
            if col.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidMatrix(format!("duplicate entry in column {c}")));
            }
        }
        Ok(Self {
            field,
            rows,
            columns,
            domain_tag: String::new(),
            codomain_tag: String::new(),
        })
    }

    /// Build from columns given as unsorted `(row, value)` lists; repeated rows
    /// are summed and zeros dropped.
    pub fn from_column_terms(
        field: F,
        rows: usize,
        columns: impl IntoIterator<Item = Vec<(usize, F::Elem)>>,
    ) -> Result<Self> {
        let columns = columns
            .into_iter()
            .map(|terms| normalize_terms(&field, rows, terms))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            field,
            rows,
            columns,
            domain_tag: String::new(),
            codomain_tag: String::new(),
        })
    }

    /// Build from dense columns.
    pub fn from_dense_columns(field: F, rows: usize, columns: &[Vec<F::Elem>]) -> Result<Self> {
        let mut out = Vec::with_capacity(columns.len());
        for col in columns {
            if col.len() != rows {
                return Err(Error::InconsistentDimensions(format!(
                    "column of length {} in a map with {rows} rows",
                    col.len()
                )));
            }
            out.push(dense_to_sparse(&field, col));
        }
        Ok(Self {
            field,
            rows,
            columns: out,
            domain_tag: String::new(),
            codomain_tag: String::new(),
        })
    }

    pub fn with_tags(mut self, domain: impl Into<String>, codomain: impl Into<String>) -> Self {
        self.domain_tag = domain.into();
        self.codomain_tag = codomain.into();
        self
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.columns.len()
    }
    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }
    pub fn column(&self, j: usize) -> &[(usize, F::Elem)] {
        &self.columns[j]
    }
    pub fn columns(&self) -> &[SparseVec<F::Elem>] {
        &self.columns
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &F::Elem)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<SparseVec<F::Elem>> = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                cols[*r].push((c, v.clone()));
            }
        }
        Self {
            field: self.field.clone(),
            rows: self.cols(),
            columns: cols,
            domain_tag: self.codomain_tag.clone(),
            codomain_tag: self.domain_tag.clone(),
        }
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.rows != self.cols() {
            return Err(Error::InconsistentDimensions(format!(
                "cannot compose {}x{} after {}x{}",
                self.rows,
                self.cols(),
                other.rows,
                other.cols()
            )));
        }
        let f = &self.field;
        let columns = other
            .columns
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, F::Elem> = BTreeMap::new();
                for (k, x) in col {
                    for (r, y) in &self.columns[*k] {
                        let prod = f.mul(x, y);
                        let slot = acc.entry(*r).or_insert_with(|| f.zero());
                        *slot = f.add(slot, &prod);
                    }
                }
                acc.into_iter().filter(|(_, v)| !f.is_zero(v)).collect()
            })
            .collect();
        Ok(Self {
            field: f.clone(),
            rows: self.rows,
            columns,
            domain_tag: other.domain_tag.clone(),
            codomain_tag: self.codomain_tag.clone(),
        })
    }

    pub fn apply(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if v.len() != self.cols() {
            return Err(Error::InconsistentDimensions(format!(
                "vector of length {} applied to a map with {} columns",
                v.len(),
                self.cols()
            )));
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.rows];
        for (x, col) in v.iter().zip(&self.columns) {
            if f.is_zero(x) {
                continue;
            }
            for (r, y) in col {
                out[*r] = f.add(&out[*r], &f.mul(x, y));
            }
        }
        Ok(out)
    }

    /// Dense row-major copy; only for small maps.
    pub fn to_dense(&self) -> Vec<Vec<F::Elem>> {
        let mut out = vec![vec![self.field.zero(); self.cols()]; self.rows];
        for (r, c, v) in self.entries() {
            out[r][c] = v.clone();
        }
        out
    }

    /// Stack maps with a common domain on top of each other.
    pub fn vstack(field: F, cols: usize, blocks: &[Self]) -> Result<Self> {
        let mut columns: Vec<SparseVec<F::Elem>> = vec![Vec::new(); cols];
        let mut offset = 0;
        for b in blocks {
            if b.cols() != cols {
                return Err(Error::InconsistentDimensions(
                    "vstack of maps with different domains".into(),
                ));
            }
            for (j, col) in b.columns.iter().enumerate() {
                columns[j].extend(col.iter().map(|(r, v)| (r + offset, v.clone())));
            }
            offset += b.rows;
        }
        Ok(Self {
            field,
            rows: offset,
            columns,
            domain_tag: String::new(),
            codomain_tag: String::new(),
        })
    }
}

impl SparseLinearMap<RationalField> {
    /// Reduce every entry modulo `p`.
    pub fn reduce_mod(&self, field: PrimeField) -> Result<SparseLinearMap<PrimeField>> {
        let mut columns = Vec::with_capacity(self.cols());
        for col in &self.columns {
            let mut out = Vec::with_capacity(col.len());
            for (r, v) in col {
                let x = field
                    .from_rational(v)
                    .ok_or(Error::BadReduction(field.modulus()))?;
                if x != 0 {
                    out.push((*r, x));
                }
            }
            columns.push(out);
        }
        Ok(SparseLinearMap {
            field,
            rows: self.rows,
            columns,
            domain_tag: self.domain_tag.clone(),
            codomain_tag: self.codomain_tag.clone(),
        })
    }
}

fn normalize_terms<F: Field>(
    field: &F,
    rows: usize,
    mut terms: Vec<(usize, F::Elem)>,
) -> Result<SparseVec<F::Elem>> {
    terms.sort_by_key(|(r, _)| *r);
    let mut out: SparseVec<F::Elem> = Vec::with_capacity(terms.len());
    for (r, v) in terms {
        if r >= rows {
            return Err(Error::InvalidMatrix(format!("row {r} outside {rows} rows")));
        }
        match out.last_mut() {
            Some((lr, lv)) if *lr == r => *lv = field.add(lv, &v),
            _ => out.push((r, v)),
        }
    }
    out.retain(|(_, v)| !field.is_zero(v));
    Ok(out)
}

pub fn dense_to_sparse<F: Field>(field: &F, v: &[F::Elem]) -> SparseVec<F::Elem> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !field.is_zero(x))
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn sparse_to_dense<F: Field>(field: &F, dim: usize, v: &[(usize, F::Elem)]) -> Vec<F::Elem> {
    let mut out = vec![field.zero(); dim];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

/// Outcome of inserting a vector into an [`Echelon`].
#[derive(Debug, Clone, PartialEq)]
pub enum Insertion<E> {
    /// The vector was independent; it now owns the pivot at this coordinate.
    Pivot(usize),
    /// The vector reduced to zero on the pivot coordinates; the remaining
    /// coordinates (at or beyond the pivot limit) are returned.
    Dependent(SparseVec<E>),
}

/// An incremental echelon basis.
///
/// Each stored vector has leading coordinate `c` with coefficient one and no
/// nonzero entries before `c`; at most one vector per leading coordinate.
/// Pivots are only searched among coordinates `< limit`, which lets callers
/// append bookkeeping coordinates (used by [`kernel_basis`]).
#[derive(Debug, Clone)]
pub struct Echelon<F: Field> {
    field: F,
    dim: usize,
    limit: usize,
    pivots: Vec<Option<SparseVec<F::Elem>>>,
    rank: usize,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F, dim: usize) -> Self {
        Self::with_limit(field, dim, dim)
    }

    pub fn with_limit(field: F, dim: usize, limit: usize) -> Self {
        assert!(limit <= dim);
        Self {
            field,
            dim,
            limit,
            pivots: vec![None; limit],
            rank: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        c < self.limit && self.pivots[c].is_some()
    }

    /// Pivot coordinates in increasing order.
    pub fn pivot_columns(&self) -> Vec<usize> {
        (0..self.limit).filter(|&c| self.pivots[c].is_some()).collect()
    }

    /// Coordinates below the limit that carry no pivot, in increasing order.
    pub fn non_pivot_columns(&self) -> Vec<usize> {
        (0..self.limit).filter(|&c| self.pivots[c].is_none()).collect()
    }

    /// The stored basis vector owning pivot `c`.
    pub fn pivot_vector(&self, c: usize) -> Option<&[(usize, F::Elem)]> {
        self.pivots.get(c).and_then(|p| p.as_deref())
    }

    pub fn insert(&mut self, v: &[(usize, F::Elem)]) -> Insertion<F::Elem> {
        let Some(start) = v.first().map(|(i, _)| *i) else {
            return Insertion::Dependent(Vec::new());
        };
        let mut acc = sparse_to_dense(&self.field, self.dim, v);
        let f = &self.field;
        for c in start..self.limit {
            if f.is_zero(&acc[c]) {
                continue;
            }
            match &self.pivots[c] {
                Some(row) => {
                    let factor = acc[c].clone();
                    f.sub_scaled(&mut acc, &factor, row);
                }
                None => {
                    let inv = f.inv(&acc[c]);
                    let row: SparseVec<F::Elem> = acc[c..]
                        .iter()
                        .enumerate()
                        .filter(|(_, x)| !f.is_zero(x))
                        .map(|(k, x)| (c + k, f.mul(x, &inv)))
                        .collect();
                    self.pivots[c] = Some(row);
                    self.rank += 1;
                    return Insertion::Pivot(c);
                }
            }
        }
        let start = start.max(self.limit);
        Insertion::Dependent(
            acc[start..]
                .iter()
                .enumerate()
                .filter(|(_, x)| !f.is_zero(x))
                .map(|(k, x)| (start + k, x.clone()))
                .collect(),
        )
    }

    /// Reduce `v` in place to its normal form: zero on every pivot coordinate.
    pub fn reduce_dense(&self, v: &mut [F::Elem]) {
        assert_eq!(v.len(), self.dim);
        let f = &self.field;
        for c in 0..self.limit {
            if f.is_zero(&v[c]) {
                continue;
            }
            if let Some(row) = &self.pivots[c] {
                let factor = v[c].clone();
                f.sub_scaled(v, &factor, row);
            }
        }
    }

    /// Whether `v` lies in the span.
    pub fn contains(&self, v: &[F::Elem]) -> bool {
        let mut w = v.to_vec();
        self.reduce_dense(&mut w);
        w.iter().all(|x| self.field.is_zero(x))
    }
}

/// Insert the columns of `m` in a sparsity-friendly order: by leading row, then
/// by fill. The pivot set does not depend on this order.
fn markowitz_order<E>(columns: &[SparseVec<E>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..columns.len())
        .filter(|&j| !columns[j].is_empty())
        .collect();
    order.sort_by_key(|&j| (columns[j][0].0, columns[j].len(), j));
    order
}

/// Echelon basis of the column span of `m`.
pub fn column_echelon<F: Field>(m: &SparseLinearMap<F>, budget: usize) -> Result<Echelon<F>> {
    check_budget(m.rows(), m.cols(), budget)?;
    let mut ech = Echelon::new(m.field().clone(), m.rows());
    for j in markowitz_order(&m.columns) {
        ech.insert(&m.columns[j]);
        if ech.rank() == m.rows() {
            break;
        }
    }
    Ok(ech)
}

/// Rank of `m` by sparse elimination with free pivot choice.
///
/// Unlike [`column_echelon`] the pivot of a column may be any of its nonzero
/// coordinates; the coordinate hit by the fewest columns is preferred, which
/// keeps fill-in low on the structured matrices built here. Only the rank is
/// meaningful, not the pivot set.
pub fn sparse_rank<F: Field>(m: &SparseLinearMap<F>, budget: usize) -> Result<usize> {
    check_budget(m.rows(), m.cols(), budget)?;
    let f = m.field();
    let rows = m.rows();
    let mut hits = vec![0usize; rows];
    for col in &m.columns {
        for (i, _) in col {
            hits[*i] += 1;
        }
    }
    let mut order: Vec<usize> = (0..m.cols()).filter(|&j| !m.columns[j].is_empty()).collect();
    order.sort_by_key(|&j| (m.columns[j].len(), Reverse(j)));
    // Stored vectors, normalized to one at their pivot, each zero on the
    // pivots of all vectors stored before it.
    let mut pivots: Vec<(usize, SparseVec<F::Elem>)> = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; rows];
    let mut acc = vec![f.zero(); rows];
    let mut touched: Vec<usize> = Vec::new();
    let mut mark = vec![false; rows];
    for j in order {
        for (i, x) in &m.columns[j] {
            acc[*i] = x.clone();
            if !mark[*i] {
                mark[*i] = true;
                touched.push(*i);
            }
        }
        // Reduce in creation order: later vectors never reintroduce the
        // pivots of earlier ones, and only pivots in the support matter.
        let mut queue: BinaryHeap<Reverse<usize>> =
            touched.iter().filter_map(|&i| owner[i]).map(Reverse).collect();
        let mut last = None;
        while let Some(Reverse(k)) = queue.pop() {
            if last == Some(k) {
                continue;
            }
            last = Some(k);
            let (c, vec) = &pivots[k];
            if f.is_zero(&acc[*c]) {
                continue;
            }
            let factor = acc[*c].clone();
            f.sub_scaled(&mut acc, &factor, vec);
            for (i, _) in vec {
                if !mark[*i] {
                    mark[*i] = true;
                    touched.push(*i);
                    if let Some(k2) = owner[*i] {
                        queue.push(Reverse(k2));
                    }
                }
            }
        }
        let best = touched
            .iter()
            .copied()
            .filter(|&i| !f.is_zero(&acc[i]))
            .min_by_key(|&i| (hits[i], i));
        if let Some(c) = best {
            let inv = f.inv(&acc[c]);
            let mut vec: SparseVec<F::Elem> = touched
                .iter()
                .filter(|&&i| !f.is_zero(&acc[i]))
                .map(|&i| (i, f.mul(&acc[i], &inv)))
                .collect();
            vec.sort_by_key(|(i, _)| *i);
            owner[c] = Some(pivots.len());
            pivots.push((c, vec));
        }
        for &i in &touched {
            acc[i] = f.zero();
            mark[i] = false;
        }
        touched.clear();
        if pivots.len() == rows {
            break;
        }
    }
    Ok(pivots.len())
}

/// How a rank was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankMethod {
    Exact,
    MultiModular(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankResult {
    pub rank: usize,
    pub method: RankMethod,
    /// Number of primes that produced the reported rank (1 for exact).
    pub agreement: usize,
}

/// Rank in the matrix's own field.
pub fn rank<F: Field>(m: &SparseLinearMap<F>) -> Result<RankResult> {
    rank_with_budget(m, default_budget())
}

pub fn rank_with_budget<F: Field>(m: &SparseLinearMap<F>, budget: usize) -> Result<RankResult> {
    let ech = column_echelon(m, budget)?;
    Ok(RankResult {
        rank: ech.rank(),
        method: RankMethod::Exact,
        agreement: 1,
    })
}

/// Options for the multi-modular rank over the rationals.
#[derive(Debug, Clone)]
pub struct ModularOptions {
    /// Primes in the first round; at least two.
    pub primes: usize,
    pub seed: u64,
    pub budget: usize,
}

impl Default for ModularOptions {
    fn default() -> Self {
        Self {
            primes: 2,
            seed: 0x6a61_6372,
            budget: default_budget(),
        }
    }
}

/// Draw `count` distinct primes from the modular range.
pub fn draw_primes(rng: &mut ChaCha8Rng, count: usize, avoid: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    while out.len() < count {
        let p = random_prime(rng, MODULAR_PRIME_RANGE.0, MODULAR_PRIME_RANGE.1);
        if !out.contains(&p) && !avoid.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Rank of a rational matrix by reduction modulo random primes.
///
/// Two primes (or `opts.primes`) first; if they disagree, four more, and the
/// largest rank is accepted once two primes attain it. Otherwise the exact
/// fraction-free rank is returned.
pub fn rank_multimodular(
    m: &SparseLinearMap<RationalField>,
    opts: &ModularOptions,
) -> Result<RankResult> {
    check_budget(m.rows(), m.cols(), opts.budget)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut primes = draw_primes(&mut rng, opts.primes.max(2), &[]);
    let mut ranks = modular_ranks(m, &primes, opts.budget)?;
    if ranks.iter().all(|(_, r)| *r == ranks[0].1) {
        return Ok(RankResult {
            rank: ranks[0].1,
            method: RankMethod::MultiModular(primes),
            agreement: ranks.len(),
        });
    }
    let extra = draw_primes(&mut rng, 4, &primes);
    ranks.extend(modular_ranks(m, &extra, opts.budget)?);
    primes.extend(extra);
    let best = ranks.iter().map(|(_, r)| *r).max().unwrap_or(0);
    let agreeing = ranks.iter().filter(|(_, r)| *r == best).count();
    if agreeing >= 2 {
        return Ok(RankResult {
            rank: best,
            method: RankMethod::MultiModular(primes),
            agreement: agreeing,
        });
    }
    Ok(RankResult {
        rank: rank_fraction_free(m, opts.budget)?,
        method: RankMethod::Exact,
        agreement: 1,
    })
}

fn modular_ranks(
    m: &SparseLinearMap<RationalField>,
    primes: &[u64],
    budget: usize,
) -> Result<Vec<(u64, usize)>> {
    primes
        .par_iter()
        .map(|&p| {
            let field = PrimeField::new(p)?;
            match m.reduce_mod(field) {
                Ok(mp) => Ok((p, column_echelon(&mp, budget)?.rank())),
                // A prime dividing a denominator is simply useless.
                Err(Error::BadReduction(_)) => Ok((p, 0)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Exact rank over the rationals by fraction-free elimination: rows are kept
/// integral and primitive, so intermediate growth stays bounded by the
/// content of the pivots.
pub fn rank_fraction_free(m: &SparseLinearMap<RationalField>, budget: usize) -> Result<usize> {
    check_budget(m.rows(), m.cols(), budget)?;
    let dim = m.rows();
    let mut pivots: Vec<Option<Vec<(usize, BigInt)>>> = vec![None; dim];
    let mut rank = 0;
    for j in markowitz_order(&m.columns) {
        let col = &m.columns[j];
        let mut acc = integral_dense(dim, col);
        let start = col[0].0;
        for c in start..dim {
            if acc[c].is_zero() {
                continue;
            }
            match &pivots[c] {
                Some(row) => {
                    let lead = &row[0].1;
                    let g = lead.gcd(&acc[c]);
                    let a = lead / &g;
                    let b = &acc[c] / &g;
                    if !a.is_one() {
                        for x in acc[c..].iter_mut() {
                            if !x.is_zero() {
                                *x *= &a;
                            }
                        }
                    }
                    for (k, y) in row {
                        acc[*k] -= &b * y;
                    }
                    make_primitive(&mut acc[c..]);
                }
                None => {
                    if acc[c].is_negative() {
                        for x in acc[c..].iter_mut() {
                            *x = -&*x;
                        }
                    }
                    pivots[c] = Some(
                        acc[c..]
                            .iter()
                            .enumerate()
                            .filter(|(_, x)| !x.is_zero())
                            .map(|(k, x)| (c + k, x.clone()))
                            .collect(),
                    );
                    rank += 1;
                    break;
                }
            }
        }
        if rank == dim {
            break;
        }
    }
    Ok(rank)
}

fn integral_dense(dim: usize, col: &[(usize, BigRational)]) -> Vec<BigInt> {
    let lcm = col
        .iter()
        .fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    let mut out = vec![BigInt::zero(); dim];
    for (r, v) in col {
        out[*r] = v.numer() * (&lcm / v.denom());
    }
    make_primitive(&mut out);
    out
}

fn make_primitive(v: &mut [BigInt]) {
    let g = v
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in v.iter_mut() {
        if !x.is_zero() {
            *x = &*x / &g;
        }
    }
}

/// A basis of the kernel of `m`, as dense domain vectors.
pub fn kernel_basis<F: Field>(m: &SparseLinearMap<F>) -> Result<Vec<Vec<F::Elem>>> {
    kernel_basis_with_budget(m, default_budget())
}

pub fn kernel_basis_with_budget<F: Field>(
    m: &SparseLinearMap<F>,
    budget: usize,
) -> Result<Vec<Vec<F::Elem>>> {
    check_budget(m.rows(), m.cols(), budget)?;
    let f = m.field().clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut ech = Echelon::with_limit(f.clone(), rows + cols, rows);
    let mut kernel = Vec::new();
    for j in 0..cols {
        let mut v = m.columns[j].clone();
        v.push((rows + j, f.one()));
        if let Insertion::Dependent(tail) = ech.insert(&v) {
            let mut k = vec![f.zero(); cols];
            for (i, x) in tail {
                k[i - rows] = x;
            }
            kernel.push(k);
        }
    }
    if kernel.len() + ech.rank() != cols {
        return Err(Error::InconsistentDimensions(format!(
            "kernel {} + rank {} != {} columns",
            kernel.len(),
            ech.rank(),
            cols
        )));
    }
    Ok(kernel)
}

/// Columns of `m` forming a basis of its image, as dense codomain vectors.
pub fn image_basis<F: Field>(m: &SparseLinearMap<F>) -> Result<Vec<Vec<F::Elem>>> {
    check_budget(m.rows(), m.cols(), default_budget())?;
    let f = m.field();
    let mut ech = Echelon::new(f.clone(), m.rows());
    let mut basis = Vec::new();
    for j in 0..m.cols() {
        if let Insertion::Pivot(_) = ech.insert(&m.columns[j]) {
            basis.push(sparse_to_dense(f, m.rows(), &m.columns[j]));
        }
    }
    Ok(basis)
}

/// Coordinates whose classes form a basis of `ambient / span(image)`: the
/// non-pivot coordinates of the leftmost-pivot echelon form, in order.
pub fn quotient_representatives<F: Field>(
    field: &F,
    ambient_dim: usize,
    image: &[Vec<F::Elem>],
) -> Result<Vec<usize>> {
    let mut ech = Echelon::new(field.clone(), ambient_dim);
    for v in image {
        if v.len() != ambient_dim {
            return Err(Error::InconsistentDimensions(format!(
                "image vector of length {} in ambient dimension {ambient_dim}",
                v.len()
            )));
        }
        ech.insert(&dense_to_sparse(field, v));
    }
    Ok(ech.non_pivot_columns())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn rational(rows: usize, cols: usize, dense: &[i64]) -> SparseLinearMap<RationalField> {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(k, v)| (k / cols, k % cols, q(*v)));
        SparseLinearMap::from_triplets(RationalField, rows, cols, entries).unwrap()
    }

    #[test]
    fn identity_and_zero_ranks() {
        let id = rational(2, 2, &[1, 0, 0, 1]);
        assert_eq!(rank(&id).unwrap().rank, 2);
        let zero = SparseLinearMap::zero(RationalField, 3, 5);
        assert_eq!(rank(&zero).unwrap().rank, 0);
        assert_eq!(kernel_basis(&id).unwrap().len(), 0);
    }

    #[test]
    fn kernel_of_zero_and_sum_maps() {
        let zero = SparseLinearMap::zero(RationalField, 1, 3);
        assert_eq!(kernel_basis(&zero).unwrap().len(), 3);
        let sum = rational(1, 2, &[1, 1]);
        let k = kernel_basis(&sum).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(&k[0][0] + &k[0][1], q(0));
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn quotient_representatives_examples() {
        let f = RationalField;
        let e1 = vec![q(1), q(0), q(0)];
        assert_eq!(quotient_representatives(&f, 3, &[e1]).unwrap(), vec![1, 2]);
        assert_eq!(
            quotient_representatives(&f, 4, &[]).unwrap(),
            vec![0, 1, 2, 3]
        );
        assert!(matches!(
            quotient_representatives(&f, 3, &[vec![q(1)]]),
            Err(Error::InconsistentDimensions(_))
        ));
    }

    #[test]
    fn triplet_validation() {
        let f = RationalField;
        assert!(SparseLinearMap::from_triplets(f, 2, 2, [(0, 0, q(1)), (0, 0, q(2))]).is_err());
        assert!(SparseLinearMap::from_triplets(f, 2, 2, [(0, 0, q(0))]).is_err());
        assert!(SparseLinearMap::from_triplets(f, 2, 2, [(2, 0, q(1))]).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let m = SparseLinearMap::zero(RationalField, 100, 100);
        assert!(matches!(
            rank_with_budget(&m, 10),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn fraction_free_matches_rational_echelon() {
        // rank 2: third row = first + 2 * second
        let m = rational(3, 3, &[2, 4, 6, 1, 3, 5, 4, 10, 16]);
        assert_eq!(rank_fraction_free(&m, usize::MAX).unwrap(), 2);
        assert_eq!(rank(&m).unwrap().rank, 2);
        let mm = rank_multimodular(&m, &ModularOptions::default()).unwrap();
        assert_eq!(mm.rank, 2);
        assert!(matches!(mm.method, RankMethod::MultiModular(ref p) if p.len() == 2));
        assert_eq!(mm.agreement, 2);
    }

    #[test]
    fn rank_drop_mod_small_prime_is_visible() {
        // det = 7: singular mod 7 only
        let m = rational(2, 2, &[3, 1, 1, 5]);
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(rank(&m.reduce_mod(f7).unwrap()).unwrap().rank, 1);
        assert_eq!(rank_fraction_free(&m, usize::MAX).unwrap(), 2);
    }

    #[test]
    fn echelon_reduce_is_normal_form() {
        let f = PrimeField::new(101).unwrap();
        let mut ech = Echelon::new(f, 3);
        ech.insert(&[(0, 1), (1, 1)]);
        let mut v = vec![5, 0, 7];
        ech.reduce_dense(&mut v);
        assert_eq!(v, vec![0, f.neg(&5), 7]);
        assert!(ech.contains(&[2, 2, 0]));
        assert!(!ech.contains(&[0, 0, 1]));
    }

    proptest::proptest! {
        #[test]
        fn sparse_rank_matches_echelon(
            rows in 1usize..9,
            cols in 1usize..12,
            seed in proptest::prelude::any::<u64>(),
            density in 1u64..4,
        ) {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = PrimeField::new(7).unwrap();
            let mut triplets = Vec::new();
            for i in 0..rows {
                for j in 0..cols {
                    if rng.gen_range(0..4) < density {
                        triplets.push((i, j, rng.gen_range(1..7u64)));
                    }
                }
            }
            let m = SparseLinearMap::from_triplets(f, rows, cols, triplets).unwrap();
            let expected = column_echelon(&m, usize::MAX).unwrap().rank();
            proptest::prop_assert_eq!(sparse_rank(&m, usize::MAX).unwrap(), expected);
            proptest::prop_assert_eq!(sparse_rank(&m.transpose(), usize::MAX).unwrap(), expected);
        }
    }
}
