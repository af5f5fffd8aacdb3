//! Formal calculus of logarithmic forms `dG_j/G_j`.
//!
//! A [`DlogWord`] `(j_1 < ... < j_q)` stands for
//! `dG_{j_1}/G_{j_1} ^ ... ^ dG_{j_q}/G_{j_q}`; indices are 1-based in
//! `{1..s}`. Nothing here depends on the polynomials themselves, only on the
//! degrees `e_1..e_s`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RationalField;
use crate::instance::Instance;
use crate::linalg::{column_echelon, SparseLinearMap};
use crate::poly::binomial;
use crate::verdict::Verdict;

/// A strictly increasing list of boundary indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DlogWord(Vec<usize>);

impl DlogWord {
    pub fn new(indices: Vec<usize>, s: usize) -> Result<Self> {
        if indices.iter().any(|&j| j == 0 || j > s) {
            return Err(Error::BadIndexList(format!("{indices:?} not within 1..={s}")));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadIndexList(format!("{indices:?} is not strictly increasing")));
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sort a list of distinct indices, returning the sign of the sorting
/// permutation, or `None` when an index repeats.
fn sort_with_sign(mut v: Vec<usize>) -> Option<(Vec<usize>, bool)> {
    let mut negative = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, negative))
}

/// A homogeneous rational combination of words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DlogElement {
    degree: usize,
    terms: BTreeMap<DlogWord, BigRational>,
}

impl DlogElement {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn word(w: DlogWord) -> Self {
        let mut e = Self::zero(w.len());
        e.terms.insert(w, BigRational::one());
        e
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DlogWord, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, w: &DlogWord) -> BigRational {
        self.terms.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, w: DlogWord, c: BigRational) {
        let slot = self.terms.entry(w.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.degree);
        if !c.is_zero() {
            for (w, x) in &self.terms {
                out.terms.insert(w.clone(), x * c);
            }
        }
        out
    }

    /// The exterior product.
    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let joined = a.0.iter().chain(&b.0).copied().collect();
                if let Some((sorted, negative)) = sort_with_sign(joined) {
                    let c = x * y;
                    out.add_term(DlogWord(sorted), if negative { -c } else { c });
                }
            }
        }
        out
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `omega(j_1..j_{q+1}) = sum_nu (-1)^{nu-1} e_{j_nu} [j_1..^j_nu..j_{q+1}]`,
/// of degree `q`.
///
/// The indices must be distinct and within `1..=s`, in any order; a
/// permutation of the list multiplies the result by its sign.
pub fn omega_form(e: &[u32], js: &[usize]) -> Result<DlogElement> {
    let s = e.len();
    if js.is_empty() {
        return Err(Error::BadIndexList("empty index list".into()));
    }
    if js.iter().any(|&j| j == 0 || j > s) {
        return Err(Error::BadIndexList(format!("{js:?} not within 1..={s}")));
    }
    if sort_with_sign(js.to_vec()).is_none() {
        return Err(Error::BadIndexList(format!("{js:?} repeats an index")));
    }
    let mut out = DlogElement::zero(js.len() - 1);
    for nu in 0..js.len() {
        let rest: Vec<usize> = js.iter().enumerate().filter(|(i, _)| *i != nu).map(|(_, &j)| j).collect();
        let (sorted, negative) = sort_with_sign(rest).expect("distinct indices");
        let sign = if (nu % 2 == 1) != negative { -1 } else { 1 };
        out.add_term(DlogWord(sorted), int(sign * e[js[nu] - 1] as i64));
    }
    Ok(out)
}

/// `dg_j/g_j = e_s [j] - e_j [s]` for `g_j = G_j^{e_s} / G_s^{e_j}`, `j < s`.
pub fn dlog_g(e: &[u32], j: usize) -> Result<DlogElement> {
    let s = e.len();
    if j == 0 || j >= s {
        return Err(Error::BadIndexList(format!("g_{j} needs 1 <= j < s = {s}")));
    }
    let mut out = DlogElement::zero(1);
    out.add_term(DlogWord(vec![j]), int(e[s - 1] as i64));
    out.add_term(DlogWord(vec![s]), int(-(e[j - 1] as i64)));
    Ok(out)
}

/// `dg_j/g_j` divided by `e_s`, that is `[j] - (e_j/e_s) [s]`.
pub fn normalized_dlog_g(e: &[u32], j: usize) -> Result<DlogElement> {
    let es = BigRational::new(BigInt::from(1), BigInt::from(e[e.len() - 1]));
    Ok(dlog_g(e, j)?.scale(&es))
}

fn wedge_all(factors: impl IntoIterator<Item = Result<DlogElement>>) -> Result<DlogElement> {
    let mut acc = DlogElement::word(DlogWord::empty());
    for f in factors {
        acc = acc.wedge(&f?);
    }
    Ok(acc)
}

/// `dg_{j_1}/g_{j_1} ^ ... ^ dg_{j_q}/g_{j_q}`.
pub fn wedge_of_dlog_g(e: &[u32], js: &[usize]) -> Result<DlogElement> {
    wedge_all(js.iter().map(|&j| dlog_g(e, j)))
}

/// Checks `dg_{j_1}/g_{j_1} ^ ... ^ dg_{j_q}/g_{j_q} = (-1)^q e_s^{q-1} omega(j_1..j_q, s)`
/// for `1 <= j_1 < ... < j_q < s`.
pub fn dlog_g_identity_holds(e: &[u32], js: &[usize]) -> Result<bool> {
    let s = e.len();
    let q = js.len();
    if q == 0 {
        return Err(Error::BadIndexList("empty index list".into()));
    }
    let lhs = wedge_of_dlog_g(e, js)?;
    let mut list = js.to_vec();
    list.push(s);
    let es = int(e[s - 1] as i64);
    let mut factor = num_traits::pow(es, q - 1);
    if q % 2 == 1 {
        factor = -factor;
    }
    Ok(lhs == omega_form(e, &list)?.scale(&factor))
}

/// `C(s-1, q)` for `0 <= q <= s-1`, else `0`: the number of independent
/// forms `omega(j_1..j_q, s)`.
pub fn wedge_space_dim(s: usize, q: usize) -> usize {
    if s == 0 || q > s - 1 {
        0
    } else {
        binomial(s - 1, q)
    }
}

fn subsets_1based(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..=n {
            cur.push(j);
            go(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// Rank of the span of all `omega(j_1..j_{q+1})`, computed in the formal
/// algebra.
pub fn omega_span_rank(e: &[u32], q: usize) -> Result<usize> {
    let s = e.len();
    let words = subsets_1based(s, q);
    let index: BTreeMap<DlogWord, usize> = words
        .into_iter()
        .enumerate()
        .map(|(i, w)| (DlogWord(w), i))
        .collect();
    let mut columns = Vec::new();
    for js in subsets_1based(s, q + 1) {
        let w = omega_form(e, &js)?;
        let mut col: Vec<(usize, BigRational)> = w.terms().map(|(w, c)| (index[w], c.clone())).collect();
        col.sort_by_key(|(i, _)| *i);
        columns.push(col);
    }
    let m = SparseLinearMap::from_column_terms(RationalField, index.len(), columns)?;
    Ok(column_echelon(&m, usize::MAX)?.rank())
}

/// All `m`-subsets of `{1..s-1}`, in lexicographic order.
pub fn index_set_j(s: usize, m: usize) -> Vec<DlogWord> {
    if s == 0 {
        return Vec::new();
    }
    subsets_1based(s - 1, m).into_iter().map(DlogWord).collect()
}

/// The residue along the stratum `tau`: the coefficient of the word `tau`.
pub fn residue(tau: &DlogWord, el: &DlogElement) -> Result<BigRational> {
    if tau.len() != el.degree() {
        return Err(Error::DegreeMismatch {
            expected: tau.len(),
            found: el.degree(),
        });
    }
    Ok(el.coeff(tau))
}

/// `dg_{sigma_1}/g_{sigma_1} ^ ... ^ dg_{sigma_m}/g_{sigma_m}`, each factor
/// divided by `e_s` when `normalized`.
pub fn omega_us(e: &[u32], sigma: &DlogWord, normalized: bool) -> Result<DlogElement> {
    if normalized {
        wedge_all(sigma.indices().iter().map(|&j| normalized_dlog_g(e, j)))
    } else {
        wedge_of_dlog_g(e, sigma.indices())
    }
}

/// Matrix `[Res_tau omega(sigma)]` with rows `sigma` and columns `tau` in `J`.
pub fn residue_matrix(e: &[u32], m: usize, normalized: bool) -> Result<Vec<Vec<BigRational>>> {
    let j = index_set_j(e.len(), m);
    j.iter()
        .map(|sigma| {
            let w = omega_us(e, sigma, normalized)?;
            j.iter().map(|tau| residue(tau, &w)).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueReport {
    pub m: usize,
    pub s: usize,
    /// `|J| = C(s-1, m)`.
    pub size: usize,
    /// Whether the normalized residue matrix is the identity.
    pub identity: bool,
    /// The unnormalized matrix is `e_s^m` times the identity.
    pub raw_scale_ok: bool,
    pub verdict: Verdict,
}

pub fn residue_matrix_check_for(e: &[u32], m: usize) -> Result<ResidueReport> {
    let s = e.len();
    let size = index_set_j(s, m).len();
    let normalized = residue_matrix(e, m, true)?;
    let raw = residue_matrix(e, m, false)?;
    let scale = if s == 0 { BigRational::one() } else { num_traits::pow(int(e[s - 1] as i64), m) };
    let is_scaled_identity = |mat: &[Vec<BigRational>], c: &BigRational| {
        mat.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, x)| *x == if i == j { c.clone() } else { BigRational::zero() })
        })
    };
    let identity = is_scaled_identity(&normalized, &BigRational::one());
    let raw_scale_ok = is_scaled_identity(&raw, &scale);
    Ok(ResidueReport {
        m,
        s,
        size,
        identity,
        raw_scale_ok,
        verdict: Verdict::from_check(identity && raw_scale_ok),
    })
}

/// The residue check with `m = n - r` and the instance's boundary degrees.
pub fn residue_matrix_check(inst: &Instance) -> Result<ResidueReport> {
    inst.require_geometric()?;
    residue_matrix_check_for(&inst.e(), inst.m() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(v: &[usize]) -> DlogWord {
        DlogWord(v.to_vec())
    }

    #[test]
    fn omega_examples() {
        let ones = [1, 1, 1];
        let om = omega_form(&ones, &[1, 2, 3]).unwrap();
        assert_eq!(om.degree(), 2);
        assert_eq!(om.coeff(&w(&[2, 3])), int(1));
        assert_eq!(om.coeff(&w(&[1, 3])), int(-1));
        assert_eq!(om.coeff(&w(&[1, 2])), int(1));
        let om = omega_form(&[1, 1], &[1, 2]).unwrap();
        assert_eq!(om.coeff(&w(&[2])), int(1));
        assert_eq!(om.coeff(&w(&[1])), int(-1));
        let om = omega_form(&[5], &[1]).unwrap();
        assert_eq!((om.degree(), om.coeff(&w(&[]))), (0, int(5)));
    }

    #[test]
    fn bad_index_lists() {
        assert!(matches!(omega_form(&[1, 1], &[1, 1]), Err(Error::BadIndexList(_))));
        assert!(matches!(omega_form(&[1, 1], &[3]), Err(Error::BadIndexList(_))));
        assert!(matches!(omega_form(&[1, 1], &[]), Err(Error::BadIndexList(_))));
        assert!(DlogWord::new(vec![2, 1], 3).is_err());
        assert!(DlogWord::new(vec![1, 3], 3).is_ok());
    }

    #[test]
    fn residue_examples() {
        let tau = w(&[1, 2]);
        assert_eq!(residue(&tau, &DlogElement::word(tau.clone())).unwrap(), int(1));
        assert_eq!(residue(&tau, &DlogElement::word(w(&[1, 3]))).unwrap(), int(0));
        assert!(matches!(
            residue(&tau, &DlogElement::word(w(&[1]))),
            Err(Error::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn wedge_space_dims() {
        assert_eq!(wedge_space_dim(3, 1), 2);
        assert_eq!(wedge_space_dim(1, 0), 1);
        assert_eq!(wedge_space_dim(2, 2), 0);
        assert_eq!(omega_span_rank(&[1, 2, 3], 1).unwrap(), 2);
    }

    #[test]
    fn three_lines_residues() {
        let r = residue_matrix_check_for(&[1, 1, 1], 1).unwrap();
        assert_eq!(r.size, 2);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = residue_matrix_check_for(&[2], 1).unwrap();
        assert_eq!((r.size, r.verdict), (0, Verdict::Pass));
    }

    #[test]
    fn literal_normalization_differs_outside_degree_two() {
        // omega(j, s) = -dg_j/g_j, so the sign matters in degree one.
        let e = [1, 1, 2];
        let lhs = wedge_of_dlog_g(&e, &[1]).unwrap();
        let om = omega_form(&e, &[1, 3]).unwrap();
        assert_eq!(lhs, om.scale(&int(-1)));
        let lhs = wedge_of_dlog_g(&e, &[1, 2]).unwrap();
        let om = omega_form(&e, &[1, 2, 3]).unwrap().scale(&int(2));
        assert_eq!(lhs, om);
    }

    proptest! {
        #[test]
        fn span_rank_matches_binomial(e in proptest::collection::vec(1u32..5, 1..6), q in 0usize..5) {
            let s = e.len();
            prop_assume!(q < s);
            prop_assert_eq!(omega_span_rank(&e, q).unwrap(), wedge_space_dim(s, q));
        }

        #[test]
        fn omega_is_antisymmetric(e in proptest::collection::vec(1u32..5, 3..6), pick in 0usize..1000) {
            let s = e.len();
            let a = 1 + pick % s;
            let b = 1 + (pick / 7) % s;
            let c = 1 + (pick / 49) % s;
            prop_assume!(a != b && b != c && a != c);
            let base = omega_form(&e, &[a, b, c]).unwrap();
            let swapped = omega_form(&e, &[b, a, c]).unwrap();
            let rotated = omega_form(&e, &[b, c, a]).unwrap();
            prop_assert_eq!(swapped, base.scale(&int(-1)));
            prop_assert_eq!(rotated, base);
        }

        #[test]
        fn dlog_g_identity(e in proptest::collection::vec(1u32..6, 2..7), mask in 1u32..64) {
            let s = e.len();
            let js: Vec<usize> = (1..s).filter(|j| mask & (1 << (j - 1)) != 0).collect();
            prop_assume!(!js.is_empty());
            prop_assert!(dlog_g_identity_holds(&e, &js).unwrap());
        }

        #[test]
        fn residue_matrix_is_identity(m in 1usize..4, extra in 1usize..4, e in proptest::collection::vec(1u32..6, 6)) {
            let s = (m + extra).min(6);
            let r = residue_matrix_check_for(&e[..s], m).unwrap();
            prop_assert_eq!(r.size, binomial(s - 1, m));
            prop_assert_eq!(r.verdict, Verdict::Pass);
        }
    }
}
