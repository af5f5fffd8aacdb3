//! Koszul complexes of subspaces `V` of `B_1(0)` and the multiplication
//! kernels built from them.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bigraded::BiDegree;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::instance::Instance;
use crate::jacring::JacobianRing;
use crate::linalg::{column_echelon, kernel_basis_with_budget, sparse_rank, SparseLinearMap, SparseVec};
use crate::modular::RingTask;
use crate::poly::binomial;
use crate::verdict::Verdict;

const V_BIDEGREE: BiDegree = BiDegree::new(1, 0);

/// A subspace of `B_1(0)`, given by a basis over the representative
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<F: Field> {
    ambient_dim: usize,
    basis: Vec<Vec<F::Elem>>,
}

/// How to choose `V`. The same description yields the same subspace over
/// every field the instance is read in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubspaceSpec {
    Full,
    /// Kernel of `codim` functionals with integer coefficients in `[-10, 10]`
    /// drawn from `seed`.
    RandomCodim { codim: usize, seed: u64 },
}

impl SubspaceSpec {
    pub fn codim(&self) -> usize {
        match self {
            SubspaceSpec::Full => 0,
            SubspaceSpec::RandomCodim { codim, .. } => *codim,
        }
    }
}

impl<F: Field> Subspace<F> {
    pub fn full(field: &F, ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![field.zero(); ambient_dim];
                v[i] = field.one();
                v
            })
            .collect();
        Self { ambient_dim, basis }
    }

    /// Checks lengths and linear independence.
    pub fn from_vectors(field: &F, ambient_dim: usize, vectors: Vec<Vec<F::Elem>>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::BadSubspace(format!(
                "vector of length {} in a space of dimension {ambient_dim}",
                v.len()
            )));
        }
        let m = SparseLinearMap::from_dense_columns(field.clone(), ambient_dim, &vectors)?;
        if column_echelon(&m, usize::MAX)?.rank() != vectors.len() {
            return Err(Error::BadSubspace("vectors are linearly dependent".into()));
        }
        Ok(Self {
            ambient_dim,
            basis: vectors,
        })
    }

    pub fn random_codim(field: &F, ambient_dim: usize, codim: usize, seed: u64) -> Result<Self> {
        if codim > ambient_dim {
            return Err(Error::BadSubspace(format!(
                "codimension {codim} in a space of dimension {ambient_dim}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // The functionals are the rows of a codim x ambient matrix; its
        // kernel is V.
        let mut columns = vec![Vec::new(); ambient_dim];
        for i in 0..codim {
            for col in columns.iter_mut() {
                let c: i64 = rng.gen_range(-10..=10);
                if c != 0 {
                    let x = field.from_i64(c);
                    if !field.is_zero(&x) {
                        col.push((i, x));
                    }
                }
            }
        }
        let m = SparseLinearMap::from_column_terms(field.clone(), codim, columns)?;
        let basis = kernel_basis_with_budget(&m, usize::MAX)?;
        if basis.len() != ambient_dim - codim {
            return Err(Error::BadSubspace(format!(
                "random functionals are dependent (seed {seed})"
            )));
        }
        Ok(Self { ambient_dim, basis })
    }

    pub fn from_spec(field: &F, ambient_dim: usize, spec: SubspaceSpec) -> Result<Self> {
        match spec {
            SubspaceSpec::Full => Ok(Self::full(field, ambient_dim)),
            SubspaceSpec::RandomCodim { codim, seed } => Self::random_codim(field, ambient_dim, codim, seed),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
    pub fn codim(&self) -> usize {
        self.ambient_dim - self.basis.len()
    }
    pub fn basis(&self) -> &[Vec<F::Elem>] {
        &self.basis
    }
}

/// Which sufficient condition for exactness applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactnessCondition {
    /// `q = 0` and `delta_min p + l >= c`.
    Surjective,
    /// `q = 1`, `delta_min p + l >= 1 + c` and `delta_min (p+1) + l >= d_max + c`.
    FirstSyzygy,
    /// `delta_min (r+p) + l >= d + q + c`, `d - n - 1 <= l < d + e_max - n - 1`,
    /// and `r + s <= n + 2` or `p <= n - r - floor(q/2)`.
    TwistWindow,
    NoGuarantee,
}

impl ExactnessCondition {
    pub fn holds(self) -> bool {
        self != ExactnessCondition::NoGuarantee
    }
}

/// Requires `s >= 1`; for `s = 0` no guarantee is claimed.
pub fn exactness_condition(inst: &Instance, p: i64, q: i64, l: i64, c: i64) -> ExactnessCondition {
    let (n, r, s) = (inst.n() as i64, inst.r() as i64, inst.s() as i64);
    if s < 1 || p < 0 || q < 0 {
        return ExactnessCondition::NoGuarantee;
    }
    let dm = inst.delta_min();
    let d = inst.d_total();
    if q == 0 && dm * p + l >= c {
        return ExactnessCondition::Surjective;
    }
    if q == 1 && dm * p + l >= 1 + c && dm * (p + 1) + l >= inst.d_max() + c {
        return ExactnessCondition::FirstSyzygy;
    }
    let window = d - n - 1 <= l && l < d + inst.e_max() - n - 1;
    if dm * (r + p) + l >= d + q + c && window && (r + s <= n + 2 || p <= n - r - q / 2) {
        return ExactnessCondition::TwistWindow;
    }
    ExactnessCondition::NoGuarantee
}

/// `B_p(l) (x) wedge^{q+1} V -> B_{p+1}(l) (x) wedge^q V -> B_{p+2}(l) (x) wedge^{q-1} V`.
///
/// Tensor coordinates are ordered by wedge monomial (lexicographic index
/// subsets) first, then by the representative basis of the `B` factor.
#[derive(Debug, Clone)]
pub struct KoszulComplex<F: Field> {
    pub p: i64,
    pub q: i64,
    pub l: i64,
    pub dims: [usize; 3],
    pub first: SparseLinearMap<F>,
    pub second: SparseLinearMap<F>,
}

fn subsets(n: usize, k: i64) -> Vec<Vec<usize>> {
    if k < 0 || k as usize > n {
        return Vec::new();
    }
    let k = k as usize;
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The Koszul differential `B_a(l) (x) wedge^k V -> B_{a+1}(l) (x) wedge^{k-1} V`.
fn differential<F: Field>(
    ring: &JacobianRing<F>,
    v: &Subspace<F>,
    a: i64,
    l: i64,
    k: i64,
) -> Result<(SparseLinearMap<F>, usize, usize)> {
    let f = ring.field();
    let src_bd = BiDegree::new(a, l);
    let src_dim = ring.dim_b(src_bd)?;
    let dst_dim = ring.dim_b(src_bd + V_BIDEGREE)?;
    let words = subsets(v.dim(), k);
    let lower = subsets(v.dim(), k - 1);
    let lower_index: HashMap<&[usize], usize> =
        lower.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let rows = lower.len() * dst_dim;
    let cols = words.len() * src_dim;
    crate::linalg::check_budget(rows, cols, ring.budget())?;
    let mults = if words.is_empty() || lower.is_empty() {
        Vec::new()
    } else {
        v.basis()
            .iter()
            .map(|x| ring.multiplication_map(V_BIDEGREE, x, src_bd))
            .collect::<Result<Vec<_>>>()?
    };
    let mut columns: Vec<SparseVec<F::Elem>> = Vec::with_capacity(cols);
    for w in &words {
        let faces: Vec<(usize, bool)> = if lower.is_empty() {
            Vec::new()
        } else {
            (0..w.len())
                .map(|alpha| {
                    let mut rest = w.clone();
                    rest.remove(alpha);
                    (lower_index[rest.as_slice()], alpha % 2 == 1)
                })
                .collect()
        };
        for b in 0..src_dim {
            let mut col = Vec::new();
            for (alpha, &(face, negative)) in faces.iter().enumerate() {
                for (row, x) in mults[w[alpha]].column(b) {
                    let x = if negative { f.neg(x) } else { x.clone() };
                    col.push((face * dst_dim + row, x));
                }
            }
            col.sort_by_key(|(i, _)| *i);
            columns.push(col);
        }
    }
    let map = SparseLinearMap::from_column_terms(f.clone(), rows, columns)?
        .with_tags(format!("B{src_bd}xL{k}"), format!("B{}xL{}", src_bd + V_BIDEGREE, k - 1));
    Ok((map, cols, rows))
}

pub fn koszul_complex<F: Field>(
    ring: &JacobianRing<F>,
    v: &Subspace<F>,
    p: i64,
    q: i64,
    l: i64,
) -> Result<KoszulComplex<F>> {
    if q < 0 {
        return Err(Error::BadSubspace(format!("wedge degree {q} is negative")));
    }
    let ambient = ring.dim_b(V_BIDEGREE)?;
    if v.ambient_dim() != ambient {
        return Err(Error::BadSubspace(format!(
            "subspace of a {}-dimensional space, but B(1, 0) has dimension {ambient}",
            v.ambient_dim()
        )));
    }
    let (first, c0, c1) = differential(ring, v, p, l, q + 1)?;
    let (second, c1b, c2) = differential(ring, v, p + 1, l, q)?;
    debug_assert_eq!(c1, c1b);
    let composite = second.compose(&first)?;
    if !composite.is_zero() {
        return Err(Error::KoszulIdentity(format!("p={p}, q={q}, l={l}")));
    }
    Ok(KoszulComplex {
        p,
        q,
        l,
        dims: [c0, c1, c2],
        first,
        second,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KoszulReport {
    pub p: i64,
    pub q: i64,
    pub l: i64,
    pub codim: usize,
    pub dims: [usize; 3],
    pub rank_first: usize,
    pub rank_second: usize,
    pub middle_homology: usize,
    pub condition: ExactnessCondition,
    pub verdict: Verdict,
}

pub fn koszul_exactness_check<F: Field>(
    ring: &JacobianRing<F>,
    v: &Subspace<F>,
    p: i64,
    q: i64,
    l: i64,
) -> Result<KoszulReport> {
    let cx = koszul_complex(ring, v, p, q, l)?;
    let rank_first = sparse_rank(&cx.first, ring.budget())?;
    let rank_second = sparse_rank(&cx.second, ring.budget())?;
    let middle_homology = cx.dims[1] - rank_second - rank_first;
    let condition = exactness_condition(ring.instance(), p, q, l, v.codim() as i64);
    let verdict = if condition.holds() {
        Verdict::from_check(middle_homology == 0)
    } else {
        Verdict::Observed
    };
    Ok(KoszulReport {
        p,
        q,
        l,
        codim: v.codim(),
        dims: cx.dims,
        rank_first,
        rank_second,
        middle_homology,
        condition,
        verdict,
    })
}

/// The default sweep: `0 <= p <= n - r`, `0 <= q <= 2`, and twists from
/// `0` to `d + e_max - n - 1` (at least `1`).
pub fn koszul_grid(inst: &Instance) -> Vec<(i64, i64, i64)> {
    let top = (inst.d_total() + inst.e_max() - inst.n() as i64 - 1).max(1);
    let mut out = Vec::new();
    for p in 0..=inst.m() {
        for q in 0..=2 {
            for l in 0..=top {
                out.push((p, q, l));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicationKernelReport {
    pub q: i64,
    pub p: i64,
    pub codim: usize,
    pub source_dim: usize,
    pub kernel_dim: usize,
    pub expected: Option<usize>,
    pub verdict: Verdict,
}

/// Kernel of `b -> (v -> v b)` from `B_q(d+e-n-1)` to `Hom(V, B_{q+1}(d+e-n-1))`.
///
/// With `p = n - r - q` and `c = codim V`, the kernel is expected to be
/// `C(s-1, n-r)` for `q = 0` when `delta_min (n-r-1) + d >= n + 1 + c`, and
/// zero for `1 <= q <= n-r-1` when `delta_min (p-1) + d >= n + 1 + c`.
pub fn multiplication_kernel<F: Field>(
    ring: &JacobianRing<F>,
    v: &Subspace<F>,
    q: i64,
) -> Result<MultiplicationKernelReport> {
    let inst = ring.instance();
    let m = inst.m();
    if !(0..=m).contains(&q) {
        return Err(Error::InvalidInstance(format!("need 0 <= q <= {m}, got {q}")));
    }
    let ambient = ring.dim_b(V_BIDEGREE)?;
    if v.ambient_dim() != ambient {
        return Err(Error::BadSubspace(format!(
            "subspace of a {}-dimensional space, but B(1, 0) has dimension {ambient}",
            v.ambient_dim()
        )));
    }
    let t = inst.hodge_twist();
    let source = BiDegree::new(q, t);
    let source_dim = ring.dim_b(source)?;
    let blocks = v
        .basis()
        .iter()
        .map(|x| ring.multiplication_map(V_BIDEGREE, x, source))
        .collect::<Result<Vec<_>>>()?;
    let stacked = SparseLinearMap::vstack(ring.field().clone(), source_dim, &blocks)?;
    let rank = sparse_rank(&stacked, ring.budget())?;
    let kernel_dim = source_dim - rank;
    let p = m - q;
    let c = v.codim() as i64;
    let (n, d, dm) = (inst.n() as i64, inst.d_total(), inst.delta_min());
    let expected = if q == 0 && dm * (m - 1) + d >= n + 1 + c {
        Some(match inst.s() {
            0 => 0,
            s => binomial(s - 1, m as usize),
        })
    } else if 1 <= q && q <= m - 1 && dm * (p - 1) + d >= n + 1 + c {
        Some(0)
    } else {
        None
    };
    let verdict = match expected {
        Some(k) => Verdict::from_check(k == kernel_dim),
        None => Verdict::Observed,
    };
    Ok(MultiplicationKernelReport {
        q,
        p,
        codim: v.codim(),
        source_dim,
        kernel_dim,
        expected,
        verdict,
    })
}

pub struct KoszulTask {
    pub v: SubspaceSpec,
    pub p: i64,
    pub q: i64,
    pub l: i64,
}

impl RingTask for KoszulTask {
    type Output = KoszulReport;
    fn run<F: Field>(&self, ring: &JacobianRing<F>) -> Result<KoszulReport> {
        let v = Subspace::from_spec(ring.field(), ring.dim_b(V_BIDEGREE)?, self.v)?;
        koszul_exactness_check(ring, &v, self.p, self.q, self.l)
    }
}

pub struct MultiplicationKernelTask {
    pub v: SubspaceSpec,
    pub q: i64,
}

impl RingTask for MultiplicationKernelTask {
    type Output = MultiplicationKernelReport;
    fn run<F: Field>(&self, ring: &JacobianRing<F>) -> Result<MultiplicationKernelReport> {
        let v = Subspace::from_spec(ring.field(), ring.dim_b(V_BIDEGREE)?, self.v)?;
        multiplication_kernel(ring, &v, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldSpec, PrimeField, RationalField};
    use crate::instance::reference;

    #[test]
    fn subsets_in_lex_order() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
        assert!(subsets(2, -1).is_empty());
    }

    #[test]
    fn subspace_validation() {
        let f = RationalField;
        let one = f.one();
        let v = vec![vec![one.clone(), f.zero()], vec![one.clone(), f.zero()]];
        assert!(matches!(Subspace::from_vectors(&f, 2, v), Err(Error::BadSubspace(_))));
        assert!(Subspace::<RationalField>::from_vectors(&f, 2, vec![vec![one]]).is_err());
        let v = Subspace::random_codim(&f, 5, 2, 3).unwrap();
        assert_eq!((v.dim(), v.codim()), (3, 2));
        assert!(Subspace::random_codim(&f, 2, 3, 0).is_err());
    }

    #[test]
    fn elliptic_plus_line_surjectivity() {
        let ring = JacobianRing::new(&reference::elliptic_plus_line(), RationalField).unwrap();
        let v = Subspace::full(&RationalField, ring.dim_b(V_BIDEGREE).unwrap());
        let r = koszul_exactness_check(&ring, &v, 0, 0, 1).unwrap();
        assert_eq!(r.condition, ExactnessCondition::Surjective);
        assert_eq!(r.middle_homology, 0);
        assert_eq!(r.verdict, Verdict::Pass);
        let v1 = Subspace::random_codim(&RationalField, v.ambient_dim(), 1, 7).unwrap();
        let r = koszul_exactness_check(&ring, &v1, 1, 0, 1).unwrap();
        assert_eq!(r.condition, ExactnessCondition::Surjective);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn zero_subspace_gives_zero_differentials() {
        let ring = JacobianRing::new(&reference::elliptic_plus_line(), RationalField).unwrap();
        let v = Subspace::<RationalField>::from_vectors(&RationalField, 3, Vec::new()).unwrap();
        let cx = koszul_complex(&ring, &v, 0, 0, 1).unwrap();
        assert!(cx.first.is_zero() && cx.second.is_zero());
    }

    #[test]
    fn complexes_compose_to_zero() {
        let inst = Instance::random(2, &[3], &[1, 1, 1], FieldSpec::Rationals, 11).unwrap();
        let ring = JacobianRing::new(&inst, PrimeField::new(1_000_003).unwrap()).unwrap();
        let v = Subspace::full(ring.field(), ring.dim_b(V_BIDEGREE).unwrap());
        for (p, q, l) in [(0, 1, 0), (0, 2, 1), (1, 1, 0), (0, 0, 2)] {
            let cx = koszul_complex(&ring, &v, p, q, l).unwrap();
            assert!(cx.second.compose(&cx.first).unwrap().is_zero());
        }
    }

    #[test]
    fn kernel_counts_on_three_lines() {
        let ring = JacobianRing::new(&reference::elliptic_plus_three_lines(), RationalField).unwrap();
        let v = Subspace::full(&RationalField, ring.dim_b(V_BIDEGREE).unwrap());
        let r = multiplication_kernel(&ring, &v, 0).unwrap();
        assert_eq!(r.expected, Some(2));
        assert_eq!(r.kernel_dim, 2);
        let ring = JacobianRing::new(&reference::elliptic_plus_line(), RationalField).unwrap();
        let v = Subspace::full(&RationalField, ring.dim_b(V_BIDEGREE).unwrap());
        let r = multiplication_kernel(&ring, &v, 0).unwrap();
        assert_eq!((r.expected, r.kernel_dim), (Some(0), 0));
    }

    #[test]
    fn conditions_follow_the_inequalities() {
        let el = reference::elliptic_plus_line();
        assert_eq!(exactness_condition(&el, 0, 0, 1, 0), ExactnessCondition::Surjective);
        assert_eq!(exactness_condition(&el, 0, 0, 0, 1), ExactnessCondition::NoGuarantee);
        assert_eq!(exactness_condition(&reference::fermat_quartic(), 1, 0, 3, 0), ExactnessCondition::NoGuarantee);
    }
}
