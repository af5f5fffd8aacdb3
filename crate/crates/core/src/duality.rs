//! The multiplication pairings into the top piece and the map `eta`.
//!
//! For `0 <= p <= n - r` the pairing `h_p(l)` is
//!
//! ```text
//! B_p(d-n-1+l) x B_{n-r-p}(d+e-n-1-l) -> B_{n-r}(2(d-n-1)+e) -> k
//! ```
//!
//! (multiplication followed by the trace). It is an isomorphism in the
//! cases listed by [`duality_condition`]. Outside `[0, n - r]` it is the
//! zero map.

use serde::{Deserialize, Serialize};

use crate::bigraded::BiDegree;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::instance::Instance;
use crate::jacring::JacobianRing;
use crate::linalg::{column_echelon, SparseLinearMap};
use crate::modular::RingTask;
use crate::poly::binomial;
use crate::verdict::Verdict;

/// Which guarantee applies to the pairing `h_p(l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualityCondition {
    /// `s >= 1`, `p < n - r` and `l < e_max`.
    IsoBelowTop,
    /// `s >= 1`, `0 <= l <= e_max` and `r + s <= n`.
    IsoFewComponents,
    /// `s = l = 0`, and either `n - r >= 1` or `n - r = p = 0`.
    IsoNoBoundary,
    /// `p = n - r`, `s >= 1` and `l < e_max`: injective on the left factor.
    InjectiveOnly,
    NoGuarantee,
}

impl DualityCondition {
    pub fn is_iso(self) -> bool {
        matches!(
            self,
            Self::IsoBelowTop | Self::IsoFewComponents | Self::IsoNoBoundary
        )
    }
}

pub fn duality_condition(inst: &Instance, p: i64, l: i64) -> DualityCondition {
    let m = inst.m();
    let (r, s, n) = (inst.r() as i64, inst.s() as i64, inst.n() as i64);
    let e_max = inst.e_max();
    if p < 0 || p > m {
        return DualityCondition::NoGuarantee;
    }
    if s >= 1 && p < m && l < e_max {
        DualityCondition::IsoBelowTop
    } else if s >= 1 && 0 <= l && l <= e_max && r + s <= n {
        DualityCondition::IsoFewComponents
    } else if s == 0 && l == 0 && (m >= 1 || p == 0) {
        DualityCondition::IsoNoBoundary
    } else if s >= 1 && p == m && l < e_max {
        DualityCondition::InjectiveOnly
    } else {
        DualityCondition::NoGuarantee
    }
}

/// Left and right bidegrees of `h_p(l)`.
pub fn pairing_bidegrees(inst: &Instance, p: i64, l: i64) -> (BiDegree, BiDegree) {
    let n = inst.n() as i64;
    let (d, e) = (inst.d_total(), inst.e_total());
    (
        BiDegree::new(p, d - n - 1 + l),
        BiDegree::new(inst.m() - p, d + e - n - 1 - l),
    )
}

/// The matrix `tau(x_i y_j)` over the representative bases.
#[derive(Debug, Clone)]
pub struct PairingMatrix<F: Field> {
    pub p: i64,
    pub l: i64,
    pub left: BiDegree,
    pub right: BiDegree,
    /// Rows indexed by the left basis, columns by the right basis.
    pub matrix: SparseLinearMap<F>,
}

impl<F: Field> PairingMatrix<F> {
    pub fn left_dim(&self) -> usize {
        self.matrix.rows()
    }
    pub fn right_dim(&self) -> usize {
        self.matrix.cols()
    }
    pub fn rank(&self, budget: usize) -> Result<usize> {
        Ok(column_echelon(&self.matrix, budget)?.rank())
    }
}

pub fn pairing_matrix<F: Field>(ring: &JacobianRing<F>, p: i64, l: i64) -> Result<PairingMatrix<F>> {
    let inst = ring.instance();
    let trace = ring.trace()?;
    let (left, right) = pairing_bidegrees(inst, p, l);
    let pl = ring.quotient_piece(left)?;
    let pr = ring.quotient_piece(right)?;
    let f = ring.field();
    let mut columns = Vec::with_capacity(pr.dim());
    if (0..=inst.m()).contains(&p) {
        for j in 0..pr.dim() {
            let y = pr.representative(j);
            let mut col = Vec::new();
            for i in 0..pl.dim() {
                let v = trace
                    .of_term(&pl.representative(i).mul(y))
                    .expect("product lies in the top piece");
                if !f.is_zero(&v) {
                    col.push((i, v));
                }
            }
            columns.push(col);
        }
    } else {
        columns.resize(pr.dim(), Vec::new());
    }
    Ok(PairingMatrix {
        p,
        l,
        left,
        right,
        matrix: SparseLinearMap::from_column_terms(f.clone(), pl.dim(), columns)?
            .with_tags(format!("B{right}"), format!("B{left}*")),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityReport {
    pub p: i64,
    pub l: i64,
    pub left_dim: usize,
    pub right_dim: usize,
    pub rank: usize,
    pub condition: DualityCondition,
    pub verdict: Verdict,
}

pub fn duality_check<F: Field>(ring: &JacobianRing<F>, p: i64, l: i64) -> Result<DualityReport> {
    let pm = pairing_matrix(ring, p, l)?;
    let rank = pm.rank(ring.budget())?;
    let (left_dim, right_dim) = (pm.left_dim(), pm.right_dim());
    let condition = duality_condition(ring.instance(), p, l);
    let verdict = if condition.is_iso() {
        Verdict::from_check(rank == left_dim && rank == right_dim)
    } else if condition == DualityCondition::InjectiveOnly {
        Verdict::from_check(rank == left_dim)
    } else {
        Verdict::Observed
    };
    Ok(DualityReport {
        p,
        l,
        left_dim,
        right_dim,
        rank,
        condition,
        verdict,
    })
}

/// The `(p, l)` grid swept by default: `0 <= p <= n - r` and
/// `-1 <= l <= e + 1`.
pub fn duality_grid(inst: &Instance) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for p in 0..=inst.m() {
        for l in -1..=inst.e_total() + 1 {
            out.push((p, l));
        }
    }
    out
}

/// The map `eta: B_0(d+e-n-1) -> B_{n-r}(d-n-1)^*` induced by the pairing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaReport {
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    /// `C(s - 1, n - r)`, the number of independent wedge classes.
    pub expected_kernel: usize,
    pub surjective: bool,
    pub verdict: Verdict,
}

pub fn eta_kernel<F: Field>(ring: &JacobianRing<F>) -> Result<EtaReport> {
    let inst = ring.instance();
    if inst.m() < 1 {
        return Err(Error::InvalidInstance("eta needs n - r >= 1".into()));
    }
    let pm = pairing_matrix(ring, 0, inst.e_total())?;
    let rank = pm.rank(ring.budget())?;
    let expected_kernel = match inst.s() {
        0 => 0,
        s => binomial(s - 1, inst.m() as usize),
    };
    let kernel_dim = pm.left_dim() - rank;
    let surjective = rank == pm.right_dim();
    Ok(EtaReport {
        source_dim: pm.left_dim(),
        target_dim: pm.right_dim(),
        rank,
        kernel_dim,
        expected_kernel,
        surjective,
        verdict: Verdict::from_check(surjective && kernel_dim == expected_kernel),
    })
}

pub struct DualityTask {
    pub p: i64,
    pub l: i64,
}

impl RingTask for DualityTask {
    type Output = DualityReport;
    fn run<F: Field>(&self, ring: &JacobianRing<F>) -> Result<DualityReport> {
        duality_check(ring, self.p, self.l)
    }
}

pub struct EtaTask;

impl RingTask for EtaTask {
    type Output = EtaReport;
    fn run<F: Field>(&self, ring: &JacobianRing<F>) -> Result<EtaReport> {
        eta_kernel(ring)
    }
}
