//! Independent dimension oracles for the log Hodge pieces `B_q(d+e-n-1)`.
//!
//! The classical Jacobian ring `R = P / (dF/dX_0, .., dF/dX_n)` of a
//! hypersurface is computed here by its own dense elimination modulo a
//! fixed prime, sharing no code with the bigraded construction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bigraded::BiDegree;
use crate::error::Result;
use crate::field::{Field, FieldSpec};
use crate::instance::Instance;
use crate::jacring::JacobianRing;
use crate::modular::RingTask;
use crate::poly::HomogPoly;
use crate::verdict::Verdict;

/// The Mersenne prime `2^61 - 1`, used by the classical elimination of
/// rational instances.
pub const ORACLE_PRIME: u64 = (1 << 61) - 1;

/// `dim R_k` for a smooth degree-`d` hypersurface in `P^n`: the coefficient
/// of `t^k` in `(1 + t + ... + t^{d-2})^{n+1}`.
pub fn jacobian_hilbert_coefficient(n: usize, d: u32, k: i64) -> usize {
    if k < 0 || d < 2 {
        return usize::from(k == 0 && d >= 2);
    }
    let width = d as usize - 1;
    let mut series = vec![1usize];
    for _ in 0..=n {
        let mut next = vec![0usize; series.len() + width - 1];
        for (i, c) in series.iter().enumerate() {
            for j in 0..width {
                next[i + j] += c;
            }
        }
        series = next;
    }
    series.get(k as usize).copied().unwrap_or(0)
}

/// `h^{n-1-q, q}_prim` of a smooth degree-`d` hypersurface in `P^n`, which
/// equals `dim R_{(q+1)d-n-1}`.
pub fn griffiths_hypersurface(n: usize, d: u32, q: usize) -> usize {
    jacobian_hilbert_coefficient(n, d, (q as i64 + 1) * d as i64 - n as i64 - 1)
}

fn exponent_vectors(nvars: usize, degree: usize) -> Vec<Vec<u32>> {
    fn go(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for x in (0..=left).rev() {
            cur[pos] = x;
            go(pos + 1, left - x, cur, out);
        }
    }
    let mut out = Vec::new();
    go(0, degree as u32, &mut vec![0; nvars], &mut out);
    out
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

/// `dim R_k` of `P / (dF/dX_k)` by direct elimination modulo `prime`.
///
/// Columns are the products `X^a dF/dX_j` with `deg a = k - d + 1`;
/// the answer is `dim P^k` minus their rank.
pub fn classical_jacobian_dim(f: &HomogPoly, k: i64, prime: u64) -> Result<usize> {
    let nvars = f.nvars();
    if k < 0 {
        return Ok(0);
    }
    let rows = exponent_vectors(nvars, k as usize);
    let index: HashMap<&[u32], usize> = rows.iter().enumerate().map(|(i, r)| (r.as_slice(), i)).collect();
    let shift = k - f.degree() as i64 + 1;
    if shift < 0 {
        return Ok(rows.len());
    }
    let field = crate::field::PrimeField::new(prime)?;
    let partials: Vec<Vec<(Vec<u32>, u64)>> = (0..nvars)
        .map(|j| {
            f.partial_derivative(j)
                .coefficients_in(&field)
                .map(|t| t.into_iter().map(|(m, c)| (m.exponents().to_vec(), c)).collect())
        })
        .collect::<Result<_>>()?;
    // Pivot rows: row index -> reduced column stored densely.
    let mut pivots: Vec<Option<Vec<u64>>> = vec![None; rows.len()];
    let mut rank = 0;
    for a in exponent_vectors(nvars, shift as usize) {
        for dj in &partials {
            let mut col = vec![0u64; rows.len()];
            for (m, c) in dj {
                let e: Vec<u32> = m.iter().zip(&a).map(|(x, y)| x + y).collect();
                col[index[e.as_slice()]] = *c;
            }
            for i in 0..rows.len() {
                if col[i] == 0 {
                    continue;
                }
                match &pivots[i] {
                    Some(p) => {
                        let factor = col[i];
                        for (x, y) in col.iter_mut().zip(p).skip(i) {
                            if *y != 0 {
                                *x = (*x + prime - mulmod(factor, *y, prime)) % prime;
                            }
                        }
                    }
                    None => {
                        let inv = powmod(col[i], prime - 2, prime);
                        for x in col.iter_mut().skip(i) {
                            *x = mulmod(*x, inv, prime);
                        }
                        pivots[i] = Some(col);
                        rank += 1;
                        break;
                    }
                }
            }
            if rank == rows.len() {
                return Ok(0);
            }
        }
    }
    Ok(rows.len() - rank)
}

/// Genus and log Hodge numbers of a smooth plane curve of degree `d` minus
/// its `N = d (e_1 + ... + e_s)` intersection points with the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuncturedCurve {
    pub genus: usize,
    pub points: usize,
    /// `g + N - 1`.
    pub h10_log: usize,
    /// `g`.
    pub h01: usize,
}

impl PuncturedCurve {
    /// `2g + N - 1`, the first Betti number of the punctured curve.
    pub fn total(&self) -> usize {
        self.h10_log + self.h01
    }
}

pub fn punctured_curve_log_hodge(d: u32, e: &[u32]) -> PuncturedCurve {
    let d = d as usize;
    let genus = (d - 1) * (d - 2) / 2;
    let points = d * e.iter().map(|&x| x as usize).sum::<usize>();
    PuncturedCurve {
        genus,
        points,
        h10_log: (genus + points).saturating_sub(1),
        h01: genus,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleSource {
    Griffiths,
    PuncturedCurve,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HodgePrediction {
    pub q: i64,
    pub l: i64,
    pub bidegree: BiDegree,
    pub predicted_dim: usize,
    pub oracle_dim: Option<usize>,
    pub source: OracleSource,
    pub verdict: Verdict,
}

/// Dimensions `B_q(d+e-n-1+l)` for `0 <= q <= n - r`.
pub fn hodge_dims<F: Field>(ring: &JacobianRing<F>, l: i64) -> Result<Vec<usize>> {
    let inst = ring.instance();
    inst.require_geometric()?;
    (0..=inst.m())
        .map(|q| ring.dim_b(BiDegree::new(q, inst.hodge_twist() + l)))
        .collect()
}

/// Oracle values for the pieces `q = 0..=n-r` at twist `l`, where one applies.
pub fn hodge_oracle(inst: &Instance, l: i64) -> Result<(OracleSource, Vec<Option<usize>>)> {
    let m = inst.m().max(0) as usize;
    if l != 0 {
        return Ok((OracleSource::None, vec![None; m + 1]));
    }
    if inst.r() == 1 && inst.s() == 0 {
        let f = &inst.f()[0];
        let d = f.degree() as i64;
        let n = inst.n() as i64;
        let prime = match inst.field() {
            FieldSpec::PrimeField(p) => p,
            FieldSpec::Rationals => ORACLE_PRIME,
        };
        let dims = (0..=m as i64)
            .map(|q| classical_jacobian_dim(f, (q + 1) * d - n - 1, prime).map(Some))
            .collect::<Result<_>>()?;
        return Ok((OracleSource::Griffiths, dims));
    }
    if inst.n() == 2 && inst.r() == 1 && inst.s() >= 1 {
        let pc = punctured_curve_log_hodge(inst.d()[0], &inst.e());
        return Ok((OracleSource::PuncturedCurve, vec![Some(pc.h10_log), Some(pc.h01)]));
    }
    Ok((OracleSource::None, vec![None; m + 1]))
}

pub fn hodge_check_from_dims(inst: &Instance, l: i64, predicted: &[usize]) -> Result<Vec<HodgePrediction>> {
    let (source, oracle) = hodge_oracle(inst, l)?;
    Ok(predicted
        .iter()
        .zip(oracle)
        .enumerate()
        .map(|(q, (&predicted_dim, oracle_dim))| {
            let q = q as i64;
            HodgePrediction {
                q,
                l,
                bidegree: BiDegree::new(q, inst.hodge_twist() + l),
                predicted_dim,
                oracle_dim,
                source: if oracle_dim.is_some() { source } else { OracleSource::None },
                verdict: match oracle_dim {
                    Some(o) => Verdict::from_check(o == predicted_dim),
                    None => Verdict::Observed,
                },
            }
        })
        .collect())
}

pub fn hodge_check<F: Field>(ring: &JacobianRing<F>, l: i64) -> Result<Vec<HodgePrediction>> {
    let dims = hodge_dims(ring, l)?;
    hodge_check_from_dims(ring.instance(), l, &dims)
}

pub struct HodgeTask {
    pub l: i64,
}

impl RingTask for HodgeTask {
    type Output = Vec<usize>;
    fn run<F: Field>(&self, ring: &JacobianRing<F>) -> Result<Vec<usize>> {
        hodge_dims(ring, self.l)
    }
}
