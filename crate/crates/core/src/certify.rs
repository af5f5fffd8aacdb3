//! Certificates that the hypersurfaces of an instance meet transversally.
//!
//! For every set `T` of at most `n` of the forms, the ideal generated by the
//! forms in `T` and the maximal minors of their Jacobian matrix must contain
//! a whole graded piece `P^D`; then their common zero locus is smooth of the
//! expected codimension. For `|T| = n + 1` the forms alone must contain some
//! `P^D`, so they have no common zero. Each test is a rank computation
//! modulo a prime; full rank modulo a prime implies full rank over the
//! rationals, so a certificate obtained modulo `p` is valid.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec, PrimeField};
use crate::instance::Instance;
use crate::linalg::{column_echelon, SparseLinearMap};
use crate::poly::{monomial_basis, HomogPoly};

/// Prime used to certify rational instances.
pub const CERTIFY_PRIME: u64 = (1 << 61) - 1;

/// Prime used to look for singular points of rational instances.
pub const WITNESS_PRIME: u64 = 101;

/// Points examined by [`find_singular_witness`] per subset by default.
pub const DEFAULT_WITNESS_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transversality {
    Certified,
    Unknown,
    FailedWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetCheck {
    /// Labels such as `F1` or `G2`.
    pub subset: Vec<String>,
    pub degree_cap: usize,
    /// Smallest degree `D` at which the test succeeded.
    pub passed_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub subset: Vec<String>,
    pub prime: u64,
    pub point: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub verdict: Transversality,
    pub checked_subsets: Vec<SubsetCheck>,
    pub degree_cap_used: usize,
    pub prime: u64,
    pub witness: Option<Witness>,
}

fn forms(inst: &Instance) -> Vec<(String, &HomogPoly)> {
    let f = inst.f().iter().enumerate().map(|(i, p)| (format!("F{}", i + 1), p));
    let g = inst.g().iter().enumerate().map(|(j, p)| (format!("G{}", j + 1), p));
    f.chain(g).collect()
}

fn index_subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << n) {
        if (mask.count_ones() as usize) <= max {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Determinant of a square matrix of forms, by expansion along the first row.
fn determinant(rows: &[Vec<HomogPoly>]) -> Result<HomogPoly> {
    if rows.len() == 1 {
        return Ok(rows[0][0].clone());
    }
    let k = rows.len();
    let mut acc: Option<HomogPoly> = None;
    for j in 0..k {
        let minor: Vec<Vec<HomogPoly>> = rows[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let mut term = rows[0][j].multiply(&determinant(&minor)?);
        if j % 2 == 1 {
            term = term.scale(&BigRational::from_integer(BigInt::from(-1)));
        }
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.expect("nonempty matrix"))
}

/// The forms in `subset` and, unless `|subset| = n + 1`, the maximal minors
/// of their Jacobian matrix.
fn test_generators(inst: &Instance, subset: &[usize]) -> Result<Vec<HomogPoly>> {
    let all = forms(inst);
    let chosen: Vec<&HomogPoly> = subset.iter().map(|&i| all[i].1).collect();
    let mut gens: Vec<HomogPoly> = chosen.iter().map(|p| (*p).clone()).collect();
    let n = inst.n();
    let k = subset.len();
    if k <= n {
        let jac: Vec<Vec<HomogPoly>> = chosen
            .iter()
            .map(|p| (0..=n).map(|j| p.partial_derivative(j)).collect())
            .collect();
        for cols in index_subsets(n + 1, k).into_iter().filter(|c| c.len() == k) {
            let square: Vec<Vec<HomogPoly>> = jac
                .iter()
                .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
                .collect();
            let det = determinant(&square)?;
            if !det.is_zero() {
                gens.push(det);
            }
        }
    }
    Ok(gens)
}

/// Whether the ideal generated by `gens` contains all of `P^degree`.
fn contains_full_piece(field: &PrimeField, n: usize, gens: &[HomogPoly], degree: usize, budget: usize) -> Result<bool> {
    let rows = monomial_basis(n, degree as i64);
    let index: std::collections::HashMap<_, _> = rows.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let mut columns = Vec::new();
    for g in gens {
        let gdeg = g.degree() as usize;
        if gdeg > degree {
            continue;
        }
        let coeffs = g.coefficients_in(field)?;
        for a in monomial_basis(n, (degree - gdeg) as i64) {
            let mut col: Vec<(usize, u64)> = coeffs.iter().map(|(m, c)| (index[&m.mul(&a)], *c)).collect();
            col.sort_by_key(|(i, _)| *i);
            columns.push(col);
        }
    }
    let m = SparseLinearMap::from_column_terms(*field, rows.len(), columns)?;
    Ok(column_echelon(&m, budget)?.rank() == rows.len())
}

fn default_cap(n: usize, gens: &[HomogPoly]) -> usize {
    let total: usize = gens.iter().map(|g| g.degree() as usize).sum();
    total.saturating_sub(n).max(1)
}

fn certify_prime(inst: &Instance) -> u64 {
    match inst.field() {
        FieldSpec::PrimeField(p) => p,
        FieldSpec::Rationals => CERTIFY_PRIME,
    }
}

/// Certify transversality, iterating `D = 1, 2, ..` up to the cap for every
/// subset. `degree_cap = None` uses `sum(deg of generators) - n` per subset.
pub fn certify_transversality(inst: &Instance, degree_cap: Option<usize>, budget: usize) -> Result<TransversalityReport> {
    let n = inst.n();
    let prime = certify_prime(inst);
    let field = PrimeField::new(prime)?;
    let labels = forms(inst);
    let subsets = index_subsets(labels.len(), n + 1);
    let checked: Vec<SubsetCheck> = subsets
        .par_iter()
        .map(|subset| {
            let gens = test_generators(inst, subset)?;
            let cap = degree_cap.unwrap_or_else(|| default_cap(n, &gens));
            let mut passed_at = None;
            for degree in 1..=cap {
                if contains_full_piece(&field, n, &gens, degree, budget)? {
                    passed_at = Some(degree);
                    break;
                }
            }
            Ok(SubsetCheck {
                subset: subset.iter().map(|&i| labels[i].0.clone()).collect(),
                degree_cap: cap,
                passed_at,
            })
        })
        .collect::<Result<_>>()?;
    let degree_cap_used = checked.iter().map(|c| c.degree_cap).max().unwrap_or(0);
    if checked.iter().all(|c| c.passed_at.is_some()) {
        return Ok(TransversalityReport {
            verdict: Transversality::Certified,
            checked_subsets: checked,
            degree_cap_used,
            prime,
            witness: None,
        });
    }
    let wprime = match inst.field() {
        FieldSpec::PrimeField(p) => p,
        FieldSpec::Rationals => WITNESS_PRIME,
    };
    let witness = find_singular_witness(inst, wprime, DEFAULT_WITNESS_BUDGET)?;
    Ok(TransversalityReport {
        verdict: if witness.is_some() {
            Transversality::FailedWitness
        } else {
            Transversality::Unknown
        },
        checked_subsets: checked,
        degree_cap_used,
        prime,
        witness,
    })
}

fn projective_point_count(p: u64, n: usize) -> Option<u64> {
    let mut total: u64 = 0;
    let mut pow: u64 = 1;
    for _ in 0..=n {
        total = total.checked_add(pow)?;
        pow = pow.checked_mul(p)?;
    }
    Some(total)
}

/// The `idx`-th point of `P^n(F_p)`, normalized with leading coordinate one.
fn point_at(p: u64, n: usize, mut idx: u64) -> Vec<u64> {
    // Points with leading one in position k: p^{n-k} of them.
    let mut k = 0;
    loop {
        let block = p.pow((n - k) as u32);
        if idx < block {
            break;
        }
        idx -= block;
        k += 1;
    }
    let mut pt = vec![0u64; n + 1];
    pt[k] = 1;
    for c in pt.iter_mut().skip(k + 1).rev() {
        *c = idx % p;
        idx /= p;
    }
    pt
}

/// Search `P^n(F_p)` for a point where some subset `T` of the forms vanishes
/// and their Jacobian matrix drops rank (for `|T| <= n`), or where `n + 1`
/// forms vanish simultaneously. The whole space is scanned when it has at
/// most `budget` points, otherwise `budget` seeded random points are tried.
pub fn find_singular_witness(inst: &Instance, p: u64, budget: usize) -> Result<Option<Witness>> {
    let field = PrimeField::new(p)?;
    if let FieldSpec::PrimeField(q) = inst.field() {
        if q != p {
            return Err(Error::InvalidField(format!("instance over F_{q} examined modulo {p}")));
        }
    }
    let n = inst.n();
    let labels = forms(inst);
    let reduced: Vec<Vec<(Vec<u32>, u64)>> = labels
        .iter()
        .map(|(_, f)| {
            f.coefficients_in(&field)
                .map(|t| t.into_iter().map(|(m, c)| (m.exponents().to_vec(), c)).collect())
        })
        .collect::<Result<_>>()?;
    let partials: Vec<Vec<HomogPoly>> = labels
        .iter()
        .map(|(_, f)| (0..=n).map(|j| f.partial_derivative(j)).collect())
        .collect();
    let eval = |terms: &[(Vec<u32>, u64)], pt: &[u64]| -> u64 {
        let mut acc = 0u64;
        for (m, c) in terms {
            let mut x = *c;
            for (e, v) in m.iter().zip(pt) {
                x = field.mul(&x, &field.pow(*v, *e as u64));
            }
            acc = field.add(&acc, &x);
        }
        acc
    };
    let subsets = index_subsets(labels.len(), n + 1);
    let total = projective_point_count(p, n);
    let exhaustive = total.is_some_and(|t| t <= budget as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(p ^ 0x7769_746e);
    let count = if exhaustive { total.unwrap_or(0) } else { budget as u64 };
    for i in 0..count {
        let pt = if exhaustive {
            point_at(p, n, i)
        } else {
            let mut v: Vec<u64> = (0..=n).map(|_| rng.gen_range(0..p)).collect();
            if v.iter().all(|&x| x == 0) {
                v[0] = 1;
            }
            v
        };
        let vanishing: Vec<bool> = reduced.iter().map(|t| eval(t, &pt) == 0).collect();
        for subset in &subsets {
            if !subset.iter().all(|&i| vanishing[i]) {
                continue;
            }
            let singular = if subset.len() == n + 1 {
                true
            } else {
                let columns: Vec<Vec<u64>> = (0..=n)
                    .map(|j| {
                        subset
                            .iter()
                            .map(|&i| partials[i][j].evaluate(&field, &pt))
                            .collect::<Result<Vec<u64>>>()
                    })
                    .collect::<Result<_>>()?;
                let m = SparseLinearMap::from_dense_columns(field, subset.len(), &columns)?;
                column_echelon(&m, usize::MAX)?.rank() < subset.len()
            };
            if singular {
                return Ok(Some(Witness {
                    subset: subset.iter().map(|&i| labels[i].0.clone()).collect(),
                    prime: p,
                    point: pt,
                }));
            }
        }
    }
    Ok(None)
}

/// A certified random instance and the attempt that produced it.
#[derive(Debug, Clone)]
pub struct CertifiedInstance {
    pub instance: Instance,
    pub report: TransversalityReport,
    /// Seed of the accepted draw.
    pub seed: u64,
    pub attempts: usize,
}

/// Seed of the `k`-th draw; the first draw uses `seed` itself.
pub fn attempt_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Draw random instances until one is certified.
pub fn generate_certified(
    n: usize,
    d: &[u32],
    e: &[u32],
    field: FieldSpec,
    seed: u64,
    max_attempts: usize,
    budget: usize,
) -> Result<CertifiedInstance> {
    for k in 0..max_attempts {
        let s = attempt_seed(seed, k);
        let instance = Instance::random(n, d, e, field, s)?;
        instance.require_geometric()?;
        let report = certify_transversality(&instance, None, budget)?;
        if report.verdict == Transversality::Certified {
            return Ok(CertifiedInstance {
                instance,
                report,
                seed: s,
                attempts: k + 1,
            });
        }
    }
    Err(Error::GenerationBudgetExhausted {
        attempts: max_attempts,
    })
}

/// Shapes `(n, d, e)` of the randomized sweep pool.
pub const POOL_SHAPES: [(usize, &[u32], &[u32]); 7] = [
    (2, &[3], &[1]),
    (2, &[3], &[1, 1]),
    (2, &[3], &[1, 1, 1]),
    (3, &[4], &[1]),
    (3, &[4], &[1, 1]),
    (3, &[2, 2], &[1]),
    (2, &[4], &[1, 2]),
];

/// `count` certified rational instances cycling through [`POOL_SHAPES`],
/// the `i`-th drawn from `seed + i`.
pub fn sweep_pool(count: usize, seed: u64, budget: usize) -> Result<Vec<CertifiedInstance>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (n, d, e) = POOL_SHAPES[i % POOL_SHAPES.len()];
            generate_certified(n, d, e, FieldSpec::Rationals, seed.wrapping_add(i as u64), 10, budget)
        })
        .collect()
}
