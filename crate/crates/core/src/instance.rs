//! Instances `(n, F_1..F_r, G_1..G_s)` defining an open complete intersection
//! `X \ Z` in `P^n`, and a few reference instances used throughout the tests
//! and the guide.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bigraded::{BiDegree, Grading};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::poly::{random_homog_with, HomogPoly, Monomial};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    f: Vec<HomogPoly>,
    g: Vec<HomogPoly>,
    field: FieldSpec,
}

impl Instance {
    /// Validates the standing assumptions: `r + s >= 1`, `n >= 2`, every form
    /// in `n + 1` variables of degree at least one. Prime-field coefficients
    /// are canonicalized into `[0, p)`.
    pub fn new(n: usize, f: Vec<HomogPoly>, g: Vec<HomogPoly>, field: FieldSpec) -> Result<Self> {
        field.validate()?;
        if f.len() + g.len() == 0 {
            return Err(Error::InvalidInstance("need r + s >= 1".into()));
        }
        if n < 2 {
            return Err(Error::InvalidInstance(format!("need n >= 2, got {n}")));
        }
        for (name, p) in f.iter().map(|p| ("F", p)).chain(g.iter().map(|p| ("G", p))) {
            if p.nvars() != n + 1 {
                return Err(Error::InvalidInstance(format!(
                    "{name} has {} variables, expected {}",
                    p.nvars(),
                    n + 1
                )));
            }
            if p.degree() == 0 {
                return Err(Error::InvalidInstance(format!("{name} has degree 0")));
            }
        }
        let canon = |polys: Vec<HomogPoly>| -> Result<Vec<HomogPoly>> {
            match field {
                FieldSpec::Rationals => Ok(polys),
                FieldSpec::PrimeField(p) => polys.iter().map(|x| reduce_coeffs(x, p)).collect(),
            }
        };
        Ok(Self {
            n,
            f: canon(f)?,
            g: canon(g)?,
            field,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        self.f.len()
    }
    pub fn s(&self) -> usize {
        self.g.len()
    }
    pub fn f(&self) -> &[HomogPoly] {
        &self.f
    }
    pub fn g(&self) -> &[HomogPoly] {
        &self.g
    }
    pub fn field(&self) -> FieldSpec {
        self.field
    }
    pub fn d(&self) -> Vec<u32> {
        self.f.iter().map(HomogPoly::degree).collect()
    }
    pub fn e(&self) -> Vec<u32> {
        self.g.iter().map(HomogPoly::degree).collect()
    }
    /// `d = d_1 + ... + d_r`.
    pub fn d_total(&self) -> i64 {
        self.d().iter().map(|&x| x as i64).sum()
    }
    /// `e = e_1 + ... + e_s`.
    pub fn e_total(&self) -> i64 {
        self.e().iter().map(|&x| x as i64).sum()
    }
    pub fn d_max(&self) -> i64 {
        self.d().into_iter().max().unwrap_or(0) as i64
    }
    pub fn e_max(&self) -> i64 {
        self.e().into_iter().max().unwrap_or(0) as i64
    }
    /// Minimum over all `d_i` and `e_j`.
    pub fn delta_min(&self) -> i64 {
        self.d()
            .into_iter()
            .chain(self.e())
            .min()
            .expect("r + s >= 1") as i64
    }
    /// Relative dimension `m = n - r`.
    pub fn m(&self) -> i64 {
        self.n as i64 - self.r() as i64
    }

    pub fn grading(&self) -> Grading {
        Grading::new(self.n, self.d(), self.e())
    }

    /// `n >= r + 1`, required for `X` to be a positive-dimensional variety.
    pub fn require_geometric(&self) -> Result<()> {
        if self.n < self.r() + 1 {
            return Err(Error::InvalidInstance(format!(
                "need n >= r + 1, got n = {} and r = {}",
                self.n,
                self.r()
            )));
        }
        Ok(())
    }

    /// Target of the trace: `(n - r, 2(d - n - 1) + e)`.
    pub fn top_bidegree(&self) -> BiDegree {
        let n = self.n as i64;
        BiDegree::new(self.m(), 2 * (self.d_total() - n - 1) + self.e_total())
    }

    /// The twist `d + e - n - 1` at which `B_q` carries the log Hodge pieces.
    pub fn hodge_twist(&self) -> i64 {
        self.d_total() + self.e_total() - self.n as i64 - 1
    }

    /// Rename `X_k` to `X_{perm[k]}` in every form.
    pub fn permute_variables(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n + 1];
        if perm.len() != self.n + 1 || perm.iter().any(|&k| k > self.n || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidInstance("not a permutation of the variables".into()));
        }
        Self::new(
            self.n,
            self.f.iter().map(|p| p.permute_variables(perm)).collect(),
            self.g.iter().map(|p| p.permute_variables(perm)).collect(),
            self.field,
        )
    }

    /// A seed-deterministic random instance with the given degrees.
    pub fn random(n: usize, d: &[u32], e: &[u32], field: FieldSpec, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = d.iter().map(|&k| random_homog_with(&mut rng, n, k, field)).collect();
        let g = e.iter().map(|&k| random_homog_with(&mut rng, n, k, field)).collect();
        Self::new(n, f, g, field)
    }
}

fn reduce_coeffs(p: &HomogPoly, modulus: u64) -> Result<HomogPoly> {
    let m = BigInt::from(modulus);
    let terms = p
        .terms()
        .map(|(mono, c)| {
            let num = ((c.numer() % &m) + &m) % &m;
            let den = ((c.denom() % &m) + &m) % &m;
            let den = den.to_u64().unwrap_or(0);
            if den == 0 {
                return Err(Error::BadReduction(modulus));
            }
            let inv = crate::field::PrimeField::new(modulus)?.pow(den, modulus - 2);
            let v = (num.to_u64().unwrap_or(0) as u128 * inv as u128 % modulus as u128) as u64;
            Ok((mono.clone(), BigRational::from_integer(BigInt::from(v))))
        })
        .collect::<Result<Vec<_>>>()?;
    HomogPoly::from_terms(p.nvars(), p.degree(), terms)
}

/// Reference instances with known invariants.
pub mod reference {
    use super::*;

    fn linear(n: usize, k: usize) -> HomogPoly {
        HomogPoly::monomial(Monomial::var(n + 1, k), BigRational::from_integer(1.into()))
    }

    /// The Fermat hypersurface `sum X_k^d = 0` in `P^n`, no boundary.
    pub fn fermat_hypersurface(n: usize, d: u32) -> Instance {
        Instance::new(n, vec![HomogPoly::fermat(n, d)], vec![], FieldSpec::Rationals)
            .expect("valid reference instance")
    }

    /// The Fermat quartic surface in `P^3`.
    pub fn fermat_quartic() -> Instance {
        fermat_hypersurface(3, 4)
    }

    /// The Fermat quintic threefold in `P^4`.
    pub fn fermat_quintic() -> Instance {
        fermat_hypersurface(4, 5)
    }

    /// The Fermat cubic curve in `P^2` minus its three points on `X_0 = 0`.
    pub fn elliptic_plus_line() -> Instance {
        Instance::new(
            2,
            vec![HomogPoly::fermat(2, 3)],
            vec![linear(2, 0)],
            FieldSpec::Rationals,
        )
        .expect("valid reference instance")
    }

    /// The Fermat cubic curve minus its intersection with three lines.
    pub fn elliptic_plus_three_lines() -> Instance {
        let lines = vec![
            linear(2, 0),
            linear(2, 1),
            HomogPoly::from_int_terms(3, 1, &[(&[1, 0, 0], 1), (&[0, 1, 0], 2), (&[0, 0, 1], 3)])
                .expect("linear form"),
        ];
        Instance::new(2, vec![HomogPoly::fermat(2, 3)], lines, FieldSpec::Rationals)
            .expect("valid reference instance")
    }

    /// A nodal cubic curve `X_0^2 X_1 + X_1^2 X_2`, singular at `(0:0:1)`.
    pub fn singular_cubic() -> Instance {
        let f = HomogPoly::from_int_terms(3, 3, &[(&[2, 1, 0], 1), (&[0, 2, 1], 1)])
            .expect("cubic");
        Instance::new(2, vec![f], vec![], FieldSpec::Rationals).expect("valid instance")
    }

    /// The union of the coordinate lines `X_0 X_1 X_2 = 0`.
    pub fn coordinate_triangle() -> Instance {
        let f = HomogPoly::from_int_terms(3, 3, &[(&[1, 1, 1], 1)]).expect("cubic");
        Instance::new(2, vec![f], vec![], FieldSpec::Rationals).expect("valid instance")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standing_assumptions_are_checked() {
        assert!(Instance::new(2, vec![], vec![], FieldSpec::Rationals).is_err());
        let cubic = HomogPoly::fermat(1, 3);
        assert!(Instance::new(1, vec![cubic], vec![], FieldSpec::Rationals).is_err());
        let wrong_vars = HomogPoly::fermat(3, 3);
        assert!(Instance::new(2, vec![wrong_vars], vec![], FieldSpec::Rationals).is_err());
        assert!(Instance::new(2, vec![HomogPoly::fermat(2, 3)], vec![], FieldSpec::PrimeField(4)).is_err());
    }

    #[test]
    fn numerical_invariants() {
        let inst = Instance::random(3, &[2, 3], &[1, 2, 2], FieldSpec::Rationals, 1).unwrap();
        assert_eq!(inst.d_total(), 5);
        assert_eq!(inst.e_total(), 5);
        assert_eq!(inst.delta_min(), 1);
        assert_eq!(inst.d_max(), 3);
        assert_eq!(inst.e_max(), 2);
        assert_eq!(inst.m(), 1);
        assert_eq!(inst.top_bidegree(), BiDegree::new(1, 7));
        assert!(inst.require_geometric().is_ok());
        let tight = Instance::random(2, &[2, 2], &[], FieldSpec::Rationals, 1).unwrap();
        assert!(tight.require_geometric().is_err());
    }

    #[test]
    fn prime_field_coefficients_are_canonical() {
        let f = HomogPoly::from_int_terms(3, 2, &[(&[2, 0, 0], -1), (&[0, 1, 1], 12)]).unwrap();
        let inst = Instance::new(2, vec![f], vec![], FieldSpec::PrimeField(7)).unwrap();
        let c: Vec<String> = inst.f()[0].to_wire().into_iter().map(|(_, c)| c).collect();
        assert_eq!(c, vec!["6", "5"]);
    }

    #[test]
    fn reference_instances() {
        assert_eq!(reference::elliptic_plus_line().top_bidegree(), BiDegree::new(1, 1));
        assert_eq!(reference::fermat_quartic().top_bidegree(), BiDegree::new(2, 0));
        assert_eq!(reference::elliptic_plus_three_lines().s(), 3);
    }
}
