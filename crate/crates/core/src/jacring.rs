//! The Jacobian ring `B = A / J` of an instance.
//!
//! `J` is generated by
//!
//! * `theta_k = sum_i dF_i/dX_k mu_i + sum_j dG_j/dX_k lambda_j`, of bidegree `(1, -1)`,
//! * `F_i`, of bidegree `(0, d_i)`,
//! * `G_j lambda_j`, of bidegree `(1, 0)`.
//!
//! Each piece `B_q(l)` is computed on demand as the cokernel of the map
//! `theta.A_{q-1}(l+1) + F.A_q(l-d_i) + G lambda.A_{q-1}(l) -> A_q(l)`. Its
//! basis consists of the ambient monomials that carry no pivot in the
//! leftmost-pivot echelon form of the ideal piece, so it depends only on the
//! span of `J_q(l)` and the fixed monomial order.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::bigraded::{AlgElement, AlgMonomial, AlgPoly, BiDegree, GradedPieceBasis, Grading, WeightIndex};
use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::instance::Instance;
use crate::linalg::{check_budget, column_echelon, default_budget, SparseLinearMap, SparseVec};
use crate::poly::{HomogPoly, Monomial};

/// The three generator families of `J`, written in `A`.
#[derive(Debug, Clone)]
pub struct JacobianGenerators<F: Field> {
    pub theta: Vec<AlgPoly<F>>,
    pub f: Vec<AlgPoly<F>>,
    pub g_lambda: Vec<AlgPoly<F>>,
}

impl<F: Field> JacobianGenerators<F> {
    pub fn all(&self) -> impl Iterator<Item = &AlgPoly<F>> {
        self.theta.iter().chain(&self.f).chain(&self.g_lambda)
    }
}

/// One piece `B_q(l)` together with its normal-form table.
#[derive(Debug)]
pub struct QuotientPiece<F: Field> {
    pub bidegree: BiDegree,
    basis: GradedPieceBasis,
    ideal_rank: usize,
    reps: Vec<usize>,
    /// Normal form of each ambient basis monomial, over the representatives.
    normal: Vec<SparseVec<F::Elem>>,
}

impl<F: Field> QuotientPiece<F> {
    fn build(field: &F, basis: GradedPieceBasis, ideal: &SparseLinearMap<F>, budget: usize) -> Result<Self> {
        let ech = column_echelon(ideal, budget)?;
        let dim = basis.dim();
        let reps = ech.non_pivot_columns();
        let mut rep_pos = vec![usize::MAX; dim];
        for (k, &c) in reps.iter().enumerate() {
            rep_pos[c] = k;
        }
        let mut normal: Vec<SparseVec<F::Elem>> = vec![Vec::new(); dim];
        for (k, &c) in reps.iter().enumerate() {
            normal[c] = vec![(k, field.one())];
        }
        if !reps.is_empty() {
            // Back substitution from the last pivot: e_c = -(rest of row c).
            let mut acc = vec![field.zero(); reps.len()];
            for c in (0..dim).rev() {
                let Some(row) = ech.pivot_vector(c) else {
                    continue;
                };
                for (j, y) in &row[1..] {
                    if rep_pos[*j] != usize::MAX {
                        let k = rep_pos[*j];
                        acc[k] = field.sub(&acc[k], y);
                    } else {
                        for (k, z) in &normal[*j] {
                            acc[*k] = field.mul_sub(&acc[*k], y, z);
                        }
                    }
                }
                let mut nf = Vec::new();
                for (k, x) in acc.iter_mut().enumerate() {
                    if !field.is_zero(x) {
                        nf.push((k, std::mem::replace(x, field.zero())));
                    }
                }
                normal[c] = nf;
            }
        }
        Ok(Self {
            bidegree: basis.bidegree,
            ideal_rank: ech.rank(),
            basis,
            reps,
            normal,
        })
    }

    /// `dim B_q(l)`.
    pub fn dim(&self) -> usize {
        self.reps.len()
    }
    pub fn ambient(&self) -> &GradedPieceBasis {
        &self.basis
    }
    pub fn ideal_rank(&self) -> usize {
        self.ideal_rank
    }
    /// Ambient indices of the monomials whose classes form the basis.
    pub fn representative_indices(&self) -> &[usize] {
        &self.reps
    }
    pub fn representative(&self, k: usize) -> &AlgMonomial {
        self.basis.element(self.reps[k])
    }
    /// Normal form of the ambient basis monomial with index `i`.
    pub fn normal_form_of_index(&self, i: usize) -> &[(usize, F::Elem)] {
        &self.normal[i]
    }
    pub fn normal_form_of_term(&self, t: &AlgMonomial) -> Option<&[(usize, F::Elem)]> {
        self.basis.index_of(t).map(|i| self.normal[i].as_slice())
    }

    /// Project ambient coordinates to coordinates over the representatives.
    pub fn project(&self, field: &F, ambient: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if ambient.len() != self.basis.dim() {
            return Err(Error::InconsistentDimensions(format!(
                "{} coordinates for A{} of dimension {}",
                ambient.len(),
                self.bidegree,
                self.basis.dim()
            )));
        }
        let mut out = vec![field.zero(); self.dim()];
        for (i, x) in ambient.iter().enumerate() {
            if field.is_zero(x) {
                continue;
            }
            for (k, y) in &self.normal[i] {
                out[*k] = field.add(&out[*k], &field.mul(x, y));
            }
        }
        Ok(out)
    }

    /// The ambient element whose class has the given coordinates.
    pub fn lift(&self, field: &F, coords: &[F::Elem]) -> Result<AlgElement<F>> {
        if coords.len() != self.dim() {
            return Err(Error::InconsistentDimensions(format!(
                "{} coordinates for B{} of dimension {}",
                coords.len(),
                self.bidegree,
                self.dim()
            )));
        }
        let mut el = AlgElement::zero(field, &self.basis);
        for (k, x) in coords.iter().enumerate() {
            el.coords[self.reps[k]] = x.clone();
        }
        Ok(el)
    }
}

/// The trace functional on the top piece, which must be one-dimensional.
#[derive(Debug, Clone)]
pub struct Trace<F: Field> {
    pub bidegree: BiDegree,
    piece: Arc<QuotientPiece<F>>,
    field: F,
}

impl<F: Field> Trace<F> {
    /// The monomial whose class is sent to one.
    pub fn generator(&self) -> &AlgMonomial {
        self.piece.representative(0)
    }

    pub fn of_term(&self, t: &AlgMonomial) -> Option<F::Elem> {
        self.piece.normal_form_of_term(t).map(|nf| {
            nf.first()
                .map(|(_, x)| x.clone())
                .unwrap_or_else(|| self.field.zero())
        })
    }

    pub fn of_element(&self, el: &AlgElement<F>) -> Result<F::Elem> {
        if el.bidegree != self.bidegree {
            return Err(Error::BidegreeMismatch {
                expected: self.bidegree,
                found: el.bidegree,
            });
        }
        Ok(self.piece.project(&self.field, &el.coords)?[0].clone())
    }
}

/// `B = A / J` over the field `F`, with a cache of computed pieces.
#[derive(Debug)]
pub struct JacobianRing<F: Field> {
    instance: Instance,
    field: F,
    grading: Grading,
    generators: JacobianGenerators<F>,
    budget: usize,
    cache: RwLock<HashMap<BiDegree, Arc<QuotientPiece<F>>>>,
}

impl<F: Field> JacobianRing<F> {
    /// Build the ring over `field`. A prime-field instance can only be read
    /// over its own field; a rational instance can be read over the
    /// rationals or reduced modulo any prime not dividing a denominator.
    pub fn new(instance: &Instance, field: F) -> Result<Self> {
        if let FieldSpec::PrimeField(p) = instance.field() {
            if field.spec() != FieldSpec::PrimeField(p) {
                return Err(Error::InvalidField(format!(
                    "instance over F_{p} cannot be read over {}",
                    field.spec()
                )));
            }
        }
        let grading = instance.grading();
        let generators = build_generators(instance, &field, &grading)?;
        Ok(Self {
            instance: instance.clone(),
            field,
            grading,
            generators,
            budget: default_budget(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }
    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn grading(&self) -> &Grading {
        &self.grading
    }
    pub fn generators(&self) -> &JacobianGenerators<F> {
        &self.generators
    }
    pub fn budget(&self) -> usize {
        self.budget
    }

    /// The map onto `J_q(l)`, one block of columns per generator, in the
    /// order theta, F, G lambda.
    pub fn ideal_piece_map(&self, bd: BiDegree) -> Result<SparseLinearMap<F>> {
        let target = self.grading.piece_basis(bd);
        self.ideal_map_into(&target)
    }

    fn ideal_map_into(&self, target: &GradedPieceBasis) -> Result<SparseLinearMap<F>> {
        let bd = target.bidegree;
        let mut cols = 0usize;
        for g in self.generators.all() {
            let src = BiDegree::new(bd.q - g.bidegree.q, bd.l - g.bidegree.l);
            cols += self.grading.dim_piece(src);
        }
        check_budget(target.dim(), cols, self.budget)?;
        let mut columns: Vec<SparseVec<F::Elem>> = Vec::with_capacity(cols);
        for g in self.generators.all() {
            let src = self.grading.piece_basis(BiDegree::new(bd.q - g.bidegree.q, bd.l - g.bidegree.l));
            let m = self.grading.multiplication_between(&self.field, g, &src, target)?;
            columns.extend(m.columns().iter().cloned());
        }
        Ok(SparseLinearMap::from_column_terms(self.field.clone(), target.dim(), columns)?
            .with_tags(format!("J-sources{bd}"), format!("A{bd}")))
    }

    pub fn quotient_piece(&self, bd: BiDegree) -> Result<Arc<QuotientPiece<F>>> {
        if let Some(p) = self.cache.read().expect("cache lock").get(&bd) {
            return Ok(p.clone());
        }
        let target = self.grading.piece_basis(bd);
        let ideal = self.ideal_map_into(&target)?;
        let piece = Arc::new(QuotientPiece::build(&self.field, target, &ideal, self.budget)?);
        let mut cache = self.cache.write().expect("cache lock");
        Ok(cache.entry(bd).or_insert(piece).clone())
    }

    /// `dim B_q(l)`.
    pub fn dim_b(&self, bd: BiDegree) -> Result<usize> {
        Ok(self.quotient_piece(bd)?.dim())
    }

    /// Coordinates of the class of `el` over the basis of its piece.
    pub fn reduce(&self, el: &AlgElement<F>) -> Result<Vec<F::Elem>> {
        self.quotient_piece(el.bidegree)?.project(&self.field, &el.coords)
    }

    /// Like [`JacobianRing::reduce`], checking the expected bidegree first.
    pub fn reduce_in(&self, bd: BiDegree, el: &AlgElement<F>) -> Result<Vec<F::Elem>> {
        if el.bidegree != bd {
            return Err(Error::BidegreeMismatch {
                expected: bd,
                found: el.bidegree,
            });
        }
        self.reduce(el)
    }

    pub fn reduce_poly(&self, p: &AlgPoly<F>) -> Result<Vec<F::Elem>> {
        let piece = self.quotient_piece(p.bidegree)?;
        let el = p.to_element(&self.field, piece.ambient())?;
        piece.project(&self.field, &el.coords)
    }

    /// The trace on `B_{n-r}(2(d-n-1)+e)`, defined when that piece is a line.
    pub fn trace(&self) -> Result<Trace<F>> {
        let bd = self.instance.top_bidegree();
        let piece = self.quotient_piece(bd)?;
        if piece.dim() != 1 {
            return Err(Error::TraceUndefined {
                bidegree: bd,
                dim: piece.dim(),
            });
        }
        Ok(Trace {
            bidegree: bd,
            piece,
            field: self.field.clone(),
        })
    }

    /// Multiplication by the class `x` of `B_a`, as a map
    /// `B_source -> B_{source + a}`.
    pub fn multiplication_map(
        &self,
        a: BiDegree,
        x: &[F::Elem],
        source: BiDegree,
    ) -> Result<SparseLinearMap<F>> {
        let pa = self.quotient_piece(a)?;
        if x.len() != pa.dim() {
            return Err(Error::InconsistentDimensions(format!(
                "{} coordinates for B{a} of dimension {}",
                x.len(),
                pa.dim()
            )));
        }
        let ps = self.quotient_piece(source)?;
        let pt = self.quotient_piece(a + source)?;
        let f = &self.field;
        let mut columns = Vec::with_capacity(ps.dim());
        for b in 0..ps.dim() {
            let tb = ps.representative(b);
            let mut acc = vec![f.zero(); pt.dim()];
            for (k, xk) in x.iter().enumerate() {
                if f.is_zero(xk) {
                    continue;
                }
                let nf = pt
                    .normal_form_of_term(&pa.representative(k).mul(tb))
                    .expect("product lies in the target piece");
                for (i, y) in nf {
                    acc[*i] = f.add(&acc[*i], &f.mul(xk, y));
                }
            }
            columns.push(crate::linalg::dense_to_sparse(f, &acc));
        }
        Ok(
            SparseLinearMap::from_column_terms(f.clone(), pt.dim(), columns)?
                .with_tags(format!("B{source}"), format!("B{}", a + source)),
        )
    }

    /// Checks `sum_k X_k theta_k = sum_i d_i F_i mu_i + sum_j e_j G_j lambda_j`
    /// in `A_1(0)`.
    pub fn euler_identity_check(&self) -> Result<bool> {
        let f = &self.field;
        let g = &self.grading;
        let n = self.instance.n();
        let mut lhs = AlgPoly::zero(BiDegree::new(1, 0));
        for (k, theta) in self.generators.theta.iter().enumerate() {
            let xk = AlgPoly::new(f, g, BiDegree::new(0, 1), [(g.term(&zero_weight(g), &Monomial::var(n + 1, k)), f.one())])?;
            lhs = lhs.add(f, &xk.mul(f, theta))?;
        }
        let mut rhs = AlgPoly::zero(BiDegree::new(1, 0));
        for (i, fi) in self.generators.f.iter().enumerate() {
            let mu = AlgPoly::new(f, g, BiDegree::new(1, -(self.instance.d()[i] as i64)), [(g.term(&unit_weight(g, i), &Monomial::one(n + 1)), f.one())])?;
            let di = f.from_i64(self.instance.d()[i] as i64);
            rhs = rhs.add(f, &mu.mul(f, fi).scale(f, &di))?;
        }
        for (j, gl) in self.generators.g_lambda.iter().enumerate() {
            let ej = f.from_i64(self.instance.e()[j] as i64);
            rhs = rhs.add(f, &gl.scale(f, &ej))?;
        }
        Ok(lhs.terms() == rhs.terms())
    }
}

fn zero_weight(g: &Grading) -> WeightIndex {
    WeightIndex {
        a: vec![0; g.r()],
        b: vec![0; g.s()],
    }
}

/// The weight index of `mu_i` for `i < r`, and of `lambda_{i-r}` otherwise.
fn unit_weight(g: &Grading, i: usize) -> WeightIndex {
    let mut w = zero_weight(g);
    if i < g.r() {
        w.a[i] = 1;
    } else {
        w.b[i - g.r()] = 1;
    }
    w
}

fn poly_terms<F: Field>(
    field: &F,
    g: &Grading,
    w: &WeightIndex,
    p: &HomogPoly,
) -> Result<Vec<(AlgMonomial, F::Elem)>> {
    Ok(p.coefficients_in(field)?
        .into_iter()
        .map(|(m, c)| (g.term(w, &m), c))
        .collect())
}

fn build_generators<F: Field>(inst: &Instance, field: &F, g: &Grading) -> Result<JacobianGenerators<F>> {
    let (n, r) = (inst.n(), inst.r());
    let mut theta = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut terms = Vec::new();
        for (i, fi) in inst.f().iter().enumerate() {
            terms.extend(poly_terms(field, g, &unit_weight(g, i), &fi.partial_derivative(k))?);
        }
        for (j, gj) in inst.g().iter().enumerate() {
            terms.extend(poly_terms(field, g, &unit_weight(g, r + j), &gj.partial_derivative(k))?);
        }
        theta.push(AlgPoly::new(field, g, BiDegree::new(1, -1), terms)?);
    }
    let f = inst
        .f()
        .iter()
        .map(|fi| {
            let terms = poly_terms(field, g, &zero_weight(g), fi)?;
            AlgPoly::new(field, g, BiDegree::new(0, fi.degree() as i64), terms)
        })
        .collect::<Result<Vec<_>>>()?;
    let g_lambda = inst
        .g()
        .iter()
        .enumerate()
        .map(|(j, gj)| {
            let terms = poly_terms(field, g, &unit_weight(g, r + j), gj)?;
            AlgPoly::new(field, g, BiDegree::new(1, 0), terms)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JacobianGenerators { theta, f, g_lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, RationalField};
    use crate::instance::reference;

    fn bd(q: i64, l: i64) -> BiDegree {
        BiDegree::new(q, l)
    }

    #[test]
    fn fermat_quartic_pieces() {
        let ring = JacobianRing::new(&reference::fermat_quartic(), RationalField).unwrap();
        assert_eq!(ring.dim_b(bd(0, 0)).unwrap(), 1);
        assert_eq!(ring.dim_b(bd(1, 0)).unwrap(), 19);
        assert_eq!(ring.dim_b(bd(2, 0)).unwrap(), 1);
        assert!(ring.trace().is_ok());
    }

    #[test]
    fn elliptic_plus_line_pieces() {
        let ring = JacobianRing::new(&reference::elliptic_plus_line(), RationalField).unwrap();
        assert_eq!(ring.dim_b(bd(0, 1)).unwrap(), 3);
        assert_eq!(ring.dim_b(bd(1, 1)).unwrap(), 1);
        assert_eq!(ring.dim_b(bd(1, 0)).unwrap(), 3);
        let m = ring.ideal_piece_map(bd(1, 1)).unwrap();
        assert_eq!((m.rows(), m.cols()), (21, 24));
        assert_eq!(ring.quotient_piece(bd(1, 1)).unwrap().ideal_rank(), 20);
    }

    #[test]
    fn singular_cubic_has_no_trace() {
        let ring = JacobianRing::new(&reference::singular_cubic(), RationalField).unwrap();
        match ring.trace() {
            Err(Error::TraceUndefined { dim, .. }) => assert_eq!(dim, 3),
            other => panic!("expected TraceUndefined, got {other:?}"),
        }
    }

    #[test]
    fn euler_identity_holds() {
        for inst in [
            reference::fermat_quartic(),
            reference::elliptic_plus_three_lines(),
            Instance::random(3, &[2], &[1, 2], FieldSpec::Rationals, 5).unwrap(),
        ] {
            let ring = JacobianRing::new(&inst, RationalField).unwrap();
            assert!(ring.euler_identity_check().unwrap());
        }
    }

    #[test]
    fn generators_lie_in_their_pieces() {
        let inst = Instance::random(2, &[3], &[1, 2], FieldSpec::PrimeField(101), 9).unwrap();
        let ring = JacobianRing::new(&inst, PrimeField::new(101).unwrap()).unwrap();
        for g in ring.generators().all() {
            assert!(ring.reduce_poly(g).unwrap().iter().all(|x| *x == 0));
        }
    }

    #[test]
    fn reduce_checks_bidegree() {
        let ring = JacobianRing::new(&reference::elliptic_plus_line(), RationalField).unwrap();
        let piece = ring.quotient_piece(bd(1, 0)).unwrap();
        let el = AlgElement::unit(&RationalField, piece.ambient(), 0);
        assert!(matches!(
            ring.reduce_in(bd(1, 1), &el),
            Err(Error::BidegreeMismatch { .. })
        ));
    }

    #[test]
    fn representatives_reduce_to_units() {
        let ring = JacobianRing::new(&reference::fermat_quartic(), RationalField).unwrap();
        let piece = ring.quotient_piece(bd(1, 0)).unwrap();
        for k in 0..piece.dim() {
            let el = piece.lift(&RationalField, &{
                let mut v = vec![RationalField.zero(); piece.dim()];
                v[k] = RationalField.one();
                v
            })
            .unwrap();
            let red = ring.reduce(&el).unwrap();
            assert!(red.iter().enumerate().all(|(i, x)| *x == if i == k { RationalField.one() } else { RationalField.zero() }));
        }
    }

    #[test]
    fn multiplication_by_one_is_identity() {
        let ring = JacobianRing::new(&reference::elliptic_plus_line(), RationalField).unwrap();
        let one = vec![RationalField.one()];
        let m = ring.multiplication_map(bd(0, 0), &one, bd(1, 0)).unwrap();
        let dense = m.to_dense();
        for (i, row) in dense.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x == RationalField.one(), i == j);
            }
        }
    }

    #[test]
    fn prime_field_instance_needs_its_field() {
        let inst = Instance::random(2, &[3], &[], FieldSpec::PrimeField(101), 1).unwrap();
        assert!(JacobianRing::new(&inst, RationalField).is_err());
        assert!(JacobianRing::new(&inst, PrimeField::new(103).unwrap()).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let ring = JacobianRing::new(&reference::fermat_quartic(), RationalField)
            .unwrap()
            .with_budget(100);
        assert!(matches!(
            ring.dim_b(bd(1, 0)),
            Err(Error::DimensionOverflow { .. })
        ));
    }
}
