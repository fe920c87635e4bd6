//! Projection onto the invariants of a linear action.
//!
//! For a semisimple action on a finite-dimensional space `W` we have
//! `W = W^g ⊕ Σ_i im(a_i)`. The projector solves `[K | I] (c, v) = w`,
//! where the columns of `K` span the joint kernel and those of `I` span the
//! sum of images, and returns `K c`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::VectorFieldJet;
use crate::form::{index_tuples, FormJet};
use crate::jet::{Jet, Monomial};
use crate::lie::LinearPart;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Precomputed projector for one graded piece.
#[derive(Clone, Debug)]
pub struct InvariantProjector<S> {
    kernel: Vec<Vec<S>>,
    system: Matrix<S>,
    dim: usize,
}

impl<S: Scalar> InvariantProjector<S> {
    /// From the matrices of the generator actions on `W` (all `dim x dim`).
    pub fn from_actions(actions: &[Matrix<S>], dim: usize) -> Result<Self> {
        let stacked = actions
            .iter()
            .fold(Matrix::zeros(0, dim), |acc, a| acc.vcat(a));
        let kernel = if actions.is_empty() {
            (0..dim)
                .map(|i| {
                    let mut v = alloc::vec![S::zero(); dim];
                    v[i] = S::one();
                    v
                })
                .collect()
        } else {
            stacked.nullspace()
        };
        let images = actions.iter().fold(Matrix::zeros(dim, 0), |acc, a| acc.hcat(a));
        let image_basis: Vec<Vec<S>> = if images.cols() == 0 {
            Vec::new()
        } else {
            let (_, pivots) = images.rref();
            pivots.iter().map(|&c| images.column(c)).collect()
        };
        if kernel.len() + image_basis.len() != dim {
            return Err(Error::NotReductive);
        }
        let mut cols = kernel.clone();
        cols.extend(image_basis);
        let system = if dim == 0 { Matrix::zeros(0, 0) } else { Matrix::from_columns(&cols) };
        if dim > 0 && system.rank() != dim {
            return Err(Error::NotReductive);
        }
        Ok(InvariantProjector { kernel, system, dim })
    }

    /// Homogeneous functions of degree `degree`, acted on by `f -> (A_i x)(f)`.
    pub fn for_functions(lp: &LinearPart<S>, nvars: usize, degree: u32) -> Result<Self> {
        let basis = Monomial::all_of_degree(nvars, degree);
        let fields = lp.fields(degree.max(1));
        let actions: Vec<Matrix<S>> = fields
            .iter()
            .map(|v| {
                let cols: Vec<Vec<S>> = basis
                    .iter()
                    .map(|m| {
                        let f = Jet::monomial(nvars, degree.max(1), m.clone(), S::one());
                        let g = v.apply(&f);
                        basis.iter().map(|b| g.coeff(b)).collect()
                    })
                    .collect();
                column_matrix(&cols, basis.len())
            })
            .collect();
        Self::from_actions(&actions, basis.len())
    }

    /// Homogeneous vector fields of degree `degree`, acted on by `h -> [A_i x, h]`.
    pub fn for_fields(lp: &LinearPart<S>, nvars: usize, degree: u32) -> Result<Self> {
        let actions = field_actions(lp, nvars, degree);
        let dim = nvars * Monomial::all_of_degree(nvars, degree).len();
        Self::from_actions(&actions, dim)
    }

    /// Forms of degree `k` with coefficients homogeneous of degree `degree`,
    /// acted on by the Lie derivative.
    pub fn for_forms(lp: &LinearPart<S>, nvars: usize, k: usize, degree: u32) -> Result<Self> {
        let basis = Monomial::all_of_degree(nvars, degree);
        let tuples = index_tuples(nvars, k);
        let order = degree.max(1);
        let fields = lp.fields(order);
        let dim = basis.len() * tuples.len();
        let actions: Vec<Matrix<S>> = fields
            .iter()
            .map(|v| {
                let mut cols = Vec::with_capacity(dim);
                for idx in &tuples {
                    let key: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
                    for m in &basis {
                        let mut w = FormJet::zero(nvars, order, k);
                        w.add_term(&key, Jet::monomial(nvars, order, m.clone(), S::one()));
                        cols.push(w.lie_derivative(v).coordinates(&basis));
                    }
                }
                column_matrix(&cols, dim)
            })
            .collect();
        Self::from_actions(&actions, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the invariant subspace.
    pub fn invariant_dim(&self) -> usize {
        self.kernel.len()
    }

    pub fn kernel(&self) -> &[Vec<S>] {
        &self.kernel
    }

    pub fn project(&self, w: &[S]) -> Vec<S> {
        assert_eq!(w.len(), self.dim, "invariant_projection: dimension");
        if self.dim == 0 {
            return Vec::new();
        }
        let coef = self
            .system
            .solve(w)
            .expect("projector system is square and invertible");
        let mut out = alloc::vec![S::zero(); self.dim];
        for (c, k) in coef.iter().zip(&self.kernel) {
            if c.is_zero() {
                continue;
            }
            for (o, ki) in out.iter_mut().zip(k) {
                *o = o.clone() + c.clone() * ki.clone();
            }
        }
        out
    }

    pub fn project_function(&self, f: &Jet<S>, degree: u32) -> Jet<S> {
        let basis = Monomial::all_of_degree(f.nvars(), degree);
        let coords: Vec<S> = basis.iter().map(|m| f.coeff(m)).collect();
        let p = self.project(&coords);
        Jet::from_terms(f.nvars(), f.order(), basis.into_iter().zip(p))
    }

    pub fn project_field(&self, v: &VectorFieldJet<S>, degree: u32) -> VectorFieldJet<S> {
        let basis = Monomial::all_of_degree(v.nvars(), degree);
        let p = self.project(&v.coordinates(&basis));
        VectorFieldJet::from_coordinates(v.nvars(), v.order(), &basis, &p)
    }

    pub fn project_form(&self, w: &FormJet<S>, degree: u32) -> FormJet<S> {
        let n = w.nvars();
        let basis = Monomial::all_of_degree(n, degree);
        let p = self.project(&w.coordinates(&basis));
        let mut out = FormJet::zero(n, w.order(), w.degree());
        for (t, idx) in index_tuples(n, w.degree()).iter().enumerate() {
            let key: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
            let coeffs = &p[t * basis.len()..(t + 1) * basis.len()];
            let jet = Jet::from_terms(n, w.order(), basis.iter().cloned().zip(coeffs.iter().cloned()));
            out.add_term(&key, jet);
        }
        out
    }
}

fn column_matrix<S: Scalar>(cols: &[Vec<S>], rows: usize) -> Matrix<S> {
    if cols.is_empty() {
        return Matrix::zeros(rows, 0);
    }
    Matrix::from_columns(cols)
}

/// Matrices of `h -> [A_i x, h]` on homogeneous degree-`degree` fields in the
/// basis `(component, monomial)`.
pub fn field_actions<S: Scalar>(lp: &LinearPart<S>, nvars: usize, degree: u32) -> Vec<Matrix<S>> {
    let basis = Monomial::all_of_degree(nvars, degree);
    let order = degree.max(1);
    let dim = nvars * basis.len();
    lp.fields(order)
        .iter()
        .map(|l| {
            let mut cols = Vec::with_capacity(dim);
            for comp in 0..nvars {
                for m in &basis {
                    let mut comps: Vec<Jet<S>> = (0..nvars).map(|_| Jet::zero(nvars, order)).collect();
                    comps[comp] = Jet::monomial(nvars, order, m.clone(), S::one());
                    let e = VectorFieldJet::new(comps).expect("consistent shape");
                    cols.push(l.bracket(&e).expect("same shape").coordinates(&basis));
                }
            }
            column_matrix(&cols, dim)
        })
        .collect()
}

/// Invariant part of a homogeneous vector field of the given degree.
pub fn invariant_projection<S: Scalar>(
    lp: &LinearPart<S>,
    w: &VectorFieldJet<S>,
    degree: u32,
) -> Result<VectorFieldJet<S>> {
    let p = InvariantProjector::for_fields(lp, w.nvars(), degree)?;
    Ok(p.project_field(&w.homogeneous(degree), degree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{linear_part, sl2_linear_rep};
    use crate::scalar::Rational;

    type Q = Rational;

    #[test]
    fn quadratic_invariants_of_sl2() {
        let lp = linear_part(&sl2_linear_rep::<Q>(2));
        let p = InvariantProjector::for_functions(&lp, 3, 2).unwrap();
        assert_eq!(p.invariant_dim(), 1);
        let x2 = Jet::<Q>::parse("x1^2", 3, 2).unwrap();
        let out = p.project_function(&x2, 2);
        // a multiple of r² - z² = x² + y² - z², killed by every generator
        assert_eq!(out, Jet::parse("1/3*x1^2 + 1/3*x2^2 - 1/3*x3^2", 3, 2).unwrap());
        for v in lp.fields(2) {
            assert!(v.apply(&out).is_zero());
        }
        assert_eq!(p.project_function(&out, 2), out);
    }

    #[test]
    fn abelian_nilpotent_action_is_not_reductive() {
        let n = Matrix::<Q>::from_int_rows(&[&[0, 1], &[0, 0]]);
        let lp = LinearPart::new(alloc::vec![n]);
        assert!(matches!(
            InvariantProjector::for_functions(&lp, 2, 1),
            Err(Error::NotReductive)
        ));
    }

    #[test]
    fn field_projection_is_idempotent() {
        let lp = linear_part(&sl2_linear_rep::<Q>(2));
        let p = InvariantProjector::for_fields(&lp, 3, 2).unwrap();
        let w = VectorFieldJet::new(alloc::vec![
            Jet::<Q>::parse("x1^2 + x2*x3", 3, 2).unwrap(),
            Jet::parse("x1*x2", 3, 2).unwrap(),
            Jet::parse("0", 3, 2).unwrap(),
        ])
        .unwrap();
        let once = p.project_field(&w, 2);
        assert_eq!(p.project_field(&once, 2), once);
        for l in lp.fields(2) {
            assert!(l.bracket(&once).unwrap().is_zero());
        }
    }
}
