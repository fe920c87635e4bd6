//! Polynomial vector fields.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::{Jet, Monomial, Substitution};
use crate::linalg::Matrix;
use crate::polymap::PolyMap;
use crate::scalar::Scalar;

/// `Σ v^i ∂/∂x_i` with jet coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct VectorFieldJet<S> {
    comps: Vec<Jet<S>>,
}

impl<S: Scalar> VectorFieldJet<S> {
    pub fn new(comps: Vec<Jet<S>>) -> Result<Self> {
        let n = comps.len();
        let order = comps.first().map_or(0, Jet::order);
        for c in &comps {
            if c.nvars() != n {
                return Err(Error::Dimension {
                    op: "vector_field",
                    expected: n,
                    found: c.nvars(),
                });
            }
            if c.order() != order {
                return Err(Error::Dimension {
                    op: "vector_field",
                    expected: order as usize,
                    found: c.order() as usize,
                });
            }
        }
        Ok(VectorFieldJet { comps })
    }

    pub fn zero(n: usize, order: u32) -> Self {
        VectorFieldJet {
            comps: (0..n).map(|_| Jet::zero(n, order)).collect(),
        }
    }

    /// The linear field `x -> A x`.
    pub fn linear(a: &Matrix<S>, order: u32) -> Self {
        VectorFieldJet {
            comps: PolyMap::linear(a, order).into_comps(),
        }
    }

    /// `∂/∂x_i`.
    pub fn coordinate(n: usize, order: u32, i: usize) -> Self {
        let mut v = Self::zero(n, order);
        v.comps[i] = Jet::one(n, order);
        v
    }

    /// Euler field `Σ x_i ∂/∂x_i`.
    pub fn euler(n: usize, order: u32) -> Self {
        VectorFieldJet {
            comps: (0..n).map(|i| Jet::var(n, order, i)).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.comps.len()
    }

    pub fn order(&self) -> u32 {
        self.comps.first().map_or(0, Jet::order)
    }

    pub fn comps(&self) -> &[Jet<S>] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Jet<S> {
        &self.comps[i]
    }

    pub fn into_comps(self) -> Vec<Jet<S>> {
        self.comps
    }

    pub fn with_order(&self, order: u32) -> Self {
        self.map(|c| c.with_order(order))
    }

    pub fn map(&self, f: impl Fn(&Jet<S>) -> Jet<S>) -> Self {
        VectorFieldJet {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Jet::is_zero)
    }

    pub fn is_negligible(&self) -> bool {
        self.comps.iter().all(Jet::is_negligible)
    }

    pub fn max_abs_coeff(&self) -> S {
        crate::scalar::max_abs(self.comps.iter().map(Jet::max_abs_coeff).collect::<Vec<_>>().iter())
    }

    pub fn vanishes_at_origin(&self) -> bool {
        self.comps.iter().all(|c| c.constant_term().is_zero())
    }

    pub fn homogeneous(&self, k: u32) -> Self {
        self.map(|c| c.homogeneous(k))
    }

    pub fn degree_range(&self, lo: u32, hi: u32) -> Self {
        self.map(|c| c.degree_range(lo, hi))
    }

    /// Lowest degree present, if any.
    pub fn valuation(&self) -> Option<u32> {
        self.comps.iter().filter_map(Jet::valuation).min()
    }

    pub fn degree(&self) -> Option<u32> {
        self.comps.iter().filter_map(Jet::degree).max()
    }

    /// Matrix of degree-one coefficients: `A[i][j] = ∂v^i/∂x_j (0)`.
    pub fn linear_part(&self) -> Matrix<S> {
        let n = self.nvars();
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = self.comps[i].linear_coeff(j);
            }
        }
        a
    }

    pub fn is_linear(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.terms().all(|(m, _)| m.degree() == 1))
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorFieldJet {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorFieldJet {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|j| j.scale(c))
    }

    /// Multiplies every component by the function `f`.
    pub fn mul_function(&self, f: &Jet<S>) -> Self {
        self.map(|j| j * f)
    }

    /// Derivation of a function: `Σ v^j ∂_j f`.
    pub fn apply(&self, f: &Jet<S>) -> Jet<S> {
        let mut acc = Jet::zero(f.nvars(), f.order());
        for (j, vj) in self.comps.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            let d = f.derivative(j);
            if !d.is_zero() {
                acc = &acc + &(vj * &d);
            }
        }
        acc
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.nvars() != other.nvars() {
            return Err(Error::Dimension {
                op,
                expected: self.nvars(),
                found: other.nvars(),
            });
        }
        if self.order() != other.order() {
            return Err(Error::Dimension {
                op,
                expected: self.order() as usize,
                found: other.order() as usize,
            });
        }
        Ok(())
    }

    /// `[v, w]^i = v(w^i) - w(v^i)`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "bracket_vf")?;
        Ok(VectorFieldJet {
            comps: (0..self.nvars())
                .map(|i| &self.apply(&other.comps[i]) - &other.apply(&self.comps[i]))
                .collect(),
        })
    }

    /// `m_* v = (Dm · v) ∘ m⁻¹`.
    pub fn pushforward(&self, m: &PolyMap<S>) -> Result<Self> {
        if m.source_dim() != self.nvars() || m.target_dim() != self.nvars() {
            return Err(Error::Dimension {
                op: "pushforward",
                expected: self.nvars(),
                found: m.source_dim(),
            });
        }
        let m = m.with_order(self.order());
        let inv = m.inverse()?;
        Ok(self.pushforward_with_inverse(&m, &inv))
    }

    /// Pushforward when `inv` is already known to invert `m` at this order.
    pub(crate) fn pushforward_with_inverse(&self, m: &PolyMap<S>, inv: &PolyMap<S>) -> Self {
        let transported: Vec<Jet<S>> = m.comps().iter().map(|mi| self.apply(mi)).collect();
        let order = self.order();
        let args: Vec<Jet<S>> = inv.comps().iter().map(|c| c.with_order(order)).collect();
        let mut sub = Substitution::new(&args, self.nvars(), order);
        let comps = transported.iter().map(|c| sub.apply(c)).collect();
        VectorFieldJet { comps }
    }

    /// Pullback `m^* v = (Dm)⁻¹ · (v ∘ m)`, i.e. pushforward by `m⁻¹`.
    pub fn pullback(&self, m: &PolyMap<S>) -> Result<Self> {
        self.pushforward(&m.with_order(self.order()).inverse()?)
    }

    pub fn eval(&self, point: &[S]) -> Vec<S> {
        self.comps.iter().map(|c| c.eval(point)).collect()
    }

    /// Coordinates in the basis `(component i, monomial m)` for the given
    /// monomial list.
    pub fn coordinates(&self, monomials: &[Monomial]) -> Vec<S> {
        let mut out = Vec::with_capacity(self.nvars() * monomials.len());
        for c in &self.comps {
            for m in monomials {
                out.push(c.coeff(m));
            }
        }
        out
    }

    /// Inverse of [`VectorFieldJet::coordinates`].
    pub fn from_coordinates(n: usize, order: u32, monomials: &[Monomial], coords: &[S]) -> Self {
        let comps = (0..n)
            .map(|i| {
                Jet::from_terms(
                    n,
                    order,
                    monomials
                        .iter()
                        .zip(&coords[i * monomials.len()..(i + 1) * monomials.len()])
                        .map(|(m, c)| (m.clone(), c.clone())),
                )
            })
            .collect();
        VectorFieldJet { comps }
    }
}

/// `[v, w]`.
pub fn bracket_vf<S: Scalar>(v: &VectorFieldJet<S>, w: &VectorFieldJet<S>) -> Result<VectorFieldJet<S>> {
    v.bracket(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn vf(s: &[&str], order: u32) -> VectorFieldJet<Rational> {
        let n = s.len();
        VectorFieldJet::new(s.iter().map(|c| Jet::parse(c, n, order).unwrap()).collect()).unwrap()
    }

    #[test]
    fn bracket_examples() {
        // [x ∂y, y ∂x] = x ∂x - y ∂y
        let a = vf(&["0", "x1"], 3);
        let b = vf(&["x2", "0"], 3);
        assert_eq!(a.bracket(&b).unwrap(), vf(&["x1", "-x2"], 3));
        assert!(a.bracket(&a).unwrap().is_zero());
    }

    #[test]
    fn pushforward_by_identity_and_linear_map() {
        let v = vf(&["x2 + x1^2", "-x1"], 3);
        assert_eq!(v.pushforward(&PolyMap::identity(2, 3)).unwrap(), v);
        let a: Matrix<Rational> = Matrix::from_int_rows(&[&[0, 1], &[-1, 0]]);
        let l = Matrix::from_int_rows(&[&[2, 1], &[1, 1]]);
        let lin = VectorFieldJet::linear(&a, 3);
        let pushed = lin.pushforward(&PolyMap::linear(&l, 3)).unwrap();
        let expect = l.mul(&a).mul(&l.inverse().unwrap());
        assert_eq!(pushed, VectorFieldJet::linear(&expect, 3));
    }

    #[test]
    fn mismatched_shapes() {
        let a = vf(&["x1"], 3);
        let b = vf(&["x1", "x2"], 3);
        assert!(a.bracket(&b).is_err());
    }
}
