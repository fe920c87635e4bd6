//! Formal map germs fixing the origin.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::{Jet, Substitution};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// A polynomial map `R^m -> R^n` with every component vanishing at 0.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyMap<S> {
    comps: Vec<Jet<S>>,
}

impl<S: Scalar> PolyMap<S> {
    pub fn new(comps: Vec<Jet<S>>) -> Result<Self> {
        let Some(first) = comps.first() else {
            return Ok(PolyMap { comps });
        };
        let (nv, order) = (first.nvars(), first.order());
        for (k, c) in comps.iter().enumerate() {
            if c.nvars() != nv {
                return Err(Error::Dimension {
                    op: "polymap",
                    expected: nv,
                    found: c.nvars(),
                });
            }
            if c.order() != order {
                return Err(Error::Dimension {
                    op: "polymap",
                    expected: order as usize,
                    found: c.order() as usize,
                });
            }
            if !c.constant_term().is_zero() {
                return Err(Error::InvalidMap {
                    op: "polymap",
                    component: k,
                });
            }
        }
        Ok(PolyMap { comps })
    }

    pub fn identity(n: usize, order: u32) -> Self {
        PolyMap {
            comps: (0..n).map(|i| Jet::var(n, order, i)).collect(),
        }
    }

    /// `x -> M x`.
    pub fn linear(m: &Matrix<S>, order: u32) -> Self {
        let n = m.cols();
        PolyMap {
            comps: (0..m.rows())
                .map(|i| {
                    let mut j = Jet::zero(n, order);
                    for k in 0..n {
                        j = &j + &Jet::var(n, order, k).scale(&m[(i, k)]);
                    }
                    j
                })
                .collect(),
        }
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

    pub fn source_dim(&self) -> usize {
        self.comps.first().map_or(0, Jet::nvars)
    }

    pub fn target_dim(&self) -> usize {
        self.comps.len()
    }

    pub fn order(&self) -> u32 {
        self.comps.first().map_or(0, Jet::order)
    }

    pub fn with_order(&self, order: u32) -> Self {
        PolyMap {
            comps: self.comps.iter().map(|c| c.with_order(order)).collect(),
        }
    }

    /// Degree-one coefficient matrix (`target x source`).
    pub fn linear_part(&self) -> Matrix<S> {
        let mut m = Matrix::zeros(self.target_dim(), self.source_dim());
        for (i, c) in self.comps.iter().enumerate() {
            for j in 0..self.source_dim() {
                m[(i, j)] = c.linear_coeff(j);
            }
        }
        m
    }

    pub fn has_identity_linear_part(&self) -> bool {
        self.target_dim() == self.source_dim()
            && self.linear_part() == Matrix::identity(self.source_dim())
    }

    /// `self ∘ inner`, truncated at `self.order()`.
    pub fn compose(&self, inner: &PolyMap<S>) -> Result<Self> {
        if inner.target_dim() != self.source_dim() {
            return Err(Error::Dimension {
                op: "polymap_compose",
                expected: self.source_dim(),
                found: inner.target_dim(),
            });
        }
        let order = self.order();
        let args: Vec<Jet<S>> = inner.comps.iter().map(|c| c.with_order(order)).collect();
        let nv = inner.source_dim();
        Ok(PolyMap {
            comps: {
                let mut sub = Substitution::new(&args, nv, order);
                self.comps.iter().map(|c| sub.apply(c)).collect()
            },
        })
    }

    /// Pulls a function back: `f ∘ self`.
    pub fn pull_function(&self, f: &Jet<S>) -> Result<Jet<S>> {
        f.compose(&self.comps)
    }

    /// Formal inverse, via the fixed point `g = L⁻¹ (y - N(g))`.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.source_dim();
        if self.target_dim() != n {
            return Err(Error::Dimension {
                op: "polymap_inverse",
                expected: n,
                found: self.target_dim(),
            });
        }
        let order = self.order();
        let lin = self.linear_part();
        let lin_inv = lin.inverse().ok_or(Error::NonInvertible {
            op: "polymap_inverse",
        })?;
        let nonlinear: Vec<Jet<S>> = self.comps.iter().map(|c| c.degree_range(2, order)).collect();
        let mut g: Vec<Jet<S>> = PolyMap::linear(&lin_inv, 1).comps;
        // degree k of the inverse only sees degrees < k of the previous pass
        for k in 2..=order {
            let args: Vec<Jet<S>> = g.iter().map(|c| c.with_order(k)).collect();
            let mut sub = Substitution::new(&args, n, k);
            let rhs: Vec<Jet<S>> = nonlinear
                .iter()
                .enumerate()
                .map(|(i, c)| &Jet::var(n, k, i) - &sub.apply(&c.with_order(k)))
                .collect();
            g = (0..n)
                .map(|i| {
                    let mut acc = Jet::zero(n, k);
                    for (j, r) in rhs.iter().enumerate() {
                        if !lin_inv[(i, j)].is_zero() {
                            acc = &acc + &r.scale(&lin_inv[(i, j)]);
                        }
                    }
                    acc
                })
                .collect();
        }
        let g = PolyMap {
            comps: g.iter().map(|c| c.with_order(order)).collect(),
        };
        Ok(g)
    }

    /// Jacobian entries `∂ m^i / ∂ x_j`.
    pub fn jacobian(&self) -> Vec<Vec<Jet<S>>> {
        self.comps.iter().map(Jet::gradient).collect()
    }

    pub fn eval(&self, point: &[S]) -> Vec<S> {
        self.comps.iter().map(|c| c.eval(point)).collect()
    }

    /// Largest coefficient of `self - other`.
    pub fn distance(&self, other: &Self) -> S {
        let mut best = S::zero();
        for (a, b) in self.comps.iter().zip(&other.comps) {
            let d = (a - b).max_abs_coeff();
            if d > best {
                best = d;
            }
        }
        best
    }
}

/// `m1 ∘ m2`.
pub fn polymap_compose<S: Scalar>(m1: &PolyMap<S>, m2: &PolyMap<S>) -> Result<PolyMap<S>> {
    m1.compose(m2)
}

pub fn polymap_inverse<S: Scalar>(m: &PolyMap<S>) -> Result<PolyMap<S>> {
    m.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn map(s: &[&str], order: u32) -> PolyMap<Rational> {
        let n = s.len();
        PolyMap::new(s.iter().map(|c| Jet::parse(c, n, order).unwrap()).collect()).unwrap()
    }

    #[test]
    fn inverse_examples() {
        let id = PolyMap::<Rational>::identity(2, 3);
        assert_eq!(id.inverse().unwrap(), id);
        let m = map(&["x1 + x1^2"], 3);
        let inv = m.inverse().unwrap();
        assert_eq!(inv, map(&["x1 - x1^2 + 2*x1^3"], 3));
        assert_eq!(m.compose(&inv).unwrap(), PolyMap::identity(1, 3));
        let lin = map(&["2*x1 + x2", "x1 + x2"], 3);
        assert_eq!(lin.inverse().unwrap(), map(&["x1 - x2", "-x1 + 2*x2"], 3));
    }

    #[test]
    fn singular_linear_part_is_rejected() {
        let m = map(&["x1 + x2", "x1 + x2 + x1^2"], 3);
        assert!(matches!(m.inverse(), Err(Error::NonInvertible { .. })));
    }

    #[test]
    fn constant_terms_rejected() {
        let c = Jet::<Rational>::parse("1 + x1", 1, 2).unwrap();
        assert!(matches!(PolyMap::new(alloc::vec![c]), Err(Error::InvalidMap { .. })));
    }
}
