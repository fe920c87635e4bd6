//! Lie algebras given by structure constants and their representations by
//! polynomial vector fields.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::VectorFieldJet;
use crate::jet::Jet;
use crate::linalg::Matrix;
use crate::polymap::PolyMap;
use crate::scalar::Scalar;

/// `[e_i, e_j] = Σ_k c_ij^k e_k`.
#[derive(Clone, PartialEq, Debug)]
pub struct LieAlgebra<S> {
    names: Vec<String>,
    c: Vec<S>,
}

/// Violations found by [`LieAlgebra::check`].
#[derive(Clone, PartialEq, Debug, Default)]
pub struct AlgebraCheck {
    /// `(i, j, k)` with `c_ij^k + c_ji^k != 0`.
    pub antisymmetry: Vec<(usize, usize, usize)>,
    /// `(i, j, k, l)`: the `e_l` coefficient of the Jacobiator of `e_i, e_j, e_k`.
    pub jacobi: Vec<(usize, usize, usize, usize)>,
}

impl AlgebraCheck {
    pub fn is_ok(&self) -> bool {
        self.antisymmetry.is_empty() && self.jacobi.is_empty()
    }
}

impl<S: Scalar> LieAlgebra<S> {
    pub fn zero(dim: usize) -> Self {
        LieAlgebra {
            names: (1..=dim).map(|i| format!("e{i}")).collect(),
            c: vec![S::zero(); dim * dim * dim],
        }
    }

    /// Builds an algebra from `(i, j, k, c_ij^k)` entries taken literally;
    /// unlisted constants are zero.
    pub fn from_constants(dim: usize, entries: impl IntoIterator<Item = (usize, usize, usize, S)>) -> Result<Self> {
        let mut g = Self::zero(dim);
        for (i, j, k, v) in entries {
            let bad = [i, j, k].into_iter().find(|&x| x >= dim);
            if let Some(b) = bad {
                return Err(Error::Dimension {
                    op: "lie_algebra",
                    expected: dim,
                    found: b + 1,
                });
            }
            g.set(i, j, k, v);
        }
        Ok(g)
    }

    /// Sets `c_ij^k` and `c_ji^k = -c_ij^k`.
    pub fn with_bracket(mut self, i: usize, j: usize, k: usize, v: S) -> Self {
        self.set(i, j, k, v.clone());
        self.set(j, i, k, -v);
        self
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.dim());
        self.names = names;
        self
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: S) {
        let d = self.dim();
        self.c[(i * d + j) * d + k] = v;
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> &S {
        let d = self.dim();
        &self.c[(i * d + j) * d + k]
    }

    /// All nonzero `(i, j, k, c_ij^k)`.
    pub fn constants(&self) -> Vec<(usize, usize, usize, S)> {
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = self.c(i, j, k);
                    if !v.is_zero() {
                        out.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        out
    }

    /// Bracket of coordinate vectors.
    pub fn bracket(&self, x: &[S], y: &[S]) -> Vec<S> {
        let d = self.dim();
        let mut out = vec![S::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                let xy = x[i].clone() * y[j].clone();
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.c(i, j, k);
                    if !c.is_zero() {
                        *o = o.clone() + xy.clone() * c.clone();
                    }
                }
            }
        }
        out
    }

    pub fn check(&self) -> AlgebraCheck {
        let d = self.dim();
        let mut report = AlgebraCheck::default();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if !(self.c(i, j, k).clone() + self.c(j, i, k).clone()).is_negligible() {
                        report.antisymmetry.push((i, j, k));
                    }
                }
            }
        }
        let e = |i: usize| -> Vec<S> {
            let mut v = vec![S::zero(); d];
            v[i] = S::one();
            v
        };
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let a = self.bracket(&e(i), &self.bracket(&e(j), &e(k)));
                    let b = self.bracket(&e(j), &self.bracket(&e(k), &e(i)));
                    let c = self.bracket(&e(k), &self.bracket(&e(i), &e(j)));
                    for l in 0..d {
                        let s = a[l].clone() + b[l].clone() + c[l].clone();
                        if !s.is_negligible() {
                            report.jacobi.push((i, j, k, l));
                        }
                    }
                }
            }
        }
        report
    }

    /// `ad(e_i)` with `ad(e_i)[k][j] = c_ij^k`.
    pub fn ad(&self, i: usize) -> Matrix<S> {
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                m[(k, j)] = self.c(i, j, k).clone();
            }
        }
        m
    }

    /// `B(e_i, e_j) = tr(ad e_i ad e_j)`.
    pub fn killing_form(&self) -> Matrix<S> {
        let d = self.dim();
        let ads: Vec<Matrix<S>> = (0..d).map(|i| self.ad(i)).collect();
        let mut b = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                b[(i, j)] = ads[i].mul(&ads[j]).trace();
            }
        }
        b
    }

    /// Cartan's criterion: the Killing form is nondegenerate.
    pub fn is_semisimple(&self) -> bool {
        let d = self.dim();
        d > 0 && self.killing_form().rank() == d
    }

    /// Structure constants in the basis `f_a = Σ_i p[i][a] e_i`.
    pub fn change_basis(&self, p: &Matrix<S>) -> Result<Self> {
        let d = self.dim();
        let pinv = p.inverse().ok_or(Error::NonInvertible { op: "change_basis" })?;
        let mut g = Self::zero(d);
        for a in 0..d {
            for b in 0..d {
                let br = self.bracket(&p.column(a), &p.column(b));
                let coords = pinv.mul_vec(&br);
                for (k, v) in coords.into_iter().enumerate() {
                    g.set(a, b, k, v);
                }
            }
        }
        Ok(g)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (d1, d2) = (self.dim(), other.dim());
        let mut g = Self::zero(d1 + d2);
        for (i, j, k, v) in self.constants() {
            g.set(i, j, k, v);
        }
        for (i, j, k, v) in other.constants() {
            g.set(d1 + i, d1 + j, d1 + k, v);
        }
        let mut names = self.names.clone();
        names.extend(other.names.iter().map(|n| format!("{n}'")));
        debug_assert_eq!(names.len(), d1 + d2);
        g.names = names;
        g
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LieAlgebra<T> {
        LieAlgebra {
            names: self.names.clone(),
            c: self.c.iter().map(f).collect(),
        }
    }
}

/// sl(2,R) in the basis `X, Y, Z` with `[X,Y] = -Z`, `[Z,X] = Y`, `[Z,Y] = -X`.
pub fn sl2<S: Scalar>() -> LieAlgebra<S> {
    let one = S::one;
    LieAlgebra::zero(3)
        .with_bracket(0, 1, 2, -one())
        .with_bracket(2, 0, 1, one())
        .with_bracket(2, 1, 0, -one())
        .with_names(["X", "Y", "Z"].iter().map(|s| String::from(*s)).collect())
}

pub fn abelian<S: Scalar>(dim: usize) -> LieAlgebra<S> {
    LieAlgebra::zero(dim)
}

/// A Lie algebra together with one vector field per basis element.
#[derive(Clone, PartialEq, Debug)]
pub struct Representation<S> {
    algebra: LieAlgebra<S>,
    fields: Vec<VectorFieldJet<S>>,
}

impl<S: Scalar> Representation<S> {
    pub fn new(algebra: LieAlgebra<S>, fields: Vec<VectorFieldJet<S>>) -> Result<Self> {
        if fields.len() != algebra.dim() {
            return Err(Error::Dimension {
                op: "representation",
                expected: algebra.dim(),
                found: fields.len(),
            });
        }
        if let Some(f) = fields.first() {
            for g in &fields {
                if g.nvars() != f.nvars() || g.order() != f.order() {
                    return Err(Error::Dimension {
                        op: "representation",
                        expected: f.nvars(),
                        found: g.nvars(),
                    });
                }
            }
        }
        if let Some(i) = fields.iter().position(|f| !f.vanishes_at_origin()) {
            return Err(Error::Invalid {
                op: "representation",
                reason: format!("field {i} does not vanish at the origin"),
            });
        }
        Ok(Representation { algebra, fields })
    }

    /// The linear representation `e_i -> A_i x`.
    pub fn linear(algebra: LieAlgebra<S>, lp: &LinearPart<S>, order: u32) -> Result<Self> {
        let fields = lp.mats.iter().map(|a| VectorFieldJet::linear(a, order)).collect();
        Self::new(algebra, fields)
    }

    pub fn algebra(&self) -> &LieAlgebra<S> {
        &self.algebra
    }

    pub fn fields(&self) -> &[VectorFieldJet<S>] {
        &self.fields
    }

    pub fn nvars(&self) -> usize {
        self.fields.first().map_or(0, VectorFieldJet::nvars)
    }

    pub fn order(&self) -> u32 {
        self.fields.first().map_or(0, VectorFieldJet::order)
    }

    pub fn with_order(&self, order: u32) -> Self {
        Representation {
            algebra: self.algebra.clone(),
            fields: self.fields.iter().map(|f| f.with_order(order)).collect(),
        }
    }

    pub fn is_linear(&self) -> bool {
        self.fields.iter().all(VectorFieldJet::is_linear)
    }
}

/// Result of [`check_representation`].
#[derive(Clone, PartialEq, Debug)]
pub struct RepCheck<S> {
    /// Jet order at which the relations were checked.
    pub order: u32,
    /// Largest coefficient of `Σ_k c_ij^k ρ(e_k) - [ρ(e_i), ρ(e_j)]`.
    pub residual: S,
    /// Per pair `i < j`.
    pub pairs: Vec<((usize, usize), S)>,
}

impl<S: Scalar> RepCheck<S> {
    pub fn is_ok(&self) -> bool {
        self.residual.is_negligible()
    }
}

/// `Σ_k c_ij^k ρ(e_k) - [ρ(e_i), ρ(e_j)]`.
pub fn relation_defect<S: Scalar>(r: &Representation<S>, i: usize, j: usize) -> VectorFieldJet<S> {
    let f = &r.fields;
    let br = f[i].bracket(&f[j]).expect("representation fields share a shape");
    let mut acc = VectorFieldJet::zero(r.nvars(), r.order());
    for (k, fk) in f.iter().enumerate() {
        let c = r.algebra.c(i, j, k);
        if !c.is_zero() {
            acc = acc.add(&fk.scale(c));
        }
    }
    acc.sub(&br)
}

pub fn check_representation<S: Scalar>(r: &Representation<S>) -> RepCheck<S> {
    let d = r.algebra.dim();
    let mut pairs = Vec::new();
    let mut residual = S::zero();
    for i in 0..d {
        for j in i + 1..d {
            let m = relation_defect(r, i, j).max_abs_coeff();
            if m > residual {
                residual = m.clone();
            }
            pairs.push(((i, j), m));
        }
    }
    RepCheck {
        order: r.order(),
        residual,
        pairs,
    }
}

/// Degree-one coefficient matrices of the generators.
///
/// The linear fields `x -> A_i x` satisfy the algebra relations under the
/// vector-field bracket; for the matrices themselves this reads
/// `[A_i, A_j] = -Σ_k c_ij^k A_k`.
#[derive(Clone, PartialEq, Debug)]
pub struct LinearPart<S> {
    pub mats: Vec<Matrix<S>>,
}

impl<S: Scalar> LinearPart<S> {
    pub fn new(mats: Vec<Matrix<S>>) -> Self {
        LinearPart { mats }
    }

    pub fn nvars(&self) -> usize {
        self.mats.first().map_or(0, Matrix::rows)
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// Linear generator fields at the given order.
    pub fn fields(&self, order: u32) -> Vec<VectorFieldJet<S>> {
        self.mats.iter().map(|a| VectorFieldJet::linear(a, order)).collect()
    }

    /// Largest entry of `[A_i, A_j] + Σ_k c_ij^k A_k` over all pairs.
    pub fn relation_residual(&self, g: &LieAlgebra<S>) -> S {
        let d = self.mats.len();
        let mut worst = S::zero();
        for i in 0..d {
            for j in i + 1..d {
                let mut m = self.mats[i].commutator(&self.mats[j]);
                for k in 0..d {
                    let c = g.c(i, j, k);
                    if !c.is_zero() {
                        m = m.add(&self.mats[k].scale(c));
                    }
                }
                let a = m.max_abs();
                if a > worst {
                    worst = a;
                }
            }
        }
        worst
    }

    /// `L A_i L⁻¹` for every generator.
    pub fn conjugate(&self, l: &Matrix<S>) -> Result<Self> {
        let linv = l.inverse().ok_or(Error::NonInvertible { op: "conjugate" })?;
        Ok(LinearPart {
            mats: self.mats.iter().map(|a| l.mul(a).mul(&linv)).collect(),
        })
    }
}

pub fn linear_part<S: Scalar>(r: &Representation<S>) -> LinearPart<S> {
    LinearPart {
        mats: r.fields.iter().map(VectorFieldJet::linear_part).collect(),
    }
}

/// Pushes every generator forward by `m`.
pub fn pushforward_rep<S: Scalar>(r: &Representation<S>, m: &PolyMap<S>) -> Result<Representation<S>> {
    let Some(first) = r.fields.first() else {
        return Ok(r.clone());
    };
    let n = first.nvars();
    if m.source_dim() != n || m.target_dim() != n {
        return Err(Error::Dimension {
            op: "pushforward",
            expected: n,
            found: m.source_dim(),
        });
    }
    let m = m.with_order(first.order());
    let inv = m.inverse()?;
    let fields = r.fields.iter().map(|f| f.pushforward_with_inverse(&m, &inv)).collect();
    Ok(Representation {
        algebra: r.algebra.clone(),
        fields,
    })
}

/// The linear sl(2,R) action on R³ preserving `x² + y² - z²`:
/// `ρ(X) = y∂z + z∂y`, `ρ(Y) = x∂z + z∂x`, `ρ(Z) = x∂y - y∂x`.
pub fn sl2_linear_rep<S: Scalar>(order: u32) -> Representation<S> {
    let v = |i: usize| Jet::var(3, order, i);
    let z = || Jet::zero(3, order);
    let fields = vec![
        VectorFieldJet::new(vec![z(), v(2), v(1)]).unwrap(),
        VectorFieldJet::new(vec![v(2), z(), v(0)]).unwrap(),
        VectorFieldJet::new(vec![-v(1), v(0), z()]).unwrap(),
    ];
    Representation::new(sl2(), fields).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    type Q = Rational;

    #[test]
    fn sl2_is_a_semisimple_lie_algebra() {
        let g = sl2::<Q>();
        assert!(g.check().is_ok());
        assert!(g.is_semisimple());
        assert_eq!(g.killing_form()[(2, 2)], Q::from_i64(-2));
        let ad_z = g.ad(2);
        let sq = ad_z.mul(&ad_z);
        let mut expect = Matrix::<Q>::zeros(3, 3);
        expect[(0, 0)] = Q::from_i64(-1);
        expect[(1, 1)] = Q::from_i64(-1);
        assert_eq!(sq, expect);
    }

    #[test]
    fn broken_antisymmetry_is_reported() {
        let g = LieAlgebra::<Q>::from_constants(2, [(0, 1, 0, Q::from_i64(1)), (1, 0, 0, Q::from_i64(1))]).unwrap();
        assert!(!g.check().antisymmetry.is_empty());
        assert!(abelian::<Q>(3).check().is_ok());
    }

    #[test]
    fn semisimplicity_examples() {
        assert!(!abelian::<Q>(1).is_semisimple());
        assert!(sl2::<Q>().direct_sum(&sl2()).is_semisimple());
    }

    #[test]
    fn linear_fields_satisfy_relations() {
        let r = sl2_linear_rep::<Q>(3);
        assert!(check_representation(&r).is_ok());
        let f = r.fields();
        assert_eq!(f[0].bracket(&f[1]).unwrap(), f[2].scale(&Q::from_i64(-1)));
        assert_eq!(f[2].bracket(&f[0]).unwrap(), f[1]);
        assert_eq!(f[2].bracket(&f[1]).unwrap(), f[0].scale(&Q::from_i64(-1)));
    }

    #[test]
    fn flipped_generator_breaks_relations() {
        let r = sl2_linear_rep::<Q>(3);
        let mut fields = r.fields().to_vec();
        fields[2] = fields[2].scale(&Q::from_i64(-1));
        let bad = Representation::new(sl2(), fields).unwrap();
        assert!(!check_representation(&bad).is_ok());
    }

    #[test]
    fn linear_part_matrices() {
        let lp = linear_part(&sl2_linear_rep::<Q>(2));
        let az = Matrix::<Q>::from_int_rows(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 0]]);
        let ax = Matrix::<Q>::from_int_rows(&[&[0, 0, 0], &[0, 0, 1], &[0, 1, 0]]);
        let ay = Matrix::<Q>::from_int_rows(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]]);
        assert_eq!(lp.mats, vec![ax, ay, az]);
        assert!(lp.relation_residual(&sl2()).is_zero());
    }
}
