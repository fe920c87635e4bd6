//! Closed-form vector fields evaluated at points, including the flat
//! function `a(s) = exp(-1/s)` for `s > 0` and `0` otherwise.
//!
//! These fields differ from their Taylor jets, so brackets and orbit
//! dimensions are checked pointwise in floating point.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::lie::LieAlgebra;
use crate::linalg::{svd_rank, RANK_REL_TOL};
use crate::scalar::Scalar;

/// `a(s) = exp(-1/s)` for `s > 0`, else `0`.
pub fn flat(s: f64) -> f64 {
    flat_over_power(s, 0)
}

/// `a(s) / s^k`, computed in log space so that tiny `s` underflows to 0.
pub fn flat_over_power(s: f64, k: u32) -> f64 {
    if !(s > 0.0) {
        return 0.0;
    }
    let l = -1.0 / s - k as f64 * libm::log(s);
    if l < -745.0 {
        0.0
    } else {
        libm::exp(l)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Powi(Expr, u32),
    /// `a(arg) / arg^k`.
    Flat(Expr, u32),
}

/// Expression tree over the coordinates of a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Self {
        Self::node(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(i: usize) -> Self {
        Self::node(Node::Var(i))
    }

    fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == 0.0 => other.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => Self::node(Node::Add(self.clone(), other.clone())),
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (Some(a), _) if a == 0.0 => other.neg(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => Self::node(Node::Sub(self.clone(), other.clone())),
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::zero(),
            (Some(a), _) if a == 1.0 => other.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => Self::node(Node::Mul(self.clone(), other.clone())),
        }
    }

    pub fn div(&self, other: &Expr) -> Expr {
        match (self.as_const(), other.as_const()) {
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => Self::node(Node::Div(self.clone(), other.clone())),
        }
    }

    pub fn neg(&self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(e) => e.clone(),
            _ => Self::node(Node::Neg(self.clone())),
        }
    }

    pub fn powi(&self, k: u32) -> Expr {
        match k {
            0 => Expr::one(),
            1 => self.clone(),
            _ => match self.as_const() {
                Some(c) => Expr::constant(libm::pow(c, k as f64)),
                None => Self::node(Node::Powi(self.clone(), k)),
            },
        }
    }

    /// The flat function applied to `self`.
    pub fn flat(&self) -> Expr {
        self.flat_over_power(0)
    }

    pub fn flat_over_power(&self, k: u32) -> Expr {
        Self::node(Node::Flat(self.clone(), k))
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr::constant(c).mul(self)
    }

    /// Partial derivative, using `a'(s) = a(s) / s²`.
    pub fn derivative(&self, i: usize) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.derivative(i).add(&b.derivative(i)),
            Node::Sub(a, b) => a.derivative(i).sub(&b.derivative(i)),
            Node::Mul(a, b) => a.derivative(i).mul(b).add(&a.mul(&b.derivative(i))),
            Node::Div(a, b) => {
                let da = a.derivative(i);
                let db = b.derivative(i);
                if db.is_zero() {
                    return da.div(b);
                }
                da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
            }
            Node::Neg(a) => a.derivative(i).neg(),
            Node::Powi(a, k) => a.powi(k - 1).scale(*k as f64).mul(&a.derivative(i)),
            Node::Flat(s, k) => {
                let ds = s.derivative(i);
                if ds.is_zero() {
                    return Expr::zero();
                }
                let inner = s
                    .flat_over_power(k + 2)
                    .sub(&s.flat_over_power(k + 1).scale(*k as f64));
                inner.mul(&ds)
            }
        }
    }

    /// Value at `pt`. A zero denominator is allowed only over a zero
    /// numerator, in which case the quotient is 0.
    pub fn eval(&self, pt: &[f64]) -> Result<f64> {
        Ok(match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(j) => pt[*j],
            Node::Add(a, b) => a.eval(pt)? + b.eval(pt)?,
            Node::Sub(a, b) => a.eval(pt)? - b.eval(pt)?,
            Node::Mul(a, b) => {
                let x = a.eval(pt)?;
                if x == 0.0 {
                    0.0
                } else {
                    x * b.eval(pt)?
                }
            }
            Node::Div(a, b) => {
                let num = a.eval(pt)?;
                if num == 0.0 {
                    return Ok(0.0);
                }
                let den = b.eval(pt)?;
                if den == 0.0 {
                    return Err(Error::Singularity { op: "eval_field" });
                }
                num / den
            }
            Node::Neg(a) => -a.eval(pt)?,
            Node::Powi(a, k) => libm::pow(a.eval(pt)?, *k as f64),
            Node::Flat(s, k) => flat_over_power(s.eval(pt)?, *k),
        })
    }

    /// Taylor jet at the origin. Flat factors contribute nothing when
    /// their argument vanishes at the origin or is negative there.
    pub fn taylor<S: Scalar>(&self, nvars: usize, order: u32) -> Result<Jet<S>> {
        Ok(match &*self.0 {
            Node::Const(c) => Jet::constant(
                nvars,
                order,
                S::from_f64(*c).ok_or(Error::Singularity { op: "taylor" })?,
            ),
            Node::Var(j) => Jet::var(nvars, order, *j),
            Node::Add(a, b) => &a.taylor(nvars, order)? + &b.taylor(nvars, order)?,
            Node::Sub(a, b) => &a.taylor(nvars, order)? - &b.taylor(nvars, order)?,
            Node::Mul(a, b) => {
                let ta = a.taylor(nvars, order)?;
                if ta.is_zero() {
                    return Ok(ta);
                }
                &ta * &b.taylor(nvars, order)?
            }
            Node::Div(a, b) => {
                let num = a.taylor::<S>(nvars, order)?;
                if num.is_zero() {
                    return Ok(num);
                }
                let den = b.taylor::<S>(nvars, order)?;
                let c = den.constant_term();
                if c.is_zero() {
                    return Err(Error::Singularity { op: "taylor" });
                }
                let inv = crate::jetmat::inverse(&vec![vec![den]])?;
                &num * &inv[0][0]
            }
            Node::Neg(a) => -a.taylor::<S>(nvars, order)?,
            Node::Powi(a, k) => a.taylor::<S>(nvars, order)?.pow(*k),
            Node::Flat(s, _) => {
                let ts = s.taylor::<S>(nvars, order)?;
                if ts.constant_term() > S::zero() {
                    return Err(Error::Singularity { op: "taylor" });
                }
                Jet::zero(nvars, order)
            }
        })
    }

    /// Polynomial expression of a jet.
    pub fn from_jet<S: Scalar>(j: &Jet<S>) -> Expr {
        let mut acc = Expr::zero();
        for (m, c) in j.terms() {
            let mut t = Expr::constant(c.to_f64());
            for (v, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t = t.mul(&Expr::var(v).powi(e as u32));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(j) => write!(f, "x{}", j + 1),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/({b})"),
            Node::Neg(a) => write!(f, "-{a}"),
            Node::Powi(a, k) => write!(f, "{a}^{k}"),
            Node::Flat(s, 0) => write!(f, "a({s})"),
            Node::Flat(s, k) => write!(f, "a({s})/({s})^{k}"),
        }
    }
}

/// A vector field whose components are expressions.
#[derive(Clone, Debug)]
pub struct ExprField {
    nvars: usize,
    comps: Vec<Expr>,
    jacobian: Vec<Vec<Expr>>,
}

impl ExprField {
    pub fn new(comps: Vec<Expr>) -> Self {
        let nvars = comps.len();
        let jacobian = comps
            .iter()
            .map(|c| (0..nvars).map(|j| c.derivative(j)).collect())
            .collect();
        ExprField { nvars, comps, jacobian }
    }

    pub fn from_jets<S: Scalar>(comps: &[Jet<S>]) -> Self {
        Self::new(comps.iter().map(Expr::from_jet).collect())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    /// Symbolic `∂F^i/∂x_j`.
    pub fn jacobian_exprs(&self) -> &[Vec<Expr>] {
        &self.jacobian
    }

    pub fn eval(&self, pt: &[f64]) -> Result<Vec<f64>> {
        self.comps.iter().map(|c| c.eval(pt)).collect()
    }

    pub fn jacobian(&self, pt: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.jacobian
            .iter()
            .map(|row| row.iter().map(|e| e.eval(pt)).collect())
            .collect()
    }

    pub fn taylor<S: Scalar>(&self, order: u32) -> Result<crate::field::VectorFieldJet<S>> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.taylor(self.nvars, order))
            .collect::<Result<Vec<_>>>()?;
        crate::field::VectorFieldJet::new(comps)
    }
}

pub fn eval_field(f: &ExprField, pt: &[f64]) -> Result<Vec<f64>> {
    f.eval(pt)
}

pub fn jacobian(f: &ExprField, pt: &[f64]) -> Result<Vec<Vec<f64>>> {
    f.jacobian(pt)
}

fn x() -> Expr {
    Expr::var(0)
}
fn y() -> Expr {
    Expr::var(1)
}
fn z() -> Expr {
    Expr::var(2)
}

/// `x∂x + y∂y + z∂z` scaled by `f`.
fn radial_times(f: &Expr) -> [Expr; 3] {
    [f.mul(&x()), f.mul(&y()), f.mul(&z())]
}

fn add3(a: [Expr; 3], b: [Expr; 3]) -> Vec<Expr> {
    a.iter().zip(b.iter()).map(|(p, q)| p.add(q)).collect()
}

/// The linear sl(2,R) fields `ρ(X), ρ(Y), ρ(Z)` on R³.
pub fn sl2_linear_fields() -> Vec<ExprField> {
    vec![
        ExprField::new(vec![Expr::zero(), z(), y()]),
        ExprField::new(vec![z(), Expr::zero(), x()]),
        ExprField::new(vec![y().neg(), x(), Expr::zero()]),
    ]
}

fn linear_parts() -> [[Expr; 3]; 3] {
    [
        [Expr::zero(), z(), y()],
        [z(), Expr::zero(), x()],
        [y().neg(), x(), Expr::zero()],
    ]
}

/// `r² - z²` with `r² = x² + y²`.
fn cone_arg() -> Expr {
    r2().sub(&z().powi(2))
}

fn r2() -> Expr {
    x().powi(2).add(&y().powi(2))
}

/// Perturbed fields `ρ(X) + fR`, `ρ(Y) + gR`, `ρ(Z)` with
/// `f = x a(r² - z²)/r²`, `g = -y a(r² - z²)/r²`.
pub fn cairns_ghys_fields() -> Vec<ExprField> {
    let big_a = cone_arg().flat().div(&r2());
    let f = x().mul(&big_a);
    let g = y().mul(&big_a).neg();
    let [lx, ly, lz] = linear_parts();
    vec![
        ExprField::new(add3(lx, radial_times(&f))),
        ExprField::new(add3(ly, radial_times(&g))),
        ExprField::new(lz.to_vec()),
    ]
}

/// The earlier perturbation in which `ρ(Z)` is also deformed:
/// `ρ(X) + (xz/r²) a R`, `ρ(Y) - (yz/r²) a R`, `ρ(Z) + a R`, with
/// `a = a(r² - z²)`.
pub fn gs_remark_fields() -> Vec<ExprField> {
    let a = cone_arg().flat();
    let fx = x().mul(&z()).mul(&a).div(&r2());
    let fy = y().mul(&z()).mul(&a).div(&r2()).neg();
    let [lx, ly, lz] = linear_parts();
    vec![
        ExprField::new(add3(lx, radial_times(&fx))),
        ExprField::new(add3(ly, radial_times(&fy))),
        ExprField::new(add3(lz, radial_times(&a))),
    ]
}

/// Cotangent lift on `(q, p)`: `F^j(q) ∂q_j - Σ_j p_j ∂_i F^j(q) ∂p_i`.
pub fn lifted(f: &ExprField) -> ExprField {
    let n = f.nvars();
    let mut comps: Vec<Expr> = f.comps().to_vec();
    for i in 0..n {
        let mut acc = Expr::zero();
        for j in 0..n {
            let d = &f.jacobian_exprs()[j][i];
            if !d.is_zero() {
                acc = acc.sub(&Expr::var(n + j).mul(d));
            }
        }
        comps.push(acc);
    }
    ExprField::new(comps)
}

/// `[F, G](pt) = DG·F - DF·G`.
pub fn bracket_at(f: &ExprField, g: &ExprField, pt: &[f64]) -> Result<Vec<f64>> {
    let (fv, gv) = (f.eval(pt)?, g.eval(pt)?);
    let (jf, jg) = (f.jacobian(pt)?, g.jacobian(pt)?);
    let n = f.nvars();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|k| jg[i][k] * fv[k] - jf[i][k] * gv[k])
                .sum::<f64>()
        })
        .collect())
}

/// Largest `|[F_i,F_j](pt) - Σ_k c_ij^k F_k(pt)|` over pairs and points.
pub fn bracket_residual_numeric(fields: &[ExprField], g: &LieAlgebra<f64>, pts: &[Vec<f64>]) -> Result<f64> {
    let d = fields.len();
    let mut worst = 0.0f64;
    for pt in pts {
        let values: Vec<Vec<f64>> = fields.iter().map(|f| f.eval(pt)).collect::<Result<_>>()?;
        for i in 0..d {
            for j in i + 1..d {
                let mut r = bracket_at(&fields[i], &fields[j], pt)?;
                for (k, vk) in values.iter().enumerate() {
                    let c = *g.c(i, j, k);
                    if c != 0.0 {
                        for (ri, v) in r.iter_mut().zip(vk) {
                            *ri -= c * v;
                        }
                    }
                }
                for v in r {
                    worst = worst.max(libm::fabs(v));
                }
            }
        }
    }
    Ok(worst)
}

/// Numeric orbit dimension with the singular values used to decide it.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericRank {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

pub fn orbit_dim_numeric(fields: &[ExprField], pt: &[f64]) -> Result<NumericRank> {
    let values: Vec<Vec<f64>> = fields.iter().map(|f| f.eval(pt)).collect::<Result<_>>()?;
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    let data: Vec<f64> = values.into_iter().flatten().collect();
    let (rank, singular_values) = svd_rank(rows, cols, &data, RANK_REL_TOL);
    Ok(NumericRank { rank, singular_values })
}

/// Whether `(x, y, z)` lies in the closed cone `x² + y² ≤ z²`.
pub fn in_cone(pt: &[f64]) -> bool {
    pt[0] * pt[0] + pt[1] * pt[1] <= pt[2] * pt[2]
}

/// Rank of the perturbed fields at one sampled point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint {
    pub point: [f64; 3],
    pub inside_cone: bool,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Default scan box. Near the cone `a(r² - z²)` drops below double
/// precision, so small boxes make the rank-3 region look thinner.
pub const DEFAULT_HALF_WIDTH: f64 = 5.0;

/// Seeded rejection sampling of `samples` points on each side of the cone
/// inside the box `[-half_width, half_width]³`.
pub fn cone_scan(fields: &[ExprField], seed: u64, samples: usize, half_width: f64) -> Result<Vec<ScanPoint>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut inside, mut outside) = (0usize, 0usize);
    let mut out = Vec::with_capacity(2 * samples);
    while inside < samples || outside < samples {
        let pt: [f64; 3] = core::array::from_fn(|_| rng.gen_range(-half_width..=half_width));
        let c = in_cone(&pt);
        let slot = if c { &mut inside } else { &mut outside };
        if *slot >= samples {
            continue;
        }
        *slot += 1;
        let r = orbit_dim_numeric(fields, &pt)?;
        out.push(ScanPoint {
            point: pt,
            inside_cone: c,
            rank: r.rank,
            singular_values: r.singular_values,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::sl2;

    #[test]
    fn flat_function_values() {
        assert_eq!(flat(-1.0), 0.0);
        assert_eq!(flat(0.0), 0.0);
        assert!((flat(1.0) - libm::exp(-1.0)).abs() < 1e-15);
        assert_eq!(flat(1e-4), 0.0);
        assert!(flat(1e6) <= 1.0);
    }

    #[test]
    fn linear_fields_at_a_point() {
        let f = sl2_linear_fields();
        let pt = [1.0, 2.0, 3.0];
        assert_eq!(f[0].eval(&pt).unwrap(), vec![0.0, 3.0, 2.0]);
        assert_eq!(f[1].eval(&pt).unwrap(), vec![3.0, 0.0, 1.0]);
        assert_eq!(f[2].eval(&pt).unwrap(), vec![-2.0, 1.0, 0.0]);
    }

    #[test]
    fn perturbed_field_at_unit_x() {
        let f = cairns_ghys_fields();
        let v = f[0].eval(&[1.0, 0.0, 0.0]).unwrap();
        assert!((v[0] - libm::exp(-1.0)).abs() < 1e-15);
        assert_eq!(&v[1..], &[0.0, 0.0]);
    }

    #[test]
    fn cone_axis_is_not_singular() {
        let f = cairns_ghys_fields();
        assert_eq!(f[0].eval(&[0.0, 0.0, 1.0]).unwrap(), vec![0.0, 1.0, 0.0]);
        assert_eq!(f[0].eval(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert!(f[0].jacobian(&[0.0, 0.0, 1.0]).is_ok());
    }

    #[test]
    fn orbit_dimensions() {
        let f = cairns_ghys_fields();
        assert_eq!(orbit_dim_numeric(&f, &[2.0, 0.0, 1.0]).unwrap().rank, 3);
        assert_eq!(orbit_dim_numeric(&f, &[0.0, 0.0, 1.0]).unwrap().rank, 2);
        assert_eq!(orbit_dim_numeric(&f, &[0.0, 0.0, 0.0]).unwrap().rank, 0);
    }

    #[test]
    fn wrong_constants_give_large_residual() {
        let g = sl2::<f64>();
        let pts = vec![vec![0.3, -0.7, 0.2], vec![1.1, 0.4, -0.5]];
        assert!(bracket_residual_numeric(&sl2_linear_fields(), &g, &pts).unwrap() < 1e-12);
        let wrong = LieAlgebra::<f64>::zero(3).with_bracket(0, 1, 2, 1.0);
        assert!(bracket_residual_numeric(&sl2_linear_fields(), &wrong, &pts).unwrap() > 0.1);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let f = cairns_ghys_fields();
        let pt = [0.9, -0.4, 0.3];
        let h = 1e-6;
        for field in &f {
            let j = field.jacobian(&pt).unwrap();
            for k in 0..3 {
                let mut a = pt;
                let mut b = pt;
                a[k] += h;
                b[k] -= h;
                let (fa, fb) = (field.eval(&a).unwrap(), field.eval(&b).unwrap());
                for i in 0..3 {
                    let fd = (fa[i] - fb[i]) / (2.0 * h);
                    assert!((fd - j[i][k]).abs() <= 1e-5 * (1.0 + j[i][k].abs()));
                }
            }
        }
    }

    #[test]
    fn scan_is_seeded_and_splits_by_cone() {
        let f = cairns_ghys_fields();
        let a = cone_scan(&f, 3, 50, DEFAULT_HALF_WIDTH).unwrap();
        assert_eq!(a, cone_scan(&f, 3, 50, DEFAULT_HALF_WIDTH).unwrap());
        assert_eq!(a.iter().filter(|p| p.inside_cone).count(), 50);
        assert!(a.iter().filter(|p| p.inside_cone).all(|p| p.rank <= 2));
    }

    #[test]
    fn taylor_jet_at_origin_is_linear() {
        let f = cairns_ghys_fields();
        let t = f[0].taylor::<f64>(4).unwrap();
        assert!(t.is_linear());
    }
}
