//! b-forms along the hypersurface `z = 0`.
//!
//! A b-form is stored in the frame `(dx_i, θ)` with `θ = dz/z` occupying the
//! slot of `dz`: the `FormJet` term `f dx_z ∧ dx_J` means `f θ ∧ dx_J`. Any
//! smooth `dz` is rewritten as `z θ`, so the split into a smooth part and a
//! log part is unique.
//!
//! In this frame `d` differentiates along `z` with `z ∂_z` and `θ` is closed.
//! The b-differential preserves the weight `polynomial degree + number of
//! non-θ slots`, and every construction here is homogeneous in that weight.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::VectorFieldJet;
use crate::form::FormJet;
use crate::jet::{check_vanishing, Jet, Substitution};
use crate::jetmat;
use crate::lie::LinearPart;
use crate::linalg::{symplectic_basis, Matrix};
use crate::polymap::PolyMap;
use crate::scalar::Scalar;
use crate::symplectic::{commutation_residual, invariance_residual, standard_matrix, DarbouxResult};

#[derive(Clone, PartialEq, Debug)]
pub struct BForm<S> {
    z: usize,
    frame: FormJet<S>,
}

impl<S: Scalar> BForm<S> {
    /// `smooth + θ ∧ log`. Any `dz` inside `smooth` is moved to the log
    /// part; `log` itself must not contain `dz`.
    pub fn new(smooth: &FormJet<S>, log: &FormJet<S>, z: usize) -> Result<Self> {
        let n = smooth.nvars();
        if z >= n || log.nvars() != n || log.degree() + 1 != smooth.degree() {
            return Err(Error::Dimension {
                op: "bform",
                expected: smooth.degree().saturating_sub(1),
                found: log.degree(),
            });
        }
        if log.terms().any(|(idx, _)| idx.contains(&(z as u8))) {
            return Err(Error::Invalid {
                op: "bform",
                reason: String::from("log part must not contain dz"),
            });
        }
        let order = smooth.order().max(log.order());
        let mut frame = FormJet::zero(n, order, smooth.degree());
        for (idx, f) in smooth.terms() {
            let idx: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
            let f = f.with_order(order);
            if idx.contains(&z) {
                frame.add_term(&idx, f.mul_var(z));
            } else {
                frame.add_term(&idx, f);
            }
        }
        let theta = FormJet::dx(n, order, z);
        frame = frame.add(&theta.wedge(&log.with_order(order)));
        Ok(BForm { z, frame })
    }

    /// A smooth form viewed as a b-form.
    pub fn from_smooth(smooth: &FormJet<S>, z: usize) -> Result<Self> {
        let log = FormJet::zero(smooth.nvars(), smooth.order(), smooth.degree().saturating_sub(1));
        if smooth.degree() == 0 {
            return Ok(BForm {
                z,
                frame: smooth.clone(),
            });
        }
        Self::new(smooth, &log, z)
    }

    /// Wraps a form already written in the `(dx_i, θ)` frame.
    pub fn from_frame(frame: FormJet<S>, z: usize) -> Self {
        assert!(z < frame.nvars(), "b-form: z index out of range");
        BForm { z, frame }
    }

    /// `θ ∧ dt + Σ dx_i ∧ dy_i` with `z = n-2`, `t = n-1`.
    pub fn standard(nvars: usize, order: u32) -> Self {
        assert!(nvars >= 2 && nvars % 2 == 0, "standard b-form needs an even dimension");
        BForm {
            z: nvars - 2,
            frame: FormJet::constant_from_matrix(&standard_matrix(nvars), order),
        }
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn frame(&self) -> &FormJet<S> {
        &self.frame
    }

    pub fn nvars(&self) -> usize {
        self.frame.nvars()
    }

    pub fn order(&self) -> u32 {
        self.frame.order()
    }

    pub fn degree(&self) -> usize {
        self.frame.degree()
    }

    pub fn smooth_part(&self) -> FormJet<S> {
        let z = self.z as u8;
        let mut out = FormJet::zero(self.nvars(), self.order(), self.degree());
        for (idx, f) in self.frame.terms().filter(|(idx, _)| !idx.contains(&z)) {
            let idx: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
            out.add_term(&idx, f.clone());
        }
        out
    }

    /// `l` with `self = smooth + θ ∧ l`.
    pub fn log_part(&self) -> FormJet<S> {
        let z = self.z as u8;
        let mut out = FormJet::zero(self.nvars(), self.order(), self.degree().saturating_sub(1));
        for (idx, f) in self.frame.terms() {
            let Some(p) = idx.iter().position(|&i| i == z) else { continue };
            let rest: Vec<usize> = idx.iter().filter(|&&i| i != z).map(|&i| i as usize).collect();
            out.add_term(&rest, if p % 2 == 1 { -f } else { f.clone() });
        }
        out
    }

    pub fn with_order(&self, order: u32) -> Self {
        BForm {
            z: self.z,
            frame: self.frame.with_order(order),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.z, other.z, "b-forms with different z");
        BForm {
            z: self.z,
            frame: self.frame.add(&other.frame),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.z, other.z, "b-forms with different z");
        BForm {
            z: self.z,
            frame: self.frame.sub(&other.frame),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.frame.is_zero()
    }

    pub fn is_negligible(&self) -> bool {
        self.frame.is_negligible()
    }

    pub fn max_abs_coeff(&self) -> S {
        self.frame.max_abs_coeff()
    }

    fn nonz(&self) -> Vec<usize> {
        (0..self.nvars()).filter(|&i| i != self.z).collect()
    }

    /// b-exterior derivative. The top degree of the result would need the
    /// next order of `self`, so the result has order `self.order() - 1`.
    pub fn b_d(&self) -> Self {
        let n = self.nvars();
        let order = self.order();
        let z = self.z as u8;
        let mut out = self.frame.partial_d(&self.nonz());
        let mut radial = FormJet::zero(n, order, self.degree());
        for (idx, f) in self.frame.terms().filter(|(idx, _)| !idx.contains(&z)) {
            let idx: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
            radial.add_term(&idx, f.derivative(self.z).mul_var(self.z));
        }
        if self.degree() < n {
            out = out.add(&FormJet::dx(n, order, self.z).wedge(&radial));
        }
        BForm {
            z: self.z,
            frame: out.with_order(order.saturating_sub(1)),
        }
    }

    pub fn b_wedge(&self, other: &Self) -> Self {
        assert_eq!(self.z, other.z, "b-forms with different z");
        let order = self.order().min(other.order());
        BForm {
            z: self.z,
            frame: self.frame.with_order(order).wedge(&other.frame.with_order(order)),
        }
    }

    /// Constant matrix in the frame `(dx_i, θ)`.
    pub fn constant_matrix(&self) -> Matrix<S> {
        self.frame.constant_matrix()
    }

    /// Maximal rank at the origin as a section of `Λ²(ᵇT*)`.
    pub fn b_nondegenerate(&self) -> bool {
        self.degree() == 2 && self.constant_matrix().rank() == self.nvars()
    }
}

pub fn b_d<S: Scalar>(eta: &BForm<S>) -> BForm<S> {
    eta.b_d()
}

pub fn b_wedge<S: Scalar>(a: &BForm<S>, b: &BForm<S>) -> BForm<S> {
    a.b_wedge(b)
}

pub fn b_nondegenerate<S: Scalar>(omega: &BForm<S>) -> bool {
    omega.b_nondegenerate()
}

/// `α` with `b_d(α) = η` through `η.order()`; `α` has order `η.order() + 1`.
///
/// With `η = s + θ∧l` and `l = γ0 + z γ̃` (`γ0 = l|_{z=0}`), the piece
/// `θ∧γ0` has primitive `-θ∧g0` where `d g0 = γ0`, and `s + dz∧γ̃` is an
/// ordinary closed form handled by the radial primitive.
pub fn b_primitive<S: Scalar>(eta: &BForm<S>) -> Result<BForm<S>> {
    let k = eta.degree();
    if k == 0 {
        return Err(Error::Invalid {
            op: "b_primitive",
            reason: String::from("form degree must be at least 1"),
        });
    }
    let residual = eta.b_d();
    if !residual.is_negligible() {
        return Err(Error::NotClosed {
            op: "b_primitive",
            residual: format!("{}", residual.max_abs_coeff()),
        });
    }
    let n = eta.nvars();
    let z = eta.z;
    let order = eta.order();
    let nonz = eta.nonz();
    let work = order + 1;
    // the degree `order + 1` log part is forced by closedness in weight
    // `order + 2`; fill it in so every weight we touch is closed
    let mut full = eta.with_order(work);
    let top = eta.smooth_part().homogeneous(order);
    if k >= 1 && !top.is_zero() {
        let zdz = top.map_coeffs(|f| f.derivative(z).mul_var(z));
        if !zdz.is_zero() {
            let l_next = zdz
                .partial_primitive(&nonz)
                .map_err(|_| Error::NotLocallyBExact)?
                .with_order(work);
            let theta = FormJet::dx(n, work, z);
            full = full.add(&BForm::from_frame(theta.wedge(&l_next), z));
        }
    }
    let s = full.smooth_part();
    let l = full.log_part();
    let gamma0 = l.map_coeffs(|f| f.at_var_zero(z));
    let tilde = l.sub(&gamma0).map_coeffs(|f| f.div_var(z).expect("divisible by z"));

    let mut alpha = FormJet::zero(n, work + 1, k - 1);
    if !gamma0.is_zero() {
        if k == 1 {
            // θ·γ0 would need log z
            return Err(Error::NotLocallyBExact);
        }
        let g0 = gamma0.partial_primitive(&nonz).map_err(|_| Error::NotLocallyBExact)?;
        let theta = FormJet::dx(n, work + 1, z);
        alpha = alpha.sub(&theta.wedge(&g0));
    }
    let sigma = s.add(&FormJet::dx(n, work, z).wedge(&tilde));
    if !sigma.is_zero() {
        let h = sigma
            .partial_primitive(&(0..n).collect::<Vec<_>>())
            .map_err(|_| Error::NotLocallyBExact)?;
        let framed = BForm::from_smooth(&h, z)?;
        alpha = alpha.add(&framed.frame.with_order(work + 1));
    }
    Ok(BForm {
        z,
        frame: alpha.with_order(work),
    })
}

/// `m^* η` for a map preserving `z = 0`, i.e. `m^z = z u` with `u(0) ≠ 0`.
///
/// Coefficients of degree `k` need `m^z` through degree `k + 2`, so the
/// result has order `min(η.order(), m.order() - 2)`.
pub fn b_pullback<S: Scalar>(eta: &BForm<S>, m: &PolyMap<S>) -> Result<BForm<S>> {
    let n = eta.nvars();
    let z = eta.z;
    if m.source_dim() != n || m.target_dim() != n {
        return Err(Error::Dimension {
            op: "b_pullback",
            expected: n,
            found: m.target_dim(),
        });
    }
    let u = b_map_unit(m, z, "b_pullback")?;
    let order = eta.order().min(m.order().saturating_sub(2));
    let uinv = jetmat::inverse(&alloc::vec![alloc::vec![u.with_order(order + 1)]])?
        .remove(0)
        .remove(0);
    let frame_d = |f: &Jet<S>| -> FormJet<S> {
        let mut w = FormJet::zero(n, order, 1);
        for j in 0..n {
            let c = if j == z { f.derivative(z).mul_var(z) } else { f.derivative(j) };
            w.add_term(&[j], c.with_order(order));
        }
        w
    };
    let beta: Vec<FormJet<S>> = (0..n)
        .map(|i| {
            if i == z {
                let dlog = frame_d(&u).mul_function(&uinv.with_order(order));
                dlog.add(&FormJet::dx(n, order, z))
            } else {
                frame_d(&m.comp(i).with_order(order + 1))
            }
        })
        .collect();
    let args: Vec<Jet<S>> = m.comps().iter().map(|c| c.with_order(order)).collect();
    check_vanishing(&args, "b_pullback")?;
    let mut sub = Substitution::new(&args, n, order);
    let mut out = FormJet::zero(n, order, eta.degree());
    for (idx, f) in eta.with_order(order).frame.terms() {
        let pulled = sub.apply(f);
        if pulled.is_zero() {
            continue;
        }
        let mut w = FormJet::function(pulled);
        for &i in idx.iter() {
            w = w.wedge(&beta[i as usize]);
            if w.is_zero() {
                break;
            }
        }
        out = out.add(&w);
    }
    Ok(BForm { z, frame: out })
}

/// `u = m^z / z`, required to be a unit.
fn b_map_unit<S: Scalar>(m: &PolyMap<S>, z: usize, op: &'static str) -> Result<Jet<S>> {
    let u = m.comp(z).div_var(z).ok_or(Error::InvalidBMap { op })?;
    if u.constant_term().is_zero() {
        return Err(Error::InvalidBMap { op });
    }
    Ok(u.with_order(m.order().saturating_sub(1)))
}

/// Linear `B = diag(L', 1)` (identity on the `z` slot) with
/// `B^T W B` standard, for a nondegenerate frame matrix `W`.
fn linear_b_frame<S: Scalar>(w: &Matrix<S>, z: usize) -> Result<Matrix<S>> {
    let n = w.rows();
    let nonz: Vec<usize> = (0..n).filter(|&i| i != z).collect();
    let m = nonz.len();
    let w_nz = Matrix::from_rows(nonz.iter().map(|&i| nonz.iter().map(|&j| w[(i, j)].clone()).collect()).collect());
    let log_row: Vec<S> = nonz.iter().map(|&j| w[(z, j)].clone()).collect();
    let kernel = w_nz.nullspace();
    let singular = Error::NonInvertible { op: "b_darboux" };
    let [k] = kernel.as_slice() else { return Err(singular) };
    let c = log_row.iter().zip(k).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
    if c.is_negligible() {
        return Err(singular);
    }
    let hyperplane = Matrix::from_rows(alloc::vec![log_row]).nullspace();
    let (pairs, leftover) = symplectic_basis(&w_nz, hyperplane);
    if !leftover.is_empty() || 2 * pairs.len() + 1 != m {
        return Err(singular);
    }
    let mut cols: Vec<Vec<S>> = pairs.into_iter().flat_map(|(e, f)| [e, f]).collect();
    cols.push(k.iter().map(|x| x.clone() / c.clone()).collect());
    let l = Matrix::from_columns(&cols);
    let mut b = Matrix::identity(n);
    for (a, &i) in nonz.iter().enumerate() {
        for (bcol, &j) in nonz.iter().enumerate() {
            b[(i, j)] = l[(a, bcol)].clone();
        }
    }
    if b.transpose().mul(w).mul(&b) != standard_matrix(n) {
        return Err(singular);
    }
    Ok(b)
}

fn check_b_symplectic<S: Scalar>(omega: &BForm<S>, op: &'static str) -> Result<()> {
    let n = omega.nvars();
    if omega.degree() != 2 || n < 2 || n % 2 == 1 {
        return Err(Error::Dimension {
            op,
            expected: 2,
            found: omega.degree(),
        });
    }
    if omega.z != n - 2 {
        return Err(Error::Invalid {
            op,
            reason: format!("z must be variable {} (second to last)", n - 1),
        });
    }
    let r = omega.b_d();
    if !r.is_negligible() {
        return Err(Error::NotClosed {
            op,
            residual: format!("{}", r.max_abs_coeff()),
        });
    }
    if !omega.b_nondegenerate() {
        return Err(Error::NonInvertible { op });
    }
    Ok(())
}

/// Weights making `θ∧dt + Σ dx_i∧dy_i` homogeneous: `t` has weight 2,
/// every other variable weight 1 and the slot `θ` weight 0. `b_d`
/// preserves this weight.
fn nu_weights(n: usize) -> Vec<u32> {
    let mut nu = alloc::vec![1; n];
    nu[n - 1] = 2;
    nu
}

fn weight_part<S: Scalar>(eta: &FormJet<S>, z: usize, nu: &[u32], w: u32) -> FormJet<S> {
    let mut out = FormJet::zero(eta.nvars(), eta.order(), eta.degree());
    for (idx, f) in eta.terms() {
        let slots: u32 = idx.iter().filter(|&&i| i as usize != z).map(|&i| nu[i as usize]).sum();
        if slots > w {
            continue;
        }
        let part = f.filter(|m| m.exponents().iter().zip(nu).map(|(&e, &v)| e as u32 * v).sum::<u32>() + slots == w);
        if !part.is_zero() {
            let idx: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
            out.add_term(&idx, part);
        }
    }
    out
}

fn shear<S: Scalar>(n: usize, order: u32, shifts: &[(usize, Jet<S>)]) -> Result<PolyMap<S>> {
    let mut comps: Vec<Jet<S>> = (0..n).map(|i| Jet::var(n, order, i)).collect();
    for (i, s) in shifts {
        comps[*i] = &comps[*i] + &s.with_order(order);
    }
    PolyMap::new(comps)
}

/// Map `φ` preserving `z = 0` with `φ^* ω = θ∧dt + Σ dx_i∧dy_i` for `ω`
/// whose constant part is already standard.
///
/// `ω` is first replaced by the closed polynomial form `ω0 + b_d(α)`, with
/// `α` the b-primitive of `ω - ω0`, so every weight is closed. The weight-2
/// part `θ∧l` cannot be removed by a Moser step of higher weight and is
/// sheared away; every later weight `w` is removed by the time-one step of
/// `X` with `i_X ω0 = -(1/w) i_E η`, `E` the weighted Euler field.
fn b_moser_steps<S: Scalar>(
    omega: &BForm<S>,
    order: u32,
    margin: u32,
    gens: &[VectorFieldJet<S>],
    op: &'static str,
) -> Result<PolyMap<S>> {
    let n = omega.nvars();
    let z = omega.z;
    let t = n - 1;
    let k = order + margin;
    let nu = nu_weights(n);
    let std = BForm::<S>::standard(n, k);
    let alpha = b_primitive(&omega.sub(&BForm::standard(n, omega.order())))?;
    let mut cur = std.add(&alpha.with_order(k + 1).b_d());
    let mut map = PolyMap::identity(n, k + 2);
    let pairs: Vec<(usize, usize)> = (0..(n - 2) / 2).map(|i| (2 * i, 2 * i + 1)).collect();
    let log_weight_two = |cur: &BForm<S>| BForm::from_frame(weight_part(&cur.sub(&std).frame, z, &nu, 2), z).log_part();

    // θ∧dq with q quadratic in the symplectic variables
    let l = log_weight_two(&cur);
    let mut q = Jet::zero(n, k + 2);
    for &(a, b) in &pairs {
        for j in [a, b] {
            q = &q + &l.coeff(&[j]).at_var_zero(z).mul_var(j).with_order(k + 2);
        }
    }
    let q = q.scale(&S::from_ratio(-1, 2));
    if !q.is_zero() {
        let step = shear(n, k + 2, &[(t, q)])?;
        cur = b_pullback(&cur, &step)?;
        map = map.compose(&step)?;
    }
    // z θ∧(c·dx) = dz∧(c·dx)
    let l = log_weight_two(&cur);
    let mut shifts = Vec::new();
    for &(a, b) in &pairs {
        let ca = l.coeff(&[a]).linear_coeff(z);
        let cb = l.coeff(&[b]).linear_coeff(z);
        let zv = Jet::var(n, k + 2, z);
        shifts.push((a, zv.scale(&-cb)));
        shifts.push((b, zv.scale(&ca)));
    }
    if shifts.iter().any(|(_, s)| !s.is_zero()) {
        let step = shear(n, k + 2, &shifts)?;
        cur = b_pullback(&cur, &step)?;
        map = map.compose(&step)?;
    }
    let rest = weight_part(&cur.sub(&std).frame, z, &nu, 2);
    if !rest.is_negligible() {
        return Err(Error::Invalid {
            op,
            reason: format!("weight-2 residual {}", rest.max_abs_coeff()),
        });
    }

    let w0inv = standard_matrix::<S>(n).inverse().ok_or(Error::NonInvertible { op })?;
    let euler = VectorFieldJet::new(
        (0..n)
            .map(|i| {
                if i == z {
                    Jet::one(n, k)
                } else {
                    Jet::var(n, k, i).scale(&S::from_i64(nu[i] as i64))
                }
            })
            .collect(),
    )?;
    for w in 3..=2 * k + 3 {
        let eta = weight_part(&cur.sub(&std).frame, z, &nu, w);
        if eta.is_zero() {
            continue;
        }
        let a = eta.interior(&euler).scale(&S::from_ratio(1, w as i64));
        let a: Vec<Jet<S>> = (0..n).map(|i| a.coeff(&[i]).with_order(k + 2)).collect();
        let mut x = jetmat::mul_vec(&jetmat::from_constant(&w0inv, n, k + 2), &a);
        x[z] = x[z].mul_var(z);
        let x = VectorFieldJet::new(x)?;
        for (i, g) in gens.iter().enumerate() {
            if !g.bracket(&x)?.is_negligible() {
                return Err(Error::NotEquivariant { op, generator: i });
            }
        }
        let step = PolyMap::new((0..n).map(|i| &Jet::var(n, k + 2, i) + x.comp(i)).collect())?;
        cur = b_pullback(&cur, &step)?;
        map = map.compose(&step)?;
    }
    Ok(map)
}

/// Extra orders carried while stepping. Truncation errors leak down a
/// few degrees over the weight steps; the pullback check decides whether
/// the next margin is needed.
const MARGINS: [u32; 3] = [2, 4, 8];

fn stepped_b_map<S: Scalar>(
    omega: &BForm<S>,
    order: u32,
    gens: impl Fn(u32) -> Vec<VectorFieldJet<S>>,
    op: &'static str,
) -> Result<PolyMap<S>> {
    let mut last = None;
    for margin in MARGINS {
        let map = b_moser_steps(omega, order, margin, &gens(order + margin + 2), op)?.with_order(order + 2);
        match verify_b_darboux(omega, &map, op) {
            Ok(()) => return Ok(map),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one margin"))
}

fn verify_b_darboux<S: Scalar>(omega: &BForm<S>, map: &PolyMap<S>, op: &'static str) -> Result<()> {
    let pulled = b_pullback(omega, map)?;
    let residual = pulled.sub(&BForm::standard(omega.nvars(), omega.order()));
    if pulled.order() < omega.order() || !residual.is_negligible() {
        return Err(Error::Invalid {
            op,
            reason: format!("pullback residual {}", residual.max_abs_coeff()),
        });
    }
    Ok(())
}

/// `m` preserving `z = 0` with `m^* ω = θ∧dt + Σ dx_i∧dy_i` through order
/// `order`. The map has order `order + 2`, which is what the pullback of a
/// b-form needs in its `z` component.
pub fn b_darboux<S: Scalar>(omega: &BForm<S>, order: u32) -> Result<DarbouxResult<S>> {
    let omega = omega.with_order(order);
    check_b_symplectic(&omega, "b_darboux")?;
    let lin_m = linear_b_frame(&omega.constant_matrix(), omega.z)?;
    let lin = PolyMap::linear(&lin_m, order + 2);
    let normalized = b_pullback(&omega, &lin)?;
    let phi = stepped_b_map(&normalized, order, |_| Vec::new(), "b_darboux")?;
    let map = lin.compose(&phi)?.with_order(order + 2);
    b_map_unit(&map, omega.z, "b_darboux")?;
    verify_b_darboux(&omega, &map, "b_darboux")?;
    Ok(DarbouxResult { map, linear: lin_m })
}

/// b-Darboux map commuting with a linear action.
///
/// Each `A_i` must have zero `z` row and column: the action then preserves
/// `z = 0`, fixes the conormal direction, and its fields are b-fields with
/// no `θ` component. Requires `ω(0)` standard and `ω` invariant.
pub fn equivariant_b_darboux<S: Scalar>(omega: &BForm<S>, lp: &LinearPart<S>, order: u32) -> Result<PolyMap<S>> {
    let op = "equivariant_b_darboux";
    let omega = omega.with_order(order);
    check_b_symplectic(&omega, op)?;
    let n = omega.nvars();
    let z = omega.z;
    if lp.nvars() != n {
        return Err(Error::Dimension {
            op,
            expected: n,
            found: lp.nvars(),
        });
    }
    if omega.constant_matrix() != standard_matrix(n) {
        return Err(Error::NormalizeFirst { op });
    }
    for (i, a) in lp.mats.iter().enumerate() {
        if (0..n).any(|j| !a[(z, j)].is_zero() || !a[(j, z)].is_zero()) {
            return Err(Error::NotEquivariant { op, generator: i });
        }
    }
    for (i, r) in invariance_residual(&omega.frame, lp).into_iter().enumerate() {
        if !r.is_negligible() {
            return Err(Error::NotEquivariant { op, generator: i });
        }
    }
    let map = stepped_b_map(&omega, order, |o| lp.fields(o), op)?;
    b_map_unit(&map, z, op)?;
    verify_b_darboux(&omega, &map, op)?;
    for (i, r) in commutation_residual(&map, lp)?.into_iter().enumerate() {
        if !r.is_negligible() {
            return Err(Error::NotEquivariant { op, generator: i });
        }
    }
    Ok(map)
}
