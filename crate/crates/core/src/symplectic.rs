//! Darboux normalization by the Moser path method.
//!
//! For `ω_t = ω0 + t(ω1 - ω0)` and `ω1 - ω0 = dα`, the field solving
//! `i_{X_t} ω_t = -α` has a time-one flow `φ` with `φ^* ω1 = ω0`.
//!
//! [`darboux`] and [`equivariant_darboux`] apply the same equation one weight
//! at a time: if the lowest part of `ω - ω0` is `η`, of weight `w` (degree
//! plus form degree), then `X = W0⁻¹ H(η)` has degree `w - 1 ≥ 2` and
//! `x + X` removes `η` while only touching higher weights. No `t`
//! dependence appears, which keeps 6-variable problems cheap.
//!
//! Orders: for 2-forms known to order `N`, the primitive, the Moser field and
//! the resulting maps carry order `N + 1`, which is exactly what a pullback
//! needs to be correct through order `N`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::VectorFieldJet;
use crate::flow::TimePolyVectorField;
use crate::form::{poincare_primitive, FormJet};
use crate::jet::Jet;
use crate::jetmat;
use crate::lie::LinearPart;
use crate::linalg::{symplectic_basis, Matrix};
use crate::polymap::PolyMap;
use crate::scalar::Scalar;

/// `Σ_i dx_{2i} ∧ dx_{2i+1}`.
pub fn standard_symplectic<S: Scalar>(nvars: usize, order: u32) -> FormJet<S> {
    FormJet::constant_from_matrix(&standard_matrix(nvars), order)
}

/// Matrix of the standard form: `J[2i][2i+1] = 1`, `J[2i+1][2i] = -1`.
pub fn standard_matrix<S: Scalar>(nvars: usize) -> Matrix<S> {
    let mut j = Matrix::zeros(nvars, nvars);
    for i in 0..nvars / 2 {
        j[(2 * i, 2 * i + 1)] = S::one();
        j[(2 * i + 1, 2 * i)] = -S::one();
    }
    j
}

#[derive(Clone, PartialEq, Debug)]
pub struct SymplecticCheck<S> {
    pub closed_residual: S,
    pub rank_at_origin: usize,
    pub nvars: usize,
}

impl<S: Scalar> SymplecticCheck<S> {
    pub fn is_closed(&self) -> bool {
        self.closed_residual.is_negligible()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rank_at_origin == self.nvars
    }

    pub fn is_ok(&self) -> bool {
        self.is_closed() && self.is_nondegenerate()
    }
}

pub fn check_symplectic<S: Scalar>(omega: &FormJet<S>) -> SymplecticCheck<S> {
    assert_eq!(omega.degree(), 2, "check_symplectic needs a 2-form");
    SymplecticCheck {
        closed_residual: omega.exterior_d().max_abs_coeff(),
        rank_at_origin: omega.constant_matrix().rank(),
        nvars: omega.nvars(),
    }
}

/// A Moser field together with the primitive it was built from.
#[derive(Clone, PartialEq, Debug)]
pub struct MoserField<S> {
    /// `α` with `dα = ω1 - ω0`.
    pub alpha: FormJet<S>,
    pub field: TimePolyVectorField<S>,
}

/// Solves `i_{X_t} ω_t = -α` with `ω_t = ω0 + t(ω1 - ω0)`.
///
/// In matrix terms `i_X ω = -W X`, so `W_t X_t = α`; `W_t` is inverted as
/// `Σ_k t^k (-W0⁻¹ D)^k W0⁻¹` with `D = W1 - W0`.
pub fn moser_field<S: Scalar>(omega0: &FormJet<S>, omega1: &FormJet<S>) -> Result<MoserField<S>> {
    let n = omega0.nvars();
    if omega1.nvars() != n || omega0.degree() != 2 || omega1.degree() != 2 {
        return Err(Error::Dimension {
            op: "moser_field",
            expected: n,
            found: omega1.nvars(),
        });
    }
    if omega0.constant_matrix() != omega1.constant_matrix() {
        return Err(Error::NormalizeFirst { op: "moser_field" });
    }
    for w in [omega0, omega1] {
        let c = check_symplectic(w);
        if !c.is_closed() {
            return Err(Error::NotClosed {
                op: "moser_field",
                residual: format!("{}", c.closed_residual),
            });
        }
    }
    let order = omega0.order().max(omega1.order()) + 1;
    let diff = omega1.with_order(order - 1).sub(&omega0.with_order(order - 1));
    let alpha = poincare_primitive(&diff)?;
    let coeffs = moser_series(omega0, &diff, &alpha)?
        .into_iter()
        .map(VectorFieldJet::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(MoserField {
        alpha,
        field: TimePolyVectorField::new(coeffs),
    })
}

/// Components of the `t` coefficients of `X_t` with `W_t X_t = α`, where
/// `W_t` is the matrix of `ω0 + t·diff`. Works at `alpha.order()`.
pub(crate) fn moser_series<S: Scalar>(
    omega0: &FormJet<S>,
    diff: &FormJet<S>,
    alpha: &FormJet<S>,
) -> Result<Vec<Vec<Jet<S>>>> {
    let n = omega0.nvars();
    let order = alpha.order();
    let w0 = omega0.with_order(order).to_matrix();
    let d = diff.with_order(order).to_matrix();
    let w0inv = jetmat::inverse(&w0)?;
    let step: jetmat::JetMatrix<S> = jetmat::mul(&w0inv, &d)
        .into_iter()
        .map(|r| r.into_iter().map(|e| -e).collect())
        .collect();
    let a: Vec<Jet<S>> = (0..n).map(|k| alpha.coeff(&[k])).collect();
    let mut v = jetmat::mul_vec(&w0inv, &a);
    let mut coeffs = Vec::new();
    for _ in 0..=order {
        if v.iter().all(Jet::is_zero) {
            break;
        }
        coeffs.push(v.clone());
        v = jetmat::mul_vec(&step, &v);
    }
    if coeffs.is_empty() {
        coeffs.push(alloc::vec![Jet::zero(n, order); n]);
    }
    Ok(coeffs)
}

/// Largest coefficient of `i_{X_t} ω_t + α` over all powers of `t`.
pub fn moser_residual<S: Scalar>(m: &MoserField<S>, omega0: &FormJet<S>, omega1: &FormJet<S>) -> S {
    let order = m.alpha.order();
    let w0 = omega0.with_order(order);
    let diff = omega1.with_order(order).sub(&w0);
    let xs = m.field.coeffs();
    let mut worst = S::zero();
    for q in 0..=xs.len() {
        let mut acc = if q == 0 { m.alpha.clone() } else { FormJet::zero(w0.nvars(), order, 1) };
        if let Some(xq) = xs.get(q) {
            acc = acc.add(&w0.interior(xq));
        }
        if q > 0 {
            acc = acc.add(&diff.interior(&xs[q - 1]));
        }
        let r = acc.max_abs_coeff();
        if r > worst {
            worst = r;
        }
    }
    worst
}

/// Symplectic basis change `M` with `M^T W M = J`.
pub fn linear_darboux_frame<S: Scalar>(w: &Matrix<S>) -> Result<Matrix<S>> {
    let n = w.rows();
    let candidates: Vec<Vec<S>> = (0..n)
        .map(|i| {
            let mut v = alloc::vec![S::zero(); n];
            v[i] = S::one();
            v
        })
        .collect();
    let (pairs, leftover) = symplectic_basis(w, candidates);
    if !leftover.is_empty() || 2 * pairs.len() != n {
        return Err(Error::NonInvertible { op: "darboux" });
    }
    let cols: Vec<Vec<S>> = pairs.into_iter().flat_map(|(e, f)| [e, f]).collect();
    Ok(Matrix::from_columns(&cols))
}

/// `m` with `m^* ω = Σ dx_{2i} ∧ dx_{2i+1}` through order `ω.order()`.
#[derive(Clone, PartialEq, Debug)]
pub struct DarbouxResult<S> {
    pub map: PolyMap<S>,
    /// Linear normalization applied before the Moser step.
    pub linear: Matrix<S>,
}

pub fn darboux<S: Scalar>(omega: &FormJet<S>, order: u32) -> Result<DarbouxResult<S>> {
    let omega = omega.with_order(order);
    let c = check_symplectic(&omega);
    if !c.is_closed() {
        return Err(Error::NotClosed {
            op: "darboux",
            residual: format!("{}", c.closed_residual),
        });
    }
    let m_lin = linear_darboux_frame(&omega.constant_matrix())?;
    let lin = PolyMap::linear(&m_lin, order + 1);
    let normalized = omega.pullback(&lin)?;
    let phi = moser_steps(&normalized, order, &[])?;
    let map = lin.compose(&phi)?;
    verify_darboux(&omega, &map)?;
    Ok(DarbouxResult { map, linear: m_lin })
}

/// Weight-by-weight Moser steps for a closed `ω` with standard constant
/// part. Each step field must commute with `gens`.
fn moser_steps<S: Scalar>(omega: &FormJet<S>, order: u32, gens: &[VectorFieldJet<S>]) -> Result<PolyMap<S>> {
    let n = omega.nvars();
    let w0inv = standard_matrix::<S>(n).inverse().ok_or(Error::NonInvertible { op: "darboux" })?;
    let std = standard_symplectic(n, order);
    let mut cur = omega.with_order(order);
    let mut map = PolyMap::identity(n, order + 1);
    for deg in 1..=order {
        let eta = cur.sub(&std).homogeneous(deg);
        if eta.is_zero() {
            continue;
        }
        let alpha = poincare_primitive(&eta)?;
        let a: Vec<Jet<S>> = (0..n).map(|k| alpha.coeff(&[k])).collect();
        let x = VectorFieldJet::new(jetmat::mul_vec(&jetmat::from_constant(&w0inv, n, order + 1), &a))?;
        for (i, l) in gens.iter().enumerate() {
            if !l.bracket(&x)?.is_negligible() {
                return Err(Error::NotEquivariant {
                    op: "equivariant_darboux (Moser field)",
                    generator: i,
                });
            }
        }
        let step = PolyMap::new((0..n).map(|i| &Jet::var(n, order + 1, i) + x.comp(i)).collect())?;
        cur = cur.pullback(&step)?;
        map = map.compose(&step)?;
    }
    Ok(map)
}

fn verify_darboux<S: Scalar>(omega: &FormJet<S>, map: &PolyMap<S>) -> Result<()> {
    let pulled = omega.pullback(map)?;
    let residual = pulled.sub(&standard_symplectic(omega.nvars(), omega.order()));
    if !residual.is_negligible() {
        return Err(Error::Invalid {
            op: "darboux",
            reason: format!("pullback residual {}", residual.max_abs_coeff()),
        });
    }
    Ok(())
}

/// Largest coefficient of `L_{A_i x} ω` for generator `i`.
pub fn invariance_residual<S: Scalar>(omega: &FormJet<S>, lp: &LinearPart<S>) -> Vec<S> {
    lp.fields(omega.order())
        .iter()
        .map(|v| omega.lie_derivative(v).max_abs_coeff())
        .collect()
}

/// Largest coefficient of `m_*(A_i x) - A_i x` for each generator.
pub fn commutation_residual<S: Scalar>(map: &PolyMap<S>, lp: &LinearPart<S>) -> Result<Vec<S>> {
    lp.fields(map.order())
        .iter()
        .map(|v| Ok(v.pushforward(map)?.sub(v).max_abs_coeff()))
        .collect()
}

/// Darboux map commuting with a linear action that preserves `ω`.
///
/// Requires `ω(0)` standard. Because the radial primitive and the Neumann
/// inverse are built from `GL`-natural operations, the Moser field is
/// invariant whenever `ω` is; this is checked on every `t` coefficient as a
/// safeguard instead of averaging.
pub fn equivariant_darboux<S: Scalar>(omega: &FormJet<S>, lp: &LinearPart<S>, order: u32) -> Result<PolyMap<S>> {
    let omega = omega.with_order(order);
    let n = omega.nvars();
    if omega.constant_matrix() != standard_matrix(n) {
        return Err(Error::NormalizeFirst { op: "equivariant_darboux" });
    }
    for (i, r) in invariance_residual(&omega, lp).into_iter().enumerate() {
        if !r.is_negligible() {
            return Err(Error::NotEquivariant {
                op: "equivariant_darboux",
                generator: i,
            });
        }
    }
    let map = moser_steps(&omega, order, &lp.fields(order + 1))?;
    verify_darboux(&omega, &map)?;
    for (i, r) in commutation_residual(&map, lp)?.into_iter().enumerate() {
        if !r.is_negligible() {
            return Err(Error::NotEquivariant {
                op: "equivariant_darboux (result)",
                generator: i,
            });
        }
    }
    Ok(map)
}
