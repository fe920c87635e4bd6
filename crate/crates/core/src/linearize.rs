//! Degree-by-degree formal linearization of a representation.
//!
//! Write `ρ(e_i) = A_i x + R_i + …` with `R_i` homogeneous of degree `k`.
//! The change of coordinates `x -> x + h` replaces `R_i` by
//! `R_i + [A_i x, h]`, so each step solves `[A_i x, h] = -R_i` jointly.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::VectorFieldJet;
use crate::invariant::field_actions;
use crate::jet::Monomial;
use crate::lie::{linear_part, pushforward_rep, LieAlgebra, LinearPart, Representation};
use crate::linalg::Matrix;
use crate::polymap::PolyMap;
use crate::scalar::Scalar;

/// Degree-`k` parts of the generators, with their cocycle residual.
#[derive(Clone, PartialEq, Debug)]
pub struct HomogeneousCochain<S> {
    pub degree: u32,
    pub parts: Vec<VectorFieldJet<S>>,
    /// Largest coefficient of `[A_i x, R_j] - [A_j x, R_i] - Σ_k c_ij^k R_k`.
    pub cocycle_residual: S,
}

impl<S: Scalar> HomogeneousCochain<S> {
    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(VectorFieldJet::is_zero)
    }

    /// Largest coefficient over all parts.
    pub fn norm(&self) -> S {
        let m: Vec<S> = self.parts.iter().map(VectorFieldJet::max_abs_coeff).collect();
        crate::scalar::max_abs(m.iter())
    }
}

/// Cocycle residual of homogeneous parts `r` against linear fields `l`.
pub fn cocycle_residual<S: Scalar>(
    g: &LieAlgebra<S>,
    l: &[VectorFieldJet<S>],
    r: &[VectorFieldJet<S>],
) -> S {
    let d = g.dim();
    let mut worst = S::zero();
    for i in 0..d {
        for j in i + 1..d {
            let mut acc = l[i]
                .bracket(&r[j])
                .and_then(|a| Ok(a.sub(&l[j].bracket(&r[i])?)))
                .expect("same shape");
            for (k, rk) in r.iter().enumerate() {
                let c = g.c(i, j, k);
                if !c.is_zero() {
                    acc = acc.sub(&rk.scale(c));
                }
            }
            let m = acc.max_abs_coeff();
            if m > worst {
                worst = m;
            }
        }
    }
    worst
}

/// Reads off the degree-`k` defect, requiring degrees `2..k` to be absent.
pub fn cocycle_defect<S: Scalar>(r: &Representation<S>, k: u32) -> Result<HomogeneousCochain<S>> {
    for f in r.fields() {
        for deg in 2..k {
            if !f.homogeneous(deg).is_zero() {
                return Err(Error::NotPrepared {
                    degree: k,
                    found: deg,
                });
            }
        }
    }
    let order = r.order();
    let parts: Vec<VectorFieldJet<S>> = r.fields().iter().map(|f| f.homogeneous(k)).collect();
    let lin: Vec<VectorFieldJet<S>> = r.fields().iter().map(|f| f.homogeneous(1)).collect();
    debug_assert!(lin.iter().all(|f| f.order() == order));
    let cocycle_residual = cocycle_residual(r.algebra(), &lin, &parts);
    Ok(HomogeneousCochain {
        degree: k,
        parts,
        cocycle_residual,
    })
}

/// Solves `[A_i x, h] = -R_i` for a homogeneous `h` of degree `R.degree`,
/// taking the minimum-norm solution when several exist.
pub fn solve_homological<S: Scalar>(
    lp: &LinearPart<S>,
    r: &HomogeneousCochain<S>,
) -> Result<VectorFieldJet<S>> {
    let n = lp.nvars();
    let k = r.degree;
    let order = r.parts.first().map_or(k, VectorFieldJet::order);
    if r.is_zero() {
        return Ok(VectorFieldJet::zero(n, order));
    }
    let basis = Monomial::all_of_degree(n, k);
    let actions = field_actions(lp, n, k);
    let system = actions.iter().fold(Matrix::zeros(0, n * basis.len()), |acc, a| acc.vcat(a));
    let rhs: Vec<S> = r
        .parts
        .iter()
        .flat_map(|p| p.coordinates(&basis))
        .map(|c| -c)
        .collect();
    let no_solution = Error::NoSolution {
        op: "solve_homological",
        degree: k,
    };
    let x = system.solve_min_norm(&rhs).ok_or(no_solution.clone())?;
    let h = VectorFieldJet::from_coordinates(n, order, &basis, &x);
    // post-hoc check of every generator equation
    for (l, part) in lp.fields(order).iter().zip(&r.parts) {
        if !l.bracket(&h)?.add(part).is_negligible() {
            return Err(no_solution);
        }
    }
    Ok(h)
}

/// Output of [`linearize_rep`].
#[derive(Clone, Debug)]
pub struct Linearization<S> {
    /// Coordinate change with identity linear part.
    pub map: PolyMap<S>,
    /// The representation pushed forward by `map`.
    pub linear: Representation<S>,
    /// `(degree, defect norm before the correction)`.
    pub defects: Vec<(u32, S)>,
}

/// Finds `m` with identity linear part such that `m_* ρ` is linear to order
/// `order`.
pub fn linearize_rep<S: Scalar>(r: &Representation<S>, order: u32) -> Result<Linearization<S>> {
    if order > r.order() {
        return Err(Error::Dimension {
            op: "linearize_rep",
            expected: r.order() as usize,
            found: order as usize,
        });
    }
    let n = r.nvars();
    let lp = linear_part(r);
    let mut cur = r.with_order(order);
    let mut total = PolyMap::identity(n, order);
    let mut defects = Vec::new();
    for k in 2..=order {
        let defect = cocycle_defect(&cur, k)?;
        defects.push((k, defect.norm()));
        if defect.is_zero() {
            continue;
        }
        if !defect.cocycle_residual.is_negligible() {
            return Err(Error::NoSolution {
                op: "linearize_rep",
                degree: k,
            });
        }
        let h = solve_homological(&lp, &defect)?;
        let step = PolyMap::new(
            (0..n)
                .map(|i| &crate::jet::Jet::var(n, order, i) + h.comp(i))
                .collect(),
        )?;
        cur = pushforward_rep(&cur, &step)?;
        total = step.compose(&total)?;
    }
    if !cur.is_linear() {
        let found = cur
            .fields()
            .iter()
            .filter_map(|f| f.degree_range(2, order).valuation())
            .min()
            .unwrap_or(order);
        return Err(Error::NoSolution {
            op: "linearize_rep",
            degree: found,
        });
    }
    Ok(Linearization {
        map: total,
        linear: cur,
        defects,
    })
}
