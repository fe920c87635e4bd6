//! Time-one maps of time-dependent polynomial vector fields.
//!
//! Coefficients are polynomials in `t` whose coefficients are jets. The flow
//! `φ_t = x + ∫_0^t X_s(φ_s) ds` is found by Picard iteration, which reaches
//! a fixed point in finitely many steps when the linear part of `X` is
//! (jointly) nilpotent.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::VectorFieldJet;
use crate::jet::Jet;
use crate::linalg::Matrix;
use crate::polymap::PolyMap;
use crate::scalar::Scalar;

/// `X_t = Σ_q t^q X_q`.
#[derive(Clone, PartialEq, Debug)]
pub struct TimePolyVectorField<S> {
    coeffs: Vec<VectorFieldJet<S>>,
}

impl<S: Scalar> TimePolyVectorField<S> {
    /// From coefficients of `t^0, t^1, …`.
    pub fn new(coeffs: Vec<VectorFieldJet<S>>) -> Self {
        TimePolyVectorField { coeffs }
    }

    pub fn constant(v: VectorFieldJet<S>) -> Self {
        TimePolyVectorField { coeffs: vec![v] }
    }

    pub fn coeffs(&self) -> &[VectorFieldJet<S>] {
        &self.coeffs
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.first().map_or(0, VectorFieldJet::nvars)
    }

    pub fn order(&self) -> u32 {
        self.coeffs.first().map_or(0, VectorFieldJet::order)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(VectorFieldJet::is_zero)
    }

    /// Linear space-part of each `t` coefficient.
    pub fn linear_parts(&self) -> Vec<Matrix<S>> {
        self.coeffs.iter().map(VectorFieldJet::linear_part).collect()
    }
}

/// A polynomial in `t` with jet coefficients.
type TPoly<S> = Vec<Jet<S>>;

fn tpoly_trim<S: Scalar>(mut p: TPoly<S>) -> TPoly<S> {
    while p.len() > 1 && p.last().is_some_and(Jet::is_zero) {
        p.pop();
    }
    p
}

fn tpoly_add<S: Scalar>(a: &TPoly<S>, b: &TPoly<S>) -> TPoly<S> {
    let n = a.len().max(b.len());
    let zero = || Jet::zero(a[0].nvars(), a[0].order());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => zero(),
        })
        .collect();
    tpoly_trim(out)
}

fn tpoly_mul<S: Scalar>(a: &TPoly<S>, b: &TPoly<S>) -> TPoly<S> {
    let nv = a[0].nvars();
    let order = a[0].order();
    let mut out = vec![Jet::zero(nv, order); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    tpoly_trim(out)
}

/// `f(args)` where `f` has jet coefficients and `args` are t-polynomials.
fn tpoly_substitute<S: Scalar>(f: &Jet<S>, args: &[TPoly<S>], cache: &mut Vec<Vec<TPoly<S>>>) -> TPoly<S> {
    let nv = args[0][0].nvars();
    let order = args[0][0].order();
    let mut acc: TPoly<S> = vec![Jet::zero(nv, order)];
    for (m, c) in f.terms() {
        let mut term: TPoly<S> = vec![Jet::constant(nv, order, c.clone())];
        for (v, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let p = power(&args[v], e as usize, &mut cache[v]);
            term = tpoly_mul(&term, &p);
        }
        acc = tpoly_add(&acc, &term);
    }
    acc
}

fn power<S: Scalar>(base: &TPoly<S>, e: usize, cache: &mut Vec<TPoly<S>>) -> TPoly<S> {
    if cache.is_empty() {
        cache.push(base.clone());
    }
    while cache.len() < e {
        let next = tpoly_mul(cache.last().expect("nonempty"), base);
        cache.push(next);
    }
    cache[e - 1].clone()
}

/// True when every product of `n` matrices drawn from `mats` vanishes.
fn jointly_nilpotent<S: Scalar>(mats: &[Matrix<S>], n: usize) -> bool {
    let mut span: Vec<Vec<S>> = (0..n)
        .map(|i| {
            let mut v = vec![S::zero(); n];
            v[i] = S::one();
            v
        })
        .collect();
    for _ in 0..n {
        let images: Vec<Vec<S>> = span
            .iter()
            .flat_map(|v| mats.iter().map(move |a| a.mul_vec(v)))
            .filter(|w| !w.iter().all(Scalar::is_negligible))
            .collect();
        if images.is_empty() {
            return true;
        }
        let m = Matrix::from_columns(&images);
        let (_, pivots) = m.rref();
        span = pivots.iter().map(|&c| m.column(c)).collect();
    }
    span.is_empty()
}

/// Time-one map of `X`, as a map with the field's order.
pub fn formal_flow<S: Scalar>(x: &TimePolyVectorField<S>, order: u32) -> Result<PolyMap<S>> {
    let n = x.nvars();
    if x.coeffs.iter().any(|c| !c.vanishes_at_origin()) {
        return Err(Error::IllPosed);
    }
    let lin = x.linear_parts();
    if !jointly_nilpotent(&lin, n) {
        return Err(Error::IllPosed);
    }
    let fields: Vec<VectorFieldJet<S>> = x.coeffs.iter().map(|c| c.with_order(order)).collect();
    if x.is_zero() {
        return Ok(PolyMap::identity(n, order));
    }
    // φ[i] is the t-polynomial for component i
    let ident: Vec<TPoly<S>> = (0..n).map(|i| vec![Jet::var(n, order, i)]).collect();
    let mut phi = ident.clone();
    // each pass fixes one more step of the (degree, nilpotency) filtration
    let cap = (order as usize + 2) * (n + 2) + 8;
    for _ in 0..cap {
        let mut caches: Vec<Vec<TPoly<S>>> = vec![Vec::new(); n];
        let mut integrand: Vec<TPoly<S>> = vec![vec![Jet::zero(n, order)]; n];
        for (q, xq) in fields.iter().enumerate() {
            if xq.is_zero() {
                continue;
            }
            for (i, comp) in xq.comps().iter().enumerate() {
                if comp.is_zero() {
                    continue;
                }
                let mut val = tpoly_substitute(comp, &phi, &mut caches);
                // multiply by s^q
                let mut shifted = vec![Jet::zero(n, order); q];
                shifted.append(&mut val);
                integrand[i] = tpoly_add(&integrand[i], &shifted);
            }
        }
        let next: Vec<TPoly<S>> = (0..n)
            .map(|i| {
                let mut p: TPoly<S> = vec![Jet::zero(n, order)];
                for (k, c) in integrand[i].iter().enumerate() {
                    p.push(c.scale(&(S::one() / S::from_i64(k as i64 + 1))));
                }
                tpoly_add(&ident[i], &tpoly_trim(p))
            })
            .collect();
        if next == phi {
            let comps = phi
                .iter()
                .map(|p| p.iter().fold(Jet::zero(n, order), |acc, c| &acc + c))
                .collect();
            return PolyMap::new(comps);
        }
        phi = next;
    }
    Err(Error::NoConvergence { iterations: cap })
}

/// `Σ_q X_q` as a field, i.e. `X_t` at `t = 1`.
pub fn at_time_one<S: Scalar>(x: &TimePolyVectorField<S>) -> VectorFieldJet<S> {
    x.coeffs
        .iter()
        .skip(1)
        .fold(x.coeffs[0].clone(), |acc, c| acc.add(c))
}
