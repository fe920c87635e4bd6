//! Random fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use semilin_core::field::VectorFieldJet;
use semilin_core::form::FormJet;
use semilin_core::jet::{Jet, Monomial};
use semilin_core::lie::{sl2, LinearPart, Representation};
use semilin_core::linalg::Matrix;
use semilin_core::polymap::PolyMap;
use semilin_core::scalar::{Rational, Scalar};

pub type Q = Rational;

pub fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

/// Small nonzero rational: `±k/d` with `k ≤ 3`, `d ∈ {1, 2}`.
pub fn coeff(rng: &mut (impl Rng + ?Sized)) -> Q {
    let k = rng.gen_range(1..=3);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    q(sign * k, rng.gen_range(1..=2))
}

/// Random jet with terms of degree `lo..=hi`, each present with
/// probability `density`.
pub fn jet(rng: &mut (impl Rng + ?Sized), n: usize, order: u32, lo: u32, hi: u32, density: f64) -> Jet<Q> {
    let mut out = Jet::zero(n, order);
    for m in Monomial::all_in_degrees(n, lo, hi.min(order)) {
        if rng.gen_bool(density) {
            out.add_term(m, coeff(rng));
        }
    }
    out
}

pub fn invertible(rng: &mut (impl Rng + ?Sized), n: usize) -> Matrix<Q> {
    loop {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| Q::from_i64(rng.gen_range(-2..=2))).collect())
            .collect();
        let m = Matrix::from_rows(rows);
        if !m.determinant().is_negligible() {
            return m;
        }
    }
}

/// `x + h(x)` with `h` of degree `2..=hi`.
pub fn near_identity(rng: &mut (impl Rng + ?Sized), n: usize, order: u32, hi: u32, density: f64) -> PolyMap<Q> {
    PolyMap::new((0..n).map(|i| &Jet::var(n, order, i) + &jet(rng, n, order, 2, hi, density)).collect()).unwrap()
}

/// `L x + h(x)` with random invertible `L`.
pub fn diffeo(rng: &mut (impl Rng + ?Sized), n: usize, order: u32, hi: u32, density: f64) -> PolyMap<Q> {
    let lin = PolyMap::linear(&invertible(rng, n), order);
    near_identity(rng, n, order, hi, density).compose(&lin).unwrap()
}

/// Random vector field vanishing at the origin.
pub fn field(rng: &mut (impl Rng + ?Sized), n: usize, order: u32, density: f64) -> VectorFieldJet<Q> {
    VectorFieldJet::new((0..n).map(|_| jet(rng, n, order, 1, order, density)).collect()).unwrap()
}

pub fn form(rng: &mut (impl Rng + ?Sized), n: usize, order: u32, degree: usize, density: f64) -> FormJet<Q> {
    let mut out = FormJet::zero(n, order, degree);
    for idx in semilin_core::form::index_tuples(n, degree) {
        let idx: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
        out.add_term(&idx, jet(rng, n, order, 0, order, density));
    }
    out
}

/// Linear sl(2) action on `R²` with the same structure constants as the
/// action on `R³`.
pub fn sl2_plane() -> LinearPart<Q> {
    let h = q(1, 2);
    LinearPart::new(vec![
        Matrix::from_rows(vec![vec![h.clone(), q(0, 1)], vec![q(0, 1), -h.clone()]]),
        Matrix::from_rows(vec![vec![q(0, 1), h.clone()], vec![h.clone(), q(0, 1)]]),
        Matrix::from_rows(vec![vec![q(0, 1), h.clone()], vec![-h, q(0, 1)]]),
    ])
}

/// Cotangent lift of a linear action in the coordinates
/// `(p_1, q_1, p_2, q_2, ..)`, where `Σ dp_i ∧ dq_i` is standard.
pub fn lifted_interleaved(lp: &LinearPart<Q>) -> LinearPart<Q> {
    let n = lp.nvars();
    let qi = |i: usize| 2 * i + 1;
    let pi = |i: usize| 2 * i;
    LinearPart::new(
        lp.mats
            .iter()
            .map(|a| {
                let mut m = Matrix::zeros(2 * n, 2 * n);
                for i in 0..n {
                    for j in 0..n {
                        m[(qi(i), qi(j))] = a[(i, j)].clone();
                        m[(pi(i), pi(j))] = -a[(j, i)].clone();
                    }
                }
                m
            })
            .collect(),
    )
}

pub fn sl2_rep(lp: &LinearPart<Q>, order: u32) -> Representation<Q> {
    Representation::linear(sl2(), lp, order).unwrap()
}

/// An equivariant map for the lifted action, built from invariant
/// functions: `q ↦ g q + k G⁻¹p`, `p ↦ h p + l G q`, where `G` intertwines
/// the action on `q` with the dual action on `p`.
pub fn equivariant_map(rng: &mut impl Rng, g: &Matrix<Q>, order: u32, density: f64) -> PolyMap<Q> {
    let n = g.rows();
    let nv = 2 * n;
    let qv = |i: usize| Jet::<Q>::var(nv, order, 2 * i + 1);
    let pv = |i: usize| Jet::<Q>::var(nv, order, 2 * i);
    let ginv = g.inverse().unwrap();
    let pair = |m: &Matrix<Q>, a: &dyn Fn(usize) -> Jet<Q>, b: &dyn Fn(usize) -> Jet<Q>| {
        let mut acc = Jet::zero(nv, order);
        for i in 0..n {
            for j in 0..n {
                if !m[(i, j)].is_negligible() {
                    acc = &acc + &(&a(i) * &b(j)).scale(&m[(i, j)]);
                }
            }
        }
        acc
    };
    let id = Matrix::identity(n);
    let invariants = [pair(&id, &qv, &pv), pair(g, &qv, &qv), pair(&ginv, &pv, &pv)];
    // random polynomial in the invariants with zero constant term
    let poly = |rng: &mut dyn rand::RngCore| {
        let mut acc = Jet::zero(nv, order);
        for a in 0..3u32 {
            for b in 0..3u32 {
                for c in 0..3u32 {
                    let deg = a + b + c;
                    if deg == 0 || 2 * deg + 1 > order || !rng.gen_bool(density) {
                        continue;
                    }
                    let t = &(&invariants[0].pow(a) * &invariants[1].pow(b)) * &invariants[2].pow(c);
                    acc = &acc + &t.scale(&coeff(rng));
                }
            }
        }
        acc
    };
    let (gg, hh, kk, ll) = (poly(rng), poly(rng), poly(rng), poly(rng));
    let mut comps = vec![Jet::zero(nv, order); nv];
    for i in 0..n {
        let ginv_p = (0..n).fold(Jet::zero(nv, order), |acc, j| &acc + &pv(j).scale(&ginv[(i, j)]));
        let g_q = (0..n).fold(Jet::zero(nv, order), |acc, j| &acc + &qv(j).scale(&g[(i, j)]));
        comps[2 * i + 1] = &(&qv(i) + &(&gg * &qv(i))) + &(&kk * &ginv_p);
        comps[2 * i] = &(&pv(i) + &(&hh * &pv(i))) + &(&ll * &g_q);
    }
    PolyMap::new(comps).unwrap()
}
