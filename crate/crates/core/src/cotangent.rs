//! Cotangent lifts, moment maps and orbit-dimension strata.
//!
//! Coordinates on `T*R^n` are `(q_1..q_n, p_1..p_n)`, with Liouville form
//! `θ = Σ p_i dq_i` and `ω = dθ = Σ dp_i ∧ dq_i`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::VectorFieldJet;
use crate::form::FormJet;
use crate::jet::Jet;
use crate::lie::Representation;
use crate::linalg::{Matrix, RANK_REL_TOL};
use crate::scalar::Scalar;

/// Embeds a jet on `q` into `(q, p)` space.
fn lift_function<S: Scalar>(f: &Jet<S>, n: usize) -> Jet<S> {
    let positions: Vec<usize> = (0..n).collect();
    f.embed(2 * n, &positions)
}

/// `ξ̂ = Σ_j ξ^j ∂q_j - Σ_{i,j} p_j ∂_i ξ^j ∂p_i`.
pub fn cotangent_lift<S: Scalar>(xi: &VectorFieldJet<S>) -> VectorFieldJet<S> {
    let n = xi.nvars();
    let order = xi.order();
    let mut comps: Vec<Jet<S>> = xi.comps().iter().map(|c| lift_function(c, n)).collect();
    for i in 0..n {
        let mut acc = Jet::zero(2 * n, order);
        for j in 0..n {
            let d = xi.comp(j).derivative(i);
            if d.is_zero() {
                continue;
            }
            acc = &acc - &lift_function(&d, n).mul_var(n + j);
        }
        comps.push(acc);
    }
    VectorFieldJet::new(comps).expect("consistent lift")
}

/// Lifts every generator of a representation.
pub fn lift_representation<S: Scalar>(r: &Representation<S>) -> Representation<S> {
    let fields = r.fields().iter().map(cotangent_lift).collect();
    Representation::new(r.algebra().clone(), fields).expect("lifts vanish at the origin")
}

/// `θ = Σ p_i dq_i` on `2n` variables.
pub fn liouville_form<S: Scalar>(n: usize, order: u32) -> FormJet<S> {
    let mut theta = FormJet::zero(2 * n, order, 1);
    for i in 0..n {
        theta.add_term(&[i], Jet::var(2 * n, order, n + i));
    }
    theta
}

/// `ω = dθ`.
pub fn cotangent_symplectic<S: Scalar>(n: usize, order: u32) -> FormJet<S> {
    liouville_form(n, order + 1).exterior_d().with_order(order)
}

/// `μ_i = Σ_j p_j ξ_i^j(q)`, at order `ξ.order() + 1`.
pub fn moment_map<S: Scalar>(r: &Representation<S>) -> Vec<Jet<S>> {
    let n = r.nvars();
    let order = r.order() + 1;
    r.fields()
        .iter()
        .map(|xi| {
            let mut mu = Jet::zero(2 * n, order);
            for j in 0..n {
                let c = lift_function(&xi.comp(j).with_order(order), n);
                mu = &mu + &(&c * &Jet::var(2 * n, order, n + j));
            }
            mu
        })
        .collect()
}

/// `i_ξ̂ ω + dμ`, with everything raised to the order of `μ`.
pub fn hamiltonian_residual<S: Scalar>(xi_hat: &VectorFieldJet<S>, mu: &Jet<S>) -> FormJet<S> {
    let n = xi_hat.nvars() / 2;
    let order = mu.order().max(xi_hat.order());
    let omega = cotangent_symplectic(n, order);
    let lhs = omega.interior(&xi_hat.with_order(order));
    let dmu = FormJet::function(mu.with_order(order)).exterior_d();
    lhs.add(&dmu)
}

/// Largest coefficient of [`hamiltonian_residual`].
pub fn check_hamiltonian<S: Scalar>(xi_hat: &VectorFieldJet<S>, mu: &Jet<S>) -> S {
    hamiltonian_residual(xi_hat, mu).max_abs_coeff()
}

/// Jacobian of `μ` at a point (`d x 2n`).
pub fn dmu_matrix<S: Scalar>(mu: &[Jet<S>], pt: &[S]) -> Matrix<S> {
    Matrix::from_rows(
        mu.iter()
            .map(|m| m.gradient().iter().map(|g| g.eval(pt)).collect())
            .collect(),
    )
}

/// Rank of `dμ` at a point: exact for rationals, SVD-based for floats.
pub fn dmu_rank<S: Scalar>(mu: &[Jet<S>], pt: &[S]) -> usize {
    dmu_matrix(mu, pt).rank_auto(RANK_REL_TOL)
}

/// Dimension of the span of generator values at a point.
pub fn orbit_dimension<S: Scalar>(values: &[Vec<S>]) -> usize {
    if values.is_empty() || values[0].is_empty() {
        return 0;
    }
    Matrix::from_rows(values.to_vec()).rank_auto(RANK_REL_TOL)
}

/// Orbit dimension of a representation at a point.
pub fn orbit_dimension_at<S: Scalar>(r: &Representation<S>, pt: &[S]) -> usize {
    let values: Vec<Vec<S>> = r.fields().iter().map(|f| f.eval(pt)).collect();
    orbit_dimension(&values)
}

/// Maximal minors of `dμ` as jets: `(column indices, minor)`.
pub fn dmu_minors<S: Scalar>(mu: &[Jet<S>]) -> Vec<(Vec<usize>, Jet<S>)> {
    let d = mu.len();
    if d == 0 {
        return Vec::new();
    }
    let ncols = mu[0].nvars();
    let grads: Vec<Vec<Jet<S>>> = mu.iter().map(Jet::gradient).collect();
    let mut out = Vec::new();
    for cols in crate::form::index_tuples(ncols, d) {
        let cols: Vec<usize> = cols.iter().map(|&c| c as usize).collect();
        let sub: Vec<Vec<Jet<S>>> = grads
            .iter()
            .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
            .collect();
        out.push((cols, jet_determinant(&sub)));
    }
    out
}

/// Laplace expansion; only used on small matrices.
fn jet_determinant<S: Scalar>(m: &[Vec<Jet<S>>]) -> Jet<S> {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let proto = &m[0][0];
    let mut acc = Jet::zero(proto.nvars(), proto.order());
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Jet<S>>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, e)| e.clone()).collect())
            .collect();
        let t = &m[0][j] * &jet_determinant(&minor);
        acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

/// Where to sample for [`strata_scan`].
#[derive(Clone, Debug, PartialEq)]
pub enum Sampler {
    /// Grid points with coordinates `k / side * half_width`, `k ∈ [-side, side]`,
    /// on the planes `p = 0` and `q = 0` of `T*R^n`.
    ZeroSectionAndFiber { side: i64, half_width: i64 },
    /// Uniform random points in `[-half_width, half_width]^dim`, with
    /// rational coordinates of denominator `denominator`.
    RandomBox {
        seed: u64,
        samples: usize,
        half_width: i64,
        denominator: i64,
    },
    Points(Vec<Vec<(i64, i64)>>),
}

impl Sampler {
    /// Sample points as `(numerator, denominator)` pairs in a space of
    /// dimension `dim`.
    pub fn points(&self, dim: usize) -> Vec<Vec<(i64, i64)>> {
        match self {
            Sampler::ZeroSectionAndFiber { side, half_width } => {
                let n = dim / 2;
                let mut pts = Vec::new();
                for plane in 0..2 {
                    let mut idx = vec![-side; n];
                    loop {
                        let mut pt = vec![(0, 1); dim];
                        for (k, &i) in idx.iter().enumerate() {
                            pt[plane * n + k] = (i * half_width, *side);
                        }
                        pts.push(pt);
                        // odometer
                        let mut k = 0;
                        while k < n {
                            idx[k] += 1;
                            if idx[k] <= *side {
                                break;
                            }
                            idx[k] = -side;
                            k += 1;
                        }
                        if k == n {
                            break;
                        }
                    }
                }
                pts
            }
            Sampler::RandomBox {
                seed,
                samples,
                half_width,
                denominator,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let span = half_width * denominator;
                (0..*samples)
                    .map(|_| (0..dim).map(|_| (rng.gen_range(-span..=span), *denominator)).collect())
                    .collect()
            }
            Sampler::Points(p) => p.clone(),
        }
    }
}

/// Histogram of ranks with one witness point per rank.
#[derive(Clone, Debug, PartialEq)]
pub struct StrataReport<S> {
    pub total: usize,
    pub counts: BTreeMap<usize, usize>,
    pub witnesses: BTreeMap<usize, Vec<S>>,
    /// Per sample, in sampling order.
    pub samples: Vec<(Vec<S>, usize)>,
    /// Indices (into [`dmu_minors`]) of the minors vanishing at each witness.
    pub vanishing_minors: BTreeMap<usize, Vec<usize>>,
}

impl<S: Scalar> StrataReport<S> {
    pub fn fraction(&self, rank: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        *self.counts.get(&rank).unwrap_or(&0) as f64 / self.total as f64
    }
}

/// Rank of `dμ` over the sampled points.
pub fn strata_scan<S: Scalar>(mu: &[Jet<S>], sampler: &Sampler) -> StrataReport<S> {
    let dim = mu.first().map_or(0, Jet::nvars);
    let minors = dmu_minors(mu);
    let mut report = StrataReport {
        total: 0,
        counts: BTreeMap::new(),
        witnesses: BTreeMap::new(),
        samples: Vec::new(),
        vanishing_minors: BTreeMap::new(),
    };
    for raw in sampler.points(dim) {
        let pt: Vec<S> = raw.iter().map(|&(a, b)| S::from_ratio(a, b)).collect();
        let rank = dmu_rank(mu, &pt);
        report.total += 1;
        *report.counts.entry(rank).or_insert(0) += 1;
        if !report.witnesses.contains_key(&rank) {
            let vanishing = minors
                .iter()
                .enumerate()
                .filter(|(_, (_, m))| m.eval(&pt).is_negligible())
                .map(|(k, _)| k)
                .collect();
            report.vanishing_minors.insert(rank, vanishing);
            report.witnesses.insert(rank, pt.clone());
        }
        report.samples.push((pt, rank));
    }
    report
}
