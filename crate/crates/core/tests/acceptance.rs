//! End-to-end acceptance checks. Runs without the test harness so that
//! every criterion prints one line; exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{q, Q};
use semilin_core::bform::{b_darboux, b_pullback, BForm};
use semilin_core::cotangent::{
    check_hamiltonian, cotangent_lift, dmu_matrix, lift_representation, moment_map, strata_scan, Sampler,
};
use semilin_core::field::{bracket_vf, VectorFieldJet};
use semilin_core::form::{poincare_primitive, FormJet};
use semilin_core::jet::Jet;
use semilin_core::lie::{check_representation, linear_part, pushforward_rep, sl2, sl2_linear_rep, Representation};
use semilin_core::linalg::Matrix;
use semilin_core::linearize::linearize_rep;
use semilin_core::numeric::{bracket_residual_numeric, cairns_ghys_fields, cone_scan, DEFAULT_HALF_WIDTH};
use semilin_core::poisson::{weinstein_split, BivectorJet};
use semilin_core::polymap::PolyMap;
use num_traits::Zero;
use semilin_core::symplectic::{commutation_residual, equivariant_darboux, invariance_residual, standard_symplectic};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn parse(s: &str, n: usize, order: u32) -> Jet<Q> {
    Jet::parse(s, n, order).unwrap()
}

fn basis(i: usize) -> Vec<Q> {
    (0..3).map(|k| if k == i { q(1, 1) } else { q(0, 1) }).collect()
}

fn neg(v: Vec<Q>) -> Vec<Q> {
    v.into_iter().map(|x| -x).collect()
}

fn sl2_representation() -> Outcome {
    let t = Instant::now();
    let r = sl2_linear_rep::<Q>(4);
    let chk = check_representation(&r);
    ensure(chk.residual.is_zero(), || format!("residual {}", chk.residual))?;
    let g = sl2::<Q>();
    let (x, y, z) = (0, 1, 2);
    ensure(g.bracket(&basis(x), &basis(y)) == neg(basis(z)), || "[X,Y] != -Z".into())?;
    ensure(g.bracket(&basis(z), &basis(x)) == basis(y), || "[Z,X] != Y".into())?;
    ensure(g.bracket(&basis(z), &basis(y)) == neg(basis(x)), || "[Z,Y] != -X".into())?;
    within(t.elapsed(), 1.0)?;
    Ok("residual 0, bracket table matches".into())
}

fn linearize_conjugations() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let instances = 24;
    for k in 0..instances {
        let order = 3 + (k % 4) as u32;
        let psi = common::diffeo(&mut rng, 3, order, order, 0.25);
        let conj = pushforward_rep(&sl2_linear_rep::<Q>(order), &psi).map_err(|e| e.to_string())?;
        let out = linearize_rep(&conj, order).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(out.map.has_identity_linear_part(), || format!("instance {k}: linear part moved"))?;
        // oracle: push the conjugated action forward and compare with its linear part
        let pushed = pushforward_rep(&conj, &out.map).map_err(|e| e.to_string())?;
        let target = Representation::linear(sl2(), &linear_part(&conj), order).unwrap();
        for (a, b) in pushed.fields().iter().zip(target.fields()) {
            let r = a.sub(b).max_abs_coeff();
            ensure(r.is_zero(), || format!("instance {k} (order {order}): residual {r}"))?;
        }
    }
    within(t.elapsed(), 10.0)?;
    Ok(format!("{instances} conjugations, orders 3..=6, exact"))
}

fn equivariant_darboux_instances() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plane = common::sl2_plane();
    let space = linear_part(&sl2_linear_rep::<Q>(1));
    let j2 = Matrix::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(-1, 1), q(0, 1)]]);
    let minkowski = Matrix::from_rows(vec![
        vec![q(1, 1), q(0, 1), q(0, 1)],
        vec![q(0, 1), q(1, 1), q(0, 1)],
        vec![q(0, 1), q(0, 1), q(-1, 1)],
    ]);
    let cases: Vec<(&_, &Matrix<Q>, u32)> = vec![
        (&plane, &j2, 5),
        (&plane, &j2, 5),
        (&plane, &j2, 5),
        (&plane, &j2, 4),
        (&plane, &j2, 5),
        (&space, &minkowski, 4),
        (&space, &minkowski, 3),
        (&space, &minkowski, 4),
        (&space, &minkowski, 3),
        (&space, &minkowski, 4),
        (&space, &minkowski, 5),
    ];
    let total = cases.len();
    for (k, (base, g, order)) in cases.into_iter().enumerate() {
        let lp = common::lifted_interleaved(base);
        let nv = lp.nvars();
        let phi = common::equivariant_map(&mut rng, g, order + 1, 0.6);
        let omega = standard_symplectic::<Q>(nv, order).pullback(&phi).map_err(|e| e.to_string())?;
        ensure(invariance_residual(&omega, &lp).iter().all(|r| r.is_zero()), || {
            format!("instance {k}: fixture not invariant")
        })?;
        let m = equivariant_darboux(&omega, &lp, order).map_err(|e| format!("instance {k}: {e}"))?;
        let pull = omega.pullback(&m).map_err(|e| e.to_string())?;
        let r = pull.sub(&standard_symplectic(nv, order)).max_abs_coeff();
        ensure(r.is_zero(), || format!("instance {k}: pullback residual {r}"))?;
        for c in commutation_residual(&m, &lp).map_err(|e| e.to_string())? {
            ensure(c.is_zero(), || format!("instance {k}: commutation residual {c}"))?;
        }
    }
    within(t.elapsed(), 30.0)?;
    Ok(format!("{total} instances on 4 and 6 variables, orders 3..=5, exact"))
}

fn moment_map_golden() -> Outcome {
    let r = sl2_linear_rep::<Q>(1);
    let mu = moment_map(&r);
    let names: Vec<String> = ["x", "y", "z", "a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let golden = ["z*b + c*y", "a*z + x*c", "-a*y + b*x"];
    for (i, (m, g)) in mu.iter().zip(golden).enumerate() {
        let g = Jet::parse_with(g, &names, m.order()).unwrap();
        ensure(m == &g, || format!("mu_{i} = {m}, expected {g}"))?;
    }
    let lifted = lift_representation(&r);
    for (i, (xi, m)) in lifted.fields().iter().zip(&mu).enumerate() {
        let res = check_hamiltonian(xi, m);
        ensure(res.is_zero(), || format!("generator {i}: residual {res}"))?;
    }
    Ok("mu = (zb+cy, az+xc, -ay+bx), Hamiltonian residual 0".into())
}

/// Rank of an exact matrix through its minors: the largest `r` with a
/// nonzero `r × r` minor.
fn rank_by_minors(m: &Matrix<Q>) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    for r in (1..=rows.min(cols)).rev() {
        for rs in subsets(rows, r) {
            for cs in subsets(cols, r) {
                let sub = Matrix::from_rows(rs.iter().map(|&i| cs.iter().map(|&j| m[(i, j)].clone()).collect()).collect());
                if !sub.determinant().is_zero() {
                    return r;
                }
            }
        }
    }
    0
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn strata() -> Outcome {
    let mu = moment_map(&sl2_linear_rep::<Q>(1));
    let grid = strata_scan(&mu, &Sampler::ZeroSectionAndFiber { side: 8, half_width: 2 });
    ensure(grid.counts.keys().all(|r| *r == 0 || *r == 2), || format!("grid ranks {:?}", grid.counts))?;
    let boxed = strata_scan(
        &mu,
        &Sampler::RandomBox {
            seed: 5,
            samples: 1000,
            half_width: 3,
            denominator: 7,
        },
    );
    let generic = boxed.fraction(3);
    ensure(generic > 0.95, || format!("rank 3 at {:.3} of box samples", generic))?;
    for report in [&grid, &boxed] {
        for (rank, pt) in &report.witnesses {
            let exact = rank_by_minors(&dmu_matrix(&mu, pt));
            ensure(exact == *rank, || format!("witness for rank {rank} has minor rank {exact}"))?;
        }
    }
    Ok(format!(
        "grid of {} points has ranks {:?}; box rank 3 at {:.1}%; witnesses exact",
        grid.total,
        grid.counts.keys().collect::<Vec<_>>(),
        100.0 * generic
    ))
}

fn cairns_ghys() -> Outcome {
    let t = Instant::now();
    let fields = cairns_ghys_fields();
    let scan = cone_scan(&fields, 7, 1000, DEFAULT_HALF_WIDTH).map_err(|e| e.to_string())?;
    let (inside, outside): (Vec<_>, Vec<_>) = scan.iter().partition(|p| p.inside_cone);
    let full = outside.iter().filter(|p| p.rank == 3).count() as f64 / outside.len().max(1) as f64;
    ensure(full >= 0.99, || format!("rank 3 at {:.4} outside the cone", full))?;
    ensure(!inside.is_empty() && inside.iter().all(|p| p.rank <= 2), || "rank 3 inside the cone".into())?;
    let pts: Vec<Vec<f64>> = scan.iter().take(100).map(|p| p.point.to_vec()).collect();
    let res = bracket_residual_numeric(&fields, &sl2::<f64>(), &pts).map_err(|e| e.to_string())?;
    ensure(res < 1e-9, || format!("bracket residual {res:e}"))?;
    within(t.elapsed(), 5.0)?;
    Ok(format!(
        "outside: rank 3 at {:.1}% of {}; inside: {} points, all rank <= 2; bracket residual {res:.1e}",
        100.0 * full,
        outside.len(),
        inside.len()
    ))
}

fn b_log_fixture(order: u32) -> BForm<Q> {
    let smooth = FormJet::from_terms(4, order, 2, [(vec![0, 1], parse("1", 4, order))]).unwrap();
    let log = FormJet::from_terms(4, order, 1, [(vec![3], parse("1 + x3", 4, order))]).unwrap();
    BForm::new(&smooth, &log, 2).unwrap()
}

/// Random map preserving `z = 0`: `m^z = z u` with `u(0) ≠ 0`.
fn b_map(rng: &mut ChaCha8Rng, n: usize, z: usize, order: u32) -> PolyMap<Q> {
    loop {
        let mut lin = common::invertible(rng, n);
        for j in 0..n {
            lin[(z, j)] = q(0, 1);
        }
        lin[(z, z)] = q(rng.gen_range(1..=3), 1);
        if lin.determinant().is_zero() {
            continue;
        }
        let comps = (0..n)
            .map(|i| {
                let l = (0..n).fold(Jet::zero(n, order), |acc, j| &acc + &Jet::var(n, order, j).scale(&lin[(i, j)]));
                if i == z {
                    &l + &common::jet(rng, n, order, 1, order - 1, 0.2).mul_var(z)
                } else {
                    &l + &common::jet(rng, n, order, 2, order, 0.15)
                }
            })
            .collect();
        return PolyMap::new(comps).unwrap();
    }
}

fn b_darboux_instances() -> Outcome {
    let order = 5;
    let check = |omega: &BForm<Q>, label: &str| -> Result<(), String> {
        let out = b_darboux(omega, order).map_err(|e| format!("{label}: {e}"))?;
        let pulled = b_pullback(omega, &out.map).map_err(|e| e.to_string())?;
        let r = pulled.sub(&BForm::standard(omega.nvars(), order)).max_abs_coeff();
        ensure(pulled.order() == order && r.is_zero(), || format!("{label}: residual {r}"))?;
        ensure(out.map.comp(omega.z()).div_var(omega.z()).is_some(), || {
            format!("{label}: z-component not divisible by z")
        })
    };
    check(&b_log_fixture(order), "fixture")?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let instances = 10;
    for k in 0..instances {
        let m = b_map(&mut rng, 4, 2, order + 2);
        let omega = b_pullback(&BForm::standard(4, order), &m).map_err(|e| e.to_string())?;
        check(&omega, &format!("instance {k}"))?;
    }
    Ok(format!("fixture and {instances} random pullbacks, order {order}, exact"))
}

/// `Σ_{i<j} g ε^{ijk} ∂_k h ∂_i∧∂_j` on three variables starting at
/// `offset`, which is Poisson for any `g`, `h`.
fn curl_type(n: usize, offset: usize, g: &Jet<Q>, h: &Jet<Q>) -> Vec<(usize, usize, Jet<Q>)> {
    let v = |k: usize| g * &h.derivative(offset + k);
    debug_assert!(offset + 3 <= n);
    vec![(offset + 1, offset + 2, v(0)), (offset + 2, offset, v(1)), (offset, offset + 1, v(2))]
}

fn random_split(rng: &mut ChaCha8Rng, n: usize, k: usize, order: u32) -> BivectorJet<Q> {
    let mut terms: Vec<(usize, usize, Jet<Q>)> = (0..k).map(|i| (2 * i, 2 * i + 1, Jet::one(n, order))).collect();
    let transverse: Vec<usize> = (2 * k..n).collect();
    let restricted = |rng: &mut ChaCha8Rng, lo: u32| {
        common::jet(rng, transverse.len(), order, lo, order, 0.4).embed(n, &transverse)
    };
    match transverse.len() {
        2 => terms.push((transverse[0], transverse[1], restricted(rng, 1))),
        3 => {
            let g = restricted(rng, 0);
            let h = restricted(rng, 2);
            terms.extend(curl_type(n, transverse[0], &g.with_order(order + 1), &h.with_order(order + 1)))
        }
        _ => {}
    }
    BivectorJet::from_terms(n, order, terms.into_iter().map(|(i, j, f)| (i, j, f.with_order(order)))).unwrap()
}

/// `(Dm P Dmᵀ) ∘ m⁻¹`, written out with the Jacobian.
fn pushforward_by_jacobian(pi: &BivectorJet<Q>, m: &PolyMap<Q>) -> Vec<Vec<Jet<Q>>> {
    let n = pi.nvars();
    let order = pi.order();
    let dm = m.jacobian();
    let inv = m.with_order(order).inverse().unwrap();
    let mut out = vec![vec![Jet::zero(n, order); n]; n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = Jet::zero(n, order);
            for i in 0..n {
                for j in 0..n {
                    let t = &(&dm[a][i].with_order(order) * pi.entry(i, j)) * &dm[b][j].with_order(order);
                    acc = &acc + &t;
                }
            }
            out[a][b] = acc.compose(inv.comps()).unwrap();
        }
    }
    out
}

fn poisson_layer() -> Outcome {
    let t = Instant::now();
    let fixtures = [
        BivectorJet::from_terms(2, 4, [(0, 1, parse("1", 2, 4))]).unwrap(),
        BivectorJet::from_terms(4, 4, [(0, 1, parse("1", 4, 4)), (2, 3, parse("x3", 4, 4))]).unwrap(),
        BivectorJet::from_terms(3, 4, [(0, 1, parse("1", 3, 4))]).unwrap(),
        BivectorJet::from_terms(4, 4, [(0, 1, parse("1", 4, 4)), (2, 3, parse("x3 + x4^2", 4, 4))]).unwrap(),
    ];
    for (i, f) in fixtures.iter().enumerate() {
        let r = f.check_poisson();
        ensure(r.is_zero(), || format!("fixture {i}: residual {r}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shapes = [(4, 1), (5, 1), (5, 2), (3, 1), (4, 2), (4, 1), (5, 1), (5, 2), (4, 0), (5, 1), (3, 1), (4, 1)];
    let order = 4;
    for (k, &(n, pairs)) in shapes.iter().enumerate() {
        let split = random_split(&mut rng, n, pairs, order);
        ensure(split.check_poisson().is_zero(), || format!("instance {k}: split fixture not Poisson"))?;
        let m = common::diffeo(&mut rng, n, order + 1, 3, 0.2);
        let pi = split.pushforward(&m).map_err(|e| e.to_string())?;
        let out = weinstein_split(&pi, order).map_err(|e| format!("instance {k} (n={n}): {e}"))?;
        ensure(out.rank == 2 * pairs, || format!("instance {k}: rank {} != {}", out.rank, 2 * pairs))?;
        let p = pushforward_by_jacobian(&pi, &out.map);
        let r = out.rank;
        for a in 0..n {
            for b in a + 1..n {
                let f = &p[a][b];
                let ok = if b < r {
                    let delta = if a % 2 == 0 && b == a + 1 { q(1, 1) } else { q(0, 1) };
                    *f == Jet::constant(n, order, delta)
                } else if a < r {
                    f.is_zero()
                } else {
                    f.constant_term().is_zero() && f.terms().all(|(mono, _)| (0..r).all(|u| mono.exponent(u) == 0))
                };
                ensure(ok, || format!("instance {k}: entry ({a},{b}) = {f} not in split form"))?;
            }
        }
    }
    within(t.elapsed(), 60.0)?;
    Ok(format!(
        "{} fixtures Poisson; {} random pushforwards (dim 3..=5, order {order}) split exactly",
        fixtures.len(),
        shapes.len()
    ))
}

fn calculus_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let runs = 50;
    for k in 0..runs {
        let n = 3 + k % 2;
        let order = 4;
        let degree = k % 3;
        let eta = common::form(&mut rng, n, order, degree, 0.3);
        let dd = eta.exterior_d().exterior_d();
        ensure(dd.is_zero(), || format!("d^2 run {k}: {}", dd.max_abs_coeff()))?;

        let beta = common::form(&mut rng, n, order + 1, 1 + k % 2, 0.3);
        let closed = beta.exterior_d();
        let h = poincare_primitive(&closed).map_err(|e| e.to_string())?;
        let back = h.exterior_d().with_order(closed.order());
        ensure(back == closed, || format!("d H run {k}"))?;

        let m1 = common::near_identity(&mut rng, n, order + 1, 3, 0.2);
        let m2 = common::diffeo(&mut rng, n, order + 1, 3, 0.2);
        let omega = common::form(&mut rng, n, order, 2, 0.3);
        let lhs = omega.pullback(&m1.compose(&m2).unwrap()).unwrap();
        let rhs = omega.pullback(&m1).unwrap().pullback(&m2).unwrap();
        ensure(lhs == rhs, || format!("pullback functoriality run {k}"))?;

        let (u, v, w) = (common::field(&mut rng, n, order, 0.3), common::field(&mut rng, n, order, 0.3), common::field(&mut rng, n, order, 0.3));
        let top = order - 1;
        let lift_of_bracket = cotangent_lift(&bracket_vf(&u, &v).unwrap()).with_order(top);
        let bracket_of_lifts = bracket_vf(&cotangent_lift(&u), &cotangent_lift(&v)).unwrap().with_order(top);
        ensure(lift_of_bracket == bracket_of_lifts, || format!("lift homomorphism run {k}"))?;

        let br = |a: &VectorFieldJet<Q>, b: &VectorFieldJet<Q>| bracket_vf(a, b).unwrap();
        let jac = br(&u, &br(&v, &w)).add(&br(&v, &br(&w, &u))).add(&br(&w, &br(&u, &v)));
        ensure(jac.is_zero(), || format!("Jacobi run {k}"))?;
    }
    Ok(format!("d^2 = 0, d H = id, pullback functoriality, lift homomorphism, Jacobi: {runs} runs each"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("sl2 representation", sl2_representation),
        ("linearization of conjugated actions", linearize_conjugations),
        ("equivariant Darboux", equivariant_darboux_instances),
        ("moment map", moment_map_golden),
        ("orbit strata", strata),
        ("Cairns-Ghys numerics", cairns_ghys),
        ("b-Darboux", b_darboux_instances),
        ("Poisson and splitting", poisson_layer),
        ("calculus invariants", calculus_invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.2} s]", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {reason} [{secs:.2} s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
