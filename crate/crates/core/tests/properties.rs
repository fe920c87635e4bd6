//! Algebraic identities on random jets.

mod common;

use common::Q;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semilin_core::bform::{b_primitive, b_pullback, BForm};
use semilin_core::cotangent::cotangent_lift;
use semilin_core::field::{bracket_vf, VectorFieldJet};
use semilin_core::form::poincare_primitive;
use semilin_core::jet::Jet;
use semilin_core::lie::{check_representation, pushforward_rep, sl2_linear_rep};
use semilin_core::poisson::BivectorJet;
use semilin_core::polymap::PolyMap;
use semilin_core::symplectic::{darboux, standard_symplectic};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn jet_ring_laws(seed: u64, n in 1usize..4, order in 1u32..6) {
        let mut r = rng(seed);
        let a = common::jet(&mut r, n, order, 0, order, 0.4);
        let b = common::jet(&mut r, n, order, 0, order, 0.4);
        let c = common::jet(&mut r, n, order, 0, order, 0.4);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn canonical_strings_round_trip(seed: u64, n in 1usize..5, order in 0u32..6) {
        let a = common::jet(&mut rng(seed), n, order, 0, order, 0.4);
        let s = a.to_canonical();
        prop_assert_eq!(Jet::parse(&s, n, order).unwrap(), a);
    }

    #[test]
    fn derivative_is_a_derivation(seed: u64, n in 1usize..4, i in 0usize..3) {
        let i = i % n;
        let order = 5;
        let mut r = rng(seed);
        let a = common::jet(&mut r, n, order, 0, order, 0.4);
        let b = common::jet(&mut r, n, order, 0, order, 0.4);
        // the product rule holds below the truncation order
        let lhs = (&a * &b).derivative(i).with_order(order - 1);
        let rhs = (&(&a.derivative(i) * &b) + &(&a * &b.derivative(i))).with_order(order - 1);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_composes_to_identity(seed: u64, n in 1usize..4, order in 2u32..6) {
        let m = common::diffeo(&mut rng(seed), n, order, order, 0.3);
        let inv = m.inverse().unwrap();
        prop_assert_eq!(m.compose(&inv).unwrap(), PolyMap::identity(n, order));
        prop_assert_eq!(inv.compose(&m).unwrap(), PolyMap::identity(n, order));
    }

    #[test]
    fn composition_is_associative(seed: u64, n in 1usize..4) {
        let order = 4;
        let mut r = rng(seed);
        let a = common::diffeo(&mut r, n, order, 3, 0.3);
        let b = common::diffeo(&mut r, n, order, 3, 0.3);
        let c = common::diffeo(&mut r, n, order, 3, 0.3);
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn d_squared_is_zero(seed: u64, n in 2usize..5, degree in 0usize..3) {
        let eta = common::form(&mut rng(seed), n, 4, degree.min(n), 0.3);
        prop_assert!(eta.exterior_d().exterior_d().is_zero());
    }

    #[test]
    fn homotopy_inverts_d_on_closed_forms(seed: u64, n in 2usize..5, degree in 0usize..3) {
        let beta = common::form(&mut rng(seed), n, 5, degree.min(n - 1), 0.3);
        let closed = beta.exterior_d();
        let back = poincare_primitive(&closed).unwrap().exterior_d().with_order(closed.order());
        prop_assert_eq!(back, closed);
    }

    #[test]
    fn pullback_is_functorial_and_commutes_with_d(seed: u64, n in 2usize..4, degree in 0usize..3) {
        let order = 4;
        let mut r = rng(seed);
        let m1 = common::diffeo(&mut r, n, order + 1, 3, 0.2);
        let m2 = common::diffeo(&mut r, n, order + 1, 3, 0.2);
        let eta = common::form(&mut r, n, order, degree.min(n), 0.3);
        let lhs = eta.pullback(&m1.compose(&m2).unwrap()).unwrap();
        let rhs = eta.pullback(&m1).unwrap().pullback(&m2).unwrap();
        prop_assert_eq!(lhs, rhs);
        // d keeps the order label, so only degrees below it are exact
        let d_then_pull = eta.exterior_d().pullback(&m1).unwrap().with_order(order - 1);
        let pull_then_d = eta.pullback(&m1).unwrap().exterior_d().with_order(order - 1);
        prop_assert_eq!(d_then_pull, pull_then_d);
    }

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(seed: u64, n in 1usize..4) {
        let order = 4;
        let mut r = rng(seed);
        let (u, v, w) = (common::field(&mut r, n, order, 0.3), common::field(&mut r, n, order, 0.3), common::field(&mut r, n, order, 0.3));
        let br = |a: &VectorFieldJet<Q>, b: &VectorFieldJet<Q>| bracket_vf(a, b).unwrap();
        prop_assert!(br(&u, &v).add(&br(&v, &u)).is_zero());
        let jac = br(&u, &br(&v, &w)).add(&br(&v, &br(&w, &u))).add(&br(&w, &br(&u, &v)));
        prop_assert!(jac.is_zero());
    }

    #[test]
    fn cotangent_lift_is_a_homomorphism(seed: u64, n in 1usize..4) {
        let order = 4;
        let mut r = rng(seed);
        let u = common::field(&mut r, n, order, 0.3);
        let v = common::field(&mut r, n, order, 0.3);
        let top = order - 1;
        let lift_of_bracket = cotangent_lift(&bracket_vf(&u, &v).unwrap()).with_order(top);
        let bracket_of_lifts = bracket_vf(&cotangent_lift(&u), &cotangent_lift(&v)).unwrap().with_order(top);
        prop_assert_eq!(lift_of_bracket, bracket_of_lifts);
    }

    #[test]
    fn pushforward_preserves_relations(seed: u64, order in 2u32..5) {
        let m = common::diffeo(&mut rng(seed), 3, order, order, 0.25);
        let r = pushforward_rep(&sl2_linear_rep::<Q>(order), &m).unwrap();
        prop_assert!(check_representation(&r).residual.is_zero());
    }

    #[test]
    fn pullback_of_a_b_form_is_closed(seed: u64) {
        let order = 3;
        let mut r = rng(seed);
        let mut comps: Vec<Jet<Q>> = (0..4).map(|i| &Jet::var(4, order + 2, i) + &common::jet(&mut r, 4, order + 2, 2, order + 2, 0.15)).collect();
        comps[2] = &Jet::var(4, order + 2, 2) + &common::jet(&mut r, 4, order + 2, 1, order + 1, 0.2).mul_var(2);
        let m = PolyMap::new(comps).unwrap();
        let omega = b_pullback(&BForm::standard(4, order), &m).unwrap();
        prop_assert!(omega.b_d().is_zero());
        let alpha = b_primitive(&omega.sub(&BForm::standard(4, order))).unwrap();
        let back = alpha.b_d().with_order(order);
        prop_assert_eq!(back, omega.sub(&BForm::standard(4, order)));
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn darboux_normalizes_pulled_back_forms(seed: u64, n in 1usize..3) {
        let nv = 2 * n;
        let order = 3;
        let m = common::diffeo(&mut rng(seed), nv, order + 1, order + 1, 0.2);
        let omega = standard_symplectic::<Q>(nv, order + 1).pullback(&m).unwrap();
        let out = darboux(&omega, order).unwrap();
        let pulled = omega.pullback(&out.map).unwrap().with_order(order);
        prop_assert_eq!(pulled, standard_symplectic(nv, order));
    }

    #[test]
    fn schouten_is_twice_the_jacobiator(seed: u64) {
        let (n, order) = (3, 3);
        let mut r = rng(seed);
        let terms: Vec<(usize, usize, Jet<Q>)> = [(0, 1), (1, 2), (0, 2)]
            .into_iter()
            .map(|(i, j)| (i, j, common::jet(&mut r, n, order, 0, order, 0.4)))
            .collect();
        let pi = BivectorJet::from_terms(n, order, terms).unwrap();
        let x = |i: usize| Jet::var(n, order, i);
        let jac = &(&pi.bracket(&x(0), &pi.bracket(&x(1), &x(2))) + &pi.bracket(&x(1), &pi.bracket(&x(2), &x(0))))
            + &pi.bracket(&x(2), &pi.bracket(&x(0), &x(1)));
        let s = pi.schouten_square().comp(0, 1, 2);
        let jac = jac.with_order(s.order());
        // [Π, Π]^{ijk} = -2 ({x_i, {x_j, x_k}} + cyclic) with this sign convention
        prop_assert_eq!(s, jac.scale(&common::q(-2, 1)));
    }
}
