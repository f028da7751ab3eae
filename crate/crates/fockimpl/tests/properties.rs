//! Property tests for structural invariants on random inputs.

use fockimpl::builders;
use fockimpl::car::fock::build_rep;
use fockimpl::car::implementers::{default_samples, implementers, verify_cuntz};
use fockimpl::car::structure::{
    chi_character, decompose, param_to_projection, projection_to_param, state_operator, FockParamCar,
};
use fockimpl::car::wick::{pair_state, pair_state_norm_formula};
use fockimpl::ccr::structure::{decompose_ccr, projection_from_z, z_from_projection, FockParamCcr};
use fockimpl::linalg;
use fockimpl::selfdual::{self, adjoint_kernel_dim};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sampler(seed: u64) -> impl FnMut() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || rng.gen_range(-1.0..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn car_composition_is_valid_and_index_additive(seed: u64, n in 1usize..3, dm in 0usize..2, dp in 0usize..2) {
        let mut s = sampler(seed);
        let (m, p) = (n + dm, n + dm + dp);
        let v = builders::random_car_map(n, m, 0.7, &mut s);
        let w = builders::random_car_map(m, p, 0.7, &mut s);
        let wv = w.compose(&v).unwrap();
        prop_assert!(selfdual::validate(&wv, 1e-12).unwrap().pass);
        prop_assert_eq!(wv.index_data().ind, w.index_data().ind + v.index_data().ind);
        prop_assert_eq!(adjoint_kernel_dim(&wv, 1e-9), 2 * (p - n));
    }

    #[test]
    fn state_operator_is_a_quasi_free_covariance(seed: u64, n in 1usize..4, dm in 0usize..3) {
        let mut s = sampler(seed);
        let v = builders::random_car_map(n, n + dm, 0.8, &mut s);
        let sv = state_operator(&v);
        prop_assert!(linalg::dist_identity(&(&sv + selfdual::conj_op(&sv))) < 1e-12);
        let e = linalg::herm_eig(&sv).values;
        prop_assert!(e.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn car_parameter_roundtrip(seed: u64, k in 2usize..6, l in 0usize..3) {
        let l = l.min(k);
        let mut s = sampler(seed);
        let q = builders::random_unitary(k, &mut s);
        let h = q.columns(0, l).into_owned();
        let r = q.columns(l, k - l).into_owned();
        let t = linalg::mul3(&linalg::conj(&r), &builders::random_antisymmetric(k - l, &mut s), &r.adjoint());
        let p = param_to_projection(&FockParamCar { t: t.clone(), h: h.clone() }, 1e-12).unwrap();
        let back = projection_to_param(&p, 1e-10, 1e-12).unwrap();
        prop_assert!(linalg::frob(&(back.t - t)) < 1e-10);
        prop_assert!(linalg::frob(&(linalg::mul_adj(&back.h, &back.h) - linalg::mul_adj(&h, &h))) < 1e-10);
    }

    #[test]
    fn ccr_parameter_roundtrip(seed: u64, k in 1usize..5, norm in 0.0f64..0.95) {
        let mut s = sampler(seed);
        let z = FockParamCcr { z: builders::random_symmetric_contraction(k, norm, &mut s) };
        let p = projection_from_z(&z, 1e-12).unwrap();
        let back = z_from_projection(&p, 1e-10).unwrap();
        prop_assert!(linalg::frob(&(back.z - z.z)) < 1e-10);
    }

    #[test]
    fn car_decomposition_reassembles(seed: u64, n in 1usize..4, dm in 0usize..3, flips in 0usize..2) {
        let mut s = sampler(seed);
        let v = builders::random_car_map_with_flips(n, n + dm, flips.min(n), &mut s);
        let d = decompose(&v, 1e-10).unwrap();
        prop_assert!(d.residuals.reassembly < 1e-10);
        prop_assert!(d.residuals.u_unitarity < 1e-10);
        prop_assert!(d.residuals.t_of_w < 1e-10);
        prop_assert_eq!(d.m_v, dm);
    }

    #[test]
    fn ccr_decomposition_reassembles(seed: u64, n in 1usize..3, dm in 0usize..2) {
        let mut s = sampler(seed);
        let v = builders::random_ccr_map(n, n + dm, 0.6, 0.4, &mut s);
        let d = decompose_ccr(&v, 1e-10).unwrap();
        prop_assert!(d.residuals.reassembly < 1e-10);
        prop_assert!(d.residuals.z_equation < 1e-10);
        prop_assert!(d.residuals.z_margin > 0.0);
    }

    #[test]
    fn chi_is_multiplicative_on_unitaries(seed: u64, k in 1usize..4, fa in 0usize..3, fb in 0usize..3) {
        let mut s = sampler(seed);
        let flips = |f: usize| (0..f.min(k)).collect::<Vec<_>>();
        let a = builders::random_car_unitary(k, 0.4, &mut s).compose(&builders::car_flip(k, &flips(fa))).unwrap();
        let b = builders::car_flip(k, &flips(fb)).compose(&builders::random_car_unitary(k, 0.4, &mut s)).unwrap();
        let ab = a.compose(&b).unwrap();
        let chi = |x| chi_character(x, 1e-10).unwrap();
        prop_assert_eq!(chi(&ab), chi(&a) * chi(&b));
    }

    #[test]
    fn car_vacuum_norm_formula(seed: u64, k in 2usize..7) {
        let mut s = sampler(seed);
        let h = builders::random_antisymmetric(k, &mut s);
        let lhs = linalg::vnorm(&pair_state(&h));
        prop_assert!((lhs - pair_state_norm_formula(&h)).abs() < 1e-10 * lhs.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn car_families_satisfy_cuntz_relations(seed: u64, n in 1usize..3, dm in 0usize..3, flips in 0usize..2) {
        let mut s = sampler(seed);
        let m = n + dm;
        let v = builders::random_car_map_with_flips(n, m, flips.min(n), &mut s);
        let d = decompose(&v, 1e-10).unwrap();
        let fam = implementers(&v, &d, &build_rep(m, None).unwrap()).unwrap();
        let r = verify_cuntz(&fam, &default_samples(n, 3), 1e-10);
        prop_assert!(r.pass, "{:?}", r);
        prop_assert_eq!(r.members, 1 << dm);
    }
}
