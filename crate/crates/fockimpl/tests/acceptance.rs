//! Acceptance suite: one check per criterion, each printing a single
//! `criterion N: PASS|FAIL` line. Runs without the libtest harness so the
//! lines are always visible; the process fails if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fockimpl::builders::{self, ChainWindow};
use fockimpl::car::fock::{build_rep, FieldOp};
use fockimpl::car::implementers::{default_samples, implementers, verify_cuntz};
use fockimpl::car::statistics::bosonized_statistics;
use fockimpl::car::structure::{decompose, param_to_projection, projection_to_param, FockParamCar};
use fockimpl::car::wick::{pair_state, pair_state_norm_formula, wick_exponential};
use fockimpl::ccr::fock::{build_rep_ccr, dense, pair_state_ccr, pair_state_norm_formula_ccr, spmm, wick_exponential_ccr};
use fockimpl::ccr::implementers::implementers_ccr;
use fockimpl::ccr::structure::{decompose_ccr, projection_from_z, z_from_projection, FockParamCcr};
use fockimpl::experiments::{analyze_vphi, dirac_hs_ladder, lambda_formula, run_chi_example};
use fockimpl::gauge::{
    charge_decomposition_car, charge_decomposition_ccr, fock_charges, implementer_charge_shift,
    second_quantize_car, GaugeElement, GaugeGroup,
};
use fockimpl::hamiltonian::Hamiltonian;
use fockimpl::linalg::{self, c, ZERO};
use fockimpl::selfdual::{self, adjoint_kernel_dim, BogoliubovMap, Kind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sampler(seed: u64) -> impl FnMut() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || rng.gen_range(-1.0..1.0)
}

/// Outcome of one criterion: a verdict and a one-line summary.
struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn car_family_case(n: usize, m: usize, flips: usize, seed: u64) -> (usize, f64, f64, f64, Duration) {
    let start = Instant::now();
    let mut s = sampler(seed);
    let v = builders::random_car_map_with_flips(n, m, flips, &mut s);
    let data = decompose(&v, 1e-10).unwrap();
    let fam = implementers(&v, &data, &build_rep(m, None).unwrap()).unwrap();
    let r = verify_cuntz(&fam, &default_samples(n, 3), 1e-10);
    (r.members, r.gram_residual, r.completeness_residual, r.intertwining_residual, start.elapsed())
}

fn criterion_1() -> Outcome {
    let cases = [
        (4, 4, 1, 0usize),
        (3, 4, 1, 1),
        (2, 4, 2, 2),
        (12, 12, 3, 0),
        (11, 12, 2, 1),
        (10, 12, 1, 2),
    ];
    let mut pass = true;
    let mut worst = (0.0f64, 0.0f64, 0.0f64, Duration::ZERO);
    for (i, &(n, m, flips, mv)) in cases.iter().enumerate() {
        let (members, gram, comp, inter, t) = car_family_case(n, m, flips, 100 + i as u64);
        pass &= members == 1 << mv && gram <= 1e-10 && comp <= 1e-10 && inter <= 1e-10;
        pass &= t <= Duration::from_secs(60);
        worst = (worst.0.max(gram), worst.1.max(comp), worst.2.max(inter), worst.3.max(t));
    }
    outcome(
        pass,
        format!(
            "2^M_V members for M_V in {{0,1,2}}, m <= 12; gram {:.1e}, completeness {:.1e}, intertwining {:.1e}, slowest case {:.1?}",
            worst.0, worst.1, worst.2, worst.3
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    for (i, &(n, m, flips)) in [(2, 3, 0), (2, 3, 1), (2, 4, 0), (3, 5, 2)].iter().enumerate() {
        let mut s = sampler(200 + i as u64);
        let v = builders::random_car_map_with_flips(n, m, flips, &mut s);
        let data = decompose(&v, 1e-10).unwrap();
        let fam = implementers(&v, &data, &build_rep(m, None).unwrap()).unwrap();
        let st = bosonized_statistics(&fam, 1e-10).unwrap();
        let d = (1usize << (m - n)) as f64;
        let err = (st.lambda_hat - 1.0 / d).abs().max(st.report.lambda_residual);
        worst = worst.max(err);
        pass &= err <= 1e-9;
    }
    outcome(pass, format!("lambda_hat = 1/d_V for M_V in {{1,2}}; max deviation {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut car_err = 0.0f64;
    for k in 2..=8 {
        let mut s = sampler(300 + k as u64);
        let h = builders::random_antisymmetric(k, &mut s);
        car_err = car_err.max((linalg::vnorm(&pair_state(&h)) - pair_state_norm_formula(&h)).abs());
    }
    let mut ccr_err = 0.0f64;
    for k in [1usize, 2] {
        let rep = build_rep_ccr(k, 24, None).unwrap();
        for seed in 0..3 {
            let mut s = sampler(310 + 10 * k as u64 + seed);
            let h = builders::random_symmetric_contraction(k, 0.5, &mut s);
            let lhs = linalg::vnorm(&pair_state_ccr(&h, &rep));
            ccr_err = ccr_err.max((lhs - pair_state_norm_formula_ccr(&h)).abs());
        }
    }
    outcome(
        car_err <= 1e-10 && ccr_err <= 1e-8,
        format!("vacuum norms: CAR det^(1/4) error {car_err:.1e}; CCR det^(-1/4) error {ccr_err:.1e} at n_max 24, |H12| = 0.5"),
    )
}

fn criterion_4() -> Outcome {
    let mut lambda_err = 0.0f64;
    for phi in [-PI / 4.0, 0.0, PI / 8.0, PI / 4.0] {
        let r = analyze_vphi(phi, 3, 1e-10).unwrap();
        lambda_err = lambda_err.max((r.lambda_measured - lambda_formula(phi)).abs());
    }
    let chi = run_chi_example(3, 1e-10).unwrap();
    let triple = (chi.chi_uv, chi.chi_product, chi.chi_v_3pi4);
    let pass = lambda_err <= 1e-12 && chi.composition_residual <= 1e-12 && triple == (1, -1, -1) && !chi.multiplicative;
    outcome(
        pass,
        format!(
            "lambda_phi error {lambda_err:.1e}; |U V(3pi/4) - V(pi/2)| = {:.1e}; chi(UV), chi(U)chi(V), chi(V(3pi/4)) = {triple:?}",
            chi.composition_residual
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let ladder = dirac_hs_ladder(&[256, 1024, 4096]).unwrap();
    let elapsed = start.elapsed();
    let last = ladder.levels.last().unwrap();
    let pass = ladder.monotone
        && last.plus_minus < 4.2730
        && last.minus_plus < 2.3946
        && elapsed <= Duration::from_secs(300);
    let values: Vec<String> = ladder
        .levels
        .iter()
        .map(|l| format!("{}: {:.6}/{:.6}", l.n_max, l.plus_minus, l.minus_plus))
        .collect();
    outcome(pass, format!("Dirac ladder monotone={} [{}] in {elapsed:.1?}", ladder.monotone, values.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    let lambda = 0.9;
    for k in [1i64, 2] {
        let src = ChainWindow { lo: -3, hi: 3 };
        let tgt = ChainWindow { lo: -3 + k, hi: 3 + k };
        let mut s = sampler(600 + k as u64);
        let shift = builders::chain_shift(&src, &tgt, k).unwrap();
        let left = builders::random_gauge_invariant_car_unitary(&tgt.charges(), 0.5, &mut s);
        let v = left.compose(&shift).unwrap();
        let data = decompose(&v, 1e-10).unwrap();
        let fam = implementers(&v, &data, &build_rep(tgt.modes(), None).unwrap()).unwrap();
        let r = implementer_charge_shift(&fam.psis, &src.charges(), &tgt.charges()).unwrap();
        pass &= r.shifts.iter().all(|&q| q == k);
        worst = worst.max(r.residual);
        // Γ(U_λ) Ψ = e^{ikλ} Ψ Γ(U_λ) on every charge sector at once
        let gs = second_quantize_car(
            &GaugeElement::new(builders::u1_phase(&src.charges(), lambda), 1e-12).unwrap(),
            &build_rep(src.modes(), None).unwrap(),
        )
        .unwrap();
        let gt = second_quantize_car(
            &GaugeElement::new(builders::u1_phase(&tgt.charges(), lambda), 1e-12).unwrap(),
            &build_rep(tgt.modes(), None).unwrap(),
        )
        .unwrap();
        let phase = c(0.0, k as f64 * lambda).exp();
        for psi in &fam.psis {
            worst = worst.max(linalg::frob(&(&gt * psi - psi * &gs * phase)));
        }
        // every charge sector of the source has a nonzero image
        let sectors: std::collections::BTreeSet<i64> = fock_charges(&src.charges()).into_iter().collect();
        pass &= r.sectors.len() == sectors.len();
    }
    pass &= worst <= 1e-10;
    outcome(pass, format!("U(1) charge q -> q + k for k in {{1,2}} on 6-mode windows; residual {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut s = sampler(700);
    let src = ChainWindow { lo: -2, hi: 2 };
    let tgt = ChainWindow { lo: -2, hi: 3 };
    let shift = builders::chain_shift(&src, &tgt, 1).unwrap();
    let left = builders::random_gauge_invariant_car_unitary(&tgt.charges(), 0.6, &mut s);
    let right = builders::random_gauge_invariant_car_unitary(&src.charges(), 0.6, &mut s);
    let v = left.compose(&shift).unwrap().compose(&right).unwrap();
    let data = decompose(&v, 1e-10).unwrap();
    let fam = implementers(&v, &data, &build_rep(tgt.modes(), None).unwrap()).unwrap();
    let group = GaugeGroup::u1(&src.charges(), &tgt.charges(), &[0.3, 1.1, -2.0]);
    let car = charge_decomposition_car(&v, &data, &fam, &group, 1e-11).unwrap();

    let w = builders::two_mode_squeeze(2, 0, 1, 0.5f64.atanh())
        .compose(&selfdual::embedding(Kind::Ccr, 1, 2))
        .unwrap();
    let wdata = decompose_ccr(&w, 1e-10).unwrap();
    let rs = build_rep_ccr(1, 24, None).unwrap();
    let rt = build_rep_ccr(2, 24, None).unwrap();
    let wfam = implementers_ccr(&w, &wdata, &rs, &rt, 3, 1e-10).unwrap();
    let ccr = charge_decomposition_ccr(&w, &wdata, &wfam, &rt, &GaugeGroup::u1(&[1], &[1, -1], &[0.5, 1.3]), 1e-10)
        .unwrap();
    let pass = car.max_residual <= 1e-9 && ccr.max_residual <= 1e-5 && ccr.block_dims == vec![1, 1, 1, 1];
    outcome(
        pass,
        format!(
            "charge decomposition: CAR M_V = 1 residual {:.1e}; CCR squeeze (symmetric powers up to 3, n_max 24) residual {:.1e}",
            car.max_residual, ccr.max_residual
        ),
    )
}

/// Random `(T, h)`: `h` an isometry onto `l` random directions and `T`
/// antisymmetric on their orthogonal complement.
fn random_param(k: usize, l: usize, s: &mut impl FnMut() -> f64) -> FockParamCar {
    let q = builders::random_unitary(k, s);
    let h = q.columns(0, l).into_owned();
    let r = q.columns(l, k - l).into_owned();
    let a = builders::random_antisymmetric(k - l, s);
    let t = linalg::mul3(&linalg::conj(&r), &a, &r.adjoint());
    FockParamCar { t, h }
}

fn car_rel_residual(seed: u64) -> f64 {
    let mut s = sampler(seed);
    let k = 2 + (seed % 5) as usize;
    let rep = build_rep(k, None).unwrap();
    let h11 = builders::random_complex(k, k, &mut s);
    let h12 = builders::random_antisymmetric(k, &mut s);
    let h21 = builders::random_antisymmetric(k, &mut s);
    let h = linalg::from_blocks(&h11, &h12, &h21, &(-h11.transpose()));
    let eta = wick_exponential(&h, &rep, 1e-12).unwrap();
    let f = builders::random_vector(k, &mut s);
    // [η, a(f)*] = a(H11 f)* η + η a((H21 f)*)
    let af = FieldOp::create(&f);
    let lhs = af.right(&eta) - af.left(&eta);
    let rhs = FieldOp::create(&(&h11 * &f)).left(&eta) + FieldOp::annihilate(&(&h21 * &f).map(|z| z.conj())).right(&eta);
    linalg::frob(&(lhs - rhs)) / linalg::frob(&eta).max(1.0)
}

fn ccr_cr_residual(seed: u64) -> f64 {
    let mut s = sampler(seed);
    let k = 1 + (seed % 2) as usize;
    let rep = build_rep_ccr(k, 12, None).unwrap();
    let h11 = builders::random_complex(k, k, &mut s) * c(0.4, 0.0);
    let h12 = builders::random_symmetric_contraction(k, 0.3, &mut s);
    let h21 = builders::random_symmetric_contraction(k, 0.3, &mut s);
    let h = Hamiltonian { h22: h11.transpose(), h11: h11.clone(), h12: h12.clone(), h21 };
    let eta = wick_exponential_ccr(&h, &rep, &rep, 1e-12).unwrap();
    let f = builders::random_vector(k, &mut s);
    // [a(f), η] = a(H12 f*)* η + η a(H11* f) on the protected sector
    let af = rep.annihilate(&f);
    let lhs = spmm(&af, &eta) - &eta * dense(&af);
    let rhs = spmm(&rep.create(&(&h12 * f.map(|z| z.conj()))), &eta)
        + &eta * dense(&rep.annihilate(&(h11.adjoint() * &f)));
    let cols = rep.space.sector_upto(4);
    let rows = rep.space.sector_upto(8);
    let mut r: f64 = 0.0;
    for &j in &cols {
        for &i in &rows {
            r = r.max((lhs[(i, j)] - rhs[(i, j)]).norm());
        }
    }
    r
}

fn criterion_8() -> Outcome {
    let seeds = 0..100u64;
    let mut th = 0.0f64;
    let mut zp = 0.0f64;
    let mut car_re = 0.0f64;
    let mut ccr_re = 0.0f64;
    let mut w_exact = true;
    let mut rel = 0.0f64;
    let mut cr = 0.0f64;
    for seed in seeds {
        let mut s = sampler(800_000 + seed);
        let k = 2 + (seed % 4) as usize;
        let l = (seed % 3) as usize;
        let p = random_param(k, l, &mut s);
        let proj = param_to_projection(&p, 1e-12).unwrap();
        let back = projection_to_param(&proj, 1e-10, 1e-12).unwrap();
        let hh = linalg::mul_adj(&p.h, &p.h) - linalg::mul_adj(&back.h, &back.h);
        th = th.max(linalg::frob(&(&back.t - &p.t)).max(linalg::frob(&hh)));
        th = th.max(linalg::frob(&(param_to_projection(&back, 1e-12).unwrap() - proj)));

        let z = FockParamCcr { z: builders::random_symmetric_contraction(k, 0.9 * (s() + 1.0) / 2.0, &mut s) };
        let zproj = projection_from_z(&z, 1e-12).unwrap();
        let zback = z_from_projection(&zproj, 1e-10).unwrap();
        zp = zp.max(linalg::frob(&(zback.z - &z.z)));

        let (n, m) = (1 + (seed % 3) as usize, 3 + (seed % 2) as usize);
        let v = builders::random_car_map_with_flips(n, m, (seed % 2) as usize, &mut s);
        let d = decompose(&v, 1e-10).unwrap();
        car_re = car_re.max(d.residuals.reassembly);
        w_exact &= selfdual::Components::of(&d.w_v).v12.iter().all(|z| *z == ZERO);
        w_exact &= selfdual::Components::of(&d.w_v).v21.iter().all(|z| *z == ZERO);

        let w = builders::random_ccr_map(1 + (seed % 2) as usize, 2 + (seed % 2) as usize, 0.6, 0.4, &mut s);
        let wd = decompose_ccr(&w, 1e-10).unwrap();
        ccr_re = ccr_re.max(wd.residuals.reassembly);
        w_exact &= selfdual::Components::of(&wd.w_v.matrix).v12.iter().all(|z| *z == ZERO);
        w_exact &= selfdual::Components::of(&wd.w_v.matrix).v21.iter().all(|z| *z == ZERO);

        rel = rel.max(car_rel_residual(810_000 + seed));
        cr = cr.max(ccr_cr_residual(820_000 + seed));
    }

    let mut additive = true;
    for seed in 0..50u64 {
        let mut s = sampler(830_000 + seed);
        let (n, m, p) = (1 + (seed % 3) as usize, 3 + (seed % 2) as usize, 5);
        let (v, w) = if seed % 2 == 0 {
            (builders::random_car_map(n, m, 0.6, &mut s), builders::random_car_map(m, p, 0.6, &mut s))
        } else {
            (builders::random_ccr_map(n, m, 0.6, 0.3, &mut s), builders::random_ccr_map(m, p, 0.6, 0.3, &mut s))
        };
        let wv = w.compose(&v).unwrap();
        let ind = |x: &BogoliubovMap| -(adjoint_kernel_dim(x, 1e-9) as i64);
        additive &= ind(&wv) == ind(&w) + ind(&v);
        additive &= wv.index_data().ind == w.index_data().ind + v.index_data().ind;
        additive &= ind(&wv) == wv.index_data().ind;
    }

    let pass = th <= 1e-10 && zp <= 1e-10 && car_re <= 1e-10 && ccr_re <= 1e-10 && w_exact && rel <= 1e-10 && cr <= 1e-10 && additive;
    outcome(
        pass,
        format!(
            "100 seeds: (T,h)<->P {th:.1e}, Z<->P {zp:.1e}, reassembly CAR {car_re:.1e} / CCR {ccr_re:.1e}, W_V diagonal={w_exact}, \
             CAR Wick relations {rel:.1e}, CCR commutators {cr:.1e}; index additivity on 50 pairs={additive}"
        ),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {verdict} - {}", result.detail);
        failed += usize::from(!result.pass);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
