//! CAR structure theory: state operators, the `(T, h)` parameterisation of
//! Fock states, the canonical triple `(T_V, h_V, k_V)` and `V = U_V W_V`.
//!
//! `T: K1 -> K2` is stored as its `k x k` block `t` (rows in K2, columns in
//! K1) with `t^T = -t`; `h` is a `k x L` matrix of orthonormal K1 columns.

use serde::Serialize;

use crate::error::{precondition, structural, Error, Result};
use crate::linalg::{self, c, Mat, ZERO};
use crate::selfdual::{self, BogoliubovMap, Components, Kind};

#[derive(Clone, Debug)]
pub struct FockParamCar {
    pub t: Mat,
    pub h: Mat,
}

impl FockParamCar {
    pub fn vacuum(k: usize) -> Self {
        FockParamCar {
            t: linalg::zeros(k, k),
            h: linalg::zeros(k, 0),
        }
    }

    pub fn modes(&self) -> usize {
        self.t.nrows()
    }

    /// Residuals of the defining identities: antisymmetry, `T h = 0`,
    /// orthonormality of `h`.
    pub fn residuals(&self) -> (f64, f64, f64) {
        let anti = linalg::frob(&(self.t.transpose() + &self.t));
        let th = linalg::frob(&(&self.t * &self.h));
        let ortho = linalg::dist_identity(&self.h.ad_mul(&self.h));
        (anti, th, ortho)
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        if !self.t.is_square() || self.h.nrows() != self.t.nrows() {
            return Err(structural("T and h have inconsistent dimensions"));
        }
        let (anti, th, ortho) = self.residuals();
        if anti > tol || th > tol || ortho > tol {
            return Err(structural(format!(
                "invalid (T, h): |T^T + T| = {anti:.3e}, |T h| = {th:.3e}, |h*h - 1| = {ortho:.3e}"
            )));
        }
        Ok(())
    }
}

fn check_car(v: &BogoliubovMap) -> Result<()> {
    if v.kind != Kind::Car {
        return Err(structural("expected a CAR map"));
    }
    Ok(())
}

/// `S_V = V* P1 V`.
pub fn state_operator(v: &BogoliubovMap) -> Mat {
    let m = v.target_modes;
    let top = v.matrix.rows(0, m).into_owned();
    linalg::adj_mul(&top, &top)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SpectralProfile {
    pub codim: usize,
    /// `(λ, multiplicity)` with `λ ∈ (0, ½)`; each is mirrored by `1 - λ`.
    pub pairs: Vec<(f64, usize)>,
    pub half_multiplicity: usize,
}

/// Decompose the spectrum of a state operator into the kernel of
/// `S(1 - S)`, the eigenvalue ½, and mirrored pairs.
pub fn spectral_profile(s: &Mat, tol: f64) -> Result<SpectralProfile> {
    let e = linalg::herm_eig(s);
    if let Some(&x) = e.values.iter().find(|&&x| x < -tol || x > 1.0 + tol) {
        return Err(Error::Numerical(format!("state operator eigenvalue {x} outside [0, 1]")));
    }
    let conj_s = selfdual::conj_op(s);
    let codim = linalg::rank(&(s * conj_s), tol.max(1e-14));
    let mut half = 0;
    let mut lows: Vec<f64> = Vec::new();
    let mut highs = 0usize;
    for &x in &e.values {
        if x <= tol || x >= 1.0 - tol {
            continue;
        }
        if (x - 0.5).abs() <= tol {
            half += 1;
        } else if x < 0.5 {
            lows.push(x);
        } else {
            highs += 1;
        }
    }
    if lows.len() != highs {
        return Err(Error::Numerical(format!(
            "unpaired spectrum: {} eigenvalues below ½, {} above",
            lows.len(),
            highs
        )));
    }
    lows.sort_by(f64::total_cmp);
    let mut pairs: Vec<(f64, usize)> = Vec::new();
    for x in lows {
        match pairs.last_mut() {
            Some((y, mult)) if (x - *y).abs() <= tol => *mult += 1,
            _ => pairs.push((x, 1)),
        }
    }
    Ok(SpectralProfile {
        codim,
        pairs,
        half_multiplicity: half,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Purity {
    Pure,
    TwoDisjointPure,
    Mixed,
}

/// Classify the state `ω_{P1} ∘ ρ_V` by the commutator `[P1, VV*]`.
pub fn purity_class(v: &BogoliubovMap, tol: f64) -> Purity {
    let m = v.target_modes;
    let vv = linalg::mul_adj(&v.matrix, &v.matrix);
    let p1 = selfdual::p1(m);
    let comm = &p1 * &vv - &vv * &p1;
    if linalg::frob(&comm) <= tol {
        return Purity::Pure;
    }
    let s = linalg::singular_values(&comm);
    let r = s.iter().filter(|&&x| x > tol).count();
    if r == 2 {
        Purity::TwoDisjointPure
    } else {
        Purity::Mixed
    }
}

/// Rank of `[P1, VV*]`, reported alongside [`purity_class`].
pub fn commutator_rank(v: &BogoliubovMap, tol: f64) -> usize {
    let m = v.target_modes;
    let vv = linalg::mul_adj(&v.matrix, &v.matrix);
    let p1 = selfdual::p1(m);
    let comm = &p1 * &vv - &vv * &p1;
    linalg::singular_values(&comm).iter().filter(|&&x| x > tol).count()
}

/// `P_T = (P1 + T)(P1 + T*T)^{-1}(P1 + T*)`.
pub fn projection_from_t(t: &Mat) -> Mat {
    let k = t.nrows();
    let y = linalg::inverse(&(linalg::eye(k) + t.ad_mul(t))).expect("1 + t*t is positive");
    let yth = &y * t.adjoint();
    let ty = t * &y;
    let tyth = &ty * t.adjoint();
    linalg::from_blocks(&y, &yth, &ty, &tyth)
}

/// `P = P_T - p_h + conj(p_h)`.
pub fn param_to_projection(p: &FockParamCar, tol: f64) -> Result<Mat> {
    p.check(tol)?;
    let k = p.modes();
    let mut out = projection_from_t(&p.t);
    let ph = linalg::mul_adj(&p.h, &p.h);
    let mut v = out.view_mut((0, 0), (k, k));
    v -= &ph;
    let mut w = out.view_mut((k, k), (k, k));
    w += linalg::conj(&ph);
    Ok(out)
}

/// Residuals `(|P² - P|, |P* - P|, |P + conj(P) - 1|)`.
pub fn basis_projection_residuals(p: &Mat) -> (f64, f64, f64) {
    let idem = linalg::frob(&(p * p - p));
    let herm = linalg::frob(&(p.adjoint() - p));
    let comp = linalg::dist_identity(&(p + selfdual::conj_op(p)));
    (idem, herm, comp)
}

/// Inverse of [`param_to_projection`]: `T = P21 P11⁺`, `h = ker P11`.
pub fn projection_to_param(p: &Mat, rank_tol: f64, tol: f64) -> Result<FockParamCar> {
    if !p.is_square() || p.nrows() % 2 != 0 {
        return Err(structural("basis projection must be square of even size"));
    }
    let (idem, herm, comp) = basis_projection_residuals(p);
    if idem > tol || herm > tol || comp > tol {
        return Err(structural(format!(
            "not a basis projection: |P²-P| = {idem:.3e}, |P*-P| = {herm:.3e}, |P+conj P-1| = {comp:.3e}"
        )));
    }
    let k = p.nrows() / 2;
    let comps = Components::of(p);
    let t = &comps.v21 * linalg::pinv(&comps.v11, rank_tol);
    let h = linalg::kernel_basis(&comps.v11, rank_tol);
    debug_assert_eq!(t.nrows(), k);
    Ok(FockParamCar { t, h })
}

/// `(T_V, h_V)` from the blocks of `V`.
pub fn canonical_t_h(v: &BogoliubovMap, rank_tol: f64) -> Result<FockParamCar> {
    check_car(v)?;
    let comps = v.components();
    let v11p = linalg::pinv(&comps.v11, rank_tol);
    let v22p = linalg::pinv(&comps.v22, rank_tol);
    let ker_v11_adj = linalg::kernel_projector(&comps.v11.adjoint(), rank_tol);
    let t = &comps.v21 * &v11p - v22p.adjoint() * comps.v12.adjoint() * ker_v11_adj;
    // h_V = V12 (ker V22); V12 is isometric there, so the image projector is
    // (V12 K)(V12 K)^* for an orthonormal kernel basis K
    let kb = linalg::kernel_basis(&comps.v22, rank_tol);
    let img = &comps.v12 * &kb;
    let q = linalg::mul_adj(&img, &img);
    let h = linalg::canonical_basis(&q, kb.ncols());
    Ok(FockParamCar { t, h })
}

/// `U_T = (P1+T)(P1+T*T)^{-½} + (P2-T*)(P2+TT*)^{-½}`.
pub fn rotation_u_t(t: &Mat) -> Mat {
    let k = t.nrows();
    let inv_sqrt = |a: Mat| linalg::herm_fn(&a, |x| 1.0 / x.sqrt());
    let y = inv_sqrt(linalg::eye(k) + t.ad_mul(t));
    let x = inv_sqrt(linalg::eye(k) + t * t.adjoint());
    let u12 = -(t.adjoint() * &x);
    let u21 = t * &y;
    linalg::from_blocks(&y, &u12, &u21, &x)
}

/// `U_h = 1 - [[p_h, conj(u_h)], [u_h, conj(p_h)]]`, a self-adjoint
/// unitary exchanging `h` with `h*`.
pub fn rotation_u_h(h: &Mat) -> Mat {
    let k = h.nrows();
    let ph = linalg::mul_adj(h, h);
    let u11 = linalg::eye(k) - &ph;
    let u12 = -(h * h.transpose());
    let u21 = -(linalg::conj(h) * h.adjoint());
    let u22 = linalg::eye(k) - linalg::conj(&ph);
    linalg::from_blocks(&u11, &u12, &u21, &u22)
}

#[derive(Clone, Debug, Serialize)]
pub struct CarResiduals {
    /// `|V* P_V V - P1|`
    pub pv_pullback: f64,
    /// `|U_V W_V - V|`
    pub reassembly: f64,
    /// off-diagonal blocks of `W_V`
    pub w_offdiag: f64,
    /// `|U_V* U_V - 1|`
    pub u_unitarity: f64,
    /// `|T_V^T + T_V|`
    pub t_antisymmetry: f64,
    /// `|T_V h_V|`
    pub t_h: f64,
    /// `|T_V V11 - V21 p_{ran V11*}|`
    pub t_equation: f64,
    /// `|T_{W_V}|`
    pub t_of_w: f64,
    /// `dim h_{W_V}`
    pub h_of_w: usize,
}

#[derive(Clone, Debug)]
pub struct CanonicalCarData {
    pub param: FockParamCar,
    /// Orthonormal basis of `k_V` as columns in `K(m)`.
    pub k_v: Mat,
    pub p_v: Mat,
    pub u_v: Mat,
    pub w_v: Mat,
    pub n_v: usize,
    pub l_v: usize,
    pub m_v: usize,
    pub residuals: CarResiduals,
}

impl CanonicalCarData {
    pub fn t_v(&self) -> &Mat {
        &self.param.t
    }

    pub fn h_v(&self) -> &Mat {
        &self.param.h
    }
}

/// Canonical decomposition `V = U_V W_V` with `U_V = U_{T_V} U_{h_V}`.
pub fn decompose(v: &BogoliubovMap, rank_tol: f64) -> Result<CanonicalCarData> {
    check_car(v)?;
    let (n, m) = (v.source_modes, v.target_modes);
    let param = canonical_t_h(v, rank_tol)?;
    let p_v = param_to_projection(&param, 1e-8)?;
    let u_v = rotation_u_t(&param.t) * rotation_u_h(&param.h);
    let w_raw = linalg::adj_mul(&u_v, &v.matrix);
    let comps = v.components();

    // k_V = P_V (ker V*)
    let q_v = linalg::eye(2 * m) - linalg::mul_adj(&v.matrix, &v.matrix);
    let m_v = m - n;
    let pq = &p_v * &q_v;
    let k_v = linalg::canonical_basis(&linalg::hermitian_part(&pq), m_v);

    // N_V = dim (K1 ∩ ker V*) = dim ker [V11*; V12*]
    let top = v.matrix.rows(0, m).into_owned();
    let n_v = m - linalg::rank(&top, rank_tol);

    // W_V is block diagonal; the discarded off-diagonal part is reported
    // and shows up again in the reassembly residual.
    let mut wc = Components::of(&w_raw);
    let w_offdiag = linalg::frob(&wc.v12).hypot(linalg::frob(&wc.v21));
    wc.v12.fill(ZERO);
    wc.v21.fill(ZERO);
    let w_v = wc.assemble();
    let w_map = BogoliubovMap {
        kind: Kind::Car,
        source_modes: n,
        target_modes: m,
        matrix: w_v.clone(),
    };
    let wparam = canonical_t_h(&w_map, rank_tol)?;

    let pullback = linalg::mul3(&v.matrix.adjoint(), &p_v, &v.matrix);
    let ran_v11_adj = linalg::range_projector(&comps.v11.adjoint(), rank_tol);
    let residuals = CarResiduals {
        pv_pullback: linalg::frob(&(pullback - selfdual::p1(n))),
        reassembly: linalg::frob(&(&u_v * &w_v - &v.matrix)),
        w_offdiag,
        u_unitarity: linalg::dist_identity(&u_v.ad_mul(&u_v)),
        t_antisymmetry: linalg::frob(&(param.t.transpose() + &param.t)),
        t_h: linalg::frob(&(&param.t * &param.h)),
        t_equation: linalg::frob(&(&param.t * &comps.v11 - &comps.v21 * ran_v11_adj)),
        t_of_w: linalg::frob(&wparam.t),
        h_of_w: wparam.h.ncols(),
    };
    let l_v = param.h.ncols();
    Ok(CanonicalCarData {
        param,
        k_v,
        p_v,
        u_v,
        w_v,
        n_v,
        l_v,
        m_v,
        residuals,
    })
}

/// `(-1)^{dim h_V}`.
pub fn chi_character(v: &BogoliubovMap, rank_tol: f64) -> Result<i32> {
    let p = canonical_t_h(v, rank_tol)?;
    Ok(if p.h.ncols() % 2 == 0 { 1 } else { -1 })
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct EquivalenceDiagnostic {
    pub same_index: bool,
    pub hs_distance: f64,
}

/// Same-index flag and `|S_V - S_V'|_HS`.
pub fn equivalence_diagnostic(v: &BogoliubovMap, w: &BogoliubovMap) -> Result<EquivalenceDiagnostic> {
    if v.matrix.shape() != w.matrix.shape() {
        return Err(structural("maps have different shapes"));
    }
    let same_index = v.index_data().ind == w.index_data().ind;
    let hs_distance = linalg::frob(&(state_operator(v) - state_operator(w)));
    Ok(EquivalenceDiagnostic {
        same_index,
        hs_distance,
    })
}

/// Check `T V11 = V21 p_{ran V11*}` and `T h_V = 0` for a candidate `T`.
pub fn t_equation_residual(v: &BogoliubovMap, t: &Mat, rank_tol: f64) -> Result<(f64, f64)> {
    let comps = v.components();
    if t.shape() != (v.target_modes, v.target_modes) {
        return Err(precondition("T has the wrong shape"));
    }
    let ran = linalg::range_projector(&comps.v11.adjoint(), rank_tol);
    let r1 = linalg::frob(&(t * &comps.v11 - &comps.v21 * ran));
    let h = canonical_t_h(v, rank_tol)?.h;
    Ok((r1, linalg::frob(&(t * h))))
}

/// Admissible perturbation `T'` of `T_V`: antisymmetric, supported on
/// `ker V11*`, vanishing on `h_V` and mapping into `ker V22*`-compatible
/// directions so that `T_V + T'` still solves the `T` equation.
pub fn admissible_t_perturbation(v: &BogoliubovMap, raw: &Mat, rank_tol: f64) -> Result<Mat> {
    let comps = v.components();
    let h = canonical_t_h(v, rank_tol)?.h;
    // q = projection onto ker V11* ∩ h^⊥
    let ker = linalg::kernel_projector(&comps.v11.adjoint(), rank_tol);
    let q = &ker - linalg::mul_adj(&h, &h);
    let q = linalg::hermitian_part(&q);
    let a = (raw - raw.transpose()) * c(0.5, 0.0);
    // T' = conj(q) a q keeps antisymmetry: (conj(q) a q)^T = q^T a^T conj(q)^T = -conj(q) a q
    Ok(linalg::conj(&q) * a * &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::experiments::{build_example_vphi, lambda_formula};
    use crate::linalg::{ONE, ZERO};
    use std::f64::consts::PI;

    fn sampler(seed: u64) -> impl FnMut() -> f64 {
        let mut x = seed;
        move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    fn unit(k: usize, i: usize) -> Mat {
        Mat::from_fn(k, 1, |r, _| if r == i { ONE } else { ZERO })
    }

    /// Antisymmetric `t` on the first `k - free` modes, vanishing on the rest.
    fn antisymmetric_on_head(k: usize, free: usize, s: &mut impl FnMut() -> f64) -> Mat {
        let a = builders::random_antisymmetric(k, s);
        Mat::from_fn(k, k, |i, j| if i < k - free && j < k - free { a[(i, j)] } else { ZERO })
    }

    #[test]
    fn state_operator_basics() {
        let id = BogoliubovMap::identity(Kind::Car, 3);
        assert_eq!(state_operator(&id), selfdual::p1(3));
        let mut s = sampler(1);
        let d = builders::random_car_diagonal(3, &mut s);
        let sd = state_operator(&d);
        assert!(linalg::frob(&(&sd * &sd - &sd)) < 1e-12);
        let v = builders::random_car_map(2, 4, 0.7, &mut s);
        let sv = state_operator(&v);
        assert!(linalg::frob(&(sv.adjoint() - &sv)) < 1e-13);
        assert!(linalg::dist_identity(&(selfdual::conj_op(&sv) + &sv)) < 1e-12);
        let e = linalg::herm_eig(&sv).values;
        assert!(e.iter().all(|&x| x > -1e-12 && x < 1.0 + 1e-12));
    }

    #[test]
    fn spectral_profiles() {
        let mut s = sampler(2);
        let d = builders::random_car_diagonal(3, &mut s);
        let p = spectral_profile(&state_operator(&d), 1e-10).unwrap();
        assert_eq!((p.codim, p.pairs.len(), p.half_multiplicity), (0, 0, 0));
        let v0 = build_example_vphi(0.0, 3).unwrap();
        let p = spectral_profile(&state_operator(&v0), 1e-10).unwrap();
        assert!(p.pairs.is_empty());
        assert_eq!(p.half_multiplicity, 2);
        let v = build_example_vphi(PI / 8.0, 3).unwrap();
        let p = spectral_profile(&state_operator(&v), 1e-10).unwrap();
        assert_eq!(p.pairs.len(), 1);
        assert!((p.pairs[0].0 - (1.0 - lambda_formula(PI / 8.0))).abs() < 1e-12);
        assert_eq!(p.pairs[0].1, 1);
        // codim = 2 (M_V - N_V)
        let data = decompose(&v, 1e-10).unwrap();
        assert_eq!(p.codim, 2 * (data.m_v - data.n_v));
    }

    #[test]
    fn purity_classes() {
        let mut s = sampler(3);
        assert_eq!(purity_class(&builders::random_car_diagonal(3, &mut s), 1e-10), Purity::Pure);
        let v = build_example_vphi(PI / 8.0, 3).unwrap();
        assert_eq!(purity_class(&v, 1e-10), Purity::Mixed);
        assert_eq!(commutator_rank(&v, 1e-10), 4);
        for phi in [PI / 4.0, -PI / 4.0] {
            let v = build_example_vphi(phi, 3).unwrap();
            let s = state_operator(&v);
            // λ_φ ∈ {0, 1}: S_V is a projection
            assert!(linalg::frob(&(&s * &s - &s)) < 1e-12, "{phi}");
        }
    }

    #[test]
    fn projection_examples() {
        let p = param_to_projection(&FockParamCar::vacuum(3), 1e-12).unwrap();
        assert_eq!(p, selfdual::p1(3));
        let back = projection_to_param(&p, 1e-10, 1e-12).unwrap();
        assert_eq!(back.h.ncols(), 0);
        assert!(linalg::frob(&back.t) == 0.0);

        // one swapped mode: P1 - e1 e1* + e1* e1*^*
        let h = unit(3, 1);
        let p = param_to_projection(&FockParamCar { t: linalg::zeros(3, 3), h }, 1e-12).unwrap();
        let mut want = selfdual::p1(3);
        want[(1, 1)] = ZERO;
        want[(4, 4)] = ONE;
        assert_eq!(p, want);
        let back = projection_to_param(&p, 1e-10, 1e-12).unwrap();
        assert_eq!(back.h.ncols(), 1);
        assert!((back.h[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_roundtrip_recovers_t_and_h() {
        let mut s = sampler(4);
        for (k, free) in [(3, 0), (4, 1), (5, 2)] {
            let t = antisymmetric_on_head(k, free, &mut s);
            let h = Mat::from_fn(k, free, |i, j| if i == k - free + j { ONE } else { ZERO });
            let p = param_to_projection(&FockParamCar { t: t.clone(), h: h.clone() }, 1e-12).unwrap();
            let (idem, herm, comp) = basis_projection_residuals(&p);
            assert!(idem < 1e-12 && herm < 1e-12 && comp < 1e-12);
            let back = projection_to_param(&p, 1e-10, 1e-12).unwrap();
            assert!(linalg::frob(&(&back.t - &t)) < 1e-10);
            let (ph, ph_back) = (linalg::mul_adj(&h, &h), linalg::mul_adj(&back.h, &back.h));
            assert!(linalg::frob(&(ph - ph_back)) < 1e-10);
        }
        assert!(projection_to_param(&linalg::eye(4), 1e-10, 1e-12).is_err());
    }

    #[test]
    fn canonical_t_h_examples() {
        let mut s = sampler(5);
        let d = builders::random_car_diagonal(3, &mut s);
        let p = canonical_t_h(&d, 1e-10).unwrap();
        assert!(linalg::frob(&p.t) < 1e-14 && p.h.ncols() == 0);
        // V21 V11* = 0 gives T_V = 0: an embedding with particle-hole flips
        let f = builders::car_flip(3, &[0])
            .compose(&selfdual::embedding(Kind::Car, 2, 3))
            .unwrap();
        let c = f.components();
        assert!(linalg::frob(&(&c.v21 * c.v11.adjoint())) == 0.0);
        let p = canonical_t_h(&f, 1e-10).unwrap();
        assert!(linalg::frob(&p.t) == 0.0);
        assert_eq!(p.h.ncols(), 1);
        for (n, m) in [(2, 3), (3, 3), (2, 4)] {
            let v = builders::random_car_map_with_flips(n, m, 1, &mut s);
            let p = canonical_t_h(&v, 1e-10).unwrap();
            let (anti, th, ortho) = p.residuals();
            assert!(anti < 1e-12 && th < 1e-12 && ortho < 1e-12);
            let (r1, r2) = t_equation_residual(&v, &p.t, 1e-10).unwrap();
            assert!(r1 < 1e-12 && r2 < 1e-12);
        }
    }

    #[test]
    fn t_v_has_minimal_norm() {
        let mut s = sampler(6);
        for _ in 0..5 {
            let v = builders::random_car_map(2, 4, 0.8, &mut s);
            let t = canonical_t_h(&v, 1e-10).unwrap().t;
            let raw = builders::random_complex(4, 4, &mut s);
            let dt = admissible_t_perturbation(&v, &raw, 1e-10).unwrap();
            assert!(linalg::frob(&dt) > 1e-3);
            let alt = &t + &dt;
            let (r1, _) = t_equation_residual(&v, &alt, 1e-10).unwrap();
            assert!(r1 < 1e-10);
            let lhs = linalg::frob(&alt).powi(2);
            let rhs = linalg::frob(&t).powi(2) + linalg::frob(&dt).powi(2);
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} {rhs}");
        }
    }

    #[test]
    fn rotation_u_t_examples() {
        assert!(linalg::dist_identity(&rotation_u_t(&linalg::zeros(3, 3))) < 1e-15);
        let mut s = sampler(7);
        let t = builders::random_antisymmetric(4, &mut s);
        let u = rotation_u_t(&t);
        assert!(linalg::dist_identity(&linalg::adj_mul(&u, &u)) < 1e-12);
        assert!(linalg::frob(&(selfdual::conj_op(&u) - &u)) < 1e-12);
        let pt = projection_from_t(&t);
        assert!(linalg::frob(&(linalg::mul3(&u, &selfdual::p1(4), &u.adjoint()) - pt)) < 1e-12);
        // rank-2 T touches only four directions
        let mut t2 = linalg::zeros(4, 4);
        t2[(0, 1)] = linalg::c(0.7, 0.2);
        t2[(1, 0)] = -t2[(0, 1)];
        let u2 = rotation_u_t(&t2) - linalg::eye(8);
        assert!(linalg::rank(&u2, 1e-12) <= 4);
    }

    #[test]
    fn rotation_u_h_examples() {
        assert_eq!(rotation_u_h(&linalg::zeros(3, 0)), linalg::eye(6));
        let u = rotation_u_h(&unit(3, 0));
        // a signed swap of e1 and its conjugate
        let mut want = builders::car_flip(3, &[0]).matrix;
        want[(0, 3)] = -ONE;
        want[(3, 0)] = -ONE;
        assert_eq!(u, want);
        let h = Mat::from_fn(4, 2, |i, j| {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            match (i, j) {
                (0, 0) | (1, 0) => linalg::c(s, 0.0),
                (2, 1) => linalg::c(0.0, 1.0),
                _ => ZERO,
            }
        });
        let u = rotation_u_h(&h);
        assert!(linalg::dist_identity(&(&u * &u)) < 1e-12);
        assert!(linalg::frob(&(u.adjoint() - &u)) < 1e-12);
        let p = param_to_projection(&FockParamCar { t: linalg::zeros(4, 4), h }, 1e-12).unwrap();
        assert!(linalg::frob(&(linalg::mul3(&u, &selfdual::p1(4), &u) - p)) < 1e-12);
    }

    #[test]
    fn decompose_examples() {
        let mut s = sampler(8);
        let d = builders::random_car_diagonal(3, &mut s);
        let data = decompose(&d, 1e-10).unwrap();
        assert!(linalg::dist_identity(&data.u_v) < 1e-12);
        assert!(linalg::frob(&(&data.w_v - &d.matrix)) < 1e-12);
        for (n, m, flips) in [(2, 3, 1), (3, 3, 2), (2, 4, 0)] {
            let v = builders::random_car_map_with_flips(n, m, flips, &mut s);
            let data = decompose(&v, 1e-10).unwrap();
            let r = &data.residuals;
            assert!(r.reassembly < 1e-10 && r.pv_pullback < 1e-10 && r.w_offdiag < 1e-12, "{r:?}");
            assert!(r.t_of_w < 1e-10 && r.h_of_w == 0);
            assert_eq!(data.m_v, m - n);
            assert_eq!(data.k_v.ncols(), m - n);
            assert!(data.l_v <= flips);
            assert!(linalg::dist_identity(&linalg::adj_mul(&data.k_v, &data.k_v)) < 1e-12);
        }
        assert!(decompose(&selfdual::embedding(Kind::Ccr, 1, 2), 1e-10).is_err());
    }

    #[test]
    fn chi_is_multiplicative_on_diagonal_unitaries() {
        assert_eq!(chi_character(&BogoliubovMap::identity(Kind::Car, 2), 1e-10).unwrap(), 1);
        let mut s = sampler(9);
        for _ in 0..5 {
            let a = builders::random_car_diagonal(3, &mut s);
            let b = builders::random_car_diagonal(3, &mut s);
            let ab = a.compose(&b).unwrap();
            let chi = |v: &BogoliubovMap| chi_character(v, 1e-10).unwrap();
            assert_eq!(chi(&ab), chi(&a) * chi(&b));
        }
        assert_eq!(chi_character(&build_example_vphi(3.0 * PI / 4.0, 3).unwrap(), 1e-10).unwrap(), -1);
        assert_eq!(chi_character(&builders::car_flip(3, &[0]), 1e-10).unwrap(), -1);
        assert_eq!(chi_character(&builders::car_flip(3, &[0, 2]), 1e-10).unwrap(), 1);
    }

    #[test]
    fn equivalence_diagnostics() {
        let v = build_example_vphi(0.1, 3).unwrap();
        let d = equivalence_diagnostic(&v, &v).unwrap();
        assert!(d.same_index && d.hs_distance == 0.0);
        let w = build_example_vphi(0.4, 3).unwrap();
        let d = equivalence_diagnostic(&v, &w).unwrap();
        let want = (lambda_formula(0.1) - lambda_formula(0.4)).abs() * 2f64.sqrt();
        assert!((d.hs_distance - want).abs() < 1e-12);
        // a diagonal unitary on the target commuting with S_V's structure
        let u = BogoliubovMap::from_blocks(
            Kind::Car,
            &Mat::from_fn(4, 4, |i, j| if i == j { linalg::c(0.0, 1.0) } else { ZERO }),
            &linalg::zeros(4, 4),
        )
        .unwrap();
        let d = equivalence_diagnostic(&v, &u.compose(&v).unwrap()).unwrap();
        assert!(d.same_index && d.hs_distance < 1e-14);
        assert!(equivalence_diagnostic(&v, &BogoliubovMap::identity(Kind::Car, 3)).is_err());
    }
}
