//! Worked examples: the curve `V(φ)` and its state-operator eigenvalue,
//! the non-multiplicativity of `χ`, and the localized chiral Dirac isometry
//! on `L²(T)` with its Hilbert–Schmidt ladder.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::car::structure::{self, chi_character};
use crate::error::{structural, Error, Result};
use crate::linalg::{self, c, Mat, Vector, C64, I, ZERO};
use crate::selfdual::{BogoliubovMap, Kind};

// ---------------------------------------------------------------------------
// V(φ)

/// `f_n^+ = (f_n + f_n*)/√2` in `K(k)`.
fn f_plus(k: usize, n: usize) -> Vector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Vector::from_fn(2 * k, |i, _| if i == n || i == k + n { c(s, 0.0) } else { ZERO })
}

/// `f_n^- = i (f_n - f_n*)/√2` in `K(k)`.
fn f_minus(k: usize, n: usize) -> Vector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Vector::from_fn(2 * k, |i, _| {
        if i == n {
            I * s
        } else if i == k + n {
            -I * s
        } else {
            ZERO
        }
    })
}

fn rank_one_sum(pairs: &[(Vector, Vector)], rows: usize, cols: usize) -> Mat {
    let mut a = linalg::zeros(rows, cols);
    for (t, s) in pairs {
        a += t * s.adjoint();
    }
    a
}

/// `V(φ): K(k) -> K(k+1)`:
/// `f_0^+ -> cos φ f_0^+ + sin φ f_1^-`, `f_0^- -> sin φ f_0^- - cos φ f_1^+`,
/// `f_n^± -> f_{n+1}^±` for `n >= 1`.
pub fn build_example_vphi(phi: f64, k: usize) -> Result<BogoliubovMap> {
    if k < 2 {
        return Err(structural("V(φ) needs at least two source modes"));
    }
    let m = k + 1;
    let (cs, sn) = (c(phi.cos(), 0.0), c(phi.sin(), 0.0));
    let mut pairs = vec![
        (f_plus(m, 0) * cs + f_minus(m, 1) * sn, f_plus(k, 0)),
        (f_minus(m, 0) * sn - f_plus(m, 1) * cs, f_minus(k, 0)),
    ];
    for n in 1..k {
        pairs.push((f_plus(m, n + 1), f_plus(k, n)));
        pairs.push((f_minus(m, n + 1), f_minus(k, n)));
    }
    let a = rank_one_sum(&pairs, 2 * m, 2 * k);
    let a = a.map(|z| C64::new(clean(z.re), clean(z.im)));
    BogoliubovMap::new(Kind::Car, k, m, a)
}

/// Remove rounding noise below 1e-15 in exactly representable entries.
fn clean(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else {
        x
    }
}

/// `λ_φ = ½ (1 + sin 2φ)`.
pub fn lambda_formula(phi: f64) -> f64 {
    0.5 * (1.0 + (2.0 * phi).sin())
}

#[derive(Clone, Debug, Serialize)]
pub struct VphiReport {
    pub phi: f64,
    pub source_modes: usize,
    pub target_modes: usize,
    pub index: i64,
    pub lambda_formula: f64,
    /// `<f_0, S_V f_0>`
    pub lambda_measured: f64,
    /// `|S_V - (λ E_0 + (1 - λ) conj(E_0) + Σ_{n>=1} E_n)|`
    pub state_operator_residual: f64,
    /// spectrum of `S_V` in ascending order
    pub spectrum: Vec<f64>,
    pub chi: i32,
    pub commutator_rank: usize,
}

pub fn analyze_vphi(phi: f64, k: usize, rank_tol: f64) -> Result<VphiReport> {
    let v = build_example_vphi(phi, k)?;
    let s = structure::state_operator(&v);
    let lambda = lambda_formula(phi);
    let mut model = linalg::zeros(2 * k, 2 * k);
    model[(0, 0)] = c(lambda, 0.0);
    model[(k, k)] = c(1.0 - lambda, 0.0);
    for n in 1..k {
        model[(n, n)] = c(1.0, 0.0);
    }
    let idx = v.index_data();
    Ok(VphiReport {
        phi,
        source_modes: k,
        target_modes: k + 1,
        index: idx.ind,
        lambda_formula: lambda,
        lambda_measured: s[(0, 0)].re,
        state_operator_residual: linalg::frob(&(&s - model)),
        spectrum: linalg::herm_eig(&s).values,
        chi: chi_character(&v, rank_tol)?,
        commutator_rank: structure::commutator_rank(&v, rank_tol),
    })
}

/// The unitary `U` on `K(m)` with `U V(3π/4) = V(π/2)`.
pub fn build_example_u(m: usize) -> Result<BogoliubovMap> {
    if m < 2 {
        return Err(structural("U needs at least two modes"));
    }
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let (p0, p1, m0, m1) = (f_plus(m, 0), f_plus(m, 1), f_minus(m, 0), f_minus(m, 1));
    let mut pairs = vec![
        (&p0 * h, &p0 + &m1),
        (-&p1 * h, &m0 - &p1),
        (&m0 * h, &m0 + &p1),
        (-&m1 * h, &p0 - &m1),
    ];
    for n in 2..m {
        pairs.push((f_plus(m, n), f_plus(m, n)));
        pairs.push((f_minus(m, n), f_minus(m, n)));
    }
    let a = rank_one_sum(&pairs, 2 * m, 2 * m);
    let a = a.map(|z| C64::new(clean(z.re), clean(z.im)));
    BogoliubovMap::new(Kind::Car, m, m, a)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiExampleReport {
    pub source_modes: usize,
    pub target_modes: usize,
    /// `|U V(3π/4) - V(π/2)|`
    pub composition_residual: f64,
    /// `|U* U - 1|`
    pub u_unitarity: f64,
    pub chi_u: i32,
    pub chi_v_3pi4: i32,
    pub chi_v_pi2: i32,
    pub chi_uv: i32,
    /// `χ(U) χ(V(3π/4))`
    pub chi_product: i32,
    pub u11_singular_values: Vec<f64>,
    pub multiplicative: bool,
    pub pass: bool,
}

/// Non-multiplicativity of `χ`: `χ(U V(3π/4)) = 1` but
/// `χ(U) χ(V(3π/4)) = -1`.
pub fn run_chi_example(k: usize, rank_tol: f64) -> Result<ChiExampleReport> {
    if k < 3 {
        return Err(structural("the example needs at least three source modes"));
    }
    let v34 = build_example_vphi(3.0 * std::f64::consts::FRAC_PI_4, k)?;
    let v12 = build_example_vphi(std::f64::consts::FRAC_PI_2, k)?;
    let u = build_example_u(k + 1)?;
    let uv = u.compose(&v34)?;
    let composition_residual = linalg::frob(&(&uv.matrix - &v12.matrix));
    let chi_u = chi_character(&u, rank_tol)?;
    let chi_v_3pi4 = chi_character(&v34, rank_tol)?;
    let chi_v_pi2 = chi_character(&v12, rank_tol)?;
    let chi_uv = chi_character(&uv, rank_tol)?;
    let mut u11_singular_values = linalg::singular_values(&u.components().v11);
    u11_singular_values.sort_by(f64::total_cmp);
    let chi_product = chi_u * chi_v_3pi4;
    let u_unitarity = linalg::dist_identity(&linalg::adj_mul(&u.matrix, &u.matrix));
    let pass = composition_residual <= 1e-12
        && u_unitarity <= 1e-12
        && chi_uv == 1
        && chi_product == -1
        && chi_v_3pi4 == -1;
    Ok(ChiExampleReport {
        source_modes: k,
        target_modes: k + 1,
        composition_residual,
        u_unitarity,
        chi_u,
        chi_v_3pi4,
        chi_v_pi2,
        chi_uv,
        chi_product,
        u11_singular_values,
        multiplicative: chi_uv == chi_product,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Chiral Dirac isometry on L²(T)

/// Upper bound for `|q₊ v q₋|²_HS`: `9/π² + (11/6)²`.
pub const HS_BOUND_PLUS_MINUS: f64 = 9.0 / (std::f64::consts::PI * std::f64::consts::PI) + (11.0 / 6.0) * (11.0 / 6.0);
/// Upper bound for `|q₋ v q₊|²_HS`: `π²/16 + 16/9`.
pub const HS_BOUND_MINUS_PLUS: f64 = std::f64::consts::PI * std::f64::consts::PI / 16.0 + 16.0 / 9.0;

/// Fourier window `e_n, |n| <= n_max` with local vectors `f_m`,
/// `|m| <= m_max`, for the interval `I = {e^{iλ}: π/2 <= λ <= 3π/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DiracTruncation {
    pub n_max: usize,
    pub m_max: usize,
}

impl DiracTruncation {
    /// The largest admissible local range: `2 m_max + 2 <= n_max`.
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 4 {
            return Err(structural("n_max must be at least 4"));
        }
        Ok(DiracTruncation {
            n_max,
            m_max: (n_max - 2) / 2,
        })
    }

    pub fn with_local_range(n_max: usize, m_max: usize) -> Result<Self> {
        if 2 * m_max + 2 > n_max {
            return Err(structural("local range needs 2 m_max + 2 <= n_max"));
        }
        Ok(DiracTruncation { n_max, m_max })
    }

    /// Number of Fourier modes `2 n_max + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    /// Row of `e_n` in the truncated basis.
    pub fn row(&self, n: i64) -> usize {
        (n + self.n_max as i64) as usize
    }
}

/// `<e_l, f_m>` for `f_m(z) = √2 (-1)^m z^{2m} χ_I(z)`.
pub fn e_f_inner(l: i64, m: i64) -> f64 {
    if l.rem_euclid(2) == 0 {
        if l == 2 * m {
            sign(m) * std::f64::consts::FRAC_1_SQRT_2
        } else {
            0.0
        }
    } else {
        std::f64::consts::SQRT_2 / std::f64::consts::PI * sign((l - 1).div_euclid(2)) / (2 * m - l) as f64
    }
}

/// `<e_l, h_m>` for `h_m(z) = √2 z^{2m} χ_{T∖I}(z)`, an orthonormal
/// basis of functions supported off `I`.
pub fn e_h_inner(l: i64, m: i64) -> f64 {
    if l.rem_euclid(2) == 0 {
        if l == 2 * m {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            0.0
        }
    } else {
        let d = 2 * m - l;
        std::f64::consts::SQRT_2 / std::f64::consts::PI * sign((d - 1).div_euclid(2)) / d as f64
    }
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Real matrix product through `matrixmultiply::dgemm`.
fn real_gemm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, k) = a.shape();
    let n = b.ncols();
    assert_eq!(k, b.nrows());
    let mut out = DMatrix::<f64>::zeros(m, n);
    // SAFETY: column-major buffers with the strides below cover exactly the
    // allocated storage of each matrix.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            1,
            k as isize,
            0.0,
            out.as_mut_ptr(),
            1,
            m as isize,
        );
    }
    out
}

/// The truncated isometry `v = 1 + Σ_{0<=m<m_max} (f_{m+1} - f_m) <f̃_m, ·>`
/// in the Fourier basis, kept in low-rank form. `f̃_m` is the dual basis of
/// the truncated `{f_m: |m| <= m_max}`, so `v f_m = f_{m+1}` for
/// `0 <= m < m_max` and `v f_m = f_m` for `m < 0` hold exactly.
#[derive(Clone, Debug)]
pub struct DiracV {
    pub trunc: DiracTruncation,
    /// columns `f_m`, `m = -m_max..=m_max`
    pub f: DMatrix<f64>,
    /// columns `f_{m+1} - f_m`, `m = 0..m_max`
    pub diff: DMatrix<f64>,
    /// dual vectors `f̃_m`, `m = 0..m_max`
    pub dual: DMatrix<f64>,
    /// `|F^T F - 1|`, the non-orthonormality of the truncated local basis
    pub gram_defect: f64,
}

pub fn build_dirac_v(t: &DiracTruncation) -> Result<DiracV> {
    if 2 * t.m_max + 2 > t.n_max {
        return Err(structural("local range needs 2 m_max + 2 <= n_max"));
    }
    let d = t.dim();
    let mm = t.m_max as i64;
    let count = 2 * t.m_max + 1;
    let f = DMatrix::from_fn(d, count, |i, j| e_f_inner(i as i64 - t.n_max as i64, j as i64 - mm));
    let gram = f.transpose() * &f;
    let gram_defect = (&gram - DMatrix::identity(count, count)).norm();
    let inv = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("local basis Gram matrix is singular".into()))?;
    let dual_all = &f * inv;
    let col = |m: i64| (m + mm) as usize;
    let diff = DMatrix::from_fn(d, t.m_max, |i, j| f[(i, col(j as i64 + 1))] - f[(i, col(j as i64))]);
    let dual = DMatrix::from_fn(d, t.m_max, |i, j| dual_all[(i, col(j as i64))]);
    Ok(DiracV {
        trunc: *t,
        f,
        diff,
        dual,
        gram_defect,
    })
}

impl DiracV {
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let coeff = self.dual.transpose() * x;
        x + &self.diff * coeff
    }

    /// `f_m` as a column.
    pub fn local(&self, m: i64) -> DMatrix<f64> {
        let j = (m + self.trunc.m_max as i64) as usize;
        self.f.columns(j, 1).into_owned()
    }

    /// Dense matrix (for small windows only).
    pub fn dense(&self) -> DMatrix<f64> {
        let d = self.trunc.dim();
        DMatrix::identity(d, d) + &self.diff * self.dual.transpose()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HsLevel {
    pub n_max: usize,
    pub m_max: usize,
    /// `|q₊ v q₋|²_HS` on the window
    pub plus_minus: f64,
    /// `|q₋ v q₊|²_HS` on the window
    pub minus_plus: f64,
}

/// Squared Hilbert–Schmidt norms of the off-diagonal blocks of `v`, with
/// `l, n` restricted to `|l|, |n| <= n_max` and the shift sum to
/// `0 <= m < m_max` (`2 m_max + 2 <= n_max`), using the exact inner
/// products `<e_l, f_m>`.
pub fn dirac_hs_level(t: &DiracTruncation) -> HsLevel {
    let nm = t.n_max as i64;
    let mcount = t.m_max;
    let pos: Vec<i64> = (0..=nm).collect();
    let neg: Vec<i64> = (-nm..0).collect();
    let a = |rows: &[i64]| {
        DMatrix::from_fn(rows.len(), mcount, |i, m| {
            e_f_inner(rows[i], m as i64 + 1) - e_f_inner(rows[i], m as i64)
        })
    };
    let b = |cols: &[i64]| DMatrix::from_fn(mcount, cols.len(), |m, j| e_f_inner(cols[j], m as i64));
    let pm = real_gemm(&a(&pos), &b(&neg)).norm_squared();
    let mp = real_gemm(&a(&neg), &b(&pos)).norm_squared();
    HsLevel {
        n_max: t.n_max,
        m_max: t.m_max,
        plus_minus: pm,
        minus_plus: mp,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HsLadder {
    pub levels: Vec<HsLevel>,
    pub bound_plus_minus: f64,
    pub bound_minus_plus: f64,
    pub monotone: bool,
    pub below_bounds: bool,
}

/// Ladder of [`dirac_hs_level`] over increasing cutoffs.
pub fn dirac_hs_ladder(n_maxes: &[usize]) -> Result<HsLadder> {
    if n_maxes.is_empty() || n_maxes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("ladder cutoffs must be strictly increasing".into()));
    }
    let truncs: Vec<DiracTruncation> = n_maxes.iter().map(|&n| DiracTruncation::new(n)).collect::<Result<_>>()?;
    // levels are independent; results are collected in ladder order
    let levels: Vec<HsLevel> = std::thread::scope(|scope| {
        let handles: Vec<_> = truncs.iter().map(|t| scope.spawn(move || dirac_hs_level(t))).collect();
        handles.into_iter().map(|h| h.join().expect("ladder level panicked")).collect()
    });
    let monotone = levels
        .windows(2)
        .all(|w| w[1].plus_minus >= w[0].plus_minus && w[1].minus_plus >= w[0].minus_plus);
    let below_bounds = levels
        .iter()
        .all(|l| l.plus_minus < HS_BOUND_PLUS_MINUS && l.minus_plus < HS_BOUND_MINUS_PLUS);
    Ok(HsLadder {
        levels,
        bound_plus_minus: HS_BOUND_PLUS_MINUS,
        bound_minus_plus: HS_BOUND_MINUS_PLUS,
        monotone,
        below_bounds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationSample {
    pub label: String,
    /// `|v g - g| / |g|`
    pub residual: f64,
    /// `<g, v g> / <g, g>`
    pub tau: f64,
    /// `|v g - τ g| / |g|`
    pub tau_residual: f64,
    /// `1 - |g_trunc|²`, the part of the sample lost to the Fourier cutoff
    pub truncation_leak: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    pub n_max: usize,
    pub samples: Vec<LocalizationSample>,
    pub max_residual: f64,
}

/// The vector `h_m` supported off `I`, truncated to the window.
pub fn off_interval_vector(t: &DiracTruncation, m: i64) -> DMatrix<f64> {
    DMatrix::from_fn(t.dim(), 1, |i, _| e_h_inner(i as i64 - t.n_max as i64, m))
}

/// `|v g - g|/|g|` for samples `g` supported in `T ∖ I` (given by their
/// Fourier coefficients), with the phase `τ` that best fits `v g = τ g`.
pub fn localization_check(
    v: &dyn Fn(&DMatrix<f64>) -> DMatrix<f64>,
    n_max: usize,
    samples: &[(String, DMatrix<f64>)],
) -> LocalizationReport {
    let out: Vec<LocalizationSample> = samples
        .iter()
        .map(|(label, g)| {
            let vg = v(g);
            let gn = g.norm();
            let tau = g.dot(&vg) / (gn * gn);
            LocalizationSample {
                label: label.clone(),
                residual: (&vg - g).norm() / gn,
                tau,
                tau_residual: (&vg - g * tau).norm() / gn,
                truncation_leak: 1.0 - gn * gn,
            }
        })
        .collect();
    let max_residual = out.iter().map(|s| s.residual).fold(0.0, f64::max);
    LocalizationReport {
        n_max,
        samples: out,
        max_residual,
    }
}

/// Localization of the Dirac isometry on the `h_m` with `|m| <= count`.
pub fn dirac_localization(t: &DiracTruncation, count: i64) -> Result<LocalizationReport> {
    let v = build_dirac_v(t)?;
    let samples: Vec<(String, DMatrix<f64>)> = (-count..=count)
        .map(|m| (format!("h_{m}"), off_interval_vector(t, m)))
        .collect();
    Ok(localization_check(&|x| v.apply(x), t.n_max, &samples))
}
