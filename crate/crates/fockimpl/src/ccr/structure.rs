//! CCR structure theory: κ-isometries, the `Z`-disk parameterisation of
//! Fock states, the spectral basis projection `p_V` of `ker V†` and the
//! product decomposition `V = U_V W_V`.
//!
//! `Z: K1 -> K2` is stored as its `k x k` block `z` with `z^T = z` and
//! operator norm below one. `C = P1 - P2` is the Gram operator of `κ`.

use serde::Serialize;

use crate::error::{precondition, structural, Error, Result};
use crate::linalg::{self, c, Mat, Vector, ZERO};
use crate::selfdual::{self, BogoliubovMap, Components, Kind};

fn check_ccr(v: &BogoliubovMap) -> Result<()> {
    if v.kind != Kind::Ccr {
        return Err(structural("expected a CCR map"));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct CcrValidationReport {
    pub isometry_residual: f64,
    pub conjugation_residual: f64,
    /// `dim ker V†`, always even
    pub kernel_dim: usize,
    /// smallest `|λ|` of `C` compressed to `ker V†` (nondegeneracy of `κ`)
    pub kappa_margin: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Check `V†V = 1`, `conj(V) = V` and nondegeneracy of `κ` on `ker V†`.
pub fn validate_ccr(v: &BogoliubovMap, tol: f64) -> Result<CcrValidationReport> {
    check_ccr(v)?;
    let base = selfdual::validate(v, tol)?;
    let kernel_dim = 2 * (v.target_modes - v.source_modes);
    let kappa_margin = if kernel_dim == 0 {
        f64::INFINITY
    } else {
        let e = kernel_projection(v, 1e-10);
        let a = linalg::mul3(&e, &selfdual::kappa(v.target_modes), &e);
        let vals = linalg::herm_eig(&a).values;
        let mut abs: Vec<f64> = vals.iter().map(|x| x.abs()).collect();
        abs.sort_by(|x, y| y.total_cmp(x));
        abs[kernel_dim - 1]
    };
    Ok(CcrValidationReport {
        isometry_residual: base.isometry_residual,
        conjugation_residual: base.conjugation_residual,
        kernel_dim,
        kappa_margin,
        tol,
        pass: base.pass && kappa_margin > tol,
    })
}

/// `E = C(1 - V'V'*)C`, the orthogonal projection onto `ker V†`, with `V'`
/// the isometric part of `V`.
pub fn kernel_projection(v: &BogoliubovMap, rank_tol: f64) -> Mat {
    let m = v.target_modes;
    let vp = linalg::polar_isometry(&v.matrix, rank_tol);
    let q = linalg::eye(2 * m) - linalg::mul_adj(&vp, &vp);
    let cm = selfdual::kappa(m);
    linalg::mul3(&cm, &q, &cm)
}

#[derive(Clone, Debug)]
pub struct FockParamCcr {
    pub z: Mat,
}

impl FockParamCcr {
    pub fn vacuum(k: usize) -> Self {
        FockParamCcr { z: linalg::zeros(k, k) }
    }

    pub fn modes(&self) -> usize {
        self.z.nrows()
    }

    /// `(|z^T - z|, |z|)`.
    pub fn residuals(&self) -> (f64, f64) {
        (
            linalg::frob(&(self.z.transpose() - &self.z)),
            linalg::op_norm(&self.z),
        )
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        if !self.z.is_square() {
            return Err(structural("Z must be square"));
        }
        let (sym, norm) = self.residuals();
        if sym > tol {
            return Err(structural(format!("Z is not symmetric (residual {sym:.3e})")));
        }
        if norm >= 1.0 {
            return Err(precondition(format!("|Z| = {norm} is not below one")));
        }
        Ok(())
    }
}

/// `P_Z = (P1 + Z)(P1 + Z†Z)^{-1}(P1 + Z†)`.
pub fn projection_from_z(p: &FockParamCcr, tol: f64) -> Result<Mat> {
    p.check(tol)?;
    let k = p.modes();
    let z = &p.z;
    let y = linalg::inverse(&(linalg::eye(k) - z.ad_mul(z)))
        .ok_or_else(|| precondition("1 - Z*Z is singular"))?;
    let zh = z.adjoint();
    let p12 = -(&y * &zh);
    let p21 = z * &y;
    let p22 = -(z * &y * &zh);
    Ok(linalg::from_blocks(&y, &p12, &p21, &p22))
}

/// Residuals of a CCR basis projection: `|P² - P|`, `|P† - P|`,
/// `|P + conj(P) - 1|`, and the smallest eigenvalue of `C` on `ran P`.
pub fn basis_projection_residuals(p: &Mat) -> (f64, f64, f64, f64) {
    let k = p.nrows() / 2;
    let idem = linalg::frob(&(p * p - p));
    let herm = linalg::frob(&(selfdual::kappa_adjoint(p) - p));
    let comp = linalg::frob(&(p + selfdual::conj_op(p) - linalg::eye(2 * k)));
    // κ restricted to ran P: P* C P on an orthonormal basis of ran P
    let basis = linalg::range_basis(p, 1e-8);
    let gram = linalg::mul3(&basis.adjoint(), &selfdual::kappa(k), &basis);
    let min = linalg::herm_eig(&linalg::hermitian_part(&gram))
        .values
        .first()
        .copied()
        .unwrap_or(f64::INFINITY);
    (idem, herm, comp, min)
}

/// `Z = P21 P11^{-1}`.
pub fn z_from_projection(p: &Mat, rank_tol: f64) -> Result<FockParamCcr> {
    if !p.is_square() || p.nrows() % 2 != 0 {
        return Err(structural("P must be square of even size"));
    }
    let comps = Components::of(p);
    let smin = linalg::singular_values(&comps.v11).last().copied().unwrap_or(1.0);
    if smin <= rank_tol {
        return Err(structural(format!("P11 is not invertible (smallest singular value {smin:.3e})")));
    }
    let inv = linalg::inverse(&comps.v11).ok_or_else(|| structural("P11 is not invertible"))?;
    Ok(FockParamCcr { z: &comps.v21 * inv })
}

/// `U_Z = (P1 + Z)(P1 + Z†Z)^{-½} + (P2 + Z†)(P2 + ZZ†)^{-½}`.
pub fn rotation_u_z(p: &FockParamCcr) -> Result<BogoliubovMap> {
    p.check(1e-8)?;
    let k = p.modes();
    let z = &p.z;
    let inv_sqrt = |a: Mat| linalg::herm_fn(&linalg::hermitian_part(&a), |x| 1.0 / x.sqrt());
    let a = inv_sqrt(linalg::eye(k) - z.ad_mul(z));
    let b = inv_sqrt(linalg::eye(k) - z * z.adjoint());
    let u12 = z.adjoint() * &b;
    let u21 = z * &a;
    let matrix = linalg::from_blocks(&a, &u12, &u21, &b);
    BogoliubovMap::new(Kind::Ccr, k, k, matrix)
}

/// Möbius action `Z -> (U21 + U22 Z)(U11 + U12 Z)^{-1}` of a unitary
/// Bogoliubov operator on the disk.
pub fn mobius(u: &BogoliubovMap, z: &Mat) -> Result<Mat> {
    let comps = u.components();
    let den = &comps.v11 + &comps.v12 * z;
    let inv = linalg::inverse(&den).ok_or_else(|| structural("U11 + U12 Z is singular"))?;
    Ok((&comps.v21 + &comps.v22 * z) * inv)
}

/// Spectral data of `ker V†`.
#[derive(Clone, Debug)]
pub struct KernelSplit {
    /// orthogonal projection onto `ker V†`
    pub e: Mat,
    /// `A = E C E`
    pub a: Mat,
    /// `p_V = A₊^{-1} C` on `ker V†`, zero on `ran V`
    pub p: Mat,
    /// smallest `|λ|` of `A` on `ker V†`
    pub margin: f64,
}

/// `E`, `A = ECE` and `p_V = A₊^{-1} C` on `ker V†`, extended by zero on
/// `ran V` so that it is κ-self-adjoint.
pub fn canonical_p_v(v: &BogoliubovMap, rank_tol: f64) -> Result<KernelSplit> {
    check_ccr(v)?;
    let m = v.target_modes;
    let dim = 2 * (m - v.source_modes);
    let e = kernel_projection(v, rank_tol);
    let cm = selfdual::kappa(m);
    let a = linalg::hermitian_part(&linalg::mul3(&e, &cm, &e));
    let eig = linalg::herm_eig(&a);
    let mut nonzero: Vec<f64> = eig.values.iter().filter(|x| x.abs() > rank_tol).copied().collect();
    if nonzero.len() != dim {
        return Err(Error::Numerical(format!(
            "κ is degenerate on ker V†: {} of {dim} eigenvalues of ECE exceed {rank_tol:.1e}",
            nonzero.len()
        )));
    }
    nonzero.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let margin = nonzero.first().map_or(f64::INFINITY, |x| x.abs());
    let mut a_plus_inv = linalg::zeros(2 * m, 2 * m);
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam > rank_tol {
            let u = eig.vectors.column(j);
            a_plus_inv += (u * u.adjoint()) * c(1.0 / lam, 0.0);
        }
    }
    // extend by zero along ran V, the κ-complement of ker V†: E(1 - VV†) = 1 - VV†
    let q = linalg::eye(2 * m) - linalg::matmul(&v.matrix, &selfdual::kappa_adjoint(&v.matrix));
    let p = linalg::mul3(&a_plus_inv, &cm, &q);
    Ok(KernelSplit { e, a, p, margin })
}

#[derive(Clone, Debug, Serialize)]
pub struct CcrResiduals {
    /// `|V† P_V V - P1|`
    pub pv_pullback: f64,
    /// `|U_V W_V - V|`
    pub reassembly: f64,
    /// off-diagonal blocks of `W_V`
    pub w_offdiag: f64,
    /// `|U_V† U_V - 1|`
    pub u_unitarity: f64,
    /// `|Z_V^T - Z_V|`
    pub z_symmetry: f64,
    /// `1 - |Z_V|`
    pub z_margin: f64,
    /// `|Z_V V11 - V21|`
    pub z_equation: f64,
    /// `|κ(g_i, g_j) - δ_ij|` on `k_V`
    pub k_gram: f64,
    /// smallest `|λ|` of `ECE` on `ker V†`
    pub kappa_margin: f64,
}

#[derive(Clone, Debug)]
pub struct CanonicalCcrData {
    pub param: FockParamCcr,
    /// `P_V = V P1 V† + p_V`
    pub p_v: Mat,
    pub split: KernelSplit,
    pub u_v: BogoliubovMap,
    pub w_v: BogoliubovMap,
    /// κ-orthonormal basis of `k_V = P_V(ker V†)`, columns in `K(m)`
    pub k_v: Mat,
    pub m_v: usize,
    pub residuals: CcrResiduals,
}

impl CanonicalCcrData {
    pub fn z_v(&self) -> &Mat {
        &self.param.z
    }

    /// κ-Gram matrix of the `k_V` basis.
    pub fn k_gram(&self) -> Mat {
        linalg::mul3(&self.k_v.adjoint(), &selfdual::kappa(self.k_v.nrows() / 2), &self.k_v)
    }
}

/// Modified Gram–Schmidt with respect to `κ` over the columns of `p`, which
/// must span a κ-positive subspace of dimension `dim`. The column with the
/// smallest index whose residual `κ`-norm² is at least half the largest is
/// taken at each step; its pivot entry is made real positive.
pub fn kappa_gram_schmidt(p: &Mat, dim: usize) -> Mat {
    let k = p.nrows() / 2;
    let kf = |x: &Vector, y: &Vector| selfdual::kappa_form(x, y);
    let mut basis: Vec<Vector> = Vec::with_capacity(dim);
    let mut used = vec![false; p.ncols()];
    while basis.len() < dim {
        let residuals: Vec<(usize, Vector, f64)> = (0..p.ncols())
            .filter(|&j| !used[j])
            .map(|j| {
                let mut v: Vector = p.column(j).into_owned();
                for _ in 0..2 {
                    for b in &basis {
                        let ov = kf(b, &v);
                        v -= b * ov;
                    }
                }
                let nn = kf(&v, &v).re;
                (j, v, nn)
            })
            .collect();
        let max = residuals.iter().fold(0.0f64, |a, r| a.max(r.2));
        if max <= 0.0 {
            break;
        }
        let (j, v, nn) = residuals
            .into_iter()
            .find(|r| r.2 >= 0.5 * max)
            .expect("the maximum qualifies");
        used[j] = true;
        let mut v = v / c(nn.sqrt(), 0.0);
        let ph = v[j];
        if ph.norm() > 0.0 {
            v *= ph.conj() / ph.norm();
        }
        basis.push(v);
    }
    let mut out = linalg::zeros(2 * k, basis.len());
    for (i, b) in basis.iter().enumerate() {
        out.set_column(i, b);
    }
    out
}

/// Canonical decomposition `V = U_V W_V` with `U_V = U_{Z_V}`.
pub fn decompose_ccr(v: &BogoliubovMap, rank_tol: f64) -> Result<CanonicalCcrData> {
    check_ccr(v)?;
    let (n, m) = (v.source_modes, v.target_modes);
    let split = canonical_p_v(v, rank_tol)?;
    let vdag = selfdual::kappa_adjoint(&v.matrix);
    let p_v = linalg::mul3(&v.matrix, &selfdual::p1(n), &vdag) + &split.p;
    let param = z_from_projection(&p_v, rank_tol)?;
    let param = FockParamCcr {
        z: (&param.z + param.z.transpose()) * c(0.5, 0.0),
    };
    let u_v = rotation_u_z(&param)?;
    // W_V is block diagonal; the discarded off-diagonal part is reported
    // and shows up again in the reassembly residual.
    let mut wc = Components::of(&linalg::matmul(&u_v.adjoint(), &v.matrix));
    let w_offdiag = linalg::frob(&wc.v12).hypot(linalg::frob(&wc.v21));
    wc.v12.fill(ZERO);
    wc.v21.fill(ZERO);
    let w = wc.assemble();
    let w_v = BogoliubovMap {
        kind: Kind::Ccr,
        source_modes: n,
        target_modes: m,
        matrix: w,
    };
    let m_v = m - n;
    let k_v = kappa_gram_schmidt(&split.p, m_v);

    let comps = v.components();
    let pullback = linalg::mul3(&vdag, &p_v, &v.matrix);
    let kg = linalg::mul3(&k_v.adjoint(), &selfdual::kappa(m), &k_v);
    let residuals = CcrResiduals {
        pv_pullback: linalg::frob(&(pullback - selfdual::p1(n))),
        reassembly: linalg::frob(&(&u_v.matrix * &w_v.matrix - &v.matrix)),
        w_offdiag,
        u_unitarity: linalg::dist_identity(&linalg::matmul(&u_v.adjoint(), &u_v.matrix)),
        z_symmetry: linalg::frob(&(param.z.transpose() - &param.z)),
        z_margin: 1.0 - linalg::op_norm(&param.z),
        z_equation: linalg::frob(&(&param.z * &comps.v11 - &comps.v21)),
        k_gram: linalg::dist_identity(&kg),
        kappa_margin: split.margin,
    };
    Ok(CanonicalCcrData {
        param,
        p_v,
        split,
        u_v,
        w_v,
        k_v,
        m_v,
        residuals,
    })
}

/// Symmetric `Z'` vanishing on `ran V11`: `conj(q) a q` with `q` the
/// projection onto `ker V11*` and `a` the symmetric part of `raw`.
pub fn admissible_z_perturbation(v: &BogoliubovMap, raw: &Mat, rank_tol: f64) -> Mat {
    let comps = v.components();
    let q = linalg::hermitian_part(&linalg::kernel_projector(&comps.v11.adjoint(), rank_tol));
    let a = (raw + raw.transpose()) * c(0.5, 0.0);
    linalg::conj(&q) * a * &q
}
