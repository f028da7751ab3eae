//! Truncated selfdual one-particle spaces and Bogoliubov maps between them.
//!
//! Basis convention: indices `0..k` span K1, `k..2k` span K2, and the
//! conjugation pairs `e_i` with `e_{i+k}`. Conjugation of a vector is the
//! entry-wise complex conjugate followed by swapping the two halves.

use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::linalg::{self, c, Mat, Vector, ONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "CAR")]
    Car,
    #[serde(rename = "CCR")]
    Ccr,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kind::Car => write!(f, "CAR"),
            Kind::Ccr => write!(f, "CCR"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelfdualSpace {
    pub modes: usize,
    pub kind: Kind,
}

impl SelfdualSpace {
    pub fn new(modes: usize, kind: Kind) -> Self {
        SelfdualSpace { modes, kind }
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    /// Basis projection onto K1.
    pub fn p1(&self) -> Mat {
        p1(self.modes)
    }

    pub fn p2(&self) -> Mat {
        p2(self.modes)
    }

    /// The form matrix `C = P1 - P2`.
    pub fn kappa(&self) -> Mat {
        kappa(self.modes)
    }

    pub fn conj_vector(&self, f: &Vector) -> Vector {
        conj_vector(f)
    }
}

pub fn p1(k: usize) -> Mat {
    Mat::from_fn(2 * k, 2 * k, |i, j| if i == j && i < k { ONE } else { linalg::ZERO })
}

pub fn p2(k: usize) -> Mat {
    Mat::from_fn(2 * k, 2 * k, |i, j| if i == j && i >= k { ONE } else { linalg::ZERO })
}

pub fn kappa(k: usize) -> Mat {
    Mat::from_fn(2 * k, 2 * k, |i, j| {
        if i != j {
            linalg::ZERO
        } else if i < k {
            ONE
        } else {
            -ONE
        }
    })
}

/// `f*`: conjugate entries and swap the halves.
pub fn conj_vector(f: &Vector) -> Vector {
    let k = f.len() / 2;
    Vector::from_fn(f.len(), |i, _| if i < k { f[i + k].conj() } else { f[i - k].conj() })
}

/// The conjugate `J A J` of an operator between selfdual spaces (both
/// dimensions even): entry-wise conjugate with both halves swapped.
pub fn conj_op(a: &Mat) -> Mat {
    let (r, cols) = a.shape();
    let (m, n) = (r / 2, cols / 2);
    Mat::from_fn(r, cols, |i, j| {
        let si = if i < m { i + m } else { i - m };
        let sj = if j < n { j + n } else { j - n };
        a[(si, sj)].conj()
    })
}

/// Transpose with respect to the conjugation, `A^τ = conj(A)^*`.
pub fn tau(a: &Mat) -> Mat {
    conj_op(a).adjoint()
}

/// κ-adjoint `A† = C_src A^* C_tgt` for `A: K(src) -> K(tgt)`.
pub fn kappa_adjoint(a: &Mat) -> Mat {
    let (r, cols) = a.shape();
    let (m, n) = (r / 2, cols / 2);
    Mat::from_fn(cols, r, |i, j| {
        let si = if i < n { 1.0 } else { -1.0 };
        let sj = if j < m { 1.0 } else { -1.0 };
        a[(j, i)].conj() * (si * sj)
    })
}

/// The four blocks of an operator `K(n) -> K(m)`.
#[derive(Clone, Debug)]
pub struct Components {
    pub v11: Mat,
    pub v12: Mat,
    pub v21: Mat,
    pub v22: Mat,
}

impl Components {
    pub fn of(a: &Mat) -> Components {
        let (m, n) = (a.nrows() / 2, a.ncols() / 2);
        Components {
            v11: linalg::block(a, 0, 0, m, n),
            v12: linalg::block(a, 0, n, m, n),
            v21: linalg::block(a, m, 0, m, n),
            v22: linalg::block(a, m, n, m, n),
        }
    }

    pub fn assemble(&self) -> Mat {
        linalg::from_blocks(&self.v11, &self.v12, &self.v21, &self.v22)
    }
}

/// Statistics dimension: finite count or unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatDim {
    Finite(u64),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexData {
    pub ind: i64,
    pub m_v: usize,
    pub d_v: StatDim,
}

/// Isometric, conjugation-equivariant map `K(n) -> K(m)` with `m >= n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovMap {
    pub kind: Kind,
    pub source_modes: usize,
    pub target_modes: usize,
    pub matrix: Mat,
}

impl BogoliubovMap {
    /// Wrap a matrix after checking its shape (not its algebraic identities,
    /// see [`validate`]).
    pub fn new(kind: Kind, source_modes: usize, target_modes: usize, matrix: Mat) -> Result<Self> {
        if matrix.shape() != (2 * target_modes, 2 * source_modes) {
            return Err(structural(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                2 * target_modes,
                2 * source_modes
            )));
        }
        if target_modes < source_modes {
            return Err(structural(format!(
                "target has {target_modes} modes, fewer than the source's {source_modes}"
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(structural("matrix has non-finite entries"));
        }
        Ok(BogoliubovMap {
            kind,
            source_modes,
            target_modes,
            matrix,
        })
    }

    pub fn identity(kind: Kind, modes: usize) -> Self {
        BogoliubovMap {
            kind,
            source_modes: modes,
            target_modes: modes,
            matrix: linalg::eye(2 * modes),
        }
    }

    /// Build from the K1-column blocks; the rest follows from equivariance.
    pub fn from_blocks(kind: Kind, v11: &Mat, v12: &Mat) -> Result<Self> {
        let comps = Components {
            v11: v11.clone(),
            v12: v12.clone(),
            v21: linalg::conj(v12),
            v22: linalg::conj(v11),
        };
        BogoliubovMap::new(kind, v11.ncols(), v11.nrows(), comps.assemble())
    }

    pub fn source(&self) -> SelfdualSpace {
        SelfdualSpace::new(self.source_modes, self.kind)
    }

    pub fn target(&self) -> SelfdualSpace {
        SelfdualSpace::new(self.target_modes, self.kind)
    }

    pub fn components(&self) -> Components {
        Components::of(&self.matrix)
    }

    pub fn index_data(&self) -> IndexData {
        index_data(self)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &BogoliubovMap) -> Result<BogoliubovMap> {
        if self.kind != other.kind || other.target_modes != self.source_modes {
            return Err(structural("maps are not composable"));
        }
        BogoliubovMap::new(
            self.kind,
            other.source_modes,
            self.target_modes,
            linalg::matmul(&self.matrix, &other.matrix),
        )
    }

    /// The adjoint appropriate to the kind (Hilbert for CAR, κ for CCR).
    pub fn adjoint(&self) -> Mat {
        match self.kind {
            Kind::Car => self.matrix.adjoint(),
            Kind::Ccr => kappa_adjoint(&self.matrix),
        }
    }

    /// Apply to a vector of the source space.
    pub fn apply(&self, f: &Vector) -> Vector {
        &self.matrix * f
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub kind: Kind,
    pub isometry_residual: f64,
    pub conjugation_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Check isometry (`V*V = 1` or `V†V = 1`) and equivariance (`conj(V) = V`).
pub fn validate(v: &BogoliubovMap, tol: f64) -> Result<ValidationReport> {
    let (r, cols) = v.matrix.shape();
    if r % 2 != 0 || cols % 2 != 0 || r != 2 * v.target_modes || cols != 2 * v.source_modes {
        return Err(structural("matrix dimensions inconsistent with mode counts"));
    }
    let gram = linalg::matmul(&v.adjoint(), &v.matrix);
    let isometry_residual = linalg::frob(&(gram - linalg::eye(cols)));
    let conjugation_residual = linalg::frob(&(conj_op(&v.matrix) - &v.matrix));
    Ok(ValidationReport {
        kind: v.kind,
        isometry_residual,
        conjugation_residual,
        tol,
        pass: isometry_residual <= tol && conjugation_residual <= tol,
    })
}

pub fn index_data(v: &BogoliubovMap) -> IndexData {
    let ind = 2 * v.source_modes as i64 - 2 * v.target_modes as i64;
    let m_v = (-ind / 2) as usize;
    let d_v = match v.kind {
        Kind::Car => StatDim::Finite(1u64 << m_v.min(63)),
        Kind::Ccr => {
            if ind == 0 {
                StatDim::Finite(1)
            } else {
                StatDim::Infinite
            }
        }
    };
    IndexData { ind, m_v, d_v }
}

/// Dimension of the kernel of the kind-appropriate adjoint, computed
/// numerically (independent of the shape bookkeeping in [`index_data`]).
pub fn adjoint_kernel_dim(v: &BogoliubovMap, rank_tol: f64) -> usize {
    let adj = v.adjoint();
    adj.ncols() - linalg::rank(&adj, rank_tol)
}

pub fn pseudo_inverse(a: &Mat, rank_tol: f64) -> Mat {
    linalg::pinv(a, rank_tol)
}

pub fn kernel_basis(a: &Mat, rank_tol: f64) -> Mat {
    linalg::kernel_basis(a, rank_tol)
}

/// Embed `K(n)` into `K(m)` mode by mode (the first n modes of each half).
pub fn embedding(kind: Kind, n: usize, m: usize) -> BogoliubovMap {
    let mut a = linalg::zeros(2 * m, 2 * n);
    for i in 0..n {
        a[(i, i)] = ONE;
        a[(m + i, n + i)] = ONE;
    }
    BogoliubovMap {
        kind,
        source_modes: n,
        target_modes: m,
        matrix: a,
    }
}

/// Zero-pad source columns so a map `K(n) -> K(m)` becomes square on `K(m)`.
pub fn pad_source(a: &Mat) -> Mat {
    let (r, cols) = a.shape();
    let (m, n) = (r / 2, cols / 2);
    let comps = Components::of(a);
    let pad = |b: &Mat| {
        let mut out = linalg::zeros(m, m);
        out.view_mut((0, 0), (m, n)).copy_from(b);
        out
    };
    linalg::from_blocks(&pad(&comps.v11), &pad(&comps.v12), &pad(&comps.v21), &pad(&comps.v22))
}

/// Vector in K with the given K1 part and zero K2 part.
pub fn k1_vector(x: &Vector) -> Vector {
    let k = x.len();
    Vector::from_fn(2 * k, |i, _| if i < k { x[i] } else { linalg::ZERO })
}

/// Vector in K with zero K1 part and the given K2 part.
pub fn k2_vector(x: &Vector) -> Vector {
    let k = x.len();
    Vector::from_fn(2 * k, |i, _| if i >= k { x[i - k] } else { linalg::ZERO })
}

/// `κ(f, g) = <f, C g>`.
pub fn kappa_form(f: &Vector, g: &Vector) -> linalg::C64 {
    let k = f.len() / 2;
    let mut s = linalg::ZERO;
    for i in 0..f.len() {
        let sign = if i < k { 1.0 } else { -1.0 };
        s += f[i].conj() * g[i] * sign;
    }
    s
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(a: &Mat) -> f64 {
    linalg::frob(a)
}

/// Scalar multiple helper used by example builders.
pub fn real(x: f64) -> linalg::C64 {
    c(x, 0.0)
}
