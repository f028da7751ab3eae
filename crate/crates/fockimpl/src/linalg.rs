//! Dense complex linear algebra helpers on top of nalgebra.
//!
//! Everything here works on `DMatrix<Complex64>`. Large products are routed
//! through `matrixmultiply::zgemm`; rank decisions use singular values
//! relative to the largest one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(r: usize, cols: usize) -> Mat {
    Mat::zeros(r, cols)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Below this many multiply-adds nalgebra's own product is used.
const GEMM_THRESHOLD: usize = 32 * 32 * 32;

/// `alpha * a * b + beta * c` written into `c`.
fn gemm_into(alpha: C64, a: &Mat, b: &Mat, beta: C64, out: &mut Mat) {
    let (m, k) = a.shape();
    let n = b.ncols();
    assert_eq!(k, b.nrows(), "inner dimensions differ");
    assert_eq!(out.shape(), (m, n), "output shape");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        *out *= beta;
        return;
    }
    // SAFETY: Complex64 is repr(C) {re, im}, layout-compatible with [f64; 2].
    // All three buffers are column-major with the strides given below and
    // sized by the shapes asserted above; `out` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [beta.re, beta.im],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
}

/// Matrix product, dispatching to zgemm for large operands.
pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (m, k) = a.shape();
    let n = b.ncols();
    if m * k * n < GEMM_THRESHOLD {
        return a * b;
    }
    let mut out = zeros(m, n);
    gemm_into(ONE, a, b, ZERO, &mut out);
    out
}

/// `a^* b` without materialising the adjoint for small inputs.
pub fn adj_mul(a: &Mat, b: &Mat) -> Mat {
    if a.nrows() * a.ncols() * b.ncols() < GEMM_THRESHOLD {
        return a.ad_mul(b);
    }
    matmul(&a.adjoint(), b)
}

/// `a b^*`.
pub fn mul_adj(a: &Mat, b: &Mat) -> Mat {
    if a.nrows() * a.ncols() * b.nrows() < GEMM_THRESHOLD {
        return a * b.adjoint();
    }
    matmul(a, &b.adjoint())
}

pub fn mul3(a: &Mat, b: &Mat, c: &Mat) -> Mat {
    matmul(&matmul(a, b), c)
}

/// Entrywise complex conjugate.
pub fn conj(a: &Mat) -> Mat {
    a.map(|z| z.conj())
}

pub fn frob(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn vnorm(v: &Vector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Distance of `a` from the identity (Frobenius).
pub fn dist_identity(a: &Mat) -> f64 {
    assert!(a.is_square());
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let d = if i == j { a[(i, j)] - ONE } else { a[(i, j)] };
            s += d.norm_sqr();
        }
    }
    s.sqrt()
}

pub fn hermitian_part(a: &Mat) -> Mat {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Thin singular value decomposition with singular values in descending order.
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v_t: Mat,
}

fn to_faer(a: &Mat) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| faer::c64::new(a[(i, j)].re, a[(i, j)].im))
}

/// Thin SVD `a = u diag(s) v_t`, singular values in decreasing order.
///
/// Computed with faer: nalgebra's complex SVD can return an inaccurate
/// factorisation when singular values are clustered next to an exact zero.
pub fn svd(a: &Mat) -> Svd {
    let (r, cols) = a.shape();
    if r == 0 || cols == 0 {
        let p = r.min(cols);
        return Svd {
            u: zeros(r, p),
            s: vec![],
            v_t: zeros(p, cols),
        };
    }
    let d = to_faer(a).thin_svd().expect("SVD converges");
    let (fu, fs, fv) = (d.U(), d.S().column_vector(), d.V());
    let p = fs.nrows();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| fs[j].re.total_cmp(&fs[i].re));
    let s = order.iter().map(|&i| fs[i].re).collect();
    let u = Mat::from_fn(r, p, |i, j| {
        let z = fu[(i, order[j])];
        c(z.re, z.im)
    });
    let v_t = Mat::from_fn(p, cols, |i, j| {
        let z = fv[(j, order[i])];
        c(z.re, -z.im)
    });
    Svd { u, s, v_t }
}

pub fn singular_values(a: &Mat) -> Vec<f64> {
    svd(a).s
}

pub fn op_norm(a: &Mat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Numerical rank: singular values above `tol * max(1, s_max)`.
pub fn rank(a: &Mat, tol: f64) -> usize {
    let s = singular_values(a);
    let cut = tol * s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&x| x > cut).count()
}

/// Moore–Penrose pseudoinverse with the same relative cut as [`rank`].
pub fn pinv(a: &Mat, tol: f64) -> Mat {
    let (r, cols) = a.shape();
    let d = svd(a);
    let cut = tol * d.s.first().copied().unwrap_or(0.0).max(1.0);
    let mut out = zeros(cols, r);
    for (k, &s) in d.s.iter().enumerate() {
        if s > cut {
            let vk = d.v_t.row(k).adjoint();
            let uk = d.u.column(k).adjoint();
            out += (vk * uk) * c(1.0 / s, 0.0);
        }
    }
    out
}

/// Orthogonal projection onto the kernel of `a` (as an `ncols x ncols` matrix).
pub fn kernel_projector(a: &Mat, tol: f64) -> Mat {
    let cols = a.ncols();
    let d = svd(a);
    let cut = tol * d.s.first().copied().unwrap_or(0.0).max(1.0);
    let mut p = eye(cols);
    for (k, &s) in d.s.iter().enumerate() {
        if s > cut {
            let v = d.v_t.row(k).adjoint();
            p -= &v * v.adjoint();
        }
    }
    p
}

/// Orthogonal projection onto the range of `a`.
pub fn range_projector(a: &Mat, tol: f64) -> Mat {
    let d = svd(a);
    let cut = tol * d.s.first().copied().unwrap_or(0.0).max(1.0);
    let mut p = zeros(a.nrows(), a.nrows());
    for (k, &s) in d.s.iter().enumerate() {
        if s > cut {
            let u = d.u.column(k);
            p += u * u.adjoint();
        }
    }
    p
}

/// Orthonormal basis of the range of an orthogonal projector `q`, chosen
/// deterministically: Gram–Schmidt over the columns `q e_1, q e_2, ...` in
/// coordinate order, taking the first column whose residual squared norm is at
/// least `1/(2N)`. Each chosen vector has a real positive entry at its pivot.
pub fn canonical_basis(q: &Mat, dim: usize) -> Mat {
    let n = q.nrows();
    let mut basis: Vec<Vector> = Vec::with_capacity(dim);
    let mut used = vec![false; n];
    let threshold = 1.0 / (2.0 * n.max(1) as f64);
    while basis.len() < dim {
        let mut chosen = None;
        let mut best: Option<(usize, Vector, f64)> = None;
        for (j, _) in used.iter().enumerate().filter(|(_, &u)| !u) {
            let mut v: Vector = q.column(j).into_owned();
            for b in &basis {
                let ov = b.dotc(&v);
                v -= b * ov;
            }
            // second pass for stability
            for b in &basis {
                let ov = b.dotc(&v);
                v -= b * ov;
            }
            let nn = v.norm_squared();
            if nn >= threshold {
                chosen = Some((j, v, nn));
                break;
            }
            if best.as_ref().is_none_or(|b| nn > b.2) {
                best = Some((j, v, nn));
            }
        }
        let (j, v, nn) = match chosen.or(best) {
            Some(x) if x.2 > 0.0 => x,
            _ => break,
        };
        used[j] = true;
        let mut v = v / c(nn.sqrt(), 0.0);
        // the pivot entry equals <e_j, residual> which is real positive in exact
        // arithmetic; remove the rounding phase
        let ph = v[j];
        if ph.norm() > 0.0 {
            v *= ph.conj() / ph.norm();
        }
        basis.push(v);
    }
    let mut out = zeros(n, basis.len());
    for (k, b) in basis.iter().enumerate() {
        out.set_column(k, b);
    }
    out
}

/// Canonical orthonormal basis of `ker a`.
pub fn kernel_basis(a: &Mat, tol: f64) -> Mat {
    let p = kernel_projector(a, tol);
    let d = p.trace().re.round().max(0.0) as usize;
    canonical_basis(&p, d)
}

/// Canonical orthonormal basis of `ran a`.
pub fn range_basis(a: &Mat, tol: f64) -> Mat {
    let p = range_projector(a, tol);
    let d = p.trace().re.round().max(0.0) as usize;
    canonical_basis(&p, d)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

/// Cyclic Jacobi iteration: each rotation zeroes one off-diagonal pair with
/// a 2x2 unitary, giving eigenpairs accurate to rounding even for clustered
/// spectra.
pub fn herm_eig(a: &Mat) -> HermEig {
    let n = a.nrows();
    let mut w = hermitian_part(a);
    let mut v = eye(n);
    let scale = frob(&w).max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for q in 1..n {
            for p in 0..q {
                off += w[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for q in 1..n {
            for p in 0..q {
                let apq = w[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = w[(p, p)].re;
                let aqq = w[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // U = diag(1, conj(phase)) [[c, s], [-s, c]]
                let upp = c(cs, 0.0);
                let upq = c(sn, 0.0);
                let uqp = -phase.conj() * sn;
                let uqq = phase.conj() * cs;
                for k in 0..n {
                    let (x, y) = (w[(k, p)], w[(k, q)]);
                    w[(k, p)] = x * upp + y * uqp;
                    w[(k, q)] = x * upq + y * uqq;
                }
                for k in 0..n {
                    let (x, y) = (w[(p, k)], w[(q, k)]);
                    w[(p, k)] = upp.conj() * x + uqp.conj() * y;
                    w[(q, k)] = upq.conj() * x + uqq.conj() * y;
                }
                w[(p, q)] = ZERO;
                w[(q, p)] = ZERO;
                w[(p, p)] = c(w[(p, p)].re, 0.0);
                w[(q, q)] = c(w[(q, q)].re, 0.0);
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * upp + y * uqp;
                    v[(k, q)] = x * upq + y * uqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].re.total_cmp(&w[(j, j)].re));
    let values = order.iter().map(|&i| w[(i, i)].re).collect();
    let vectors = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermEig { values, vectors }
}

/// Apply a real function to a Hermitian matrix through its spectrum.
pub fn herm_fn(a: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let e = herm_eig(a);
    let n = a.nrows();
    let mut scaled = e.vectors.clone();
    for j in 0..n {
        let fj = f(e.values[j]);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    mul_adj(&scaled, &e.vectors)
}

/// Determinant via LU.
pub fn det(a: &Mat) -> C64 {
    if a.nrows() == 0 {
        return ONE;
    }
    a.clone().lu().determinant()
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    if a.nrows() == 0 {
        return Some(zeros(0, 0));
    }
    a.clone().try_inverse()
}

/// Polar isometry `u` of `a = u |a|`, computed from the SVD and keeping only
/// singular values above `cut`.
pub fn polar_isometry(a: &Mat, cut: f64) -> Mat {
    let d = svd(a);
    let mut out = zeros(a.nrows(), a.ncols());
    for (k, &s) in d.s.iter().enumerate() {
        if s > cut {
            out += d.u.column(k) * d.v_t.row(k);
        }
    }
    out
}

/// Extract a sub-block.
pub fn block(a: &Mat, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat {
    a.view((r0, c0), (nr, nc)).into_owned()
}

/// Assemble a 2x2 block matrix.
pub fn from_blocks(a11: &Mat, a12: &Mat, a21: &Mat, a22: &Mat) -> Mat {
    let (r1, c1) = a11.shape();
    let (r2, c2) = a22.shape();
    let mut out = zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a11);
    out.view_mut((0, c1), (r1, c2)).copy_from(a12);
    out.view_mut((r1, 0), (r2, c1)).copy_from(a21);
    out.view_mut((r1, c1), (r2, c2)).copy_from(a22);
    out
}

/// Permanent by Ryser's formula (small sizes only).
pub fn permanent(a: &Mat) -> C64 {
    let n = a.nrows();
    assert!(a.is_square());
    if n == 0 {
        return ONE;
    }
    let mut total = ZERO;
    for s in 1u64..(1u64 << n) {
        let mut prod = ONE;
        for i in 0..n {
            let mut row = ZERO;
            for j in 0..n {
                if s >> j & 1 == 1 {
                    row += a[(i, j)];
                }
            }
            prod *= row;
        }
        let sign = if (n - s.count_ones() as usize) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        total += prod * sign;
    }
    total
}
