//! Truncated symmetric Fock space over `K1 = C^k`.
//!
//! Basis vectors are occupation tuples with total particle number at most
//! `n_max`, in graded order (by total number, then lexicographically
//! descending occupation tuples, so `(N, 0, ..)` comes first in sector `N`).
//! Ladder operators are sparse; `a(x)` is antilinear in `x`. The canonical
//! commutation relations hold exactly on states with at most `n_max - 1`
//! particles; identities involving higher powers of field operators hold on
//! correspondingly smaller "protected" sectors.

use std::collections::HashMap;

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::config::DEFAULT_CCR_DIM_CAP;
use crate::error::{precondition, structural, Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{self, c, Mat, Vector, C64, I, ONE, ZERO};
use crate::selfdual;

pub type Sparse = CsrMatrix<C64>;

/// Occupation-number basis with a particle cutoff.
#[derive(Clone, Debug)]
pub struct CcrSpace {
    pub modes: usize,
    pub n_max: usize,
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn compositions(modes: usize, total: usize, out: &mut Vec<Vec<u32>>, prefix: &mut Vec<u32>) {
    if prefix.len() + 1 == modes {
        prefix.push(total as u32);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first as u32);
        compositions(modes, total - first, out, prefix);
        prefix.pop();
    }
}

/// `C(k + n, k)`, the dimension of the truncated space.
pub fn ccr_dim(modes: usize, n_max: usize) -> usize {
    let mut d: u128 = 1;
    for i in 1..=modes as u128 {
        d = d * (n_max as u128 + i) / i;
    }
    d.min(usize::MAX as u128) as usize
}

impl CcrSpace {
    pub fn new(modes: usize, n_max: usize) -> Self {
        let mut basis = Vec::new();
        if modes == 0 {
            basis.push(Vec::new());
        } else {
            for total in 0..=n_max {
                compositions(modes, total, &mut basis, &mut Vec::new());
            }
        }
        let index = basis.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
        CcrSpace {
            modes,
            n_max,
            basis,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn occupation(&self, i: usize) -> &[u32] {
        &self.basis[i]
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn particle_number(&self, i: usize) -> usize {
        self.basis[i].iter().map(|&x| x as usize).sum()
    }

    /// Indices of basis states with at most `n` particles (a prefix of the
    /// graded basis).
    pub fn sector_upto(&self, n: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.particle_number(i) <= n).collect()
    }
}

/// Fock representation data: the space and its ladder operators.
#[derive(Clone, Debug)]
pub struct CcrRep {
    pub space: CcrSpace,
    ann: Vec<Sparse>,
    cre: Vec<Sparse>,
}

/// Build the truncated representation, refusing dimensions above `cap`.
pub fn build_rep_ccr(modes: usize, n_max: usize, cap: Option<usize>) -> Result<CcrRep> {
    let cap = cap.unwrap_or(DEFAULT_CCR_DIM_CAP);
    let dim = ccr_dim(modes, n_max);
    if dim > cap {
        return Err(Error::Resource(format!(
            "symmetric Fock space with {modes} modes and cutoff {n_max} has dimension {dim}, above the cap of {cap}"
        )));
    }
    let space = CcrSpace::new(modes, n_max);
    let mut ann = Vec::with_capacity(modes);
    for i in 0..modes {
        let mut coo = CooMatrix::new(dim, dim);
        for col in 0..dim {
            let occ = space.occupation(col);
            if occ[i] > 0 {
                let mut lower = occ.to_vec();
                lower[i] -= 1;
                let row = space.index_of(&lower).expect("lower state is in the basis");
                coo.push(row, col, c((occ[i] as f64).sqrt(), 0.0));
            }
        }
        ann.push(CsrMatrix::from(&coo));
    }
    let cre = ann.iter().map(|a| a.transpose()).collect();
    Ok(CcrRep { space, ann, cre })
}

impl CcrRep {
    pub fn modes(&self) -> usize {
        self.space.modes
    }

    pub fn n_max(&self) -> usize {
        self.space.n_max
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn vacuum(&self) -> Vector {
        let mut v = Vector::zeros(self.dim());
        v[0] = ONE;
        v
    }

    pub fn annihilator(&self, i: usize) -> &Sparse {
        &self.ann[i]
    }

    pub fn creator(&self, i: usize) -> &Sparse {
        &self.cre[i]
    }

    /// `Σ cre_i a*_i + Σ ann_i a_i`.
    pub fn linear(&self, cre: &[C64], ann: &[C64]) -> Sparse {
        let dim = self.dim();
        let mut coo = CooMatrix::new(dim, dim);
        for i in 0..self.modes() {
            for (mats, coef) in [(&self.cre, cre[i]), (&self.ann, ann[i])] {
                if coef == ZERO {
                    continue;
                }
                for (r, col, v) in mats[i].triplet_iter() {
                    coo.push(r, col, *v * coef);
                }
            }
        }
        CsrMatrix::from(&coo)
    }

    /// `π(f) = a*(P1 f) + a(P1 f*)`.
    pub fn pi(&self, f: &Vector) -> Sparse {
        let k = self.modes();
        assert_eq!(f.len(), 2 * k);
        let cre: Vec<C64> = (0..k).map(|i| f[i]).collect();
        let ann: Vec<C64> = (0..k).map(|i| f[k + i]).collect();
        self.linear(&cre, &ann)
    }

    /// `a*(x)`.
    pub fn create(&self, x: &Vector) -> Sparse {
        let zero = vec![ZERO; self.modes()];
        self.linear(x.as_slice(), &zero)
    }

    /// `a(x)`, antilinear in `x`.
    pub fn annihilate(&self, x: &Vector) -> Sparse {
        let zero = vec![ZERO; self.modes()];
        let conj: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        self.linear(&zero, &conj)
    }

    pub fn number_operator(&self) -> Sparse {
        let dim = self.dim();
        let mut coo = CooMatrix::new(dim, dim);
        for i in 0..dim {
            coo.push(i, i, c(self.space.particle_number(i) as f64, 0.0));
        }
        CsrMatrix::from(&coo)
    }

    /// `½ Σ h_pq a*_p a*_q` for symmetric `h`.
    pub fn pair_creator(&self, h: &Mat) -> Sparse {
        let k = self.modes();
        let mut total = CsrMatrix::zeros(self.dim(), self.dim());
        for p in 0..k {
            for q in 0..k {
                if h[(p, q)] != ZERO {
                    let prod = &self.cre[p] * &self.cre[q];
                    total = total + prod * (h[(p, q)] * 0.5);
                }
            }
        }
        total
    }

    /// `½ Σ h_pq a_p a_q` for symmetric `h`.
    pub fn pair_annihilator(&self, h: &Mat) -> Sparse {
        let k = self.modes();
        let mut total = CsrMatrix::zeros(self.dim(), self.dim());
        for p in 0..k {
            for q in 0..k {
                if h[(p, q)] != ZERO {
                    let prod = &self.ann[p] * &self.ann[q];
                    total = total + prod * (h[(p, q)] * 0.5);
                }
            }
        }
        total
    }

    /// Projector onto states with at most `n` particles.
    pub fn sector_projector(&self, n: usize) -> Mat {
        Mat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j && self.space.particle_number(i) <= n {
                ONE
            } else {
                ZERO
            }
        })
    }
}

/// Dense copy of a sparse matrix.
pub fn dense(a: &Sparse) -> Mat {
    let mut out = linalg::zeros(a.nrows(), a.ncols());
    for (r, col, v) in a.triplet_iter() {
        out[(r, col)] += *v;
    }
    out
}

/// Sparse times dense.
pub fn spmm(a: &Sparse, b: &Mat) -> Mat {
    a * b
}

/// `exp(a) b` for nilpotent sparse `a` (raising or lowering operators).
pub fn exp_nilpotent_apply(a: &Sparse, b: &Mat) -> Mat {
    let mut total = b.clone();
    let mut term = b.clone();
    for l in 1.. {
        term = spmm(a, &term) * c(1.0 / l as f64, 0.0);
        if term.iter().all(|z| *z == ZERO) || l > 4 * (a.nrows() + 1) {
            break;
        }
        total += &term;
    }
    total
}

/// Weyl operator `w(f) = exp(i π(f))` for `f = f*`, from the spectral
/// decomposition of the (Hermitian) truncated field operator.
pub fn weyl(f: &Vector, rep: &CcrRep, tol: f64) -> Result<Mat> {
    let r = linalg::vnorm(&(selfdual::conj_vector(f) - f));
    if r > tol {
        return Err(precondition(format!("f is not self-conjugate (residual {r:.3e})")));
    }
    let p = dense(&rep.pi(f));
    Ok(unitary_exp_hermitian(&p))
}

fn unitary_exp_hermitian(p: &Mat) -> Mat {
    let e = linalg::herm_eig(p);
    let n = p.nrows();
    let mut scaled = e.vectors.clone();
    for j in 0..n {
        let ph = (I * e.values[j]).exp();
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    linalg::mul_adj(&scaled, &e.vectors)
}

/// `Γ_s(x): F_s(n) -> F_s(m)` for `x: C^n -> C^m`: the basis state
/// `Π (a*_j)^{c_j} / sqrt(c_j!) Ω` goes to `Π a*(x e_j)^{c_j} / sqrt(c_j!) Ω`.
/// Particle number is preserved, so the truncated matrix is exact.
pub fn second_quantize_ccr(x: &Mat, src: &CcrRep, tgt: &CcrRep) -> Result<Mat> {
    let (n, m) = (src.modes(), tgt.modes());
    if x.shape() != (m, n) {
        return Err(structural("one-particle operator does not match the Fock spaces"));
    }
    let creators: Vec<Sparse> = (0..n).map(|j| tgt.create(&x.column(j).into_owned())).collect();
    let mut out = linalg::zeros(tgt.dim(), src.dim());
    let limit = tgt.n_max();
    for col in 0..src.dim() {
        let occ = src.space.occupation(col);
        if src.space.particle_number(col) > limit {
            continue;
        }
        let mut v = Mat::from_column_slice(tgt.dim(), 1, tgt.vacuum().as_slice());
        let mut norm = 1.0;
        for (j, &cj) in occ.iter().enumerate() {
            for l in 1..=cj {
                v = spmm(&creators[j], &v);
                norm *= l as f64;
            }
        }
        out.set_column(col, &(v.column(0) * c(1.0 / norm.sqrt(), 0.0)));
    }
    Ok(out)
}

/// Symmetric check for CCR Hamiltonian blocks and the operator-validity
/// condition `|H12| < 1`.
fn check_ccr_hamiltonian(h: &Hamiltonian, tol: f64) -> Result<()> {
    let r = h.symmetry_residual()?;
    if r > tol {
        return Err(structural(format!("H is not symmetric (residual {r:.3e})")));
    }
    let nrm = linalg::op_norm(&h.h12);
    if nrm >= 1.0 {
        return Err(precondition(format!("|H12| = {nrm} is not below one")));
    }
    Ok(())
}

/// Wick-ordered exponential `η_H = exp(½ h12 a*a*) Γ_s(ι + h11) exp(½ h21 aa)`
/// as a map `F_s(n) -> F_s(m)` on the truncated spaces. Each factor
/// changes particle number monotonically, so every retained matrix entry
/// equals the corresponding entry of the untruncated operator.
pub fn wick_exponential_ccr(h: &Hamiltonian, src: &CcrRep, tgt: &CcrRep, tol: f64) -> Result<Mat> {
    check_ccr_hamiltonian(h, tol)?;
    let (n, m) = (src.modes(), tgt.modes());
    let iota = Mat::from_fn(m, n, |i, j| if i == j { ONE } else { ZERO });
    let one_body = second_quantize_ccr(&(iota + &h.h11), src, tgt)?;
    let mut right = one_body.transpose();
    // (N exp(½ h21 aa))^T = exp(½ h21 aa)^T N^T
    let low = src.pair_annihilator(&h.h21).transpose();
    right = exp_nilpotent_apply(&low, &right);
    let left = right.transpose();
    Ok(exp_nilpotent_apply(&tgt.pair_creator(&h.h12), &left))
}

/// `exp(½ h a*a*) Ω`.
pub fn pair_state_ccr(h12: &Mat, rep: &CcrRep) -> Vector {
    let omega = Mat::from_column_slice(rep.dim(), 1, rep.vacuum().as_slice());
    exp_nilpotent_apply(&rep.pair_creator(h12), &omega).column(0).into_owned()
}

/// `det(1 - h h*)^{-1/4}`, the norm of the untruncated [`pair_state_ccr`].
pub fn pair_state_norm_formula_ccr(h12: &Mat) -> f64 {
    let k = h12.nrows();
    linalg::det(&(linalg::eye(k) - linalg::mul_adj(h12, h12))).re.powf(-0.25)
}
