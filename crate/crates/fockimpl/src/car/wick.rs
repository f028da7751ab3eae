//! Wick-ordered exponentials of fermionic bilinear Hamiltonians.
//!
//! `η_H = exp(½ Σ h12_pq a*_p a*_q) · :exp(Σ h11_pq a*_p a_q): · exp(½ Σ h21_pq a_p a_q)`,
//! each factor evaluated by composing creation and annihilation operators.
//! The middle factor is built from `N_0 = ι` (the embedding `F(n) -> F(m)`)
//! by the recursion `N_{j+1} = Σ h11_pq a*_p N_j a_q`, which only couples
//! basis states of equal particle number.

use crate::car::fock::{sign_below, states_by_popcount, FockRep};
use crate::error::{structural, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{self, c, Mat, Vector, ONE, ZERO};

/// `Σ_{p<q} h_pq a*_p a*_q · m` on `F(k)`, `h` antisymmetric.
pub fn pair_create_left(h: &Mat, m: &Mat) -> Mat {
    let k = h.nrows();
    let dim = 1usize << k;
    assert_eq!(m.nrows(), dim);
    let pairs: Vec<(usize, usize, linalg::C64)> = (0..k)
        .flat_map(|p| (p + 1..k).map(move |q| (p, q)))
        .map(|(p, q)| (p, q, h[(p, q)]))
        .filter(|x| x.2 != ZERO)
        .collect();
    let mut out = linalg::zeros(dim, m.ncols());
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    for col in 0..m.ncols() {
        let s = &src[col * dim..(col + 1) * dim];
        let d = &mut dst[col * dim..(col + 1) * dim];
        for r in 0..dim {
            let x = s[r];
            if x == ZERO {
                continue;
            }
            for &(p, q, hpq) in &pairs {
                if r >> p & 1 == 1 || r >> q & 1 == 1 {
                    continue;
                }
                // a*_p a*_q |r> = s_q(r) s_p(r) |r + p + q> for p < q
                let sg = sign_below(r, q) * sign_below(r, p);
                d[r | 1 << p | 1 << q] += hpq * x * sg;
            }
        }
    }
    out
}

/// `m · Σ_{p<q} h_pq a_p a_q` on `F(k)`, `h` antisymmetric.
pub fn pair_annihilate_right(m: &Mat, h: &Mat) -> Mat {
    let k = h.nrows();
    let dim = 1usize << k;
    assert_eq!(m.ncols(), dim);
    let rows = m.nrows();
    let pairs: Vec<(usize, usize, linalg::C64)> = (0..k)
        .flat_map(|p| (p + 1..k).map(move |q| (p, q)))
        .map(|(p, q)| (p, q, h[(p, q)]))
        .filter(|x| x.2 != ZERO)
        .collect();
    let mut out = linalg::zeros(rows, dim);
    let src_all = m.as_slice();
    let dst_all = out.as_mut_slice();
    for cidx in 0..dim {
        for &(p, q, hpq) in &pairs {
            if cidx >> p & 1 == 0 || cidx >> q & 1 == 0 {
                continue;
            }
            // a_p a_q |c> = s_q(c) s_p(c) |c - p - q> for p < q
            let coef = hpq * (sign_below(cidx, q) * sign_below(cidx, p));
            let from = cidx ^ (1 << p) ^ (1 << q);
            let s = &src_all[from * rows..(from + 1) * rows];
            let d = &mut dst_all[cidx * rows..(cidx + 1) * rows];
            for (y, &x) in d.iter_mut().zip(s) {
                if x != ZERO {
                    *y += coef * x;
                }
            }
        }
    }
    out
}

/// `:exp(Σ x_pq a*_p a_q):` as a map `F(n) -> F(m)` for `x: m x n`, where
/// the zeroth term is the embedding `ι`.
pub fn normal_ordered_one_body(x: &Mat) -> Mat {
    let (m, n) = x.shape();
    let (dm, dn) = (1usize << m, 1usize << n);
    let sectors = states_by_popcount(m);
    let mut cur = linalg::zeros(dm, dn);
    for cidx in 0..dn {
        cur[(cidx, cidx)] = ONE;
    }
    let mut total = cur.clone();
    for j in 0..n.min(m) {
        let mut next = linalg::zeros(dm, dn);
        let mut any = false;
        let scale = 1.0 / (j + 1) as f64;
        for cidx in 0..dn {
            let pc = cidx.count_ones() as usize;
            if pc < j + 1 {
                continue;
            }
            let qs: Vec<usize> = (0..n).filter(|&q| cidx >> q & 1 == 1).collect();
            for &r in &sectors[pc] {
                let mut acc = ZERO;
                for &q in &qs {
                    let sq = sign_below(cidx, q);
                    let cq = cidx ^ (1 << q);
                    let mut bits = r;
                    while bits != 0 {
                        let p = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let v = cur[(r ^ (1 << p), cq)];
                        if v != ZERO {
                            acc += x[(p, q)] * v * (sq * sign_below(r, p));
                        }
                    }
                }
                if acc != ZERO {
                    next[(r, cidx)] = acc * scale;
                    any = true;
                }
            }
        }
        if !any {
            break;
        }
        total += &next;
        cur = next;
    }
    total
}

/// `exp(½ Σ h_pq a*_p a*_q) · m`.
pub fn exp_pair_create_left(h: &Mat, m: &Mat) -> Mat {
    let mut total = m.clone();
    let mut term = m.clone();
    for l in 1.. {
        term = pair_create_left(h, &term) * c(1.0 / l as f64, 0.0);
        if term.iter().all(|z| *z == ZERO) {
            break;
        }
        total += &term;
    }
    total
}

/// `m · exp(½ Σ h_pq a_p a_q)`.
pub fn exp_pair_annihilate_right(m: &Mat, h: &Mat) -> Mat {
    let mut total = m.clone();
    let mut term = m.clone();
    for l in 1.. {
        term = pair_annihilate_right(&term, h) * c(1.0 / l as f64, 0.0);
        if term.iter().all(|z| *z == ZERO) {
            break;
        }
        total += &term;
    }
    total
}

fn check_antisymmetric(h: &Hamiltonian, tol: f64) -> Result<()> {
    let r = h.antisymmetry_residual()?;
    if r > tol {
        return Err(structural(format!("H is not antisymmetric (residual {r:.3e})")));
    }
    Ok(())
}

/// Wick-ordered exponential `η_H: F(n) -> F(m)`.
pub fn wick_exponential_blocks(h: &Hamiltonian, tol: f64) -> Result<Mat> {
    check_antisymmetric(h, tol)?;
    let one_body = normal_ordered_one_body(&h.h11);
    let right = exp_pair_annihilate_right(&one_body, &h.h21);
    Ok(exp_pair_create_left(&h.h12, &right))
}

/// Wick-ordered exponential of a square antisymmetric `H` on `rep`.
pub fn wick_exponential(h: &Mat, rep: &FockRep, tol: f64) -> Result<Mat> {
    if h.shape() != (2 * rep.modes, 2 * rep.modes) {
        return Err(structural("H does not match the Fock space"));
    }
    wick_exponential_blocks(&Hamiltonian::from_square(h)?, tol)
}

/// `exp(½ Σ h_pq a*_p a*_q) Ω`.
pub fn pair_state(h12: &Mat) -> Vector {
    let k = h12.nrows();
    let mut omega = linalg::zeros(1 << k, 1);
    omega[(0, 0)] = ONE;
    exp_pair_create_left(h12, &omega).column(0).into_owned()
}

/// `det(1 + h h*)^{1/4}`, the norm of [`pair_state`].
pub fn pair_state_norm_formula(h12: &Mat) -> f64 {
    let k = h12.nrows();
    let d = linalg::det(&(linalg::eye(k) + linalg::mul_adj(h12, h12)));
    d.re.powf(0.25)
}
