//! Antisymmetric Fock space over `K1 = C^k`.
//!
//! Basis vectors are occupation bitmasks `r` in `0..2^k`; `a*(e_i)` acts on
//! `|r>` with sign `(-1)^{#occupied modes below i}`. Field operators are
//! never materialised for the large computations: they are applied to the
//! rows (left multiplication) or columns (right multiplication) of dense
//! matrices directly.

use crate::config::DEFAULT_CAR_MODE_CAP;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector, C64, I, ONE, ZERO};

#[inline]
pub(crate) fn sign_below(r: usize, i: usize) -> f64 {
    if (r & ((1usize << i) - 1)).count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[inline]
pub(crate) fn parity_sign(r: usize) -> f64 {
    if r.count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// A linear combination `Σ cre_i a*_i + Σ ann_i a_i`, optionally followed by
/// the parity operator and a scalar (for twisted fields).
#[derive(Clone, Debug)]
pub struct FieldOp {
    pub modes: usize,
    pub cre: Vec<C64>,
    pub ann: Vec<C64>,
    /// multiply by `i Γ` on the right (twisted field `ψ = i π Γ`)
    pub twisted: bool,
}

impl FieldOp {
    /// `π(f) = a*(P1 f) + a(P1 f*)` for `f ∈ K(k)`.
    pub fn pi(f: &Vector) -> FieldOp {
        let k = f.len() / 2;
        FieldOp {
            modes: k,
            cre: (0..k).map(|i| f[i]).collect(),
            ann: (0..k).map(|i| f[k + i]).collect(),
            twisted: false,
        }
    }

    /// `ψ(f) = i π(f) Γ`.
    pub fn psi(f: &Vector) -> FieldOp {
        FieldOp {
            twisted: true,
            ..FieldOp::pi(f)
        }
    }

    /// `a*(x)` for `x ∈ K1`.
    pub fn create(x: &Vector) -> FieldOp {
        FieldOp {
            modes: x.len(),
            cre: x.iter().copied().collect(),
            ann: vec![ZERO; x.len()],
            twisted: false,
        }
    }

    /// `a(x)` for `x ∈ K1` (antilinear in `x`).
    pub fn annihilate(x: &Vector) -> FieldOp {
        FieldOp {
            modes: x.len(),
            cre: vec![ZERO; x.len()],
            ann: x.iter().map(|z| z.conj()).collect(),
            twisted: false,
        }
    }

    /// Apply the untwisted part to the rows: `out = L · m`.
    fn linear_left(&self, m: &Mat) -> Mat {
        let dim = 1usize << self.modes;
        assert_eq!(m.nrows(), dim, "row dimension");
        let cols = m.ncols();
        let mut out = linalg::zeros(dim, cols);
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        let active: Vec<usize> = (0..self.modes)
            .filter(|&i| self.cre[i] != ZERO || self.ann[i] != ZERO)
            .collect();
        for col in 0..cols {
            let s = &src[col * dim..(col + 1) * dim];
            let d = &mut dst[col * dim..(col + 1) * dim];
            for r in 0..dim {
                let x = s[r];
                if x == ZERO {
                    continue;
                }
                for &i in &active {
                    let sg = sign_below(r, i);
                    if r >> i & 1 == 0 {
                        d[r | 1 << i] += self.cre[i] * x * sg;
                    } else {
                        d[r ^ 1 << i] += self.ann[i] * x * sg;
                    }
                }
            }
        }
        out
    }

    /// Apply the untwisted part to the columns: `out = m · L`.
    fn linear_right(&self, m: &Mat) -> Mat {
        let dim = 1usize << self.modes;
        assert_eq!(m.ncols(), dim, "column dimension");
        let rows = m.nrows();
        let mut out = linalg::zeros(rows, dim);
        let src_all = m.as_slice();
        let dst_all = out.as_mut_slice();
        for c in 0..dim {
            for i in 0..self.modes {
                let sg = sign_below(c, i);
                // L[c', c] nonzero for c' = c | i (creation) or c ^ i (annihilation)
                let (coef, src) = if c >> i & 1 == 0 {
                    (self.cre[i], c | 1 << i)
                } else {
                    (self.ann[i], c ^ 1 << i)
                };
                if coef == ZERO {
                    continue;
                }
                let coef = coef * sg;
                let sc = &src_all[src * rows..(src + 1) * rows];
                let dcol = &mut dst_all[c * rows..(c + 1) * rows];
                for (y, x) in dcol.iter_mut().zip(sc) {
                    *y += coef * x;
                }
            }
        }
        out
    }

    /// `self · m`.
    pub fn left(&self, m: &Mat) -> Mat {
        if self.twisted {
            let mut g = parity_rows(m);
            g = self.linear_left(&g);
            g * I
        } else {
            self.linear_left(m)
        }
    }

    /// `m · self`.
    pub fn right(&self, m: &Mat) -> Mat {
        if self.twisted {
            let g = self.linear_right(m);
            parity_cols(&g) * I
        } else {
            self.linear_right(m)
        }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let m = Mat::from_column_slice(v.len(), 1, v.as_slice());
        self.left(&m).column(0).into_owned()
    }

    /// Dense matrix of the operator (small k only).
    pub fn dense(&self) -> Mat {
        self.left(&linalg::eye(1 << self.modes))
    }

    /// The adjoint, as a field operator (the twisted case is handled by
    /// the caller via `ψ(f)* = ψ(f*)`).
    pub fn adjoint_untwisted(&self) -> FieldOp {
        assert!(!self.twisted);
        FieldOp {
            modes: self.modes,
            cre: self.ann.iter().map(|z| z.conj()).collect(),
            ann: self.cre.iter().map(|z| z.conj()).collect(),
            twisted: false,
        }
    }
}

/// `Γ m` (parity on rows).
pub fn parity_rows(m: &Mat) -> Mat {
    let mut out = m.clone();
    for r in 0..m.nrows() {
        if parity_sign(r) < 0.0 {
            let mut row = out.row_mut(r);
            row.neg_mut();
        }
    }
    out
}

/// `m Γ` (parity on columns).
pub fn parity_cols(m: &Mat) -> Mat {
    let mut out = m.clone();
    for c in 0..m.ncols() {
        if parity_sign(c) < 0.0 {
            let mut col = out.column_mut(c);
            col.neg_mut();
        }
    }
    out
}

/// Fock representation data for `k` modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockRep {
    pub modes: usize,
}

/// Build the representation, refusing mode counts above `cap`.
pub fn build_rep(modes: usize, cap: Option<usize>) -> Result<FockRep> {
    let cap = cap.unwrap_or(DEFAULT_CAR_MODE_CAP);
    if modes > cap {
        return Err(Error::Resource(format!(
            "{modes} fermionic modes exceed the cap of {cap} (Fock dimension 2^{modes})"
        )));
    }
    Ok(FockRep { modes })
}

impl FockRep {
    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn vacuum(&self) -> Vector {
        let mut v = Vector::zeros(self.dim());
        v[0] = ONE;
        v
    }

    pub fn pi(&self, f: &Vector) -> FieldOp {
        assert_eq!(f.len(), 2 * self.modes);
        FieldOp::pi(f)
    }

    pub fn psi(&self, f: &Vector) -> FieldOp {
        assert_eq!(f.len(), 2 * self.modes);
        FieldOp::psi(f)
    }

    pub fn parity(&self) -> Mat {
        Mat::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j {
                linalg::c(parity_sign(i), 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `a*(e_i)` as a dense matrix.
    pub fn creator(&self, i: usize) -> Mat {
        let mut x = Vector::zeros(self.modes);
        x[i] = ONE;
        FieldOp::create(&x).dense()
    }

    pub fn annihilator(&self, i: usize) -> Mat {
        self.creator(i).adjoint()
    }

    /// The tracial state `2^{-k} tr(a)`.
    pub fn central_state(&self, a: &Mat) -> C64 {
        a.trace() / linalg::c(self.dim() as f64, 0.0)
    }

    /// Second quantisation `Γ(u)` of a one-particle unitary (or any matrix)
    /// `u` on K1: the exterior powers of `u` on each particle-number sector.
    pub fn second_quantize(&self, u: &Mat) -> Mat {
        second_quantize_rect(u, self.modes, self.modes)
    }
}

/// Exterior-power map `Λ(x): F(n) -> F(m)` for `x: C^n -> C^m`, computed
/// entry-wise by minors: `<r|Λ(x)|c> = det x[r, c]` when `|r| = |c|`.
pub fn second_quantize_rect(x: &Mat, n: usize, m: usize) -> Mat {
    assert_eq!(x.shape(), (m, n));
    let mut out = linalg::zeros(1 << m, 1 << n);
    let by_count = states_by_popcount(m);
    for c in 0..(1usize << n) {
        let cols: Vec<usize> = (0..n).filter(|&i| c >> i & 1 == 1).collect();
        for &r in &by_count[cols.len()] {
            let rows: Vec<usize> = (0..m).filter(|&i| r >> i & 1 == 1).collect();
            let sub = Mat::from_fn(rows.len(), cols.len(), |i, j| x[(rows[i], cols[j])]);
            out[(r, c)] = linalg::det(&sub);
        }
    }
    out
}

/// Bitmasks of `0..2^m` grouped by population count.
pub fn states_by_popcount(m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); m + 1];
    for r in 0..(1usize << m) {
        out[r.count_ones() as usize].push(r);
    }
    out
}

/// Apply a product `ops[0] · ops[1] ⋯ ops[l-1]` on the left.
pub fn left_product(ops: &[FieldOp], m: &Mat) -> Mat {
    let mut out = m.clone();
    for op in ops.iter().rev() {
        out = op.left(&out);
    }
    out
}

/// Apply a product on the right: `m · ops[0] ⋯ ops[l-1]`.
pub fn right_product(m: &Mat, ops: &[FieldOp]) -> Mat {
    let mut out = m.clone();
    for op in ops {
        out = op.right(&out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn vec_of(xs: &[(f64, f64)]) -> Vector {
        Vector::from_iterator(xs.len(), xs.iter().map(|&(a, b)| c(a, b)))
    }

    #[test]
    fn one_mode_creator_is_single_unit() {
        let rep = build_rep(1, None).unwrap();
        let a = rep.pi(&vec_of(&[(1.0, 0.0), (0.0, 0.0)])).dense();
        let expect = Mat::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]);
        assert_eq!(a, expect);
    }

    #[test]
    fn car_relations_hold_exactly_on_basis() {
        let rep = build_rep(3, None).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let ai = rep.annihilator(i);
                let aj_star = rep.creator(j);
                let anti = &ai * &aj_star + &aj_star * &ai;
                let expect = if i == j { linalg::eye(8) } else { linalg::zeros(8, 8) };
                assert_eq!(anti, expect);
                let aa = &ai * rep.annihilator(j) + rep.annihilator(j) * &ai;
                assert_eq!(aa, linalg::zeros(8, 8));
            }
        }
    }

    #[test]
    fn right_application_matches_dense() {
        let f = vec_of(&[(0.3, 0.1), (-0.2, 0.5), (0.7, 0.0), (0.1, -0.4), (0.0, 0.2), (0.6, 0.6)]);
        let m = Mat::from_fn(5, 8, |i, j| c(i as f64 - j as f64 * 0.5, 0.25 * j as f64));
        for op in [FieldOp::pi(&f), FieldOp::psi(&f)] {
            let dense = op.dense();
            assert!(linalg::frob(&(op.right(&m) - &m * &dense)) < 1e-13);
            let mt = m.transpose();
            assert!(linalg::frob(&(op.left(&mt) - &dense * &mt)) < 1e-13);
        }
    }

    #[test]
    fn cannot_exceed_cap() {
        assert!(matches!(build_rep(15, None), Err(Error::Resource(_))));
        assert!(build_rep(3, Some(2)).is_err());
    }

    #[test]
    fn central_state_of_number_operator_is_half() {
        let rep = build_rep(3, None).unwrap();
        let n0 = rep.creator(0) * rep.annihilator(0);
        assert!((rep.central_state(&n0) - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(rep.central_state(&linalg::eye(8)), ONE);
    }
}
