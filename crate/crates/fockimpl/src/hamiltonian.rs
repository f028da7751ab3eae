//! Block operators `H` entering Wick-ordered exponentials.
//!
//! For a map `K(n) -> K(m)` the blocks have shapes `h11: m x n` (one-body
//! part), `h12: m x m` (pair creation in the target), `h21: n x n` (pair
//! annihilation in the source) and `h22: n x m`. When `n = m` they are the
//! four blocks of a square `2m x 2m` matrix.

use crate::error::{structural, Result};
use crate::linalg::{self, Mat};

#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub h11: Mat,
    pub h12: Mat,
    pub h21: Mat,
    pub h22: Mat,
}

impl Hamiltonian {
    pub fn zero(n: usize, m: usize) -> Self {
        Hamiltonian {
            h11: linalg::zeros(m, n),
            h12: linalg::zeros(m, m),
            h21: linalg::zeros(n, n),
            h22: linalg::zeros(n, m),
        }
    }

    pub fn source_modes(&self) -> usize {
        self.h21.nrows()
    }

    pub fn target_modes(&self) -> usize {
        self.h12.nrows()
    }

    /// Split a square `2k x 2k` matrix into blocks.
    pub fn from_square(h: &Mat) -> Result<Self> {
        if !h.is_square() || h.nrows() % 2 != 0 {
            return Err(structural("H must be square of even size"));
        }
        let k = h.nrows() / 2;
        Ok(Hamiltonian {
            h11: linalg::block(h, 0, 0, k, k),
            h12: linalg::block(h, 0, k, k, k),
            h21: linalg::block(h, k, 0, k, k),
            h22: linalg::block(h, k, k, k, k),
        })
    }

    pub fn to_square(&self) -> Option<Mat> {
        if self.source_modes() != self.target_modes() {
            return None;
        }
        Some(linalg::from_blocks(&self.h11, &self.h12, &self.h21, &self.h22))
    }

    fn check_shapes(&self) -> Result<()> {
        let (n, m) = (self.source_modes(), self.target_modes());
        if self.h11.shape() != (m, n) || self.h12.shape() != (m, m) || self.h22.shape() != (n, m) {
            return Err(structural("inconsistent Hamiltonian block shapes"));
        }
        Ok(())
    }

    /// `|h12^T + h12|, |h21^T + h21|` and, for square H, `|h22 + h11^T|`.
    pub fn antisymmetry_residual(&self) -> Result<f64> {
        self.check_shapes()?;
        let mut r = linalg::frob(&(self.h12.transpose() + &self.h12))
            .hypot(linalg::frob(&(self.h21.transpose() + &self.h21)));
        if self.source_modes() == self.target_modes() {
            r = r.hypot(linalg::frob(&(&self.h22 + self.h11.transpose())));
        }
        Ok(r)
    }

    /// `|h12^T - h12|, |h21^T - h21|` and, for square H, `|h22 - h11^T|`.
    pub fn symmetry_residual(&self) -> Result<f64> {
        self.check_shapes()?;
        let mut r = linalg::frob(&(self.h12.transpose() - &self.h12))
            .hypot(linalg::frob(&(self.h21.transpose() - &self.h21)));
        if self.source_modes() == self.target_modes() {
            r = r.hypot(linalg::frob(&(&self.h22 - self.h11.transpose())));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn square_roundtrip_and_shapes() {
        let h = Mat::from_fn(4, 4, |i, j| c(i as f64, j as f64));
        let b = Hamiltonian::from_square(&h).unwrap();
        assert_eq!((b.source_modes(), b.target_modes()), (2, 2));
        assert_eq!(b.to_square().unwrap(), h);
        assert!(Hamiltonian::from_square(&linalg::zeros(3, 3)).is_err());
        let z = Hamiltonian::zero(1, 3);
        assert!(z.to_square().is_none());
        assert_eq!(z.antisymmetry_residual().unwrap(), 0.0);
        let mut bad = Hamiltonian::zero(1, 3);
        bad.h11 = linalg::zeros(2, 2);
        assert!(bad.symmetry_residual().is_err());
    }

    #[test]
    fn symmetry_residuals() {
        // H = [[a, b], [-conj b, -a^T]] with b antisymmetric is CAR-type
        let a = Mat::from_fn(2, 2, |i, j| c(i as f64 + 0.5, j as f64));
        let b = Mat::from_fn(2, 2, |i, j| c((j as f64 - i as f64) * 0.3, 0.0));
        let h = Hamiltonian {
            h11: a.clone(),
            h12: b.clone(),
            h21: -linalg::conj(&b),
            h22: -a.transpose(),
        };
        assert!(h.antisymmetry_residual().unwrap() < 1e-15);
        assert!(h.symmetry_residual().unwrap() > 0.1);
    }
}
