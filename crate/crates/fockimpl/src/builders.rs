//! Constructors for Bogoliubov maps and Fock-state parameters: structured
//! families (embeddings, shifts, squeezes) and random ones driven by a
//! caller-supplied sample source, so the library needs no RNG of its own.

use crate::error::{structural, Result};
use crate::linalg::{self, c, Mat, Vector, C64, I, ONE, ZERO};
use crate::selfdual::{self, BogoliubovMap, Kind};

/// Source of real samples, e.g. uniform on `[-1, 1)`.
pub trait Sampler {
    fn sample(&mut self) -> f64;
}

impl<F: FnMut() -> f64> Sampler for F {
    fn sample(&mut self) -> f64 {
        self()
    }
}

pub fn random_complex(r: usize, cols: usize, s: &mut impl Sampler) -> Mat {
    Mat::from_fn(r, cols, |_, _| c(s.sample(), s.sample()))
}

pub fn random_vector(n: usize, s: &mut impl Sampler) -> Vector {
    Vector::from_fn(n, |_, _| c(s.sample(), s.sample()))
}

pub fn random_hermitian(n: usize, s: &mut impl Sampler) -> Mat {
    let a = random_complex(n, n, s);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// Random `t` with `t^T = -t`.
pub fn random_antisymmetric(n: usize, s: &mut impl Sampler) -> Mat {
    let a = random_complex(n, n, s);
    (&a - a.transpose()) * c(0.5, 0.0)
}

/// Random `z` with `z^T = z`.
pub fn random_symmetric(n: usize, s: &mut impl Sampler) -> Mat {
    let a = random_complex(n, n, s);
    (&a + a.transpose()) * c(0.5, 0.0)
}

/// Random symmetric `z` rescaled to operator norm `norm`.
pub fn random_symmetric_contraction(n: usize, norm: f64, s: &mut impl Sampler) -> Mat {
    let z = random_symmetric(n, s);
    let nz = linalg::op_norm(&z);
    if nz == 0.0 {
        return z;
    }
    z * c(norm / nz, 0.0)
}

/// Haar-like random unitary from the QR factor of a complex Gaussian-ish matrix.
pub fn random_unitary(n: usize, s: &mut impl Sampler) -> Mat {
    let h = random_hermitian(n, s);
    unitary_exp(&h)
}

/// `exp(i h)` for Hermitian `h`.
pub fn unitary_exp(h: &Mat) -> Mat {
    let e = linalg::herm_eig(h);
    let n = h.nrows();
    let mut scaled = e.vectors.clone();
    for j in 0..n {
        let ph = C64::from_polar(1.0, e.values[j]);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    linalg::mul_adj(&scaled, &e.vectors)
}

/// Random unitary CAR Bogoliubov operator on `K(k)`: `exp(i X)` with
/// `X = [[a, b], [-conj(b), -conj(a)]]`, `a` Hermitian, `b` antisymmetric.
pub fn random_car_unitary(k: usize, scale: f64, s: &mut impl Sampler) -> BogoliubovMap {
    let a = random_hermitian(k, s) * c(scale, 0.0);
    let b = random_antisymmetric(k, s) * c(scale, 0.0);
    let x = linalg::from_blocks(&a, &b, &(-linalg::conj(&b)), &(-linalg::conj(&a)));
    let mut u = unitary_exp(&x);
    // exp(iX) is equivariant in exact arithmetic; symmetrise the rounding
    u = (&u + selfdual::conj_op(&u)) * c(0.5, 0.0);
    BogoliubovMap {
        kind: Kind::Car,
        source_modes: k,
        target_modes: k,
        matrix: u,
    }
}

/// Random unitary gauge-type CAR operator `diag(u, conj(u))`.
pub fn random_car_diagonal(k: usize, s: &mut impl Sampler) -> BogoliubovMap {
    let u = random_unitary(k, s);
    BogoliubovMap::from_blocks(Kind::Car, &u, &linalg::zeros(k, k)).expect("square blocks")
}

/// Random CAR isometry `K(n) -> K(m)`: unitary ∘ embedding ∘ unitary.
pub fn random_car_map(n: usize, m: usize, scale: f64, s: &mut impl Sampler) -> BogoliubovMap {
    let left = random_car_unitary(m, scale, s);
    let right = random_car_unitary(n, scale, s);
    let e = selfdual::embedding(Kind::Car, n, m);
    left.compose(&e).and_then(|x| x.compose(&right)).expect("composable")
}

/// Particle-hole flip of the listed K1 modes: `e_i <-> e_i*`.
pub fn car_flip(k: usize, modes: &[usize]) -> BogoliubovMap {
    let mut a = linalg::eye(2 * k);
    for &i in modes {
        a[(i, i)] = ZERO;
        a[(k + i, k + i)] = ZERO;
        a[(i, k + i)] = ONE;
        a[(k + i, i)] = ONE;
    }
    BogoliubovMap {
        kind: Kind::Car,
        source_modes: k,
        target_modes: k,
        matrix: a,
    }
}

/// CAR isometry `K(n) -> K(m)` with a prescribed number of filled
/// "Dirac-sea" directions: embedding followed by flips of the first
/// `flips` target modes, sandwiched by random unitaries on either side that
/// preserve K1 (so `dim h_V = flips` is retained generically).
pub fn random_car_map_with_flips(
    n: usize,
    m: usize,
    flips: usize,
    s: &mut impl Sampler,
) -> BogoliubovMap {
    assert!(flips <= n);
    let e = selfdual::embedding(Kind::Car, n, m);
    let f = car_flip(m, &(0..flips).collect::<Vec<_>>());
    let left = random_car_diagonal(m, s);
    let right = random_car_diagonal(n, s);
    let rot = random_car_unitary(m, 0.3, s);
    rot.compose(&left)
        .and_then(|x| x.compose(&f))
        .and_then(|x| x.compose(&e))
        .and_then(|x| x.compose(&right))
        .expect("composable")
}

/// Random unitary κ-preserving operator: `exp(Y)` with
/// `Y = [[a, b], [conj(b), conj(a)]]`, `a` anti-Hermitian, `b` symmetric.
pub fn random_ccr_unitary(k: usize, rot: f64, squeeze: f64, s: &mut impl Sampler) -> BogoliubovMap {
    let a = random_hermitian(k, s) * c(0.0, rot);
    let b = random_symmetric(k, s) * c(squeeze, 0.0);
    let y = linalg::from_blocks(&a, &b, &linalg::conj(&b), &linalg::conj(&a));
    let mut u = y.exp();
    u = (&u + selfdual::conj_op(&u)) * c(0.5, 0.0);
    BogoliubovMap {
        kind: Kind::Ccr,
        source_modes: k,
        target_modes: k,
        matrix: u,
    }
}

/// Random κ-isometry `K(n) -> K(m)`.
pub fn random_ccr_map(n: usize, m: usize, rot: f64, squeeze: f64, s: &mut impl Sampler) -> BogoliubovMap {
    let left = random_ccr_unitary(m, rot, squeeze, s);
    let right = random_ccr_unitary(n, rot, squeeze, s);
    let e = selfdual::embedding(Kind::Ccr, n, m);
    left.compose(&e).and_then(|x| x.compose(&right)).expect("composable")
}

/// Random unitary CAR operator commuting with the U(1) action of the mode
/// `charges`: the generator keeps `a_ij` only for `q_i = q_j` and the
/// pairing `b_ij` only for `q_i = -q_j`.
pub fn random_gauge_invariant_car_unitary(charges: &[i32], scale: f64, s: &mut impl Sampler) -> BogoliubovMap {
    let k = charges.len();
    let (a, b) = masked_generators(charges, s, random_antisymmetric);
    let (a, b) = (a * c(scale, 0.0), b * c(scale, 0.0));
    let x = linalg::from_blocks(&a, &b, &(-linalg::conj(&b)), &(-linalg::conj(&a)));
    let mut u = unitary_exp(&x);
    u = (&u + selfdual::conj_op(&u)) * c(0.5, 0.0);
    BogoliubovMap {
        kind: Kind::Car,
        source_modes: k,
        target_modes: k,
        matrix: u,
    }
}

/// Random κ-unitary CCR operator commuting with the U(1) action of the
/// mode `charges` (same selection rules as the CAR variant).
pub fn random_gauge_invariant_ccr_unitary(
    charges: &[i32],
    rot: f64,
    squeeze: f64,
    s: &mut impl Sampler,
) -> BogoliubovMap {
    let k = charges.len();
    let (a, b) = masked_generators(charges, s, random_symmetric);
    let a = a * c(0.0, rot);
    let b = b * c(squeeze, 0.0);
    let y = linalg::from_blocks(&a, &b, &linalg::conj(&b), &linalg::conj(&a));
    let mut u = y.exp();
    u = (&u + selfdual::conj_op(&u)) * c(0.5, 0.0);
    BogoliubovMap {
        kind: Kind::Ccr,
        source_modes: k,
        target_modes: k,
        matrix: u,
    }
}

fn masked_generators<S: Sampler>(
    charges: &[i32],
    s: &mut S,
    pairing: impl Fn(usize, &mut S) -> Mat,
) -> (Mat, Mat) {
    let k = charges.len();
    let mut a = random_hermitian(k, s);
    let mut b = pairing(k, s);
    for i in 0..k {
        for j in 0..k {
            if charges[i] != charges[j] {
                a[(i, j)] = ZERO;
            }
            if charges[i] != -charges[j] {
                b[(i, j)] = ZERO;
            }
        }
    }
    (a, b)
}

/// Two-mode squeeze on modes `(p, q)` of `K(k)`:
/// `e_p -> cosh r e_p + sinh r e_q*`, `e_q -> cosh r e_q + sinh r e_p*`.
pub fn two_mode_squeeze(k: usize, p: usize, q: usize, r: f64) -> BogoliubovMap {
    let (ch, sh) = (c(r.cosh(), 0.0), c(r.sinh(), 0.0));
    let mut v11 = linalg::eye(k);
    let mut v12 = linalg::zeros(k, k);
    v11[(p, p)] = ch;
    v11[(q, q)] = ch;
    // V e_p has K2 component sinh r at mode q; V21 = conj(V12)
    v12[(p, q)] = sh;
    v12[(q, p)] = sh;
    BogoliubovMap::from_blocks(Kind::Ccr, &v11, &v12).expect("square blocks")
}

/// One-mode squeeze on mode `p`: `e_p -> cosh r e_p + sinh r e_p*`.
pub fn one_mode_squeeze(k: usize, p: usize, r: f64) -> BogoliubovMap {
    let mut v11 = linalg::eye(k);
    let mut v12 = linalg::zeros(k, k);
    v11[(p, p)] = c(r.cosh(), 0.0);
    v12[(p, p)] = c(r.sinh(), 0.0);
    BogoliubovMap::from_blocks(Kind::Ccr, &v11, &v12).expect("square blocks")
}

/// Shift on a Dirac-sea chain: the chain sites `j` in `window` carry the
/// vectors `e_{A(j)}` (K1, for `j >= 0`) or `e_{B(j)}*` (K2, for `j < 0`).
/// The returned map sends chain site `j` of the source window to site
/// `j + k` of the target window; both windows are half-open ranges.
#[derive(Clone, Debug)]
pub struct ChainWindow {
    pub lo: i64,
    pub hi: i64,
}

impl ChainWindow {
    /// Number of K1 modes: one per chain site.
    pub fn modes(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    /// Mode index of site `j`. Particle sites `j >= 0` come first in
    /// increasing `j`, then hole sites `j < 0` in decreasing `j`.
    pub fn mode_of(&self, j: i64) -> usize {
        let positives = self.hi.max(0) - self.lo.max(0);
        if j >= 0 {
            (j - self.lo.max(0)) as usize
        } else {
            (positives + (self.hi.min(0) - 1 - j)) as usize
        }
    }

    /// Whether site `j` is a particle (charge +1) site.
    pub fn is_particle(j: i64) -> bool {
        j >= 0
    }

    /// Coordinates of the chain vector at site `j` in `K(modes)`.
    pub fn site_vector_index(&self, j: i64) -> usize {
        let k = self.modes();
        let mode = self.mode_of(j);
        if j >= 0 {
            mode
        } else {
            k + mode
        }
    }

    /// U(1) charges of the K1 modes.
    pub fn charges(&self) -> Vec<i32> {
        let mut q = vec![0; self.modes()];
        for j in self.lo..self.hi {
            q[self.mode_of(j)] = if j >= 0 { 1 } else { -1 };
        }
        q
    }
}

/// The chain shift `site j -> site j + k`, a CAR map from the source window
/// to the target window. Requires `src + k ⊆ tgt`.
pub fn chain_shift(src: &ChainWindow, tgt: &ChainWindow, k: i64) -> Result<BogoliubovMap> {
    if src.lo + k < tgt.lo || src.hi + k > tgt.hi {
        return Err(structural("shifted source window must lie in the target window"));
    }
    let (n, m) = (src.modes(), tgt.modes());
    let mut a = linalg::zeros(2 * m, 2 * n);
    for j in src.lo..src.hi {
        let col = src.site_vector_index(j);
        let row = tgt.site_vector_index(j + k);
        a[(row, col)] = ONE;
        // conjugate partners
        let ccol = if col < n { col + n } else { col - n };
        let crow = if row < m { row + m } else { row - m };
        a[(crow, ccol)] = ONE;
    }
    BogoliubovMap::new(Kind::Car, n, m, a)
}

/// `diag(exp(i λ q_i))` for mode charges `q`.
pub fn u1_phase(charges: &[i32], lambda: f64) -> Mat {
    let k = charges.len();
    Mat::from_fn(k, k, |i, j| {
        if i == j {
            C64::from_polar(1.0, lambda * charges[i] as f64)
        } else {
            ZERO
        }
    })
}

/// The secondary basis projection of a chain window: particle sites in K1,
/// hole sites in K2.
pub fn chain_projection(w: &ChainWindow) -> Mat {
    let k = w.modes();
    let mut p = linalg::zeros(2 * k, 2 * k);
    for j in w.lo..w.hi {
        let i = w.site_vector_index(j);
        p[(i, i)] = ONE;
    }
    p
}

/// `i` as a complex constant, re-exported for builders in other modules.
pub const IMAG: C64 = I;
