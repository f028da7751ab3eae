//! Implementers of CAR Bogoliubov maps: the isometries `Ψ_α: F(n) -> F(m)`
//! indexed by subsets `α` of `{0, .., M_V - 1}`, their Cuntz relations and
//! the associated matrix units.

use serde::Serialize;

use crate::car::fock::{left_product, parity_sign, right_product, FieldOp, FockRep};
use crate::car::structure::{self, CanonicalCarData, FockParamCar};
use crate::car::wick::{self, wick_exponential_blocks};
use crate::error::{precondition, structural, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{self, c, Mat, Vector, ONE, ZERO};
use crate::selfdual::{self, BogoliubovMap, Kind};

/// Strictly increasing tuples over `0..mv`, in lexicographic order.
pub fn multi_indices(mv: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u64..(1u64 << mv))
        .map(|s| (0..mv).filter(|&i| s >> i & 1 == 1).collect())
        .collect();
    out.sort();
    out
}

/// `H` solving the intertwining equations for a given admissible `T`:
/// `H = [[V11 - ι + T*V21, -T*], [(V22* - V12*T*)V21, ι* - V22* + V12*T*]]`.
pub fn hamiltonian_from_t(v: &BogoliubovMap, t: &Mat, rank_tol: f64, tol: f64) -> Result<Hamiltonian> {
    if v.kind != Kind::Car {
        return Err(structural("expected a CAR map"));
    }
    let (n, m) = (v.source_modes, v.target_modes);
    let (r1, r2) = structure::t_equation_residual(v, t, rank_tol)?;
    if r1 > tol || r2 > tol {
        return Err(precondition(format!(
            "T does not solve T V11 = V21 p_ran(V11*) and T h_V = 0 (residuals {r1:.3e}, {r2:.3e})"
        )));
    }
    let comps = v.components();
    let iota = embedding_matrix(n, m);
    let th = t.adjoint();
    let h11 = &comps.v11 - &iota + &th * &comps.v21;
    let h12 = -th.clone();
    let h21 = (comps.v22.adjoint() - comps.v12.adjoint() * &th) * &comps.v21;
    let h22 = iota.adjoint() - comps.v22.adjoint() + comps.v12.adjoint() * &th;
    Ok(Hamiltonian { h11, h12, h21, h22 })
}

/// The `m x n` matrix of the embedding `C^n -> C^m`.
pub fn embedding_matrix(n: usize, m: usize) -> Mat {
    Mat::from_fn(m, n, |i, j| if i == j { ONE } else { ZERO })
}

/// Family `{Ψ_α}` with the data it was built from.
#[derive(Clone, Debug)]
pub struct ImplementerFamily {
    pub map: BogoliubovMap,
    pub indices: Vec<Vec<usize>>,
    pub psis: Vec<Mat>,
    /// `D_V = det(1 + T_V* T_V)^{-1/4}`
    pub d_norm: f64,
    pub hamiltonian: Hamiltonian,
    /// `η_H`
    pub eta: Mat,
    /// basis `g_j` of `k_V`, columns in `K(m)`
    pub g: Mat,
    /// basis `e_r` of `h_V`, columns in `K1(m)`
    pub e: Mat,
    /// `e'_r = V12* e_r`, columns in `K2(n)` coordinates
    pub e_prime: Mat,
    /// parity shift of each `Ψ_α`: `Γ Ψ_α = (-1)^{shift} Ψ_α Γ`
    pub parity_shift: Vec<u8>,
}

impl ImplementerFamily {
    pub fn len(&self) -> usize {
        self.psis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psis.is_empty()
    }

    pub fn source_modes(&self) -> usize {
        self.map.source_modes
    }

    pub fn target_modes(&self) -> usize {
        self.map.target_modes
    }

    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        self.indices.iter().position(|a| a == alpha)
    }

    /// `Ψ_α Ω` for every member.
    pub fn vacuum_images(&self) -> Vec<Vector> {
        self.psis.iter().map(|p| p.column(0).into_owned()).collect()
    }

    /// `g_j` as a vector of `K(m)`.
    pub fn g_vector(&self, j: usize) -> Vector {
        self.g.column(j).into_owned()
    }
}

fn sign_of_shuffle(s: u64, l: usize) -> f64 {
    // inversions of the permutation listing S first, then its complement
    let mut inv = 0;
    for a in 0..l {
        if s >> a & 1 == 1 {
            inv += (0..a).filter(|&b| s >> b & 1 == 0).count();
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Build the implementer family of `v`.
///
/// `Ψ_α = D_V ψ(g_α) Σ_S (-1)^{L-|S|} sgn(S, S^c) ψ(e_S) η_H ψ(e'_{S^c})`,
/// summed over subsets `S` of the `L = dim h_V` basis vectors of `h_V`.
pub fn implementers(v: &BogoliubovMap, data: &CanonicalCarData, rep: &FockRep) -> Result<ImplementerFamily> {
    let (n, m) = (v.source_modes, v.target_modes);
    if rep.modes != m {
        return Err(structural("Fock representation does not match the target"));
    }
    if data.m_v != m - n || data.k_v.ncols() != data.m_v || data.k_v.nrows() != 2 * m {
        return Err(structural("canonical data do not match the map's index"));
    }
    let rank_tol = 1e-10;
    let t = data.t_v();
    let hamiltonian = hamiltonian_from_t(v, t, rank_tol, 1e-8)?;
    let eta = wick_exponential_blocks(&hamiltonian, 1e-8)?;
    let d_norm = linalg::det(&(linalg::eye(m) + t.ad_mul(t))).re.powf(-0.25);

    let comps = v.components();
    let e = data.h_v().clone();
    let l = e.ncols();
    let e_prime = comps.v12.adjoint() * &e;
    let e_ops: Vec<FieldOp> = (0..l)
        .map(|r| FieldOp::psi(&selfdual::k1_vector(&e.column(r).into_owned())))
        .collect();
    let ep_ops: Vec<FieldOp> = (0..l)
        .map(|r| FieldOp::psi(&selfdual::k2_vector(&e_prime.column(r).into_owned())))
        .collect();

    let mut base = linalg::zeros(1 << m, 1 << n);
    for s in 0u64..(1u64 << l) {
        let inside: Vec<FieldOp> = (0..l).filter(|&r| s >> r & 1 == 1).map(|r| e_ops[r].clone()).collect();
        let outside: Vec<FieldOp> = (0..l).filter(|&r| s >> r & 1 == 0).map(|r| ep_ops[r].clone()).collect();
        let sign = if (l - inside.len()) % 2 == 0 { 1.0 } else { -1.0 } * sign_of_shuffle(s, l);
        let term = left_product(&inside, &right_product(&eta, &outside));
        base += term * c(sign, 0.0);
    }
    base *= c(d_norm, 0.0);

    let g = data.k_v.clone();
    let g_ops: Vec<FieldOp> = (0..g.ncols()).map(|j| FieldOp::psi(&g.column(j).into_owned())).collect();
    let indices = multi_indices(data.m_v);
    let mut psis = Vec::with_capacity(indices.len());
    let mut parity_shift = Vec::with_capacity(indices.len());
    for alpha in &indices {
        let ops: Vec<FieldOp> = alpha.iter().map(|&j| g_ops[j].clone()).collect();
        let psi = left_product(&ops, &base);
        parity_shift.push(((alpha.len() + l) % 2) as u8);
        psis.push(psi);
    }
    Ok(ImplementerFamily {
        map: v.clone(),
        indices,
        psis,
        d_norm,
        hamiltonian,
        eta,
        g,
        e,
        e_prime,
        parity_shift,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CuntzReport {
    pub members: usize,
    /// `max_{α,β} |Ψ_α*Ψ_β - δ_{αβ}|`
    pub gram_residual: f64,
    /// `|Σ Ψ_α Ψ_α* - 1|`
    pub completeness_residual: f64,
    /// `max |Ψ_α π(f) - π(V f) Ψ_α|` over the sampled `f`
    pub intertwining_residual: f64,
    /// largest entry of any `Ψ_α` outside its parity block (exactly zero)
    pub parity_leak: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Split rows/columns by parity: `(rows, cols)` index lists of the block of
/// `Ψ` that maps columns of parity `col_parity`.
fn parity_lists(dim: usize, parity: u8) -> Vec<usize> {
    (0..dim).filter(|&r| (r.count_ones() & 1) as u8 == parity).collect()
}

fn gather(a: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Verify `Ψ_α*Ψ_β = δ_{αβ}`, `Σ Ψ_α Ψ_α* = 1` and intertwining.
///
/// Every `Ψ_α` has a definite parity shift, so the stacked matrix
/// `[Ψ_α]` splits into two square blocks by parity; products are formed
/// blockwise.
pub fn verify_cuntz(family: &ImplementerFamily, samples: &[Vector], tol: f64) -> CuntzReport {
    let (n, m) = (family.source_modes(), family.target_modes());
    let (dn, dm) = (1usize << n, 1usize << m);
    let d = family.len();
    let mut parity_leak: f64 = 0.0;
    for (psi, &shift) in family.psis.iter().zip(&family.parity_shift) {
        for cidx in 0..dn {
            let want = ((cidx.count_ones() as u8) + shift) % 2;
            for r in 0..dm {
                if (r.count_ones() & 1) as u8 != want {
                    parity_leak = parity_leak.max(psi[(r, cidx)].norm());
                }
            }
        }
    }

    let mut gram_sq = vec![0.0f64; d * d];
    let mut completeness_sq = 0.0;
    for row_parity in 0..2u8 {
        let rows = parity_lists(dm, row_parity);
        // stacked block: for each α the columns c mapped into these rows
        let mut owners = Vec::new();
        let mut blocks = Vec::new();
        for (a, (psi, &shift)) in family.psis.iter().zip(&family.parity_shift).enumerate() {
            let col_parity = (row_parity + shift) % 2;
            let cols = parity_lists(dn, col_parity);
            if cols.is_empty() {
                continue;
            }
            blocks.push(gather(psi, &rows, &cols));
            owners.push((a, cols.len()));
        }
        let width: usize = owners.iter().map(|x| x.1).sum();
        let mut s = linalg::zeros(rows.len(), width);
        let mut off = 0;
        for b in &blocks {
            s.view_mut((0, off), (b.nrows(), b.ncols())).copy_from(b);
            off += b.ncols();
        }
        let g = linalg::adj_mul(&s, &s);
        let mut oa = 0;
        for &(a, wa) in &owners {
            let mut ob = 0;
            for &(b, wb) in &owners {
                let mut acc = 0.0;
                for j in 0..wb {
                    for i in 0..wa {
                        let mut z = g[(oa + i, ob + j)];
                        if a == b && i == j {
                            z -= ONE;
                        }
                        acc += z.norm_sqr();
                    }
                }
                gram_sq[a * d + b] += acc;
                ob += wb;
            }
            oa += wa;
        }
        let p = linalg::mul_adj(&s, &s);
        completeness_sq += linalg::dist_identity(&p).powi(2);
    }
    let gram_residual = gram_sq.iter().fold(0.0f64, |x, &y| x.max(y.sqrt()));
    let completeness_residual = completeness_sq.sqrt();

    let mut intertwining_residual: f64 = 0.0;
    for f in samples {
        let vf = family.map.apply(f);
        let left = FieldOp::pi(&vf);
        let right = FieldOp::pi(f);
        for psi in &family.psis {
            let r = linalg::frob(&(right.right(psi) - left.left(psi)));
            intertwining_residual = intertwining_residual.max(r);
        }
    }
    let pass = gram_residual <= tol
        && completeness_residual <= tol
        && intertwining_residual <= tol
        && parity_leak == 0.0;
    CuntzReport {
        members: d,
        gram_residual,
        completeness_residual,
        intertwining_residual,
        parity_leak,
        tol,
        pass,
    }
}

/// Deterministic sample vectors of `K(k)` for intertwining checks.
pub fn default_samples(k: usize, count: usize) -> Vec<Vector> {
    let mut x: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    (0..count)
        .map(|_| Vector::from_fn(2 * k, |_, _| c(next(), next())))
        .collect()
}

/// Operators `ψ(g_{j1}) ⋯ ψ(g_{jl})` followed by the adjoint-style factors
/// of `Γ_{αβ} = g_α (g_γ)* g_γ g_β*`, `γ = α^c ∩ β^c`, as a list of field
/// operators on `F(m)`, applied left to right as a product.
pub fn gamma_ops(g: &Mat, alpha: &[usize], beta: &[usize]) -> Vec<FieldOp> {
    let mv = g.ncols();
    let gamma: Vec<usize> = (0..mv).filter(|j| !alpha.contains(j) && !beta.contains(j)).collect();
    let col = |j: usize| g.column(j).into_owned();
    let mut ops = Vec::new();
    for &j in alpha {
        ops.push(FieldOp::psi(&col(j)));
    }
    // (g_γ1 ⋯ g_γk)* = g_γk* ⋯ g_γ1*
    for &j in gamma.iter().rev() {
        ops.push(FieldOp::psi(&selfdual::conj_vector(&col(j))));
    }
    for &j in &gamma {
        ops.push(FieldOp::psi(&col(j)));
    }
    for &j in beta.iter().rev() {
        ops.push(FieldOp::psi(&selfdual::conj_vector(&col(j))));
    }
    ops
}

/// `ψ(Γ_{αβ})` as a dense matrix on `F(m)`.
pub fn gamma_matrix(g: &Mat, alpha: &[usize], beta: &[usize], m: usize) -> Mat {
    left_product(&gamma_ops(g, alpha, beta), &linalg::eye(1 << m))
}

#[derive(Clone, Debug)]
pub struct MatrixUnit {
    pub product: Mat,
    pub formula: Mat,
    pub residual: f64,
}

/// `Ψ_α Ψ_β*` compared with `ψ(Γ_{αβ})`.
pub fn matrix_units(family: &ImplementerFamily, alpha: &[usize], beta: &[usize]) -> Result<MatrixUnit> {
    let ia = family
        .position(alpha)
        .ok_or_else(|| precondition("unknown multi-index α"))?;
    let ib = family
        .position(beta)
        .ok_or_else(|| precondition("unknown multi-index β"))?;
    let product = linalg::mul_adj(&family.psis[ia], &family.psis[ib]);
    let formula = gamma_matrix(&family.g, alpha, beta, family.target_modes());
    let residual = linalg::frob(&(&product - &formula));
    Ok(MatrixUnit {
        product,
        formula,
        residual,
    })
}

/// Normalised Fock vector `a*(e_1)⋯a*(e_L) exp(½ conj(T) a*a*) Ω` of the
/// state with parameters `(T, h)`.
pub fn param_to_vector(p: &FockParamCar, rep: &FockRep, tol: f64) -> Result<Vector> {
    p.check(tol)?;
    if p.modes() != rep.modes {
        return Err(structural("parameter does not match the Fock space"));
    }
    let mut v = wick::pair_state(&linalg::conj(&p.t));
    let mut vm = Mat::from_column_slice(v.len(), 1, v.as_slice());
    for r in (0..p.h.ncols()).rev() {
        vm = FieldOp::create(&p.h.column(r).into_owned()).left(&vm);
    }
    v = vm.column(0).into_owned();
    let nv = linalg::vnorm(&v);
    Ok(v / c(nv, 0.0))
}

/// Two-point matrix `<π(e_i) v, π(e_j) v>` of a Fock vector over the basis of
/// `K(k)`; equals the basis projection of the state.
pub fn two_point_matrix(v: &Vector, rep: &FockRep) -> Mat {
    let k = rep.modes;
    let images: Vec<Vector> = (0..2 * k)
        .map(|i| {
            let mut e = Vector::zeros(2 * k);
            e[i] = ONE;
            FieldOp::pi(&e).apply(v)
        })
        .collect();
    Mat::from_fn(2 * k, 2 * k, |i, j| images[i].dotc(&images[j]))
}

/// Cyclic subspace of `v` under the operators `π(V e_i)`: orthonormal basis
/// as columns.
fn cyclic_subspace(v: &BogoliubovMap, start: &Vector, tol: f64) -> Mat {
    let n = v.source_modes;
    let gens: Vec<FieldOp> = (0..2 * n)
        .map(|i| {
            let mut e = Vector::zeros(2 * n);
            e[i] = ONE;
            FieldOp::pi(&v.apply(&e))
        })
        .collect();
    let mut basis: Vec<Vector> = Vec::new();
    let mut queue = vec![start.clone()];
    while let Some(mut x) = queue.pop() {
        for _ in 0..2 {
            for b in &basis {
                let ov = b.dotc(&x);
                x -= b * ov;
            }
        }
        let nx = linalg::vnorm(&x);
        if nx <= tol {
            continue;
        }
        let x = x / c(nx, 0.0);
        for g in &gens {
            queue.push(g.apply(&x));
        }
        basis.push(x);
    }
    let mut out = linalg::zeros(start.len(), basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

#[derive(Clone, Debug)]
pub struct DecompositionPiece {
    pub index: Vec<usize>,
    pub vector: Vector,
    pub projector: Mat,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub pieces: usize,
    pub max_overlap: f64,
    pub completeness_residual: f64,
    /// spread of `<φ_α, π(V f)* π(V g) φ_α>` over `α`, maximised over basis `f, g`
    pub expectation_spread: f64,
}

/// The vectors `φ_α = ψ(f_α) Ω` over a basis `f` of `K1 ∩ ker V*` and the
/// cyclic subspaces they generate under `π(V ·)`.
pub fn decomposition_subspaces(
    v: &BogoliubovMap,
    rep: &FockRep,
    rank_tol: f64,
) -> Result<(Vec<DecompositionPiece>, DecompositionReport)> {
    let m = v.target_modes;
    if rep.modes != m {
        return Err(structural("Fock representation does not match the target"));
    }
    let top = v.matrix.rows(0, m).into_owned();
    let f = linalg::kernel_basis(&top.adjoint(), rank_tol);
    let nv = f.ncols();
    let mut pieces = Vec::new();
    for alpha in multi_indices(nv) {
        let ops: Vec<FieldOp> = alpha
            .iter()
            .map(|&j| FieldOp::psi(&selfdual::k1_vector(&f.column(j).into_owned())))
            .collect();
        let omega = Mat::from_column_slice(rep.dim(), 1, rep.vacuum().as_slice());
        let phi = left_product(&ops, &omega).column(0).into_owned();
        let basis = cyclic_subspace(v, &phi, 1e-9);
        let projector = linalg::mul_adj(&basis, &basis);
        pieces.push(DecompositionPiece {
            index: alpha,
            vector: phi,
            projector,
        });
    }
    let mut max_overlap: f64 = 0.0;
    let mut sum = linalg::zeros(rep.dim(), rep.dim());
    for (i, a) in pieces.iter().enumerate() {
        sum += &a.projector;
        for b in pieces.iter().skip(i + 1) {
            max_overlap = max_overlap.max(linalg::frob(&(&a.projector * &b.projector)));
        }
    }
    let n = v.source_modes;
    let mut expectation_spread: f64 = 0.0;
    let vb = |i: usize| {
        let mut e = Vector::zeros(2 * n);
        e[i] = ONE;
        FieldOp::pi(&v.apply(&e))
    };
    let two_point = |phi: &Vector| {
        let imgs: Vec<Vector> = (0..2 * n).map(|i| vb(i).apply(phi)).collect();
        Mat::from_fn(2 * n, 2 * n, |i, j| imgs[i].dotc(&imgs[j]))
    };
    if let Some(first) = pieces.first() {
        let reference = two_point(&first.vector);
        for p in pieces.iter().skip(1) {
            expectation_spread = expectation_spread.max(linalg::max_abs(&(two_point(&p.vector) - &reference)));
        }
    }
    let report = DecompositionReport {
        pieces: pieces.len(),
        max_overlap,
        completeness_residual: linalg::dist_identity(&sum),
        expectation_spread,
    };
    Ok((pieces, report))
}

/// Parity of a Fock basis state as a real sign (re-exported for reports).
pub fn basis_parity(r: usize) -> f64 {
    parity_sign(r)
}
