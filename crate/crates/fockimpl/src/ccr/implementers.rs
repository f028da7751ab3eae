//! Implementers of CCR Bogoliubov maps on truncated symmetric Fock spaces.
//!
//! `Ψ_0 = det(1 + Z_V†Z_V)^{1/4} η_{H_V}` and `Ψ_α = ψ_{α1} ⋯ ψ_{αl} Ψ_0`
//! over weakly increasing multi-indices, where `ψ_j` is the isometric part
//! of the truncated field operator `π(g_j)` of a κ-orthonormal basis
//! vector of `k_V`. All identities are certified on low-particle source
//! vectors ("probe" sector), since truncation corrupts the top layers.

use serde::Serialize;

use crate::ccr::fock::{build_rep_ccr, dense, pair_state_ccr, spmm, weyl, wick_exponential_ccr, CcrRep};
use crate::ccr::structure::CanonicalCcrData;
use crate::error::{precondition, structural, Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{self, c, Mat, Vector, ONE, ZERO};
use crate::selfdual::{self, BogoliubovMap, Kind};

/// Weakly increasing tuples over `0..mv` of length at most `max_len`,
/// ordered by length, then lexicographically.
pub fn weak_multi_indices(mv: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for a in &layer {
            let start = a.last().copied().unwrap_or(0);
            for j in start..mv {
                let mut b = a.clone();
                b.push(j);
                next.push(b);
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `c_α = (l_1! ⋯ l_r!)^{-½}` for the multiplicities `l_i` of `α`.
pub fn c_alpha(alpha: &[usize]) -> f64 {
    let mut prod = 1.0;
    let mut i = 0;
    while i < alpha.len() {
        let mut j = i;
        while j < alpha.len() && alpha[j] == alpha[i] {
            j += 1;
        }
        for l in 1..=(j - i) {
            prod *= l as f64;
        }
        i = j;
    }
    1.0 / prod.sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct CcrHamiltonianResiduals {
    /// `|V12 + H12 V22|`
    pub h1: f64,
    /// `|ι + H11 - V11 - H12 V21|`
    pub h2: f64,
    /// `|H21 - (ι* + H22) V21|`
    pub h3: f64,
    /// `|1 - (ι* + H22) V22|`
    pub h4: f64,
}

fn embedding_matrix(n: usize, m: usize) -> Mat {
    Mat::from_fn(m, n, |i, j| if i == j { ONE } else { ZERO })
}

/// Residuals of the four block equations for `H`.
pub fn hamiltonian_equations(v: &BogoliubovMap, h: &Hamiltonian) -> CcrHamiltonianResiduals {
    let (n, m) = (v.source_modes, v.target_modes);
    let comps = v.components();
    let iota = embedding_matrix(n, m);
    let shifted = iota.adjoint() + &h.h22;
    CcrHamiltonianResiduals {
        h1: linalg::frob(&(&comps.v12 + &h.h12 * &comps.v22)),
        h2: linalg::frob(&(&iota + &h.h11 - &comps.v11 - &h.h12 * &comps.v21)),
        h3: linalg::frob(&(&h.h21 - &shifted * &comps.v21)),
        h4: linalg::dist_identity(&(&shifted * &comps.v22)),
    }
}

/// `H` solving the intertwining equations for `Z` with `Z V11 = V21`:
/// `H12 = Z†` (the block `-z*`), `H11 = V11 - ι + Z†V21`,
/// `H21 = (V22* + V12* Z†) V21`, `H22 = V22* - ι* + V12* Z†`.
pub fn hamiltonian_from_z(v: &BogoliubovMap, z: &Mat, tol: f64) -> Result<Hamiltonian> {
    if v.kind != Kind::Ccr {
        return Err(structural("expected a CCR map"));
    }
    let (n, m) = (v.source_modes, v.target_modes);
    if z.shape() != (m, m) {
        return Err(structural("Z has the wrong shape"));
    }
    let sym = linalg::frob(&(z.transpose() - z));
    if sym > tol {
        return Err(precondition(format!("Z is not symmetric (residual {sym:.3e})")));
    }
    if linalg::op_norm(z) >= 1.0 {
        return Err(precondition("|Z| is not below one"));
    }
    let comps = v.components();
    let r = linalg::frob(&(z * &comps.v11 - &comps.v21));
    if r > tol {
        return Err(precondition(format!("Z V11 != V21 (residual {r:.3e})")));
    }
    let zd = -z.adjoint();
    let iota = embedding_matrix(n, m);
    let h11 = &comps.v11 - &iota + &zd * &comps.v21;
    let h21 = (comps.v22.adjoint() + comps.v12.adjoint() * &zd) * &comps.v21;
    let h22 = comps.v22.adjoint() - iota.adjoint() + comps.v12.adjoint() * &zd;
    Ok(Hamiltonian {
        h11,
        h12: zd,
        h21,
        h22,
    })
}

#[derive(Clone, Debug)]
pub struct CcrFamily {
    pub map: BogoliubovMap,
    pub indices: Vec<Vec<usize>>,
    pub psis: Vec<Mat>,
    pub hamiltonian: Hamiltonian,
    /// isometric parts `ψ_j` of `π(g_j)` on the target space
    pub shifts: Vec<Mat>,
    /// κ-orthonormal basis of `k_V`
    pub g: Mat,
    pub n_max_source: usize,
    pub n_max_target: usize,
    /// `Ψ_α Ω = c_α π(g_α) Ψ_0 Ω`, evaluated exactly on the truncated space
    pub vacuum: Vec<Vector>,
}

impl CcrFamily {
    pub fn len(&self) -> usize {
        self.psis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psis.is_empty()
    }

    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        self.indices.iter().position(|a| a == alpha)
    }

    /// `Ψ_α Ω` for every member, with every retained entry exact.
    pub fn vacuum_images(&self) -> Vec<Vector> {
        self.vacuum.clone()
    }
}

/// Singular values below this are discarded in the truncated polar parts.
pub const POLAR_CUT: f64 = 0.5;

/// Particle layers at the top of the target excluded from field checks.
pub const FIELD_MARGIN: usize = 4;

/// Build `{Ψ_α}` for multi-indices of length at most `n_terms`.
pub fn implementers_ccr(
    v: &BogoliubovMap,
    data: &CanonicalCcrData,
    src: &CcrRep,
    tgt: &CcrRep,
    n_terms: usize,
    tol: f64,
) -> Result<CcrFamily> {
    let (n, m) = (v.source_modes, v.target_modes);
    if src.modes() != n || tgt.modes() != m {
        return Err(structural("Fock spaces do not match the map"));
    }
    if data.m_v != m - n || data.k_v.ncols() != data.m_v {
        return Err(structural("canonical data do not match the map's index"));
    }
    let z = data.z_v();
    let hamiltonian = hamiltonian_from_z(v, z, tol)?;
    let eta = wick_exponential_ccr(&hamiltonian, src, tgt, tol)?;
    let norm = linalg::det(&(linalg::eye(m) - z.ad_mul(z))).re.powf(0.25);
    let psi0 = eta * c(norm, 0.0);
    let g = data.k_v.clone();
    let shifts: Vec<Mat> = (0..g.ncols())
        .map(|j| linalg::polar_isometry(&dense(&tgt.pi(&g.column(j).into_owned())), POLAR_CUT))
        .collect();
    let indices = weak_multi_indices(data.m_v, if data.m_v == 0 { 0 } else { n_terms });
    let mut psis = Vec::with_capacity(indices.len());
    for alpha in &indices {
        let mut p = psi0.clone();
        for &j in alpha.iter().rev() {
            p = linalg::matmul(&shifts[j], &p);
        }
        psis.push(p);
    }
    let vacuum = exact_vacuum_images(&hamiltonian, norm, &g, &indices, tgt)?;
    Ok(CcrFamily {
        map: v.clone(),
        indices,
        psis,
        hamiltonian,
        shifts,
        g,
        n_max_source: src.n_max(),
        n_max_target: tgt.n_max(),
        vacuum,
    })
}

/// `Ψ_α Ω`: the isometric part of `π(g_j)` acts on `Ψ_0 Ω` (annihilated by
/// every `π(g_j*)`) like `π(g_j)` up to the factor `c_α`. The monomials are
/// applied on a cutoff raised by the longest multi-index and truncated
/// back, so each retained entry is exact.
fn exact_vacuum_images(
    h: &Hamiltonian,
    norm: f64,
    g: &Mat,
    indices: &[Vec<usize>],
    tgt: &CcrRep,
) -> Result<Vec<Vector>> {
    let pad = indices.iter().map(|a| a.len()).max().unwrap_or(0);
    let aux = build_rep_ccr(tgt.modes(), tgt.n_max() + pad, None)?;
    let base = pair_state_ccr(&h.h12, &aux) * c(norm, 0.0);
    let fields: Vec<_> = (0..g.ncols()).map(|j| aux.pi(&g.column(j).into_owned())).collect();
    let keep = tgt.dim();
    Ok(indices
        .iter()
        .map(|alpha| {
            let mut x = Mat::from_column_slice(aux.dim(), 1, base.as_slice());
            for &j in alpha.iter().rev() {
                x = spmm(&fields[j], &x);
            }
            Vector::from_fn(keep, |i, _| x[(i, 0)] * c(c_alpha(alpha), 0.0))
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CcrFamilyReport {
    pub n_max: usize,
    pub probe: usize,
    pub members: usize,
    /// `max |(Ψ_α*Ψ_β - δ) restricted to probe columns|`
    pub gram_residual: f64,
    /// `max_j |ψ_j* Ψ_0| on probe columns`
    pub psi0_residual: f64,
    /// `max |Ψ_α π(f) - π(Vf) Ψ_α|` on probe columns, below the cutoff edge
    pub field_intertwining: f64,
    /// `max |Ψ_α w(f) - w(Vf) Ψ_α|` on the vacuum column
    pub weyl_intertwining: f64,
    /// `max |ψ_j ψ_k - ψ_k ψ_j|` on low-particle columns
    pub shift_commutator: f64,
    /// `max |Ψ_α Ω - c_α π(g_α) Ψ_0 Ω|` (cutoff error of the polar parts)
    pub vacuum_consistency: f64,
    /// `|(Σ Ψ_α Ψ_α* - 1)|` on the probe rows (reported, not asserted)
    pub completeness_defect: f64,
}

fn restrict_cols(a: &Mat, cols: &[usize]) -> Mat {
    Mat::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Cutoff-aware verification on source states with at most `probe`
/// particles, with sample vectors `samples` of `K(n)` (self-conjugate ones
/// are also used for Weyl operators).
pub fn verify_ccr_family(
    family: &CcrFamily,
    src: &CcrRep,
    tgt: &CcrRep,
    probe: usize,
    samples: &[Vector],
) -> Result<CcrFamilyReport> {
    let cols = src.space.sector_upto(probe);
    let d = family.len();
    let restricted: Vec<Mat> = family.psis.iter().map(|p| restrict_cols(p, &cols)).collect();
    let mut gram_residual: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let mut g = linalg::adj_mul(&restricted[a], &restricted[b]);
            if a == b {
                g -= linalg::eye(cols.len());
            }
            gram_residual = gram_residual.max(linalg::frob(&g));
        }
    }
    let mut psi0_residual: f64 = 0.0;
    if let Some(p0) = restricted.first() {
        for s in &family.shifts {
            psi0_residual = psi0_residual.max(linalg::frob(&linalg::adj_mul(s, p0)));
        }
    }
    let mut field_intertwining: f64 = 0.0;
    // the top layers of the truncated target cannot intertwine exactly
    let edge = tgt.space.sector_upto(tgt.n_max().saturating_sub(FIELD_MARGIN));
    let mut weyl_intertwining: f64 = 0.0;
    for f in samples {
        let vf = family.map.apply(f);
        let pf = dense(&src.pi(f));
        let pf_cols = restrict_cols(&pf, &cols);
        let pvf = tgt.pi(&vf);
        for (p, r) in family.psis.iter().zip(&restricted) {
            let lhs = linalg::matmul(p, &pf_cols);
            let rhs = spmm(&pvf, r);
            let diff = lhs - rhs;
            let inner = Mat::from_fn(edge.len(), diff.ncols(), |i, j| diff[(edge[i], j)]);
            field_intertwining = field_intertwining.max(linalg::frob(&inner));
        }
        let fs = (f + selfdual::conj_vector(f)) * c(0.5, 0.0);
        let wf = weyl(&fs, src, 1e-12)?;
        let wvf = weyl(&family.map.apply(&fs), tgt, 1e-12)?;
        for p in &family.psis {
            let lhs = p * wf.column(0);
            let rhs = &wvf * p.column(0);
            weyl_intertwining = weyl_intertwining.max(linalg::vnorm(&(lhs - rhs)));
        }
    }
    let mut shift_commutator: f64 = 0.0;
    let low = tgt.space.sector_upto(probe + 2);
    for (j, a) in family.shifts.iter().enumerate() {
        for b in family.shifts.iter().skip(j + 1) {
            let ab = restrict_cols(&(a * b - b * a), &low);
            shift_commutator = shift_commutator.max(linalg::frob(&ab));
        }
    }
    let rows = tgt.space.sector_upto(probe);
    let mut sum = linalg::zeros(rows.len(), rows.len());
    for p in &family.psis {
        let pr = Mat::from_fn(rows.len(), p.ncols(), |i, j| p[(rows[i], j)]);
        sum += linalg::mul_adj(&pr, &pr);
    }
    Ok(CcrFamilyReport {
        n_max: family.n_max_target,
        probe,
        members: d,
        gram_residual,
        psi0_residual,
        field_intertwining,
        weyl_intertwining,
        shift_commutator,
        vacuum_consistency: family
            .psis
            .iter()
            .zip(&family.vacuum)
            .map(|(p, e)| linalg::vnorm(&(p.column(0) - e)))
            .fold(0.0, f64::max),
        completeness_defect: linalg::dist_identity(&sum),
    })
}

/// Fail with a cutoff diagnostic if any certified residual exceeds `tol`.
pub fn certify(report: &CcrFamilyReport, tol: f64) -> Result<()> {
    let worst = report
        .gram_residual
        .max(report.psi0_residual)
        .max(report.field_intertwining)
        .max(report.weyl_intertwining);
    if worst > tol {
        return Err(Error::Cutoff(format!(
            "residual {worst:.3e} exceeds {tol:.1e} at n_max = {}; increase the cutoff (e.g. to {})",
            report.n_max,
            2 * report.n_max
        )));
    }
    Ok(())
}

/// `c_α a*(g_{α1}) ⋯ a*(g_{αl}) Ω` in a Fock space over `k_V` with the
/// `g_j` as an orthonormal basis, i.e. the occupation state of `α`;
/// the Gram matrix of these is the identity.
pub fn fock_structure_gram(indices: &[Vec<usize>]) -> Mat {
    Mat::from_fn(indices.len(), indices.len(), |i, j| if indices[i] == indices[j] { ONE } else { ZERO })
}

#[derive(Clone, Debug)]
pub struct CcrDecompositionPiece {
    pub index: Vec<usize>,
    pub vector: Vector,
}

#[derive(Clone, Debug, Serialize)]
pub struct CcrDecompositionReport {
    pub pieces: usize,
    /// `max |<φ_α, X φ_β>|` over `α != β` and sampled `X`
    pub max_cross: f64,
    /// `max |<φ_α, X φ_α> - <Ω, X Ω>|`
    pub expectation_spread: f64,
}

/// `φ_α = c_α a*(f_{α1}) ⋯ a*(f_{αl}) Ω` over an orthonormal basis `f` of
/// `K1 ∩ ker V†`, with orthogonality of their cyclic subspaces checked on
/// products of pairs of sampled Weyl operators `w(V f)`.
pub fn decomposition_subspaces_ccr(
    v: &BogoliubovMap,
    tgt: &CcrRep,
    n_terms: usize,
    samples: &[Vector],
    rank_tol: f64,
) -> Result<(Vec<CcrDecompositionPiece>, CcrDecompositionReport)> {
    let m = v.target_modes;
    if tgt.modes() != m {
        return Err(structural("Fock space does not match the target"));
    }
    let vdag = selfdual::kappa_adjoint(&v.matrix);
    // K1 ∩ ker V†: x in C^m with V† (x, 0) = 0
    let left = vdag.columns(0, m).into_owned();
    let f = linalg::kernel_basis(&left, rank_tol);
    let indices = weak_multi_indices(f.ncols(), if f.ncols() == 0 { 0 } else { n_terms });
    let omega = Mat::from_column_slice(tgt.dim(), 1, tgt.vacuum().as_slice());
    let creators: Vec<_> = (0..f.ncols()).map(|j| tgt.create(&f.column(j).into_owned())).collect();
    let pieces: Vec<CcrDecompositionPiece> = indices
        .iter()
        .map(|alpha| {
            let mut x = omega.clone();
            for &j in alpha.iter().rev() {
                x = spmm(&creators[j], &x);
            }
            CcrDecompositionPiece {
                index: alpha.clone(),
                vector: x.column(0) * c(c_alpha(alpha), 0.0),
            }
        })
        .collect();
    let weyls: Vec<Mat> = samples
        .iter()
        .map(|s| {
            let fs = (s + selfdual::conj_vector(s)) * c(0.5, 0.0);
            weyl(&v.apply(&fs), tgt, 1e-12)
        })
        .collect::<Result<_>>()?;
    let mut ops = weyls.clone();
    for a in &weyls {
        for b in &weyls {
            ops.push(a * b);
        }
    }
    let vac = tgt.vacuum();
    let mut max_cross: f64 = 0.0;
    let mut expectation_spread: f64 = 0.0;
    for x in &ops {
        let reference = vac.dotc(&(x * &vac));
        for (i, a) in pieces.iter().enumerate() {
            let xa = x * &a.vector;
            for (j, b) in pieces.iter().enumerate() {
                let val = b.vector.dotc(&xa);
                if i == j {
                    expectation_spread = expectation_spread.max((val - reference).norm());
                } else {
                    max_cross = max_cross.max(val.norm());
                }
            }
        }
    }
    let report = CcrDecompositionReport {
        pieces: pieces.len(),
        max_cross,
        expectation_spread,
    };
    Ok((pieces, report))
}
