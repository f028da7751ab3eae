//! Gauge groups of the first kind, gauge invariance, charge decomposition
//! of implementer spaces, U(1) charges and charge conjugation.
//!
//! A gauge element is a diagonal Bogoliubov operator `diag(u, conj(u))`
//! given by its K1 block `u`. Groups are finite generator lists, supplied
//! at the target level and optionally at the source level (otherwise the
//! leading `n x n` compression of each target generator is used).

use serde::Serialize;

use crate::builders::ChainWindow;
use crate::car::fock::FockRep;
use crate::car::implementers::ImplementerFamily;
use crate::car::structure::CanonicalCarData;
use crate::car::wick::pair_state;
use crate::ccr::fock::{pair_state_ccr, second_quantize_ccr, CcrRep};
use crate::ccr::implementers::{c_alpha, CcrFamily};
use crate::ccr::structure::CanonicalCcrData;
use crate::error::{precondition, structural, Error, Result};
use crate::io::{matrix_from_json, matrix_to_json, GroupFile, JsonMatrix};
use crate::linalg::{self, c, Mat, Vector, C64, ONE, ZERO};
use crate::selfdual::{self, BogoliubovMap, Kind};

/// Diagonal Bogoliubov operator `diag(u11, conj(u11))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeElement {
    pub u11: Mat,
}

impl GaugeElement {
    pub fn new(u11: Mat, tol: f64) -> Result<Self> {
        if !u11.is_square() {
            return Err(structural("gauge block must be square"));
        }
        let r = linalg::dist_identity(&linalg::adj_mul(&u11, &u11));
        if r > tol {
            return Err(precondition(format!("gauge block is not unitary (residual {r:.3e})")));
        }
        Ok(GaugeElement { u11 })
    }

    /// Accepts either the K1 block or the full diagonal matrix.
    pub fn from_matrix(a: &Mat, tol: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Input("gauge generator must be square".into()));
        }
        let k = a.nrows();
        if k % 2 == 0 && k > 0 {
            let h = k / 2;
            let u = linalg::block(a, 0, 0, h, h);
            let off = linalg::frob(&linalg::block(a, 0, h, h, h)) + linalg::frob(&linalg::block(a, h, 0, h, h));
            let lower = linalg::frob(&(linalg::block(a, h, h, h, h) - linalg::conj(&u)));
            if off <= tol && lower <= tol {
                return GaugeElement::new(u, tol);
            }
        }
        GaugeElement::new(a.clone(), tol)
    }

    /// Like [`GaugeElement::from_matrix`] for a known mode count, which
    /// resolves the ambiguity between a `2k x 2k` block and a full matrix.
    pub fn for_modes(a: &Mat, modes: usize, tol: f64) -> Result<Self> {
        if a.shape() == (modes, modes) {
            GaugeElement::new(a.clone(), tol)
        } else if a.shape() == (2 * modes, 2 * modes) {
            let g = GaugeElement::from_matrix(a, tol)?;
            if g.modes() != modes {
                return Err(precondition("full gauge generator is not block diagonal with conjugate blocks"));
            }
            Ok(g)
        } else {
            Err(Error::Input(format!(
                "gauge generator of shape {:?} does not act on {modes} modes",
                a.shape()
            )))
        }
    }

    pub fn modes(&self) -> usize {
        self.u11.nrows()
    }

    /// `diag(u, conj(u))` on `K(modes)`.
    pub fn full(&self) -> Mat {
        let k = self.modes();
        linalg::from_blocks(&self.u11, &linalg::zeros(k, k), &linalg::zeros(k, k), &linalg::conj(&self.u11))
    }

    /// Restriction to the first `n` modes, which must be invariant.
    pub fn compress(&self, n: usize, tol: f64) -> Result<GaugeElement> {
        let k = self.modes();
        if n > k {
            return Err(structural("cannot compress to more modes"));
        }
        let leak = linalg::frob(&linalg::block(&self.u11, n, 0, k - n, n))
            + linalg::frob(&linalg::block(&self.u11, 0, n, n, k - n));
        if leak > tol {
            return Err(structural(format!(
                "gauge generator does not leave the first {n} modes invariant (leak {leak:.3e})"
            )));
        }
        GaugeElement::new(linalg::block(&self.u11, 0, 0, n, n), tol)
    }
}

/// Generators of a gauge group at the source and target truncation levels.
#[derive(Clone, Debug)]
pub struct GaugeGroup {
    pub source: Vec<GaugeElement>,
    pub target: Vec<GaugeElement>,
}

impl GaugeGroup {
    pub fn new(source: Vec<GaugeElement>, target: Vec<GaugeElement>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(structural("source and target generator lists differ in length"));
        }
        Ok(GaugeGroup { source, target })
    }

    /// Generators for maps `K(n) -> K(m)` from a group file.
    pub fn from_file(file: &GroupFile, n: usize, m: usize, tol: f64) -> Result<Self> {
        let target: Vec<GaugeElement> = file
            .generators
            .iter()
            .map(|g| matrix_from_json(g).and_then(|a| GaugeElement::for_modes(&a, m, tol)))
            .collect::<Result<_>>()?;
        let source: Vec<GaugeElement> = match &file.source_generators {
            Some(list) => list
                .iter()
                .map(|g| matrix_from_json(g).and_then(|a| GaugeElement::for_modes(&a, n, tol)))
                .collect::<Result<_>>()?,
            None => target.iter().map(|g| g.compress(n, tol)).collect::<Result<_>>()?,
        };
        GaugeGroup::new(source, target)
    }

    /// U(1) phases `λ` for the given mode charges at both levels.
    pub fn u1(charges_src: &[i32], charges_tgt: &[i32], lambdas: &[f64]) -> Self {
        let mk = |q: &[i32], l: f64| GaugeElement {
            u11: crate::builders::u1_phase(q, l),
        };
        GaugeGroup {
            source: lambdas.iter().map(|&l| mk(charges_src, l)).collect(),
            target: lambdas.iter().map(|&l| mk(charges_tgt, l)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn to_file(&self) -> GroupFile {
        GroupFile {
            generators: self.target.iter().map(|g| matrix_to_json(&g.u11)).collect(),
            source_generators: Some(self.source.iter().map(|g| matrix_to_json(&g.u11)).collect()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeInvarianceReport {
    /// `|V U_src - U_tgt V|` per generator
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub invariant: bool,
}

pub fn is_gauge_invariant(v: &BogoliubovMap, group: &GaugeGroup, tol: f64) -> Result<GaugeInvarianceReport> {
    check_levels(v, group)?;
    let residuals: Vec<f64> = group
        .source
        .iter()
        .zip(&group.target)
        .map(|(us, ut)| linalg::frob(&(&v.matrix * us.full() - ut.full() * &v.matrix)))
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(GaugeInvarianceReport {
        residuals,
        max_residual,
        tol,
        invariant: max_residual <= tol,
    })
}

fn check_levels(v: &BogoliubovMap, group: &GaugeGroup) -> Result<()> {
    if group.source.len() != group.target.len() {
        return Err(structural("source and target generator lists differ in length"));
    }
    if group.source.iter().any(|g| g.modes() != v.source_modes)
        || group.target.iter().any(|g| g.modes() != v.target_modes)
    {
        return Err(structural("gauge generators do not match the map's levels"));
    }
    Ok(())
}

/// `Γ(U)` on the fermionic Fock space.
pub fn second_quantize_car(u: &GaugeElement, rep: &FockRep) -> Result<Mat> {
    if u.modes() != rep.modes {
        return Err(structural("gauge element does not match the Fock space"));
    }
    Ok(rep.second_quantize(&u.u11))
}

/// `Γ_s(U)` on the truncated bosonic Fock space (exact, since `Γ_s(U)`
/// preserves particle number).
pub fn second_quantize_bosonic(u: &GaugeElement, rep: &CcrRep) -> Result<Mat> {
    if u.modes() != rep.modes() {
        return Err(structural("gauge element does not match the Fock space"));
    }
    second_quantize_ccr(&u.u11, rep, rep)
}

/// Per-generator entry of a charge decomposition report.
#[derive(Clone, Debug, Serialize)]
pub struct ChargeEntry {
    /// `det_{h_V}(U)` as `[re, im]` (1 for CCR)
    pub det_h: [f64; 2],
    /// matrix of `U` on `k_V` in the canonical basis
    pub k_rep: JsonMatrix,
    /// `|Γ(U) Φ - Φ|` for the pair vector `Φ = exp(½ X a*a*) Ω`
    pub pair_invariance: f64,
    /// `|(1 - p_h) U h_V|` (0 for CCR)
    pub h_invariance: f64,
    /// `|(1 - p_k) U k_V|`
    pub k_invariance: f64,
    /// `|Γ(U) Φ - Φ R|` with `R = (Φ*Φ)^{-1} Φ* Γ(U) Φ` over the vacuum images `Φ`
    pub leakage: f64,
    /// `|R - model|` with the model `det_h(U) ⊗ Λ(U|k)` or `Sym(U|k)`
    pub equivalence_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChargeReport {
    pub kind: Kind,
    /// dimensions of the blocks of multi-index length `0, 1, ...`
    pub block_dims: Vec<usize>,
    pub entries: Vec<ChargeEntry>,
    pub max_residual: f64,
}

fn pack(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn outside(proj_basis: &Mat, x: &Mat) -> f64 {
    if x.ncols() == 0 {
        return 0.0;
    }
    let p = linalg::mul_adj(proj_basis, proj_basis);
    linalg::frob(&(x - p * x))
}

fn block_dims(indices: &[Vec<usize>]) -> Vec<usize> {
    let top = indices.iter().map(|a| a.len()).max().unwrap_or(0);
    (0..=top).map(|l| indices.iter().filter(|a| a.len() == l).count()).collect()
}

/// Charge decomposition of the CAR family: `span{Ψ_α Ω}` carries
/// `det_{h_V}(U) ⊗ Λ^l(U|k_V)` on the length-`l` block.
pub fn charge_decomposition_car(
    v: &BogoliubovMap,
    data: &CanonicalCarData,
    family: &ImplementerFamily,
    group: &GaugeGroup,
    tol: f64,
) -> Result<ChargeReport> {
    if v.kind != Kind::Car {
        return Err(structural("expected a CAR map"));
    }
    let inv = is_gauge_invariant(v, group, tol)?;
    if !inv.invariant {
        return Err(precondition(format!(
            "map is not gauge invariant (residual {:.3e})",
            inv.max_residual
        )));
    }
    let m = v.target_modes;
    let rep = crate::car::fock::build_rep(m, None)?;
    let phi = vectors_to_mat(&family.vacuum_images());
    let pair = pair_state(&linalg::conj(data.t_v()));
    let h = data.h_v();
    let g = &family.g;
    let mut entries = Vec::with_capacity(group.len());
    for u in &group.target {
        let gamma = second_quantize_car(u, &rep)?;
        let full = u.full();
        let det_h = if h.ncols() == 0 {
            ONE
        } else {
            linalg::det(&linalg::mul3(&h.adjoint(), &u.u11, h))
        };
        let uk = linalg::mul3(&g.adjoint(), &full, g);
        let model = Mat::from_fn(family.len(), family.len(), |b, a| {
            let (alpha, beta) = (&family.indices[a], &family.indices[b]);
            if alpha.len() != beta.len() {
                return ZERO;
            }
            let sub = Mat::from_fn(beta.len(), alpha.len(), |i, j| uk[(beta[i], alpha[j])]);
            det_h * linalg::det(&sub)
        });
        entries.push(charge_entry(
            &gamma,
            &phi,
            &model,
            det_h,
            &uk,
            &pair,
            outside(h, &(&u.u11 * h)),
            outside(g, &(&full * g)),
        ));
    }
    Ok(finish(Kind::Car, &family.indices, entries))
}

/// Charge decomposition of the CCR family: the length-`l` block of
/// `span{Ψ_α Ω}` carries the `l`-th symmetric power of `U|k_V`.
pub fn charge_decomposition_ccr(
    v: &BogoliubovMap,
    data: &CanonicalCcrData,
    family: &CcrFamily,
    tgt: &CcrRep,
    group: &GaugeGroup,
    tol: f64,
) -> Result<ChargeReport> {
    if v.kind != Kind::Ccr {
        return Err(structural("expected a CCR map"));
    }
    let inv = is_gauge_invariant(v, group, tol)?;
    if !inv.invariant {
        return Err(precondition(format!(
            "map is not gauge invariant (residual {:.3e})",
            inv.max_residual
        )));
    }
    let m = v.target_modes;
    let kappa = selfdual::kappa(m);
    let phi = vectors_to_mat(&family.vacuum_images());
    let pair = pair_state_ccr(&family.hamiltonian.h12, tgt);
    let g = &data.k_v;
    let mut entries = Vec::with_capacity(group.len());
    for u in &group.target {
        let gamma = second_quantize_bosonic(u, tgt)?;
        let full = u.full();
        let uk = linalg::mul3(&g.adjoint(), &(&kappa * &full), g);
        let model = Mat::from_fn(family.len(), family.len(), |b, a| {
            let (alpha, beta) = (&family.indices[a], &family.indices[b]);
            if alpha.len() != beta.len() {
                return ZERO;
            }
            let sub = Mat::from_fn(beta.len(), alpha.len(), |i, j| uk[(beta[i], alpha[j])]);
            linalg::permanent(&sub) * c(c_alpha(alpha) * c_alpha(beta), 0.0)
        });
        // k_V is κ-orthonormal; its κ-orthogonal projector is g g† = g g* κ
        let k_leak = if g.ncols() == 0 {
            0.0
        } else {
            let x = &full * g;
            linalg::frob(&(&x - g * linalg::mul3(&g.adjoint(), &kappa, &x)))
        };
        entries.push(charge_entry(&gamma, &phi, &model, ONE, &uk, &pair, 0.0, k_leak));
    }
    Ok(finish(Kind::Ccr, &family.indices, entries))
}

fn vectors_to_mat(vs: &[Vector]) -> Mat {
    let rows = vs.first().map_or(0, |v| v.len());
    Mat::from_fn(rows, vs.len(), |i, j| vs[j][i])
}

#[allow(clippy::too_many_arguments)]
fn charge_entry(
    gamma: &Mat,
    phi: &Mat,
    model: &Mat,
    det_h: C64,
    uk: &Mat,
    pair: &Vector,
    h_invariance: f64,
    k_invariance: f64,
) -> ChargeEntry {
    let g_phi = linalg::matmul(gamma, phi);
    // Gram-transported action: least-squares coefficients of Γ(U)Φ in Φ
    let gram = linalg::adj_mul(phi, phi);
    let r = linalg::inverse(&gram).map_or_else(|| linalg::adj_mul(phi, &g_phi), |gi| gi * linalg::adj_mul(phi, &g_phi));
    ChargeEntry {
        det_h: pack(det_h),
        k_rep: matrix_to_json(uk),
        pair_invariance: linalg::vnorm(&(gamma * pair - pair)),
        h_invariance,
        k_invariance,
        leakage: linalg::frob(&(&g_phi - phi * &r)),
        equivalence_residual: linalg::frob(&(r - model)),
    }
}

fn finish(kind: Kind, indices: &[Vec<usize>], entries: Vec<ChargeEntry>) -> ChargeReport {
    let max_residual = entries
        .iter()
        .map(|e| {
            e.pair_invariance
                .max(e.h_invariance)
                .max(e.k_invariance)
                .max(e.leakage)
                .max(e.equivalence_residual)
        })
        .fold(0.0, f64::max);
    ChargeReport {
        kind,
        block_dims: block_dims(indices),
        entries,
        max_residual,
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct U1Charge {
    /// `dim ker V₊₊`
    pub kernel_dim: usize,
    /// `dim ker V₊₊*`
    pub cokernel_dim: usize,
    /// `-ind V₊₊ = dim ker V₊₊* - dim ker V₊₊`
    pub charge: i64,
}

/// U(1) charge `-ind V₊₊` with `V₊₊ = p₊ V p₊` and `p₊ = P P1`, for secondary
/// basis projections `p_src`, `p_tgt` commuting with `P1` and with `V`.
pub fn u1_charge(v: &BogoliubovMap, p_src: &Mat, p_tgt: &Mat, rank_tol: f64) -> Result<U1Charge> {
    let (n, m) = (v.source_modes, v.target_modes);
    if p_src.shape() != (2 * n, 2 * n) || p_tgt.shape() != (2 * m, 2 * m) {
        return Err(structural("projections do not match the map's levels"));
    }
    let (p1s, p1t) = (selfdual::p1(n), selfdual::p1(m));
    let comm = linalg::frob(&(p_src * &p1s - &p1s * p_src)) + linalg::frob(&(p_tgt * &p1t - &p1t * p_tgt));
    if comm > 1e-10 {
        return Err(structural(format!("P does not commute with P1 (residual {comm:.3e})")));
    }
    let vp = linalg::frob(&(&v.matrix * p_src - p_tgt * &v.matrix));
    if vp > 1e-10 {
        return Err(structural(format!("V does not intertwine the projections (residual {vp:.3e})")));
    }
    let bs = linalg::range_basis(&(p_src * &p1s), 1e-12);
    let bt = linalg::range_basis(&(p_tgt * &p1t), 1e-12);
    let vpp = linalg::mul3(&bt.adjoint(), &v.matrix, &bs);
    let rank = if vpp.nrows() == 0 || vpp.ncols() == 0 {
        0
    } else {
        linalg::rank(&vpp, rank_tol)
    };
    let kernel_dim = bs.ncols() - rank;
    let cokernel_dim = bt.ncols() - rank;
    Ok(U1Charge {
        kernel_dim,
        cokernel_dim,
        charge: cokernel_dim as i64 - kernel_dim as i64,
    })
}

/// U(1) charge of each fermionic Fock basis state: `Σ q_i n_i`.
pub fn fock_charges(charges: &[i32]) -> Vec<i64> {
    (0..(1usize << charges.len()))
        .map(|r| {
            charges
                .iter()
                .enumerate()
                .filter(|(i, _)| r >> i & 1 == 1)
                .map(|(_, &q)| q as i64)
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ChargeShiftReport {
    /// charge added by each member
    pub shifts: Vec<i64>,
    /// `max_q |Ψ Π_q - Π_{q+s} Ψ Π_q|`
    pub residual: f64,
    /// source charges with a nonzero image
    pub sectors: Vec<i64>,
}

/// Determine how each `Ψ_α` moves the U(1) charge of Fock basis states.
pub fn implementer_charge_shift(psis: &[Mat], charges_src: &[i32], charges_tgt: &[i32]) -> Result<ChargeShiftReport> {
    let qs = fock_charges(charges_src);
    let qt = fock_charges(charges_tgt);
    let mut shifts = Vec::with_capacity(psis.len());
    let mut residual: f64 = 0.0;
    let mut sectors: Vec<i64> = Vec::new();
    for psi in psis {
        if psi.shape() != (qt.len(), qs.len()) {
            return Err(structural("implementer does not match the charge lists"));
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..psi.ncols() {
            for i in 0..psi.nrows() {
                let w = psi[(i, j)].norm_sqr();
                num += w * (qt[i] - qs[j]) as f64;
                den += w;
            }
        }
        let s = (num / den).round() as i64;
        let mut leak = 0.0;
        for j in 0..psi.ncols() {
            let mut col = 0.0;
            for i in 0..psi.nrows() {
                if qt[i] != qs[j] + s {
                    leak += psi[(i, j)].norm_sqr();
                } else {
                    col += psi[(i, j)].norm_sqr();
                }
            }
            if col > 0.5 && !sectors.contains(&qs[j]) {
                sectors.push(qs[j]);
            }
        }
        residual = residual.max(leak.sqrt());
        shifts.push(s);
    }
    sectors.sort();
    Ok(ChargeShiftReport {
        shifts,
        residual,
        sectors,
    })
}

/// The mirror window `[-hi, -lo)` of a chain window.
pub fn mirror_window(w: &ChainWindow) -> ChainWindow {
    ChainWindow { lo: -w.hi, hi: -w.lo }
}

/// Charge conjugation from a chain window onto its mirror window: the
/// chain vector at site `j` goes to the chain vector at site `-1 - j`, so
/// particle vectors in K1 are exchanged with hole vectors in K2. For a
/// window `[-N, N)` this is a self-adjoint unitary on one space.
pub fn chain_conjugation(w: &ChainWindow) -> Result<BogoliubovMap> {
    let wm = mirror_window(w);
    let k = w.modes();
    let mut x = linalg::zeros(k, k);
    for j in w.lo..w.hi {
        x[(wm.mode_of(-1 - j), w.mode_of(j))] = ONE;
    }
    BogoliubovMap::from_blocks(Kind::Car, &linalg::zeros(k, k), &x)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugationReport {
    /// `|C* C - 1|` at both levels
    pub c_structure: f64,
    /// `|C_tgt* V^c C_src - V|`, i.e. `(V^c)^c = V` with the inverse maps
    pub involution: f64,
    /// projector distance of `h_{V^c}` and `C(h_V*)`
    pub h_residual: f64,
    /// projector distance of `k_{V^c}` and `C(k_V*)`
    pub k_residual: f64,
    pub same_index: bool,
}

/// `V^c = C_tgt V C_src*` with unitarity checks of both `C` maps. When
/// both are the same self-adjoint `C` this is `C V C`.
pub fn conjugate_car(
    v: &BogoliubovMap,
    c_src: &BogoliubovMap,
    c_tgt: &BogoliubovMap,
    rank_tol: f64,
) -> Result<(BogoliubovMap, ConjugationReport)> {
    if v.kind != Kind::Car || c_src.kind != Kind::Car || c_tgt.kind != Kind::Car {
        return Err(structural("expected CAR maps"));
    }
    if c_src.source_modes != v.source_modes
        || c_tgt.source_modes != v.target_modes
        || c_src.target_modes != c_src.source_modes
        || c_tgt.target_modes != c_tgt.source_modes
    {
        return Err(structural("conjugation maps do not match the levels"));
    }
    let c_structure = [c_src, c_tgt]
        .iter()
        .map(|x| linalg::dist_identity(&linalg::adj_mul(&x.matrix, &x.matrix)))
        .sum::<f64>();
    if c_structure > 1e-10 {
        return Err(precondition(format!(
            "conjugation map is not unitary (residual {c_structure:.3e})"
        )));
    }
    let vc = BogoliubovMap::new(
        Kind::Car,
        v.source_modes,
        v.target_modes,
        linalg::mul3(&c_tgt.matrix, &v.matrix, &c_src.matrix.adjoint()),
    )?;
    let back = linalg::mul3(&c_tgt.matrix.adjoint(), &vc.matrix, &c_src.matrix);
    let involution = linalg::frob(&(back - &v.matrix));
    let d = crate::car::structure::decompose(v, rank_tol)?;
    let dc = crate::car::structure::decompose(&vc, rank_tol)?;
    let m = v.target_modes;
    // h_V lives in K1(m); h_V* in K2(m)
    let h = d.h_v();
    let h_star = Mat::from_fn(2 * m, h.ncols(), |i, j| if i >= m { h[(i - m, j)].conj() } else { ZERO });
    let h_mapped = &c_tgt.matrix * h_star;
    let hc = dc.h_v();
    let hc_full = Mat::from_fn(2 * m, hc.ncols(), |i, j| if i < m { hc[(i, j)] } else { ZERO });
    let k_mapped = &c_tgt.matrix * conj_columns(&d.k_v);
    let report = ConjugationReport {
        c_structure,
        involution,
        h_residual: projector_distance(&hc_full, &h_mapped),
        k_residual: projector_distance(&dc.k_v, &k_mapped),
        same_index: d.m_v == dc.m_v && d.l_v == dc.l_v,
    };
    Ok((vc, report))
}

fn conj_columns(a: &Mat) -> Mat {
    let mut out = a.clone();
    for j in 0..a.ncols() {
        out.set_column(j, &selfdual::conj_vector(&a.column(j).into_owned()));
    }
    out
}

fn projector_distance(a: &Mat, b: &Mat) -> f64 {
    if a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let pa = linalg::range_projector(a, 1e-12);
    let pb = linalg::range_projector(b, 1e-12);
    linalg::frob(&(pa - pb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::car::implementers::implementers;
    use crate::car::structure::decompose;

    fn sampler(seed: u64) -> impl FnMut() -> f64 {
        let mut x = seed;
        move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    #[test]
    fn gauge_element_parsing() {
        let mut s = sampler(1);
        let u = builders::random_unitary(2, &mut s);
        let g = GaugeElement::from_matrix(&u, 1e-12).unwrap();
        let h = GaugeElement::from_matrix(&g.full(), 1e-12).unwrap();
        assert_eq!(g, h);
        assert!(GaugeElement::from_matrix(&(u * c(2.0, 0.0)), 1e-12).is_err());
        // a 4 x 4 diagonal unitary is a 4-mode block when 4 modes are expected
        let d = builders::u1_phase(&[1, -1, 1, -1], 0.7);
        assert_eq!(GaugeElement::for_modes(&d, 4, 1e-12).unwrap().modes(), 4);
        assert_eq!(GaugeElement::for_modes(&GaugeElement::new(d.clone(), 1e-12).unwrap().full(), 4, 1e-12).unwrap().u11, d);
        assert!(matches!(GaugeElement::for_modes(&d, 3, 1e-12), Err(Error::Input(_))));
    }

    #[test]
    fn tensor_form_is_invariant_under_un() {
        // K1 = (site 0 ⊗ C^N) ⊕ conj(site 1 ⊗ C^N), V = v ⊗ 1_N on h = C^2
        let nn = 2;
        let mut s = sampler(2);
        let v = builders::random_unitary(2, &mut s);
        let eye = linalg::eye(nn);
        let z = linalg::zeros(nn, nn);
        let v11 = linalg::from_blocks(&(&eye * v[(0, 0)]), &z, &z, &(&eye * v[(1, 1)].conj()));
        let v21 = linalg::from_blocks(&z, &(&eye * v[(0, 1)].conj()), &(&eye * v[(1, 0)]), &z);
        let big = BogoliubovMap::from_blocks(Kind::Car, &v11, &linalg::conj(&v21)).unwrap();
        assert!(selfdual::validate(&big, 1e-12).unwrap().pass);
        let w = builders::random_unitary(nn, &mut s);
        let u = GaugeElement::new(linalg::from_blocks(&w, &z, &z, &linalg::conj(&w)), 1e-12).unwrap();
        let group = GaugeGroup::new(vec![u.clone()], vec![u]).unwrap();
        assert!(is_gauge_invariant(&big, &group, 1e-11).unwrap().invariant);
        let generic = builders::random_car_unitary(4, 0.6, &mut s);
        assert!(!is_gauge_invariant(&generic, &group, 1e-6).unwrap().invariant);
        let id = BogoliubovMap::identity(Kind::Car, 4);
        assert!(is_gauge_invariant(&id, &group, 0.0).unwrap().invariant);
    }

    #[test]
    fn second_quantization_conjugates_fields() {
        let mut s = sampler(3);
        let rep = crate::car::fock::build_rep(3, None).unwrap();
        let u = GaugeElement::new(builders::random_unitary(3, &mut s), 1e-12).unwrap();
        let w = GaugeElement::new(builders::random_unitary(3, &mut s), 1e-12).unwrap();
        let gu = second_quantize_car(&u, &rep).unwrap();
        let gw = second_quantize_car(&w, &rep).unwrap();
        let f = builders::random_vector(6, &mut s);
        let lhs = linalg::mul3(&gu, &rep.pi(&f).dense(), &gu.adjoint());
        let rhs = rep.pi(&(u.full() * &f)).dense();
        assert!(linalg::frob(&(lhs - rhs)) < 1e-11);
        assert!((gu.column(0) - rep.vacuum()).norm() < 1e-14);
        let guw = second_quantize_car(&GaugeElement { u11: &u.u11 * &w.u11 }, &rep).unwrap();
        assert!(linalg::frob(&(guw - gu * gw)) < 1e-11);
        let minus = second_quantize_car(&GaugeElement { u11: -linalg::eye(3) }, &rep).unwrap();
        assert!(linalg::frob(&(minus - rep.parity())) < 1e-14);
    }

    #[test]
    fn bosonic_second_quantization_conjugates_fields() {
        let mut s = sampler(4);
        let rep = crate::ccr::fock::build_rep_ccr(2, 6, None).unwrap();
        let u = GaugeElement::new(builders::random_unitary(2, &mut s), 1e-12).unwrap();
        let gu = second_quantize_bosonic(&u, &rep).unwrap();
        assert!(linalg::dist_identity(&linalg::adj_mul(&gu, &gu)) < 1e-11);
        let f = builders::random_vector(4, &mut s);
        let lhs = linalg::mul3(&gu, &crate::ccr::fock::dense(&rep.pi(&f)), &gu.adjoint());
        let rhs = crate::ccr::fock::dense(&rep.pi(&(u.full() * &f)));
        assert!(linalg::frob(&(lhs - rhs)) < 1e-11);
    }

    #[test]
    fn shift_charges_count_kernels() {
        let id = BogoliubovMap::identity(Kind::Car, 4);
        let w = ChainWindow { lo: -2, hi: 2 };
        let p = builders::chain_projection(&w);
        assert_eq!(u1_charge(&id, &p, &p, 1e-10).unwrap().charge, 0);
        for k in [1i64, 2] {
            let src = ChainWindow { lo: -3, hi: 3 };
            let tgt = ChainWindow { lo: -3 + k, hi: 3 + k };
            let v = builders::chain_shift(&src, &tgt, k).unwrap();
            let q = u1_charge(&v, &builders::chain_projection(&src), &builders::chain_projection(&tgt), 1e-10)
                .unwrap();
            assert_eq!(q.charge, k);
            assert_eq!((q.kernel_dim, q.cokernel_dim), (0, k as usize));
        }
    }

    #[test]
    fn unilateral_shift_block_has_index_minus_one() {
        // V₊₊ a one-step shift: one-dimensional cokernel, charge = -ind = 1
        let src = ChainWindow { lo: -2, hi: 2 };
        let tgt = ChainWindow { lo: -1, hi: 3 };
        let v = builders::chain_shift(&src, &tgt, 1).unwrap();
        let q = u1_charge(&v, &builders::chain_projection(&src), &builders::chain_projection(&tgt), 1e-10).unwrap();
        assert_eq!(q.kernel_dim as i64 - q.cokernel_dim as i64, -1);
    }

    #[test]
    fn implementer_of_shift_moves_charge() {
        for k in [1i64, 2] {
            let src = ChainWindow { lo: -3, hi: 3 };
            let tgt = ChainWindow { lo: -3 + k, hi: 3 + k };
            let v = builders::chain_shift(&src, &tgt, k).unwrap();
            let data = decompose(&v, 1e-10).unwrap();
            let fam = implementers(&v, &data, &crate::car::fock::build_rep(6, None).unwrap()).unwrap();
            let r = implementer_charge_shift(&fam.psis, &src.charges(), &tgt.charges()).unwrap();
            assert_eq!(r.shifts, vec![k]);
            assert!(r.residual < 1e-12);
        }
    }

    #[test]
    fn one_mode_shift_has_phase_character() {
        // M_V = 1, U(1) acting on the free target mode
        let src = ChainWindow { lo: -2, hi: 2 };
        let tgt = ChainWindow { lo: -2, hi: 3 };
        let v = builders::chain_shift(&src, &tgt, 1).unwrap();
        let data = decompose(&v, 1e-10).unwrap();
        let fam = implementers(&v, &data, &crate::car::fock::build_rep(5, None).unwrap()).unwrap();
        let lambda = 0.7;
        let group = GaugeGroup::u1(&src.charges(), &tgt.charges(), &[lambda]);
        let r = charge_decomposition_car(&v, &data, &fam, &group, 1e-12).unwrap();
        assert_eq!(r.block_dims, vec![1, 1]);
        assert!(r.max_residual < 1e-10, "{r:?}");
        let uk = matrix_from_json(&r.entries[0].k_rep).unwrap();
        assert!((uk[(0, 0)].norm() - 1.0).abs() < 1e-12);
        let phase = uk[(0, 0)].arg().abs();
        assert!((phase - lambda).abs() < 1e-12);
    }

    #[test]
    fn trivial_group_has_trivial_characters() {
        let mut s = sampler(5);
        let v = builders::random_car_map(2, 3, 0.5, &mut s);
        let data = decompose(&v, 1e-10).unwrap();
        let fam = implementers(&v, &data, &crate::car::fock::build_rep(3, None).unwrap()).unwrap();
        let group = GaugeGroup::new(
            vec![GaugeElement { u11: linalg::eye(2) }],
            vec![GaugeElement { u11: linalg::eye(3) }],
        )
        .unwrap();
        let r = charge_decomposition_car(&v, &data, &fam, &group, 1e-12).unwrap();
        assert!(r.max_residual < 1e-10);
        assert!((r.entries[0].det_h[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_invariant_map_is_rejected() {
        let mut s = sampler(6);
        let v = builders::random_car_map(2, 3, 0.5, &mut s);
        let data = decompose(&v, 1e-10).unwrap();
        let fam = implementers(&v, &data, &crate::car::fock::build_rep(3, None).unwrap()).unwrap();
        let group = GaugeGroup::u1(&[1, -1], &[1, -1, 1], &[0.4]);
        assert!(matches!(
            charge_decomposition_car(&v, &data, &fam, &group, 1e-10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn generic_invariant_family_matches_model() {
        let mut s = sampler(7);
        let src = ChainWindow { lo: -2, hi: 2 };
        let tgt = ChainWindow { lo: -2, hi: 3 };
        let shift = builders::chain_shift(&src, &tgt, 1).unwrap();
        let left = builders::random_gauge_invariant_car_unitary(&tgt.charges(), 0.6, &mut s);
        let right = builders::random_gauge_invariant_car_unitary(&src.charges(), 0.6, &mut s);
        let v = left.compose(&shift).unwrap().compose(&right).unwrap();
        let data = decompose(&v, 1e-10).unwrap();
        let fam = implementers(&v, &data, &crate::car::fock::build_rep(5, None).unwrap()).unwrap();
        let group = GaugeGroup::u1(&src.charges(), &tgt.charges(), &[0.3, 1.1, -2.0]);
        let r = charge_decomposition_car(&v, &data, &fam, &group, 1e-11).unwrap();
        assert!(r.max_residual < 1e-9, "{r:?}");
    }

    #[test]
    fn conjugation_reverses_charge() {
        let mut s = sampler(8);
        for k in [1i64, 2] {
            let src = ChainWindow { lo: -3, hi: 3 };
            let tgt = ChainWindow { lo: -3 + k, hi: 3 + k };
            let shift = builders::chain_shift(&src, &tgt, k).unwrap();
            let left = builders::random_gauge_invariant_car_unitary(&tgt.charges(), 0.4, &mut s);
            let v = left.compose(&shift).unwrap();
            let (cs, ct) = (chain_conjugation(&src).unwrap(), chain_conjugation(&tgt).unwrap());
            let (vc, r) = conjugate_car(&v, &cs, &ct, 1e-10).unwrap();
            assert!(r.involution < 1e-12 && r.h_residual < 1e-9 && r.k_residual < 1e-9, "{r:?}");
            assert!(r.same_index);
            let q = u1_charge(&v, &builders::chain_projection(&src), &builders::chain_projection(&tgt), 1e-10)
                .unwrap()
                .charge;
            let (ms, mt) = (mirror_window(&src), mirror_window(&tgt));
            let qc = u1_charge(&vc, &builders::chain_projection(&ms), &builders::chain_projection(&mt), 1e-10)
                .unwrap()
                .charge;
            assert_eq!(q, k);
            assert_eq!(qc, -q);
            // T_{V^c} = C21 conj(T_V) C21* across the two levels
            let t = decompose(&v, 1e-10).unwrap().param.t;
            let tc = decompose(&vc, 1e-10).unwrap().param.t;
            let c21 = ct.components().v21;
            assert!(linalg::frob(&(tc - linalg::mul3(&c21, &linalg::conj(&t), &c21.transpose()))) < 1e-10);
        }
        // on a symmetric window C is a self-adjoint involution fixing 1
        let w = ChainWindow { lo: -2, hi: 2 };
        let c = chain_conjugation(&w).unwrap();
        assert!(linalg::frob(&(&c.matrix - c.matrix.adjoint())) < 1e-15);
        let id = BogoliubovMap::identity(Kind::Car, 4);
        let (idc, _) = conjugate_car(&id, &c, &c, 1e-10).unwrap();
        assert!(linalg::dist_identity(&idc.matrix) < 1e-14);
    }

    #[test]
    fn ccr_squeeze_family_carries_symmetric_powers() {
        let v = builders::two_mode_squeeze(2, 0, 1, 0.5f64.atanh())
            .compose(&selfdual::embedding(Kind::Ccr, 1, 2))
            .unwrap();
        let data = crate::ccr::structure::decompose_ccr(&v, 1e-10).unwrap();
        let src = crate::ccr::fock::build_rep_ccr(1, 24, None).unwrap();
        let tgt = crate::ccr::fock::build_rep_ccr(2, 24, None).unwrap();
        let fam = crate::ccr::implementers::implementers_ccr(&v, &data, &src, &tgt, 3, 1e-10).unwrap();
        let group = GaugeGroup::u1(&[1], &[1, -1], &[0.5, 1.3]);
        let r = charge_decomposition_ccr(&v, &data, &fam, &tgt, &group, 1e-10).unwrap();
        assert_eq!(r.block_dims, vec![1, 1, 1, 1]);
        assert!(r.max_residual < 1e-5, "{r:?}");
    }
}
