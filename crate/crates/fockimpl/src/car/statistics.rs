//! Bosonized statistics operator and left inverse.
//!
//! `ρ_V ∘ ρ_V` needs `V` to act on its own target, so the family of `V` is
//! paired with the family of the ladder extension `V⁺: K(m) -> K(2m - n)`,
//! which acts as `V` on `K(n)` and sends the remaining source modes
//! `e_{n+i}` to the fresh target modes `e_{m+i}`. Then
//! `ε̂ = Σ_{α,β} Ψ⁺_α Ψ_β Ψ_α* Ψ⁺_β*` acts on `F(2m - n)`.

use serde::Serialize;

use crate::car::fock::{left_product, build_rep, FieldOp};
use crate::car::implementers::{gamma_ops, implementers, ImplementerFamily};
use crate::car::structure;
use crate::error::{structural, Result};
use crate::linalg::{self, c, Mat, ONE};
use crate::selfdual::{BogoliubovMap, Kind};

/// `V⁺ = V ⊕ (e_{n+i} -> e_{m+i})` as a map `K(m) -> K(2m - n)`.
pub fn ladder_extension(v: &BogoliubovMap) -> Result<BogoliubovMap> {
    let (n, m) = (v.source_modes, v.target_modes);
    let delta = m - n;
    let top = m + delta;
    let comps = v.components();
    let mut v11 = linalg::zeros(top, m);
    let mut v12 = linalg::zeros(top, m);
    v11.view_mut((0, 0), (m, n)).copy_from(&comps.v11);
    v12.view_mut((0, 0), (m, n)).copy_from(&comps.v12);
    for i in 0..delta {
        v11[(m + i, n + i)] = ONE;
    }
    BogoliubovMap::from_blocks(v.kind, &v11, &v12)
}

#[derive(Clone, Debug, Serialize)]
pub struct StatisticsReport {
    pub d_v: usize,
    /// `λ̂` read off as the normalised trace of `(1/d) Σ Ψ⁺_j* ε̂ Ψ⁺_j`
    pub lambda_hat: f64,
    /// `|(1/d) Σ Ψ⁺_j* ε̂ Ψ⁺_j - λ̂ 1|`
    pub lambda_residual: f64,
    /// `|ε̂ - Σ ± ψ(Γ⁺_{αβ}) ψ(V⁺ Γ_{βα})|`, the field-polynomial form
    pub polynomial_residual: f64,
    /// `max |ε̂ Ψ⁺_γ Ψ_δ - Ψ⁺_δ Ψ_γ|`
    pub exchange_residual: f64,
    /// `|ε̂* ε̂ - 1|`
    pub unitarity_residual: f64,
    /// `max |ω(ψ(Γ_{αβ})) - δ_{αβ}/d|` for the tracial state `ω`
    pub central_state_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Statistics {
    pub eps_hat: Mat,
    pub lambda_hat: f64,
    pub upper: ImplementerFamily,
    pub report: StatisticsReport,
}

/// Bosonized statistics operator of the family of `V`.
pub fn bosonized_statistics(family: &ImplementerFamily, rank_tol: f64) -> Result<Statistics> {
    if family.map.kind != Kind::Car {
        return Err(structural("expected a CAR family"));
    }
    let (n, m) = (family.source_modes(), family.target_modes());
    let top = 2 * m - n;
    let vhi = ladder_extension(&family.map)?;
    let data_hi = structure::decompose(&vhi, rank_tol)?;
    let rep_hi = build_rep(top, None)?;
    let upper = implementers(&vhi, &data_hi, &rep_hi)?;
    if upper.indices != family.indices {
        return Err(structural("extension family has a different index set"));
    }
    let d = family.len();
    let dim_top = 1usize << top;

    // Ψ⁺_α Ψ_β and the sum
    let mut products = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            products.push(linalg::matmul(&upper.psis[a], &family.psis[b]));
        }
    }
    let mut eps_hat = linalg::zeros(dim_top, dim_top);
    for a in 0..d {
        for b in 0..d {
            // Ψ⁺_α Ψ_β (Ψ⁺_β Ψ_α)*
            eps_hat += linalg::mul_adj(&products[a * d + b], &products[b * d + a]);
        }
    }

    let mut li = linalg::zeros(1 << m, 1 << m);
    for j in 0..d {
        li += linalg::mul3(&upper.psis[j].adjoint(), &eps_hat, &upper.psis[j]);
    }
    li *= c(1.0 / d as f64, 0.0);
    let lambda_hat = li.trace().re / li.nrows() as f64;
    let lambda_residual = linalg::dist_identity(&(&li * c(1.0 / lambda_hat, 0.0))) * lambda_hat;

    // field polynomial: Σ (-1)^{(lα+lβ)(s⁺_α+1)} ψ(Γ⁺_{αβ}) ψ(V⁺ Γ_{βα})
    let mut poly = linalg::zeros(dim_top, dim_top);
    for (a, alpha) in family.indices.iter().enumerate() {
        for beta in &family.indices {
            let outer = gamma_ops(&upper.g, alpha, beta);
            let inner: Vec<FieldOp> = gamma_ops(&family.g, beta, alpha)
                .into_iter()
                .map(|op| {
                    let f = op_vector(&op);
                    FieldOp::psi(&vhi.apply(&f))
                })
                .collect();
            let mut ops = outer;
            ops.extend(inner);
            let term = left_product(&ops, &linalg::eye(dim_top));
            let exponent = (alpha.len() + beta.len()) * (upper.parity_shift[a] as usize + 1);
            let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
            poly += term * c(sign, 0.0);
        }
    }
    let polynomial_residual = linalg::frob(&(&eps_hat - &poly));

    let mut exchange_residual: f64 = 0.0;
    for g in 0..d {
        for dl in 0..d {
            let lhs = linalg::matmul(&eps_hat, &products[g * d + dl]);
            exchange_residual = exchange_residual.max(linalg::frob(&(lhs - &products[dl * d + g])));
        }
    }
    let unitarity_residual = linalg::dist_identity(&linalg::adj_mul(&eps_hat, &eps_hat));

    let rep = build_rep(m, None)?;
    let mut central_state_residual: f64 = 0.0;
    for alpha in &family.indices {
        for beta in &family.indices {
            let gm = left_product(&gamma_ops(&family.g, alpha, beta), &linalg::eye(1 << m));
            let want = if alpha == beta { 1.0 / d as f64 } else { 0.0 };
            central_state_residual = central_state_residual.max((rep.central_state(&gm) - c(want, 0.0)).norm());
        }
    }

    let report = StatisticsReport {
        d_v: d,
        lambda_hat,
        lambda_residual,
        polynomial_residual,
        exchange_residual,
        unitarity_residual,
        central_state_residual,
    };
    Ok(Statistics {
        eps_hat,
        lambda_hat,
        upper,
        report,
    })
}

/// The vector `f` of a field operator `ψ(f)`.
fn op_vector(op: &FieldOp) -> linalg::Vector {
    let k = op.modes;
    linalg::Vector::from_fn(2 * k, |i, _| if i < k { op.cre[i] } else { op.ann[i - k] })
}
