//! Command-line front end: one command per process, a JSON report on
//! stdout (or `--out`), CSV tables with `--csv` and whitespace-separated
//! `(x, y)` series with `--plot-data`.
//!
//! Exit codes: 0 when every assertion of the command holds, 2 on an
//! assertion failure (the report is still written), 3 on input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::car::{fock, implementers, statistics, structure};
use crate::ccr::{self, implementers as ccr_impl};
use crate::config::{self, Tolerances};
use crate::error::{Error, Result};
use crate::experiments;
use crate::gauge::{self, GaugeGroup};
use crate::io::{self, matrix_to_json};
use crate::linalg::{self, Vector};
use crate::selfdual::{self, BogoliubovMap, Kind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

const CSV_HELP: &str = "\
CSV columns (--csv):
  car analyze, car implement, ccr analyze, example chi: quantity,value
  ccr implement: n_max,members,gram_residual,psi0_residual,field_intertwining,
                 weyl_intertwining,shift_commutator,vacuum_consistency,completeness_defect
  charge: generator,det_h_re,det_h_im,pair_invariance,h_invariance,k_invariance,
          leakage,equivalence_residual
  example vphi: phi,lambda_formula,lambda_measured,state_operator_residual,index,chi
  dirac: n_max,m_max,plus_minus,minus_plus,gap_plus_minus,gap_minus_plus

Plot data (--plot-data): blocks '# <series>' followed by 'x y' lines,
separated by blank lines.

Environment: FOCKIMPL_TOL overrides tolerances, either a bare number (composite
tolerance) or a list such as 'rank=1e-9,cutoff=1e-5'.";

#[derive(Parser, Debug)]
#[command(name = "fockimpl", version, about = "Implementers of Bogoliubov transformations on truncated Fock spaces", after_help = CSV_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit a CSV table instead of JSON.
    #[arg(long, global = true, conflicts_with = "plot_data")]
    pub csv: bool,
    /// Emit plot-ready (x, y) series instead of JSON.
    #[arg(long, global = true)]
    pub plot_data: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fermionic (CAR) maps.
    Car {
        #[command(subcommand)]
        action: CarAction,
    },
    /// Bosonic (CCR) maps.
    Ccr {
        #[command(subcommand)]
        action: CcrAction,
    },
    /// Charge decomposition of the implementers under a gauge group.
    Charge(ChargeArgs),
    /// Worked examples.
    Example {
        #[command(subcommand)]
        action: ExampleAction,
    },
    /// Hilbert–Schmidt ladder of the localized chiral Dirac isometry.
    Dirac(DiracArgs),
}

#[derive(Subcommand, Debug)]
pub enum CarAction {
    /// Index, state-operator profile, canonical decomposition and χ.
    Analyze {
        /// Operator JSON file ({kind, source_modes, target_modes, matrix}).
        op: PathBuf,
    },
    /// Implementer family with Cuntz, decomposition and statistics reports.
    Implement {
        /// Operator JSON file ({kind, source_modes, target_modes, matrix}).
        op: PathBuf,
        /// Include the vectors Ψ_α Ω in the report.
        #[arg(long)]
        dump_vacuum: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum CcrAction {
    /// Validation, canonical Z_V and decomposition residuals.
    Analyze {
        /// Operator JSON file ({kind, source_modes, target_modes, matrix}).
        op: PathBuf,
    },
    /// Implementer family on truncated bosonic Fock spaces.
    Implement {
        /// Operator JSON file ({kind, source_modes, target_modes, matrix}).
        op: PathBuf,
        /// Particle-number cutoffs; a comma list runs a ladder.
        #[arg(long, value_delimiter = ',', default_value = "24")]
        n_max: Vec<usize>,
        /// Longest multi-index of the family.
        #[arg(long, default_value_t = 2)]
        n_terms: usize,
        /// Source states with at most this many particles are probed.
        #[arg(long, default_value_t = 1)]
        probe: usize,
        /// Include the vectors Ψ_α Ω (largest cutoff) in the report.
        #[arg(long)]
        dump_vacuum: bool,
    },
}

#[derive(Args, Debug)]
pub struct ChargeArgs {
    /// Operator JSON file ({kind, source_modes, target_modes, matrix}).
    pub op: PathBuf,
    /// Gauge group JSON file ({generators, source_generators}).
    pub group: PathBuf,
    /// Bosonic cutoff (CCR maps only).
    #[arg(long, default_value_t = 24)]
    pub n_max: usize,
    /// Longest multi-index (CCR maps only).
    #[arg(long, default_value_t = 3)]
    pub n_terms: usize,
    /// Residual threshold; defaults to 1e-9 (CAR) and 1e-5 (CCR).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum ExampleAction {
    /// The curve V(φ) and its state-operator eigenvalue λ_φ.
    Vphi {
        /// Angles; accepts numbers and forms like 'pi/8', '-pi/4', '3pi/4'.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_angle,
              default_value = "-pi/4,0,pi/8,pi/4")]
        phi: Vec<f64>,
        /// Source modes.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Non-multiplicativity of χ.
    Chi {
        /// Source modes.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
}

#[derive(Args, Debug)]
pub struct DiracArgs {
    /// Fourier cutoffs of the ladder, strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "256,1024,4096")]
    pub n_max_ladder: Vec<usize>,
    /// Cutoffs for the localization check on functions supported off I.
    #[arg(long, value_delimiter = ',', default_value = "32,128,512")]
    pub localization: Vec<usize>,
    /// Skip the localization check.
    #[arg(long)]
    pub no_localization: bool,
}

/// Parse `x`, `pi`, `pi/d`, `a*pi/d`, `api/d` with optional sign.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace('π', "pi").replace(' ', "");
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| format!("bad angle '{s}'"))?),
        None => (t.clone(), 1.0),
    };
    let coef = num
        .strip_suffix("pi")
        .ok_or_else(|| format!("bad angle '{s}'"))?
        .trim_end_matches('*');
    let a = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| format!("bad angle '{s}'"))?,
    };
    Ok(a * std::f64::consts::PI / den)
}

/// A rendered command result.
pub struct Report {
    pub json: Value,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
    pub pass: bool,
}

impl Report {
    fn render(&self, out: &OutputArgs) -> String {
        if out.csv {
            let mut s = self.headers.join(",");
            s.push('\n');
            for r in &self.rows {
                let cells: Vec<String> = r.iter().map(|c| tidy(c)).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        } else if out.plot_data {
            let blocks: Vec<String> = self
                .series
                .iter()
                .map(|(name, pts)| {
                    let mut b = format!("# {name}\n");
                    for (x, y) in pts {
                        b.push_str(&format!("{} {}\n", num(*x), num(*y)));
                    }
                    b
                })
                .collect();
            blocks.join("\n")
        } else {
            let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
            s.push('\n');
            s
        }
    }
}

/// Shortest round-trip form, in exponent notation for small magnitudes.
fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn tidy(cell: &str) -> String {
    match cell.parse::<f64>() {
        Ok(x) if cell.contains('.') => num(x),
        _ => cell.to_string(),
    }
}

fn kv_rows(items: &[(&str, String)]) -> Vec<Vec<String>> {
    items.iter().map(|(k, v)| vec![k.to_string(), v.clone()]).collect()
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

/// JSON cannot hold infinities; they are reported as `null`.
fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn vectors_json(vs: &[Vector]) -> Value {
    json!(vs.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn load(path: &Path, kind: Kind) -> Result<BogoliubovMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let v = io::parse_operator(&text)?;
    if v.kind != kind {
        return Err(Error::Input(format!("expected a {kind} operator, found {}", v.kind)));
    }
    Ok(v)
}

fn load_any(path: &Path) -> Result<BogoliubovMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    io::parse_operator(&text)
}

fn require_valid(report_pass: bool, what: &str) -> Result<()> {
    if report_pass {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} is not a Bogoliubov isometry within tolerance")))
    }
}

pub fn car_analyze(v: &BogoliubovMap, tol: &Tolerances) -> Result<Report> {
    let val = selfdual::validate(v, tol.composite)?;
    require_valid(val.pass, "operator")?;
    let idx = v.index_data();
    let s = structure::state_operator(v);
    let profile = structure::spectral_profile(&s, tol.rank)?;
    let spectrum = linalg::herm_eig(&s).values;
    let purity = structure::purity_class(v, tol.rank);
    let comm = structure::commutator_rank(v, tol.rank);
    let data = structure::decompose(v, tol.rank)?;
    let chi = structure::chi_character(v, tol.rank)?;
    let r = &data.residuals;
    let worst = [
        r.pv_pullback,
        r.reassembly,
        r.w_offdiag,
        r.u_unitarity,
        r.t_antisymmetry,
        r.t_h,
        r.t_equation,
        r.t_of_w,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let pass = worst <= tol.composite && r.h_of_w == 0;
    let json = json!({
        "kind": v.kind,
        "source_modes": v.source_modes,
        "target_modes": v.target_modes,
        "validation": val,
        "index": idx,
        "state_operator": {
            "spectrum": spectrum,
            "profile": profile,
            "purity": purity,
            "commutator_rank": comm,
        },
        "canonical": {
            "n_v": data.n_v,
            "l_v": data.l_v,
            "m_v": data.m_v,
            "t_v": matrix_to_json(data.t_v()),
            "h_v": matrix_to_json(data.h_v()),
            "k_v": matrix_to_json(&data.k_v),
            "residuals": r,
        },
        "chi": chi,
        "pass": pass,
    });
    let rows = kv_rows(&[
        ("ind", idx.ind.to_string()),
        ("m_v", data.m_v.to_string()),
        ("n_v", data.n_v.to_string()),
        ("l_v", data.l_v.to_string()),
        ("codim", profile.codim.to_string()),
        ("half_multiplicity", profile.half_multiplicity.to_string()),
        ("commutator_rank", comm.to_string()),
        ("chi", chi.to_string()),
        ("pv_pullback", r.pv_pullback.to_string()),
        ("reassembly", r.reassembly.to_string()),
        ("w_offdiag", r.w_offdiag.to_string()),
        ("t_equation", r.t_equation.to_string()),
    ]);
    let series = vec![(
        "state_operator_spectrum".to_string(),
        spectrum.iter().enumerate().map(|(i, &x)| (i as f64, x)).collect(),
    )];
    Ok(Report {
        json,
        headers: vec!["quantity", "value"],
        rows,
        series,
        pass,
    })
}

pub fn car_implement(v: &BogoliubovMap, tol: &Tolerances, dump_vacuum: bool) -> Result<Report> {
    let val = selfdual::validate(v, tol.composite)?;
    require_valid(val.pass, "operator")?;
    let data = structure::decompose(v, tol.rank)?;
    let rep = fock::build_rep(v.target_modes, Some(config::DEFAULT_CAR_MODE_CAP))?;
    let family = implementers::implementers(v, &data, &rep)?;
    let cuntz = implementers::verify_cuntz(&family, &implementers::default_samples(v.source_modes, 4), tol.composite);
    let (_, decomposition) = implementers::decomposition_subspaces(v, &rep, tol.rank)?;
    let decomposition_ok = decomposition.max_overlap <= tol.composite
        && decomposition.completeness_residual <= tol.composite
        && decomposition.expectation_spread <= tol.composite;
    let top = 2 * v.target_modes - v.source_modes;
    let (stats_json, stats_ok, lambda_row) = if data.m_v == 0 {
        (json!({"skipped": "M_V = 0"}), true, None)
    } else if top > config::DEFAULT_CAR_MODE_CAP {
        (json!({"skipped": format!("extension needs {top} modes")}), true, None)
    } else {
        let st = statistics::bosonized_statistics(&family, tol.rank)?;
        let expected = 1.0 / family.len() as f64;
        let err = (st.lambda_hat - expected).abs();
        let ok = err <= tol.composite
            && st.report.lambda_residual <= tol.composite
            && st.report.exchange_residual <= tol.composite
            && st.report.unitarity_residual <= tol.composite;
        (
            json!({"report": st.report, "lambda_expected": expected, "lambda_error": err}),
            ok,
            Some(st.lambda_hat),
        )
    };
    let pass = cuntz.pass && decomposition_ok && stats_ok;
    let mut json = json!({
        "kind": v.kind,
        "source_modes": v.source_modes,
        "target_modes": v.target_modes,
        "index": v.index_data(),
        "members": family.len(),
        "indices": family.indices,
        "d_norm": family.d_norm,
        "parity_shift": family.parity_shift,
        "cuntz": cuntz,
        "decomposition": decomposition,
        "statistics": stats_json,
        "pass": pass,
    });
    if dump_vacuum {
        json["vacuum_images"] = vectors_json(&family.vacuum_images());
    }
    let mut items = vec![
        ("members", family.len().to_string()),
        ("gram_residual", cuntz.gram_residual.to_string()),
        ("completeness_residual", cuntz.completeness_residual.to_string()),
        ("intertwining_residual", cuntz.intertwining_residual.to_string()),
        ("parity_leak", cuntz.parity_leak.to_string()),
        ("decomposition_overlap", decomposition.max_overlap.to_string()),
        ("decomposition_completeness", decomposition.completeness_residual.to_string()),
    ];
    if let Some(l) = lambda_row {
        items.push(("lambda_hat", l.to_string()));
    }
    let series = vec![(
        "vacuum_image_norms".to_string(),
        family
            .vacuum_images()
            .iter()
            .enumerate()
            .map(|(i, x)| (i as f64, linalg::vnorm(x)))
            .collect(),
    )];
    Ok(Report {
        json,
        headers: vec!["quantity", "value"],
        rows: kv_rows(&items),
        series,
        pass,
    })
}

pub fn ccr_analyze(v: &BogoliubovMap, tol: &Tolerances) -> Result<Report> {
    let val = ccr::structure::validate_ccr(v, tol.composite)?;
    require_valid(val.pass, "operator")?;
    let data = ccr::structure::decompose_ccr(v, tol.rank)?;
    let r = &data.residuals;
    let worst = [
        r.pv_pullback,
        r.reassembly,
        r.w_offdiag,
        r.u_unitarity,
        r.z_symmetry,
        r.z_equation,
        r.k_gram,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let pass = worst <= tol.composite && r.z_margin > 0.0;
    let json = json!({
        "kind": v.kind,
        "source_modes": v.source_modes,
        "target_modes": v.target_modes,
        "validation": {
            "isometry_residual": val.isometry_residual,
            "conjugation_residual": val.conjugation_residual,
            "kernel_dim": val.kernel_dim,
            "kappa_margin": finite(val.kappa_margin),
            "pass": val.pass,
        },
        "index": v.index_data(),
        "canonical": {
            "m_v": data.m_v,
            "z_v": matrix_to_json(data.z_v()),
            "z_norm": linalg::op_norm(data.z_v()),
            "k_v": matrix_to_json(&data.k_v),
            "residuals": {
                "pv_pullback": r.pv_pullback,
                "reassembly": r.reassembly,
                "w_offdiag": r.w_offdiag,
                "u_unitarity": r.u_unitarity,
                "z_symmetry": r.z_symmetry,
                "z_margin": r.z_margin,
                "z_equation": r.z_equation,
                "k_gram": r.k_gram,
                "kappa_margin": finite(r.kappa_margin),
            },
        },
        "pass": pass,
    });
    let rows = kv_rows(&[
        ("ind", v.index_data().ind.to_string()),
        ("m_v", data.m_v.to_string()),
        ("z_norm", linalg::op_norm(data.z_v()).to_string()),
        ("pv_pullback", r.pv_pullback.to_string()),
        ("reassembly", r.reassembly.to_string()),
        ("z_equation", r.z_equation.to_string()),
        ("k_gram", r.k_gram.to_string()),
    ]);
    let series = vec![(
        "z_singular_values".to_string(),
        linalg::singular_values(data.z_v())
            .iter()
            .enumerate()
            .map(|(i, &x)| (i as f64, x))
            .collect(),
    )];
    Ok(Report {
        json,
        headers: vec!["quantity", "value"],
        rows,
        series,
        pass,
    })
}

pub fn ccr_implement(
    v: &BogoliubovMap,
    tol: &Tolerances,
    n_maxes: &[usize],
    n_terms: usize,
    probe: usize,
    dump_vacuum: bool,
) -> Result<Report> {
    if n_maxes.is_empty() || n_maxes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("cutoffs must be strictly increasing".into()));
    }
    let val = ccr::structure::validate_ccr(v, tol.composite)?;
    require_valid(val.pass, "operator")?;
    let data = ccr::structure::decompose_ccr(v, tol.rank)?;
    let samples = implementers::default_samples(v.source_modes, 2);
    let mut levels = Vec::new();
    let mut last = None;
    for &nm in n_maxes {
        let src = ccr::fock::build_rep_ccr(v.source_modes, nm, Some(config::DEFAULT_CCR_DIM_CAP))?;
        let tgt = ccr::fock::build_rep_ccr(v.target_modes, nm, Some(config::DEFAULT_CCR_DIM_CAP))?;
        let family = ccr_impl::implementers_ccr(v, &data, &src, &tgt, n_terms, tol.composite)?;
        let report = ccr_impl::verify_ccr_family(&family, &src, &tgt, probe, &samples)?;
        levels.push(report);
        last = Some((family, tgt));
    }
    let (family, tgt) = last.expect("ladder is non-empty");
    let top = levels.last().expect("ladder is non-empty");
    let certified = ccr_impl::certify(top, tol.cutoff);
    let (_, decomposition) = ccr_impl::decomposition_subspaces_ccr(v, &tgt, n_terms, &samples, tol.rank)?;
    let pass = certified.is_ok();
    let mut json = json!({
        "kind": v.kind,
        "source_modes": v.source_modes,
        "target_modes": v.target_modes,
        "index": v.index_data(),
        "n_terms": n_terms,
        "members": family.len(),
        "indices": family.indices,
        "levels": levels,
        "decomposition": decomposition,
        "certified_tol": tol.cutoff,
        "certificate": match &certified { Ok(()) => Value::Null, Err(e) => json!(e.to_string()) },
        "pass": pass,
    });
    if dump_vacuum {
        json["vacuum_images"] = vectors_json(&family.vacuum_images());
    }
    let rows = levels
        .iter()
        .map(|l| {
            vec![
                l.n_max.to_string(),
                l.members.to_string(),
                l.gram_residual.to_string(),
                l.psi0_residual.to_string(),
                l.field_intertwining.to_string(),
                l.weyl_intertwining.to_string(),
                l.shift_commutator.to_string(),
                l.vacuum_consistency.to_string(),
                l.completeness_defect.to_string(),
            ]
        })
        .collect();
    type Field = fn(&ccr_impl::CcrFamilyReport) -> f64;
    let fields: [(&str, Field); 4] = [
        ("gram_residual", |l| l.gram_residual),
        ("field_intertwining", |l| l.field_intertwining),
        ("weyl_intertwining", |l| l.weyl_intertwining),
        ("vacuum_consistency", |l| l.vacuum_consistency),
    ];
    let series = fields
        .iter()
        .map(|(name, f)| (name.to_string(), levels.iter().map(|l| (l.n_max as f64, f(l))).collect()))
        .collect();
    Ok(Report {
        json,
        headers: vec![
            "n_max",
            "members",
            "gram_residual",
            "psi0_residual",
            "field_intertwining",
            "weyl_intertwining",
            "shift_commutator",
            "vacuum_consistency",
            "completeness_defect",
        ],
        rows,
        series,
        pass,
    })
}

pub fn charge(v: &BogoliubovMap, group_path: &Path, args: &ChargeArgs, tol: &Tolerances) -> Result<Report> {
    let text =
        std::fs::read_to_string(group_path).map_err(|e| Error::Input(format!("{}: {e}", group_path.display())))?;
    let file = io::parse_group(&text)?;
    let group = GaugeGroup::from_file(&file, v.source_modes, v.target_modes, tol.composite)
        .map_err(|e| Error::Input(e.to_string()))?;
    let invariance = gauge::is_gauge_invariant(v, &group, tol.composite)?;
    let (report, threshold) = match v.kind {
        Kind::Car => {
            require_valid(selfdual::validate(v, tol.composite)?.pass, "operator")?;
            let data = structure::decompose(v, tol.rank)?;
            let rep = fock::build_rep(v.target_modes, Some(config::DEFAULT_CAR_MODE_CAP))?;
            let family = implementers::implementers(v, &data, &rep)?;
            let r = gauge::charge_decomposition_car(v, &data, &family, &group, tol.composite)?;
            (r, args.tol.unwrap_or(1e-9))
        }
        Kind::Ccr => {
            require_valid(ccr::structure::validate_ccr(v, tol.composite)?.pass, "operator")?;
            let data = ccr::structure::decompose_ccr(v, tol.rank)?;
            let cap = Some(config::DEFAULT_CCR_DIM_CAP);
            let src = ccr::fock::build_rep_ccr(v.source_modes, args.n_max, cap)?;
            let tgt = ccr::fock::build_rep_ccr(v.target_modes, args.n_max, cap)?;
            let family = ccr_impl::implementers_ccr(v, &data, &src, &tgt, args.n_terms, tol.composite)?;
            let r = gauge::charge_decomposition_ccr(v, &data, &family, &tgt, &group, tol.composite)?;
            (r, args.tol.unwrap_or(1e-5))
        }
    };
    let pass = report.max_residual <= threshold;
    let rows = report
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                i.to_string(),
                e.det_h[0].to_string(),
                e.det_h[1].to_string(),
                e.pair_invariance.to_string(),
                e.h_invariance.to_string(),
                e.k_invariance.to_string(),
                e.leakage.to_string(),
                e.equivalence_residual.to_string(),
            ]
        })
        .collect();
    let series = vec![(
        "equivalence_residual".to_string(),
        report
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i as f64, e.equivalence_residual))
            .collect(),
    )];
    let json = json!({
        "kind": v.kind,
        "source_modes": v.source_modes,
        "target_modes": v.target_modes,
        "generators": group.len(),
        "invariance": invariance,
        "charge": report,
        "threshold": threshold,
        "pass": pass,
    });
    Ok(Report {
        json,
        headers: vec![
            "generator",
            "det_h_re",
            "det_h_im",
            "pair_invariance",
            "h_invariance",
            "k_invariance",
            "leakage",
            "equivalence_residual",
        ],
        rows,
        series,
        pass,
    })
}

pub fn example_vphi(phis: &[f64], k: usize, tol: &Tolerances) -> Result<Report> {
    if phis.is_empty() {
        return Err(Error::Input("no angles given".into()));
    }
    let reports: Vec<experiments::VphiReport> = phis
        .iter()
        .map(|&p| experiments::analyze_vphi(p, k, tol.rank))
        .collect::<Result<_>>()?;
    let pass = reports.iter().all(|r| {
        (r.lambda_measured - r.lambda_formula).abs() <= tol.structural
            && r.state_operator_residual <= tol.structural
            && r.index == -2
    });
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.phi.to_string(),
                r.lambda_formula.to_string(),
                r.lambda_measured.to_string(),
                r.state_operator_residual.to_string(),
                r.index.to_string(),
                r.chi.to_string(),
            ]
        })
        .collect();
    let series = vec![
        ("lambda_measured".to_string(), reports.iter().map(|r| (r.phi, r.lambda_measured)).collect()),
        ("lambda_formula".to_string(), reports.iter().map(|r| (r.phi, r.lambda_formula)).collect()),
    ];
    Ok(Report {
        json: json!({ "examples": reports, "tol": tol.structural, "pass": pass }),
        headers: vec!["phi", "lambda_formula", "lambda_measured", "state_operator_residual", "index", "chi"],
        rows,
        series,
        pass,
    })
}

pub fn example_chi(k: usize, tol: &Tolerances) -> Result<Report> {
    let r = experiments::run_chi_example(k, tol.rank)?;
    let rows = kv_rows(&[
        ("composition_residual", r.composition_residual.to_string()),
        ("u_unitarity", r.u_unitarity.to_string()),
        ("chi_u", r.chi_u.to_string()),
        ("chi_v_3pi4", r.chi_v_3pi4.to_string()),
        ("chi_uv", r.chi_uv.to_string()),
        ("chi_product", r.chi_product.to_string()),
        ("multiplicative", r.multiplicative.to_string()),
    ]);
    let series = vec![(
        "u11_singular_values".to_string(),
        r.u11_singular_values
            .iter()
            .enumerate()
            .map(|(i, &x)| (i as f64, x))
            .collect(),
    )];
    let pass = r.pass;
    Ok(Report {
        json: to_value(&r),
        headers: vec!["quantity", "value"],
        rows,
        series,
        pass,
    })
}

pub fn dirac(args: &DiracArgs) -> Result<Report> {
    let ladder = experiments::dirac_hs_ladder(&args.n_max_ladder)?;
    let mut localization = Vec::new();
    let loc_levels: &[usize] = if args.no_localization { &[] } else { &args.localization };
    for &n in loc_levels {
        let t = experiments::DiracTruncation::new(n).map_err(|e| Error::Input(e.to_string()))?;
        localization.push(experiments::dirac_localization(&t, 2)?);
    }
    let loc_decreasing = localization
        .windows(2)
        .all(|w| w[1].max_residual <= w[0].max_residual);
    let pass = ladder.monotone && ladder.below_bounds && loc_decreasing;
    let rows = ladder
        .levels
        .iter()
        .map(|l| {
            vec![
                l.n_max.to_string(),
                l.m_max.to_string(),
                l.plus_minus.to_string(),
                l.minus_plus.to_string(),
                (ladder.bound_plus_minus - l.plus_minus).to_string(),
                (ladder.bound_minus_plus - l.minus_plus).to_string(),
            ]
        })
        .collect();
    let mut series = vec![
        (
            "plus_minus".to_string(),
            ladder.levels.iter().map(|l| (l.n_max as f64, l.plus_minus)).collect(),
        ),
        (
            "minus_plus".to_string(),
            ladder.levels.iter().map(|l| (l.n_max as f64, l.minus_plus)).collect(),
        ),
    ];
    if !localization.is_empty() {
        series.push((
            "localization_residual".to_string(),
            localization.iter().map(|l| (l.n_max as f64, l.max_residual)).collect(),
        ));
    }
    Ok(Report {
        json: json!({
            "ladder": ladder,
            "localization": localization,
            "localization_decreasing": loc_decreasing,
            "pass": pass,
        }),
        headers: vec!["n_max", "m_max", "plus_minus", "minus_plus", "gap_plus_minus", "gap_minus_plus"],
        rows,
        series,
        pass,
    })
}

pub fn execute(cli: &Cli, tol: &Tolerances) -> Result<Report> {
    match &cli.command {
        Command::Car { action } => match action {
            CarAction::Analyze { op } => car_analyze(&load(op, Kind::Car)?, tol),
            CarAction::Implement { op, dump_vacuum } => car_implement(&load(op, Kind::Car)?, tol, *dump_vacuum),
        },
        Command::Ccr { action } => match action {
            CcrAction::Analyze { op } => ccr_analyze(&load(op, Kind::Ccr)?, tol),
            CcrAction::Implement {
                op,
                n_max,
                n_terms,
                probe,
                dump_vacuum,
            } => ccr_implement(&load(op, Kind::Ccr)?, tol, n_max, *n_terms, *probe, *dump_vacuum),
        },
        Command::Charge(args) => charge(&load_any(&args.op)?, &args.group, args, tol),
        Command::Example { action } => match action {
            ExampleAction::Vphi { phi, k } => example_vphi(phi, *k, tol),
            ExampleAction::Chi { k } => example_chi(*k, tol),
        },
        Command::Dirac(args) => dirac(args),
    }
}

/// Exit code for a library error: malformed or inconsistent input is an
/// input error, failed numerical certification an assertion failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::Cutoff(_) => EXIT_ASSERTION,
        _ => EXIT_INPUT,
    }
}

/// Run the command line `argv` (including the program name).
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let tol = match Tolerances::from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let report = match execute(&cli, &tol) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = report.render(&cli.output);
    let written = match &cli.output.out {
        Some(p) => std::fs::write(p, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    if report.pass {
        EXIT_OK
    } else {
        eprintln!("assertion failure: see report");
        EXIT_ASSERTION
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_parse() {
        let pi = std::f64::consts::PI;
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("-pi/4").unwrap(), -pi / 4.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * pi / 4.0);
        assert_eq!(parse_angle("3*pi/4").unwrap(), 3.0 * pi / 4.0);
        assert_eq!(parse_angle("pi").unwrap(), pi);
        assert!(parse_angle("tau").is_err());
    }

    #[test]
    fn parse_errors_are_input_errors() {
        assert_eq!(cli_main(["fockimpl", "frobnicate"]), EXIT_INPUT);
        assert_eq!(cli_main(["fockimpl", "car", "analyze", "/nonexistent/op.json"]), EXIT_INPUT);
        assert_eq!(cli_main(["fockimpl", "dirac", "--n-max-ladder", "64,16", "--no-localization"]), EXIT_INPUT);
    }

    #[test]
    fn csv_and_plot_rendering() {
        let r = example_vphi(&[0.0, 0.3], 3, &Tolerances::default()).unwrap();
        let csv = r.render(&OutputArgs {
            out: None,
            csv: true,
            plot_data: false,
        });
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("phi,lambda_formula,"));
        let plot = r.render(&OutputArgs {
            out: None,
            csv: false,
            plot_data: true,
        });
        assert!(plot.starts_with("# lambda_measured\n0 0.5"));
        assert_eq!(plot.matches("# ").count(), 2);
    }
}
