//! Tolerances and resource caps.

use crate::error::{Error, Result};

/// Numerical tolerances used by checks and rank decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Identities that hold entry-wise up to rounding.
    pub structural: f64,
    /// Identities of composite constructions (products of several factors).
    pub composite: f64,
    /// Relative singular-value cut for kernels, ranks and pseudoinverses.
    pub rank: f64,
    /// Cap for cutoff-sensitive bosonic identities at the largest ladder level.
    pub cutoff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structural: 1e-12,
            composite: 1e-10,
            rank: 1e-10,
            cutoff: 1e-6,
        }
    }
}

pub const TOL_ENV: &str = "FOCKIMPL_TOL";

impl Tolerances {
    /// Parse an override string. A bare number sets the composite tolerance;
    /// otherwise a comma list of `structural=`, `composite=`, `rank=`, `cutoff=`.
    pub fn parse_override(&self, text: &str) -> Result<Tolerances> {
        let mut out = *self;
        let text = text.trim();
        if text.is_empty() {
            return Ok(out);
        }
        if let Ok(x) = text.parse::<f64>() {
            out.composite = check_positive("composite", x)?;
            return Ok(out);
        }
        for item in text.split(',') {
            let (key, val) = item
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("bad tolerance item '{item}'")))?;
            let x: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad tolerance value '{val}'")))?;
            let x = check_positive(key.trim(), x)?;
            match key.trim() {
                "structural" => out.structural = x,
                "composite" => out.composite = x,
                "rank" => out.rank = x,
                "cutoff" => out.cutoff = x,
                other => return Err(Error::Input(format!("unknown tolerance key '{other}'"))),
            }
        }
        Ok(out)
    }

    /// Defaults, overridden by `FOCKIMPL_TOL` when set.
    pub fn from_env() -> Result<Tolerances> {
        match std::env::var(TOL_ENV) {
            Ok(s) => Tolerances::default().parse_override(&s),
            Err(_) => Ok(Tolerances::default()),
        }
    }
}

fn check_positive(key: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::Input(format!("tolerance {key} must be positive, got {x}")))
    }
}

/// Largest number of fermionic modes for which Fock matrices are built.
pub const DEFAULT_CAR_MODE_CAP: usize = 14;
/// Largest bosonic Fock dimension for which matrices are built.
pub const DEFAULT_CCR_DIM_CAP: usize = 20_000;
