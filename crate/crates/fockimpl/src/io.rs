//! JSON file formats: operators and gauge groups.
//!
//! Complex entries are `[re, im]` pairs; matrices are lists of rows.
//! Floats round-trip bit-exactly through load and save.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, Mat};
use crate::selfdual::{BogoliubovMap, Kind};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(a: &Mat) -> JsonMatrix {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<Mat> {
    let r = rows.len();
    let cols = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != cols) {
        return Err(Error::Input("ragged matrix rows".into()));
    }
    let a = Mat::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1]));
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    Ok(a)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OperatorFile {
    pub kind: Kind,
    pub source_modes: usize,
    pub target_modes: usize,
    pub matrix: JsonMatrix,
}

impl OperatorFile {
    pub fn from_map(v: &BogoliubovMap) -> Self {
        OperatorFile {
            kind: v.kind,
            source_modes: v.source_modes,
            target_modes: v.target_modes,
            matrix: matrix_to_json(&v.matrix),
        }
    }

    pub fn to_map(&self) -> Result<BogoliubovMap> {
        let a = matrix_from_json(&self.matrix)?;
        BogoliubovMap::new(self.kind, self.source_modes, self.target_modes, a)
            .map_err(|e| Error::Input(e.to_string()))
    }
}

pub fn parse_operator(text: &str) -> Result<BogoliubovMap> {
    let f: OperatorFile = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    f.to_map()
}

pub fn operator_to_string(v: &BogoliubovMap) -> String {
    serde_json::to_string(&OperatorFile::from_map(v)).expect("plain data serializes")
}

pub fn load_operator(path: &Path) -> Result<BogoliubovMap> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_operator(&text)
}

pub fn save_operator(path: &Path, v: &BogoliubovMap) -> Result<()> {
    std::fs::write(path, operator_to_string(v))?;
    Ok(())
}

/// Gauge group as a list of generator matrices. Each generator is either a
/// `U11` block (`m x m`) or the full `2m x 2m` matrix at the target level.
/// Source-level generators are optional; when absent, the compression of
/// each target generator to the first `n` modes is used.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupFile {
    pub generators: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_generators: Option<Vec<JsonMatrix>>,
}

pub fn parse_group(text: &str) -> Result<GroupFile> {
    serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))
}
