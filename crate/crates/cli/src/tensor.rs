//! Tensor files.
//!
//! * `NAME.json` sidecar: `{"name", "shape", "dtype": "f32",
//!   "byte_order": "little", "data"?}` next to raw little-endian `f32`
//!   values in row-major order, by default in `NAME.bin`. A relative
//!   `data` path is resolved against the sidecar's directory.
//! * `NAME.csv`: one value per line, shape `[lines]`. Lines holding the
//!   same number `c > 1` of comma-separated values give shape `[lines, c]`.
//!
//! NaN and infinities are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use pofx_core::LayerTensor;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub byte_order: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn load(path: &Path) -> CliResult<LayerTensor> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => load_sidecar(path),
        Some("csv") => load_csv(path),
        _ => Err(io_err(path, "expected a .json sidecar or a .csv file")),
    }
}

fn load_sidecar(path: &Path) -> CliResult<LayerTensor> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let meta: Sidecar = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    if meta.dtype != "f32" || meta.byte_order != "little" {
        return Err(io_err(path, "only dtype f32 with byte_order little is supported"));
    }
    let data_path = match &meta.data {
        Some(p) => path.parent().unwrap_or(Path::new("")).join(p),
        None => path.with_extension("bin"),
    };
    let bytes = fs::read(&data_path).map_err(|e| io_err(&data_path, e))?;
    let count: usize = meta.shape.iter().product();
    if bytes.len() != 4 * count {
        return Err(io_err(
            &data_path,
            format!("{} bytes, expected {} for shape {:?}", bytes.len(), 4 * count, meta.shape),
        ));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    LayerTensor::from_f32(meta.name, meta.shape, &values).map_err(|e| io_err(path, e))
}

fn load_csv(path: &Path) -> CliResult<LayerTensor> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let mut values = Vec::new();
    let mut widths = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        widths.push(rec.len());
        for field in &rec {
            let v: f32 = field
                .parse()
                .map_err(|_| io_err(path, format!("not a number: {field:?}")))?;
            values.push(v);
        }
    }
    let shape = match widths.first() {
        Some(&w) if w > 1 && widths.iter().all(|&x| x == w) => vec![widths.len(), w],
        _ if widths.iter().all(|&x| x == 1) => vec![values.len()],
        _ => return Err(io_err(path, "rows have different lengths")),
    };
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("tensor").to_string();
    LayerTensor::from_f32(name, shape, &values).map_err(|e| io_err(path, e))
}
