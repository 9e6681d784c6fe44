//! Operator file format: a single self-describing JSON document with
//! explicit [re, im] pairs, row-major, left factor major. Binary floats
//! round-trip bit-exactly through serialization.

use num_complex::Complex64;
use serde::Deserialize;
use sepwit_core::{BipartiteOperator, ComplexMatrix};

/// `kind` tags accepted in operator files.
pub const KINDS: [&str; 3] = ["state", "witness", "map-choi"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    #[serde(default)]
    pub kind: Option<String>,
    /// row-major [re, im] pairs of the (dimA*dimB)^2 matrix
    pub data: Vec<[f64; 2]>,
}

pub fn parse_operator_str(text: &str, source: &str) -> Result<BipartiteOperator, String> {
    let file: OperatorFile = serde_json::from_str(text)
        .map_err(|e| format!("{source}: line {}, column {}: {e}", e.line(), e.column()))?;
    if let Some(kind) = &file.kind {
        if !KINDS.contains(&kind.as_str()) {
            return Err(format!(
                "{source}: unknown kind {kind:?} (expected one of {KINDS:?})"
            ));
        }
    }
    let side = file.dim_a * file.dim_b;
    if side == 0 {
        return Err(format!("{source}: dimensions must be positive"));
    }
    if file.data.len() != side * side {
        return Err(format!(
            "{source}: data length {} does not match (dimA*dimB)^2 = {}",
            file.data.len(),
            side * side
        ));
    }
    let mut entries = Vec::with_capacity(file.data.len());
    for (i, [re, im]) in file.data.iter().enumerate() {
        if !re.is_finite() || !im.is_finite() {
            return Err(format!("{source}: non-finite entry at index {i}"));
        }
        entries.push(Complex64::new(*re, *im));
    }
    let mat = ComplexMatrix::new(side, side, entries).map_err(|e| format!("{source}: {e}"))?;
    BipartiteOperator::new(file.dim_a, file.dim_b, mat).map_err(|e| format!("{source}: {e}"))
}

pub fn parse_operator_file(path: &str) -> Result<BipartiteOperator, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    parse_operator_str(&text, path)
}

/// JSON value for a complex matrix as row-major [re, im] pairs.
pub fn matrix_json(m: &ComplexMatrix) -> serde_json::Value {
    let data: Vec<serde_json::Value> = m
        .data()
        .iter()
        .map(|z| serde_json::json!([z.re, z.im]))
        .collect();
    serde_json::json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "data": data,
    })
}

pub fn vector_json(v: &[Complex64]) -> serde_json::Value {
    serde_json::Value::Array(v.iter().map(|z| serde_json::json!([z.re, z.im])).collect())
}

/// Serialize an operator back to the file schema (bit-exact floats).
pub fn operator_json(op: &BipartiteOperator, kind: Option<&str>) -> serde_json::Value {
    let data: Vec<serde_json::Value> = op
        .matrix()
        .data()
        .iter()
        .map(|z| serde_json::json!([z.re, z.im]))
        .collect();
    let mut obj = serde_json::Map::new();
    obj.insert("dimA".into(), serde_json::json!(op.dim_a()));
    obj.insert("dimB".into(), serde_json::json!(op.dim_b()));
    if let Some(k) = kind {
        obj.insert("kind".into(), serde_json::json!(k));
    }
    obj.insert("data".into(), serde_json::Value::Array(data));
    serde_json::Value::Object(obj)
}
