//! File formats: system and jitter JSON, trajectory CSV, input-sample
//! lists.
//!
//! Parsing reports positions: a ragged matrix names the offending row, a
//! bad entry names its (row, column), a bad line in a samples file names
//! its line number. Numbers are written with enough digits to round-trip
//! f64 exactly, so rewriting a file the toolkit produced changes nothing.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::jitter::{JitterModel, JitterSequence};
use crate::lti::{ContinuousStateSpace, DiscreteStateSpace, TimeVaryingStateSpace};
use crate::matfun::Matrix;
use crate::sim::{SampledTrajectory, Vector};

/// RNG identity stamped into generated jitter files. A file claiming a
/// different generator was not produced by this toolkit's stream and its
/// seed would not reproduce, so loading one is refused.
const GENERATOR_ID: &str = "chacha8";

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn get_key<'v>(obj: &'v Map<String, Value>, key: &str) -> Result<&'v Value> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing key \"{key}\"")))
}

fn as_object(v: &Value) -> Result<&Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Parse("top level must be a JSON object".to_string()))
}

fn parse_matrix(value: &Value, name: &str) -> Result<Matrix> {
    let rows = value.as_array().ok_or_else(|| {
        Error::Parse(format!("matrix \"{name}\" must be an array of rows"))
    })?;
    if rows.is_empty() {
        return Err(Error::Parse(format!("matrix \"{name}\" has no rows")));
    }
    let mut data = Vec::new();
    let mut ncols = 0usize;
    for (i, row) in rows.iter().enumerate() {
        let cols = row.as_array().ok_or_else(|| {
            Error::Parse(format!("matrix \"{name}\": row {i} must be an array"))
        })?;
        if i == 0 {
            ncols = cols.len();
            if ncols == 0 {
                return Err(Error::Parse(format!("matrix \"{name}\": row 0 is empty")));
            }
        } else if cols.len() != ncols {
            return Err(Error::Parse(format!(
                "matrix \"{name}\": row {i} has {} entries, expected {ncols}",
                cols.len()
            )));
        }
        for (j, v) in cols.iter().enumerate() {
            let x = v.as_f64().ok_or_else(|| {
                Error::Parse(format!(
                    "matrix \"{name}\": entry ({i},{j}) is not a number"
                ))
            })?;
            data.push(x);
        }
    }
    Ok(Matrix::from_row_slice(rows.len(), ncols, &data))
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!(m[(i, j)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn parse_optional_positive(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let x = v
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("\"{key}\" must be a number")))?;
            if x > 0.0 && x.is_finite() {
                Ok(Some(x))
            } else {
                Err(Error::Parse(format!("\"{key}\" must be positive, got {x}")))
            }
        }
    }
}

/// Parse the system schema {"A", "B", "C", "D", optional "ts"}, matrices
/// as row-major nested arrays.
pub fn parse_system(text: &str) -> Result<(ContinuousStateSpace, Option<f64>)> {
    let value = parse_json(text)?;
    let obj = as_object(&value)?;
    let a = parse_matrix(get_key(obj, "A")?, "A")?;
    let b = parse_matrix(get_key(obj, "B")?, "B")?;
    let c = parse_matrix(get_key(obj, "C")?, "C")?;
    let d = parse_matrix(get_key(obj, "D")?, "D")?;
    let ts = parse_optional_positive(obj, "ts")?;
    Ok((ContinuousStateSpace::new(a, b, c, d)?, ts))
}

pub fn read_system(path: &Path) -> Result<(ContinuousStateSpace, Option<f64>)> {
    parse_system(&read_to_string(path)?)
}

pub fn system_to_json(sys: &ContinuousStateSpace, ts: Option<f64>) -> Value {
    let mut obj = Map::new();
    obj.insert("A".to_string(), matrix_to_json(sys.a()));
    obj.insert("B".to_string(), matrix_to_json(sys.b()));
    obj.insert("C".to_string(), matrix_to_json(sys.c()));
    obj.insert("D".to_string(), matrix_to_json(sys.d()));
    if let Some(ts) = ts {
        obj.insert("ts".to_string(), json!(ts));
    }
    Value::Object(obj)
}

pub fn write_system(path: &Path, sys: &ContinuousStateSpace, ts: Option<f64>) -> Result<()> {
    write_json(path, &system_to_json(sys, ts))
}

/// Discrete schema mirrors the continuous one: {"A_d", "B_d", "C", "D",
/// "dt"}.
pub fn parse_discrete(text: &str) -> Result<DiscreteStateSpace> {
    let value = parse_json(text)?;
    let obj = as_object(&value)?;
    let a_d = parse_matrix(get_key(obj, "A_d")?, "A_d")?;
    let b_d = parse_matrix(get_key(obj, "B_d")?, "B_d")?;
    let c = parse_matrix(get_key(obj, "C")?, "C")?;
    let d = parse_matrix(get_key(obj, "D")?, "D")?;
    let dt = parse_optional_positive(obj, "dt")?
        .ok_or_else(|| Error::Parse("missing key \"dt\"".to_string()))?;
    DiscreteStateSpace::new(a_d, b_d, c, d, dt)
}

pub fn read_discrete(path: &Path) -> Result<DiscreteStateSpace> {
    parse_discrete(&read_to_string(path)?)
}

pub fn discrete_to_json(dsys: &DiscreteStateSpace) -> Value {
    let mut obj = Map::new();
    obj.insert("A_d".to_string(), matrix_to_json(dsys.a_d()));
    obj.insert("B_d".to_string(), matrix_to_json(dsys.b_d()));
    obj.insert("C".to_string(), matrix_to_json(dsys.c()));
    obj.insert("D".to_string(), matrix_to_json(dsys.d()));
    obj.insert("dt".to_string(), json!(dsys.dt()));
    Value::Object(obj)
}

pub fn write_discrete(path: &Path, dsys: &DiscreteStateSpace) -> Result<()> {
    write_json(path, &discrete_to_json(dsys))
}

/// Per-sample pair list. C and D are hoisted out since they never vary.
pub fn time_varying_to_json(tv: &TimeVaryingStateSpace) -> Value {
    let pairs: Vec<Value> = (0..tv.len())
        .map(|k| {
            let (a, b) = tv.pair(k);
            json!({ "A": matrix_to_json(a), "B": matrix_to_json(b) })
        })
        .collect();
    json!({
        "C": matrix_to_json(tv.c()),
        "D": matrix_to_json(tv.d()),
        "pairs": pairs,
    })
}

/// Jitter schema: {"model", "seed", "bounds", "epsilons"}, plus
/// "generator" on generated sequences and "sigma" for the gaussian model.
pub fn parse_jitter(text: &str) -> Result<JitterSequence> {
    let value = parse_json(text)?;
    let obj = as_object(&value)?;

    if let Some(generator) = obj.get("generator").and_then(|v| v.as_str()) {
        if generator != GENERATOR_ID {
            return Err(Error::Parse(format!(
                "unknown generator \"{generator}\" (this toolkit writes \"{GENERATOR_ID}\")"
            )));
        }
    }

    let model_name = get_key(obj, "model")?
        .as_str()
        .ok_or_else(|| Error::Parse("\"model\" must be a string".to_string()))?;

    let bounds_val = get_key(obj, "bounds")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"bounds\" must be [lo, hi]".to_string()))?;
    if bounds_val.len() != 2 {
        return Err(Error::Parse(format!(
            "\"bounds\" must have 2 entries, got {}",
            bounds_val.len()
        )));
    }
    let lo = bounds_val[0]
        .as_f64()
        .ok_or_else(|| Error::Parse("\"bounds\" lo is not a number".to_string()))?;
    let hi = bounds_val[1]
        .as_f64()
        .ok_or_else(|| Error::Parse("\"bounds\" hi is not a number".to_string()))?;

    let eps_val = get_key(obj, "epsilons")?
        .as_array()
        .ok_or_else(|| Error::Parse("\"epsilons\" must be an array".to_string()))?;
    let mut epsilons = Vec::with_capacity(eps_val.len());
    for (i, v) in eps_val.iter().enumerate() {
        epsilons.push(v.as_f64().ok_or_else(|| {
            Error::Parse(format!("\"epsilons\"[{i}] is not a number"))
        })?);
    }

    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| {
            Error::Parse("\"seed\" must be a non-negative integer".to_string())
        })?),
    };

    let model = match model_name {
        "constant" => {
            if lo != hi {
                return Err(Error::Parse(format!(
                    "constant model requires equal bounds, got [{lo}, {hi}]"
                )));
            }
            JitterModel::Constant(lo)
        }
        "uniform" => JitterModel::Uniform { lo, hi },
        "gauss" => {
            let sigma = get_key(obj, "sigma")?
                .as_f64()
                .ok_or_else(|| Error::Parse("\"sigma\" must be a number".to_string()))?;
            JitterModel::TruncatedGaussian { sigma, lo, hi }
        }
        "explicit" => JitterModel::Explicit,
        other => {
            return Err(Error::Parse(format!(
                "unknown jitter model \"{other}\" (expected constant, uniform, gauss, or explicit)"
            )))
        }
    };

    JitterSequence::from_parts(epsilons, model, seed, (lo, hi))
}

pub fn read_jitter(path: &Path) -> Result<JitterSequence> {
    parse_jitter(&read_to_string(path)?)
}

pub fn jitter_to_json(seq: &JitterSequence) -> Value {
    let mut obj = Map::new();
    obj.insert("model".to_string(), json!(seq.model().kind()));
    obj.insert(
        "seed".to_string(),
        match seq.seed() {
            Some(s) => json!(s),
            None => Value::Null,
        },
    );
    let (lo, hi) = seq.bounds();
    obj.insert("bounds".to_string(), json!([lo, hi]));
    if let JitterModel::TruncatedGaussian { sigma, .. } = seq.model() {
        obj.insert("sigma".to_string(), json!(sigma));
    }
    if seq.seed().is_some() {
        obj.insert("generator".to_string(), json!(GENERATOR_ID));
    }
    obj.insert("epsilons".to_string(), json!(seq.epsilons()));
    Value::Object(obj)
}

pub fn write_jitter(path: &Path, seq: &JitterSequence) -> Result<()> {
    write_json(path, &jitter_to_json(seq))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// 17 significant digits: the shortest fixed width that reproduces every
/// f64 bit pattern on read-back.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV layout: k, t, then one column per input, state, and output channel,
/// named u0.., x0.., y0...
pub fn write_trajectory_csv<W: Write>(traj: &SampledTrajectory, out: &mut W) -> Result<()> {
    let wrap = |e: std::io::Error| Error::Io {
        path: "<csv stream>".to_string(),
        message: e.to_string(),
    };
    let (m, n, p) = (
        traj.inputs()[0].len(),
        traj.states()[0].len(),
        traj.outputs()[0].len(),
    );
    let mut header = String::from("k,t");
    for j in 0..m {
        header.push_str(&format!(",u{j}"));
    }
    for j in 0..n {
        header.push_str(&format!(",x{j}"));
    }
    for j in 0..p {
        header.push_str(&format!(",y{j}"));
    }
    writeln!(out, "{header}").map_err(wrap)?;

    for k in 0..traj.len() {
        let mut line = format!("{k},{}", sig17(traj.times()[k]));
        for v in traj.inputs()[k]
            .iter()
            .chain(traj.states()[k].iter())
            .chain(traj.outputs()[k].iter())
        {
            line.push(',');
            line.push_str(&sig17(*v));
        }
        writeln!(out, "{line}").map_err(wrap)?;
    }
    Ok(())
}

pub fn write_trajectory_csv_file(path: &Path, traj: &SampledTrajectory) -> Result<()> {
    let mut buf = Vec::new();
    write_trajectory_csv(traj, &mut buf)?;
    fs::write(path, buf).map_err(|e| io_err(path, e))
}

pub fn trajectory_to_json(traj: &SampledTrajectory) -> Value {
    let vecs = |rows: &[Vector]| -> Value {
        Value::Array(
            rows.iter()
                .map(|r| Value::Array(r.iter().map(|v| json!(v)).collect()))
                .collect(),
        )
    };
    json!({
        "times": traj.times(),
        "inputs": vecs(traj.inputs()),
        "states": vecs(traj.states()),
        "outputs": vecs(traj.outputs()),
    })
}

/// Input-sample file: one sample per line, channels comma-separated.
/// Blank lines and lines starting with '#' are skipped; a leading header
/// line of column names is tolerated.
pub fn parse_input_samples(text: &str) -> Result<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::new();
    let mut width: Option<usize> = None;
    let mut saw_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        match parsed {
            Ok(values) => {
                if values.is_empty() {
                    continue;
                }
                match width {
                    None => width = Some(values.len()),
                    Some(w) if w != values.len() => {
                        return Err(Error::Parse(format!(
                            "input samples line {}: {} values, expected {w}",
                            lineno + 1,
                            values.len()
                        )));
                    }
                    _ => {}
                }
                out.push(Vector::from_vec(values));
                saw_data = true;
            }
            Err(_) if !saw_data => continue, // header line
            Err(_) => {
                return Err(Error::Parse(format!(
                    "input samples line {}: not a number list: '{line}'",
                    lineno + 1
                )));
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("input sample file has no data rows".to_string()));
    }
    Ok(out)
}

pub fn read_input_samples(path: &Path) -> Result<Vec<Vector>> {
    parse_input_samples(&read_to_string(path)?)
}
