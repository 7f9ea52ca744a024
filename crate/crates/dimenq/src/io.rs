//! JSON file formats shared by every module and the CLI.
//!
//! Complex scalars encode as two-element arrays `[re, im]`; matrices as
//! row-major nested arrays of complex scalars.

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator};
use crate::measurements::PovmSet;
use crate::states::DensityMatrix;
use crate::steering::Assemblage;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            let row: Vec<Value> = (0..m.cols())
                .map(|j| {
                    let z = m[(i, j)];
                    Value::Array(vec![json_f64(z.re), json_f64(z.im)])
                })
                .collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn matrix_from_json(v: &Value) -> Result<ComplexMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let mut entries = Vec::new();
    let mut ncols = None;
    for row in rows {
        let cols = row.as_array().ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
        match ncols {
            None => ncols = Some(cols.len()),
            Some(n) if n != cols.len() => {
                return Err(Error::Parse("ragged matrix rows".into()));
            }
            _ => {}
        }
        for z in cols {
            let pair = z.as_array().ok_or_else(|| Error::Parse("complex scalar must be [re, im]".into()))?;
            if pair.len() != 2 {
                return Err(Error::Parse("complex scalar must have exactly two components".into()));
            }
            let re = pair[0].as_f64().ok_or_else(|| Error::Parse("non-numeric real part".into()))?;
            let im = pair[1].as_f64().ok_or_else(|| Error::Parse("non-numeric imaginary part".into()))?;
            entries.push(Complex64::new(re, im));
        }
    }
    ComplexMatrix::from_entries(nrows, ncols.unwrap(), entries)
}

fn hermitian_from_json(v: &Value) -> Result<HermitianOperator> {
    HermitianOperator::new(matrix_from_json(v)?)
}

/// One detected invariant violation in a loaded file.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    /// Offending location, e.g. `effects[1][0]` or `kraus`.
    pub location: String,
    /// Residual magnitude of the violated invariant.
    pub residual: f64,
    pub message: String,
}

/// Channel file: `{"d_in", "d_out", "kraus": [...]}` or `{"d_in", "d_out",
/// "choi": ...}` with exactly one of `kraus`/`choi`.
#[derive(Serialize, Deserialize)]
struct ChannelFile {
    d_in: usize,
    d_out: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    kraus: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    choi: Option<Value>,
}

pub fn channel_to_json(ch: &Channel) -> Value {
    serde_json::json!({
        "d_in": ch.d_in(),
        "d_out": ch.d_out(),
        "kraus": Value::Array(ch.kraus().iter().map(matrix_to_json).collect()),
    })
}

pub fn channel_from_json(v: &Value) -> Result<Channel> {
    let f: ChannelFile =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("channel file: {e}")))?;
    match (&f.kraus, &f.choi) {
        (Some(k), None) => {
            let mats = k
                .as_array()
                .ok_or_else(|| Error::Parse("kraus must be an array of matrices".into()))?
                .iter()
                .map(matrix_from_json)
                .collect::<Result<Vec<_>>>()?;
            Channel::new(f.d_in, f.d_out, mats)
        }
        (None, Some(c)) => {
            let op = hermitian_from_json(c)?;
            let choi = crate::channels::ChoiMatrix::new(f.d_in, f.d_out, op)?;
            crate::channels::kraus_from_choi(&choi)
        }
        _ => Err(Error::Parse("channel file must contain exactly one of 'kraus' or 'choi'".into())),
    }
}

/// POVM file: `{"dim", "n_inputs", "n_outcomes", "effects": [[matrix,..],..]}`
/// with outer index x and inner index a.
pub fn povm_to_json(m: &PovmSet) -> Value {
    let effects: Vec<Value> = (0..m.n_inputs())
        .map(|x| {
            Value::Array((0..m.n_outcomes()).map(|a| matrix_to_json(m.effect(x, a).matrix())).collect())
        })
        .collect();
    serde_json::json!({
        "dim": m.dim(),
        "n_inputs": m.n_inputs(),
        "n_outcomes": m.n_outcomes(),
        "effects": Value::Array(effects),
    })
}

pub fn povm_from_json(v: &Value) -> Result<PovmSet> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("POVM file must be an object".into()))?;
    let dim = get_usize(obj, "dim")?;
    let n_inputs = get_usize(obj, "n_inputs")?;
    let n_outcomes = get_usize(obj, "n_outcomes")?;
    let effects = parse_effect_grid(obj.get("effects"), n_inputs, n_outcomes, dim, "effects")?;
    PovmSet::new(dim, effects)
}

/// Assemblage file: `{"dim", "n_inputs", "n_outcomes", "elements": [[..],..]}`.
pub fn assemblage_to_json(s: &Assemblage) -> Value {
    let elements: Vec<Value> = (0..s.n_inputs())
        .map(|x| {
            Value::Array((0..s.n_outcomes()).map(|a| matrix_to_json(s.element(x, a).matrix())).collect())
        })
        .collect();
    serde_json::json!({
        "dim": s.dim(),
        "n_inputs": s.n_inputs(),
        "n_outcomes": s.n_outcomes(),
        "elements": Value::Array(elements),
    })
}

pub fn assemblage_from_json(v: &Value) -> Result<Assemblage> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("assemblage file must be an object".into()))?;
    let dim = get_usize(obj, "dim")?;
    let n_inputs = get_usize(obj, "n_inputs")?;
    let n_outcomes = get_usize(obj, "n_outcomes")?;
    let elements = parse_effect_grid(obj.get("elements"), n_inputs, n_outcomes, dim, "elements")?;
    Assemblage::new(dim, elements)
}

/// State file: `{"dims": [dA, dB], "rho": matrix}`.
pub fn state_to_json(rho: &DensityMatrix) -> Value {
    serde_json::json!({
        "dims": [rho.dims().0, rho.dims().1],
        "rho": matrix_to_json(rho.operator().matrix()),
    })
}

pub fn state_from_json(v: &Value) -> Result<DensityMatrix> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("state file must be an object".into()))?;
    let dims = obj
        .get("dims")
        .and_then(|d| d.as_array())
        .ok_or_else(|| Error::Parse("state file needs \"dims\": [dA, dB]".into()))?;
    if dims.len() != 2 {
        return Err(Error::Parse("dims must have exactly two entries".into()));
    }
    let da = dims[0].as_u64().ok_or_else(|| Error::Parse("dims[0] must be an integer".into()))? as usize;
    let db = dims[1].as_u64().ok_or_else(|| Error::Parse("dims[1] must be an integer".into()))? as usize;
    let rho = hermitian_from_json(obj.get("rho").ok_or_else(|| Error::Parse("missing \"rho\"".into()))?)?;
    DensityMatrix::new((da, db), rho)
}

fn get_usize(obj: &serde_json::Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .ok_or_else(|| Error::Parse(format!("missing or non-integer \"{key}\"")))
}

fn parse_effect_grid(
    v: Option<&Value>,
    n_inputs: usize,
    n_outcomes: usize,
    dim: usize,
    what: &str,
) -> Result<Vec<Vec<HermitianOperator>>> {
    let rows = v
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Parse(format!("missing or non-array \"{what}\"")))?;
    if rows.len() != n_inputs {
        return Err(Error::Parse(format!(
            "{what} has {} input rows, expected {n_inputs}",
            rows.len()
        )));
    }
    let mut out = Vec::with_capacity(n_inputs);
    for (x, row) in rows.iter().enumerate() {
        let cols = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("{what}[{x}] must be an array")))?;
        if cols.len() != n_outcomes {
            return Err(Error::Parse(format!(
                "{what}[{x}] has {} outcomes, expected {n_outcomes}",
                cols.len()
            )));
        }
        let mut inner = Vec::with_capacity(n_outcomes);
        for (a, m) in cols.iter().enumerate() {
            let h = hermitian_from_json(m)
                .map_err(|e| Error::Parse(format!("{what}[{x}][{a}]: {e}")))?;
            if h.dim() != dim {
                return Err(Error::Parse(format!(
                    "{what}[{x}][{a}] has dim {}, expected {dim}",
                    h.dim()
                )));
            }
            inner.push(h);
        }
        out.push(inner);
    }
    Ok(out)
}

/// Kind of device description in a JSON file, detected from its keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceKind {
    Channel,
    Povm,
    Assemblage,
    State,
}

pub fn detect_kind(v: &Value) -> Result<DeviceKind> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("device file must be a JSON object".into()))?;
    if obj.contains_key("kraus") || obj.contains_key("choi") {
        Ok(DeviceKind::Channel)
    } else if obj.contains_key("effects") {
        Ok(DeviceKind::Povm)
    } else if obj.contains_key("elements") {
        Ok(DeviceKind::Assemblage)
    } else if obj.contains_key("rho") {
        Ok(DeviceKind::State)
    } else {
        Err(Error::Parse("unrecognized device file (no kraus/choi/effects/elements/rho key)".into()))
    }
}

/// Check every type invariant of the object in a device file, returning one
/// entry per violation with the offending index and residual magnitude.
pub fn validate_json(v: &Value) -> Result<Vec<Violation>> {
    match detect_kind(v)? {
        DeviceKind::Channel => {
            let obj = v.as_object().unwrap();
            if obj.contains_key("kraus") && obj.contains_key("choi") {
                return Ok(vec![Violation {
                    location: "file".into(),
                    residual: f64::NAN,
                    message: "exactly one of 'kraus'/'choi' may be present".into(),
                }]);
            }
            match channel_from_json(v) {
                Ok(ch) => Ok(ch.violations()),
                Err(e) => Ok(vec![parse_violation(e)]),
            }
        }
        DeviceKind::Povm => {
            let obj = v.as_object().unwrap();
            let dim = get_usize(obj, "dim")?;
            let n_inputs = get_usize(obj, "n_inputs")?;
            let n_outcomes = get_usize(obj, "n_outcomes")?;
            match parse_effect_grid(obj.get("effects"), n_inputs, n_outcomes, dim, "effects") {
                Ok(effects) => Ok(PovmSet::violations(dim, &effects)),
                Err(e) => Ok(vec![parse_violation(e)]),
            }
        }
        DeviceKind::Assemblage => {
            let obj = v.as_object().unwrap();
            let dim = get_usize(obj, "dim")?;
            let n_inputs = get_usize(obj, "n_inputs")?;
            let n_outcomes = get_usize(obj, "n_outcomes")?;
            match parse_effect_grid(obj.get("elements"), n_inputs, n_outcomes, dim, "elements") {
                Ok(elements) => Ok(Assemblage::violations(dim, &elements)),
                Err(e) => Ok(vec![parse_violation(e)]),
            }
        }
        DeviceKind::State => match state_from_json(v) {
            Ok(rho) => Ok(rho.violations()),
            Err(e) => Ok(vec![parse_violation(e)]),
        },
    }
}

fn parse_violation(e: Error) -> Violation {
    Violation { location: "file".into(), residual: f64::NAN, message: e.to_string() }
}
