//! Serialization helpers. Floating-point fields are written with 12
//! significant digits; CSV uses commas, a header row and LF line endings.

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::CliError;

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Converts to a JSON value with every float rounded by [`sig12`].
pub fn to_value<T: Serialize>(value: &T) -> Result<Value, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(round_floats(v))
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(sig12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, round_floats(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

pub fn json(value: &Value) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Scalar cell text for a JSON value.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => sig12(x).to_string(),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Writes rows of cells under a header.
pub fn csv_table<H, R>(header: H, rows: R) -> Result<String, CliError>
where
    H: IntoIterator,
    H::Item: AsRef<[u8]>,
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(header).map_err(internal)?;
    for row in rows {
        w.write_record(&row).map_err(internal)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

/// One-row CSV from the scalar fields of a JSON object, in field order.
pub fn csv_record(object: &Value) -> Result<String, CliError> {
    let map = object
        .as_object()
        .ok_or_else(|| CliError::Internal("expected a JSON object".into()))?;
    let scalars: Vec<(&String, &Value)> = map
        .iter()
        .filter(|(_, v)| !v.is_array() && !v.is_object())
        .collect();
    csv_table(
        scalars.iter().map(|(k, _)| k.as_str()),
        std::iter::once(scalars.iter().map(|(_, v)| cell(v)).collect()),
    )
}
