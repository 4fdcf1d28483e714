use std::io::Write;
use std::path::Path;

use renewal_ldp::numeric::{fmt_sig, parse_sig};
use serde_json::Value;

use crate::error::CliError;

/// Writes an artifact to `out`, or to standard output.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::Config(format!("stdout: {e}")))
        }
    }
}

/// Rounds every float in a JSON tree to 12 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = parse_sig(&fmt_sig(n.as_f64().unwrap_or(f64::NAN))).unwrap_or(f64::NAN);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}
