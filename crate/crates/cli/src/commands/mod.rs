pub mod analytic;
pub mod mc;
pub mod sweep;
pub mod tables;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{num, to_json, Artifacts, Table};

/// Artifacts plus the exit code the run should end with.
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Artifacts,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(artifacts: Artifacts) -> Self {
        Outcome {
            artifacts,
            exit_code: crate::error::exit::OK,
        }
    }
}

/// Flat report as `key,value` CSV or a JSON object.
fn key_value<T: Serialize>(cfg: &RunConfig, hash: &str, body: &T) -> Result<Artifacts, CliError> {
    let main = match cfg.format_or(Format::Json) {
        Format::Json => to_json(hash, body)?,
        Format::Csv => {
            let mut table = Table::new(&["key", "value"]);
            if let Value::Object(map) = serde_json::to_value(body)? {
                for (k, v) in map {
                    table.push(vec![k, scalar(&v)]);
                }
            }
            table.to_csv(hash)?
        }
    };
    Ok(Artifacts {
        main,
        sidecars: Vec::new(),
    })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `None` for the infinite limits, which JSON cannot carry.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
