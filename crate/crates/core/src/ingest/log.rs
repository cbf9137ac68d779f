use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::catalog::{SensorCatalog, SensorSpec, ValueDomain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SensorValue {
    Numeric(Vec<f64>),
    Symbolic(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorReading {
    pub user: String,
    pub sensor: String,
    pub ts_ms: i64,
    pub value: SensorValue,
}

/// Readings in `(user, ts_ms)` order plus what was skipped in lenient mode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub readings: Vec<SensorReading>,
    pub skipped_unknown: usize,
    pub skipped_invalid: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogLine {
    user: String,
    sensor: String,
    ts_ms: i64,
    values: Vec<Value>,
}

/// Parses a JSON Lines sensor log such as
/// `{"user":"u01","sensor":"acceleration","ts_ms":1581938718026,"values":[0.0,0.0,9.81]}`.
///
/// Malformed lines always abort. Unknown sensors and arity/domain mismatches
/// abort in strict mode and are skipped (and counted) otherwise.
pub fn parse_sensor_log<R: BufRead>(input: R, catalog: &SensorCatalog, strict: bool) -> Result<ParsedLog> {
    let mut log = ParsedLog::default();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: LogLine = serde_json::from_str(&line)
            .map_err(|e| Error::parse_at_line("sensor log", line_no, e.to_string()))?;
        let Some(spec) = catalog.get(&raw.sensor) else {
            if strict {
                return Err(Error::parse_at_line(
                    "sensor log",
                    line_no,
                    format!("unknown sensor `{}`", raw.sensor),
                ));
            }
            log.skipped_unknown += 1;
            continue;
        };
        match decode_value(spec, &raw.values) {
            Ok(value) => log.readings.push(SensorReading {
                user: raw.user,
                sensor: raw.sensor,
                ts_ms: raw.ts_ms,
                value,
            }),
            Err(msg) if strict => {
                return Err(Error::parse_at_line(
                    "sensor log",
                    line_no,
                    format!("arity/domain mismatch for `{}`: {msg}", spec.id),
                ))
            }
            Err(_) => log.skipped_invalid += 1,
        }
    }
    log.readings
        .sort_by(|a, b| a.user.cmp(&b.user).then(a.ts_ms.cmp(&b.ts_ms)));
    Ok(log)
}

pub fn parse_sensor_log_str(text: &str, catalog: &SensorCatalog, strict: bool) -> Result<ParsedLog> {
    parse_sensor_log(text.as_bytes(), catalog, strict)
}

fn decode_value(spec: &SensorSpec, values: &[Value]) -> std::result::Result<SensorValue, String> {
    if values.len() != spec.arity {
        return Err(format!("expected {} values, got {}", spec.arity, values.len()));
    }
    match spec.domain {
        ValueDomain::Symbolic => match &values[0] {
            Value::String(s) => Ok(SensorValue::Symbolic(s.clone())),
            other => Err(format!("expected a string, got {other}")),
        },
        ValueDomain::Numeric | ValueDomain::Binary => {
            let mut out = Vec::with_capacity(values.len());
            for v in values {
                let x = v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| format!("expected a number, got {v}"))?;
                if spec.domain == ValueDomain::Binary && x != 0.0 && x != 1.0 {
                    return Err(format!("value {x} outside 0/1"));
                }
                out.push(x);
            }
            Ok(SensorValue::Numeric(out))
        }
    }
}
