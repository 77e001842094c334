//! CSV tables with a trailing `# meta:` JSON line.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

/// A cell formatted for round-tripping: reals with 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// JSON has no infinities; those become strings.
pub fn json_real(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(real(x)), Value::Number)
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn render(table: &Table, meta: &Map<String, Value>) -> Result<Vec<u8>, CliError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(&table.header)?;
    for row in &table.rows {
        wtr.write_record(row)?;
    }
    let mut bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
    // keys are sorted (serde_json's default map)
    writeln!(bytes, "# meta: {}", Value::Object(meta.clone()))?;
    Ok(bytes)
}

pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = File::create(p)
                .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display())))?;
            f.write_all(bytes)?;
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
    let mut f = File::create(path)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    writeln!(f, "{text}")?;
    Ok(())
}
