use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

/// Reads a numeric CSV whose header must equal `expected`, column-major.
pub fn read_csv_columns(path: &Path, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(0, format!("{other:?}")),
        })?;
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_err(
            1,
            format!(
                "expected header `{}`, got `{}`",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut columns = vec![Vec::new(); expected.len()];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            col.push(
                field
                    .parse::<f64>()
                    .map_err(|e| parse_err(line, format!("`{field}`: {e}")))?,
            );
        }
    }
    Ok(columns)
}

/// Deserializes flat `key = value` text (TOML) from memory; `origin` only
/// labels errors.
pub fn parse_key_values<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| {
            text[..s.start.min(text.len())].matches('\n').count() + 1
        });
        Error::Parse {
            path: origin.to_path_buf(),
            line,
            reason: e.message().to_string(),
        }
    })
}

pub fn read_key_values<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_key_values(&text, path)
}
