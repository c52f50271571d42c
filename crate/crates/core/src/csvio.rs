//! Strict header-checked CSV reading shared by the loaders.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::{Error, Result};

pub(crate) struct Row {
    pub line: u64,
    pub record: StringRecord,
}

pub(crate) struct Table {
    pub source: String,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn error(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Csv {
            path: self.source.clone(),
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads every row, requiring the header to be exactly `expected`. An empty
/// input (no header at all) yields no rows.
pub(crate) fn read_table(source: &str, input: impl Read, expected: &[&str]) -> Result<Table> {
    let mut reader = ReaderBuilder::new()
        .has_headers(true)
        .trim(Trim::All)
        .from_reader(input);
    let csv_err = |e: csv::Error| Error::Csv {
        path: source.to_owned(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    let mut table = Table {
        source: source.to_owned(),
        rows: Vec::new(),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(table);
    }
    for h in &headers {
        if !expected.contains(&h) {
            return Err(table.error(1, format!("unknown column `{h}`")));
        }
    }
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(table.error(1, format!("expected header `{}`", expected.join(","))));
    }
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        table.rows.push(Row { line, record });
    }
    Ok(table)
}

pub(crate) fn customer_id(table: &Table, row: &Row, field: &str) -> Result<String> {
    let valid = !field.is_empty()
        && field
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if valid {
        Ok(field.to_owned())
    } else {
        Err(table.error(row.line, format!("invalid customer id `{field}`")))
    }
}

pub(crate) fn flag(table: &Table, row: &Row, field: &str, column: &str) -> Result<bool> {
    match field {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(table.error(row.line, format!("{column} must be 0 or 1, got `{other}`"))),
    }
}
