//! Transfer function CSV: rows `value,r,g,b,absorption`, header optional.

use std::path::Path;

use sphpoly_core::raycast::{TfPoint, TransferFunction};

use crate::error::{Error, Result};

pub fn parse_transfer_function(text: &str) -> std::result::Result<TransferFunction, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 5 {
            return Err(format!("row {}: expected 5 columns, found {}", i + 1, rec.len()));
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => points.push(TfPoint { value: v[0], rgb: [v[1], v[2], v[3]], absorption: v[4] }),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(format!("row {}: {e}", i + 1)),
        }
    }
    TransferFunction::new(points).map_err(|e| e.to_string())
}

pub fn read_transfer_function(path: &Path) -> Result<TransferFunction> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    parse_transfer_function(&text).map_err(|m| Error::format(path, m))
}
