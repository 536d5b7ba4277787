//! CSV ingestion for locations and refuges.

use std::collections::BTreeSet;
use std::path::Path;

use crate::behaviour::{Refuge, RefugeSet};
use crate::model::Location;
use crate::{Error, Result};

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))
}

fn column(headers: &csv::StringRecord, names: &[&str], path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| names.contains(&h))
        .ok_or_else(|| {
            Error::input(format!(
                "{}: missing column `{}`",
                path.display(),
                names[0]
            ))
        })
}

fn parse_f64(field: &str, label: &str, row: usize, path: &Path) -> Result<f64> {
    field.parse().map_err(|_| {
        Error::input(format!(
            "{} row {row}: non-numeric {label} `{field}`",
            path.display()
        ))
    })
}

fn parse_u32(field: &str, label: &str, row: usize, path: &Path) -> Result<u32> {
    if field.starts_with('-') {
        return Err(Error::input(format!(
            "{} row {row}: negative {label} `{field}`",
            path.display()
        )));
    }
    field.parse().map_err(|_| {
        Error::input(format!(
            "{} row {row}: non-numeric {label} `{field}`",
            path.display()
        ))
    })
}

/// Read the location table: header `id,x,y,locality,allocation,types` with
/// `types` a `|`-separated tag list.
pub fn read_locations(path: &Path) -> Result<Vec<Location>> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?
        .clone();
    let id_col = column(&headers, &["id"], path)?;
    let x_col = column(&headers, &["x"], path)?;
    let y_col = column(&headers, &["y"], path)?;
    let locality_col = column(&headers, &["locality", "locality_id"], path)?;
    let alloc_col = column(&headers, &["allocation"], path)?;
    let types_col = column(&headers, &["types"], path)?;

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
        let id = record[id_col].to_owned();
        if !seen.insert(id.clone()) {
            return Err(Error::input(format!(
                "{} row {row}: duplicate location id `{id}`",
                path.display()
            )));
        }
        let type_tags: BTreeSet<String> = record[types_col]
            .split('|')
            .filter(|t| !t.is_empty())
            .map(|t| t.to_owned())
            .collect();
        out.push(Location {
            id,
            x: parse_f64(&record[x_col], "coordinate", row, path)?,
            y: parse_f64(&record[y_col], "coordinate", row, path)?,
            locality: record[locality_col].to_owned(),
            allocation: parse_u32(&record[alloc_col], "allocation", row, path)?,
            type_tags,
        });
    }
    if out.is_empty() {
        return Err(Error::input(format!("{}: no locations", path.display())));
    }
    Ok(out)
}

/// Read the refuge table: header `id,x,y,locality,capacity`.
pub fn read_refuges(path: &Path) -> Result<RefugeSet> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::input(format!("{}: {e}", path.display())))?
        .clone();
    let id_col = column(&headers, &["id"], path)?;
    let x_col = column(&headers, &["x"], path)?;
    let y_col = column(&headers, &["y"], path)?;
    let locality_col = column(&headers, &["locality", "locality_id"], path)?;
    let capacity_col = column(&headers, &["capacity"], path)?;

    let mut refuges = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
        refuges.push(Refuge {
            id: record[id_col].to_owned(),
            x: parse_f64(&record[x_col], "coordinate", row, path)?,
            y: parse_f64(&record[y_col], "coordinate", row, path)?,
            locality: record[locality_col].to_owned(),
            capacity: parse_u32(&record[capacity_col], "capacity", row, path)?,
        });
    }
    Ok(RefugeSet { refuges })
}
