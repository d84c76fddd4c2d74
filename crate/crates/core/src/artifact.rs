//! CSV and JSON artifacts that carry the crate version and resolved config.
//!
//! CSV files open with `# version <v>` and `# config <json>` comment lines.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Result, VERSION};

/// The two comment lines embedded at the top of every CSV artifact.
pub fn preamble<C: Serialize>(config: &C) -> Result<Vec<String>> {
    Ok(vec![
        format!("version {VERSION}"),
        format!("config {}", serde_json::to_string(config)?),
    ])
}

/// Writes `# `-prefixed comment lines followed by a headed CSV body.
pub fn write_csv<T: Serialize>(path: &Path, comments: &[String], rows: &[T]) -> Result<()> {
    let mut file = File::create(path)?;
    for c in comments {
        writeln!(file, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an empty body with only a header line.
pub fn write_csv_header(path: &Path, comments: &[String], header: &[&str]) -> Result<()> {
    let mut file = File::create(path)?;
    for c in comments {
        writeln!(file, "# {c}")?;
    }
    writeln!(file, "{}", header.join(","))?;
    Ok(())
}

/// Numeric table with a runtime-determined header.
pub fn write_table(path: &Path, comments: &[String], header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut file = File::create(path)?;
    for c in comments {
        writeln!(file, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Comment lines (without the `# ` prefix) and rows of a CSV artifact.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<(Vec<String>, Vec<T>)> {
    let comments = BufReader::new(File::open(path)?)
        .lines()
        .map_while(|l| l.ok())
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim_start().to_string())
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok((comments, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
