//! Dataset and config file I/O.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};
use crate::model::DataSet;

/// Parses a headerless CSV whose first column is the response.
pub fn parse_dataset_csv(text: &str) -> Result<DataSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut data: Option<DataSet> = None;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Config(format!("row {}: '{field}' is not a finite number", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            continue;
        }
        let set = data.get_or_insert_with(|| DataSet::empty(values.len() - 1));
        if values.len() - 1 != set.dim() {
            return Err(Error::Config(format!(
                "row {}: expected {} columns, found {}",
                line + 1,
                set.dim() + 1,
                values.len()
            )));
        }
        set.push(values[0], &values[1..])?;
    }
    data.ok_or_else(|| Error::Config("dataset is empty".into()))
}

pub fn read_dataset_csv(path: &Path) -> Result<DataSet> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read dataset {}: {e}", path.display())))?;
    parse_dataset_csv(&text)
}

/// Writes a headerless CSV, response first, floats with 17 significant digits.
pub fn write_dataset_csv(data: &DataSet, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for (y, x) in data.iter() {
        let mut row = vec![super::report::format_float(y)];
        row.extend(x.iter().map(|v| super::report::format_float(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a comma-separated feature vector such as `"1.0,2.0"` (empty for p = 0).
pub fn parse_point(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("'{s}' is not a finite number")))
        })
        .collect()
}

pub fn parse_config<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
}

pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_response_first() {
        let d = parse_dataset_csv("1.5, 2, 3\n-1,0,4\n").unwrap();
        assert_eq!((d.len(), d.dim()), (2, 2));
        assert_eq!(d.response(1), -1.0);
        assert_eq!(d.features(0), &[2.0, 3.0]);
        assert!(parse_dataset_csv("1,2\n3\n").is_err());
        assert!(parse_dataset_csv("1,x\n").is_err());
        assert!(parse_dataset_csv("").is_err());
        assert_eq!(parse_point("1.0, 2").unwrap(), vec![1.0, 2.0]);
        assert!(parse_point("1,,2").is_err());
    }

    #[test]
    fn dataset_roundtrip() {
        let d = parse_dataset_csv("0.1,0.30000000000000004\n2,3\n").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_dataset_csv(&d, &path).unwrap();
        assert_eq!(read_dataset_csv(&path).unwrap(), d);
    }
}
