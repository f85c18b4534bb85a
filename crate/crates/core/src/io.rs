//! File formats: JSON parameter files, numeric CSV tables and traces.
//!
//! CSV files carry a header row and use Rust's shortest round-trip float
//! formatting, so every value written here reads back bit-identically.
//! Missing values are written as `NaN`.

use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::model::DeviceParams;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: io::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
}

impl IoError {
    fn format(path: &Path, msg: impl Into<String>) -> Self {
        Self::Format { path: path.display().to_string(), msg: msg.into() }
    }

    fn file(path: &Path, source: io::Error) -> Self {
        Self::File { path: path.display().to_string(), source }
    }
}

/// A rectangular table of numbers with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v}"))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        fs::write(path, self.to_csv_string()).map_err(|e| IoError::file(path, e))
    }

    pub fn from_csv_str(text: &str, path: &Path) -> Result<Self, IoError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| IoError::format(path, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| IoError::format(path, e.to_string()))?;
            if rec.len() != columns.len() {
                return Err(IoError::format(path, format!("row {} has {} fields", line + 1, rec.len())));
            }
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| IoError::format(path, format!("row {}: {e}", line + 1)))?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        Self::from_csv_str(&text, path)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::format(path, e.to_string()))
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    fs::write(path, to_json_string(value)).map_err(|e| IoError::file(path, e))
}

/// Device parameters from a JSON object with the [`DeviceParams`] field names.
pub fn load_params(path: &Path) -> Result<DeviceParams, IoError> {
    let p: DeviceParams = read_json(path)?;
    p.validate().map_err(|e| IoError::format(path, e.to_string()))?;
    Ok(p)
}

fn need_columns(t: &Table, n: usize, path: &Path) -> Result<(), IoError> {
    if t.columns.len() < n {
        return Err(IoError::format(path, format!("expected at least {n} columns, found {}", t.columns.len())));
    }
    if t.rows.is_empty() {
        return Err(IoError::format(path, "no data rows"));
    }
    Ok(())
}

/// First two columns of a CSV file as `(x, y)`.
pub fn load_xy(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let t = Table::read(path)?;
    need_columns(&t, 2, path)?;
    Ok(t.rows.iter().map(|r| (r[0], r[1])).unzip())
}

/// `(f, re, im)` columns of a CSV file as frequencies and complex values.
pub fn load_complex(path: &Path) -> Result<(Vec<f64>, Vec<Complex64>), IoError> {
    let t = Table::read(path)?;
    need_columns(&t, 3, path)?;
    Ok(t.rows.iter().map(|r| (r[0], Complex64::new(r[1], r[2]))).unzip())
}

/// Parses `start:stop:n` (inclusive, `n` points) or a single value.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number '{t}' in grid '{s}': {e}"));
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.parse().map_err(|e| format!("bad point count in grid '{s}': {e}"))?;
            if !a.is_finite() || !b.is_finite() {
                return Err(format!("grid '{s}' has non-finite bounds"));
            }
            match n {
                0 => Err(format!("grid '{s}' has zero points")),
                1 if a != b => Err(format!("grid '{s}' has one point but distinct bounds")),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        _ => Err(format!("grid '{s}' is neither 'value' nor 'start:stop:n'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![0.1 + 0.2, -1.0 / 3.0]);
        t.push(vec![1e-300, f64::NAN]);
        t.push(vec![6.02214076e23, f64::INFINITY]);
        let back = Table::from_csv_str(&t.to_csv_string(), Path::new("mem")).unwrap();
        assert_eq!(back.columns, t.columns);
        for (x, y) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:2").is_err());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(Table::from_csv_str("x,y\n1,2\n3\n", Path::new("mem")).is_err());
        assert!(Table::from_csv_str("x,y\n1,zz\n", Path::new("mem")).is_err());
    }

    #[test]
    fn traces_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s21.csv");
        fs::write(&p, "f,re,im\n4.2,0.5,-0.1\n4.3,0.9,0.0\n").unwrap();
        let (f, s) = load_complex(&p).unwrap();
        assert_eq!(f, vec![4.2, 4.3]);
        assert_eq!(s[0], Complex64::new(0.5, -0.1));
        let (x, y) = load_xy(&p).unwrap();
        assert_eq!((x[1], y[1]), (4.3, 0.9));
    }

    #[test]
    fn params_reject_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.json");
        fs::write(&p, r#"{"ej_i_1":0.2,"ej_i_2":0.3,"ej_s_1":0.82,"ej_s_2":0.63,"ej_c":10,"bogus":1}"#).unwrap();
        assert!(load_params(&p).is_err());
        fs::write(&p, r#"{"ej_i_1":0.2,"ej_i_2":0.3,"ej_s_1":0.82,"ej_s_2":0.63,"ej_c":10}"#).unwrap();
        assert_eq!(load_params(&p).unwrap().ej_c, 10.0);
    }
}
