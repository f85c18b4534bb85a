//! Map-level preprocessing of measured spectroscopy data.

use serde::{Deserialize, Serialize};

use super::peaks::median;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Each row is one trace.
    Rows,
    /// Each column is one trace.
    Columns,
}

fn check_rect(map: &[Vec<f64>]) -> Result<usize> {
    let cols = map.first().map(Vec::len).unwrap_or(0);
    if map.is_empty() || cols == 0 {
        return Err(Error::Invalid("map is empty".into()));
    }
    if map.iter().any(|r| r.len() != cols) {
        return Err(Error::Invalid("map rows differ in length".into()));
    }
    Ok(cols)
}

/// Subtracts the median of every trace.
pub fn median_subtract(map: &[Vec<f64>], axis: Axis) -> Result<Vec<Vec<f64>>> {
    let cols = check_rect(map)?;
    Ok(match axis {
        Axis::Rows => map
            .iter()
            .map(|row| {
                let m = median(row);
                row.iter().map(|v| v - m).collect()
            })
            .collect(),
        Axis::Columns => {
            let medians: Vec<f64> = (0..cols)
                .map(|j| median(&map.iter().map(|r| r[j]).collect::<Vec<_>>()))
                .collect();
            map.iter()
                .map(|row| row.iter().zip(&medians).map(|(v, m)| v - m).collect())
                .collect()
        }
    })
}

pub const DEFAULT_EXCLUSION_MHZ: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackgroundDivided {
    /// `10 log10(|S21| / background)`, rows = control values, columns = frequencies.
    pub db: Vec<Vec<f64>>,
    /// Columns where every row was within the exclusion window and the plain
    /// column median was used.
    pub fallback_columns: Vec<usize>,
}

/// Divides every frequency column by its median over the control rows whose
/// resonance lies at least `exclusion_mhz` away. `freqs` and `res_freqs`
/// are in GHz.
pub fn background_divide(
    map: &[Vec<f64>],
    freqs: &[f64],
    res_freqs: &[f64],
    exclusion_mhz: f64,
) -> Result<BackgroundDivided> {
    let cols = check_rect(map)?;
    if freqs.len() != cols {
        return Err(Error::Invalid(format!("{} frequencies for {cols} columns", freqs.len())));
    }
    if res_freqs.len() != map.len() {
        return Err(Error::Invalid(format!(
            "{} resonance estimates for {} rows",
            res_freqs.len(),
            map.len()
        )));
    }
    let window = exclusion_mhz * 1e-3;
    let mut fallback_columns = Vec::new();
    let background: Vec<f64> = (0..cols)
        .map(|j| {
            let admissible: Vec<f64> = map
                .iter()
                .zip(res_freqs)
                .filter(|(_, &r)| (freqs[j] - r).abs() >= window)
                .map(|(row, _)| row[j])
                .collect();
            if admissible.is_empty() {
                fallback_columns.push(j);
                median(&map.iter().map(|r| r[j]).collect::<Vec<_>>())
            } else {
                median(&admissible)
            }
        })
        .collect();
    let db = map
        .iter()
        .map(|row| row.iter().zip(&background).map(|(v, b)| 10.0 * (v / b).log10()).collect())
        .collect();
    Ok(BackgroundDivided { db, fallback_columns })
}

/// `(c - control_zero) / control_period`.
pub fn flux_axis_map(control: &[f64], control_zero: f64, control_period: f64) -> Result<Vec<f64>> {
    if control_period == 0.0 || !control_period.is_finite() {
        return Err(Error::Domain(format!("control period must be finite and non-zero, got {control_period}")));
    }
    Ok(control.iter().map(|c| (c - control_zero) / control_period).collect())
}
