//! Row-major reading matrices shared by the readout, pipeline and metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What the numbers in a [`Frame`] mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Volts,
    AdcCounts,
    Normalized,
}

/// One `rows x cols` matrix of readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    unit: Unit,
}

impl Frame {
    pub fn zeros(rows: usize, cols: usize, unit: Unit) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
            unit,
        }
    }

    /// Builds a frame from row-major values. Adc frames must hold integral
    /// counts in `0..=65535`, normalized frames values in `[0, 1]`.
    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGeometry(format!("empty frame {rows}x{cols}")));
        }
        if values.len() != rows * cols {
            return Err(Error::InvalidConfig(format!(
                "{} values for a {rows}x{cols} frame",
                values.len()
            )));
        }
        let ok = match unit {
            Unit::Volts => true,
            Unit::AdcCounts => values
                .iter()
                .all(|v| v.fract() == 0.0 && (0.0..=65535.0).contains(v)),
            Unit::Normalized => values.iter().all(|v| (0.0..=1.0).contains(v)),
        };
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "values out of range for unit {unit:?}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            values,
            unit,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, unit: Unit, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self {
            rows,
            cols,
            values,
            unit,
        }
    }

    /// Crate-internal constructor for values already known to satisfy the unit.
    pub(crate) fn new_unchecked(rows: usize, cols: usize, values: Vec<f64>, unit: Unit) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self {
            rows,
            cols,
            values,
            unit,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.cols + col] = v;
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Row-major position of the largest value (first one on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        (best / self.cols, best % self.cols)
    }

    pub(crate) fn check_in_grid(&self, row: usize, col: usize) -> Result<()> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::OutOfBounds {
                row,
                col,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}
