//! Crossbar layout: electrode counts, pitch and the pad coordinate system.
//!
//! Pad coordinates are in metres with the origin at the outer corner of the
//! first crossover. `x` runs along the columns, `y` along the rows, so row 0
//! is the top edge and the last row the bottom edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Centre-to-centre electrode spacing (m).
    pub pitch: f64,
    /// Electrode width (m); pixels are `line_width x line_width` squares.
    pub line_width: f64,
    pub velostat_thickness: f64,
    pub pcb_thickness: f64,
}

impl SensorGeometry {
    pub fn new(rows: usize, cols: usize, pitch: f64, line_width: f64) -> Result<Self> {
        let g = Self {
            rows,
            cols,
            pitch,
            line_width,
            ..Self::writing_pad()
        };
        g.validate()?;
        Ok(g)
    }

    /// The 16x16 flexible writing pad: 3 mm pitch, 0.254 mm copper lines,
    /// 106 um velostat between two 180 um polyimide boards.
    pub fn writing_pad() -> Self {
        Self {
            rows: 16,
            cols: 16,
            pitch: 3e-3,
            line_width: 0.254e-3,
            velostat_thickness: 106e-6,
            pcb_thickness: 180e-6,
        }
    }

    /// 5x5 characterization mat with the given pitch.
    pub fn characterization_mat(pitch: f64) -> Result<Self> {
        Self::new(5, 5, pitch, 0.254e-3)
    }

    pub fn with_pitch(&self, pitch: f64) -> Result<Self> {
        let g = Self { pitch, ..*self };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidGeometry(format!(
                "grid must be at least 1x1, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.line_width > 0.0 && self.line_width.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "line width must be positive, got {}",
                self.line_width
            )));
        }
        if !(self.pitch > self.line_width && self.pitch.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "pitch {} must exceed line width {}",
                self.pitch, self.line_width
            )));
        }
        if !(self.velostat_thickness > 0.0 && self.pcb_thickness > 0.0) {
            return Err(Error::InvalidGeometry("layer thicknesses must be positive".into()));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Sensing extent `(width along x, height along y)` in metres.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.cols - 1) as f64 * self.pitch + self.line_width,
            (self.rows - 1) as f64 * self.pitch + self.line_width,
        )
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let (w, h) = self.extent();
        (0.0..=w).contains(&x) && (0.0..=h).contains(&y)
    }

    pub fn check_pixel(&self, row: usize, col: usize) -> Result<()> {
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

    /// Centre of crossover `(row, col)` as `(x, y)` in metres.
    pub fn pixel_center(&self, row: usize, col: usize) -> Result<(f64, f64)> {
        self.check_pixel(row, col)?;
        let half = self.line_width / 2.0;
        Ok((col as f64 * self.pitch + half, row as f64 * self.pitch + half))
    }

    /// Fractional `(row, col)` lattice coordinates of a pad position, clamped
    /// onto the crossover lattice.
    pub(crate) fn lattice_coords(&self, x: f64, y: f64) -> (f64, f64) {
        let half = self.line_width / 2.0;
        let c = ((x - half) / self.pitch).clamp(0.0, (self.cols - 1) as f64);
        let r = ((y - half) / self.pitch).clamp(0.0, (self.rows - 1) as f64);
        (r, c)
    }

    pub fn center_pixel(&self) -> (usize, usize) {
        (self.rows / 2, self.cols / 2)
    }
}

impl Default for SensorGeometry {
    fn default() -> Self {
        Self::writing_pad()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn pixel_centers() {
        let pad = SensorGeometry::writing_pad();
        let (x, y) = pad.pixel_center(0, 0).unwrap();
        assert!(close(x, 0.127e-3) && close(y, 0.127e-3));
        let (x, _) = pad.pixel_center(0, 1).unwrap();
        assert!(close(x, 3.127e-3));

        let mat = SensorGeometry::new(5, 5, 5e-3, 0.254e-3).unwrap();
        let (x, y) = mat.pixel_center(4, 4).unwrap();
        assert!(close(x, 20.127e-3) && close(y, 20.127e-3));
    }

    #[test]
    fn pixel_center_out_of_range() {
        let pad = SensorGeometry::writing_pad();
        assert!(matches!(pad.pixel_center(16, 0), Err(Error::OutOfBounds { .. })));
        assert!(matches!(pad.pixel_center(0, 16), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn extent_is_pitches_plus_one_line() {
        let pad = SensorGeometry::writing_pad();
        let (w, h) = pad.extent();
        assert!(close(w, 15.0 * 3e-3 + 0.254e-3));
        assert!(close(h, w));
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(SensorGeometry::new(0, 4, 3e-3, 1e-4).is_err());
        assert!(SensorGeometry::new(4, 4, 1e-4, 1e-4).is_err());
        assert!(SensorGeometry::new(4, 4, 3e-3, 0.0).is_err());
    }
}
