//! External stimuli and their conversion to a per-pixel force field.
//!
//! Field values are newtons per crossover. Strokes are split bilinearly over
//! the four surrounding crossovers, weights land on their target pixel, and
//! the result is spread by a Gaussian force-diffusion kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SensorGeometry;

pub const STANDARD_GRAVITY: f64 = 9.80665;

/// One stylus sample in pad coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeEvent {
    pub x: f64,
    pub y: f64,
    /// Contact force (N).
    pub force: f64,
    /// Seconds from the start of the capture.
    #[serde(default)]
    pub timestamp: f64,
}

impl StrokeEvent {
    pub fn new(x: f64, y: f64, force: f64, timestamp: f64) -> Self {
        Self {
            x,
            y,
            force,
            timestamp,
        }
    }

    pub fn validate(&self, geometry: &SensorGeometry) -> Result<()> {
        if !(self.force >= 0.0 && self.force.is_finite()) {
            return Err(Error::InvalidStimulus(format!("stroke force {}", self.force)));
        }
        if !geometry.contains_point(self.x, self.y) {
            return Err(Error::InvalidStimulus(format!(
                "stroke at ({}, {}) lies outside the sensing area",
                self.x, self.y
            )));
        }
        Ok(())
    }
}

/// A mass resting on one pixel through a rigid block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightStimulus {
    pub row: usize,
    pub col: usize,
    pub mass_kg: f64,
    /// Footprint of the block (m^2).
    #[serde(default = "default_contact_area")]
    pub contact_area: f64,
}

fn default_contact_area() -> f64 {
    1e-4
}

impl WeightStimulus {
    /// `mass_kg` on `(row, col)` through a 10 mm x 10 mm block.
    pub fn new(row: usize, col: usize, mass_kg: f64) -> Self {
        Self {
            row,
            col,
            mass_kg,
            contact_area: default_contact_area(),
        }
    }

    pub fn force(&self) -> f64 {
        self.mass_kg * STANDARD_GRAVITY
    }

    /// Mean contact pressure under the block (Pa).
    pub fn contact_pressure(&self) -> f64 {
        self.force() / self.contact_area
    }

    pub fn validate(&self, geometry: &SensorGeometry) -> Result<()> {
        if !(self.mass_kg > 0.0 && self.mass_kg.is_finite()) {
            return Err(Error::InvalidStimulus(format!("mass {}", self.mass_kg)));
        }
        if !(self.contact_area > 0.0 && self.contact_area.is_finite()) {
            return Err(Error::InvalidStimulus(format!(
                "contact area {}",
                self.contact_area
            )));
        }
        geometry.check_pixel(self.row, self.col)
    }
}

/// Nonnegative force per crossover, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureField {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl PressureField {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn for_geometry(geometry: &SensorGeometry) -> Self {
        Self::zeros(geometry.rows, geometry.cols)
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: (rows, cols),
                got: (values.len(), 1),
            });
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::NegativePressure(*v));
        }
        Ok(Self { rows, cols, values })
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_blank(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Adds `force` at `(row, col)`; negative or non-finite forces are ignored.
    pub fn add(&mut self, row: usize, col: usize, force: f64) {
        if force > 0.0 && force.is_finite() {
            self.values[row * self.cols + col] += force;
        }
    }

    /// Elementwise sum. Panics on mismatched dimensions.
    pub fn superpose(&mut self, other: &PressureField) {
        assert_eq!(self.dims(), other.dims(), "field dimensions differ");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn check_matches(&self, geometry: &SensorGeometry) -> Result<()> {
        if self.dims() != (geometry.rows, geometry.cols) {
            return Err(Error::DimensionMismatch {
                expected: (geometry.rows, geometry.cols),
                got: self.dims(),
            });
        }
        Ok(())
    }
}

/// Result of rasterizing a batch of stimuli: the field plus the index and
/// reason of every event that was dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Rasterized {
    pub field: PressureField,
    pub rejected: Vec<(usize, Error)>,
}

/// Deposits one stroke sample bilinearly over its surrounding crossovers.
pub(crate) fn deposit_stroke(field: &mut PressureField, geometry: &SensorGeometry, ev: &StrokeEvent) {
    let (r, c) = geometry.lattice_coords(ev.x, ev.y);
    let (r0, c0) = (r.floor() as usize, c.floor() as usize);
    let (fr, fc) = (r - r0 as f64, c - c0 as f64);
    let r1 = (r0 + 1).min(geometry.rows - 1);
    let c1 = (c0 + 1).min(geometry.cols - 1);
    field.add(r0, c0, ev.force * (1.0 - fr) * (1.0 - fc));
    field.add(r0, c1, ev.force * (1.0 - fr) * fc);
    field.add(r1, c0, ev.force * fr * (1.0 - fc));
    field.add(r1, c1, ev.force * fr * fc);
}

pub fn rasterize_strokes(
    strokes: &[StrokeEvent],
    geometry: &SensorGeometry,
    diffusion_sigma: f64,
) -> Result<Rasterized> {
    rasterize(strokes, &[], geometry, diffusion_sigma)
}

pub fn rasterize_weights(
    weights: &[WeightStimulus],
    geometry: &SensorGeometry,
    diffusion_sigma: f64,
) -> Result<Rasterized> {
    rasterize(&[], weights, geometry, diffusion_sigma)
}

/// Deposits every valid stimulus and applies force diffusion of standard
/// deviation `diffusion_sigma` metres. Rejected indices count strokes first,
/// then weights.
pub fn rasterize(
    strokes: &[StrokeEvent],
    weights: &[WeightStimulus],
    geometry: &SensorGeometry,
    diffusion_sigma: f64,
) -> Result<Rasterized> {
    geometry.validate()?;
    let mut field = PressureField::for_geometry(geometry);
    let mut rejected = Vec::new();
    for (i, ev) in strokes.iter().enumerate() {
        match ev.validate(geometry) {
            Ok(()) => deposit_stroke(&mut field, geometry, ev),
            Err(e) => rejected.push((i, e)),
        }
    }
    for (i, w) in weights.iter().enumerate() {
        match w.validate(geometry) {
            Ok(()) => field.add(w.row, w.col, w.force()),
            Err(e) => rejected.push((strokes.len() + i, e)),
        }
    }
    let field = diffuse(&field, geometry, diffusion_sigma)?;
    Ok(Rasterized { field, rejected })
}

/// Row-stochastic spreading matrix for one axis: entry `[src * n + dst]` is
/// the share of a deposit at `src` that ends up at `dst`. Each source row is
/// renormalized over the in-grid lattice points.
fn axis_spread(n: usize, sigma_px: f64) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for src in 0..n {
        let row = &mut m[src * n..(src + 1) * n];
        for (dst, w) in row.iter_mut().enumerate() {
            let d = dst as f64 - src as f64;
            *w = (-d * d / (2.0 * sigma_px * sigma_px)).exp();
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|w| *w /= s);
    }
    m
}

/// Gaussian force diffusion with truncate-and-renormalize borders.
/// `sigma` is in metres and is converted to lattice units by the pitch.
pub fn diffuse(field: &PressureField, geometry: &SensorGeometry, sigma: f64) -> Result<PressureField> {
    field.check_matches(geometry)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("diffusion sigma {sigma}")));
    }
    if sigma == 0.0 || field.is_blank() {
        return Ok(field.clone());
    }
    let sigma_px = sigma / geometry.pitch;
    let (rows, cols) = field.dims();
    let wr = axis_spread(rows, sigma_px);
    let wc = axis_spread(cols, sigma_px);

    // Spread along columns, then along rows.
    let mut tmp = vec![0.0; rows * cols];
    for r in 0..rows {
        for src in 0..cols {
            let f = field.get(r, src);
            if f == 0.0 {
                continue;
            }
            for dst in 0..cols {
                tmp[r * cols + dst] += f * wc[src * cols + dst];
            }
        }
    }
    let mut out = vec![0.0; rows * cols];
    for src in 0..rows {
        for c in 0..cols {
            let f = tmp[src * cols + c];
            if f == 0.0 {
                continue;
            }
            for dst in 0..rows {
                out[dst * cols + c] += f * wr[src * rows + dst];
            }
        }
    }
    Ok(PressureField {
        rows,
        cols,
        values: out,
    })
}

/// Stroke samples every `spacing` metres along a polyline, spread evenly in
/// time over `[t0, t1)`.
pub fn strokes_along(points: &[(f64, f64)], spacing: f64, force: f64, t0: f64, t1: f64) -> Vec<StrokeEvent> {
    let mut pts = Vec::new();
    for seg in points.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let steps = (len / spacing).ceil().max(1.0) as usize;
        for k in 0..steps {
            let t = k as f64 / steps as f64;
            pts.push((a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t));
        }
    }
    if let Some(last) = points.last() {
        pts.push(*last);
    }
    let n = pts.len().max(1) as f64;
    pts.into_iter()
        .enumerate()
        .map(|(i, (x, y))| StrokeEvent::new(x, y, force, t0 + (t1 - t0) * i as f64 / n))
        .collect()
}
