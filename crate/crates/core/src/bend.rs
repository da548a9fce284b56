//! Curvature of sampled profiles, bending radius, and the baseline stress a
//! bent pad puts on its pixels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SensorGeometry;
use crate::stimulus::PressureField;

const STENCIL: usize = 5;

/// Finite-difference weights for derivatives `0..=order` at `z` over the
/// nodes `xs` (Fornberg's recursion). `w[k][j]` multiplies `f(xs[j])` in the
/// k-th derivative estimate.
fn fd_weights(z: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// Curvature `|y''| / (1 + y'^2)^(3/2)` of a sampled curve `y = f(x)` at `at`.
///
/// Derivatives come from a five-point stencil centred as closely on `at` as
/// the samples allow; on uniform samples this is the fourth-order central
/// difference.
pub fn curvature(samples: &[(f64, f64)], at: f64) -> Result<f64> {
    if samples.len() < STENCIL {
        return Err(Error::InvalidSamples(format!(
            "need at least {STENCIL} samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidSamples("x must be strictly increasing".into()));
    }
    if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidSamples("non-finite sample".into()));
    }
    let (first, last) = (samples[0].0, samples[samples.len() - 1].0);
    if !(first..=last).contains(&at) {
        return Err(Error::InvalidSamples(format!(
            "x = {at} is not bracketed by [{first}, {last}]"
        )));
    }
    let nearest = samples
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 .0 - at).abs().total_cmp(&(b.1 .0 - at).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let start = nearest
        .saturating_sub(STENCIL / 2)
        .min(samples.len() - STENCIL);
    let window = &samples[start..start + STENCIL];
    let xs: Vec<f64> = window.iter().map(|p| p.0).collect();
    let w = fd_weights(at, &xs, 2);
    let d1: f64 = window.iter().zip(&w[1]).map(|(p, w)| p.1 * w).sum();
    let d2: f64 = window.iter().zip(&w[2]).map(|(p, w)| p.1 * w).sum();
    Ok(d2.abs() / (1.0 + d1 * d1).powf(1.5))
}

/// `R = 1 / kappa`; zero curvature maps to `f64::INFINITY` (flat).
pub fn bending_radius(kappa: f64) -> Result<f64> {
    if kappa < 0.0 || kappa.is_nan() {
        return Err(Error::NegativeCurvature(kappa));
    }
    if kappa == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / kappa)
}

/// Direction of the bend profile across the pad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BendAxis {
    /// Cylinder axis along x: stress ramps down the rows, peaking on the bottom row.
    #[default]
    Horizontal,
    /// Cylinder axis along y: stress ramps across the columns, peaking on the last column.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendState {
    /// Metres; `f64::INFINITY` for a flat pad.
    pub bending_radius: f64,
    pub axis: BendAxis,
    /// Peak baseline force times radius (N m).
    pub stress_profile_scale: f64,
}

impl BendState {
    pub const DEFAULT_SCALE: f64 = 4e-3;

    pub fn flat() -> Self {
        Self {
            bending_radius: f64::INFINITY,
            axis: BendAxis::Horizontal,
            stress_profile_scale: Self::DEFAULT_SCALE,
        }
    }

    pub fn new(bending_radius: f64, axis: BendAxis, stress_profile_scale: f64) -> Result<Self> {
        let s = Self {
            bending_radius,
            axis,
            stress_profile_scale,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_radius(bending_radius: f64) -> Result<Self> {
        Self::new(bending_radius, BendAxis::Horizontal, Self::DEFAULT_SCALE)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bending_radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bending radius must be positive, got {}",
                self.bending_radius
            )));
        }
        if !(self.stress_profile_scale >= 0.0 && self.stress_profile_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "stress profile scale {}",
                self.stress_profile_scale
            )));
        }
        Ok(())
    }

    pub fn is_flat(&self) -> bool {
        self.bending_radius.is_infinite()
    }

    /// Peak baseline force, `scale / R`.
    pub fn amplitude(&self) -> f64 {
        if self.is_flat() {
            0.0
        } else {
            self.stress_profile_scale / self.bending_radius
        }
    }
}

impl Default for BendState {
    fn default() -> Self {
        Self::flat()
    }
}

/// Baseline force added by bending: a linear ramp along the bend axis from
/// zero at the near edge to `amplitude()` at the far edge.
pub fn bend_stress_field(bend: &BendState, geometry: &SensorGeometry) -> Result<PressureField> {
    bend.validate()?;
    geometry.validate()?;
    let (rows, cols) = (geometry.rows, geometry.cols);
    let amp = bend.amplitude();
    if amp == 0.0 {
        return Ok(PressureField::zeros(rows, cols));
    }
    let ramp = |i: usize, n: usize| if n == 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let t = match bend.axis {
                BendAxis::Horizontal => ramp(r, rows),
                BendAxis::Vertical => ramp(c, cols),
            };
            values.push(amp * t);
        }
    }
    PressureField::from_vec(rows, cols, values)
}
