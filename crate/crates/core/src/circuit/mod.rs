//! Electrical model of the crossbar.
//!
//! Each crossover is a velostat resistor between a row and a column
//! electrode. The selected row is driven at `v_dd`, the selected column is
//! returned to ground through `r_bias`, and the reading is the voltage
//! across `r_bias`. Unselected electrodes float unless
//! [`ReadoutConfig::ground_unselected`] is set, so current also finds its way
//! through other pixels (sneak paths) and, when enabled, laterally through
//! the velostat sheet.

mod network;
mod readout;
mod solver;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use network::{build_network, Lateral, NodeId, PixelBranch, ResistorNetwork};
pub use readout::{adc_quantize, add_measurement_noise, read_pixel, scan_frame, scan_frame_per_selection};
pub use solver::{EnvelopeCholesky, NotPositiveDefinite};

/// Pressure-to-resistance law of one velostat crossover plus the two
/// electrical leakage parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelostatModel {
    /// Unpressed resistance (ohm).
    pub r_off: f64,
    /// Saturated resistance (ohm).
    pub r_on: f64,
    /// Force (N) at which the resistance is halfway between `r_off` and `r_on`.
    pub p_half: f64,
    pub gamma: f64,
    /// Lateral sheet resistance of the velostat (ohm per square). A lateral
    /// link between neighbouring crossovers is `r_sheet * pitch / line_width`.
    /// `f64::INFINITY` disables lateral conduction.
    pub r_sheet: f64,
}

impl Default for VelostatModel {
    fn default() -> Self {
        Self {
            r_off: 100e3,
            r_on: 200.0,
            p_half: 0.2,
            gamma: 1.5,
            r_sheet: 50e3,
        }
    }
}

impl VelostatModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_on > 0.0 && self.r_off > self.r_on && self.r_off.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "need r_off > r_on > 0, got r_off={} r_on={}",
                self.r_off, self.r_on
            )));
        }
        if !(self.p_half > 0.0 && self.p_half.is_finite()) {
            return Err(Error::InvalidConfig(format!("p_half {}", self.p_half)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma {}", self.gamma)));
        }
        if !(self.r_sheet > 0.0) {
            return Err(Error::InvalidConfig(format!("r_sheet {}", self.r_sheet)));
        }
        Ok(())
    }

    /// `R(p) = r_on + (r_off - r_on) / (1 + (p / p_half)^gamma)`.
    pub fn resistance(&self, p: f64) -> Result<f64> {
        if p < 0.0 || p.is_nan() {
            return Err(Error::NegativePressure(p));
        }
        if p == 0.0 {
            return Ok(self.r_off);
        }
        Ok(self.r_on + (self.r_off - self.r_on) / (1.0 + (p / self.p_half).powf(self.gamma)))
    }

    /// Pixel conductance. Without `finite_off` the unpressed leakage
    /// `1 / r_off` is removed, so an unpressed pixel is an open circuit.
    /// Excess conductance below a millionth of the leakage (pressure tails
    /// of a few ulps) also counts as open; it would only leave nearly
    /// floating nodes in the nodal matrix.
    pub fn conductance(&self, p: f64, finite_off: bool) -> Result<f64> {
        let g = 1.0 / self.resistance(p)?;
        let g_off = 1.0 / self.r_off;
        if finite_off {
            Ok(g)
        } else if g - g_off <= 1e-6 * g_off {
            Ok(0.0)
        } else {
            Ok(g - g_off)
        }
    }

    pub fn lateral_resistance(&self, pitch: f64, line_width: f64) -> f64 {
        self.r_sheet * pitch / line_width
    }
}

pub fn velostat_resistance(p: f64, model: &VelostatModel) -> Result<f64> {
    model.resistance(p)
}

/// Which crosstalk mechanisms the simulation includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mechanisms {
    pub sheet_paths: bool,
    pub finite_off: bool,
    pub diffusion: bool,
}

impl Mechanisms {
    pub const fn all() -> Self {
        Self {
            sheet_paths: true,
            finite_off: true,
            diffusion: true,
        }
    }

    pub const fn none() -> Self {
        Self {
            sheet_paths: false,
            finite_off: false,
            diffusion: false,
        }
    }

    pub fn any(&self) -> bool {
        self.sheet_paths || self.finite_off || self.diffusion
    }
}

impl Default for Mechanisms {
    fn default() -> Self {
        Self::all()
    }
}

impl fmt::Display for Mechanisms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.sheet_paths, "sheet_paths"),
            (self.finite_off, "finite_off"),
            (self.diffusion, "diffusion"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

/// Parses `all`, `none`, or a comma-separated subset of
/// `sheet_paths,finite_off,diffusion`.
impl FromStr for Mechanisms {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "all" => return Ok(Self::all()),
            "none" | "" => return Ok(Self::none()),
            _ => {}
        }
        let mut m = Self::none();
        for part in s.split(',').map(str::trim) {
            match part {
                "sheet_paths" | "sheet" => m.sheet_paths = true,
                "finite_off" | "off" => m.finite_off = true,
                "diffusion" => m.diffusion = true,
                other => {
                    return Err(Error::InvalidConfig(format!("unknown mechanism '{other}'")))
                }
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutConfig {
    pub v_dd: f64,
    pub r_bias: f64,
    pub adc_bits: u32,
    /// Seconds per raster frame.
    pub frame_period: f64,
    pub frames_per_capture: usize,
    pub mechanisms: Mechanisms,
    /// Tie every unselected electrode to ground instead of leaving it floating.
    pub ground_unselected: bool,
    /// Standard deviation of additive measurement noise per reading (V).
    pub noise_std: f64,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            v_dd: 5.0,
            r_bias: 1000.0,
            adc_bits: 10,
            frame_period: 0.1,
            frames_per_capture: 100,
            mechanisms: Mechanisms::all(),
            ground_unselected: false,
            noise_std: 2e-3,
        }
    }
}

impl ReadoutConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_dd > 0.0 && self.v_dd.is_finite()) {
            return Err(Error::InvalidConfig(format!("v_dd {}", self.v_dd)));
        }
        if !(self.r_bias > 0.0 && self.r_bias.is_finite()) {
            return Err(Error::InvalidConfig(format!("r_bias {}", self.r_bias)));
        }
        if !(1..=16).contains(&self.adc_bits) {
            return Err(Error::InvalidConfig(format!(
                "adc_bits must be in 1..=16, got {}",
                self.adc_bits
            )));
        }
        if !(self.frame_period > 0.0 && self.frame_period.is_finite()) {
            return Err(Error::InvalidConfig(format!("frame_period {}", self.frame_period)));
        }
        if self.frames_per_capture == 0 {
            return Err(Error::InvalidConfig("frames_per_capture must be >= 1".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidConfig(format!("noise_std {}", self.noise_std)));
        }
        Ok(())
    }

    pub fn adc_full_scale(&self) -> u32 {
        (1u32 << self.adc_bits) - 1
    }

    /// Wall time of one capture, `frame_period * frames_per_capture`.
    pub fn capture_period(&self) -> f64 {
        self.frame_period * self.frames_per_capture as f64
    }
}
