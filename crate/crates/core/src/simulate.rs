//! End-to-end pad simulation: stimuli in, raster frames out.

use serde::{Deserialize, Serialize};

use crate::bend::{bend_stress_field, BendState};
use crate::circuit::{add_measurement_noise, scan_frame, ReadoutConfig, VelostatModel};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::geometry::SensorGeometry;
use crate::stimulus::{deposit_stroke, diffuse, PressureField, StrokeEvent, WeightStimulus};

/// Everything needed to turn stimuli into readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PadSimulator {
    pub geometry: SensorGeometry,
    pub model: VelostatModel,
    pub readout: ReadoutConfig,
    /// Standard deviation of mechanical force spreading (m).
    pub diffusion_sigma: f64,
    pub bend: BendState,
    /// Subtract the scan of the unloaded flat pad from every reading,
    /// clamping at zero.
    #[serde(default)]
    pub tare: bool,
}

impl Default for PadSimulator {
    fn default() -> Self {
        Self::new(SensorGeometry::writing_pad())
    }
}

/// Frames of one capture plus the stroke events that could not be placed.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub frames: Vec<Frame>,
    pub rejected: Vec<(usize, Error)>,
}

impl PadSimulator {
    pub const DEFAULT_DIFFUSION_SIGMA: f64 = 1.5e-3;

    pub fn new(geometry: SensorGeometry) -> Self {
        Self {
            geometry,
            model: VelostatModel::default(),
            readout: ReadoutConfig::default(),
            diffusion_sigma: Self::DEFAULT_DIFFUSION_SIGMA,
            bend: BendState::flat(),
            tare: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.model.validate()?;
        self.readout.validate()?;
        self.bend.validate()?;
        if !(self.diffusion_sigma >= 0.0 && self.diffusion_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "diffusion sigma {}",
                self.diffusion_sigma
            )));
        }
        Ok(())
    }

    /// Diffusion width actually applied; zero when the mechanism is off.
    pub fn effective_sigma(&self) -> f64 {
        if self.readout.mechanisms.diffusion {
            self.diffusion_sigma
        } else {
            0.0
        }
    }

    /// Diffuses a deposited force field and adds the bend baseline.
    pub fn settle(&self, deposited: &PressureField) -> Result<PressureField> {
        let mut field = diffuse(deposited, &self.geometry, self.effective_sigma())?;
        field.superpose(&bend_stress_field(&self.bend, &self.geometry)?);
        Ok(field)
    }

    /// Static field of all strokes and weights together, ignoring timestamps.
    pub fn field(&self, strokes: &[StrokeEvent], weights: &[WeightStimulus]) -> Result<(PressureField, Vec<(usize, Error)>)> {
        self.validate()?;
        let mut deposited = PressureField::for_geometry(&self.geometry);
        let mut rejected = Vec::new();
        for (i, ev) in strokes.iter().enumerate() {
            match ev.validate(&self.geometry) {
                Ok(()) => deposit_stroke(&mut deposited, &self.geometry, ev),
                Err(e) => rejected.push((i, e)),
            }
        }
        for (i, w) in weights.iter().enumerate() {
            match w.validate(&self.geometry) {
                Ok(()) => deposited.add(w.row, w.col, w.force()),
                Err(e) => rejected.push((strokes.len() + i, e)),
            }
        }
        Ok((self.settle(&deposited)?, rejected))
    }

    /// One noiseless raster scan.
    pub fn scan(&self, field: &PressureField) -> Result<Frame> {
        self.validate()?;
        scan_frame(&self.geometry, field, &self.model, &self.readout, None)
    }

    /// Noiseless scan of the pad with nothing on it and no bend.
    pub fn reference_scan(&self) -> Result<Frame> {
        let flat = PadSimulator {
            bend: BendState::flat(),
            ..*self
        };
        flat.scan(&PressureField::for_geometry(&self.geometry))
    }

    fn tare_reference(&self) -> Result<Option<Frame>> {
        if self.tare {
            Ok(Some(self.reference_scan()?))
        } else {
            Ok(None)
        }
    }

    fn noisy_copies(&self, clean: &Frame, reference: Option<&Frame>, seed: Option<u64>, first_index: u64, count: usize) -> Vec<Frame> {
        (0..count)
            .map(|k| {
                let mut f = clean.clone();
                if let Some(seed) = seed {
                    add_measurement_noise(&mut f, &self.readout, seed, first_index + k as u64);
                }
                if let Some(reference) = reference {
                    f = Frame::from_fn(f.rows(), f.cols(), f.unit(), |r, c| (f.get(r, c) - reference.get(r, c)).max(0.0));
                }
                f
            })
            .collect()
    }

    /// `frames_per_capture` frames of a field that does not change during
    /// the capture. Frame `k` carries the noise of stream `k` of `seed`.
    pub fn capture_static(&self, field: &PressureField, seed: Option<u64>) -> Result<Vec<Frame>> {
        let clean = self.scan(field)?;
        let reference = self.tare_reference()?;
        Ok(self.noisy_copies(&clean, reference.as_ref(), seed, 0, self.readout.frames_per_capture))
    }

    /// Time-resolved capture of a writing session. Frame `k` covers
    /// `[k * frame_period, (k + 1) * frame_period)` and sees only the stroke
    /// samples stamped inside that window; weights and bend act throughout.
    /// Samples outside the capture window or the pad are rejected.
    pub fn capture_strokes(&self, strokes: &[StrokeEvent], weights: &[WeightStimulus], seed: Option<u64>) -> Result<Capture> {
        self.validate()?;
        let n = self.readout.frames_per_capture;
        let period = self.readout.frame_period;

        let mut base = PressureField::for_geometry(&self.geometry);
        let mut rejected = Vec::new();
        for (i, w) in weights.iter().enumerate() {
            match w.validate(&self.geometry) {
                Ok(()) => base.add(w.row, w.col, w.force()),
                Err(e) => rejected.push((strokes.len() + i, e)),
            }
        }

        let mut per_frame: Vec<Vec<&StrokeEvent>> = vec![Vec::new(); n];
        for (i, ev) in strokes.iter().enumerate() {
            if let Err(e) = ev.validate(&self.geometry) {
                rejected.push((i, e));
                continue;
            }
            let k = (ev.timestamp / period).floor();
            if !(k >= 0.0 && k < n as f64) {
                rejected.push((
                    i,
                    Error::InvalidStimulus(format!(
                        "timestamp {} outside the {} s capture",
                        ev.timestamp,
                        self.readout.capture_period()
                    )),
                ));
                continue;
            }
            per_frame[k as usize].push(ev);
        }
        rejected.sort_by_key(|(i, _)| *i);

        let reference = self.tare_reference()?;
        let mut idle: Option<Frame> = None;
        let mut frames = Vec::with_capacity(n);
        for (k, events) in per_frame.iter().enumerate() {
            let clean = if events.is_empty() {
                if idle.is_none() {
                    idle = Some(self.scan(&self.settle(&base)?)?);
                }
                idle.clone().expect("idle frame computed")
            } else {
                let mut deposited = base.clone();
                for ev in events {
                    deposit_stroke(&mut deposited, &self.geometry, ev);
                }
                self.scan(&self.settle(&deposited)?)?
            };
            frames.extend(self.noisy_copies(&clean, reference.as_ref(), seed, k as u64, 1));
        }
        Ok(Capture { frames, rejected })
    }
}
