//! Per-connection state of the interactive pad service and the JSON
//! messages it exchanges with clients.
//!
//! Client to server: `stroke`, `clear`, `config`. Server to client:
//! `frame`, `report`, `error`, and `config` as an echo of the full
//! configuration after every change.
//!
//! ```json
//! {"type":"stroke","events":[{"x":0.012,"y":0.02,"force":2.0,"timestamp":0.0}]}
//! {"type":"clear"}
//! {"type":"config","config":{"blur_sigma":0.0,"mechanisms":"none","fast":true}}
//! {"type":"frame","stage":"binary","record":{"capture_id":3,"timestamp":1.5,"stage":"binary","rows":16,"cols":16,"values":[...]}}
//! {"type":"report","capture_id":3,"timestamp":1.5,"peak":[4,7],"crosstalk":0.041,"exceeds_reference":false}
//! {"type":"error","message":"..."}
//! ```
//!
//! The session tares its pad: readings are relative to the unloaded flat
//! pad, so a cleared pad reads zero unless a noise seed is configured.
//! Strokes are persistent: the session keeps every stroke event until a
//! `clear`. Each capture redraws them across its `n` frames in arrival
//! order, event `i` of `m` in frame `floor(i * n / m)`, so a frame presses
//! only a piece of the drawing as a pen would. It then runs the pipeline
//! and emits one `raw_volts` frame (the first scan of the capture), then
//! `sum`, `sn`, `blur`, `binary` and a report.

use serde::{Deserialize, Serialize};

use crate::bend::BendState;
use crate::circuit::Mechanisms;
use crate::crosstalk::crosstalk_frame;
use crate::error::{Error, Result};
use crate::geometry::SensorGeometry;
use crate::io::{records_for_staged, FrameLogRecord, Stage};
use crate::frame::Frame;
use crate::pipeline::{run_pipeline, PipelineConfig, StagedOutput};
use crate::simulate::PadSimulator;
use crate::stimulus::{deposit_stroke, PressureField, StrokeEvent, WeightStimulus};

/// Frames per capture in fast mode.
pub const FAST_FRAMES: usize = 5;

/// Everything a session needs to simulate and process captures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    pub simulator: PadSimulator,
    pub pipeline: PipelineConfig,
    /// Seed of the measurement noise; `None` captures noiselessly.
    pub seed: Option<u64>,
    /// Use [`FAST_FRAMES`] frames per capture instead of the pipeline's `n`.
    pub fast: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            simulator: PadSimulator {
                tare: true,
                ..PadSimulator::default()
            },
            pipeline: PipelineConfig::default(),
            seed: None,
            fast: false,
        }
    }
}

/// A partial configuration keyed like the command-line flags. Lengths are
/// in the unit named by the key. `bend_radius_cm = 0` means flat.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pitch_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line_width_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_ohm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vdd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adc_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frames_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blur_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanisms: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bend_radius_cm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_period_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffusion_sigma_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_std_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_unselected: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tare: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fast: Option<bool>,
}

impl ConfigPatch {
    /// `other`'s fields win where set.
    pub fn merged(mut self, other: &ConfigPatch) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            rows, cols, pitch_mm, line_width_mm, bias_ohm, vdd, adc_bits, frames_n, blur_sigma,
            seed, mechanisms, bend_radius_cm, frame_period_s, diffusion_sigma_mm, noise_std_v,
            ground_unselected, tare, fast
        );
        self
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        self.simulator.validate()?;
        self.pipeline.validate()
    }

    pub fn frames_n(&self) -> usize {
        if self.fast {
            FAST_FRAMES
        } else {
            self.pipeline.frames_per_capture
        }
    }

    /// Simulator with its capture length set to [`Self::frames_n`].
    pub fn capture_simulator(&self) -> PadSimulator {
        let mut sim = self.simulator;
        sim.readout.frames_per_capture = self.frames_n();
        sim
    }

    /// Wall time of one capture in seconds.
    pub fn capture_period(&self) -> f64 {
        self.simulator.readout.frame_period * self.frames_n() as f64
    }

    /// Returns the patched configuration, or an error if the result is
    /// invalid. `self` is left untouched either way.
    pub fn apply(&self, patch: &ConfigPatch) -> Result<SessionConfig> {
        let mut c = *self;
        let sim = &mut c.simulator;
        let g = &mut sim.geometry;
        if let Some(v) = patch.rows {
            g.rows = v;
        }
        if let Some(v) = patch.cols {
            g.cols = v;
        }
        if let Some(v) = patch.pitch_mm {
            g.pitch = v * 1e-3;
        }
        if let Some(v) = patch.line_width_mm {
            g.line_width = v * 1e-3;
        }
        if g.rows > 255 || g.cols > 255 {
            return Err(Error::InvalidGeometry(format!(
                "{}x{} exceeds the 255x255 limit",
                g.rows, g.cols
            )));
        }
        let r = &mut sim.readout;
        if let Some(v) = patch.bias_ohm {
            r.r_bias = v;
        }
        if let Some(v) = patch.vdd {
            r.v_dd = v;
        }
        if let Some(v) = patch.adc_bits {
            r.adc_bits = v;
        }
        if let Some(v) = patch.frame_period_s {
            r.frame_period = v;
        }
        if let Some(v) = patch.noise_std_v {
            r.noise_std = v;
        }
        if let Some(v) = patch.ground_unselected {
            r.ground_unselected = v;
        }
        if let Some(m) = &patch.mechanisms {
            r.mechanisms = m.parse::<Mechanisms>()?;
        }
        if let Some(v) = patch.diffusion_sigma_mm {
            sim.diffusion_sigma = v * 1e-3;
        }
        if let Some(v) = patch.bend_radius_cm {
            sim.bend = if v == 0.0 {
                BendState { bending_radius: f64::INFINITY, ..sim.bend }
            } else {
                BendState::new(v * 1e-2, sim.bend.axis, sim.bend.stress_profile_scale)?
            };
        }
        if let Some(v) = patch.frames_n {
            c.pipeline.frames_per_capture = v;
        }
        if let Some(v) = patch.blur_sigma {
            c.pipeline.blur_sigma = v;
        }
        if let Some(v) = patch.seed {
            c.seed = Some(v);
        }
        if let Some(v) = patch.tare {
            c.simulator.tare = v;
        }
        if let Some(v) = patch.fast {
            c.fast = v;
        }
        c.simulator.readout.frames_per_capture = c.pipeline.frames_per_capture;
        c.validate()?;
        Ok(c)
    }

    /// Every key set to the current value.
    pub fn to_patch(&self) -> ConfigPatch {
        let sim = &self.simulator;
        ConfigPatch {
            rows: Some(sim.geometry.rows),
            cols: Some(sim.geometry.cols),
            pitch_mm: Some(sim.geometry.pitch * 1e3),
            line_width_mm: Some(sim.geometry.line_width * 1e3),
            bias_ohm: Some(sim.readout.r_bias),
            vdd: Some(sim.readout.v_dd),
            adc_bits: Some(sim.readout.adc_bits),
            frames_n: Some(self.pipeline.frames_per_capture),
            blur_sigma: Some(self.pipeline.blur_sigma),
            seed: self.seed,
            mechanisms: Some(sim.readout.mechanisms.to_string()),
            bend_radius_cm: Some(if sim.bend.is_flat() {
                0.0
            } else {
                sim.bend.bending_radius * 1e2
            }),
            frame_period_s: Some(sim.readout.frame_period),
            diffusion_sigma_mm: Some(sim.diffusion_sigma * 1e3),
            noise_std_v: Some(sim.readout.noise_std),
            ground_unselected: Some(sim.readout.ground_unselected),
            tare: Some(sim.tare),
            fast: Some(self.fast),
        }
    }
}

/// Contents of a stimulus file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stimulus {
    #[serde(default)]
    pub strokes: Vec<StrokeEvent>,
    #[serde(default)]
    pub weights: Vec<WeightStimulus>,
}

/// One simulated capture of a stimulus and its pipeline output.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub frames: Vec<Frame>,
    pub staged: StagedOutput,
    /// Indices of rejected stimuli, strokes first, then weights.
    pub rejected: Vec<(usize, Error)>,
}

impl SessionConfig {
    /// Captures a time-stamped stimulus (see
    /// [`PadSimulator::capture_strokes`]) and runs the pipeline on it.
    pub fn simulate(&self, stimulus: &Stimulus) -> Result<SimulationRun> {
        self.validate()?;
        let sim = self.capture_simulator();
        let capture = sim.capture_strokes(&stimulus.strokes, &stimulus.weights, self.seed)?;
        let pipeline = PipelineConfig {
            frames_per_capture: capture.frames.len(),
            ..self.pipeline
        };
        let staged = run_pipeline(&capture.frames, &pipeline)?;
        Ok(SimulationRun {
            frames: capture.frames,
            staged,
            rejected: capture.rejected,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SessionMessage {
    Stroke {
        events: Vec<StrokeEvent>,
    },
    Clear,
    Config {
        config: ConfigPatch,
    },
    Frame {
        stage: Stage,
        record: FrameLogRecord,
    },
    Report {
        capture_id: u64,
        timestamp: f64,
        /// Brightest pixel of the sum frame, where the crosstalk is taken.
        peak: Option<(usize, usize)>,
        crosstalk: Option<f64>,
        exceeds_reference: bool,
    },
    Error {
        message: String,
    },
}

impl SessionMessage {
    pub fn error(message: impl Into<String>) -> Self {
        SessionMessage::Error {
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("messages serialize")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One simulated pad.
#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    /// Accepted stroke events in arrival order.
    events: Vec<StrokeEvent>,
    /// Their total force, before diffusion.
    deposited: PressureField,
    next_capture: u64,
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            events: Vec::new(),
            deposited: PressureField::for_geometry(&config.simulator.geometry),
            config,
            next_capture: 0,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn deposited(&self) -> &PressureField {
        &self.deposited
    }

    /// Id the next capture will carry.
    pub fn next_capture_id(&self) -> u64 {
        self.next_capture
    }

    /// Parses and handles one text message.
    pub fn handle_text(&mut self, text: &str) -> Vec<SessionMessage> {
        match SessionMessage::from_json(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![SessionMessage::error(format!("bad message: {e}"))],
        }
    }

    /// Applies one client message and returns the replies.
    pub fn handle(&mut self, msg: SessionMessage) -> Vec<SessionMessage> {
        match msg {
            SessionMessage::Stroke { events } => self.stroke(&events),
            SessionMessage::Clear => {
                self.clear();
                Vec::new()
            }
            SessionMessage::Config { config } => match self.configure(&config) {
                Ok(()) => vec![SessionMessage::Config {
                    config: self.config.to_patch(),
                }],
                Err(e) => vec![SessionMessage::error(format!("config rejected: {e}"))],
            },
            SessionMessage::Frame { .. } | SessionMessage::Report { .. } | SessionMessage::Error { .. } => {
                vec![SessionMessage::error("frame, report and error messages are sent by the server only")]
            }
        }
    }

    /// Deposits stroke events. Events off the pad are dropped and reported.
    pub fn stroke(&mut self, events: &[StrokeEvent]) -> Vec<SessionMessage> {
        let geometry = self.config.simulator.geometry;
        let mut rejected = Vec::new();
        for (i, ev) in events.iter().enumerate() {
            match ev.validate(&geometry) {
                Ok(()) => {
                    deposit_stroke(&mut self.deposited, &geometry, ev);
                    self.events.push(*ev);
                }
                Err(e) => rejected.push(format!("event {i}: {e}")),
            }
        }
        if rejected.is_empty() {
            Vec::new()
        } else {
            vec![SessionMessage::error(format!(
                "{} of {} stroke events rejected: {}",
                rejected.len(),
                events.len(),
                rejected.join("; ")
            ))]
        }
    }

    pub fn clear(&mut self) {
        self.events.clear();
        self.deposited = PressureField::for_geometry(&self.config.simulator.geometry);
    }

    /// Stroke events kept since the last clear.
    pub fn events(&self) -> &[StrokeEvent] {
        &self.events
    }

    /// Replaces the configuration. A change of grid size clears the pad.
    pub fn configure(&mut self, patch: &ConfigPatch) -> Result<()> {
        let next = self.config.apply(patch)?;
        let resized = {
            let (a, b) = (&next.simulator.geometry, &self.config.simulator.geometry);
            (a.rows, a.cols) != (b.rows, b.cols)
        };
        self.config = next;
        if resized {
            self.clear();
        }
        Ok(())
    }

    /// Runs one capture of the current pad and returns its frame and report
    /// messages. Capture ids increase by one per call.
    pub fn capture(&mut self) -> Result<Vec<SessionMessage>> {
        self.prepare_capture().run()
    }

    /// Takes the next capture id and a snapshot of the pad. The returned job
    /// can run elsewhere while the session keeps taking messages.
    pub fn prepare_capture(&mut self) -> CaptureJob {
        let id = self.next_capture;
        self.next_capture += 1;
        CaptureJob {
            id,
            config: self.config,
            events: self.events.clone(),
        }
    }
}

/// One capture of a session snapshot.
#[derive(Debug, Clone)]
pub struct CaptureJob {
    id: u64,
    config: SessionConfig,
    events: Vec<StrokeEvent>,
}

impl CaptureJob {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn run(self) -> Result<Vec<SessionMessage>> {
        let id = self.id;
        let sim = self.config.capture_simulator();
        let n = sim.readout.frames_per_capture;
        let m = self.events.len();
        let period = sim.readout.frame_period;
        let redrawn: Vec<StrokeEvent> = self
            .events
            .iter()
            .enumerate()
            .map(|(i, ev)| StrokeEvent {
                timestamp: ((i * n / m) as f64 + 0.5) * period,
                ..*ev
            })
            .collect();
        let frames = sim
            .capture_strokes(&redrawn, &[], self.config.seed.map(|s| capture_seed(s, id)))?
            .frames;
        let pipeline = PipelineConfig {
            frames_per_capture: frames.len(),
            ..self.config.pipeline
        };
        let staged = run_pipeline(&frames, &pipeline)?;

        let timestamp = id as f64 * self.config.capture_period();
        let mut out = Vec::with_capacity(6);
        let first = FrameLogRecord::from_frame(id, timestamp, Stage::RawVolts, &frames[0]);
        out.push(SessionMessage::Frame {
            stage: Stage::RawVolts,
            record: first,
        });
        for record in records_for_staged(id, timestamp, &staged) {
            out.push(SessionMessage::Frame {
                stage: record.stage,
                record,
            });
        }
        let (peak, c) = if staged.raw.max() > 0.0 {
            let p = staged.raw.argmax();
            (Some(p), crosstalk_frame(&staged.raw, p).ok())
        } else {
            (None, None)
        };
        out.push(SessionMessage::Report {
            capture_id: id,
            timestamp,
            peak,
            crosstalk: c.map(|c| c.value),
            exceeds_reference: c.is_some_and(|c| c.exceeds_reference),
        });
        Ok(out)
    }
}

/// Independent noise seed for every capture of a session.
fn capture_seed(seed: u64, capture_id: u64) -> u64 {
    seed ^ capture_id.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// A geometry-sized session with the given grid, for tests and examples.
pub fn session_for(geometry: SensorGeometry) -> Result<Session> {
    let mut config = SessionConfig::default();
    config.simulator.geometry = geometry;
    Session::new(config)
}
