//! Distance-weighted crosstalk of a stimulated pixel.
//!
//! For a stimulated pixel reading `p0` and neighbours with readings `p_i`
//! at Euclidean distances `d_i` (in pixels):
//!
//! ```text
//! C = sum(d_i * p_i) / (p0 * sum(d_i))
//! ```
//!
//! `C` lies in `[0, 1]` while no neighbour reads more than the stimulated
//! pixel. Distant neighbours weigh more, so a far pixel with a high reading
//! is penalized more than an adjacent one.

use serde::{Deserialize, Serialize};

use crate::circuit::Mechanisms;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::simulate::PadSimulator;
use crate::stimulus::WeightStimulus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodKind {
    Corner,
    Edge,
    Center,
    /// Any neighbourhood other than the adjacent ring.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub stimulated: (usize, usize),
    /// `(position, distance in pixels)`.
    pub members: Vec<((usize, usize), f64)>,
    pub kind: NeighborhoodKind,
}

impl Neighborhood {
    /// An arbitrary neighbourhood; distances are Euclidean from `stimulated`.
    pub fn from_positions(stimulated: (usize, usize), positions: &[(usize, usize)]) -> Self {
        let members = positions
            .iter()
            .filter(|p| **p != stimulated)
            .map(|&p| (p, pixel_distance(stimulated, p)))
            .collect();
        Self {
            stimulated,
            members,
            kind: NeighborhoodKind::Custom,
        }
    }

    /// Every other pixel of a `rows x cols` grid.
    pub fn whole_grid(stimulated: (usize, usize), rows: usize, cols: usize) -> Self {
        let all: Vec<_> = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
        Self::from_positions(stimulated, &all)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn pixel_distance(a: (usize, usize), b: (usize, usize)) -> f64 {
    let dr = a.0 as f64 - b.0 as f64;
    let dc = a.1 as f64 - b.1 as f64;
    (dr * dr + dc * dc).sqrt()
}

/// The adjacent ring (Chebyshev distance 1) of `s` in a `rows x cols` grid.
pub fn neighborhood(s: (usize, usize), rows: usize, cols: usize) -> Result<Neighborhood> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidGeometry(format!(
            "neighbourhoods need a grid of at least 2x2, got {rows}x{cols}"
        )));
    }
    if s.0 >= rows || s.1 >= cols {
        return Err(Error::OutOfBounds {
            row: s.0,
            col: s.1,
            rows,
            cols,
        });
    }
    let mut members = Vec::with_capacity(8);
    for dr in -1isize..=1 {
        for dc in -1isize..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let (r, c) = (s.0 as isize + dr, s.1 as isize + dc);
            if r < 0 || c < 0 || r >= rows as isize || c >= cols as isize {
                continue;
            }
            let p = (r as usize, c as usize);
            members.push((p, pixel_distance(s, p)));
        }
    }
    let kind = match members.len() {
        3 => NeighborhoodKind::Corner,
        5 => NeighborhoodKind::Edge,
        8 => NeighborhoodKind::Center,
        _ => unreachable!("adjacent ring in a grid of at least 2x2"),
    };
    Ok(Neighborhood {
        stimulated: s,
        members,
        kind,
    })
}

/// Reading of the stimulated pixel and `(distance, reading)` of each neighbour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkInput {
    pub p0: f64,
    pub neighbors: Vec<(f64, f64)>,
}

impl CrosstalkInput {
    pub fn new(p0: f64, neighbors: Vec<(f64, f64)>) -> Self {
        Self { p0, neighbors }
    }

    pub fn from_frame(frame: &Frame, hood: &Neighborhood) -> Result<Self> {
        let (r, c) = hood.stimulated;
        frame.check_in_grid(r, c)?;
        let mut neighbors = Vec::with_capacity(hood.members.len());
        for &((nr, nc), d) in &hood.members {
            frame.check_in_grid(nr, nc)?;
            neighbors.push((d, frame.get(nr, nc)));
        }
        Ok(Self {
            p0: frame.get(r, c),
            neighbors,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkValue {
    pub value: f64,
    /// Some neighbour read more than the stimulated pixel, so `value` may
    /// exceed 1. It is reported unclamped.
    pub exceeds_reference: bool,
}

pub fn crosstalk(input: &CrosstalkInput) -> Result<CrosstalkValue> {
    if !(input.p0 > 0.0 && input.p0.is_finite()) {
        return Err(Error::UndefinedMetric(input.p0));
    }
    if input.neighbors.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    let mut weighted = 0.0;
    let mut distance = 0.0;
    let mut exceeds = false;
    for (i, &(d, p)) in input.neighbors.iter().enumerate() {
        if !(p >= 0.0) {
            return Err(Error::NegativeReading { index: i, value: p });
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidConfig(format!("neighbour distance {d}")));
        }
        weighted += d * p;
        distance += d;
        exceeds |= p > input.p0;
    }
    Ok(CrosstalkValue {
        value: weighted / (input.p0 * distance),
        exceeds_reference: exceeds,
    })
}

/// Crosstalk of `s` in a frame over its adjacent ring.
pub fn crosstalk_frame(frame: &Frame, s: (usize, usize)) -> Result<CrosstalkValue> {
    let hood = neighborhood(s, frame.rows(), frame.cols())?;
    crosstalk_frame_with(frame, &hood)
}

pub fn crosstalk_frame_with(frame: &Frame, hood: &Neighborhood) -> Result<CrosstalkValue> {
    crosstalk(&CrosstalkInput::from_frame(frame, hood)?)
}

/// Count, mean, population standard deviation and range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation (divides by `count`).
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Self {
            count: values.len(),
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Crosstalk of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkReport {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    pub mass_kg: f64,
    pub mechanisms: Mechanisms,
    /// Row-major; `None` where the pixel was not stimulated or its metric
    /// is undefined.
    pub per_pixel: Vec<Option<f64>>,
    /// Stimulated pixels whose own reading was zero.
    pub undefined: Vec<(usize, usize)>,
    /// Stimulated pixels where a neighbour out-read the stimulated pixel.
    pub flagged: Vec<(usize, usize)>,
    pub summary: Option<Summary>,
}

impl CrosstalkReport {
    pub fn values(&self) -> Vec<f64> {
        self.per_pixel.iter().flatten().copied().collect()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.per_pixel[row * self.cols + col]
    }

    /// Builds a report from per-pixel values, recomputing the statistics.
    pub fn from_values(
        rows: usize,
        cols: usize,
        pitch: f64,
        mass_kg: f64,
        mechanisms: Mechanisms,
        per_pixel: Vec<Option<f64>>,
    ) -> Self {
        let defined: Vec<f64> = per_pixel.iter().flatten().copied().collect();
        Self {
            rows,
            cols,
            pitch,
            mass_kg,
            mechanisms,
            summary: Summary::of(&defined),
            per_pixel,
            undefined: Vec::new(),
            flagged: Vec::new(),
        }
    }
}

/// Crosstalk of one weight placed on `s`, from a noiseless scan (or the
/// sum of a seeded noisy capture).
pub fn simulate_point(sim: &PadSimulator, s: (usize, usize), mass_kg: f64, seed: Option<u64>) -> Result<(Frame, Result<CrosstalkValue>)> {
    let (field, rejected) = sim.field(&[], &[WeightStimulus::new(s.0, s.1, mass_kg)])?;
    if let Some((_, e)) = rejected.into_iter().next() {
        return Err(e);
    }
    let frame = match seed {
        None => sim.scan(&field)?,
        Some(seed) => {
            let frames = sim.capture_static(&field, Some(seed))?;
            crate::pipeline::accumulate(&frames, frames.len())?
        }
    };
    let c = crosstalk_frame(&frame, s);
    Ok((frame, c))
}

/// Sweeps pitch and weight. Each point stimulates the centre pixel, or
/// every pixel in turn when `per_pixel` is set. Reports are sorted by pitch,
/// then weight.
pub fn characterize(
    sim: &PadSimulator,
    weights_kg: &[f64],
    pitches: &[f64],
    per_pixel: bool,
    seed: Option<u64>,
) -> Result<Vec<CrosstalkReport>> {
    if weights_kg.is_empty() || pitches.is_empty() {
        return Err(Error::InvalidConfig("sweep lists must be nonempty".into()));
    }
    let mut pitches = pitches.to_vec();
    pitches.sort_by(f64::total_cmp);
    let mut weights = weights_kg.to_vec();
    weights.sort_by(f64::total_cmp);

    let mut reports = Vec::with_capacity(pitches.len() * weights.len());
    for &pitch in &pitches {
        let point_sim = PadSimulator {
            geometry: sim.geometry.with_pitch(pitch)?,
            ..*sim
        };
        point_sim.validate()?;
        let (rows, cols) = (point_sim.geometry.rows, point_sim.geometry.cols);
        let targets: Vec<(usize, usize)> = if per_pixel {
            (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect()
        } else {
            vec![point_sim.geometry.center_pixel()]
        };
        for &mass in &weights {
            let mut per = vec![None; rows * cols];
            let mut undefined = Vec::new();
            let mut flagged = Vec::new();
            for &s in &targets {
                let (_, c) = simulate_point(&point_sim, s, mass, seed)?;
                match c {
                    Ok(c) => {
                        per[s.0 * cols + s.1] = Some(c.value);
                        if c.exceeds_reference {
                            flagged.push(s);
                        }
                    }
                    Err(Error::UndefinedMetric(_)) => undefined.push(s),
                    Err(e) => return Err(e),
                }
            }
            let mut report = CrosstalkReport::from_values(
                rows,
                cols,
                pitch,
                mass,
                point_sim.readout.mechanisms,
                per,
            );
            report.undefined = undefined;
            report.flagged = flagged;
            reports.push(report);
        }
    }
    Ok(reports)
}
