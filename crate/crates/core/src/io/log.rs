//! Text frame log. One record per line:
//!
//! ```text
//! capture_id,timestamp,stage,rows,cols,v0,v1,...
//! ```
//!
//! Values are row-major and written in the shortest decimal that parses
//! back to the same `f64`. Blank lines and lines starting with `#` are
//! skipped.

use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, Unit};
use crate::pipeline::StagedOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    RawVolts,
    Adc,
    Sum,
    Sn,
    Blur,
    Binary,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::RawVolts,
        Stage::Adc,
        Stage::Sum,
        Stage::Sn,
        Stage::Blur,
        Stage::Binary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::RawVolts => "raw_volts",
            Stage::Adc => "adc",
            Stage::Sum => "sum",
            Stage::Sn => "sn",
            Stage::Blur => "blur",
            Stage::Binary => "binary",
        }
    }

    /// Unit a frame of this stage is read back as. Sums keep raw readings
    /// of whatever scale was accumulated and come back as volts.
    pub fn unit(self) -> Unit {
        match self {
            Stage::RawVolts | Stage::Sum => Unit::Volts,
            Stage::Adc => Unit::AdcCounts,
            Stage::Sn | Stage::Blur | Stage::Binary => Unit::Normalized,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown stage '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLogRecord {
    pub capture_id: u64,
    pub timestamp: f64,
    pub stage: Stage,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl FrameLogRecord {
    pub fn from_frame(capture_id: u64, timestamp: f64, stage: Stage, frame: &Frame) -> Self {
        Self {
            capture_id,
            timestamp,
            stage,
            rows: frame.rows(),
            cols: frame.cols(),
            values: frame.values().to_vec(),
        }
    }

    /// Frame in the stage's unit, validated against it.
    pub fn to_frame(&self) -> Result<Frame> {
        Frame::from_vec(self.rows, self.cols, self.values.clone(), self.stage.unit())
    }

    pub fn to_frame_as(&self, unit: Unit) -> Result<Frame> {
        Frame::from_vec(self.rows, self.cols, self.values.clone(), unit)
    }

    /// The record as one log line, without the newline.
    pub fn to_line(&self) -> String {
        let mut s = format!(
            "{},{},{},{},{}",
            self.capture_id, self.timestamp, self.stage, self.rows, self.cols
        );
        for v in &self.values {
            write!(s, ",{v}").expect("writing to a String");
        }
        s
    }

    pub fn parse_line(line: &str) -> std::result::Result<Self, String> {
        let mut fields = line.split(',').map(str::trim);
        let mut next = |name: &str| fields.next().ok_or_else(|| format!("missing {name}"));
        let capture_id = next("capture_id")?
            .parse::<u64>()
            .map_err(|e| format!("capture_id: {e}"))?;
        let timestamp = next("timestamp")?
            .parse::<f64>()
            .map_err(|e| format!("timestamp: {e}"))?;
        let stage = next("stage")?.parse::<Stage>().map_err(|e| e.to_string())?;
        let rows = next("rows")?.parse::<usize>().map_err(|e| format!("rows: {e}"))?;
        let cols = next("cols")?.parse::<usize>().map_err(|e| format!("cols: {e}"))?;
        let values = fields
            .enumerate()
            .map(|(i, f)| f.parse::<f64>().map_err(|e| format!("value {i}: {e}")))
            .collect::<std::result::Result<Vec<f64>, String>>()?;
        if values.len() != rows * cols {
            return Err(format!(
                "{} values for a {rows}x{cols} record",
                values.len()
            ));
        }
        Ok(Self {
            capture_id,
            timestamp,
            stage,
            rows,
            cols,
            values,
        })
    }
}

/// A rejected log line, numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Parses a whole log. Malformed lines are reported and skipped.
pub fn parse_frame_log(text: &str) -> (Vec<FrameLogRecord>, Vec<LineError>) {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match FrameLogRecord::parse_line(line) {
            Ok(r) => records.push(r),
            Err(message) => errors.push(LineError { line: i + 1, message }),
        }
    }
    (records, errors)
}

pub fn read_frame_log<R: BufRead>(mut reader: R) -> std::io::Result<(Vec<FrameLogRecord>, Vec<LineError>)> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    Ok(parse_frame_log(&text))
}

pub fn format_frame_log(records: &[FrameLogRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s
}

pub fn write_frame_log<W: Write>(mut writer: W, records: &[FrameLogRecord]) -> std::io::Result<()> {
    writer.write_all(format_frame_log(records).as_bytes())
}

/// The four pipeline stages as sum, sn, blur and binary records.
pub fn records_for_staged(capture_id: u64, timestamp: f64, staged: &StagedOutput) -> Vec<FrameLogRecord> {
    vec![
        FrameLogRecord::from_frame(capture_id, timestamp, Stage::Sum, &staged.raw),
        FrameLogRecord::from_frame(capture_id, timestamp, Stage::Sn, &staged.squared_normalized),
        FrameLogRecord::from_frame(capture_id, timestamp, Stage::Blur, &staged.blurred),
        FrameLogRecord::from_frame(capture_id, timestamp, Stage::Binary, &staged.binary),
    ]
}

/// Reassembles a staged output from its four records.
pub fn staged_from_records(records: &[FrameLogRecord]) -> Result<StagedOutput> {
    let find = |stage: Stage| {
        records
            .iter()
            .find(|r| r.stage == stage)
            .ok_or_else(|| Error::InvalidConfig(format!("no {stage} record")))
    };
    Ok(StagedOutput {
        raw: find(Stage::Sum)?.to_frame()?,
        squared_normalized: find(Stage::Sn)?.to_frame()?,
        blurred: find(Stage::Blur)?.to_frame()?,
        binary: find(Stage::Binary)?.to_frame()?,
    })
}
