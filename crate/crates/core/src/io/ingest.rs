//! Frames recorded elsewhere (a hardware mat, another tool) brought in
//! through the frame log.

use serde::{Deserialize, Serialize};

use super::log::{format_frame_log, parse_frame_log, FrameLogRecord, LineError, Stage};
use crate::error::Result;
use crate::frame::{Frame, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Simulated,
    External,
}

/// A logged frame read as raw readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestedFrame {
    pub capture_id: u64,
    pub timestamp: f64,
    pub stage: Stage,
    pub provenance: Provenance,
    pub frame: Frame,
}

impl IngestedFrame {
    pub fn to_record(&self) -> FrameLogRecord {
        FrameLogRecord::from_frame(self.capture_id, self.timestamp, self.stage, &self.frame)
    }
}

/// Parses a frame log and tags every frame as external. Values are taken
/// as raw readings whatever their stage tag says.
pub fn ingest_external(text: &str) -> (Vec<IngestedFrame>, Vec<LineError>) {
    let (records, mut errors) = parse_frame_log(text);
    let mut frames = Vec::with_capacity(records.len());
    for (r, line) in records.into_iter().zip(record_lines(text)) {
        match to_ingested(r) {
            Ok(f) => frames.push(f),
            Err(e) => errors.push(LineError {
                line,
                message: e.to_string(),
            }),
        }
    }
    errors.sort_by_key(|e| e.line);
    (frames, errors)
}

fn to_ingested(r: FrameLogRecord) -> Result<IngestedFrame> {
    let frame = r.to_frame_as(Unit::Volts)?;
    Ok(IngestedFrame {
        capture_id: r.capture_id,
        timestamp: r.timestamp,
        stage: r.stage,
        provenance: Provenance::External,
        frame,
    })
}

/// Line numbers of the lines that parsed into records.
fn record_lines(text: &str) -> Vec<usize> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#') && FrameLogRecord::parse_line(l).is_ok()
        })
        .map(|(i, _)| i + 1)
        .collect()
}

pub fn export_ingested(frames: &[IngestedFrame]) -> String {
    let records: Vec<FrameLogRecord> = frames.iter().map(IngestedFrame::to_record).collect();
    format_frame_log(&records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crosstalk::crosstalk_frame;

    const CORNER: &str = "\
# corner stimulus, 3x3
0,0,raw_volts,3,3,1.94,0.15,0,0.04,0,0,0,0,0
";

    #[test]
    fn corner_fixture_metric() {
        let (frames, errors) = ingest_external(CORNER);
        assert!(errors.is_empty());
        assert_eq!(frames[0].provenance, Provenance::External);
        let c = crosstalk_frame(&frames[0].frame, (0, 0)).unwrap();
        assert!((c.value - 0.02868).abs() < 1e-4);
    }

    #[test]
    fn re_export_is_identical() {
        let text = "4,1.25,sum,2,2,0.1,2.5,1e-7,3\n";
        let (frames, _) = ingest_external(text);
        let out = export_ingested(&frames);
        let (again, _) = ingest_external(&out);
        assert_eq!(frames, again);
        assert_eq!(out, "4,1.25,sum,2,2,0.1,2.5,0.0000001,3\n");
    }

    #[test]
    fn bad_lines_do_not_stop_ingestion() {
        let text = "0,0,sum,1,1,1\n0,0,sum,0,0\n1,0,sum,1,1,2\n";
        let (frames, errors) = ingest_external(text);
        assert_eq!(frames.len(), 2);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 2);
    }
}
