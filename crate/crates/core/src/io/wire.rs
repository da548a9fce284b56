//! Binary frame stream of the pad's readout board.
//!
//! ```text
//! offset  size        field
//! 0       2           magic A5 5A
//! 2       1           version (0x01)
//! 3       2           sequence number, little-endian, wraps at 2^16
//! 5       1           rows
//! 6       1           cols
//! 7       2*rows*cols samples, u16 little-endian, row-major ADC counts
//! 7+2n    2           CRC-16/CCITT-FALSE of bytes 2..7+2n, little-endian
//! ```

use serde::{Deserialize, Serialize};

use super::crc::crc16_ccitt_false;
use crate::error::{Error, Result};
use crate::frame::{Frame, Unit};

pub const MAGIC: [u8; 2] = [0xA5, 0x5A];
pub const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 7;
const CRC_LEN: usize = 2;

/// Total encoded length of a `rows x cols` frame.
pub const fn frame_len(rows: usize, cols: usize) -> usize {
    HEADER_LEN + 2 * rows * cols + CRC_LEN
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFrame {
    pub seq: u16,
    pub rows: u8,
    pub cols: u8,
    pub samples: Vec<u16>,
}

impl WireFrame {
    pub fn from_frame(frame: &Frame, seq: u16) -> Result<Self> {
        if frame.unit() != Unit::AdcCounts {
            return Err(Error::UnitMismatch {
                expected: Unit::AdcCounts,
                got: frame.unit(),
            });
        }
        let (rows, cols) = frame.dims();
        if rows > 255 || cols > 255 {
            return Err(Error::WireDimensions { rows, cols });
        }
        let mut samples = Vec::with_capacity(rows * cols);
        for (i, &v) in frame.values().iter().enumerate() {
            if !(v.fract() == 0.0 && (0.0..=65535.0).contains(&v)) {
                return Err(Error::InvalidSamples(format!("sample {i} = {v} is not a u16 count")));
            }
            samples.push(v as u16);
        }
        Ok(Self {
            seq,
            rows: rows as u8,
            cols: cols as u8,
            samples,
        })
    }

    pub fn to_frame(&self) -> Frame {
        Frame::new_unchecked(
            self.rows as usize,
            self.cols as usize,
            self.samples.iter().map(|&s| s as f64).collect(),
            Unit::AdcCounts,
        )
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(frame_len(self.rows as usize, self.cols as usize));
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.seq.to_le_bytes());
        out.push(self.rows);
        out.push(self.cols);
        for s in &self.samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
        let crc = crc16_ccitt_false(&out[MAGIC.len()..]);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }
}

/// Encodes an ADC-count frame.
pub fn encode_wire(frame: &Frame, seq: u16) -> Result<Vec<u8>> {
    Ok(WireFrame::from_frame(frame, seq)?.encode())
}

/// What the decoder had to skip or discard.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeDiagnostics {
    pub frames: usize,
    /// Runs of skipped bytes before the decoder locked onto a frame again.
    pub resyncs: usize,
    pub skipped_bytes: usize,
    pub crc_failures: usize,
    /// Candidates with a bad version, zero or unexpected dimensions.
    pub bad_headers: usize,
    /// A frame start at the end of the stream with too few bytes behind it.
    pub truncated_tails: usize,
}

impl DecodeDiagnostics {
    /// True when nothing was skipped, rejected or truncated.
    pub fn is_clean(&self) -> bool {
        self.resyncs == 0
            && self.skipped_bytes == 0
            && self.crc_failures == 0
            && self.bad_headers == 0
            && self.truncated_tails == 0
    }
}

enum Candidate {
    Frame(WireFrame, usize),
    NeedMore,
    Reject,
}

/// Incremental decoder. Scans for the magic, validates header and CRC, and
/// on any failure steps one byte forward and scans again. Buffered bytes
/// never exceed one maximum-size frame plus the latest push.
#[derive(Debug, Default)]
pub struct WireDecoder {
    buf: Vec<u8>,
    expected: Option<(usize, usize)>,
    diag: DecodeDiagnostics,
    skipping: bool,
}

impl WireDecoder {
    pub fn new(expected_dims: Option<(usize, usize)>) -> Self {
        Self {
            expected: expected_dims,
            ..Self::default()
        }
    }

    pub fn diagnostics(&self) -> &DecodeDiagnostics {
        &self.diag
    }

    fn skip_byte(&mut self, pos: &mut usize) {
        if !self.skipping {
            self.skipping = true;
            self.diag.resyncs += 1;
        }
        self.diag.skipped_bytes += 1;
        *pos += 1;
    }

    fn candidate(&mut self, at: usize) -> Candidate {
        let b = &self.buf[at..];
        if b.len() < HEADER_LEN {
            return Candidate::NeedMore;
        }
        let (rows, cols) = (b[5] as usize, b[6] as usize);
        let dims_ok = rows > 0 && cols > 0 && self.expected.map_or(true, |e| e == (rows, cols));
        if b[2] != VERSION || !dims_ok {
            self.diag.bad_headers += 1;
            return Candidate::Reject;
        }
        let len = frame_len(rows, cols);
        if b.len() < len {
            return Candidate::NeedMore;
        }
        let body = &b[MAGIC.len()..len - CRC_LEN];
        let crc = u16::from_le_bytes([b[len - 2], b[len - 1]]);
        if crc16_ccitt_false(body) != crc {
            self.diag.crc_failures += 1;
            return Candidate::Reject;
        }
        let samples = b[HEADER_LEN..len - CRC_LEN]
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        Candidate::Frame(
            WireFrame {
                seq: u16::from_le_bytes([b[3], b[4]]),
                rows: rows as u8,
                cols: cols as u8,
                samples,
            },
            len,
        )
    }

    fn run(&mut self, at_end: bool) -> Vec<WireFrame> {
        let mut out = Vec::new();
        let mut pos = 0;
        let mut truncated_seen = false;
        while pos < self.buf.len() {
            let rest = &self.buf[pos..];
            if rest.len() < MAGIC.len() {
                if at_end || rest[0] != MAGIC[0] {
                    self.skip_byte(&mut pos);
                    continue;
                }
                break;
            }
            if rest[..2] != MAGIC {
                self.skip_byte(&mut pos);
                continue;
            }
            match self.candidate(pos) {
                Candidate::Frame(frame, len) => {
                    pos += len;
                    self.skipping = false;
                    self.diag.frames += 1;
                    out.push(frame);
                }
                Candidate::Reject => self.skip_byte(&mut pos),
                Candidate::NeedMore if at_end => {
                    if !truncated_seen {
                        truncated_seen = true;
                        self.diag.truncated_tails += 1;
                    }
                    self.skip_byte(&mut pos);
                }
                Candidate::NeedMore => break,
            }
        }
        self.buf.drain(..pos);
        out
    }

    /// Feeds bytes and returns every frame completed by them.
    pub fn push(&mut self, bytes: &[u8]) -> Vec<WireFrame> {
        self.buf.extend_from_slice(bytes);
        self.run(false)
    }

    /// Flushes the tail of the stream.
    pub fn finish(mut self) -> (Vec<WireFrame>, DecodeDiagnostics) {
        let frames = self.run(true);
        (frames, self.diag)
    }
}

/// Decodes a complete byte stream.
pub fn decode_stream(bytes: &[u8], expected_dims: Option<(usize, usize)>) -> (Vec<WireFrame>, DecodeDiagnostics) {
    let mut dec = WireDecoder::new(expected_dims);
    let mut frames = dec.push(bytes);
    let (tail, diag) = dec.finish();
    frames.extend(tail);
    (frames, diag)
}
