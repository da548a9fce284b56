//! Frame log, wire protocol, ingestion of external frames and report output.

mod crc;
mod ingest;
mod log;
mod report;
mod wire;

pub use crc::crc16_ccitt_false;
pub use ingest::{export_ingested, ingest_external, IngestedFrame, Provenance};
pub use log::{
    format_frame_log, parse_frame_log, read_frame_log, records_for_staged, staged_from_records,
    write_frame_log, FrameLogRecord, LineError, Stage,
};
pub use report::{per_pixel_table, reports_from_json, reports_to_json, summary_table};
pub use wire::{decode_stream, encode_wire, frame_len, DecodeDiagnostics, WireDecoder, WireFrame, MAGIC, VERSION};
