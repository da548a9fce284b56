//! Writes a capture's stages to the text frame log, reads them back, and
//! ingests an externally recorded frame.
use velopad::crosstalk::crosstalk_frame;
use velopad::io::{format_frame_log, ingest_external, parse_frame_log, records_for_staged};
use velopad::pipeline::{run_pipeline, PipelineConfig};
use velopad::simulate::PadSimulator;
use velopad::{SensorGeometry, WeightStimulus};

fn main() -> velopad::Result<()> {
    let mut sim = PadSimulator::new(SensorGeometry::characterization_mat(4e-3)?);
    sim.readout.frames_per_capture = 10;
    let (field, _) = sim.field(&[], &[WeightStimulus::new(1, 3, 0.5)])?;
    let staged = run_pipeline(&sim.capture_static(&field, Some(2))?, &PipelineConfig { frames_per_capture: 10, ..Default::default() })?;
    let text = format_frame_log(&records_for_staged(0, 0.0, &staged));
    print!("{text}");

    let (records, errors) = parse_frame_log(&format!("# header\n{text}not,a,record\n"));
    println!("read {} records, {} bad line(s): {}", records.len(), errors.len(), errors[0]);

    let recorded = "0,0.5,raw_volts,3,3,1.94,0.15,0,0.04,0,0,0,0,0\n";
    let (frames, _) = ingest_external(recorded);
    println!("external frame: C = {:.6}", crosstalk_frame(&frames[0].frame, (0, 0))?.value);
    Ok(())
}
