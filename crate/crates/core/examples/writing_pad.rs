//! Writes the letter L on the 16x16 pad. Written over a capture, the pen
//! presses one spot per frame and the sum traces the letter. Pressed all at
//! once, sneak paths fill in the corner.
use velopad::pipeline::{run_pipeline, PipelineConfig, StagedOutput};
use velopad::simulate::PadSimulator;
use velopad::stimulus::strokes_along;
use velopad::Frame;

fn show(name: &str, f: &Frame) {
    println!("{name}");
    let top = f.max().max(f64::MIN_POSITIVE);
    for r in 0..f.rows() {
        let line: String = (0..f.cols())
            .map(|c| {
                let v = f.get(r, c) / top;
                [' ', '.', ':', 'o', '#'][((v * 4.0).round() as usize).min(4)]
            })
            .collect();
        println!("  |{line}|");
    }
}

fn main() -> velopad::Result<()> {
    let mut sim = PadSimulator::default();
    sim.tare = true;
    let period = sim.readout.capture_period();
    let strokes = strokes_along(&[(0.008, 0.005), (0.008, 0.04), (0.03, 0.04)], 0.5e-3, 2.0, 0.0, 0.99 * period);
    let cfg = PipelineConfig::default();

    let written: StagedOutput = run_pipeline(&sim.capture_strokes(&strokes, &[], Some(1))?.frames, &cfg)?;
    show("written: sum", &written.raw);
    show("written: squared and normalized", &written.squared_normalized);
    show("written: blurred", &written.blurred);
    show("written: binary", &written.binary);

    let (field, _) = sim.field(&strokes, &[])?;
    let pressed = run_pipeline(&sim.capture_static(&field, Some(1))?, &cfg)?;
    show("pressed at once: binary", &pressed.binary);
    Ok(())
}
