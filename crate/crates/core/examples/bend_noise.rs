//! Bending the pad presses the velostat along one edge. The curvature of a
//! sampled profile gives the radius, and the resulting baseline shows up on a
//! blank pad.
use velopad::bend::{bending_radius, curvature, BendState};
use velopad::simulate::PadSimulator;

fn main() -> velopad::Result<()> {
    // arc of a 5 cm radius cylinder, sampled every millimetre
    let radius = 0.05;
    let samples: Vec<(f64, f64)> = (-20..=20)
        .map(|i| {
            let x = i as f64 * 1e-3;
            (x, radius - (radius * radius - x * x).sqrt())
        })
        .collect();
    let kappa = curvature(&samples, 0.0)?;
    println!("curvature {kappa:.3} 1/m, radius {:.2} cm", bending_radius(kappa)? * 100.0);

    // readings relative to the flat unloaded pad
    let mut sim = PadSimulator::default();
    sim.tare = true;
    sim.readout.frames_per_capture = 1;
    let blank = velopad::PressureField::for_geometry(&sim.geometry);
    for r in [f64::INFINITY, 0.2, 0.1, 0.05, 0.02] {
        sim.bend = if r.is_finite() { BendState::with_radius(r)? } else { BendState::flat() };
        let frame = sim.capture_static(&sim.settle(&blank)?, None)?.remove(0);
        let rows: Vec<String> = (0..frame.rows()).step_by(5).map(|i| format!("{:.3}", frame.get(i, 8))).collect();
        println!("R = {:>5} cm: max {:.3} V, column 8 every 5 rows [{}]", r * 100.0, frame.max(), rows.join(" "));
    }
    Ok(())
}
