//! Crosstalk of a 3x3 mat against pitch for several mechanism sets. The
//! sheet only matters once off pixels leak.
use velopad::circuit::Mechanisms;
use velopad::crosstalk::characterize;
use velopad::io::summary_table;
use velopad::simulate::PadSimulator;
use velopad::SensorGeometry;

fn main() -> velopad::Result<()> {
    let mut sim = PadSimulator::new(SensorGeometry::new(3, 3, 0.05, 5e-3)?);
    sim.diffusion_sigma = 15e-3;
    let pitches = [0.01, 0.02, 0.03, 0.04, 0.05];
    let sets = [
        Mechanisms { sheet_paths: true, finite_off: true, diffusion: false },
        Mechanisms { sheet_paths: false, finite_off: true, diffusion: false },
        Mechanisms { sheet_paths: false, finite_off: false, diffusion: true },
        Mechanisms::all(),
    ];
    let mut reports = Vec::new();
    for m in sets {
        sim.readout.mechanisms = m;
        reports.extend(characterize(&sim, &[0.5], &pitches, true, None)?);
    }
    print!("{}", summary_table(&reports));
    Ok(())
}
