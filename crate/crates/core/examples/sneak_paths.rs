//! Three pressed pixels of a 2x2 crossbar make the fourth, unpressed one read
//! high when the unselected lines float. Grounding them removes the sneak
//! path.
use velopad::circuit::{read_pixel, ReadoutConfig, ResistorNetwork};

fn main() -> velopad::Result<()> {
    let on = 1_000.0;
    let off = 1e6;
    let net = ResistorNetwork::from_resistances(2, 2, &[on, on, on, off], None);
    let floating = ReadoutConfig::default();
    let grounded = ReadoutConfig { ground_unselected: true, ..floating };

    println!("pixel  floating  grounded");
    for r in 0..2 {
        for c in 0..2 {
            let a = read_pixel(&net, (r, c), &floating)?;
            let b = read_pixel(&net, (r, c), &grounded)?;
            println!("({r},{c})  {a:8.4}  {b:8.4}");
        }
    }

    // with leaky off pixels, the sheet carries current from a pressed
    // junction to its neighbours
    for lateral in [None, Some(5_000.0)] {
        let net = ResistorNetwork::from_resistances(2, 2, &[on, off, off, off], lateral);
        println!("sheet {lateral:?}: unpressed (0,1) reads {:.4} V", read_pixel(&net, (0, 1), &floating)?);
    }
    Ok(())
}
