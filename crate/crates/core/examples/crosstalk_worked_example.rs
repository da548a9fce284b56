//! Crosstalk of a stimulated corner pixel from its three neighbours.
use velopad::crosstalk::{crosstalk, crosstalk_frame, CrosstalkInput};
use velopad::{Frame, Unit};

fn main() -> velopad::Result<()> {
    let input = CrosstalkInput::new(1.94, vec![(1.0, 0.15), (2f64.sqrt(), 0.0), (1.0, 0.04)]);
    let c = crosstalk(&input)?;
    println!("C = {:.6} (above reference: {})", c.value, c.exceeds_reference);

    // the same readings as a frame
    let frame = Frame::from_vec(3, 3, vec![1.94, 0.15, 0.0, 0.04, 0.0, 0.0, 0.0, 0.0, 0.0], Unit::Volts)?;
    println!("from frame: {:.6}", crosstalk_frame(&frame, (0, 0))?.value);

    // a silent stimulated pixel leaves C undefined
    let dark = CrosstalkInput::new(0.0, vec![(1.0, 0.1)]);
    println!("p0 = 0: {}", crosstalk(&dark).unwrap_err());
    Ok(())
}
