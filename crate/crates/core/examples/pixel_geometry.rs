//! Pixel layout of the writing pad and the neighbourhoods used by the
//! crosstalk metric.
use velopad::crosstalk::neighborhood;
use velopad::SensorGeometry;

fn main() -> velopad::Result<()> {
    let pad = SensorGeometry::writing_pad();
    let (w, h) = pad.extent();
    println!("{}x{} pad, pitch {} mm, lines {} mm, {:.1} x {:.1} mm", pad.rows, pad.cols, pad.pitch * 1e3, pad.line_width * 1e3, w * 1e3, h * 1e3);
    for (r, c) in [(0, 0), (0, 15), (7, 8), (15, 15)] {
        let (x, y) = pad.pixel_center(r, c)?;
        println!("pixel ({r:>2},{c:>2}) centre at ({:.3}, {:.3}) mm", x * 1e3, y * 1e3);
    }

    let mat = SensorGeometry::characterization_mat(4e-3)?;
    for s in [(0, 0), (0, 2), (2, 2)] {
        let hood = neighborhood(s, mat.rows, mat.cols)?;
        let members: Vec<String> = hood.members.iter().map(|((r, c), d)| format!("({r},{c}) d={d:.3}")).collect();
        println!("{:?} {:?}: {}", s, hood.kind, members.join(", "));
    }
    Ok(())
}
