//! Encodes ADC frames for the serial link, damages the stream and decodes
//! what survives.
use velopad::io::{encode_wire, WireDecoder};
use velopad::{Frame, Unit};

fn main() -> velopad::Result<()> {
    let one = encode_wire(&Frame::from_vec(1, 1, vec![0x0123 as f64], Unit::AdcCounts)?, 0)?;
    let hex: Vec<String> = one.iter().map(|b| format!("{b:02X}")).collect();
    println!("1x1 frame: {}", hex.join(" "));

    let mut stream = b"boot noise".to_vec();
    for seq in 0..4u16 {
        let f = Frame::from_fn(16, 16, Unit::AdcCounts, |r, c| ((r * 16 + c) as u16 * (seq + 1)) as f64);
        stream.extend(encode_wire(&f, seq)?);
    }
    stream[10 + 521 + 50] ^= 0x40;
    stream.truncate(stream.len() - 100);

    // fed in small chunks, as bytes would arrive from a port
    let mut decoder = WireDecoder::new(Some((16, 16)));
    let mut got = Vec::new();
    for chunk in stream.chunks(64) {
        got.extend(decoder.push(chunk));
    }
    let (tail, diag) = decoder.finish();
    got.extend(tail);
    println!("frames {:?}", got.iter().map(|w| w.seq).collect::<Vec<_>>());
    println!("{diag:?}");
    Ok(())
}
