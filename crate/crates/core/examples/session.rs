//! Drives an interactive pad session with the JSON messages a client would
//! send over the socket.
use velopad::session::{Session, SessionConfig, SessionMessage};

fn main() -> velopad::Result<()> {
    let mut session = Session::new(SessionConfig::default())?;
    let inbox = [
        r#"{"type":"config","config":{"fast":true,"seed":3}}"#,
        r#"{"type":"stroke","events":[{"x":0.01,"y":0.02,"force":2.0,"timestamp":0.0},{"x":0.02,"y":0.02,"force":2.0,"timestamp":0.01},{"x":0.03,"y":0.02,"force":2.0,"timestamp":0.02}]}"#,
        r#"{"type":"stroke","events":[{"x":0.5,"y":0.5,"force":1.0,"timestamp":0.0}]}"#,
        r#"{"type":"bogus"}"#,
    ];
    for text in inbox {
        for reply in session.handle_text(text) {
            println!("<- {}", reply.to_json());
        }
    }
    for msg in session.capture()? {
        match msg {
            SessionMessage::Frame { stage, record } => {
                let on = record.values.iter().filter(|v| **v > 0.0).count();
                println!("frame {stage}: {on} nonzero pixels");
            }
            other => println!("{}", other.to_json()),
        }
    }
    Ok(())
}
