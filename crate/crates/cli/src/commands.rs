use std::io::Write;
use std::time::Duration;

use anyhow::Context;
use velopad::circuit::adc_quantize;
use velopad::crosstalk::{characterize, crosstalk_frame, Summary};
use velopad::io::{
    decode_stream, encode_wire, format_frame_log, ingest_external, per_pixel_table, records_for_staged,
    reports_to_json, summary_table, FrameLogRecord, Stage,
};
use velopad::pipeline::{run_pipeline, PipelineConfig};
use velopad::session::{SessionConfig, Stimulus};
use velopad::Error;

use crate::{write_output, CrosstalkArgs, Format, ReplayArgs, SimulateArgs};

pub fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let config = args.config.resolve(SessionConfig::default())?;
    let stimulus: Stimulus = match &args.stimulus {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => Stimulus::default(),
    };
    let run = config.simulate(&stimulus)?;
    for (i, e) in &run.rejected {
        eprintln!("warning: stimulus {i} rejected: {e}");
    }

    let period = config.simulator.readout.frame_period;
    let bytes = match args.format {
        Format::Log => {
            let mut records = Vec::new();
            if args.all_frames {
                for (k, f) in run.frames.iter().enumerate() {
                    records.push(FrameLogRecord::from_frame(0, k as f64 * period, Stage::RawVolts, f));
                }
            }
            records.extend(records_for_staged(0, config.capture_period(), &run.staged));
            format_frame_log(&records).into_bytes()
        }
        Format::Wire => {
            let mut out = Vec::new();
            for (k, f) in run.frames.iter().enumerate() {
                let counts = adc_quantize(f, &config.simulator.readout)?;
                out.extend(encode_wire(&counts, k as u16)?);
            }
            out
        }
    };
    write_output(args.out.as_deref(), &bytes)
}

pub fn crosstalk(args: &CrosstalkArgs) -> anyhow::Result<()> {
    let mut base = SessionConfig::default();
    base.simulator.tare = false;
    let mut flags = args.config.clone();
    if flags.pitch_mm.is_none() {
        // validate against a sweep pitch rather than the default one
        flags.pitch_mm = args.pitches_mm.iter().copied().reduce(f64::max);
    }
    let config = flags.resolve(base)?;
    let mut out = String::new();

    if let Some(path) = &args.log {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let (frames, errors) = ingest_external(&text);
        for e in &errors {
            eprintln!("warning: {}: {e}", path.display());
        }
        out.push_str("capture_id\tstage\tpixel\tcrosstalk\n");
        let mut values = Vec::new();
        for f in &frames {
            let s = args.pixel.unwrap_or_else(|| f.frame.argmax());
            let cell = match crosstalk_frame(&f.frame, s) {
                Ok(c) => {
                    values.push(c.value);
                    if c.exceeds_reference {
                        format!("{:.6} (neighbour above stimulated pixel)", c.value)
                    } else {
                        format!("{:.6}", c.value)
                    }
                }
                Err(Error::UndefinedMetric(_)) => "undefined".into(),
                Err(e) => format!("error: {e}"),
            };
            out.push_str(&format!("{}\t{}\t{},{}\t{}\n", f.capture_id, f.stage, s.0, s.1, cell));
        }
        if let Some(m) = Summary::of(&values) {
            out.push_str(&format!(
                "# n={} mean={:.6} std={:.6} min={:.6} max={:.6}\n",
                m.count, m.mean, m.std, m.min, m.max
            ));
        }
    } else {
        let sim = config.capture_simulator();
        let pitches: Vec<f64> = if args.pitches_mm.is_empty() {
            vec![sim.geometry.pitch]
        } else {
            args.pitches_mm.iter().map(|p| p * 1e-3).collect()
        };
        let reports = characterize(&sim, &args.weights_kg, &pitches, args.per_pixel, config.seed)?;
        if args.json {
            out.push_str(&reports_to_json(&reports));
            out.push('\n');
        } else {
            out.push_str(&summary_table(&reports));
            if args.per_pixel {
                for r in &reports {
                    out.push_str(&format!("\n# pitch {} mm, {} kg\n", r.pitch * 1e3, r.mass_kg));
                    out.push_str(&per_pixel_table(r));
                }
            }
        }
    }
    write_output(None, out.as_bytes())
}

pub fn replay(args: &ReplayArgs) -> anyhow::Result<()> {
    if !(args.speed >= 0.0 && args.speed.is_finite()) {
        anyhow::bail!("speed must be a finite number >= 0, got {}", args.speed);
    }
    let config = args.config.resolve(SessionConfig::default())?;
    let bytes = std::fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (frames, diag) = decode_stream(&bytes, None);
    eprintln!(
        "decoded {} frames: {} resyncs, {} skipped bytes, {} crc failures, {} bad headers, {} truncated tails",
        diag.frames, diag.resyncs, diag.skipped_bytes, diag.crc_failures, diag.bad_headers, diag.truncated_tails
    );

    let n = config.frames_n();
    let period = config.simulator.readout.frame_period;
    let pipeline = PipelineConfig {
        frames_per_capture: n,
        ..config.pipeline
    };
    let mut sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut pending = Vec::with_capacity(n);
    for (k, wf) in frames.iter().enumerate() {
        if args.speed > 0.0 && k > 0 {
            std::thread::sleep(Duration::from_secs_f64(period / args.speed));
        }
        let capture_id = (k / n) as u64;
        let frame = wf.to_frame();
        let record = FrameLogRecord::from_frame(capture_id, k as f64 * period, Stage::Adc, &frame);
        writeln!(sink, "{}", record.to_line())?;
        pending.push(frame);
        if pending.len() == n {
            match run_pipeline(&pending, &pipeline) {
                Ok(staged) => {
                    let ts = (k + 1) as f64 * period;
                    for r in records_for_staged(capture_id, ts, &staged) {
                        writeln!(sink, "{}", r.to_line())?;
                    }
                }
                Err(e) => eprintln!("warning: capture {capture_id} skipped: {e}"),
            }
            pending.clear();
        }
        sink.flush()?;
    }
    if !pending.is_empty() {
        eprintln!("warning: {} trailing frames do not fill a capture of {n}", pending.len());
    }
    Ok(())
}
