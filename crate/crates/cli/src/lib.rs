//! Command-line front end for velopad: simulate a stimulus through the
//! pipeline, compute crosstalk, serve interactive pad sessions over
//! WebSocket, and replay recorded wire streams.

mod commands;
mod service;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use velopad::session::{ConfigPatch, SessionConfig};

pub use commands::{crosstalk, replay, simulate};
pub use service::{router, serve, serve_listener};

#[derive(Debug, Parser)]
#[command(name = "velopad", version, about = "Velostat crossbar pressure-pad simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a stimulus file and write the staged frame log.
    Simulate(SimulateArgs),
    /// Crosstalk of logged frames, or a simulated pitch/weight sweep.
    Crosstalk(CrosstalkArgs),
    /// Serve interactive pad sessions over WebSocket at /ws.
    Serve(ServeArgs),
    /// Decode a wire capture and run it through the pipeline.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Log,
    Wire,
}

/// Simulation flags shared by every subcommand. They override the keys of
/// the `--config` TOML file, which uses the same names with underscores.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with any of the keys below (e.g. `pitch_mm = 3.0`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub pitch_mm: Option<f64>,
    #[arg(long)]
    pub line_width_mm: Option<f64>,
    #[arg(long)]
    pub bias_ohm: Option<f64>,
    #[arg(long)]
    pub vdd: Option<f64>,
    #[arg(long)]
    pub adc_bits: Option<u32>,
    /// Frames accumulated per capture.
    #[arg(long)]
    pub frames_n: Option<usize>,
    /// Blur standard deviation in pixels.
    #[arg(long)]
    pub blur_sigma: Option<f64>,
    /// Noise seed; without one, captures are noiseless.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `all`, `none`, or a list of sheet_paths,finite_off,diffusion.
    #[arg(long)]
    pub mechanisms: Option<String>,
    /// Bending radius; 0 is flat.
    #[arg(long)]
    pub bend_radius_cm: Option<f64>,
    #[arg(long)]
    pub frame_period_s: Option<f64>,
    #[arg(long)]
    pub diffusion_sigma_mm: Option<f64>,
    #[arg(long)]
    pub noise_std_v: Option<f64>,
    #[arg(long)]
    pub ground_unselected: Option<bool>,
    /// Subtract the unloaded pad's readings.
    #[arg(long)]
    pub tare: Option<bool>,
    /// Five frames per capture.
    #[arg(long)]
    pub fast: bool,
}

impl ConfigArgs {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            rows: self.rows,
            cols: self.cols,
            pitch_mm: self.pitch_mm,
            line_width_mm: self.line_width_mm,
            bias_ohm: self.bias_ohm,
            vdd: self.vdd,
            adc_bits: self.adc_bits,
            frames_n: self.frames_n,
            blur_sigma: self.blur_sigma,
            seed: self.seed,
            mechanisms: self.mechanisms.clone(),
            bend_radius_cm: self.bend_radius_cm,
            frame_period_s: self.frame_period_s,
            diffusion_sigma_mm: self.diffusion_sigma_mm,
            noise_std_v: self.noise_std_v,
            ground_unselected: self.ground_unselected,
            tare: self.tare,
            fast: self.fast.then_some(true),
        }
    }

    /// `base`, then the config file, then the flags.
    pub fn resolve(&self, base: SessionConfig) -> anyhow::Result<SessionConfig> {
        let mut patch = match &self.config {
            Some(path) => load_config_file(path)?,
            None => ConfigPatch::default(),
        };
        patch = patch.merged(&self.patch());
        Ok(base.apply(&patch)?)
    }
}

pub fn load_config_file(path: &Path) -> anyhow::Result<ConfigPatch> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// JSON stimulus file with `strokes` and `weights`; blank pad if absent.
    #[arg(long)]
    pub stimulus: Option<PathBuf>,
    /// Output file; stdout if absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "log")]
    pub format: Format,
    /// Also log every scanned frame of the capture.
    #[arg(long)]
    pub all_frames: bool,
}

#[derive(Debug, Args)]
pub struct CrosstalkArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Frame log to read instead of simulating.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Stimulated pixel as `row,col`; the brightest pixel if absent.
    #[arg(long, value_parser = parse_pixel)]
    pub pixel: Option<(usize, usize)>,
    /// Sweep pitches (mm); defaults to the configured pitch.
    #[arg(long, value_delimiter = ',')]
    pub pitches_mm: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub weights_kg: Vec<f64>,
    /// Stimulate every pixel in turn instead of the centre one.
    #[arg(long)]
    pub per_pixel: bool,
    /// Print reports as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Wire capture to decode.
    pub input: PathBuf,
    /// Playback speed relative to the frame period; 0 replays unpaced.
    #[arg(long, default_value_t = 1.0)]
    pub speed: f64,
    /// Output file for the frame log; stdout if absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn parse_pixel(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(',').ok_or("expected row,col")?;
    Ok((
        r.trim().parse().map_err(|e| format!("row: {e}"))?,
        c.trim().parse().map_err(|e| format!("col: {e}"))?,
    ))
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Crosstalk(args) => crosstalk(&args),
        Command::Serve(args) => {
            let config = args.config.resolve(SessionConfig::default())?;
            let rt = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
            rt.block_on(serve(args.bind, config))
        }
        Command::Replay(args) => replay(&args),
    }
}

/// Writes to `path`, or stdout when `None`.
fn write_output(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
