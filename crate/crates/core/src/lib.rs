//! Simulation of a velostat crossbar pressure mat, the writing-pad
//! reconstruction pipeline that turns accumulated raster scans into a
//! monochrome image, and a distance-weighted crosstalk metric.
//!
//! The crate is organised along the signal path:
//!
//! - [`geometry`], [`stimulus`], [`bend`]: grid layout, stimuli rasterized
//!   into a per-pixel force field, force diffusion, and bend-induced stress.
//! - [`circuit`]: pressure-to-resistance law, resistor network with sneak
//!   paths, nodal-analysis readout and ADC quantization.
//! - [`simulate`]: a [`PadSimulator`](simulate::PadSimulator) tying the above
//!   together into captures of many frames.
//! - [`pipeline`]: accumulate, square-and-normalize, Gaussian blur, mean
//!   threshold.
//! - [`crosstalk`]: neighbourhoods, the crosstalk value of a stimulated
//!   pixel, and pitch/weight characterization sweeps.
//! - [`io`]: text frame log, binary wire protocol with a resyncing decoder,
//!   and ingestion of externally recorded frames.
//! - [`session`]: the message protocol and per-connection state of the
//!   interactive pad service.
//!
//! ```
//! use velopad::crosstalk::{crosstalk, CrosstalkInput};
//!
//! let input = CrosstalkInput::new(1.94, vec![(1.0, 0.15), (2f64.sqrt(), 0.0), (1.0, 0.04)]);
//! let c = crosstalk(&input).unwrap();
//! assert!((c.value - 0.02868).abs() < 1e-4);
//! ```

pub mod bend;
pub mod circuit;
pub mod crosstalk;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod session;
pub mod simulate;
pub mod stimulus;

pub use error::{Error, Result};
pub use frame::{Frame, Unit};
pub use geometry::SensorGeometry;
pub use stimulus::{PressureField, StrokeEvent, WeightStimulus};
