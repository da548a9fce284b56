//! Writing-pad reconstruction: accumulate a capture into a raw frame,
//! square-and-normalize, Gaussian blur, then threshold at the mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Frame, Unit};

/// How the raw frame is mapped onto `[0, 1]` before blurring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalization {
    /// Square every value and divide by the largest square.
    #[default]
    SquareByMax,
    /// Softmax of the max-scaled values at the given temperature.
    Softmax { temperature: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub frames_per_capture: usize,
    /// Gaussian blur standard deviation in pixels.
    pub blur_sigma: f64,
    /// Half-width of the blur kernel; `None` means `ceil(3 * sigma)`.
    pub kernel_radius: Option<usize>,
    pub normalization: Normalization,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frames_per_capture: 100,
            blur_sigma: 0.6,
            kernel_radius: None,
            normalization: Normalization::SquareByMax,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames_per_capture == 0 {
            return Err(Error::InvalidConfig("frames_per_capture must be >= 1".into()));
        }
        if !(self.blur_sigma >= 0.0 && self.blur_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("blur sigma {}", self.blur_sigma)));
        }
        if let Normalization::Softmax { temperature } = self.normalization {
            if !(temperature > 0.0 && temperature.is_finite()) {
                return Err(Error::InvalidConfig(format!("softmax temperature {temperature}")));
            }
        }
        Ok(())
    }

    pub fn radius(&self) -> usize {
        self.kernel_radius
            .unwrap_or_else(|| (3.0 * self.blur_sigma).ceil() as usize)
    }
}

/// Every intermediate of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedOutput {
    pub raw: Frame,
    pub squared_normalized: Frame,
    pub blurred: Frame,
    pub binary: Frame,
}

/// Elementwise sum of exactly `n` frames of equal shape and unit.
pub fn accumulate(frames: &[Frame], n: usize) -> Result<Frame> {
    if frames.len() != n || n == 0 {
        return Err(Error::FrameCount {
            expected: n,
            got: frames.len(),
        });
    }
    let first = &frames[0];
    let mut sum = vec![0.0; first.values().len()];
    for f in frames {
        if f.dims() != first.dims() {
            return Err(Error::DimensionMismatch {
                expected: first.dims(),
                got: f.dims(),
            });
        }
        if f.unit() != first.unit() {
            return Err(Error::UnitMismatch {
                expected: first.unit(),
                got: f.unit(),
            });
        }
        for (s, v) in sum.iter_mut().zip(f.values()) {
            *s += v;
        }
    }
    Ok(Frame::new_unchecked(first.rows(), first.cols(), sum, first.unit()))
}

fn check_nonnegative(frame: &Frame) -> Result<()> {
    match frame.values().iter().position(|v| !(*v >= 0.0)) {
        Some(index) => Err(Error::NegativeReading {
            index,
            value: frame.values()[index],
        }),
        None => Ok(()),
    }
}

/// Squares every reading and divides by the largest square, so the peak
/// maps to exactly 1. An all-zero frame stays all zero.
pub fn square_and_normalize(frame: &Frame) -> Result<Frame> {
    check_nonnegative(frame)?;
    let squares: Vec<f64> = frame.values().iter().map(|v| v * v).collect();
    let peak = squares.iter().copied().fold(0.0, f64::max);
    let values = if peak > 0.0 {
        squares.into_iter().map(|s| s / peak).collect()
    } else {
        squares
    };
    Ok(Frame::new_unchecked(frame.rows(), frame.cols(), values, Unit::Normalized))
}

/// Softmax alternative to [`square_and_normalize`]: values are scaled to a
/// peak of 1 and passed through `exp(x / temperature)`, normalized to sum 1.
pub fn softmax_normalize(frame: &Frame, temperature: f64) -> Result<Frame> {
    check_nonnegative(frame)?;
    let peak = frame.max();
    if !(peak > 0.0) {
        return Ok(Frame::zeros(frame.rows(), frame.cols(), Unit::Normalized));
    }
    let exps: Vec<f64> = frame
        .values()
        .iter()
        .map(|v| ((v / peak - 1.0) / temperature).exp())
        .collect();
    let z: f64 = exps.iter().sum();
    let values = exps.into_iter().map(|e| e / z).collect();
    Ok(Frame::new_unchecked(frame.rows(), frame.cols(), values, Unit::Normalized))
}

/// Sampled Gaussian `exp(-k^2 / 2 sigma^2)` for `k in -radius..=radius`,
/// normalized to sum 1. `sigma == 0` gives the unit impulse.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    if sigma == 0.0 || radius == 0 {
        let mut k = vec![0.0; 2 * radius + 1];
        k[radius] = 1.0;
        return k;
    }
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= s);
    k
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(frame: &Frame, sigma: f64, kernel_radius: usize) -> Result<Frame> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("blur sigma {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(frame.clone());
    }
    let kernel = gaussian_kernel(sigma, kernel_radius);
    let (rows, cols) = frame.dims();
    let r = kernel_radius as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;

    let mut tmp = vec![0.0; rows * cols];
    for y in 0..rows {
        for x in 0..cols {
            tmp[y * cols + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * frame.get(y, clamp(x as isize + k as isize - r, cols)))
                .sum();
        }
    }
    let mut out = vec![0.0; rows * cols];
    for y in 0..rows {
        for x in 0..cols {
            out[y * cols + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * tmp[clamp(y as isize + k as isize - r, rows) * cols + x])
                .sum();
        }
    }
    Ok(Frame::new_unchecked(rows, cols, out, frame.unit()))
}

/// 1 where a value strictly exceeds the frame mean, else 0. Frames with a
/// single distinct value are all 0.
pub fn adaptive_threshold(frame: &Frame) -> Frame {
    let (rows, cols) = frame.dims();
    if frame.max() == frame.min() {
        return Frame::zeros(rows, cols, Unit::Normalized);
    }
    let mean = frame.values().iter().sum::<f64>() / frame.values().len() as f64;
    let values = frame
        .values()
        .iter()
        .map(|v| if *v > mean { 1.0 } else { 0.0 })
        .collect();
    Frame::new_unchecked(rows, cols, values, Unit::Normalized)
}

/// accumulate, normalize, blur, threshold; every stage is kept.
pub fn run_pipeline(frames: &[Frame], config: &PipelineConfig) -> Result<StagedOutput> {
    config.validate()?;
    let raw = accumulate(frames, config.frames_per_capture)?;
    process_raw(raw, config)
}

/// The pipeline from an already accumulated raw frame.
pub fn process_raw(raw: Frame, config: &PipelineConfig) -> Result<StagedOutput> {
    config.validate()?;
    let squared_normalized = match config.normalization {
        Normalization::SquareByMax => square_and_normalize(&raw)?,
        Normalization::Softmax { temperature } => softmax_normalize(&raw, temperature)?,
    };
    let blurred = gaussian_blur(&squared_normalized, config.blur_sigma, config.radius())?;
    let binary = adaptive_threshold(&blurred);
    Ok(StagedOutput {
        raw,
        squared_normalized,
        blurred,
        binary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(rows: usize, cols: usize, v: &[f64]) -> Frame {
        Frame::from_vec(rows, cols, v.to_vec(), Unit::Volts).unwrap()
    }

    #[test]
    fn accumulate_identity_and_linearity() {
        let f = frame(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(accumulate(&[f.clone()], 1).unwrap(), f);
        let sum = accumulate(&vec![f.clone(); 5], 5).unwrap();
        for (s, v) in sum.values().iter().zip(f.values()) {
            assert!((s - 5.0 * v).abs() < 1e-12);
        }
        assert_eq!(sum.unit(), Unit::Volts);
    }

    #[test]
    fn accumulate_rejects_mismatch() {
        let f = frame(2, 2, &[0.0; 4]);
        assert!(matches!(accumulate(&[f.clone()], 2), Err(Error::FrameCount { .. })));
        let g = frame(1, 4, &[0.0; 4]);
        assert!(matches!(accumulate(&[f.clone(), g], 2), Err(Error::DimensionMismatch { .. })));
        let h = Frame::zeros(2, 2, Unit::AdcCounts);
        assert!(matches!(accumulate(&[f, h], 2), Err(Error::UnitMismatch { .. })));
    }

    #[test]
    fn square_normalize_examples() {
        let out = square_and_normalize(&frame(1, 3, &[1.0, 2.0, 4.0])).unwrap();
        assert_eq!(out.values(), &[0.0625, 0.25, 1.0]);
        let zero = square_and_normalize(&frame(2, 2, &[0.0; 4])).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
        assert!(square_and_normalize(&frame(1, 2, &[1.0, -0.5])).is_err());
    }

    #[test]
    fn blur_identity_and_constant() {
        let f = frame(3, 3, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(gaussian_blur(&f, 0.0, 2).unwrap(), f);
        let c = frame(4, 5, &[0.3; 20]);
        let b = gaussian_blur(&c, 0.6, 2).unwrap();
        assert!(b.values().iter().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn blur_impulse_center_is_kernel_center_squared() {
        // Direct evaluation of the 1-D kernel.
        let w = |d: f64| (-d * d / (2.0 * 0.36)).exp();
        let z = w(0.0) + 2.0 * w(1.0) + 2.0 * w(2.0);
        let k0 = 1.0 / z;
        let mut v = vec![0.0; 25];
        v[12] = 1.0;
        let b = gaussian_blur(&frame(5, 5, &v), 0.6, 2).unwrap();
        assert!((b.get(2, 2) - k0 * k0).abs() < 1e-15);
        assert!((b.get(2, 3) - k0 * w(1.0) / z).abs() < 1e-15);
        assert!((b.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_radius_is_three_sigma() {
        assert_eq!(PipelineConfig::default().radius(), 2);
        let c = PipelineConfig {
            blur_sigma: 1.0,
            ..Default::default()
        };
        assert_eq!(c.radius(), 3);
    }

    #[test]
    fn threshold_examples() {
        let t = adaptive_threshold(&frame(2, 2, &[0.1, 0.2, 0.9, 0.8]));
        assert_eq!(t.values(), &[0.0, 0.0, 1.0, 1.0]);
        let t = adaptive_threshold(&frame(2, 2, &[0.7; 4]));
        assert!(t.values().iter().all(|v| *v == 0.0));
        let mut v = vec![0.0; 16];
        v[5] = 1.0;
        let t = adaptive_threshold(&frame(4, 4, &v));
        assert_eq!(t.values().iter().sum::<f64>(), 1.0);
        assert_eq!(t.get(1, 1), 1.0);
    }

    #[test]
    fn blank_capture_is_blank_everywhere() {
        let cfg = PipelineConfig {
            frames_per_capture: 3,
            ..Default::default()
        };
        let frames = vec![Frame::zeros(16, 16, Unit::Volts); 3];
        let out = run_pipeline(&frames, &cfg).unwrap();
        for stage in [&out.raw, &out.squared_normalized, &out.blurred, &out.binary] {
            assert!(stage.values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn softmax_variant() {
        let f = frame(1, 3, &[1.0, 2.0, 4.0]);
        let s = softmax_normalize(&f, 0.25).unwrap();
        assert!((s.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.get(0, 2) > s.get(0, 1) && s.get(0, 1) > s.get(0, 0));
        let cfg = PipelineConfig {
            frames_per_capture: 1,
            normalization: Normalization::Softmax { temperature: 0.25 },
            ..Default::default()
        };
        let out = run_pipeline(&[f], &cfg).unwrap();
        assert_eq!(out.squared_normalized, s);
        assert!(PipelineConfig {
            normalization: Normalization::Softmax { temperature: 0.0 },
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    fn arb_frame() -> impl Strategy<Value = Frame> {
        (1usize..10, 1usize..10).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0.0f64..100.0, r * c)
                .prop_map(move |v| Frame::from_vec(r, c, v, Unit::Volts).unwrap())
        })
    }

    proptest! {
        #[test]
        fn sn_range_and_order(f in arb_frame()) {
            let s = square_and_normalize(&f).unwrap();
            prop_assert!(s.values().iter().all(|v| (0.0..=1.0).contains(v)));
            if f.max() > 0.0 {
                prop_assert_eq!(s.max(), 1.0);
            }
            for i in 0..f.values().len() {
                for j in 0..f.values().len() {
                    if f.values()[i] < f.values()[j] {
                        prop_assert!(s.values()[i] <= s.values()[j]);
                    }
                }
            }
        }

        #[test]
        fn blur_bounds(f in arb_frame(), sigma in 0.0f64..2.0) {
            let b = gaussian_blur(&f, sigma, (3.0 * sigma).ceil() as usize).unwrap();
            prop_assert!(b.values().iter().all(|v| *v >= 0.0));
            prop_assert!(b.max() <= f.max() * (1.0 + 1e-12));
        }

        #[test]
        fn threshold_partition(f in arb_frame()) {
            let t = adaptive_threshold(&f);
            let mean = f.values().iter().sum::<f64>() / f.values().len() as f64;
            let constant = f.max() == f.min();
            for (v, b) in f.values().iter().zip(t.values()) {
                let want = if !constant && *v > mean { 1.0 } else { 0.0 };
                prop_assert_eq!(*b, want);
            }
        }
    }
}
