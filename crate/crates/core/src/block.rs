//! Single-carrier block structure: 512-point unitary transforms and the
//! 128-sample cyclic prefix.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const FFT_SIZE: usize = 512;
pub const CP_LEN: usize = 128;
pub const BLOCK_LEN: usize = FFT_SIZE + CP_LEN;

/// Unitary forward/inverse transforms of length [`FFT_SIZE`].
pub struct BlockTransform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl BlockTransform {
    fn new() -> Self {
        let mut planner = FftPlanner::new();
        BlockTransform {
            forward: planner.plan_fft_forward(FFT_SIZE),
            inverse: planner.plan_fft_inverse(FFT_SIZE),
            scale: 1.0 / (FFT_SIZE as f64).sqrt(),
        }
    }

    /// Shared instance; plans are immutable after construction.
    pub fn shared() -> &'static BlockTransform {
        static INSTANCE: OnceLock<BlockTransform> = OnceLock::new();
        INSTANCE.get_or_init(BlockTransform::new)
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), FFT_SIZE);
        self.forward.process(buf);
        buf.iter_mut().for_each(|z| *z *= self.scale);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), FFT_SIZE);
        self.inverse.process(buf);
        buf.iter_mut().for_each(|z| *z *= self.scale);
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn inverse(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = x.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }
}

/// Prepends the last [`CP_LEN`] samples of `payload`.
pub fn add_cp(payload: &[Complex64]) -> Result<Vec<Complex64>> {
    if payload.len() != FFT_SIZE {
        return Err(Error::Dimension(format!(
            "block payload of {} samples, expected {FFT_SIZE}",
            payload.len()
        )));
    }
    let mut block = Vec::with_capacity(BLOCK_LEN);
    block.extend_from_slice(&payload[FFT_SIZE - CP_LEN..]);
    block.extend_from_slice(payload);
    Ok(block)
}

/// Payload window of a received block starting at `start`.
pub fn strip_cp(rx: &[Complex64], start: usize) -> Result<&[Complex64]> {
    rx.get(start + CP_LEN..start + BLOCK_LEN)
        .ok_or_else(|| Error::Framing(format!("block at {start} runs past the end of the capture")))
}

/// Unnormalized DFT of a short tap vector, zero-padded to `n` points.
pub fn taps_to_response(taps: &[(usize, Complex64)], n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            taps.iter()
                .map(|&(d, h)| h * Complex64::cis(-2.0 * std::f64::consts::PI * (k * d % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}
