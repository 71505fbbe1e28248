//! Thin wrappers over rustfft with the project scaling convention:
//! forward unscaled, inverse scaled by 1/len.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

pub(crate) struct FftPair {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
    pub len: usize,
}

pub(crate) fn plan(len: usize) -> FftPair {
    let mut planner = FftPlanner::new();
    FftPair {
        forward: planner.plan_fft(len, FftDirection::Forward),
        inverse: planner.plan_fft(len, FftDirection::Inverse),
        len,
    }
}

impl FftPair {
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.forward.process(buf);
    }

    /// Inverse transform including the 1/len normalization.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        for s in buf.iter_mut() {
            *s *= scale;
        }
    }
}
