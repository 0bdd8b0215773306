//! Thin wrapper around rustfft with unnormalised forward and inverse transforms.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place forward DFT `X[m] = sum_k x[k] e^{-2 pi j m k / L}`.
pub fn forward(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// In-place inverse DFT without the `1/L` factor.
pub fn inverse(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}

/// Smallest power of two that is at least `n`.
pub fn padded_len(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
