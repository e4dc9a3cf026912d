//! FFT plumbing shared by the synthesizer and the feature extractor.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Full complex spectrum of a real signal, zero-padded to `len`.
pub(crate) fn spectrum(signal: &[f64], len: usize) -> Vec<Complex64> {
    debug_assert!(signal.len() <= len);
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    forward(len).process(&mut buf);
    buf
}

/// Real part of the normalized inverse transform.
pub(crate) fn real_inverse(mut spec: Vec<Complex64>) -> Vec<f64> {
    let len = spec.len();
    inverse(len).process(&mut spec);
    let scale = 1.0 / len as f64;
    spec.into_iter().map(|c| c.re * scale).collect()
}

/// Distance of bin `k` from DC, folding the negative-frequency half.
pub(crate) fn folded_bin(k: usize, len: usize) -> usize {
    k.min(len - k)
}

pub(crate) fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn derive_seed(parent: u64, tag: u64, index: u64) -> u64 {
    mix64(mix64(parent ^ mix64(tag)) ^ index)
}
