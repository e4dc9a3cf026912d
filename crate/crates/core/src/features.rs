//! Cepstral features from in-ear impulse responses.
//!
//! The pipeline per scan set is: zero-phase band-pass on the response's own
//! FFT grid, K-trial magnitude aggregation on an `n_fft`-point grid with
//! unit band energy, log, orthonormal DCT-II over the band bins, and
//! time-of-flight liftering to a fixed number of coefficients.
//!
//! The default `n_fft` is 4096 (the 1024-sample response zero-padded): a
//! 2-8 kHz band holds only 129 bins of a 1024-point grid, too few for 256
//! cepstral coefficients.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dsp;
use crate::{Error, Result};

/// Floor applied to magnitudes before the log.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub sample_rate: u32,
    pub f_low: f64,
    pub f_high: f64,
    pub n_fft: usize,
    /// Hard cap on retained cepstral coefficients.
    pub n_coeffs: usize,
    /// Longest quefrency kept by the lifter, in seconds.
    pub max_tof: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            sample_rate: 48_000,
            f_low: 2000.0,
            f_high: 8000.0,
            n_fft: 4096,
            n_coeffs: 256,
            max_tof: 0.010,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        if !(0.0 <= self.f_low && self.f_low < self.f_high && self.f_high <= nyquist) {
            return Err(Error::invalid(format!(
                "band edges must satisfy 0 <= {} < {} <= {nyquist}",
                self.f_low, self.f_high
            )));
        }
        if self.n_fft < 2 || self.n_coeffs == 0 || !(self.max_tof > 0.0) {
            return Err(Error::invalid("n_fft, n_coeffs and max_tof must be positive"));
        }
        Ok(())
    }

    /// Band bins on the `n_fft` grid.
    pub fn band(&self) -> RangeInclusive<usize> {
        band_bins(self.n_fft, self.sample_rate as f64, self.f_low, self.f_high)
    }

    /// First 8 bytes of SHA-256 over a canonical rendering of the config.
    pub fn config_hash(&self) -> [u8; 8] {
        let canonical = format!(
            "earid-features/v1;fs={};fl={:?};fh={:?};nfft={};d={};tof={:?}",
            self.sample_rate, self.f_low, self.f_high, self.n_fft, self.n_coeffs, self.max_tof
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].try_into().expect("digest shorter than 8 bytes")
    }
}

/// Inclusive bin range covering `[f_low, f_high]` on a `len`-point grid.
/// Edges snap to the nearest bin, halves rounding up.
pub fn band_bins(len: usize, sample_rate: f64, f_low: f64, f_high: f64) -> RangeInclusive<usize> {
    let df = sample_rate / len as f64;
    let snap = |f: f64| ((f / df) + 0.5).floor() as usize;
    snap(f_low)..=snap(f_high).min(len / 2)
}

/// Zero-phase band-pass: every bin of the signal's own FFT outside
/// `[f_low, f_high]` (and its mirror) is zeroed.
pub fn bandpass(h: &[f64], f_low: f64, f_high: f64, sample_rate: f64) -> Result<Vec<f64>> {
    if !(0.0 <= f_low && f_low < f_high && f_high <= sample_rate / 2.0) {
        return Err(Error::invalid(format!("invalid band [{f_low}, {f_high}]")));
    }
    if h.is_empty() {
        return Ok(Vec::new());
    }
    let len = h.len();
    let band = band_bins(len, sample_rate, f_low, f_high);
    let mut spec = dsp::spectrum(h, len);
    for (k, c) in spec.iter_mut().enumerate() {
        if !band.contains(&dsp::folded_bin(k, len)) {
            *c = Default::default();
        }
    }
    Ok(dsp::real_inverse(spec))
}

/// Unit-energy band magnitude spectrum of a K-trial aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFeature {
    pub magnitudes: Vec<f64>,
    pub f_low: f64,
    pub f_high: f64,
    pub n_fft: usize,
    /// Grid index of `magnitudes[0]`.
    pub first_bin: usize,
}

impl SpectrumFeature {
    pub fn band_energy(&self) -> f64 {
        dsp::energy(&self.magnitudes)
    }
}

/// Sums band magnitudes over the trials and scales the sum to unit band
/// energy.
pub fn normalize_spectrum(trials: &[Vec<f64>], config: &FeatureConfig) -> Result<SpectrumFeature> {
    let first = trials
        .first()
        .ok_or_else(|| Error::invalid("at least one trial is required"))?;
    if let Some(t) = trials.iter().find(|t| t.len() != first.len()) {
        return Err(Error::LengthMismatch {
            expected: first.len(),
            actual: t.len(),
        });
    }
    if first.len() > config.n_fft {
        return Err(Error::invalid(format!(
            "response of {} samples exceeds n_fft {}",
            first.len(),
            config.n_fft
        )));
    }
    let band = config.band();
    let mut aggregate = vec![0.0; band.clone().count()];
    for trial in trials {
        let spec = dsp::spectrum(trial, config.n_fft);
        for (acc, c) in aggregate.iter_mut().zip(&spec[band.clone()]) {
            *acc += c.norm();
        }
    }
    let energy = dsp::energy(&aggregate);
    if !(energy > 0.0) {
        return Err(Error::Degenerate("aggregate has no energy in band".into()));
    }
    let scale = energy.sqrt().recip();
    aggregate.iter_mut().for_each(|m| *m *= scale);
    Ok(SpectrumFeature {
        magnitudes: aggregate,
        f_low: config.f_low,
        f_high: config.f_high,
        n_fft: config.n_fft,
        first_bin: *band.start(),
    })
}

/// Orthonormal DCT-II: `X[n] = s(n) sum_k x[k] cos(pi n (2k + 1) / 2N)`.
pub fn dct2(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let table = cos_table(n);
    (0..n)
        .map(|q| {
            let sum: f64 = x
                .iter()
                .enumerate()
                .map(|(k, v)| v * table[(q * (2 * k + 1)) % (4 * n)])
                .sum();
            sum * dct_scale(q, n)
        })
        .collect()
}

/// Orthonormal DCT-III, the inverse of [`dct2`].
pub fn dct3(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let table = cos_table(n);
    (0..n)
        .map(|k| {
            c.iter()
                .enumerate()
                .map(|(q, v)| v * dct_scale(q, n) * table[(q * (2 * k + 1)) % (4 * n)])
                .sum()
        })
        .collect()
}

fn cos_table(n: usize) -> Vec<f64> {
    (0..4 * n).map(|j| (PI * j as f64 / (2 * n) as f64).cos()).collect()
}

fn dct_scale(q: usize, n: usize) -> f64 {
    if q == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Full cepstrum: orthonormal DCT-II of the floored log band magnitudes.
pub fn cepstrum(spec: &SpectrumFeature) -> Vec<f64> {
    let log: Vec<f64> = spec.magnitudes.iter().map(|m| m.max(LOG_FLOOR).ln()).collect();
    dct2(&log)
}

/// Band magnitudes from a full cepstrum (inverse of [`cepstrum`] for
/// spectra above the floor).
pub fn inverse_cepstrum(c: &[f64]) -> Vec<f64> {
    dct3(c).into_iter().map(f64::exp).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CepstrumFeature {
    pub coefficients: Vec<f64>,
    pub max_tof: f64,
}

impl CepstrumFeature {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Keeps coefficients whose quefrency `n / sample_rate` is at most
/// `max_tof`, capped at `max_coeffs` when given.
pub fn lifter(
    c: &[f64],
    max_tof: f64,
    sample_rate: f64,
    max_coeffs: Option<usize>,
) -> Result<CepstrumFeature> {
    if !(max_tof > 0.0) {
        return Err(Error::invalid("max_tof must be positive"));
    }
    let by_tof = (max_tof * sample_rate).floor();
    let by_tof = if by_tof >= c.len() as f64 {
        usize::MAX
    } else {
        by_tof as usize + 1
    };
    let wanted = max_coeffs.map_or(by_tof, |cap| by_tof.min(cap));
    if wanted != usize::MAX && wanted > c.len() {
        warn!(
            "liftering cutoff {wanted} exceeds the {} available coefficients; keeping all",
            c.len()
        );
    }
    let keep = wanted.min(c.len());
    Ok(CepstrumFeature {
        coefficients: c[..keep].to_vec(),
        max_tof,
    })
}

/// Band-passes each response and returns the aggregated band spectrum.
pub fn scan_spectrum<T, R>(responses: &[R], config: &FeatureConfig) -> Result<SpectrumFeature>
where
    T: Copy + Into<f64>,
    R: AsRef<[T]>,
{
    config.validate()?;
    if responses.is_empty() {
        return Err(Error::invalid("at least one scan is required"));
    }
    let filtered = responses
        .iter()
        .map(|r| {
            let h: Vec<f64> = r.as_ref().iter().map(|&v| v.into()).collect();
            bandpass(&h, config.f_low, config.f_high, config.sample_rate as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    normalize_spectrum(&filtered, config)
}

/// Full pipeline over the impulse responses of one scan set.
pub fn extract_features<T, R>(responses: &[R], config: &FeatureConfig) -> Result<CepstrumFeature>
where
    T: Copy + Into<f64>,
    R: AsRef<[T]>,
{
    let spec = scan_spectrum(responses, config)?;
    lifter(
        &cepstrum(&spec),
        config.max_tof,
        config.sample_rate as f64,
        Some(config.n_coeffs),
    )
}
