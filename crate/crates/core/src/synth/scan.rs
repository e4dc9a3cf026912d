use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::estimate_channel;
use super::excitation::{Excitation, ExcitationKind};
use super::subject::{SubjectProfile, MAX_TOF};
use crate::dsp;
use crate::Result;

/// Per-path relative gain deviation per unit of wear jitter.
const GAIN_JITTER: f64 = 0.05;
/// Per-path delay deviation per unit of wear jitter, in seconds.
const DELAY_JITTER: f64 = 2.0e-6;
/// Overall level deviation per unit of wear jitter (log scale).
const LEVEL_JITTER: f64 = 0.1;

/// Additive noise lives strictly below this frequency.
pub const NOISE_CUTOFF_HZ: f64 = 2000.0;
/// Noise RMS for the quiet condition, relative to a unit excitation.
const QUIET_NOISE_RMS: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseCondition {
    Quiet,
    Indoor,
    Street,
}

impl NoiseCondition {
    /// Ambient level in dBA-equivalent.
    pub fn level_db(self) -> f64 {
        match self {
            NoiseCondition::Quiet => 35.0,
            NoiseCondition::Indoor => 60.0,
            NoiseCondition::Street => 70.0,
        }
    }

    pub fn rms(self) -> f64 {
        QUIET_NOISE_RMS * 10f64.powf((self.level_db() - NoiseCondition::Quiet.level_db()) / 20.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConditions {
    pub noise: NoiseCondition,
    /// Multiplies the condition's noise level; 0 disables noise.
    pub noise_gain: f64,
    pub wear_jitter: f64,
    pub trial_index: u32,
}

impl ScanConditions {
    pub fn new(noise: NoiseCondition, wear_jitter: f64, trial_index: u32) -> Self {
        ScanConditions {
            noise,
            noise_gain: 1.0,
            wear_jitter,
            trial_index,
        }
    }

    pub fn noiseless(trial_index: u32) -> Self {
        ScanConditions {
            noise: NoiseCondition::Quiet,
            noise_gain: 0.0,
            wear_jitter: 0.0,
            trial_index,
        }
    }
}

/// One ear-canal scan. `impulse_response` is empty until
/// [`EcsScan::estimate`] has run.
#[derive(Debug, Clone, PartialEq)]
pub struct EcsScan {
    pub subject_id: String,
    pub excitation_kind: ExcitationKind,
    pub recorded: Vec<f64>,
    pub impulse_response: Vec<f32>,
    pub noise_condition: NoiseCondition,
    pub trial_index: u32,
    /// Peak |h| before normalization; the recording level.
    pub peak: f64,
}

impl EcsScan {
    /// Fills in the impulse response from the recording.
    pub fn estimate(mut self, excitation: &Excitation, window: usize) -> Result<Self> {
        let est = estimate_channel(&excitation.samples, &self.recorded, window)?;
        self.impulse_response = est.response.into_iter().map(|v| v as f32).collect();
        self.peak = est.peak;
        Ok(self)
    }
}

/// Records the profile's response to the excitation: the excitation is
/// convolved with the (jittered) multipath response and device coloration,
/// then low-frequency noise is added.
pub fn simulate_scan(
    profile: &SubjectProfile,
    excitation: &Excitation,
    conditions: &ScanConditions,
    rng: &mut impl Rng,
) -> EcsScan {
    let len = excitation.samples.len();
    let fft_len = conv_len(len);
    let fs = excitation.sample_rate as f64;

    let w = conditions.wear_jitter;
    let level = (LEVEL_JITTER * w * gauss(rng)).exp();
    let paths: Vec<(f64, f64)> = profile
        .paths
        .iter()
        .map(|p| {
            let gain = p.gain * (1.0 + GAIN_JITTER * w * gauss(rng)) * level;
            let delay = (p.delay + DELAY_JITTER * w * gauss(rng)).clamp(0.0, MAX_TOF * 0.9999);
            (delay, gain)
        })
        .collect();

    let half = fft_len / 2;
    let df = fs / fft_len as f64;
    let mut response = vec![Complex64::new(0.0, 0.0); half + 1];
    for &(delay, gain) in &paths {
        let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * df * delay);
        let mut phasor = Complex64::new(gain, 0.0);
        for r in response.iter_mut() {
            *r += phasor;
            phasor *= step;
        }
    }
    for (k, r) in response.iter_mut().enumerate() {
        *r *= profile.device_coloration.gain(k as f64 * df);
    }

    record(&profile.subject_id, excitation, &hermitian(response, fft_len), conditions, rng)
}

/// Like [`simulate_scan`], for a channel given directly as a sampled
/// impulse response. Wear jitter only perturbs the overall level.
pub fn simulate_response_scan(
    subject_id: &str,
    response: &[f64],
    excitation: &Excitation,
    conditions: &ScanConditions,
    rng: &mut impl Rng,
) -> EcsScan {
    let fft_len = conv_len(excitation.samples.len().max(response.len()));
    let level = (LEVEL_JITTER * conditions.wear_jitter * gauss(rng)).exp();
    let spectrum: Vec<Complex64> = dsp::spectrum(response, fft_len)
        .into_iter()
        .map(|c| c * level)
        .collect();
    record(subject_id, excitation, &spectrum, conditions, rng)
}

fn record(
    subject_id: &str,
    excitation: &Excitation,
    channel: &[Complex64],
    conditions: &ScanConditions,
    rng: &mut impl Rng,
) -> EcsScan {
    let len = excitation.samples.len();
    let fft_len = channel.len();
    let product: Vec<Complex64> = dsp::spectrum(&excitation.samples, fft_len)
        .into_iter()
        .zip(channel)
        .map(|(s, h)| s * h)
        .collect();
    let mut recorded = dsp::real_inverse(product);
    recorded.truncate(len);

    let noise_rms = conditions.noise.rms() * conditions.noise_gain;
    if noise_rms > 0.0 {
        let noise = lowband_noise(fft_len, excitation.sample_rate as f64, rng);
        for (r, n) in recorded.iter_mut().zip(noise) {
            *r += noise_rms * n;
        }
    }

    EcsScan {
        subject_id: subject_id.to_string(),
        excitation_kind: excitation.kind,
        recorded,
        impulse_response: Vec::new(),
        noise_condition: conditions.noise,
        trial_index: conditions.trial_index,
        peak: 0.0,
    }
}

/// Unit-RMS pink-shaped noise with no content at or above
/// [`NOISE_CUTOFF_HZ`].
fn lowband_noise(fft_len: usize, fs: f64, rng: &mut impl Rng) -> Vec<f64> {
    let df = fs / fft_len as f64;
    let half: Vec<Complex64> = (0..=fft_len / 2)
        .map(|k| {
            let f = k as f64 * df;
            if k == 0 || f >= NOISE_CUTOFF_HZ {
                Complex64::new(0.0, 0.0)
            } else {
                let shape = 1.0 / f.max(20.0).sqrt();
                Complex64::new(gauss(rng), gauss(rng)) * shape
            }
        })
        .collect();
    let noise = dsp::real_inverse(hermitian(half, fft_len));
    let rms = (dsp::energy(&noise) / noise.len() as f64).sqrt();
    noise.into_iter().map(|v| v / rms).collect()
}

/// Extends the non-negative half spectrum (`len / 2 + 1` bins) to a full
/// conjugate-symmetric spectrum.
fn hermitian(mut half: Vec<Complex64>, len: usize) -> Vec<Complex64> {
    debug_assert_eq!(half.len(), len / 2 + 1);
    half[0].im = 0.0;
    half[len / 2].im = 0.0;
    let mirror: Vec<Complex64> = half[1..len / 2].iter().rev().map(|c| c.conj()).collect();
    half.extend(mirror);
    half
}

fn conv_len(len: usize) -> usize {
    (len + 4096).next_power_of_two()
}

fn gauss(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}
