use serde::{Deserialize, Serialize};

use crate::dsp::mix64;
use crate::{Error, Result};

/// Sample rates the synthesizer accepts.
pub const SUPPORTED_SAMPLE_RATES: [u32; 5] = [16_000, 32_000, 44_100, 48_000, 96_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcitationKind {
    Mls,
    Chirp,
}

/// Parameters of an excitation waveform. `f_start`/`f_end` only apply to
/// chirps; `seed` only to MLS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSpec {
    pub kind: ExcitationKind,
    pub sample_rate: u32,
    pub duration: f64,
    pub f_start: f64,
    pub f_end: f64,
    pub seed: u64,
}

impl ExcitationSpec {
    pub fn chirp(sample_rate: u32, duration: f64, f_start: f64, f_end: f64) -> Self {
        ExcitationSpec {
            kind: ExcitationKind::Chirp,
            sample_rate,
            duration,
            f_start,
            f_end,
            seed: 0,
        }
    }

    pub fn mls(sample_rate: u32, duration: f64, seed: u64) -> Self {
        ExcitationSpec {
            kind: ExcitationKind::Mls,
            sample_rate,
            duration,
            f_start: 0.0,
            f_end: 0.0,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        (self.sample_rate as f64 * self.duration).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for ExcitationSpec {
    /// One second 20 Hz to 20 kHz chirp at 48 kHz.
    fn default() -> Self {
        ExcitationSpec::chirp(48_000, 1.0, 20.0, 20_000.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub kind: ExcitationKind,
    pub sample_rate: u32,
    pub duration: f64,
    pub samples: Vec<f64>,
}

/// Generates an MLS or linear chirp.
pub fn gen_excitation(spec: &ExcitationSpec) -> Result<Excitation> {
    if !SUPPORTED_SAMPLE_RATES.contains(&spec.sample_rate) {
        return Err(Error::invalid(format!(
            "unsupported sample rate {} Hz",
            spec.sample_rate
        )));
    }
    if !(spec.duration > 0.0) || spec.is_empty() {
        return Err(Error::invalid("excitation duration must be positive"));
    }
    let len = spec.len();
    let samples = match spec.kind {
        ExcitationKind::Mls => mls(len, spec.seed),
        ExcitationKind::Chirp => {
            let nyquist = spec.sample_rate as f64 / 2.0;
            if !(0.0 < spec.f_start && spec.f_start < spec.f_end && spec.f_end <= nyquist) {
                return Err(Error::invalid(format!(
                    "chirp bounds must satisfy 0 < {} < {} <= {nyquist}",
                    spec.f_start, spec.f_end
                )));
            }
            chirp(len, spec.sample_rate as f64, spec.f_start, spec.f_end)
        }
    };
    Ok(Excitation {
        kind: spec.kind,
        sample_rate: spec.sample_rate,
        duration: spec.duration,
        samples,
    })
}

fn chirp(len: usize, fs: f64, f0: f64, f1: f64) -> Vec<f64> {
    let span = len as f64 / fs;
    let rate = (f1 - f0) / span;
    (0..len)
        .map(|n| {
            let t = n as f64 / fs;
            (2.0 * std::f64::consts::PI * (f0 * t + 0.5 * rate * t * t)).sin()
        })
        .collect()
}

/// Fibonacci LFSR feedback taps (polynomial exponents) giving maximal
/// period for each register length.
const MLS_TAPS: [(u32, &[u32]); 23] = [
    (2, &[2, 1]),
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 11, 10, 4]),
    (13, &[13, 12, 11, 8]),
    (14, &[14, 13, 12, 2]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
    (17, &[17, 14]),
    (18, &[18, 11]),
    (19, &[19, 18, 17, 14]),
    (20, &[20, 17]),
    (21, &[21, 19]),
    (22, &[22, 21]),
    (23, &[23, 18]),
    (24, &[24, 23, 22, 17]),
];

/// Shortest register whose period 2^deg - 1 covers `len` samples.
pub(crate) fn mls_degree(len: usize) -> u32 {
    MLS_TAPS
        .iter()
        .map(|(d, _)| *d)
        .find(|&d| (1usize << d) > len)
        .unwrap_or(24)
}

/// Raw LFSR output bits; the seed selects the starting state (a cyclic
/// shift of the same sequence).
pub(crate) fn lfsr_bits(degree: u32, seed: u64, len: usize) -> Vec<bool> {
    let taps = MLS_TAPS.iter().find(|(d, _)| *d == degree).expect("unsupported degree").1;
    let period = (1u64 << degree) - 1;
    let mut state = (mix64(seed) % period + 1) as u32;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(state & 1 == 1);
        let fb = taps.iter().fold(0u32, |acc, &t| acc ^ (state >> (degree - t))) & 1;
        state = (state >> 1) | (fb << (degree - 1));
    }
    out
}

fn mls(len: usize, seed: u64) -> Vec<f64> {
    lfsr_bits(mls_degree(len), seed, len)
        .into_iter()
        .map(|b| if b { 1.0 } else { -1.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circular_autocorrelation(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let spec = crate::dsp::spectrum(x, n);
        let power = spec.into_iter().map(|c| c * c.conj()).collect();
        crate::dsp::real_inverse(power)
    }

    #[test]
    fn lfsr_taps_are_maximal() {
        for (degree, _) in MLS_TAPS.iter().filter(|(d, _)| *d <= 20) {
            let period = (1usize << degree) - 1;
            let bits = lfsr_bits(*degree, 11, 2 * period);
            let ones = bits[..period].iter().filter(|&&b| b).count();
            assert_eq!(ones, period.div_ceil(2), "degree {degree}");
            assert_eq!(bits[..period], bits[period..], "degree {degree}");
            // No shorter period dividing 2^deg - 1.
            for p in (1..period).filter(|p| period.is_multiple_of(*p)) {
                assert_ne!(bits[..period], bits[p..p + period], "degree {degree} repeats at {p}");
            }
        }
    }

    #[test]
    fn chirp_has_expected_length_and_sweep() {
        let ex = gen_excitation(&ExcitationSpec::default()).unwrap();
        assert_eq!(ex.samples.len(), 48_000);
        assert!(ex.samples.iter().all(|v| v.abs() <= 1.0));
        // Zero-crossing rate grows monotonically window by window.
        let rates: Vec<usize> = ex
            .samples
            .chunks(4800)
            .map(|w| w.windows(2).filter(|p| (p[0] < 0.0) != (p[1] < 0.0)).count())
            .collect();
        assert!(rates.windows(2).all(|r| r[0] < r[1]), "{rates:?}");
        // Last window centres near 19 kHz: about 2 * 19000 * 0.1 crossings.
        let last = *rates.last().unwrap() as f64;
        assert!((last - 3800.0).abs() < 100.0, "{last}");
    }

    #[test]
    fn mls_is_deterministic_and_two_valued() {
        let spec = ExcitationSpec::mls(48_000, 1.0, 7);
        let a = gen_excitation(&spec).unwrap();
        let b = gen_excitation(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples.len(), 48_000);
        assert!(a.samples.iter().all(|&v| v == 1.0 || v == -1.0));
        assert_eq!(mls_degree(48_000), 16);
    }

    #[test]
    fn mls_circular_sidelobes_are_small() {
        let ex = gen_excitation(&ExcitationSpec::mls(48_000, 1.0, 7)).unwrap();
        let ac = circular_autocorrelation(&ex.samples);
        let peak = ac[0];
        let worst = ac[1..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(worst / peak < 0.05, "sidelobe ratio {}", worst / peak);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gen_excitation(&ExcitationSpec::chirp(48_000, 1.0, 0.0, 1000.0)).is_err());
        assert!(gen_excitation(&ExcitationSpec::chirp(48_000, 1.0, 500.0, 400.0)).is_err());
        assert!(gen_excitation(&ExcitationSpec::chirp(48_000, 1.0, 20.0, 30_000.0)).is_err());
        assert!(gen_excitation(&ExcitationSpec::chirp(12_345, 1.0, 20.0, 2000.0)).is_err());
        assert!(gen_excitation(&ExcitationSpec::mls(48_000, 0.0, 1)).is_err());
    }
}
