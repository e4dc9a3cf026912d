use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::derive_seed;
use crate::{Error, Result};

/// Longest round-trip delay of any path, in seconds.
pub const MAX_TOF: f64 = 0.010;

pub const MIN_PATHS: usize = 3;
pub const MAX_PATHS: usize = 64;

const SUBJECT_TAG: u64 = 0x5342_4a45_4354;
const DEVICE_TAG: u64 = 0x4445_5649_4345;
const SILICON_TAG: u64 = 0x5349_4c49_434f;
const FALSE_TRIGGER_TAG: u64 = 0x4654_5247;

/// One acoustic reflection: delay in seconds and linear gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub delay: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Human,
    /// Silicon ear model: few early paths and no fine structure.
    Silicon,
    /// Earbud not worn: only a weak housing leak reaches the microphone.
    FalseTrigger,
}

/// Smooth magnitude response of the earbud hardware, given as knots of
/// (frequency Hz, gain dB) interpolated linearly over log-frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceColoration {
    pub knots: Vec<(f64, f64)>,
}

impl DeviceColoration {
    pub fn flat() -> Self {
        DeviceColoration { knots: Vec::new() }
    }

    /// A gently rippled response with roll-off below 100 Hz and above
    /// 18 kHz, fixed by `device_seed`.
    pub fn for_device(device_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(device_seed, DEVICE_TAG, 0));
        let mut knots = vec![(20.0, -18.0), (100.0, -3.0)];
        let count = 12;
        for i in 0..count {
            let f = 200.0 * (16_000.0f64 / 200.0).powf(i as f64 / (count - 1) as f64);
            knots.push((f, rng.random_range(-3.0..3.0)));
        }
        knots.push((18_000.0, -6.0));
        knots.push((24_000.0, -30.0));
        DeviceColoration { knots }
    }

    /// Linear gain at `freq`.
    pub fn gain(&self, freq: f64) -> f64 {
        let db = match self.knots.as_slice() {
            [] => 0.0,
            [only] => only.1,
            knots => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if freq <= first.0 {
                    first.1
                } else if freq >= last.0 {
                    last.1
                } else {
                    let i = knots.partition_point(|k| k.0 <= freq);
                    let (f0, g0) = knots[i - 1];
                    let (f1, g1) = knots[i];
                    let w = (freq / f0).ln() / (f1 / f0).ln();
                    g0 + w * (g1 - g0)
                }
            }
        };
        10f64.powf(db / 20.0)
    }
}

/// Parametric multipath model of one ear canal (or attack artefact).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub subject_id: String,
    pub kind: ProfileKind,
    pub paths: Vec<Path>,
    pub device_coloration: DeviceColoration,
    pub seed: u64,
}

impl SubjectProfile {
    /// Checks the path-set invariants: 3 to 64 paths, every delay in
    /// `[0, MAX_TOF)`, and the earliest path strictly loudest.
    pub fn validate(&self) -> Result<()> {
        let n = self.paths.len();
        if !(MIN_PATHS..=MAX_PATHS).contains(&n) {
            return Err(Error::invalid(format!("{n} paths outside [{MIN_PATHS}, {MAX_PATHS}]")));
        }
        if let Some(p) = self.paths.iter().find(|p| !(0.0..MAX_TOF).contains(&p.delay)) {
            return Err(Error::invalid(format!("path delay {} outside [0, {MAX_TOF})", p.delay)));
        }
        let direct = self.direct_path();
        if self
            .paths
            .iter()
            .any(|p| p != direct && p.gain.abs() >= direct.gain.abs())
        {
            return Err(Error::invalid("direct path is not the strongest"));
        }
        Ok(())
    }

    pub fn direct_path(&self) -> &Path {
        self.paths
            .iter()
            .min_by(|a, b| a.delay.total_cmp(&b.delay))
            .expect("profile without paths")
    }
}

/// Draws a synthetic ear canal. Deterministic in `(population_seed,
/// subject_index)`; the device coloration depends on the population seed
/// alone, so all subjects share one earbud.
pub fn synth_subject(population_seed: u64, subject_index: u32) -> SubjectProfile {
    let seed = derive_seed(population_seed, SUBJECT_TAG, subject_index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let count = rng.random_range(12..=40);
    let mut delays: Vec<f64> = (0..count)
        .map(|_| MAX_TOF * (1.0 - rng.random::<f64>()) * 0.999)
        .collect();
    delays.sort_by(f64::total_cmp);

    let decay = rng.random_range(0.002..0.005);
    let paths = delays
        .iter()
        .enumerate()
        .map(|(i, &delay)| {
            let gain = if i == 0 {
                1.0
            } else {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * rng.random_range(0.15..0.9) * (-(delay - delays[0]) / decay).exp()
            };
            Path { delay, gain }
        })
        .collect();

    SubjectProfile {
        subject_id: format!("S{subject_index:03}"),
        kind: ProfileKind::Human,
        paths,
        device_coloration: DeviceColoration::for_device(population_seed),
        seed,
    }
}

/// Silicon ear model: a handful of early, smoothly decaying reflections.
pub fn synth_silicon(population_seed: u64, index: u32) -> SubjectProfile {
    let seed = derive_seed(population_seed, SILICON_TAG, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(MIN_PATHS..=5);
    let first = rng.random_range(0.0001..0.0003);
    let paths = (0..count)
        .map(|i| Path {
            delay: first + i as f64 * rng.random_range(0.0002..0.0006),
            gain: 0.6f64.powi(i as i32),
        })
        .collect();
    SubjectProfile {
        subject_id: format!("SIL{index:02}"),
        kind: ProfileKind::Silicon,
        paths,
        device_coloration: DeviceColoration::for_device(population_seed),
        seed,
    }
}

/// Earbud lying on a table, in a hand or under cloth: a weak housing leak
/// and almost no reflection.
pub fn synth_false_trigger(population_seed: u64, index: u32) -> SubjectProfile {
    let seed = derive_seed(population_seed, FALSE_TRIGGER_TAG, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leak = rng.random_range(0.002..0.005);
    let paths = (0..MIN_PATHS)
        .map(|i| Path {
            delay: 0.00005 + i as f64 * rng.random_range(0.001..0.004),
            gain: leak * 0.3f64.powi(i as i32),
        })
        .collect();
    SubjectProfile {
        subject_id: format!("FT{index:02}"),
        kind: ProfileKind::FalseTrigger,
        paths,
        device_coloration: DeviceColoration::for_device(population_seed),
        seed,
    }
}
