use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::{FeatureCache, ATTEMPT_SCANS};
use super::evaluate::{enroll_trial, grouping};
use super::metrics::ks_statistic;
use crate::ecc::EccName;
use crate::features::extract_features;
use crate::synth::{synth_subject, Dataset, NoiseCondition};
use crate::{Error, Result};

/// Trial indices of re-simulated scans start here, clear of any dataset
/// trial.
const DRIFT_TRIAL_BASE: u32 = 1 << 24;
const PERIOD_STRIDE: u32 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftMode {
    /// Successive days: wear jitter grows with the period.
    Day,
    /// Sessions in changing surroundings: the noise condition cycles
    /// through quiet, indoor and street; jitter stays at its base value.
    Session,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftConfig {
    pub mode: DriftMode,
    pub periods: usize,
    pub attempts_per_period: usize,
    /// Day mode jitter is `base * (1 + drift_factor * period)`.
    pub drift_factor: f64,
    pub grouping_seed: u64,
}

impl DriftConfig {
    pub fn days(periods: usize, grouping_seed: u64) -> Self {
        DriftConfig {
            mode: DriftMode::Day,
            periods,
            attempts_per_period: 5,
            drift_factor: 0.05,
            grouping_seed,
        }
    }

    pub fn sessions(periods: usize, grouping_seed: u64) -> Self {
        DriftConfig {
            mode: DriftMode::Session,
            drift_factor: 0.0,
            ..DriftConfig::days(periods, grouping_seed)
        }
    }
}

const SESSION_NOISE: [NoiseCondition; 3] = [NoiseCondition::Quiet, NoiseCondition::Indoor, NoiseCondition::Street];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodStats {
    pub period: usize,
    pub wear_jitter: f64,
    /// Noise of the period's scans; `None` when it follows the dataset's
    /// schedule.
    pub noise: Option<NoiseCondition>,
    /// Genuine error counts (bits) in attempt order.
    pub genuine_bits: Vec<usize>,
    pub genuine_min: usize,
    pub genuine_max: usize,
    pub genuine_within_t: f64,
    pub passive_min: usize,
    pub passive_max: usize,
    pub passive_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub ecc: EccName,
    pub t: usize,
    pub config: DriftConfig,
    pub base_wear_jitter: f64,
    pub enrolled: Vec<String>,
    pub periods: Vec<PeriodStats>,
}

impl DriftReport {
    /// Lowest per-period fraction of genuine attempts within `t`.
    pub fn worst_within_t(&self) -> f64 {
        self.periods.iter().map(|p| p.genuine_within_t).fold(1.0, f64::min)
    }

    pub fn min_passive(&self) -> usize {
        self.periods.iter().map(|p| p.passive_min).min().unwrap_or(0)
    }

    /// Largest KS statistic between the genuine distances of any two periods.
    pub fn max_ks(&self) -> f64 {
        let bits: Vec<Vec<f64>> = self
            .periods
            .iter()
            .map(|p| p.genuine_bits.iter().map(|&b| b as f64).collect())
            .collect();
        let mut worst = 0.0f64;
        for (i, a) in bits.iter().enumerate() {
            for b in &bits[i + 1..] {
                worst = worst.max(ks_statistic(a, b));
            }
        }
        worst
    }
}

/// Enrolls the users of grouping 0 from the dataset, then re-simulates fresh
/// attempts per period and measures genuine and cross-user distances against
/// a fixed threshold.
pub fn drift_eval(dataset: &Dataset, cache: &FeatureCache, ecc: EccName, drift: &DriftConfig) -> Result<DriftReport> {
    if drift.periods == 0 || drift.attempts_per_period == 0 {
        return Err(Error::invalid("drift evaluation needs periods and attempts"));
    }
    if drift.periods as u32 >= PERIOD_STRIDE {
        return Err(Error::invalid("too many periods"));
    }
    let cfg = dataset.config();
    let excitation = cfg.excitation()?;
    let g = grouping(cache.n_subjects(), drift.grouping_seed, 0)?;
    let victims = enroll_trial(cache, &g, ecc, drift.grouping_seed, 0)?;
    let t = ecc.code().t();

    // Dataset subject ids come from the generator in index order.
    for (i, id) in cache.subjects.iter().enumerate() {
        if synth_subject(cfg.seed, i as u32).subject_id != *id {
            return Err(Error::Malformed(format!("subject {id} does not match the generator")));
        }
    }

    let mut periods = Vec::with_capacity(drift.periods);
    for period in 0..drift.periods {
        let (jitter, noise) = match drift.mode {
            DriftMode::Day => (cfg.wear_jitter * (1.0 + drift.drift_factor * period as f64), None),
            DriftMode::Session => (cfg.wear_jitter, Some(SESSION_NOISE[period % SESSION_NOISE.len()])),
        };
        let base = DRIFT_TRIAL_BASE + period as u32 * PERIOD_STRIDE;
        // Fresh attempt features of every enrolled user: [victim][attempt].
        let attempts = victims
            .par_iter()
            .map(|v| {
                (0..drift.attempts_per_period)
                    .map(|a| {
                        let scans = (0..ATTEMPT_SCANS)
                            .map(|j| {
                                let trial = base + (a * ATTEMPT_SCANS + j) as u32;
                                let noise = noise.unwrap_or_else(|| cfg.noise_for_trial(trial));
                                cfg.genuine_scan(&excitation, v.subject as u32, trial, noise, jitter)
                                    .map(|s| s.impulse_response)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(extract_features(&scans, &cfg.features)?.coefficients)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let distances = victims
            .par_iter()
            .enumerate()
            .map(|(vi, v)| {
                let distance = |f: &Vec<f64>| -> Result<usize> { v.key_for(f)?.bits.hamming(&v.credential.key.bits) };
                let genuine = attempts[vi].iter().map(distance).collect::<Result<Vec<_>>>()?;
                let passive = attempts
                    .iter()
                    .enumerate()
                    .filter(|(oi, _)| *oi != vi)
                    .flat_map(|(_, a)| a.iter())
                    .map(distance)
                    .collect::<Result<Vec<_>>>()?;
                Ok((genuine, passive))
            })
            .collect::<Result<Vec<_>>>()?;

        let genuine: Vec<usize> = distances.iter().flat_map(|(g, _)| g.iter().copied()).collect();
        let passive: Vec<usize> = distances.iter().flat_map(|(_, p)| p.iter().copied()).collect();
        periods.push(PeriodStats {
            period,
            wear_jitter: jitter,
            noise,
            genuine_min: genuine.iter().copied().min().unwrap_or(0),
            genuine_max: genuine.iter().copied().max().unwrap_or(0),
            genuine_within_t: genuine.iter().filter(|&&d| d <= t).count() as f64 / genuine.len().max(1) as f64,
            passive_min: passive.iter().copied().min().unwrap_or(0),
            passive_max: passive.iter().copied().max().unwrap_or(0),
            passive_mean: passive.iter().sum::<usize>() as f64 / passive.len().max(1) as f64,
            genuine_bits: genuine,
        });
    }

    Ok(DriftReport {
        ecc,
        t,
        config: *drift,
        base_wear_jitter: cfg.wear_jitter,
        enrolled: victims.iter().map(|v| cache.subjects[v.subject].clone()).collect(),
        periods,
    })
}
