use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::features::{extract_features, FeatureConfig};
use crate::synth::{AttackKind, Dataset, ScanRecord};
use crate::{Error, Result};

/// Scans per authentication attempt.
pub const ATTEMPT_SCANS: usize = 2;

/// Features of every scan and attempt of a dataset. None of them depend on
/// the grouping, so one cache serves every evaluation trial.
#[derive(Debug, Clone)]
pub struct FeatureCache {
    pub config: FeatureConfig,
    pub subjects: Vec<String>,
    /// `[subject][trial]`, one feature per scan.
    pub per_scan: Vec<Vec<Vec<f64>>>,
    pub enroll_scans: usize,
    /// `[subject]`, feature of all enrollment scans together.
    pub enroll_aggregate: Vec<Vec<f64>>,
    /// `[subject][attempt]`, over the scans after the enrollment split.
    pub attempts: Vec<Vec<Vec<f64>>>,
    pub silicon: Vec<Vec<f64>>,
    pub universal: Vec<Vec<f64>>,
    pub false_trigger: Vec<Vec<f64>>,
}

fn feature(scans: &[&ScanRecord], config: &FeatureConfig) -> Result<Vec<f64>> {
    let responses: Vec<&[f32]> = scans.iter().map(|r| r.impulse_response.as_slice()).collect();
    Ok(extract_features(&responses, config)?.coefficients)
}

/// Consecutive groups of [`ATTEMPT_SCANS`] scans; a trailing partial group
/// is dropped.
fn attempt_features(scans: &[&ScanRecord], config: &FeatureConfig) -> Result<Vec<Vec<f64>>> {
    scans
        .par_chunks_exact(ATTEMPT_SCANS)
        .map(|group| feature(group, config))
        .collect()
}

/// Attack attempts grouped per source profile, in manifest order.
fn attack_attempts(dataset: &Dataset, kind: AttackKind) -> Result<Vec<Vec<f64>>> {
    let mut by_profile: BTreeMap<&str, Vec<&ScanRecord>> = BTreeMap::new();
    for r in dataset.scans_of(kind) {
        by_profile.entry(&r.entry.subject_id).or_default().push(r);
    }
    let mut out = Vec::new();
    for scans in by_profile.values() {
        out.extend(attempt_features(scans, &dataset.config().features)?);
    }
    Ok(out)
}

impl FeatureCache {
    pub fn build(dataset: &Dataset) -> Result<FeatureCache> {
        let cfg = dataset.config();
        let config = cfg.features;
        let enroll_scans = cfg.enroll_scans as usize;
        let subjects = dataset.manifest.subjects.clone();

        let per_subject = subjects
            .par_iter()
            .map(|id| {
                let scans = dataset.subject_scans(id);
                if scans.len() != cfg.scans_per_subject as usize {
                    return Err(Error::Malformed(format!(
                        "subject {id} has {} scans, expected {}",
                        scans.len(),
                        cfg.scans_per_subject
                    )));
                }
                let per_scan = scans
                    .par_iter()
                    .map(|r| feature(&[r], &config))
                    .collect::<Result<Vec<_>>>()?;
                let aggregate = feature(&scans[..enroll_scans], &config)?;
                let attempts = attempt_features(&scans[enroll_scans..], &config)?;
                Ok((per_scan, aggregate, attempts))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut cache = FeatureCache {
            config,
            subjects,
            per_scan: Vec::new(),
            enroll_scans,
            enroll_aggregate: Vec::new(),
            attempts: Vec::new(),
            silicon: attack_attempts(dataset, AttackKind::Synthetic)?,
            universal: attack_attempts(dataset, AttackKind::Universal)?,
            false_trigger: attack_attempts(dataset, AttackKind::FalseTrigger)?,
        };
        for (per_scan, aggregate, attempts) in per_subject {
            cache.per_scan.push(per_scan);
            cache.enroll_aggregate.push(aggregate);
            cache.attempts.push(attempts);
        }
        Ok(cache)
    }

    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn enrollment_features(&self, subject: usize) -> &[Vec<f64>] {
        &self.per_scan[subject][..self.enroll_scans]
    }

    pub fn has_attacks(&self) -> bool {
        !self.silicon.is_empty() && !self.universal.is_empty() && !self.false_trigger.is_empty()
    }
}
