use std::collections::HashMap;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::FeatureCache;
use super::metrics::{balanced_accuracy, sweep_rates, BerSummary, RatePoint};
use crate::dsp::derive_seed;
use crate::ecc::EccName;
use crate::keygen::{enroll_from_features, BiometricKey, HelperData, KeygenParams, PopulationStats, Projection};
use crate::protocol::{
    commit, verifier_session, CredentialMetadata, Decision, EnrolledCredential, Message,
};
use crate::{Error, Result};

pub const GALLERY_SIZE: usize = 30;
pub const ENROLLED_SIZE: usize = 14;
pub const DEFAULT_TRIALS: usize = 20;

const GROUPING_TAG: u64 = 0x4752_4f55;
const PROJECTION_TAG: u64 = 0x5052_4f4a;
pub(crate) const COMMIT_TAG: u64 = 0x434f_4d4d;

/// Gallery and enrolled subjects (cache indices) for one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    pub gallery: Vec<usize>,
    pub enrolled: Vec<usize>,
}

/// Gallery/enrolled sizes: 30/14 for 44 subjects, proportional otherwise.
pub fn group_sizes(n_subjects: usize) -> Result<(usize, usize)> {
    if n_subjects < 3 {
        return Err(Error::invalid(format!("{n_subjects} subjects; at least 3 are needed")));
    }
    let total = GALLERY_SIZE + ENROLLED_SIZE;
    if n_subjects == total {
        return Ok((GALLERY_SIZE, ENROLLED_SIZE));
    }
    let gallery = ((n_subjects * GALLERY_SIZE) as f64 / total as f64).round() as usize;
    let gallery = gallery.clamp(1, n_subjects - 2);
    Ok((gallery, n_subjects - gallery))
}

/// Random split for trial `trial`, deterministic in `(seed, trial)`.
pub fn grouping(n_subjects: usize, seed: u64, trial: usize) -> Result<Grouping> {
    let (g, _) = group_sizes(n_subjects)?;
    let mut order: Vec<usize> = (0..n_subjects).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, GROUPING_TAG, trial as u64)));
    let mut gallery = order[..g].to_vec();
    let mut enrolled = order[g..].to_vec();
    gallery.sort_unstable();
    enrolled.sort_unstable();
    Ok(Grouping { gallery, enrolled })
}

/// An enrolled user within one trial, with everything the earbud and the
/// verifier hold.
#[derive(Debug, Clone)]
pub struct Victim {
    pub subject: usize,
    pub credential: EnrolledCredential,
    pub helper: HelperData,
    projection: Projection,
}

impl Victim {
    /// Earbud-side key for a feature under this victim's helper data.
    pub fn key_for(&self, feature: &[f64]) -> Result<BiometricKey> {
        self.projection.binarize(&self.helper.standardize(feature)?)
    }

    /// One full protocol run: commit to `key`, serialize, verify against
    /// this victim's credential. Returns the decision and the Hamming
    /// distance from the enrolled key.
    pub fn attempt_with_key(&self, key: &BiometricKey, commit_seed: u64) -> Result<Attempt> {
        let ecc = self.credential.ecc;
        let mut rng = ChaCha8Rng::seed_from_u64(commit_seed);
        let (commitment, _) = commit(key, ecc.code(), &mut rng)?;
        let message = Message::AuthCommit {
            user_id: self.credential.user_id.clone(),
            ecc,
            commitment,
        }
        .encode()?;
        let store = HashMap::from([(self.credential.user_id.clone(), self.credential.clone())]);
        let outcome = verifier_session(&message, &store);
        Ok(Attempt {
            distance: key.bits.hamming(&self.credential.key.bits)?,
            decision: outcome.decision,
        })
    }

    pub fn attempt(&self, feature: &[f64], commit_seed: u64) -> Result<Attempt> {
        self.attempt_with_key(&self.key_for(feature)?, commit_seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attempt {
    pub distance: usize,
    pub decision: Decision,
}

impl Attempt {
    /// Whether the protocol decision agrees with thresholding the distance.
    pub fn consistent(&self, t: usize) -> bool {
        self.decision.accepted() == (self.distance <= t)
    }
}

/// Population statistics and enrollments for one grouping.
pub fn enroll_trial(
    cache: &FeatureCache,
    grouping: &Grouping,
    ecc: EccName,
    seed: u64,
    trial: usize,
) -> Result<Vec<Victim>> {
    let gallery: Vec<Vec<f64>> = grouping
        .gallery
        .iter()
        .flat_map(|&s| cache.per_scan[s].iter().cloned())
        .collect();
    let population = PopulationStats::from_features(&gallery)?;
    let config_hash = cache.config.config_hash();
    grouping
        .enrolled
        .par_iter()
        .map(|&s| {
            let params = KeygenParams::new(
                ecc.code().n(),
                derive_seed(seed, PROJECTION_TAG, ((trial as u64) << 32) | s as u64),
            );
            let e = enroll_from_features(
                cache.enrollment_features(s),
                &cache.enroll_aggregate[s],
                &population,
                &params,
                config_hash,
            )?;
            let projection = e.helper.projection()?;
            Ok(Victim {
                subject: s,
                credential: EnrolledCredential {
                    user_id: cache.subjects[s].clone(),
                    key: e.key,
                    ecc,
                    metadata: CredentialMetadata {
                        enroll_scans: cache.enroll_scans,
                        config_hash: config_hash.iter().map(|b| format!("{b:02x}")).collect(),
                        created_unix: None,
                    },
                },
                helper: e.helper,
                projection,
            })
        })
        .collect()
}

pub(crate) fn commit_seed(seed: u64, trial: usize, victim: usize, kind: u64, index: usize) -> u64 {
    derive_seed(
        derive_seed(seed, COMMIT_TAG, ((trial as u64) << 32) | victim as u64),
        kind,
        index as u64,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRates {
    pub trial: usize,
    pub frr: f64,
    pub far: f64,
    pub bac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyStats {
    /// Mean fraction of 1-bits over enrolled keys.
    pub bit_balance: f64,
    /// Mean pairwise Hamming distance between enrolled keys, in bits.
    pub mean_pairwise_distance: f64,
    pub min_pairwise_distance: usize,
    /// Fraction of pairs farther apart than 0.15 L.
    pub pairs_above_015: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub ecc: EccName,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub trials: usize,
    pub grouping_seed: u64,
    pub gallery_size: usize,
    pub enrolled_size: usize,
    pub genuine_attempts: usize,
    pub impostor_attempts: usize,
    /// Means over trials at the ECC operating point.
    pub frr: f64,
    pub far: f64,
    pub bac: f64,
    pub eer: f64,
    pub eer_threshold: f64,
    pub genuine_ber: BerSummary,
    pub impostor_ber: BerSummary,
    /// Attempts where the protocol decision differs from `distance <= t`.
    pub consistency_violations: usize,
    pub key_stats: KeyStats,
    pub per_trial: Vec<TrialRates>,
    /// Pooled FRR/FAR at every threshold.
    pub sweep: Vec<RatePoint>,
}

const GENUINE_KIND: u64 = 1;
const PASSIVE_KIND: u64 = 2;

struct TrialOutcome {
    rates: TrialRates,
    genuine: Vec<f64>,
    impostor: Vec<f64>,
    violations: usize,
    keys: Vec<BiometricKey>,
}

fn run_trial(cache: &FeatureCache, ecc: EccName, seed: u64, trial: usize) -> Result<TrialOutcome> {
    let code = ecc.code();
    let g = grouping(cache.n_subjects(), seed, trial)?;
    let victims = enroll_trial(cache, &g, ecc, seed, trial)?;
    let per_victim = victims
        .par_iter()
        .map(|v| {
            let mut genuine = Vec::new();
            let mut impostor = Vec::new();
            for (a, f) in cache.attempts[v.subject].iter().enumerate() {
                genuine.push(v.attempt(f, commit_seed(seed, trial, v.subject, GENUINE_KIND, a))?);
            }
            let mut index = 0;
            for other in (0..cache.n_subjects()).filter(|&o| o != v.subject) {
                for f in &cache.attempts[other] {
                    impostor.push(v.attempt(f, commit_seed(seed, trial, v.subject, PASSIVE_KIND, index))?);
                    index += 1;
                }
            }
            Ok((genuine, impostor))
        })
        .collect::<Result<Vec<_>>>()?;

    let l = code.n() as f64;
    let mut out = TrialOutcome {
        rates: TrialRates {
            trial,
            frr: 0.0,
            far: 0.0,
            bac: 0.0,
        },
        genuine: Vec::new(),
        impostor: Vec::new(),
        violations: 0,
        keys: victims.iter().map(|v| v.credential.key.clone()).collect(),
    };
    let (mut rejects, mut accepts) = (0usize, 0usize);
    for (genuine, impostor) in &per_victim {
        for a in genuine {
            rejects += !a.decision.accepted() as usize;
            out.violations += !a.consistent(code.t()) as usize;
            out.genuine.push(a.distance as f64 / l);
        }
        for a in impostor {
            accepts += a.decision.accepted() as usize;
            out.violations += !a.consistent(code.t()) as usize;
            out.impostor.push(a.distance as f64 / l);
        }
    }
    let frr = rejects as f64 / out.genuine.len().max(1) as f64;
    let far = accepts as f64 / out.impostor.len().max(1) as f64;
    out.rates = TrialRates {
        trial,
        frr,
        far,
        bac: balanced_accuracy(frr, far),
    };
    Ok(out)
}

fn key_stats(keys_per_trial: &[Vec<BiometricKey>]) -> Result<KeyStats> {
    let (mut ones, mut bits) = (0usize, 0usize);
    let mut distances = Vec::new();
    for keys in keys_per_trial {
        for (i, a) in keys.iter().enumerate() {
            ones += a.bits.count_ones();
            bits += a.key_length();
            for b in &keys[i + 1..] {
                distances.push(a.bits.hamming(&b.bits)?);
            }
        }
    }
    let l = keys_per_trial
        .iter()
        .flatten()
        .next()
        .map_or(1, |k| k.key_length()) as f64;
    let pairs = distances.len().max(1) as f64;
    Ok(KeyStats {
        bit_balance: ones as f64 / bits.max(1) as f64,
        mean_pairwise_distance: distances.iter().sum::<usize>() as f64 / pairs,
        min_pairwise_distance: distances.iter().copied().min().unwrap_or(0),
        pairs_above_015: distances.iter().filter(|&&d| d as f64 > 0.15 * l).count() as f64 / pairs,
    })
}

/// Enrolls the non-gallery users of `trials` random groupings and runs every
/// genuine and cross-user attempt through the protocol.
pub fn evaluate(cache: &FeatureCache, ecc: EccName, trials: usize, grouping_seed: u64) -> Result<ErrorRates> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let (gallery_size, enrolled_size) = group_sizes(cache.n_subjects())?;
    if gallery_size != GALLERY_SIZE || enrolled_size != ENROLLED_SIZE {
        warn!(
            "{} subjects: using a {gallery_size}/{enrolled_size} gallery/enrolled split",
            cache.n_subjects()
        );
    }
    let outcomes = (0..trials)
        .map(|trial| run_trial(cache, ecc, grouping_seed, trial))
        .collect::<Result<Vec<_>>>()?;

    let code = ecc.code();
    let genuine: Vec<f64> = outcomes.iter().flat_map(|o| o.genuine.iter().copied()).collect();
    let impostor: Vec<f64> = outcomes.iter().flat_map(|o| o.impostor.iter().copied()).collect();
    let sweep = sweep_rates(&genuine, &impostor, code.n())?;
    if !sweep.is_monotone() {
        return Err(Error::Degenerate("rate sweep is not monotone".into()));
    }
    let mean = |f: fn(&TrialRates) -> f64| outcomes.iter().map(|o| f(&o.rates)).sum::<f64>() / trials as f64;
    let frr = mean(|r| r.frr);
    let far = mean(|r| r.far);
    let keys: Vec<Vec<BiometricKey>> = outcomes.iter().map(|o| o.keys.clone()).collect();
    Ok(ErrorRates {
        ecc,
        n: code.n(),
        k: code.k(),
        t: code.t(),
        trials,
        grouping_seed,
        gallery_size,
        enrolled_size,
        genuine_attempts: genuine.len(),
        impostor_attempts: impostor.len(),
        frr,
        far,
        bac: balanced_accuracy(frr, far),
        eer: sweep.eer,
        eer_threshold: sweep.eer_threshold,
        genuine_ber: BerSummary::new(&genuine, code.n()).ok_or(Error::Degenerate("no genuine attempts".into()))?,
        impostor_ber: BerSummary::new(&impostor, code.n())
            .ok_or(Error::Degenerate("no impostor attempts".into()))?,
        consistency_violations: outcomes.iter().map(|o| o.violations).sum(),
        key_stats: key_stats(&keys)?,
        per_trial: outcomes.into_iter().map(|o| o.rates).collect(),
        sweep: sweep.points,
    })
}
