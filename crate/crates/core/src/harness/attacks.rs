use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::FeatureCache;
use super::evaluate::{commit_seed, enroll_trial, grouping, Victim};
use crate::dsp::derive_seed;
use crate::ecc::EccName;
use crate::keygen::BiometricKey;
use crate::{Error, Result};

/// Random keys submitted in the key-guessing check.
pub const RANDOM_KEY_GUESSES: usize = 10_000;

const PASSIVE_KIND: u64 = 2;
const SILICON_KIND: u64 = 3;
const UNIVERSAL_KIND: u64 = 4;
const KEY_KIND: u64 = 5;
const FALSE_TRIGGER_KIND: u64 = 6;
const RANDOM_KEY_KIND: u64 = 7;
const RANDOM_KEY_TAG: u64 = 0x5247_5553;

/// Accepted / attempted for one attack family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackTally {
    pub accepted: usize,
    pub attempts: usize,
    pub rate: f64,
    /// Smallest Hamming distance an attempt reached, in bits.
    pub min_distance: Option<usize>,
}

impl AttackTally {
    fn add(&mut self, other: &AttackTally) {
        self.accepted += other.accepted;
        self.attempts += other.attempts;
        self.min_distance = match (self.min_distance, other.min_distance) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }

    fn record(&mut self, accepted: bool, distance: usize) {
        self.accepted += accepted as usize;
        self.attempts += 1;
        self.min_distance = Some(self.min_distance.map_or(distance, |d| d.min(distance)));
    }

    fn finish(mut self) -> Self {
        self.rate = self.accepted as f64 / self.attempts.max(1) as f64;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub ecc: EccName,
    pub t: usize,
    pub trials: usize,
    pub grouping_seed: u64,
    /// Another person wearing the victim's earbuds.
    pub passive: AttackTally,
    /// Silicon ear model in the victim's earbuds.
    pub synthetic: AttackTally,
    /// Universal profile with the victim's helper data.
    pub universal: AttackTally,
    /// Another enrolled user's key committed against the victim.
    pub key_guessing: AttackTally,
    /// Uniformly random keys committed against the victims of trial 0.
    pub random_keys: AttackTally,
    /// Earbuds not worn, against every credential.
    pub false_trigger: AttackTally,
    /// Attempts whose protocol decision disagreed with the distance.
    pub consistency_violations: usize,
}

#[derive(Default)]
struct VictimTallies {
    passive: AttackTally,
    synthetic: AttackTally,
    universal: AttackTally,
    key_guessing: AttackTally,
    false_trigger: AttackTally,
    violations: usize,
}

fn attack_victim(
    cache: &FeatureCache,
    victim: &Victim,
    victims: &[Victim],
    seed: u64,
    trial: usize,
) -> Result<VictimTallies> {
    let t = victim.credential.ecc.code().t();
    let mut out = VictimTallies::default();
    let seed_for = |kind, i| commit_seed(seed, trial, victim.subject, kind, i);
    let run = |tally: &mut AttackTally, violations: &mut usize, key: &BiometricKey, commit: u64| {
        let a = victim.attempt_with_key(key, commit)?;
        *violations += !a.consistent(t) as usize;
        tally.record(a.decision.accepted(), a.distance);
        Ok::<_, Error>(())
    };

    let passive: Vec<&Vec<f64>> = (0..cache.n_subjects())
        .filter(|&o| o != victim.subject)
        .flat_map(|o| cache.attempts[o].iter())
        .collect();
    for (i, f) in passive.into_iter().enumerate() {
        run(&mut out.passive, &mut out.violations, &victim.key_for(f)?, seed_for(PASSIVE_KIND, i))?;
    }
    for (i, f) in cache.silicon.iter().enumerate() {
        run(&mut out.synthetic, &mut out.violations, &victim.key_for(f)?, seed_for(SILICON_KIND, i))?;
    }
    for (i, f) in cache.universal.iter().enumerate() {
        run(&mut out.universal, &mut out.violations, &victim.key_for(f)?, seed_for(UNIVERSAL_KIND, i))?;
    }
    for (i, f) in cache.false_trigger.iter().enumerate() {
        run(&mut out.false_trigger, &mut out.violations, &victim.key_for(f)?, seed_for(FALSE_TRIGGER_KIND, i))?;
    }
    for (i, attacker) in victims.iter().filter(|a| a.subject != victim.subject).enumerate() {
        run(&mut out.key_guessing, &mut out.violations, &attacker.credential.key, seed_for(KEY_KIND, i))?;
    }
    Ok(out)
}

/// Runs all attack families over `trials` groupings.
pub fn attack_suite(cache: &FeatureCache, ecc: EccName, trials: usize, grouping_seed: u64) -> Result<AttackReport> {
    if !cache.has_attacks() {
        return Err(Error::MissingCorpus("attack corpora (generate with attacks enabled)"));
    }
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let mut report = AttackReport {
        ecc,
        t: ecc.code().t(),
        trials,
        grouping_seed,
        passive: AttackTally::default(),
        synthetic: AttackTally::default(),
        universal: AttackTally::default(),
        key_guessing: AttackTally::default(),
        random_keys: AttackTally::default(),
        false_trigger: AttackTally::default(),
        consistency_violations: 0,
    };
    for trial in 0..trials {
        let g = grouping(cache.n_subjects(), grouping_seed, trial)?;
        let victims = enroll_trial(cache, &g, ecc, grouping_seed, trial)?;
        let tallies = victims
            .par_iter()
            .map(|v| attack_victim(cache, v, &victims, grouping_seed, trial))
            .collect::<Result<Vec<_>>>()?;
        for t in &tallies {
            report.passive.add(&t.passive);
            report.synthetic.add(&t.synthetic);
            report.universal.add(&t.universal);
            report.key_guessing.add(&t.key_guessing);
            report.false_trigger.add(&t.false_trigger);
            report.consistency_violations += t.violations;
        }
        if trial == 0 {
            let (tally, violations) = random_keys(&victims, grouping_seed)?;
            report.random_keys = tally;
            report.consistency_violations += violations;
        }
    }
    report.passive = report.passive.finish();
    report.synthetic = report.synthetic.finish();
    report.universal = report.universal.finish();
    report.key_guessing = report.key_guessing.finish();
    report.random_keys = report.random_keys.finish();
    report.false_trigger = report.false_trigger.finish();
    Ok(report)
}

fn random_keys(victims: &[Victim], seed: u64) -> Result<(AttackTally, usize)> {
    let outcomes = (0..RANDOM_KEY_GUESSES)
        .into_par_iter()
        .map(|i| {
            let victim = &victims[i % victims.len()];
            let n = victim.credential.ecc.code().n();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, RANDOM_KEY_TAG, i as u64));
            let key = BiometricKey {
                bits: (0..n).map(|_| rng.random::<bool>()).collect(),
            };
            victim.attempt_with_key(&key, commit_seed(seed, 0, victim.subject, RANDOM_KEY_KIND, i))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tally = AttackTally::default();
    let mut violations = 0;
    for (i, a) in outcomes.iter().enumerate() {
        let t = victims[i % victims.len()].credential.ecc.code().t();
        violations += !a.consistent(t) as usize;
        tally.record(a.decision.accepted(), a.distance);
    }
    Ok((tally, violations))
}
