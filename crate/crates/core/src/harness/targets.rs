//! Pass/fail targets for evaluation, attack and drift reports.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::attacks::AttackReport;
use super::drift::DriftReport;
use super::evaluate::ErrorRates;

pub const MIN_BAC: f64 = 0.97;
pub const MAX_FAR: f64 = 0.02;
pub const MAX_ASR: f64 = 0.02;
pub const MAX_FALSE_TRIGGER_RATE: f64 = 0.005;
pub const BIT_BALANCE: (f64, f64) = (0.45, 0.55);
/// Mean pairwise inter-user key distance, as a fraction of the key length.
pub const MIN_KEY_DISTANCE: f64 = 0.15;
pub const MIN_DRIFT_WITHIN_T: f64 = 0.95;
/// Cross-user distances must stay above this many bits in every period.
pub const MIN_DRIFT_PASSIVE_BITS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {}: {}", self.name, self.detail)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub fn evaluation_checks(r: &ErrorRates) -> Vec<Check> {
    let k = &r.key_stats;
    let min_distance = MIN_KEY_DISTANCE * r.n as f64;
    vec![
        Check::new("BAC", r.bac >= MIN_BAC, format!("{:.4} >= {MIN_BAC}", r.bac)),
        Check::new("FAR", r.far <= MAX_FAR, format!("{:.4} <= {MAX_FAR}", r.far)),
        Check::new(
            "key bit balance",
            (BIT_BALANCE.0..=BIT_BALANCE.1).contains(&k.bit_balance),
            format!("{:.4} in [{}, {}]", k.bit_balance, BIT_BALANCE.0, BIT_BALANCE.1),
        ),
        Check::new(
            "key distance",
            k.mean_pairwise_distance >= min_distance,
            format!("mean {:.1} bits >= {min_distance:.2}", k.mean_pairwise_distance),
        ),
        Check::new(
            "protocol consistency",
            r.consistency_violations == 0,
            format!("{} violations", r.consistency_violations),
        ),
    ]
}

pub fn attack_checks(r: &AttackReport) -> Vec<Check> {
    let asr = |name: &str, rate: f64| Check::new(name, rate <= MAX_ASR, format!("{rate:.4} <= {MAX_ASR}"));
    vec![
        asr("P-ASR", r.passive.rate),
        asr("S-ASR", r.synthetic.rate),
        asr("U-ASR", r.universal.rate),
        asr("K-ASR", r.key_guessing.rate),
        Check::new(
            "random keys",
            r.random_keys.accepted == 0,
            format!("{} of {} accepted", r.random_keys.accepted, r.random_keys.attempts),
        ),
        Check::new(
            "false trigger",
            r.false_trigger.rate <= MAX_FALSE_TRIGGER_RATE,
            format!("{:.4} <= {MAX_FALSE_TRIGGER_RATE}", r.false_trigger.rate),
        ),
        Check::new(
            "protocol consistency",
            r.consistency_violations == 0,
            format!("{} violations", r.consistency_violations),
        ),
    ]
}

pub fn drift_checks(r: &DriftReport) -> Vec<Check> {
    let within = r.worst_within_t();
    let passive = r.min_passive();
    vec![
        Check::new(
            "genuine within t",
            within >= MIN_DRIFT_WITHIN_T,
            format!("worst period {within:.3} >= {MIN_DRIFT_WITHIN_T} (t = {})", r.t),
        ),
        Check::new(
            "passive distance",
            passive > MIN_DRIFT_PASSIVE_BITS,
            format!("min {passive} bits > {MIN_DRIFT_PASSIVE_BITS}"),
        ),
    ]
}
