//! Dataset-level evaluation: error rates over random gallery/enrolled
//! groupings, the attack suites, and drift over simulated days and
//! sessions.
//!
//! Every genuine and attack attempt goes through the full protocol
//! (commit, serialize, verify); the report also counts attempts where the
//! decision disagrees with thresholding the raw Hamming distance.

mod attacks;
mod cache;
mod drift;
mod evaluate;
mod metrics;
pub mod targets;

pub use attacks::{attack_suite, AttackReport, AttackTally, RANDOM_KEY_GUESSES};
pub use cache::{FeatureCache, ATTEMPT_SCANS};
pub use drift::{drift_eval, DriftConfig, DriftMode, DriftReport, PeriodStats};
pub use evaluate::{
    enroll_trial, evaluate, group_sizes, grouping, Attempt, ErrorRates, Grouping, KeyStats, TrialRates,
    Victim, DEFAULT_TRIALS, ENROLLED_SIZE, GALLERY_SIZE,
};
pub use metrics::{balanced_accuracy, bit_error_rate, ks_statistic, sweep_rates, BerSummary, RatePoint, RateSweep};
