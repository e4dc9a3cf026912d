#![allow(dead_code)]

use std::sync::OnceLock;

use earid::harness::FeatureCache;
use earid::synth::{gen_population, Dataset, DatasetConfig, ExcitationSpec};
use tempfile::TempDir;

/// A small population with attack corpora: 12 subjects, 12 scans each,
/// quarter-second chirps.
pub fn small_config() -> DatasetConfig {
    DatasetConfig {
        n_subjects: 12,
        scans_per_subject: 12,
        enroll_scans: 8,
        seed: 11,
        excitation: ExcitationSpec::chirp(48_000, 0.25, 20.0, 20_000.0),
        attacks: true,
        silicon_profiles: 2,
        silicon_scans: 4,
        universal_scans: 4,
        universal_subset: 8,
        false_trigger_profiles: 2,
        false_trigger_scans: 8,
        ..DatasetConfig::default()
    }
}

pub struct Fixture {
    _dir: TempDir,
    pub dataset: Dataset,
    pub cache: FeatureCache,
}

pub fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let dataset = gen_population(&small_config(), dir.path()).unwrap();
        let cache = FeatureCache::build(&dataset).unwrap();
        Fixture {
            _dir: dir,
            dataset,
            cache,
        }
    })
}
