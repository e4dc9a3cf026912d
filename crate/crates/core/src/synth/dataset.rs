use std::fs;
use std::path::{Path as FsPath, PathBuf};

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::DEFAULT_IR_WINDOW;
use super::excitation::{gen_excitation, Excitation, ExcitationSpec};
use super::scan::{simulate_response_scan, simulate_scan, EcsScan, NoiseCondition, ScanConditions};
use super::subject::{synth_false_trigger, synth_silicon, synth_subject, SubjectProfile};
use crate::dsp::{self, derive_seed};
use crate::features::{self, FeatureConfig};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATASET_FORMAT: &str = "earid-dataset/1";

/// Wear jitter used by default when generating scans. Chosen so the
/// default population stays inside the accuracy and drift targets.
pub const DEFAULT_WEAR_JITTER: f64 = 1.0;

const SCAN_TAG: u64 = 0x5343_414e;
const SILICON_SCAN_TAG: u64 = 0x5349_4c53;
const UNIVERSAL_SCAN_TAG: u64 = 0x554e_4956;
const FALSE_TRIGGER_SCAN_TAG: u64 = 0x4654_5343;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackKind {
    Genuine,
    Synthetic,
    Universal,
    FalseTrigger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub n_subjects: u32,
    pub scans_per_subject: u32,
    /// Scans per subject used for enrollment; the rest are for
    /// authentication.
    pub enroll_scans: u32,
    pub seed: u64,
    pub excitation: ExcitationSpec,
    /// Cycled over trial indices.
    pub noise_schedule: Vec<NoiseCondition>,
    pub wear_jitter: f64,
    pub window: usize,
    pub features: FeatureConfig,
    pub attacks: bool,
    pub silicon_profiles: u32,
    pub silicon_scans: u32,
    pub universal_scans: u32,
    /// The universal profile is the modal feature of the first this many
    /// subjects.
    pub universal_subset: u32,
    pub false_trigger_profiles: u32,
    pub false_trigger_scans: u32,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_subjects: 44,
            scans_per_subject: 40,
            enroll_scans: 8,
            seed: 1,
            excitation: ExcitationSpec::default(),
            noise_schedule: vec![NoiseCondition::Quiet],
            wear_jitter: DEFAULT_WEAR_JITTER,
            window: DEFAULT_IR_WINDOW,
            features: FeatureConfig::default(),
            attacks: false,
            silicon_profiles: 2,
            silicon_scans: 20,
            universal_scans: 40,
            universal_subset: 30,
            false_trigger_profiles: 4,
            false_trigger_scans: 40,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::invalid("at least one subject is required"));
        }
        if self.enroll_scans < 2 || self.enroll_scans >= self.scans_per_subject {
            return Err(Error::invalid(format!(
                "invalid split: {} enrollment scans out of {}",
                self.enroll_scans, self.scans_per_subject
            )));
        }
        if self.noise_schedule.is_empty() {
            return Err(Error::invalid("noise schedule is empty"));
        }
        if !(self.wear_jitter >= 0.0) {
            return Err(Error::invalid("wear jitter must be non-negative"));
        }
        if self.features.sample_rate != self.excitation.sample_rate {
            return Err(Error::invalid("feature and excitation sample rates differ"));
        }
        if self.window > self.features.n_fft {
            return Err(Error::invalid("response window exceeds the feature FFT length"));
        }
        self.features.validate()
    }

    pub fn excitation(&self) -> Result<Excitation> {
        gen_excitation(&self.excitation)
    }

    pub fn noise_for_trial(&self, trial: u32) -> NoiseCondition {
        self.noise_schedule[trial as usize % self.noise_schedule.len()]
    }

    /// Simulates and estimates one genuine scan. Deterministic in
    /// `(seed, subject_index, trial)`, so later sessions can be
    /// re-simulated with new trial indices and jitter.
    pub fn genuine_scan(
        &self,
        excitation: &Excitation,
        subject_index: u32,
        trial: u32,
        noise: NoiseCondition,
        wear_jitter: f64,
    ) -> Result<EcsScan> {
        let profile = synth_subject(self.seed, subject_index);
        let index = ((subject_index as u64) << 32) | trial as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, SCAN_TAG, index));
        let conditions = ScanConditions::new(noise, wear_jitter, trial);
        estimated(simulate_scan(&profile, excitation, &conditions, &mut rng), excitation, self.window)
    }

    fn profile_scan(
        &self,
        profile: &SubjectProfile,
        excitation: &Excitation,
        tag: u64,
        trial: u32,
    ) -> Result<EcsScan> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(profile.seed, tag, trial as u64));
        let conditions = ScanConditions::new(self.noise_for_trial(trial), self.wear_jitter, trial);
        estimated(simulate_scan(profile, excitation, &conditions, &mut rng), excitation, self.window)
    }
}

fn estimated(scan: EcsScan, excitation: &Excitation, window: usize) -> Result<EcsScan> {
    let mut scan = scan.estimate(excitation, window)?;
    scan.recorded = Vec::new();
    Ok(scan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub subject_id: String,
    pub trial: u32,
    pub noise_condition: NoiseCondition,
    pub attack_kind: AttackKind,
    /// Relative to the dataset root.
    pub path: String,
    /// Recording level: max |h| before peak normalization.
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub config: DatasetConfig,
    pub subjects: Vec<String>,
    pub scans: Vec<ScanEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub entry: ScanEntry,
    pub impulse_response: Vec<f32>,
}

impl ScanRecord {
    /// Band-limited energy of the response at its recorded level.
    pub fn band_energy(&self, config: &FeatureConfig) -> Result<f64> {
        let h: Vec<f64> = self
            .impulse_response
            .iter()
            .map(|&v| v as f64 * self.entry.peak)
            .collect();
        let filtered = features::bandpass(&h, config.f_low, config.f_high, config.sample_rate as f64)?;
        Ok(dsp::energy(&filtered))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: Manifest,
    /// In manifest order.
    pub records: Vec<ScanRecord>,
}

impl Dataset {
    pub fn config(&self) -> &DatasetConfig {
        &self.manifest.config
    }

    pub fn load(root: impl AsRef<FsPath>) -> Result<Dataset> {
        let root = root.as_ref().to_path_buf();
        let manifest_path = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.format != DATASET_FORMAT {
            return Err(Error::Malformed(format!("unknown dataset format {:?}", manifest.format)));
        }
        manifest.config.validate()?;
        let records = manifest
            .scans
            .par_iter()
            .map(|entry| {
                let path = root.join(&entry.path);
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                Ok(ScanRecord {
                    entry: entry.clone(),
                    impulse_response: decode_f32(&bytes, &path)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            root,
            manifest,
            records,
        })
    }

    /// Genuine scans of one subject, ordered by trial.
    pub fn subject_scans(&self, subject_id: &str) -> Vec<&ScanRecord> {
        let mut scans: Vec<&ScanRecord> = self
            .records
            .iter()
            .filter(|r| r.entry.attack_kind == AttackKind::Genuine && r.entry.subject_id == subject_id)
            .collect();
        scans.sort_by_key(|r| r.entry.trial);
        scans
    }

    /// Scans of one kind in manifest order.
    pub fn scans_of(&self, kind: AttackKind) -> Vec<&ScanRecord> {
        self.records.iter().filter(|r| r.entry.attack_kind == kind).collect()
    }

    pub fn has_attacks(&self) -> bool {
        [AttackKind::Synthetic, AttackKind::Universal, AttackKind::FalseTrigger]
            .iter()
            .all(|&k| self.records.iter().any(|r| r.entry.attack_kind == k))
    }
}

fn decode_f32(bytes: &[u8], path: &FsPath) -> Result<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Malformed(format!(
            "{}: length {} is not a multiple of 4",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn encode_f32(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn record(scan: EcsScan, kind: AttackKind, path: String) -> ScanRecord {
    ScanRecord {
        entry: ScanEntry {
            subject_id: scan.subject_id,
            trial: scan.trial_index,
            noise_condition: scan.noise_condition,
            attack_kind: kind,
            path,
            peak: scan.peak,
        },
        impulse_response: scan.impulse_response,
    }
}

/// Generates the population (and attack corpora when enabled) and writes
/// it under `out`.
pub fn gen_population(config: &DatasetConfig, out: impl AsRef<FsPath>) -> Result<Dataset> {
    config.validate()?;
    let excitation = config.excitation()?;
    let n = config.n_subjects;
    let m = config.scans_per_subject;

    let jobs: Vec<(u32, u32)> = (0..n).flat_map(|s| (0..m).map(move |t| (s, t))).collect();
    let mut records = jobs
        .par_iter()
        .map(|&(s, t)| {
            let scan = config.genuine_scan(&excitation, s, t, config.noise_for_trial(t), config.wear_jitter)?;
            let path = format!("scans/{}/{t:03}.f32", scan.subject_id);
            Ok(record(scan, AttackKind::Genuine, path))
        })
        .collect::<Result<Vec<_>>>()?;

    if config.attacks {
        let attacks = attack_corpora(config, &excitation, &records)?;
        records.extend(attacks);
    }

    let subjects = (0..n).map(|s| synth_subject(config.seed, s).subject_id).collect();
    let manifest = Manifest {
        format: DATASET_FORMAT.to_string(),
        config: config.clone(),
        subjects,
        scans: records.iter().map(|r| r.entry.clone()).collect(),
    };

    let root = out.as_ref().to_path_buf();
    records.par_iter().try_for_each(|r| {
        let path = root.join(&r.entry.path);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, encode_f32(&r.impulse_response)).map_err(|e| Error::io(&path, e))
    })?;
    fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    let manifest_path = root.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;

    Ok(Dataset {
        root,
        manifest,
        records,
    })
}

fn attack_corpora(
    config: &DatasetConfig,
    excitation: &Excitation,
    genuine: &[ScanRecord],
) -> Result<Vec<ScanRecord>> {
    let mut out = Vec::new();

    let silicon: Vec<(u32, u32)> = (0..config.silicon_profiles)
        .flat_map(|p| (0..config.silicon_scans).map(move |t| (p, t)))
        .collect();
    out.extend(
        silicon
            .par_iter()
            .map(|&(p, t)| {
                let profile = synth_silicon(config.seed, p);
                let scan = config.profile_scan(&profile, excitation, SILICON_SCAN_TAG, t)?;
                let path = format!("attacks/synthetic/{}_{t:03}.f32", profile.subject_id);
                Ok(record(scan, AttackKind::Synthetic, path))
            })
            .collect::<Result<Vec<_>>>()?,
    );

    let subset = config.universal_subset.min(config.n_subjects);
    if subset < config.universal_subset {
        warn!("universal profile built from only {subset} subjects");
    }
    let subset_ids: Vec<String> = (0..subset).map(|s| synth_subject(config.seed, s).subject_id).collect();
    let gallery: Vec<Vec<f64>> = genuine
        .par_iter()
        .filter(|r| subset_ids.contains(&r.entry.subject_id))
        .map(|r| Ok(features::extract_features(&[&r.impulse_response], &config.features)?.coefficients))
        .collect::<Result<Vec<_>>>()?;
    let modal = modal_feature(&gallery)?;
    let response = render_feature_response(&modal, &config.features, config.window)?;
    out.extend(
        (0..config.universal_scans)
            .into_par_iter()
            .map(|t| {
                let seed = derive_seed(config.seed, UNIVERSAL_SCAN_TAG, t as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let conditions = ScanConditions::new(config.noise_for_trial(t), config.wear_jitter, t);
                let scan = simulate_response_scan("UNI", &response, excitation, &conditions, &mut rng);
                let scan = estimated(scan, excitation, config.window)?;
                Ok(record(scan, AttackKind::Universal, format!("attacks/universal/{t:03}.f32")))
            })
            .collect::<Result<Vec<_>>>()?,
    );

    let profiles = config.false_trigger_profiles.max(1);
    out.extend(
        (0..config.false_trigger_scans)
            .into_par_iter()
            .map(|t| {
                let profile = synth_false_trigger(config.seed, t % profiles);
                let scan = config.profile_scan(&profile, excitation, FALSE_TRIGGER_SCAN_TAG, t)?;
                let path = format!("attacks/false_trigger/{}_{t:03}.f32", profile.subject_id);
                Ok(record(scan, AttackKind::FalseTrigger, path))
            })
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(out)
}

/// Number of histogram bins used to locate per-dimension modes.
pub const MODE_BINS: usize = 32;

/// Per-dimension mode: the center of the fullest of [`MODE_BINS`] bins
/// spanning mean +- 4 std. Ties go to the lower bin.
pub fn modal_feature(features: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = features
        .first()
        .ok_or_else(|| Error::invalid("modal feature of an empty set"))?;
    let d = first.len();
    if let Some(f) = features.iter().find(|f| f.len() != d) {
        return Err(Error::LengthMismatch {
            expected: d,
            actual: f.len(),
        });
    }
    let count = features.len() as f64;
    Ok((0..d)
        .map(|j| {
            let mean = features.iter().map(|f| f[j]).sum::<f64>() / count;
            let var = features.iter().map(|f| (f[j] - mean).powi(2)).sum::<f64>() / count;
            let std = var.sqrt();
            if std == 0.0 {
                return mean;
            }
            let lo = mean - 4.0 * std;
            let width = 8.0 * std / MODE_BINS as f64;
            let mut hist = [0usize; MODE_BINS];
            for f in features {
                let bin = ((f[j] - lo) / width).floor().clamp(0.0, (MODE_BINS - 1) as f64);
                hist[bin as usize] += 1;
            }
            let best = (0..MODE_BINS).fold(0, |b, i| if hist[i] > hist[b] { i } else { b });
            lo + (best as f64 + 0.5) * width
        })
        .collect())
}

/// Correction passes applied by [`render_feature_response`].
const RENDER_PASSES: usize = 8;

/// Impulse response of `window` samples whose extracted feature
/// approximates `coefficients`.
///
/// Each pass renders a minimum-phase response from the current cepstrum,
/// runs it back through the feature pipeline and adds the residual to the
/// cepstrum; this undoes the band-edge smoothing that the pipeline applies
/// on every extraction.
pub fn render_feature_response(coefficients: &[f64], config: &FeatureConfig, window: usize) -> Result<Vec<f64>> {
    if window == 0 || window > config.n_fft {
        return Err(Error::invalid(format!("window {window} outside 1..={}", config.n_fft)));
    }
    let mut current = coefficients.to_vec();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..=RENDER_PASSES {
        let mut h = minimum_phase_response(&current, config)?;
        h.truncate(window);
        let h32: Vec<f32> = h.iter().map(|&v| v as f32).collect();
        let back = features::extract_features(&[&h32], config)?.coefficients;
        let residual: Vec<f64> = coefficients.iter().zip(&back).map(|(t, b)| t - b).collect();
        let err = dsp::energy(&residual);
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((err, h));
        }
        current.iter_mut().zip(&residual).for_each(|(c, r)| *c += r);
    }
    Ok(best.expect("at least one pass").1)
}

/// Minimum-phase impulse response (length `n_fft`, peak 1) whose band
/// log-spectrum has the given leading cepstral coefficients. Outside the
/// band the log-magnitude is held at the band-edge values.
fn minimum_phase_response(coefficients: &[f64], config: &FeatureConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let band = config.band();
    let width = band.clone().count();
    if coefficients.is_empty() || coefficients.len() > width {
        return Err(Error::invalid(format!(
            "{} coefficients for a {width}-bin band",
            coefficients.len()
        )));
    }
    let mut full = coefficients.to_vec();
    full.resize(width, 0.0);
    let band_log = features::dct3(&full);

    let n = config.n_fft;
    let half = n / 2;
    let (lo, hi) = (*band.start(), *band.end());
    let log_mag: Vec<f64> = (0..n)
        .map(|k| {
            let f = dsp::folded_bin(k, n).min(half);
            band_log[f.clamp(lo, hi) - lo]
        })
        .collect();

    // Fold the real cepstrum onto positive quefrencies.
    let real_cep = dsp::real_inverse(log_mag.iter().map(|&v| v.into()).collect());
    let folded: Vec<f64> = (0..n)
        .map(|q| match q {
            0 => real_cep[0],
            q if q < half => 2.0 * real_cep[q],
            q if q == half && n.is_multiple_of(2) => real_cep[q],
            _ => 0.0,
        })
        .collect();
    let spectrum = dsp::spectrum(&folded, n).into_iter().map(|c| c.exp()).collect();
    let mut h = dsp::real_inverse(spectrum);
    let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::Degenerate("rendered response is empty".into()));
    }
    h.iter_mut().for_each(|v| *v /= peak);
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> DatasetConfig {
        DatasetConfig {
            n_subjects: 4,
            scans_per_subject: 4,
            enroll_scans: 2,
            excitation: ExcitationSpec::chirp(48_000, 0.25, 20.0, 20_000.0),
            attacks: true,
            silicon_profiles: 1,
            silicon_scans: 2,
            universal_scans: 2,
            universal_subset: 3,
            false_trigger_profiles: 2,
            false_trigger_scans: 4,
            ..DatasetConfig::default()
        }
    }

    #[test]
    fn generation_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config();
        let ds = gen_population(&cfg, dir.path()).unwrap();
        assert_eq!(ds.scans_of(AttackKind::Genuine).len(), 16);
        assert_eq!(ds.scans_of(AttackKind::Synthetic).len(), 2);
        assert_eq!(ds.scans_of(AttackKind::Universal).len(), 2);
        assert_eq!(ds.scans_of(AttackKind::FalseTrigger).len(), 4);
        assert!(ds.has_attacks());
        for r in &ds.records {
            assert_eq!(r.impulse_response.len(), DEFAULT_IR_WINDOW);
            let peak = r.impulse_response.iter().fold(0.0f32, |m, v| m.max(v.abs()));
            assert!((peak - 1.0).abs() < 1e-6);
        }
        let loaded = Dataset::load(dir.path()).unwrap();
        assert_eq!(loaded.manifest, ds.manifest);
        assert_eq!(loaded.records, ds.records);
        assert_eq!(loaded.subject_scans("S001").len(), 4);
    }

    #[test]
    fn generation_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut cfg = small_config();
        cfg.attacks = false;
        let ds = gen_population(&cfg, a.path()).unwrap();
        gen_population(&cfg, b.path()).unwrap();
        let read = |root: &FsPath, rel: &str| fs::read(root.join(rel)).unwrap();
        assert_eq!(read(a.path(), MANIFEST_FILE), read(b.path(), MANIFEST_FILE));
        for e in &ds.manifest.scans {
            assert_eq!(read(a.path(), &e.path), read(b.path(), &e.path));
        }
    }

    #[test]
    fn invalid_split_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for (enroll, total) in [(1, 10), (10, 10), (12, 10)] {
            let cfg = DatasetConfig {
                enroll_scans: enroll,
                scans_per_subject: total,
                ..small_config()
            };
            assert!(gen_population(&cfg, dir.path()).is_err());
        }
    }

    #[test]
    fn false_trigger_band_energy_is_small() {
        let dir = tempfile::tempdir().unwrap();
        let ds = gen_population(&small_config(), dir.path()).unwrap();
        let cfg = &ds.config().features;
        let genuine: Vec<f64> = ds
            .scans_of(AttackKind::Genuine)
            .iter()
            .map(|r| r.band_energy(cfg).unwrap())
            .collect();
        let weakest = genuine.iter().cloned().fold(f64::INFINITY, f64::min);
        for r in ds.scans_of(AttackKind::FalseTrigger) {
            assert!(r.band_energy(cfg).unwrap() < 0.1 * weakest);
        }
    }

    #[test]
    fn modal_feature_finds_histogram_peak() {
        // 7 values near 1.0, 3 spread out: the mode sits near 1.0, not the mean.
        let mut f: Vec<Vec<f64>> = (0..7).map(|i| vec![1.0 + 0.001 * i as f64]).collect();
        f.extend([vec![3.0], vec![4.0], vec![5.0]]);
        let mode = modal_feature(&f).unwrap()[0];
        let mean = f.iter().map(|v| v[0]).sum::<f64>() / 10.0;
        assert!((mode - 1.0).abs() < (mean - 1.0).abs());
        assert!((mode - 1.0).abs() < 0.5);
        assert_eq!(modal_feature(&[vec![2.0], vec![2.0]]).unwrap(), vec![2.0]);
    }

    fn feature_of(profile: &SubjectProfile, ex: &Excitation, cfg: &FeatureConfig) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scan = simulate_scan(profile, ex, &ScanConditions::noiseless(0), &mut rng)
            .estimate(ex, DEFAULT_IR_WINDOW)
            .unwrap();
        features::extract_features(&[&scan.impulse_response], cfg).unwrap().coefficients
    }

    fn distance(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn rendered_response_lands_near_its_feature() {
        let cfg = FeatureConfig::default();
        let ex = gen_excitation(&ExcitationSpec::chirp(48_000, 0.25, 20.0, 20_000.0)).unwrap();
        for index in 0..3 {
            let target = feature_of(&synth_subject(5, index), &ex, &cfg);
            let other = feature_of(&synth_subject(5, index + 10), &ex, &cfg);
            let h = render_feature_response(&target, &cfg, DEFAULT_IR_WINDOW).unwrap();
            assert_eq!(h.len(), DEFAULT_IR_WINDOW);
            let h32: Vec<f32> = h.iter().map(|&v| v as f32).collect();
            let back = features::extract_features(&[&h32], &cfg).unwrap().coefficients;
            let (rendered, unrelated) = (distance(&target, &back), distance(&target, &other));
            assert!(rendered < 0.5 * unrelated, "{rendered} vs {unrelated}");
        }
    }
}
