use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::helper::{HelperData, KEY_LENGTHS};
use super::info::{biometric_information, estimate_distribution, smooth, BinEdges};
use super::otsu::otsu_mask;
use super::project::{project_and_binarize, BiometricKey};
use crate::bits::Bits;
use crate::features::{extract_features, FeatureConfig};
use crate::{Error, Result};

/// Histogram bins per dimension.
pub const HIST_BINS: usize = 32;
/// Histograms span mean +- this many standard deviations.
pub const HIST_SPAN: f64 = 4.0;
pub const STD_FLOOR: f64 = 1e-9;

/// Per-dimension population statistics of a gallery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub edges: Vec<BinEdges>,
    /// Smoothed population histograms `Q`, one per dimension.
    pub q: Vec<Vec<f64>>,
    /// Smoothing mass added to each bin of `Q`.
    pub smoothing: f64,
}

impl PopulationStats {
    /// From per-scan gallery features (population std, floored).
    ///
    /// `Q` gets add-one Laplace smoothing: one pseudo-sample per bin, i.e.
    /// a smoothing mass of `1 / N` for `N` gallery samples. A much smaller
    /// mass makes every bin the gallery never reached worth about
    /// `log2(1 / mass)` bits, and a handful of such dimensions then take
    /// over the Otsu split.
    pub fn from_features(features: &[Vec<f64>]) -> Result<Self> {
        let d = features
            .first()
            .ok_or_else(|| Error::invalid("empty gallery"))?
            .len();
        if let Some(f) = features.iter().find(|f| f.len() != d) {
            return Err(Error::LengthMismatch {
                expected: d,
                actual: f.len(),
            });
        }
        let n = features.len() as f64;
        let smoothing = 1.0 / n;
        let dims: Vec<_> = (0..d)
            .into_par_iter()
            .map(|j| {
                let column: Vec<f64> = features.iter().map(|f| f[j]).collect();
                let mean = column.iter().sum::<f64>() / n;
                let std = (column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
                    .sqrt()
                    .max(STD_FLOOR);
                let edges = BinEdges::new(mean - HIST_SPAN * std, mean + HIST_SPAN * std, HIST_BINS)?;
                let q = smooth(&estimate_distribution(&column, &edges)?, smoothing);
                Ok((mean, std, edges, q))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut stats = PopulationStats {
            mean: Vec::with_capacity(d),
            std: Vec::with_capacity(d),
            edges: Vec::with_capacity(d),
            q: Vec::with_capacity(d),
            smoothing,
        };
        for (m, s, e, q) in dims {
            stats.mean.push(m);
            stats.std.push(s);
            stats.edges.push(e);
            stats.q.push(q);
        }
        Ok(stats)
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    /// Masked standardization against these statistics.
    pub fn standardize(&self, c: &[f64], mask: &Bits) -> Result<Vec<f64>> {
        if c.len() != self.dims() {
            return Err(Error::LengthMismatch {
                expected: self.dims(),
                actual: c.len(),
            });
        }
        if mask.len() != self.dims() {
            return Err(Error::LengthMismatch {
                expected: self.dims(),
                actual: mask.len(),
            });
        }
        Ok((0..c.len())
            .filter(|&j| mask[j])
            .map(|j| (c[j] - self.mean[j]) / self.std[j])
            .collect())
    }

    /// Biometric information of a user's per-scan features, per dimension.
    pub fn information(&self, user_scans: &[Vec<f64>], alpha: f64) -> Result<Vec<f64>> {
        (0..self.dims())
            .map(|j| {
                let column = user_scans
                    .iter()
                    .map(|f| {
                        f.get(j).copied().ok_or(Error::LengthMismatch {
                            expected: self.dims(),
                            actual: f.len(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let p = estimate_distribution(&column, &self.edges[j])?;
                biometric_information(&p, &self.q[j], alpha)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeygenParams {
    pub key_length: usize,
    /// Rényi order; 0 by default.
    pub alpha: f64,
    pub projection_seed: u64,
}

impl KeygenParams {
    pub fn new(key_length: usize, projection_seed: u64) -> Self {
        KeygenParams {
            key_length,
            alpha: 0.0,
            projection_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enrollment {
    pub key: BiometricKey,
    pub helper: HelperData,
    /// Per-dimension biometric information that drove the mask.
    pub information: Vec<f64>,
}

/// Enrollment from precomputed features: `per_scan` holds one feature per
/// enrollment scan, `aggregate` the feature of all enrollment scans
/// together.
pub fn enroll_from_features(
    per_scan: &[Vec<f64>],
    aggregate: &[f64],
    population: &PopulationStats,
    params: &KeygenParams,
    config_hash: [u8; 8],
) -> Result<Enrollment> {
    if per_scan.len() < 2 {
        return Err(Error::invalid(format!(
            "enrollment needs at least 2 scans, got {}",
            per_scan.len()
        )));
    }
    if !KEY_LENGTHS.contains(&params.key_length) {
        return Err(Error::invalid(format!("key length {}", params.key_length)));
    }
    let information = population.information(per_scan, params.alpha)?;
    let mask = otsu_mask(&information)?;
    let stats = (0..population.dims())
        .filter(|&j| mask[j])
        .map(|j| (population.mean[j] as f32, population.std[j] as f32))
        .collect();
    let helper = HelperData {
        key_length: params.key_length,
        mask,
        projection_seed: params.projection_seed,
        stats,
        config_hash,
    };
    helper.validate()?;
    let key = extract_key_from_feature(aggregate, &helper)?;
    Ok(Enrollment {
        key,
        helper,
        information,
    })
}

/// Mobile-side enrollment from raw impulse responses.
pub fn enroll<R: AsRef<[f32]> + Sync>(
    scans: &[R],
    population: &PopulationStats,
    params: &KeygenParams,
    config: &FeatureConfig,
) -> Result<Enrollment> {
    let per_scan = scans
        .iter()
        .map(|s| Ok(extract_features(&[s.as_ref()], config)?.coefficients))
        .collect::<Result<Vec<_>>>()?;
    if per_scan.len() < 2 {
        return Err(Error::invalid(format!(
            "enrollment needs at least 2 scans, got {}",
            per_scan.len()
        )));
    }
    let aggregate = extract_features(scans, config)?.coefficients;
    enroll_from_features(&per_scan, &aggregate, population, params, config.config_hash())
}

/// Key from an already extracted feature.
pub fn extract_key_from_feature(feature: &[f64], helper: &HelperData) -> Result<BiometricKey> {
    let x = helper.standardize(feature)?;
    project_and_binarize(&x, helper.projection_seed, helper.key_length)
}

/// Earbud-side key extraction.
pub fn extract_key<R: AsRef<[f32]>>(
    scans: &[R],
    helper: &HelperData,
    config: &FeatureConfig,
) -> Result<BiometricKey> {
    if helper.config_hash != config.config_hash() {
        return Err(Error::ConfigMismatch);
    }
    let feature = extract_features(scans, config)?;
    extract_key_from_feature(&feature.coefficients, helper)
}
