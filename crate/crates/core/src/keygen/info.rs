use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smallest smoothing mass accepted for a divergence estimate.
/// `PopulationStats` uses a sample-dependent, larger one.
pub const SMOOTHING: f64 = 1e-6;

/// Equal-width bins over `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinEdges {
    pub low: f64,
    pub high: f64,
    pub bins: usize,
}

impl BinEdges {
    pub fn new(low: f64, high: f64, bins: usize) -> Result<Self> {
        if bins < 2 || !(low < high) || !low.is_finite() || !high.is_finite() {
            return Err(Error::invalid(format!("bad bin edges [{low}, {high}] x {bins}")));
        }
        Ok(BinEdges { low, high, bins })
    }

    pub fn width(&self) -> f64 {
        (self.high - self.low) / self.bins as f64
    }

    /// Bin of `x`; values outside the range fall in the edge bins.
    pub fn index(&self, x: f64) -> usize {
        let i = ((x - self.low) / self.width()).floor();
        if i.is_nan() || i < 0.0 {
            0
        } else {
            (i as usize).min(self.bins - 1)
        }
    }

    pub fn center(&self, i: usize) -> f64 {
        self.low + (i as f64 + 0.5) * self.width()
    }
}

/// Unsmoothed normalized histogram of `samples`.
pub fn estimate_distribution(samples: &[f64], edges: &BinEdges) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid("histogram of no samples"));
    }
    let mut hist = vec![0.0; edges.bins];
    for &x in samples {
        hist[edges.index(x)] += 1.0;
    }
    let n = samples.len() as f64;
    hist.iter_mut().for_each(|h| *h /= n);
    Ok(hist)
}

/// `(q + eps) / (1 + n eps)` per bin.
pub fn smooth(q: &[f64], eps: f64) -> Vec<f64> {
    let norm = 1.0 + q.len() as f64 * eps;
    q.iter().map(|v| (v + eps) / norm).collect()
}

/// Rényi divergence `D_alpha(P || Q)` in bits.
///
/// `alpha == 0` uses `-log2 sum_{P > 0} Q`; `alpha == 1` is the
/// Kullback-Leibler divergence. `Q` must have no empty bins where `P` has
/// mass.
pub fn biometric_information(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("Rényi order {alpha}")));
    }
    let support = p.iter().zip(q).filter(|(pi, _)| **pi > 0.0);
    let d = if alpha == 0.0 {
        -support.map(|(_, qi)| qi).sum::<f64>().log2()
    } else if alpha == 1.0 {
        support.map(|(pi, qi)| pi * (pi / qi).log2()).sum()
    } else {
        let sum: f64 = support.map(|(pi, qi)| pi.powf(alpha) * qi.powf(1.0 - alpha)).sum();
        sum.log2() / (alpha - 1.0)
    };
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Degenerate("divergence is not finite; is Q smoothed?".into()))
    }
}
