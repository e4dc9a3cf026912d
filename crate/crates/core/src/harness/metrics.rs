use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::{Error, Result};

pub fn bit_error_rate(a: &Bits, b: &Bits) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::invalid("bit error rate of empty keys"));
    }
    Ok(a.hamming(b)? as f64 / a.len() as f64)
}

/// Rates at one integer threshold `tau` (bits).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub tau: usize,
    /// Fraction of genuine attempts with more than `tau` bit errors.
    pub frr: f64,
    /// Fraction of impostor attempts with at most `tau` bit errors.
    pub far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweep {
    pub key_length: usize,
    pub points: Vec<RatePoint>,
    pub eer: f64,
    /// Crossing threshold, interpolated between integer thresholds.
    pub eer_threshold: f64,
}

impl RateSweep {
    pub fn at(&self, tau: usize) -> RatePoint {
        self.points[tau.min(self.key_length)]
    }

    /// FRR never rises and FAR never falls as `tau` grows.
    pub fn is_monotone(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].frr <= w[0].frr && w[1].far >= w[0].far)
    }
}

fn to_bits(ber: f64, key_length: usize) -> usize {
    (ber * key_length as f64).round().clamp(0.0, key_length as f64) as usize
}

/// FRR and FAR at every threshold `0..=L`, and the equal error rate with
/// linear interpolation between adjacent thresholds.
pub fn sweep_rates(genuine: &[f64], impostor: &[f64], key_length: usize) -> Result<RateSweep> {
    if genuine.is_empty() || impostor.is_empty() || key_length == 0 {
        return Err(Error::invalid("rate sweep needs genuine and impostor samples"));
    }
    let histogram = |bers: &[f64]| {
        let mut h = vec![0usize; key_length + 1];
        for &b in bers {
            h[to_bits(b, key_length)] += 1;
        }
        h
    };
    let (hg, hi) = (histogram(genuine), histogram(impostor));
    let (ng, ni) = (genuine.len() as f64, impostor.len() as f64);
    let mut points = Vec::with_capacity(key_length + 1);
    let (mut g_at_most, mut i_at_most) = (0usize, 0usize);
    for tau in 0..=key_length {
        g_at_most += hg[tau];
        i_at_most += hi[tau];
        points.push(RatePoint {
            tau,
            frr: (genuine.len() - g_at_most) as f64 / ng,
            far: i_at_most as f64 / ni,
        });
    }
    let first = points
        .iter()
        .position(|p| p.frr <= p.far)
        .expect("FRR reaches 0 at tau = L");
    let (eer, eer_threshold) = if first == 0 {
        ((points[0].frr + points[0].far) / 2.0, 0.0)
    } else {
        let (a, b) = (points[first - 1], points[first]);
        let (da, db) = (a.frr - a.far, b.frr - b.far);
        let x = da / (da - db);
        (a.frr + x * (b.frr - a.frr), (first - 1) as f64 + x)
    };
    Ok(RateSweep {
        key_length,
        points,
        eer,
        eer_threshold,
    })
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the
/// empirical CDFs. Zero when either sample is empty.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let sorted = |x: &[f64]| {
        let mut v = x.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        // Step past every copy of the smaller value so ties move together.
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Balanced accuracy from the two error rates.
pub fn balanced_accuracy(frr: f64, far: f64) -> f64 {
    1.0 - (frr + far) / 2.0
}

/// Summary of a BER sample, with bit counts relative to the key length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
    /// Most frequent error count in bits (lowest on ties).
    pub mode_bits: usize,
}

impl BerSummary {
    pub fn new(bers: &[f64], key_length: usize) -> Option<BerSummary> {
        if bers.is_empty() {
            return None;
        }
        let mut sorted = bers.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantile = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
        let mut hist = vec![0usize; key_length + 1];
        for &b in bers {
            hist[to_bits(b, key_length)] += 1;
        }
        let mode_bits = (0..hist.len()).fold(0, |m, i| if hist[i] > hist[m] { i } else { m });
        Some(BerSummary {
            count: bers.len(),
            mean: bers.iter().sum::<f64>() / bers.len() as f64,
            median: quantile(0.5),
            p95: quantile(0.95),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mode_bits,
        })
    }
}
