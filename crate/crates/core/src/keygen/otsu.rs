use log::warn;

use crate::bits::Bits;
use crate::{Error, Result};

/// Quantization levels over the value range.
pub const OTSU_LEVELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtsuThreshold {
    /// Values at level `<= level` form the lower class.
    pub level: usize,
    pub tau: f64,
}

/// Level of `v` on [`OTSU_LEVELS`] equal steps over `[min, min + range]`:
/// `ceil((v - min) / range * LEVELS) - 1`, clamped to `0..LEVELS`.
fn quantize(v: f64, min: f64, range: f64) -> usize {
    let q = ((v - min) / range * OTSU_LEVELS as f64).ceil() - 1.0;
    q.clamp(0.0, (OTSU_LEVELS - 1) as f64) as usize
}

/// Threshold maximizing between-class variance of the quantized values.
/// `None` when all values are equal. Ties go to the lowest level.
///
/// For a split with class counts `n0, n1` and level sums `s0, s1`, the
/// between-class variance is proportional to
/// `(s0 n1 - s1 n0)^2 / (n0 n1)`; candidates are compared exactly in
/// integers.
pub fn otsu_threshold(values: &[f64]) -> Result<Option<OtsuThreshold>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value"));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if values.is_empty() || !(range > 0.0) {
        return Ok(None);
    }
    let mut counts = [0u64; OTSU_LEVELS];
    for &v in values {
        counts[quantize(v, min, range)] += 1;
    }
    let n = values.len() as u64;
    let total: u64 = counts.iter().enumerate().map(|(l, c)| l as u64 * c).sum();

    let (mut n0, mut s0) = (0u64, 0u64);
    // Best score as a fraction num / den.
    let mut best: Option<(usize, u128, u128)> = None;
    for (level, &c) in counts.iter().enumerate().take(OTSU_LEVELS - 1) {
        n0 += c;
        s0 += level as u64 * c;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = total - s0;
        let diff = (s0 as i128 * n1 as i128 - s1 as i128 * n0 as i128).unsigned_abs();
        let num = diff * diff;
        let den = n0 as u128 * n1 as u128;
        if best.is_none_or(|(_, bn, bd)| num * bd > bn * den) {
            best = Some((level, num, den));
        }
    }
    Ok(best.map(|(level, _, _)| OtsuThreshold {
        level,
        tau: min + (level + 1) as f64 * range / OTSU_LEVELS as f64,
    }))
}

/// Mask of dimensions whose value lies above the Otsu threshold. All-equal
/// input keeps every dimension.
pub fn otsu_mask(values: &[f64]) -> Result<Bits> {
    if values.len() < 2 {
        return Err(Error::invalid("Otsu masking needs at least two values"));
    }
    match otsu_threshold(values)? {
        Some(t) => {
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(values.iter().map(|&v| quantize(v, min, max - min) > t.level).collect())
        }
        None => {
            warn!("all {} values are equal; keeping every dimension", values.len());
            Ok(Bits::from_bools(vec![true; values.len()]))
        }
    }
}
