use statrs::distribution::{ContinuousCDF, Normal};

use crate::bits::Bits;
use crate::dsp::derive_seed;
use crate::{Error, Result};

/// An `L`-bit biometric key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BiometricKey {
    pub bits: Bits,
}

impl BiometricKey {
    pub fn key_length(&self) -> usize {
        self.bits.len()
    }

    /// `L` as u16 little-endian, then the bits packed LSB-first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = (self.bits.len() as u16).to_le_bytes().to_vec();
        out.extend(self.bits.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 2 {
            return Err(Error::Malformed("key shorter than its header".into()));
        }
        let len = u16::from_le_bytes([bytes[0], bytes[1]]) as usize;
        Ok(BiometricKey {
            bits: Bits::from_bytes(&bytes[2..], len)?,
        })
    }
}

/// Row-major `L x d'` matrix of standard normal deviates.
///
/// Entry `i` (row-major index) is `Phi^-1(u_i)` where
/// `u_i = ((w >> 11) + 0.5) / 2^53` and
/// `w = mix64(mix64(seed ^ mix64((L << 32) | d')) ^ i)`, with `mix64` the
/// SplitMix64 step (add `0x9e3779b97f4a7c15`, then the standard finalizer).
pub fn projection_matrix(seed: u64, key_length: usize, dims: usize) -> Vec<f64> {
    let normal = Normal::standard();
    let tag = ((key_length as u64) << 32) | dims as u64;
    (0..key_length * dims)
        .map(|i| {
            let w = derive_seed(seed, tag, i as u64);
            let u = ((w >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            normal.inverse_cdf(u)
        })
        .collect()
}

/// `K[i] = 1` iff `(R x)[i] >= 0`.
pub fn project_and_binarize(x: &[f64], seed: u64, key_length: usize) -> Result<BiometricKey> {
    Projection::new(seed, key_length, x.len())?.binarize(x)
}

/// A projection matrix kept around for repeated binarization.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: Vec<f64>,
    dims: usize,
}

impl Projection {
    pub fn new(seed: u64, key_length: usize, dims: usize) -> Result<Self> {
        if dims == 0 || key_length == 0 {
            return Err(Error::invalid("projection needs a non-empty input and key"));
        }
        Ok(Projection {
            matrix: projection_matrix(seed, key_length, dims),
            dims,
        })
    }

    pub fn binarize(&self, x: &[f64]) -> Result<BiometricKey> {
        if x.len() != self.dims {
            return Err(Error::LengthMismatch {
                expected: self.dims,
                actual: x.len(),
            });
        }
        let bits = self
            .matrix
            .chunks_exact(self.dims)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() >= 0.0)
            .collect();
        Ok(BiometricKey { bits })
    }
}
