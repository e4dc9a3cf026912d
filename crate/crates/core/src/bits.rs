//! Fixed-length bit strings.
//!
//! Bit `i` of a [`Bits`] is stored as `bool` at index `i`. When packed into
//! bytes the order is LSB-first: bit `i` lands in byte `i / 8` at position
//! `i % 8`, and unused high bits of the last byte are zero.

use std::fmt;
use std::ops::{BitXor, Index};

use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits(vec![false; len])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Hamming distance. Fails if the lengths differ.
    pub fn hamming(&self, other: &Bits) -> Result<usize> {
        self.check_len(other)?;
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count())
    }

    pub fn xor(&self, other: &Bits) -> Result<Bits> {
        self.check_len(other)?;
        Ok(Bits(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }

    /// Packs LSB-first into `ceil(len / 8)` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.0.len().div_ceil(8)];
        for (i, &b) in self.0.iter().enumerate() {
            if b {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    /// Unpacks `len` bits from LSB-first bytes. Padding bits must be zero.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Bits> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::LengthMismatch {
                expected: len.div_ceil(8),
                actual: bytes.len(),
            });
        }
        let bits: Vec<bool> = (0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
        let repacked = Bits(bits);
        if repacked.to_bytes() != bytes {
            return Err(Error::Malformed("nonzero padding bits".into()));
        }
        Ok(repacked)
    }

    fn check_len(&self, other: &Bits) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for Bits {
    type Output = bool;

    fn index(&self, i: usize) -> &bool {
        &self.0[i]
    }
}

impl BitXor for &Bits {
    type Output = Bits;

    /// Panics on length mismatch; use [`Bits::xor`] for a fallible version.
    fn bitxor(self, rhs: &Bits) -> Bits {
        self.xor(rhs).expect("xor of bit strings with different lengths")
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Bits(iter.into_iter().collect())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits[{}](", self.len())?;
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}
