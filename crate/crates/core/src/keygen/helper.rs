use super::project::Projection;
use crate::bits::Bits;
use crate::{Error, Result};

pub const HELPER_MAGIC: &[u8; 4] = b"EIDH";
pub const HELPER_VERSION: u8 = 1;
/// Supported key lengths, one per ECC.
pub const KEY_LENGTHS: [usize; 3] = [127, 255, 511];

/// Public per-user parameters that let the earbud re-derive the key.
///
/// Binary layout (little-endian): magic `EIDH`, version u8, L u16, d u16,
/// mask as `ceil(d/8)` bytes LSB-first, projection seed u64, `d'` pairs of
/// (mean f32, std f32) for the retained dimensions in ascending order,
/// 8-byte feature config hash.
#[derive(Debug, Clone, PartialEq)]
pub struct HelperData {
    pub key_length: usize,
    /// One bit per feature dimension; 1 = retained.
    pub mask: Bits,
    pub projection_seed: u64,
    /// (mean, std) of each retained dimension.
    pub stats: Vec<(f32, f32)>,
    pub config_hash: [u8; 8],
}

impl HelperData {
    pub fn validate(&self) -> Result<()> {
        if !KEY_LENGTHS.contains(&self.key_length) {
            return Err(Error::invalid(format!("key length {}", self.key_length)));
        }
        let kept = self.mask.count_ones();
        if kept == 0 {
            return Err(Error::invalid("mask retains no dimension"));
        }
        if self.mask.len() > u16::MAX as usize {
            return Err(Error::invalid("too many feature dimensions"));
        }
        if self.stats.len() != kept {
            return Err(Error::LengthMismatch {
                expected: kept,
                actual: self.stats.len(),
            });
        }
        if self.stats.iter().any(|&(m, s)| !m.is_finite() || !(s > 0.0) || !s.is_finite()) {
            return Err(Error::invalid("helper statistics must be finite with positive std"));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.mask.len()
    }

    /// Masked, standardized feature: `(c_i - mean_i) / std_i` over the
    /// retained dimensions in ascending order.
    pub fn standardize(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.mask.len() {
            return Err(Error::LengthMismatch {
                expected: self.mask.len(),
                actual: c.len(),
            });
        }
        Ok(c.iter()
            .zip(self.mask.iter())
            .filter(|(_, keep)| *keep)
            .zip(&self.stats)
            .map(|((v, _), &(m, s))| (v - m as f64) / s as f64)
            .collect())
    }

    /// The projection this helper's keys are binarized with.
    pub fn projection(&self) -> Result<Projection> {
        Projection::new(self.projection_seed, self.key_length, self.stats.len())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut out = Vec::with_capacity(4 + 1 + 4 + self.mask.len().div_ceil(8) + 8 + self.stats.len() * 8 + 8);
        out.extend_from_slice(HELPER_MAGIC);
        out.push(HELPER_VERSION);
        out.extend((self.key_length as u16).to_le_bytes());
        out.extend((self.mask.len() as u16).to_le_bytes());
        out.extend(self.mask.to_bytes());
        out.extend(self.projection_seed.to_le_bytes());
        for &(m, s) in &self.stats {
            out.extend(m.to_le_bytes());
            out.extend(s.to_le_bytes());
        }
        out.extend(self.config_hash);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != HELPER_MAGIC {
            return Err(Error::Malformed("bad helper data magic".into()));
        }
        let version = r.take(1)?[0];
        if version != HELPER_VERSION {
            return Err(Error::Malformed(format!("unsupported helper data version {version}")));
        }
        let key_length = r.u16()? as usize;
        let d = r.u16()? as usize;
        let mask = Bits::from_bytes(r.take(d.div_ceil(8))?, d)?;
        let projection_seed = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        let stats = (0..mask.count_ones())
            .map(|_| Ok((r.f32()?, r.f32()?)))
            .collect::<Result<Vec<_>>>()?;
        let config_hash = r.take(8)?.try_into().expect("8 bytes");
        if r.pos != bytes.len() {
            return Err(Error::Malformed(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let helper = HelperData {
            key_length,
            mask,
            projection_seed,
            stats,
            config_hash,
        };
        helper.validate()?;
        Ok(helper)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Malformed("helper data truncated".into()))?;
        self.pos = end;
        Ok(slice)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> HelperData {
        let mask: Bits = (0..10).map(|i| i % 3 == 0).collect();
        HelperData {
            key_length: 255,
            stats: (0..mask.count_ones()).map(|i| (i as f32 - 1.5, 0.5 + i as f32)).collect(),
            mask,
            projection_seed: 0x0102_0304_0506_0708,
            config_hash: *b"abcdefgh",
        }
    }

    #[test]
    fn layout_is_pinned() {
        let bytes = sample().to_bytes().unwrap();
        // magic, version, L=255, d=10, mask 0b1001001001 over two bytes.
        assert_eq!(&bytes[..11], b"EIDH\x01\xff\x00\x0a\x00\x49\x02");
        assert_eq!(&bytes[11..19], &[8, 7, 6, 5, 4, 3, 2, 1]);
        assert_eq!(&bytes[19..23], &(-1.5f32).to_le_bytes());
        assert_eq!(bytes.len(), 11 + 8 + 4 * 8 + 8);
        assert_eq!(&bytes[bytes.len() - 8..], b"abcdefgh");
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let bytes = sample().to_bytes().unwrap();
        assert!(HelperData::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(HelperData::from_bytes(&extra).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(HelperData::from_bytes(&magic).is_err());
        let mut version = bytes.clone();
        version[4] = 9;
        assert!(HelperData::from_bytes(&version).is_err());
        let mut length = bytes;
        length[5] = 100;
        assert!(HelperData::from_bytes(&length).is_err());
        let empty = HelperData {
            mask: Bits::zeros(10),
            stats: vec![],
            ..sample()
        };
        assert!(empty.to_bytes().is_err());
    }

    #[test]
    fn standardize_retained_dimensions() {
        let h = sample();
        let c: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let x = h.standardize(&c).unwrap();
        let expected: Vec<f64> = [0usize, 3, 6, 9]
            .iter()
            .zip(&h.stats)
            .map(|(&i, &(m, s))| (i as f64 - m as f64) / s as f64)
            .collect();
        assert_eq!(x, expected);
        assert!(h.standardize(&c[..9]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(
            mask in prop::collection::vec(any::<bool>(), 1..300),
            seed in any::<u64>(),
            l in prop::sample::select(KEY_LENGTHS.to_vec()),
            hash in any::<[u8; 8]>(),
        ) {
            let mut mask = mask;
            mask[0] = true;
            let mask = Bits::from_bools(mask);
            let stats = (0..mask.count_ones()).map(|i| (i as f32 * 0.25 - 3.0, 1.0 + i as f32)).collect();
            let h = HelperData { key_length: l, mask, projection_seed: seed, stats, config_hash: hash };
            prop_assert_eq!(HelperData::from_bytes(&h.to_bytes().unwrap()).unwrap(), h);
        }
    }
}
