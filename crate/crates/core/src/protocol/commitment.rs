use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::store::EnrolledCredential;
use crate::bits::Bits;
use crate::ecc::BchCode;
use crate::keygen::BiometricKey;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Reject,
    Accept,
}

impl Decision {
    pub fn accepted(self) -> bool {
        self == Decision::Accept
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commitment {
    /// `Enc(R) xor K`, n bits.
    pub c_bits: Bits,
    /// SHA-256 of R packed LSB-first.
    pub secret_hash: [u8; 32],
}

pub fn secret_hash(secret: &Bits) -> [u8; 32] {
    Sha256::digest(secret.to_bytes()).into()
}

/// Binds `key` to a fresh k-bit secret. Returns the commitment and the
/// secret itself; the secret must not leave the caller.
pub fn commit(key: &BiometricKey, code: &BchCode, rng: &mut impl Rng) -> Result<(Commitment, Bits)> {
    if key.key_length() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: key.key_length(),
        });
    }
    let secret: Bits = (0..code.k()).map(|_| rng.random::<bool>()).collect();
    let codeword = code.encode(&secret)?;
    let c_bits = codeword.bits().xor(&key.bits)?;
    let commitment = Commitment {
        c_bits,
        secret_hash: secret_hash(&secret),
    };
    Ok((commitment, secret))
}

/// Accept iff `C xor key` decodes and the decoded secret hashes to the
/// committed value. Every failure is a rejection.
pub fn verify_with_key(commitment: &Commitment, key: &BiometricKey, code: &BchCode) -> Decision {
    let Ok(word) = commitment.c_bits.xor(&key.bits) else {
        return Decision::Reject;
    };
    match code.decode(&word) {
        Ok(secret) if secret_hash(&secret) == commitment.secret_hash => Decision::Accept,
        _ => Decision::Reject,
    }
}

pub fn verify(commitment: &Commitment, credential: &EnrolledCredential) -> Decision {
    verify_with_key(commitment, &credential.key, credential.ecc.code())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecc::EccName;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_key(rng: &mut impl Rng, n: usize) -> BiometricKey {
        BiometricKey {
            bits: (0..n).map(|_| rng.random::<bool>()).collect(),
        }
    }

    #[test]
    fn zero_key_commitment_is_the_codeword() {
        let code = EccName::Bch127.code();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let key = BiometricKey { bits: Bits::zeros(127) };
        let (c, secret) = commit(&key, code, &mut rng).unwrap();
        assert_eq!(&c.c_bits, code.encode(&secret).unwrap().bits());
    }

    #[test]
    fn commitments_are_fresh_and_unmask_to_codewords() {
        let code = EccName::Bch255.code();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let key = random_key(&mut rng, 255);
        let (a, _) = commit(&key, code, &mut rng).unwrap();
        let (b, _) = commit(&key, code, &mut rng).unwrap();
        assert_ne!(a.c_bits, b.c_bits);
        assert_ne!(a.secret_hash, b.secret_hash);
        assert!(code.is_codeword(&a.c_bits.xor(&key.bits).unwrap()));
    }

    #[test]
    fn hash_is_sha256_of_packed_secret() {
        // SHA-256 of the single byte 0x05 (bits 1,0,1 then zero padding).
        let secret = Bits::from_bools(vec![true, false, true]);
        let expected = "e77b9a9ae9e30b0dbdb6f510a264ef9de781501d7b6b92ae89eb059c5ab743db";
        let hex: String = secret_hash(&secret).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(hex, expected);
    }

    #[test]
    fn boundary_at_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in EccName::ALL {
            let code = name.code();
            let key = random_key(&mut rng, code.n());
            for flips in [0, code.t(), code.t() + 1, 2 * code.t()] {
                let mut auth = key.clone();
                for i in rand::seq::index::sample(&mut rng, code.n(), flips) {
                    auth.bits.flip(i);
                }
                let (c, _) = commit(&auth, code, &mut rng).unwrap();
                let expected = if flips <= code.t() { Decision::Accept } else { Decision::Reject };
                assert_eq!(verify_with_key(&c, &key, code), expected, "{name} at {flips}");
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let code = EccName::Bch255.code();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let key = random_key(&mut rng, 127);
        assert!(commit(&key, code, &mut rng).is_err());
        let (c, _) = commit(&random_key(&mut rng, 255), code, &mut rng).unwrap();
        assert_eq!(verify_with_key(&c, &key, code), Decision::Reject);
    }
}
