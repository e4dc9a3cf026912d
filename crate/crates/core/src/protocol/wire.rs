//! Binary message codec. All integers are little-endian.
//!
//! Header: magic `EID1`, type u8, payload length u32.
//!
//! | type | name            | payload                                              |
//! |------|-----------------|------------------------------------------------------|
//! | 1    | ENROLL_FEATURES | id_len u8, UTF-8 id, d u16, d x f32                  |
//! | 2    | HELPER_DATA     | helper data serialization                            |
//! | 3    | AUTH_COMMIT     | id_len u8, UTF-8 id, name_len u8, ECC name, C, hash  |
//! | 4    | AUTH_RESULT     | u8, 0 = reject, 1 = accept                           |
//!
//! In AUTH_COMMIT, C takes `ceil(n/8)` bytes (LSB-first) for the named
//! code's length `n` and the hash 32 bytes.

use super::commitment::{Commitment, Decision};
use crate::bits::Bits;
use crate::ecc::EccName;
use crate::keygen::HelperData;
use crate::{Error, Result};

pub const WIRE_MAGIC: &[u8; 4] = b"EID1";
const HEADER_LEN: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageType {
    EnrollFeatures = 1,
    HelperData = 2,
    AuthCommit = 3,
    AuthResult = 4,
}

impl MessageType {
    fn from_u8(tag: u8) -> Result<Self> {
        Ok(match tag {
            1 => MessageType::EnrollFeatures,
            2 => MessageType::HelperData,
            3 => MessageType::AuthCommit,
            4 => MessageType::AuthResult,
            other => return Err(Error::Malformed(format!("unknown message type {other}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    EnrollFeatures { user_id: String, features: Vec<f32> },
    HelperData(HelperData),
    AuthCommit { user_id: String, ecc: EccName, commitment: Commitment },
    AuthResult(Decision),
}

impl Message {
    pub fn message_type(&self) -> MessageType {
        match self {
            Message::EnrollFeatures { .. } => MessageType::EnrollFeatures,
            Message::HelperData(_) => MessageType::HelperData,
            Message::AuthCommit { .. } => MessageType::AuthCommit,
            Message::AuthResult(_) => MessageType::AuthResult,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut payload = Vec::new();
        match self {
            Message::EnrollFeatures { user_id, features } => {
                put_id(&mut payload, user_id)?;
                let d = u16::try_from(features.len())
                    .map_err(|_| Error::invalid(format!("{} features exceed u16", features.len())))?;
                payload.extend(d.to_le_bytes());
                for f in features {
                    payload.extend(f.to_le_bytes());
                }
            }
            Message::HelperData(helper) => payload = helper.to_bytes()?,
            Message::AuthCommit {
                user_id,
                ecc,
                commitment,
            } => {
                if commitment.c_bits.len() != ecc.code().n() {
                    return Err(Error::LengthMismatch {
                        expected: ecc.code().n(),
                        actual: commitment.c_bits.len(),
                    });
                }
                put_id(&mut payload, user_id)?;
                put_id(&mut payload, ecc.as_str())?;
                payload.extend(commitment.c_bits.to_bytes());
                payload.extend(commitment.secret_hash);
            }
            Message::AuthResult(d) => payload.push(d.accepted() as u8),
        }
        let len = u32::try_from(payload.len()).map_err(|_| Error::invalid("payload exceeds u32"))?;
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(WIRE_MAGIC);
        out.push(self.message_type() as u8);
        out.extend(len.to_le_bytes());
        out.extend(payload);
        Ok(out)
    }

    /// Decodes exactly one message; trailing bytes are an error.
    pub fn decode(bytes: &[u8]) -> Result<Message> {
        let (msg, used) = Message::decode_prefix(bytes)?;
        if used != bytes.len() {
            return Err(Error::Malformed(format!("{} trailing bytes", bytes.len() - used)));
        }
        Ok(msg)
    }

    /// Decodes the first message of `bytes`, returning it with the number of
    /// bytes consumed.
    pub fn decode_prefix(bytes: &[u8]) -> Result<(Message, usize)> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Malformed("message shorter than header".into()));
        }
        if &bytes[..4] != WIRE_MAGIC {
            return Err(Error::Malformed("bad message magic".into()));
        }
        let kind = MessageType::from_u8(bytes[4])?;
        let len = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
        let payload = bytes
            .get(HEADER_LEN..HEADER_LEN + len)
            .ok_or_else(|| Error::Malformed("payload truncated".into()))?;
        let mut r = Reader { bytes: payload, pos: 0 };
        let msg = match kind {
            MessageType::EnrollFeatures => {
                let user_id = r.id()?;
                let d = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes")) as usize;
                let features = r
                    .take(4 * d)?
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect();
                Message::EnrollFeatures { user_id, features }
            }
            MessageType::HelperData => Message::HelperData(HelperData::from_bytes(r.take(len)?)?),
            MessageType::AuthCommit => {
                let user_id = r.id()?;
                let ecc: EccName = r.id()?.parse()?;
                let n = ecc.code().n();
                let c_bits = Bits::from_bytes(r.take(n.div_ceil(8))?, n)?;
                let secret_hash = r.take(32)?.try_into().expect("32 bytes");
                Message::AuthCommit {
                    user_id,
                    ecc,
                    commitment: Commitment { c_bits, secret_hash },
                }
            }
            MessageType::AuthResult => match r.take(1)?[0] {
                0 => Message::AuthResult(Decision::Reject),
                1 => Message::AuthResult(Decision::Accept),
                v => return Err(Error::Malformed(format!("auth result {v}"))),
            },
        };
        if r.pos != len {
            return Err(Error::Malformed(format!("{} unread payload bytes", len - r.pos)));
        }
        Ok((msg, HEADER_LEN + len))
    }
}

/// Decodes a concatenation of messages.
pub fn decode_stream(mut bytes: &[u8]) -> Result<Vec<Message>> {
    let mut out = Vec::new();
    while !bytes.is_empty() {
        let (msg, used) = Message::decode_prefix(bytes)?;
        out.push(msg);
        bytes = &bytes[used..];
    }
    Ok(out)
}

fn put_id(out: &mut Vec<u8>, id: &str) -> Result<()> {
    let len = u8::try_from(id.len())
        .ok()
        .filter(|&l| l > 0)
        .ok_or_else(|| Error::invalid(format!("identifier must be 1..=255 bytes, got {}", id.len())))?;
    out.push(len);
    out.extend_from_slice(id.as_bytes());
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let slice = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::Malformed("payload truncated".into()))?;
        self.pos += n;
        Ok(slice)
    }

    fn id(&mut self) -> Result<String> {
        let len = self.take(1)?[0] as usize;
        if len == 0 {
            return Err(Error::Malformed("empty identifier".into()));
        }
        String::from_utf8(self.take(len)?.to_vec()).map_err(|_| Error::Malformed("identifier is not UTF-8".into()))
    }
}
