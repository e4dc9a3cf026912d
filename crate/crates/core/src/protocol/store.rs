use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::ecc::EccName;
use crate::keygen::BiometricKey;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialMetadata {
    pub enroll_scans: usize,
    /// Hex of the feature config hash the key was derived under.
    pub config_hash: String,
    pub created_unix: Option<u64>,
}

/// What the verifier keeps per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrolledCredential {
    pub user_id: String,
    pub key: BiometricKey,
    pub ecc: EccName,
    pub metadata: CredentialMetadata,
}

impl EnrolledCredential {
    pub fn validate(&self) -> Result<()> {
        let n = self.ecc.code().n();
        if self.key.key_length() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: self.key.key_length(),
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct StoredCredential {
    user_id: String,
    ecc: EccName,
    /// Key bits as a string of '0' and '1'.
    key: String,
    metadata: CredentialMetadata,
}

/// One JSON file per user under a directory. Writes go to a temporary file
/// that is renamed over the old credential, so readers see either the old or
/// the new credential and concurrent writers resolve last-writer-wins.
#[derive(Debug, Clone)]
pub struct CredentialStore {
    dir: PathBuf,
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl CredentialStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(CredentialStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, user_id: &str) -> PathBuf {
        let hex: String = user_id.bytes().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("{hex}.json"))
    }

    pub fn put(&self, credential: &EnrolledCredential) -> Result<()> {
        credential.validate()?;
        let stored = StoredCredential {
            user_id: credential.user_id.clone(),
            ecc: credential.ecc,
            key: credential.key.bits.iter().map(|b| if b { '1' } else { '0' }).collect(),
            metadata: credential.metadata.clone(),
        };
        let text = serde_json::to_string_pretty(&stored)?;
        let target = self.path_for(&credential.user_id);
        let temp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            target.file_stem().and_then(|s| s.to_str()).unwrap_or("cred"),
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&temp, text).map_err(|e| Error::io(&temp, e))?;
        fs::rename(&temp, &target).map_err(|e| Error::io(&target, e))
    }

    pub fn get(&self, user_id: &str) -> Result<Option<EnrolledCredential>> {
        let path = self.path_for(user_id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let stored: StoredCredential = serde_json::from_str(&text)?;
        if stored.user_id != user_id {
            return Err(Error::Malformed(format!("{} holds another user's credential", path.display())));
        }
        let bits = stored
            .key
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Malformed(format!("key character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let credential = EnrolledCredential {
            user_id: stored.user_id,
            key: BiometricKey {
                bits: Bits::from_bools(bits),
            },
            ecc: stored.ecc,
            metadata: stored.metadata,
        };
        credential.validate()?;
        Ok(Some(credential))
    }
}
