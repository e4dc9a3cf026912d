use std::collections::HashMap;

use rand::Rng;

use super::commitment::{commit, verify, Decision};
use super::store::{CredentialMetadata, CredentialStore, EnrolledCredential};
use super::wire::{decode_stream, Message};
use crate::ecc::EccName;
use crate::features::{extract_features, FeatureConfig};
use crate::keygen::{enroll_from_features, extract_key, HelperData, KeygenParams, PopulationStats};
use crate::{Error, Result};

/// Where the verifier looks up enrolled users.
pub trait CredentialLookup {
    fn credential(&self, user_id: &str) -> Result<Option<EnrolledCredential>>;
}

impl CredentialLookup for CredentialStore {
    fn credential(&self, user_id: &str) -> Result<Option<EnrolledCredential>> {
        self.get(user_id)
    }
}

impl CredentialLookup for HashMap<String, EnrolledCredential> {
    fn credential(&self, user_id: &str) -> Result<Option<EnrolledCredential>> {
        Ok(self.get(user_id).cloned())
    }
}

/// Earbud side of enrollment: the feature of all scans together, followed
/// by one feature per scan.
pub fn enrollment_messages<R: AsRef<[f32]>>(
    user_id: &str,
    scans: &[R],
    config: &FeatureConfig,
) -> Result<Vec<Message>> {
    if scans.len() < 2 {
        return Err(Error::invalid(format!("enrollment needs at least 2 scans, got {}", scans.len())));
    }
    let to_message = |coefficients: Vec<f64>| Message::EnrollFeatures {
        user_id: user_id.to_string(),
        features: coefficients.into_iter().map(|v| v as f32).collect(),
    };
    let mut out = vec![to_message(extract_features(scans, config)?.coefficients)];
    for scan in scans {
        out.push(to_message(extract_features(&[scan.as_ref()], config)?.coefficients));
    }
    Ok(out)
}

/// Verifier-side enrollment parameters.
#[derive(Debug, Clone)]
pub struct EnrollmentRequest<'a> {
    pub population: &'a PopulationStats,
    pub ecc: EccName,
    pub alpha: f64,
    pub projection_seed: u64,
    pub config_hash: [u8; 8],
    /// Enrollment sends raw features and is only allowed over a channel the
    /// caller vouches for.
    pub trusted_channel: bool,
    pub created_unix: Option<u64>,
}

/// Verifier side of enrollment: parses the feature stream, enrolls the user,
/// stores the credential and returns it with the HELPER_DATA reply.
pub fn enrollment_session(
    stream: &[u8],
    request: &EnrollmentRequest,
    store: &CredentialStore,
) -> Result<(EnrolledCredential, Message)> {
    if !request.trusted_channel {
        return Err(Error::invalid("enrollment requires a trusted channel"));
    }
    let mut user = None;
    let mut features = Vec::new();
    for msg in decode_stream(stream)? {
        let Message::EnrollFeatures { user_id, features: f } = msg else {
            return Err(Error::Malformed("expected ENROLL_FEATURES messages".into()));
        };
        if user.get_or_insert_with(|| user_id.clone()) != &user_id {
            return Err(Error::Malformed("enrollment stream mixes users".into()));
        }
        features.push(f.into_iter().map(f64::from).collect::<Vec<f64>>());
    }
    let user_id = user.ok_or_else(|| Error::invalid("empty enrollment stream"))?;
    let Some((aggregate, per_scan)) = features.split_first() else {
        unreachable!("a user implies at least one message");
    };
    let params = KeygenParams {
        key_length: request.ecc.code().n(),
        alpha: request.alpha,
        projection_seed: request.projection_seed,
    };
    let enrollment = enroll_from_features(per_scan, aggregate, request.population, &params, request.config_hash)?;
    let credential = EnrolledCredential {
        user_id,
        key: enrollment.key,
        ecc: request.ecc,
        metadata: CredentialMetadata {
            enroll_scans: per_scan.len(),
            config_hash: request.config_hash.iter().map(|b| format!("{b:02x}")).collect(),
            created_unix: request.created_unix,
        },
    };
    store.put(&credential)?;
    Ok((credential, Message::HelperData(enrollment.helper)))
}

/// Earbud side of authentication: extract the key, commit to a fresh
/// secret and package the AUTH_COMMIT message.
pub fn earbud_session<R: AsRef<[f32]>>(
    user_id: &str,
    scans: &[R],
    helper: &HelperData,
    config: &FeatureConfig,
    ecc: EccName,
    rng: &mut impl Rng,
) -> Result<Message> {
    let code = ecc.code();
    if helper.key_length != code.n() {
        return Err(Error::invalid(format!(
            "helper data is for {}-bit keys, {ecc} needs {}",
            helper.key_length,
            code.n()
        )));
    }
    let key = extract_key(scans, helper, config)?;
    let (commitment, _secret) = commit(&key, code, rng)?;
    Ok(Message::AuthCommit {
        user_id: user_id.to_string(),
        ecc,
        commitment,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthOutcome {
    pub decision: Decision,
    /// Why a request was rejected without reaching verification.
    pub diagnostic: Option<String>,
}

impl AuthOutcome {
    fn reject(why: impl Into<String>) -> Self {
        AuthOutcome {
            decision: Decision::Reject,
            diagnostic: Some(why.into()),
        }
    }

    /// The AUTH_RESULT reply: one bit, nothing about the distance.
    pub fn response(&self) -> Message {
        Message::AuthResult(self.decision)
    }
}

/// Verifier side of authentication. Every failure is a rejection.
pub fn verifier_session(message: &[u8], credentials: &impl CredentialLookup) -> AuthOutcome {
    let (user_id, ecc, commitment) = match Message::decode(message) {
        Ok(Message::AuthCommit {
            user_id,
            ecc,
            commitment,
        }) => (user_id, ecc, commitment),
        Ok(other) => return AuthOutcome::reject(format!("unexpected {:?} message", other.message_type())),
        Err(e) => return AuthOutcome::reject(format!("malformed message: {e}")),
    };
    let credential = match credentials.credential(&user_id) {
        Ok(Some(c)) => c,
        Ok(None) => return AuthOutcome::reject(format!("unknown user {user_id:?}")),
        Err(e) => return AuthOutcome::reject(format!("credential lookup failed: {e}")),
    };
    if credential.ecc != ecc {
        return AuthOutcome::reject(format!("user enrolled with {}, commitment uses {ecc}", credential.ecc));
    }
    AuthOutcome {
        decision: verify(&commitment, &credential),
        diagnostic: None,
    }
}
