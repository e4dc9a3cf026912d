//! Fuzzy commitment over BCH codes and the earbud/verifier message flows.
//!
//! Enrollment runs over a trusted channel: the earbud sends cepstral
//! features, the verifier enrolls the user, stores the key and returns the
//! helper data. Authentication sends only a commitment
//! `C = Enc(R) xor K_auth` and `SHA-256(R)`; the verifier decodes
//! `C xor K_enroll` and compares hashes.
//!
//! There is no verifier challenge, so a captured AUTH_COMMIT message can be
//! replayed.

mod commitment;
mod session;
mod store;
mod wire;

pub use commitment::{commit, secret_hash, verify, verify_with_key, Commitment, Decision};
pub use session::{
    earbud_session, enrollment_messages, enrollment_session, verifier_session, AuthOutcome,
    CredentialLookup, EnrollmentRequest,
};
pub use store::{CredentialMetadata, CredentialStore, EnrolledCredential};
pub use wire::{decode_stream, Message, MessageType, WIRE_MAGIC};
