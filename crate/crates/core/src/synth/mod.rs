//! Excitation signals, synthetic ear canals, simulated scans and channel
//! estimation.

mod channel;
mod dataset;
mod excitation;
mod scan;
mod subject;

pub use channel::{estimate_channel, ChannelEstimate, DEFAULT_IR_WINDOW};
pub use dataset::{
    gen_population, modal_feature, render_feature_response, AttackKind, Dataset, DatasetConfig,
    DATASET_FORMAT, DEFAULT_WEAR_JITTER, MANIFEST_FILE, MODE_BINS,
    Manifest, ScanEntry, ScanRecord,
};
pub use excitation::{gen_excitation, Excitation, ExcitationKind, ExcitationSpec};
pub use scan::{simulate_response_scan, simulate_scan, EcsScan, NoiseCondition, ScanConditions};
pub use subject::{synth_false_trigger, synth_silicon, synth_subject, DeviceColoration, Path, ProfileKind, SubjectProfile, MAX_TOF};
