//! Biometric key generation: per-dimension Rényi information against
//! population statistics, Otsu feature masking, standardization and
//! seeded random-projection binarization.
//!
//! Enrollment (mobile side) needs the population; key extraction (earbud
//! side) needs only the [`HelperData`] produced at enrollment.

mod enroll;
mod helper;
mod info;
mod otsu;
mod project;

pub use enroll::{
    enroll, enroll_from_features, extract_key, extract_key_from_feature, Enrollment, KeygenParams,
    PopulationStats, HIST_BINS, HIST_SPAN, STD_FLOOR,
};
pub use helper::{HelperData, HELPER_MAGIC, HELPER_VERSION, KEY_LENGTHS};
pub use info::{biometric_information, estimate_distribution, smooth, BinEdges, SMOOTHING};
pub use otsu::{otsu_mask, otsu_threshold, OtsuThreshold, OTSU_LEVELS};
pub use project::{project_and_binarize, projection_matrix, BiometricKey, Projection};
