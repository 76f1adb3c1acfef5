//! Dataset augmentation and evaluation toolkit for multiclass wildfire
//! segmentation.
//!
//! The crate covers the full data side of a four-class (background, ash,
//! vegetation, fire) segmentation workflow:
//!
//! - [`dehaze`]: dark-channel-prior smoke removal with guided-filter
//!   refinement,
//! - [`augment`]: rotation, brightness, contrast, standard copy-paste, and
//!   centralized copy-paste (eroded fire cores) dataset generation,
//! - [`morph`]: the binary-mask machinery behind copy-paste,
//! - [`eval`] / [`score`]: IoU/FNR metrics and the rank-order-centroid
//!   weighted score used to rank methods and tuning runs,
//! - [`pipeline`]: config-driven orchestration with deterministic seeding
//!   and manifest/report output.
//!
//! Floating-point kernels are generic over [`num::Real`] (f32 or f64); the
//! aliases below pin the f64 defaults.

pub mod augment;
pub mod color;
pub mod dataset;
pub mod dehaze;
pub mod error;
pub mod eval;
pub mod morph;
pub mod num;
pub mod pipeline;
pub mod pngio;
pub mod raster;
pub mod score;
mod util;

pub use error::{Error, Result};
pub use util::stable_hash64;

/// Default scalar for the floating-point pipelines.
pub type Scalar = f64;

pub type DehazeParams = dehaze::DehazeParams<Scalar>;
pub type TransmissionMap = dehaze::TransmissionMap<Scalar>;
pub type GrayField = dehaze::GrayField<Scalar>;
