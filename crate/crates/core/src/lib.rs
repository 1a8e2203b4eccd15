//! Arc-length trajectory toolkit: spatial sampling of recorded demonstrations,
//! DTW-family alignment, barycenters, and synchrony metrics.

// `!(x > 0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barycenter;
pub mod dataset;
pub mod dtw;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod sampling;
pub mod scalar;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use trajectory::{ArcLengthPath, DemonstrationSet, Points, Trajectory};

pub type Points64 = Points<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type ArcLengthPath64 = ArcLengthPath<f64>;
pub type DemonstrationSet64 = DemonstrationSet<f64>;
pub type Points32 = Points<f32>;
pub type Trajectory32 = Trajectory<f32>;
pub type ArcLengthPath32 = ArcLengthPath<f32>;
pub type DemonstrationSet32 = DemonstrationSet<f32>;
