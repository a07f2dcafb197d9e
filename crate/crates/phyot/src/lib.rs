//! Physics-informed object tracking: a Kalman filter whose state is
//! driven by accelerations estimated from dense optical flow, fused
//! with per-frame position fixes from pluggable sensors (template
//! matching or an external observation stream).
//!
//! The crate is generic over the scalar type via [`scalar::Scalar`]
//! (implemented for `f32` and `f64`); the aliases at the crate root
//! pin the common concrete choices.

pub mod analysis;
pub mod error;
pub mod eval;
pub mod flow;
pub mod image;
pub mod io;
pub mod kalman;
pub mod linalg;
pub mod scalar;
pub mod sim;
pub mod tracker;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision filter state, the default for tracking.
pub type StateVector64 = kalman::StateVector<f64>;
pub type Covariance64 = kalman::Covariance4<f64>;
pub type MotionModel64 = kalman::MotionModel<f64>;
pub type FlowField64 = flow::FlowField<f64>;
pub type GrayImage64 = image::GrayImage<f64>;
pub type BoundingBox64 = tracker::BoundingBox<f64>;
pub type TrackerConfig64 = tracker::TrackerConfig<f64>;
pub type Trajectory64 = tracker::Trajectory<f64>;
pub type ScenarioSpec64 = sim::ScenarioSpec<f64>;

/// Single-precision variants for memory-bound flow fields and frames.
pub type StateVector32 = kalman::StateVector<f32>;
pub type Covariance32 = kalman::Covariance4<f32>;
pub type MotionModel32 = kalman::MotionModel<f32>;
pub type FlowField32 = flow::FlowField<f32>;
pub type GrayImage32 = image::GrayImage<f32>;
pub type BoundingBox32 = tracker::BoundingBox<f32>;
pub type TrackerConfig32 = tracker::TrackerConfig<f32>;
pub type Trajectory32 = tracker::Trajectory<f32>;
pub type ScenarioSpec32 = sim::ScenarioSpec<f32>;
