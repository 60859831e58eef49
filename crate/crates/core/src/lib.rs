//! Whole-body centre of mass and ground reaction forces from marker kinematics.

pub mod anthro;
pub mod config;
pub mod error;
pub mod events;
pub mod grf;
pub mod ingest;
pub mod kinematics;
pub mod metrics;
pub mod pipeline;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
