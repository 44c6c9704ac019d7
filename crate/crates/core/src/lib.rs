//! Shot-noise heating, gas damping, measurement noise and feedback cooling
//! of a dielectric nanosphere in a focused Gaussian beam.
//!
//! [`pipeline::evaluate`] runs the whole closed-form chain on a
//! [`scenario::Scenario`]; [`oracle`] holds Monte-Carlo cross-checks.

pub mod constants;
pub mod detection;
pub mod error;
pub mod feedback;
pub mod fixtures;
pub mod master;
pub mod optics;
pub mod oracle;
pub mod pipeline;
pub mod rates;
pub mod regression;
pub mod report;
pub mod scaling;
pub mod scenario;
pub mod sweep;
pub mod thermal;
pub mod units;

pub use error::{Error, ErrorClass, Result};
pub use pipeline::{evaluate, Evaluation, Inputs};
pub use scenario::Scenario;
