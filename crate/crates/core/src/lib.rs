//! Rediscovering planetary laws from a small observation catalog.
//!
//! A neural regressor smooths and densifies the observations, a
//! simulated-annealing symbolic regression turns the smoothed data into
//! candidate formulas, and an interpreter reads orbital parameters and power
//! laws off the selected formulas. [`oracle`] provides exact two-body
//! kinematics for testing every stage.

pub mod augment;
pub mod ephemeris;
pub mod error;
pub mod expr;
pub mod interpret;
pub mod neural;
pub mod oracle;
pub mod pipeline;
pub mod search;

pub use error::{Error, Result};
