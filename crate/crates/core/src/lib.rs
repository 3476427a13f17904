pub mod analytic;
pub mod error;
pub mod experiments;
pub mod feasibility;
pub mod montecarlo;
pub mod propagation;
pub mod rng;
pub mod spatial;

pub use error::{Error, Result};
