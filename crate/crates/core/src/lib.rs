pub mod dbm;
pub mod ensembles;
pub mod error;
pub mod experiment;
pub mod momentflow;
pub mod overlaps;
pub mod pool;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
