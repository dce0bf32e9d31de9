pub mod cli;
pub mod distributions;
pub mod empirics;
pub mod error;
pub mod extremes;
pub mod files;
pub mod fitting;
pub mod geometry;
pub mod rng_ppp;
pub mod special;

pub use error::{Error, Result};
