pub mod cli;
pub mod covariance;
pub mod entropy1d;
pub mod error;
pub mod field_sim;
pub mod measure;
pub mod quadrature;
pub mod kernel;
pub mod special_fn;
pub mod spectrum;

pub use error::{Error, Result};
