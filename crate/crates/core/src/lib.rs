pub mod error;
pub mod extrapolation;
pub mod quadrature;
pub mod response_lab;
pub mod special_functions;
pub mod spectral_models;
pub mod temporal_kernels;
pub mod transform_engine;

pub use error::{Error, Result};
