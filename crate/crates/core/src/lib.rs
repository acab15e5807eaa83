pub mod biphoton;
pub mod error;
pub mod estimator;
pub mod hom;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
