//! Numerical laboratory for prescribing scalar curvature on round spheres.

pub mod bubbles;
pub mod cli;
pub mod error;
pub mod fowler;
pub mod identities;
pub mod kmfactory;
pub mod morse;
pub mod solver;
pub mod sphere;

pub use error::{Error, Result};
