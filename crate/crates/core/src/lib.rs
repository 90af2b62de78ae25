//! Spectral laboratory for the stationary quasi-geostrophic fixed-point problem
//! `theta = L f + B[theta, theta]` on a large periodic box.

pub mod bilinear;
pub mod error;
pub mod experiment;
pub mod illposed;
pub mod lpbesov;
pub mod random;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
