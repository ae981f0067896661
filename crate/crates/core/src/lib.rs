//! Second-order supersymmetric (Darboux) transformations of one-dimensional
//! Schrodinger operators on a finite interval with Dirichlet conditions.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod darboux;
pub mod error;
pub mod grid;
pub mod jordan;
pub mod numerics;
pub mod ode;
pub mod potential;
pub mod scenario;
pub mod spectrum;
pub mod wave;

pub use error::{Error, Result};
pub use grid::Interval;
pub use potential::{Endpoint, Potential};
pub use wave::WaveSolution;

pub use num_complex::Complex64;
