//! Numerical loop-group toolkit: truncated Laurent loops, Birkhoff factorization,
//! extended solutions of SU(n) harmonic maps and the half-Virasoro action on them.

pub mod config;
pub mod error;
pub mod factorization;
pub mod harmonic;
pub mod io;
pub mod linalg;
pub mod loop_algebra;
pub mod random;
pub mod report;
pub mod spectral;
pub mod virasoro;

pub use config::{AnnulusConfig, GridParams, RunConfig, Tolerances};
pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use loop_algebra::{Annulus, DoubleLoop, HmrcLevel, LaurentLoop};
