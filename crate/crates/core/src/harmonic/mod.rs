//! Harmonic maps into SU(n) on grids and their extended solutions.

pub mod connection;
pub mod extended;
pub mod fields;
pub mod grid;
pub mod rational;
pub mod uniton;

pub use connection::{extended_from_connection, extended_from_connection_along, frame_at_lambda, IntegratedFrame, PathOrder};
pub use extended::{
    extended_residuals, lambda_constancy, probe_constancy, restrict_harmonic, uniton_extended, uniton_solution,
    ExtendedResiduals, ExtendedSolution,
};
pub use fields::{harmonic_residual, maurer_cartan, zero_curvature_residual, MaurerCartanPair};
pub use grid::{GridDomain, HarmonicMapGrid, MapDefects, NodeMatrices, NodeScalars};
pub use rational::{Poly, RationalFn};
pub use uniton::{FrameField, Uniton, UnitonVariant, UNITON_ORDER};
