//! Projections and factorizations for the finite-dimensional Iwasawa triple, the
//! standard circle triple and the two-circle harmonic-map triple.

mod birkhoff;
mod iwasawa;
mod projections;

pub use birkhoff::{
    birkhoff_harmonic, birkhoff_harmonic_samples, birkhoff_standard, dressing, FactorDiagnostics,
    FactorPair,
};
pub use iwasawa::iwasawa_gram_schmidt;
pub use projections::{harmonic_mode_split, pi_split_harmonic, pi_split_standard, SPLIT_HMRC_TOL};
