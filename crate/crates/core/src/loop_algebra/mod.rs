//! Truncated matrix Laurent loops, their sampling, algebra and reality involutions.

mod annulus;
mod json;
mod laurent;
mod reality;

pub use annulus::Annulus;
pub use json::LoopJson;
pub use laurent::LaurentLoop;
pub use reality::{DoubleLoop, HmrcLevel, HMRC_TOL};
