//! Fixtures shared by the criterion benchmarks.

use loopviro::harmonic::{RationalFn, Uniton, UnitonVariant};
use loopviro::random::{hmrc_algebra_pair, hmrc_group_pair, named_rng, normalized_group_loop};
use loopviro::{AnnulusConfig, DoubleLoop, LaurentLoop, C64};

pub const SEED: u64 = 20;

pub fn config() -> AnnulusConfig {
    AnnulusConfig::default()
}

/// Near-identity real group pair for the two-circle factorization.
pub fn group_pair(n: usize) -> DoubleLoop {
    let a = config();
    let mut rng = named_rng(SEED, "bench/group");
    hmrc_group_pair(&mut rng, n, 6, 0.03, a.eps, a.samples, a.max_order()).expect("fixture")
}

pub fn algebra_pair(n: usize) -> DoubleLoop {
    let a = config();
    hmrc_algebra_pair(&mut named_rng(SEED, "bench/algebra"), n, 6, 0.3, a.eps).expect("fixture")
}

/// Element of the normalized plus group with `order` generating modes.
pub fn plus_loop(n: usize, order: usize) -> LaurentLoop {
    let a = config();
    let mut rng = named_rng(SEED, "bench/plus");
    normalized_group_loop(&mut rng, n, order, 0.1, a.eps, a.samples, a.max_order()).expect("fixture")
}

pub fn uniton() -> Uniton {
    Uniton::new(RationalFn::identity(), C64::new(0.0, 0.0), UnitonVariant::Positive, config().eps).expect("fixture")
}
