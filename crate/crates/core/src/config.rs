//! Discretization settings, tolerances and the run configuration echoed in reports.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Discretization of the spectral plane: the two circles `|λ| = ε` and `|λ| = 1/ε`,
/// samples per circle and the nominal Laurent truncation order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusConfig {
    pub eps: f64,
    pub samples: usize,
    pub order: usize,
    pub trunc_tol: f64,
    /// Quadrature radius for contour-integral cross checks, `delta <= eps`.
    pub delta: f64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        AnnulusConfig {
            eps: 0.5,
            samples: 256,
            order: 16,
            trunc_tol: 1e-10,
            delta: 0.5,
        }
    }
}

impl AnnulusConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Config(format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta <= self.eps) {
            return Err(Error::Config(format!(
                "delta must lie in (0, eps], got {}",
                self.delta
            )));
        }
        crate::spectral::check_power_of_two(self.samples)?;
        if self.samples < 4 * self.order + 4 {
            return Err(Error::OrderTooLarge {
                order: self.order,
                samples: self.samples,
                needed: 4 * self.order + 4,
            });
        }
        if !(self.trunc_tol > 0.0) {
            return Err(Error::Config("trunc_tol must be positive".into()));
        }
        Ok(())
    }

    /// Largest order any loop may carry at this sample count (`N >= 4K + 4`).
    pub fn max_order(&self) -> usize {
        (self.samples - 4) / 4
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub factorization: f64,
    pub pde: f64,
    pub reality: f64,
    /// Finite-difference bracket and flow consistency checks.
    #[serde(default = "default_bracket")]
    pub bracket: f64,
}

fn default_bracket() -> f64 {
    1e-4
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            factorization: 1e-9,
            pde: 1e-5,
            reality: 1e-10,
            bracket: default_bracket(),
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("factorization", self.factorization),
            ("pde", self.pde),
            ("reality", self.reality),
            ("bracket", self.bracket),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("tolerance {name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Rectangle `[x0,x1] x [y0,y1]` with spacing `h`; the basepoint defaults to the centre node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub h: f64,
    #[serde(rename = "p", alias = "basepoint", default)]
    pub basepoint: Option<[f64; 2]>,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            x0: -1.0,
            x1: 1.0,
            y0: -1.0,
            y1: 1.0,
            h: 0.02,
            basepoint: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub annulus: AnnulusConfig,
    pub grid: GridParams,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.annulus.validate()?;
        self.tolerances.validate()
    }

    /// Stable digest of the configuration, recorded in report provenance.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        AnnulusConfig::default().validate().unwrap();
        RunConfig::default().validate().unwrap();
        assert_eq!(AnnulusConfig::default().max_order(), 63);
    }

    #[test]
    fn rejects_undersampled_order() {
        let cfg = AnnulusConfig {
            samples: 64,
            order: 16,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::OrderTooLarge { .. })));
    }

    #[test]
    fn hash_tracks_seed() {
        let a = RunConfig::default();
        let b = RunConfig { seed: 7, ..RunConfig::default() };
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), RunConfig::default().hash());
    }
}
