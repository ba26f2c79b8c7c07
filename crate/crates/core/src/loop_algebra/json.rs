use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::io::{matrix_from_json, matrix_to_json, MatrixJson};

use super::{Annulus, LaurentLoop};

/// Wire format: `coeffs[i]` is the mode `k = i - K`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopJson {
    pub n: usize,
    #[serde(rename = "K")]
    pub order: usize,
    pub r_in: f64,
    pub r_out: f64,
    pub coeffs: Vec<MatrixJson>,
}

impl From<&LaurentLoop> for LoopJson {
    fn from(l: &LaurentLoop) -> Self {
        LoopJson {
            n: l.n(),
            order: l.order(),
            r_in: l.annulus().r_in,
            r_out: l.annulus().r_out,
            coeffs: l.coeffs().iter().map(matrix_to_json).collect(),
        }
    }
}

impl TryFrom<LoopJson> for LaurentLoop {
    type Error = Error;

    fn try_from(j: LoopJson) -> Result<Self> {
        if j.n == 0 {
            return Err(Error::Parse("loop dimension must be positive".into()));
        }
        if j.coeffs.len() != 2 * j.order + 1 {
            return Err(Error::Parse(format!(
                "expected {} coefficients for K = {}, got {}",
                2 * j.order + 1,
                j.order,
                j.coeffs.len()
            )));
        }
        let annulus = Annulus::new(j.r_in, j.r_out)?;
        let coeffs = j
            .coeffs
            .iter()
            .map(|m| matrix_from_json(m, j.n))
            .collect::<Result<Vec<_>>>()?;
        LaurentLoop::from_coeffs(coeffs, annulus)
    }
}

impl Serialize for LaurentLoop {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LoopJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentLoop {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = LoopJson::deserialize(d)?;
        LaurentLoop::try_from(j).map_err(serde::de::Error::custom)
    }
}
