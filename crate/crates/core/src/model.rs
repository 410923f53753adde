//! Evaluable map models: an exact base map plus deterministic hash noise.
//!
//! The iteration evaluates `f` at points `ωⁿx` far outside any sampled box,
//! so noise is a pure function of `(seed, point, coordinate)` rather than a
//! stored table.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::direct_method::{round_exact, to_exact, EvaluableMap, ExactVec};
use crate::error::{Error, Result};
use crate::fspace::CodomainVec;
use crate::ortho::GroupPoint;

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapBase {
    Zero {
        #[serde(default = "one")]
        dim: usize,
    },
    Constant {
        c: Vec<f64>,
    },
    /// `x ↦ ⟨a, x⟩`, scalar-valued.
    Linear {
        a: Vec<i64>,
    },
    /// `x ↦ xᵀ Q x`, scalar-valued; `Q` symmetric.
    Quadratic {
        q: Vec<Vec<i64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    pub seed: u64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapModel {
    pub base: MapBase,
    #[serde(default)]
    pub noise: Noise,
}

impl MapModel {
    pub fn new(base: MapBase, noise: Noise) -> Self {
        MapModel { base, noise }
    }

    pub fn exact(base: MapBase) -> Self {
        MapModel {
            base,
            noise: Noise::default(),
        }
    }

    pub fn codomain_dim(&self) -> usize {
        match &self.base {
            MapBase::Zero { dim } => *dim,
            MapBase::Constant { c } => c.len(),
            MapBase::Linear { .. } | MapBase::Quadratic { .. } => 1,
        }
    }

    /// Domain dimension the base requires, if any.
    pub fn domain_dim(&self) -> Option<usize> {
        match &self.base {
            MapBase::Linear { a } => Some(a.len()),
            MapBase::Quadratic { q } => Some(q.len()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise.amplitude >= 0.0 && self.noise.amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise amplitude must be finite and nonnegative, got {}",
                self.noise.amplitude
            )));
        }
        match &self.base {
            MapBase::Zero { dim } if *dim == 0 => {
                Err(Error::InvalidArgument("codomain dimension must be positive".into()))
            }
            MapBase::Constant { c } if c.is_empty() || c.iter().any(|v| !v.is_finite()) => Err(
                Error::InvalidArgument("constant base needs finite, nonempty coordinates".into()),
            ),
            MapBase::Linear { a } if a.is_empty() => {
                Err(Error::InvalidArgument("linear base needs a nonempty vector".into()))
            }
            MapBase::Quadratic { q } => {
                let d = q.len();
                if d == 0 || q.iter().any(|row| row.len() != d) {
                    return Err(Error::InvalidArgument("quadratic base needs a square matrix".into()));
                }
                if (0..d).any(|i| (0..d).any(|j| q[i][j] != q[j][i])) {
                    return Err(Error::InvalidArgument("quadratic base matrix must be symmetric".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn base_value(&self, x: &GroupPoint) -> Result<ExactVec> {
        let check_dim = |expected: usize| {
            if x.dim() != expected {
                Err(Error::DimensionMismatch {
                    expected,
                    actual: x.dim(),
                })
            } else {
                Ok(())
            }
        };
        Ok(match &self.base {
            MapBase::Zero { dim } => vec![BigRational::zero(); *dim],
            MapBase::Constant { c } => to_exact(&CodomainVec(c.clone()), 0)?,
            MapBase::Linear { a } => {
                check_dim(a.len())?;
                let s: BigInt = a.iter().zip(&x.0).map(|(ai, xi)| xi * *ai).sum();
                vec![BigRational::from_integer(s)]
            }
            MapBase::Quadratic { q } => {
                check_dim(q.len())?;
                let mut s = BigInt::zero();
                for (i, row) in q.iter().enumerate() {
                    for (j, &qij) in row.iter().enumerate() {
                        if qij != 0 {
                            s += &x.0[i] * &x.0[j] * qij;
                        }
                    }
                }
                vec![BigRational::from_integer(s)]
            }
        })
    }
}

/// `base(x) + noise(x)`, exactly.
pub fn eval_map_exact(model: &MapModel, x: &GroupPoint) -> Result<ExactVec> {
    let mut value = model.base_value(x)?;
    if model.noise.amplitude > 0.0 {
        for (i, v) in value.iter_mut().enumerate() {
            let noise = noise_value(model.noise.seed, x, i, model.noise.amplitude);
            *v += BigRational::from_float(noise).expect("finite noise");
        }
    }
    Ok(value)
}

/// `base(x) + noise(x)`, rounded once.
pub fn eval_map(model: &MapModel, x: &GroupPoint) -> Result<CodomainVec> {
    round_exact(&eval_map_exact(model, x)?, 0)
}

impl EvaluableMap for MapModel {
    fn eval(&self, x: &GroupPoint) -> Result<CodomainVec> {
        eval_map(self, x)
    }

    fn eval_exact(&self, x: &GroupPoint) -> Result<ExactVec> {
        eval_map_exact(self, x)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of `(seed, point, coordinate index)`.
pub fn point_hash(seed: u64, x: &GroupPoint, coordinate: usize) -> u64 {
    let mut h = splitmix64(seed);
    for c in &x.0 {
        let bytes = c.to_signed_bytes_le();
        h = splitmix64(h ^ bytes.len() as u64);
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            h = splitmix64(h ^ u64::from_le_bytes(buf));
        }
    }
    splitmix64(h ^ coordinate as u64)
}

/// Noise in `[−amplitude, amplitude]`.
pub fn noise_value(seed: u64, x: &GroupPoint, coordinate: usize, amplitude: f64) -> f64 {
    let unit = (point_hash(seed, x, coordinate) >> 11) as f64 / (1u64 << 53) as f64;
    (2.0 * unit - 1.0) * amplitude
}
