//! Weight generators. Every generator is deterministic given its seed and
//! clamps leaf values to at least [`WEIGHT_FLOOR`].

use hwl_core::dyadic::{DyadicModel, Weight, WEIGHT_FLOOR};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WeightError {
    #[error("{0}")]
    Parameter(String),
    #[error("expected {expected} leaf values, found {found}")]
    Count { expected: usize, found: usize },
    #[error(transparent)]
    Core(#[from] hwl_core::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        value: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
    /// Independent leaves `exp(σ·Z)`, `Z` standard normal.
    Lognormal {
        sigma: f64,
        seed: u64,
    },
    /// `|t − c·2^{-N}|^a` at leaf midpoints `t`; `center` is a leaf
    /// boundary index in `0..=2^N`.
    Power {
        exponent: f64,
        center: u64,
    },
    /// `1/u` for the generated `u`, times lognormal noise of scale `jitter`.
    ReciprocalOf {
        other: Box<WeightSpec>,
        jitter: f64,
        seed: u64,
    },
}

fn err<T>(m: &str) -> Result<T, WeightError> {
    Err(WeightError::Parameter(m.into()))
}

impl WeightSpec {
    /// Parameter checks that do not depend on the depth.
    pub fn validate(&self) -> Result<(), WeightError> {
        match self {
            WeightSpec::Constant { value } if !(*value > 0.0 && value.is_finite()) => {
                err("constant weight must be positive and finite")
            }
            WeightSpec::Explicit { values }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) =>
            {
                err("explicit weight values must be positive and finite")
            }
            WeightSpec::Lognormal { sigma, .. } if !(*sigma >= 0.0 && sigma.is_finite()) => {
                err("lognormal sigma must be nonnegative and finite")
            }
            WeightSpec::Power { exponent, .. } if !(*exponent > -1.0 && *exponent < 1.0) => {
                err("power exponent must lie in (-1, 1)")
            }
            WeightSpec::ReciprocalOf { other, jitter, .. } => {
                if !(*jitter >= 0.0 && jitter.is_finite()) {
                    return err("jitter must be nonnegative and finite");
                }
                other.validate()
            }
            _ => Ok(()),
        }
    }
}

pub fn generate_weights(spec: &WeightSpec, model: DyadicModel) -> Result<Weight, WeightError> {
    let values = leaf_values(spec, model)?;
    Ok(Weight::from_values(
        model,
        values.into_iter().map(|v| v.max(WEIGHT_FLOOR)).collect(),
    )?)
}

fn lognormal(sigma: f64) -> Result<LogNormal<f64>, WeightError> {
    LogNormal::new(0.0, sigma).map_err(|e| WeightError::Parameter(e.to_string()))
}

fn leaf_values(spec: &WeightSpec, model: DyadicModel) -> Result<Vec<f64>, WeightError> {
    spec.validate()?;
    let n = model.leaf_count();
    Ok(match spec {
        WeightSpec::Constant { value } => vec![*value; n],
        WeightSpec::Explicit { values } => {
            if values.len() != n {
                return Err(WeightError::Count {
                    expected: n,
                    found: values.len(),
                });
            }
            values.clone()
        }
        WeightSpec::Lognormal { sigma, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let d = lognormal(*sigma)?;
            (0..n).map(|_| d.sample(&mut rng)).collect()
        }
        WeightSpec::Power { exponent, center } => {
            if *center > n as u64 {
                return err("power center must be a leaf boundary index in 0..=2^depth");
            }
            let h = model.leaf_measure();
            let c = *center as f64 * h;
            (0..n)
                .map(|i| ((i as f64 + 0.5) * h - c).abs().powf(*exponent))
                .collect()
        }
        WeightSpec::ReciprocalOf {
            other,
            jitter,
            seed,
        } => {
            let base = leaf_values(other, model)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let d = lognormal(*jitter)?;
            base.into_iter()
                .map(|u| d.sample(&mut rng) / u.max(WEIGHT_FLOOR))
                .collect()
        }
    })
}
