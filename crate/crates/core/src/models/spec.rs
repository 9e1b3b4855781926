use serde::{Deserialize, Serialize};

use super::{
    ExchangeableBernoulli, IidUniformBernoulli, Model, ModelError, Prior, RandomWalk, RegimeParams,
    RegimeSwitching, StochasticVolatility, SubmartingaleCoin, SvParams,
};

fn default_alpha() -> f64 {
    0.0
}
fn default_beta() -> f64 {
    0.9
}
fn default_c_w() -> f64 {
    0.5
}
fn default_c_z() -> f64 {
    1.0
}

/// Declarative model description, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    IidUniformBernoulli,
    RandomWalk,
    ExchangeableBernoulli {
        prior: Prior,
    },
    RegimeSwitching {
        mu1: f64,
        lambda1: f64,
        q: [[f64; 2]; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<[f64; 2]>,
    },
    SubmartingaleCoin,
    StochasticVolatility {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_c_w")]
        c_w: f64,
        #[serde(default = "default_c_z")]
        c_z: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncation: Option<usize>,
    },
    Canonical {
        inner: Box<ModelSpec>,
    },
}

impl ModelSpec {
    /// Checks every invariant and builds the model.
    pub fn build(&self) -> Result<Model, ModelError> {
        Ok(match self {
            ModelSpec::IidUniformBernoulli => Model::IidUniformBernoulli(IidUniformBernoulli),
            ModelSpec::RandomWalk => Model::RandomWalk(RandomWalk),
            ModelSpec::ExchangeableBernoulli { prior } => {
                Model::ExchangeableBernoulli(ExchangeableBernoulli::new(*prior)?)
            }
            ModelSpec::RegimeSwitching {
                mu1,
                lambda1,
                q,
                pi,
            } => Model::RegimeSwitching(RegimeSwitching::new(RegimeParams::new(
                *mu1, *lambda1, *q, *pi,
            )?)?),
            ModelSpec::SubmartingaleCoin => Model::SubmartingaleCoin(SubmartingaleCoin),
            ModelSpec::StochasticVolatility {
                alpha,
                beta,
                c_w,
                c_z,
                truncation,
            } => Model::StochasticVolatility(StochasticVolatility::new(SvParams::new(
                *alpha,
                *beta,
                *c_w,
                *c_z,
                *truncation,
            )?)),
            ModelSpec::Canonical { inner } => Model::canonical(inner.build()?),
        })
    }

    /// The same spec with every derived parameter written out.
    pub fn normalized(&self) -> Result<ModelSpec, ModelError> {
        Ok(match self.build()? {
            Model::RegimeSwitching(m) => {
                let p = m.params();
                ModelSpec::RegimeSwitching {
                    mu1: p.mu1,
                    lambda1: p.lambda1,
                    q: p.q,
                    pi: Some(p.pi),
                }
            }
            Model::StochasticVolatility(m) => {
                let p = m.params();
                ModelSpec::StochasticVolatility {
                    alpha: p.alpha,
                    beta: p.beta,
                    c_w: p.c_w,
                    c_z: p.c_z,
                    truncation: Some(p.truncation),
                }
            }
            _ => match self {
                ModelSpec::Canonical { inner } => ModelSpec::Canonical {
                    inner: Box::new(inner.normalized()?),
                },
                other => other.clone(),
            },
        })
    }
}
