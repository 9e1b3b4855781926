//! The example processes behind one two-stage sampling interface.
//!
//! Stage one draws a [`LatentPath`] of probability measures `(ξ₀, …, ξₙ₋₁)`;
//! stage two draws each observation `Xᵢ ~ ξᵢ` independently given the latent
//! path. The two stages read disjoint substreams of the same [`StreamKey`].

mod bernoulli;
mod exchangeable;
mod regime;
mod spec;
mod submartingale;
mod volatility;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{Measure, MeasureError, PointMass};
use crate::rng::{Stream, StreamKey};

pub use bernoulli::{random_walk_positions, IidUniformBernoulli, RandomWalk};
pub use exchangeable::{ExchangeableBernoulli, Prior};
pub use regime::{Regime, RegimeParams, RegimeSwitching};
pub use spec::ModelSpec;
pub use submartingale::SubmartingaleCoin;
pub use volatility::{StochasticVolatility, SvParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("path horizon must be at least 1")]
    EmptyPath,
    #[error("{name} = {value} is not a probability")]
    NotAProbability { name: &'static str, value: f64 },
    #[error("regimes must satisfy mu(1) > lambda(1), got mu(1) = {mu1}, lambda(1) = {lambda1}")]
    RegimeOrdering { mu1: f64, lambda1: f64 },
    #[error("transition matrix row {row} sums to {sum}, not 1")]
    NotRowStochastic { row: usize, sum: f64 },
    #[error("pi is not stationary for Q: |pi Q - pi| = {residual:e}")]
    NotStationary { residual: f64 },
    #[error("pi sums to {0}, not 1")]
    StationaryNotNormalized(f64),
    #[error("transition matrix is reducible; supply pi explicitly")]
    Reducible,
    #[error("stochastic volatility needs |beta| < 1, got {0}")]
    NonStationaryVolatility(f64),
    #[error("{name} = {value} must be finite and positive")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} = {value} must be finite")]
    NonFinite { name: &'static str, value: f64 },
    #[error("truncation depth {depth} leaves a tail bound {tail:e} above 1e-10")]
    TruncationTooShort { depth: usize, tail: f64 },
    #[error(
        "unknown prior {0:?}; expected uniform, point:<p> or two_point:<low>,<high>,<weight_high>"
    )]
    UnknownPrior(String),
    #[error("random walk input must be binary, found {0}")]
    NotBinary(f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    IidUniformBernoulli,
    RandomWalk,
    ExchangeableBernoulli,
    RegimeSwitching,
    SubmartingaleCoin,
    StochasticVolatility,
    Canonical,
}

impl ModelId {
    pub const ALL: [ModelId; 7] = [
        ModelId::IidUniformBernoulli,
        ModelId::RandomWalk,
        ModelId::ExchangeableBernoulli,
        ModelId::RegimeSwitching,
        ModelId::SubmartingaleCoin,
        ModelId::StochasticVolatility,
        ModelId::Canonical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::IidUniformBernoulli => "iid_uniform_bernoulli",
            ModelId::RandomWalk => "random_walk",
            ModelId::ExchangeableBernoulli => "exchangeable_bernoulli",
            ModelId::RegimeSwitching => "regime_switching",
            ModelId::SubmartingaleCoin => "submartingale_coin",
            ModelId::StochasticVolatility => "stochastic_volatility",
            ModelId::Canonical => "canonical",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ModelId::IidUniformBernoulli => "coins on {0,1} with iid uniform head probabilities",
            ModelId::RandomWalk => "Rademacher steps on {-1,1} with iid uniform up probabilities",
            ModelId::ExchangeableBernoulli => {
                "coins on {0,1} sharing one head probability drawn from a prior"
            }
            ModelId::RegimeSwitching => {
                "signs on {-1,1} driven by a two-regime stationary Markov chain"
            }
            ModelId::SubmartingaleCoin => {
                "coins on {0,1} whose head probabilities form a bounded submartingale"
            }
            ModelId::StochasticVolatility => {
                "returns e^(H/2) Z with autoregressive log-volatility H"
            }
            ModelId::Canonical => "point masses at the observations of an inner model",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpace {
    Finite(Vec<f64>),
    Interval { lo: f64, hi: f64 },
}

impl StateSpace {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            StateSpace::Finite(states) => states.contains(&x),
            StateSpace::Interval { lo, hi } => *lo <= x && x <= *hi,
        }
    }

    pub fn is_subset_of_unit_interval(&self) -> bool {
        match self {
            StateSpace::Finite(states) => states.iter().all(|x| (0.0..=1.0).contains(x)),
            StateSpace::Interval { lo, hi } => *lo >= 0.0 && *hi <= 1.0,
        }
    }
}

/// `(ξ₀, …, ξₙ₋₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPath {
    pub model: ModelId,
    pub measures: Vec<Measure>,
}

impl LatentPath {
    pub fn horizon(&self) -> usize {
        self.measures.len()
    }
}

/// `(X₀, …, Xₙ₋₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPath {
    pub model: ModelId,
    pub points: Vec<f64>,
    pub key: Option<StreamKey>,
}

pub trait ProductDisintegration {
    fn id(&self) -> ModelId;

    fn state_space(&self) -> StateSpace;

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError>;

    /// Draws `Xᵢ ~ ξᵢ` independently, in index order.
    fn sample_observed(&self, latent: &LatentPath, stream: &mut Stream) -> ObservedPath {
        sample_observed(latent, stream)
    }
}

pub fn sample_observed(latent: &LatentPath, stream: &mut Stream) -> ObservedPath {
    ObservedPath {
        model: latent.model,
        points: latent.measures.iter().map(|m| m.sample(stream)).collect(),
        key: None,
    }
}

/// Two-stage draw of a path of length `n` under `key`: the latent path from
/// substream 0, the observations from substream 1.
pub fn sample_path<M: ProductDisintegration + ?Sized>(
    model: &M,
    n: usize,
    key: StreamKey,
) -> Result<(LatentPath, ObservedPath), ModelError> {
    let latent = model.sample_latent(n, &mut key.latent().stream())?;
    let mut observed = model.sample_observed(&latent, &mut key.observed().stream());
    observed.key = Some(key.latent());
    Ok((latent, observed))
}

/// Replaces every measure by the point mass at the observation.
pub fn canonical_disintegration(path: &ObservedPath) -> LatentPath {
    LatentPath {
        model: ModelId::Canonical,
        measures: path
            .points
            .iter()
            .map(|&x| Measure::Point(PointMass::new(x)))
            .collect(),
    }
}

pub(crate) fn check_horizon(n: usize) -> Result<(), ModelError> {
    if n == 0 {
        Err(ModelError::EmptyPath)
    } else {
        Ok(())
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::NotAProbability { name, value })
    }
}

/// The canonical product disintegration of an inner model: stage one runs
/// both stages of `inner` and keeps point masses at the draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Canonical {
    pub inner: Box<Model>,
}

impl ProductDisintegration for Canonical {
    fn id(&self) -> ModelId {
        ModelId::Canonical
    }

    fn state_space(&self) -> StateSpace {
        self.inner.state_space()
    }

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError> {
        let inner_latent = self.inner.sample_latent(n, stream)?;
        let inner_observed = self.inner.sample_observed(&inner_latent, stream);
        Ok(canonical_disintegration(&inner_observed))
    }
}

/// Every supported model, dispatched statically.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    IidUniformBernoulli(IidUniformBernoulli),
    RandomWalk(RandomWalk),
    ExchangeableBernoulli(ExchangeableBernoulli),
    RegimeSwitching(RegimeSwitching),
    SubmartingaleCoin(SubmartingaleCoin),
    StochasticVolatility(StochasticVolatility),
    Canonical(Canonical),
}

impl Model {
    pub fn canonical(inner: Model) -> Model {
        Model::Canonical(Canonical {
            inner: Box::new(inner),
        })
    }

    fn as_dyn(&self) -> &dyn ProductDisintegration {
        match self {
            Model::IidUniformBernoulli(m) => m,
            Model::RandomWalk(m) => m,
            Model::ExchangeableBernoulli(m) => m,
            Model::RegimeSwitching(m) => m,
            Model::SubmartingaleCoin(m) => m,
            Model::StochasticVolatility(m) => m,
            Model::Canonical(m) => m,
        }
    }
}

impl ProductDisintegration for Model {
    fn id(&self) -> ModelId {
        self.as_dyn().id()
    }

    fn state_space(&self) -> StateSpace {
        self.as_dyn().state_space()
    }

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError> {
        self.as_dyn().sample_latent(n, stream)
    }

    fn sample_observed(&self, latent: &LatentPath, stream: &mut Stream) -> ObservedPath {
        self.as_dyn().sample_observed(latent, stream)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_ones_latent(n: usize) -> LatentPath {
        LatentPath {
            model: ModelId::Canonical,
            measures: vec![Measure::Point(PointMass::new(1.0)); n],
        }
    }

    #[test]
    fn point_mass_latent_gives_constant_path() {
        let obs = sample_observed(&all_ones_latent(5), &mut StreamKey::new(3, 0).stream());
        assert_eq!(obs.points, vec![1.0; 5]);
    }

    #[test]
    fn canonical_of_path() {
        let path = ObservedPath {
            model: ModelId::IidUniformBernoulli,
            points: vec![0.0, 1.0, 1.0],
            key: None,
        };
        let latent = canonical_disintegration(&path);
        assert_eq!(
            latent.measures,
            vec![
                Measure::Point(PointMass::new(0.0)),
                Measure::Point(PointMass::new(1.0)),
                Measure::Point(PointMass::new(1.0))
            ]
        );
        for seed in 0..5 {
            let again = sample_observed(&latent, &mut StreamKey::new(seed, 0).observed().stream());
            assert_eq!(again.points, path.points);
        }
    }

    #[test]
    fn two_stage_is_deterministic() {
        let models = [
            Model::IidUniformBernoulli(IidUniformBernoulli),
            Model::StochasticVolatility(StochasticVolatility::new(SvParams::default())),
            Model::canonical(Model::SubmartingaleCoin(SubmartingaleCoin)),
        ];
        for model in &models {
            let key = StreamKey::new(17, 4);
            let a = sample_path(model, 50, key).unwrap();
            let b = sample_path(model, 50, key).unwrap();
            assert_eq!(a, b);
            let c = sample_path(model, 50, StreamKey::new(17, 5)).unwrap();
            assert_ne!(a.1.points, c.1.points);
        }
    }

    #[test]
    fn horizon_zero_is_rejected() {
        let err = sample_path(
            &Model::SubmartingaleCoin(SubmartingaleCoin),
            0,
            StreamKey::new(0, 0),
        );
        assert_eq!(err, Err(ModelError::EmptyPath));
    }
}
