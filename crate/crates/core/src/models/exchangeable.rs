use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::measure::{FiniteMeasure, Measure};
use crate::rng::Stream;

use super::{
    check_horizon, check_probability, LatentPath, ModelError, ModelId, ProductDisintegration,
    StateSpace,
};

/// Cells of the midpoint rule used for priors with a density.
pub const PRIOR_QUADRATURE_CELLS: usize = 100_000;

/// Law of the shared head probability `ϑ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Prior {
    Uniform,
    Point {
        p: f64,
    },
    /// `ϑ = high` with probability `weight_high`, else `low`.
    TwoPoint {
        low: f64,
        high: f64,
        weight_high: f64,
    },
}

impl Prior {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            Prior::Uniform => Ok(()),
            Prior::Point { p } => check_probability("p", p),
            Prior::TwoPoint {
                low,
                high,
                weight_high,
            } => {
                check_probability("low", low)?;
                check_probability("high", high)?;
                check_probability("weight_high", weight_high)
            }
        }
    }

    pub fn sample(&self, stream: &mut Stream) -> f64 {
        match *self {
            Prior::Uniform => stream.next_uniform(),
            Prior::Point { p } => p,
            Prior::TwoPoint {
                low,
                high,
                weight_high,
            } => {
                if stream.next_uniform() < weight_high {
                    high
                } else {
                    low
                }
            }
        }
    }

    /// `E g(ϑ)`. The uniform prior uses a midpoint rule with
    /// [`PRIOR_QUADRATURE_CELLS`] cells.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        match *self {
            Prior::Uniform => {
                let h = 1.0 / PRIOR_QUADRATURE_CELLS as f64;
                crate::stats::compensated_sum(
                    (0..PRIOR_QUADRATURE_CELLS).map(|i| g((i as f64 + 0.5) * h)),
                ) * h
            }
            Prior::Point { p } => g(p),
            Prior::TwoPoint {
                low,
                high,
                weight_high,
            } => weight_high * g(high) + (1.0 - weight_high) * g(low),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Prior::Uniform => 0.5,
            Prior::Point { p } => p,
            Prior::TwoPoint {
                low,
                high,
                weight_high,
            } => weight_high * high + (1.0 - weight_high) * low,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Prior::Uniform => 1.0 / 12.0,
            Prior::Point { .. } => 0.0,
            Prior::TwoPoint {
                low,
                high,
                weight_high,
            } => weight_high * (1.0 - weight_high) * (high - low).powi(2),
        }
    }
}

impl FromStr for Prior {
    type Err = ModelError;

    /// `uniform`, `point:<p>` or `two_point:<low>,<high>,<weight_high>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ModelError::UnknownPrior(s.to_string());
        let (id, args) = s.split_once(':').unwrap_or((s, ""));
        let numbers = || -> Result<Vec<f64>, ModelError> {
            args.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| unknown()))
                .collect()
        };
        let prior = match id.trim() {
            "uniform" if args.is_empty() => Prior::Uniform,
            "point" => match numbers()?.as_slice() {
                [p] => Prior::Point { p: *p },
                _ => return Err(unknown()),
            },
            "two_point" => match numbers()?.as_slice() {
                [low, high, weight_high] => Prior::TwoPoint {
                    low: *low,
                    high: *high,
                    weight_high: *weight_high,
                },
                _ => return Err(unknown()),
            },
            _ => return Err(unknown()),
        };
        prior.validate()?;
        Ok(prior)
    }
}

/// Coins on {0, 1} that all share one head probability `ϑ` drawn once from a
/// prior: `ξᵢ = ξ₀` for every `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeableBernoulli {
    prior: Prior,
}

impl ExchangeableBernoulli {
    pub fn new(prior: Prior) -> Result<Self, ModelError> {
        prior.validate()?;
        Ok(Self { prior })
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }
}

impl ProductDisintegration for ExchangeableBernoulli {
    fn id(&self) -> ModelId {
        ModelId::ExchangeableBernoulli
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(vec![0.0, 1.0])
    }

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError> {
        check_horizon(n)?;
        let theta = self.prior.sample(stream);
        let shared = Measure::Finite(FiniteMeasure::bernoulli(theta)?);
        Ok(LatentPath {
            model: self.id(),
            measures: vec![shared; n],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample_path;
    use crate::rng::StreamKey;

    #[test]
    fn prior_parsing() {
        assert_eq!("uniform".parse::<Prior>().unwrap(), Prior::Uniform);
        assert_eq!(
            "point:0.3".parse::<Prior>().unwrap(),
            Prior::Point { p: 0.3 }
        );
        assert_eq!(
            "two_point:0.2,0.8,0.5".parse::<Prior>().unwrap(),
            Prior::TwoPoint {
                low: 0.2,
                high: 0.8,
                weight_high: 0.5
            }
        );
        assert!(matches!(
            "beta:2,3".parse::<Prior>(),
            Err(ModelError::UnknownPrior(_))
        ));
        assert!(matches!(
            "point".parse::<Prior>(),
            Err(ModelError::UnknownPrior(_))
        ));
        assert!(matches!(
            "point:1.5".parse::<Prior>(),
            Err(ModelError::NotAProbability { .. })
        ));
    }

    #[test]
    fn all_measures_share_one_draw() {
        let model = ExchangeableBernoulli::new(Prior::Uniform).unwrap();
        let latent = model
            .sample_latent(20, &mut StreamKey::new(1, 2).stream())
            .unwrap();
        assert!(latent.measures.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn point_prior_is_iid_bernoulli() {
        let model = ExchangeableBernoulli::new(Prior::Point { p: 0.3 }).unwrap();
        let (_, obs) = sample_path(&model, 100_000, StreamKey::new(12, 0)).unwrap();
        let mean = obs.points.iter().sum::<f64>() / 1e5;
        // 3 sigma of a Bernoulli(0.3) mean over 1e5 draws
        assert!(
            (mean - 0.3).abs() < 3.0 * (0.21f64 / 1e5).sqrt(),
            "mean {mean}"
        );
    }

    #[test]
    fn replications_draw_independent_thetas() {
        let model = ExchangeableBernoulli::new(Prior::Uniform).unwrap();
        let thetas: Vec<f64> = (0..2)
            .map(|rep| {
                let (latent, _) = sample_path(&model, 1, StreamKey::new(5, rep)).unwrap();
                latent.measures[0].mean().unwrap()
            })
            .collect();
        assert_ne!(thetas[0], thetas[1]);
    }

    #[test]
    fn uniform_quadrature_matches_moments() {
        // ∫ θ⁴ dθ = 1/5
        assert!((Prior::Uniform.expect(|t| t.powi(4)) - 0.2).abs() < 1e-10);
        assert!((Prior::Uniform.expect(|t| t) - Prior::Uniform.mean()).abs() < 1e-12);
    }
}
