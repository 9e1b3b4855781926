use crate::measure::{FiniteMeasure, Measure};
use crate::rng::Stream;

use super::{check_horizon, LatentPath, ModelError, ModelId, ProductDisintegration, StateSpace};

/// Coins on {0, 1} with head probabilities `ϑ₀ = U₀/2`,
/// `ϑₙ = ϑₙ₋₁ + 2^-(n+1) Uₙ` for iid uniform `Uₙ`. The sequence is
/// nondecreasing, bounded by `1 - 2^-(n+1)` and converges almost surely.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SubmartingaleCoin;

impl SubmartingaleCoin {
    pub fn sample_thetas(&self, n: usize, stream: &mut Stream) -> Vec<f64> {
        let mut thetas = Vec::with_capacity(n);
        let mut theta = 0.0;
        let mut step = 0.5;
        for _ in 0..n {
            theta += step * stream.next_uniform();
            step *= 0.5;
            thetas.push(theta);
        }
        thetas
    }
}

impl ProductDisintegration for SubmartingaleCoin {
    fn id(&self) -> ModelId {
        ModelId::SubmartingaleCoin
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(vec![0.0, 1.0])
    }

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError> {
        check_horizon(n)?;
        let measures = self
            .sample_thetas(n, stream)
            .into_iter()
            .map(|t| FiniteMeasure::bernoulli(t).map(Measure::Finite))
            .collect::<Result<_, _>>()?;
        Ok(LatentPath {
            model: self.id(),
            measures,
        })
    }
}
