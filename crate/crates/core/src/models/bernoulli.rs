use crate::measure::{FiniteMeasure, Measure};
use crate::rng::Stream;

use super::{
    check_horizon, LatentPath, ModelError, ModelId, ObservedPath, ProductDisintegration, StateSpace,
};

/// Coins on {0, 1} whose head probabilities `ϑᵢ` are iid uniform on [0, 1].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IidUniformBernoulli;

impl ProductDisintegration for IidUniformBernoulli {
    fn id(&self) -> ModelId {
        ModelId::IidUniformBernoulli
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(vec![0.0, 1.0])
    }

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError> {
        check_horizon(n)?;
        let measures = (0..n)
            .map(|_| FiniteMeasure::bernoulli(stream.next_uniform()).map(Measure::Finite))
            .collect::<Result<_, _>>()?;
        Ok(LatentPath {
            model: self.id(),
            measures,
        })
    }
}

/// Steps `Zᵢ = 2Xᵢ - 1` of the iid-uniform coin model: on {-1, 1}, step `i`
/// goes up with probability `ϑᵢ`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RandomWalk;

impl RandomWalk {
    /// Maps a {0, 1} path to the walk positions `(S₀, …, Sₙ)` with `S₀ = 0`.
    pub fn from_bernoulli(path: &ObservedPath) -> Result<Vec<i64>, ModelError> {
        let steps = path
            .points
            .iter()
            .map(|&x| {
                if x == 0.0 {
                    Ok(-1)
                } else if x == 1.0 {
                    Ok(1)
                } else {
                    Err(ModelError::NotBinary(x))
                }
            })
            .collect::<Result<Vec<i64>, _>>()?;
        Ok(random_walk_positions(&steps))
    }
}

/// Partial sums `S₀ = 0, Sₖ = Z₀ + … + Zₖ₋₁`.
pub fn random_walk_positions(steps: &[i64]) -> Vec<i64> {
    std::iter::once(0)
        .chain(steps.iter().scan(0, |s, z| {
            *s += z;
            Some(*s)
        }))
        .collect()
}

impl ProductDisintegration for RandomWalk {
    fn id(&self) -> ModelId {
        ModelId::RandomWalk
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(vec![-1.0, 1.0])
    }

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError> {
        check_horizon(n)?;
        let measures = (0..n)
            .map(|_| {
                FiniteMeasure::two_point(-1.0, 1.0, stream.next_uniform()).map(Measure::Finite)
            })
            .collect::<Result<_, _>>()?;
        Ok(LatentPath {
            model: self.id(),
            measures,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sample_path;
    use crate::rng::StreamKey;

    #[test]
    fn latent_weights_are_the_stream_uniforms() {
        let key = StreamKey::new(8, 1);
        let latent = IidUniformBernoulli
            .sample_latent(3, &mut key.stream())
            .unwrap();
        let mut s = key.stream();
        for m in &latent.measures {
            let theta = s.next_uniform();
            let Measure::Finite(fm) = m else {
                panic!("finite measure expected")
            };
            assert_eq!(fm.weights(), &[1.0 - theta, theta]);
            assert_eq!(fm.support(), &[0.0, 1.0]);
        }
    }

    #[test]
    fn walk_from_bernoulli() {
        let path = ObservedPath {
            model: ModelId::IidUniformBernoulli,
            points: vec![1.0, 1.0, 0.0],
            key: None,
        };
        assert_eq!(RandomWalk::from_bernoulli(&path).unwrap(), vec![0, 1, 2, 1]);
        let bad = ObservedPath {
            points: vec![1.0, 0.5],
            ..path
        };
        assert_eq!(
            RandomWalk::from_bernoulli(&bad),
            Err(ModelError::NotBinary(0.5))
        );
    }

    #[test]
    fn walk_positions_match_count_formula() {
        let (_, obs) = sample_path(&IidUniformBernoulli, 500, StreamKey::new(4, 4)).unwrap();
        let s = RandomWalk::from_bernoulli(&obs).unwrap();
        let mut ones = 0i64;
        for k in 1..s.len() {
            assert!((s[k] - s[k - 1]).abs() == 1);
            ones += obs.points[k - 1] as i64;
            assert_eq!(s[k], 2 * ones - k as i64);
        }
    }

    #[test]
    fn rademacher_steps_are_fair() {
        let (_, obs) = sample_path(&RandomWalk, 100_000, StreamKey::new(31, 0)).unwrap();
        let ups = obs.points.iter().filter(|z| **z == 1.0).count() as f64 / 1e5;
        assert!((ups - 0.5).abs() < 0.005, "ups {ups}");
    }
}
