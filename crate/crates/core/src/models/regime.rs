use serde::{Deserialize, Serialize};

use crate::measure::{FiniteMeasure, Measure};
use crate::oracle::{stationary_vector, OracleError};
use crate::rng::Stream;

use super::{
    check_horizon, check_probability, LatentPath, ModelError, ModelId, ProductDisintegration,
    StateSpace,
};

const ROW_SUM_TOLERANCE: f64 = 1e-12;
const STATIONARITY_TOLERANCE: f64 = 1e-10;

/// The two regimes, `μ` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Mu,
    Lambda,
}

impl Regime {
    pub const BOTH: [Regime; 2] = [Regime::Mu, Regime::Lambda];

    pub fn index(self) -> usize {
        match self {
            Regime::Mu => 0,
            Regime::Lambda => 1,
        }
    }
}

/// `μ(1)`, `λ(1)`, the transition matrix `Q` over `(μ, λ)` and its
/// stationary vector `π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub mu1: f64,
    pub lambda1: f64,
    pub q: [[f64; 2]; 2],
    pub pi: [f64; 2],
}

impl RegimeParams {
    /// Validates the parameters. When `pi` is `None` it is solved from `Q`,
    /// which requires `Q` to be irreducible.
    pub fn new(
        mu1: f64,
        lambda1: f64,
        q: [[f64; 2]; 2],
        pi: Option<[f64; 2]>,
    ) -> Result<Self, ModelError> {
        check_probability("mu1", mu1)?;
        check_probability("lambda1", lambda1)?;
        if mu1 <= lambda1 {
            return Err(ModelError::RegimeOrdering { mu1, lambda1 });
        }
        for (row, entries) in q.iter().enumerate() {
            for &p in entries {
                check_probability("Q entry", p)?;
            }
            let sum = entries[0] + entries[1];
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ModelError::NotRowStochastic { row, sum });
            }
        }
        let pi = match pi {
            Some(pi) => pi,
            None => stationary_vector(q).map_err(|e| match e {
                OracleError::ReducibleChain => ModelError::Reducible,
                _ => unreachable!("stationary_vector only fails on reducible chains"),
            })?,
        };
        for &p in &pi {
            check_probability("pi entry", p)?;
        }
        let total = pi[0] + pi[1];
        if (total - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(ModelError::StationaryNotNormalized(total));
        }
        let residual = (0..2)
            .map(|j| (pi[0] * q[0][j] + pi[1] * q[1][j] - pi[j]).abs())
            .fold(0.0, f64::max);
        if residual > STATIONARITY_TOLERANCE {
            return Err(ModelError::NotStationary { residual });
        }
        Ok(Self {
            mu1,
            lambda1,
            q,
            pi,
        })
    }

    /// Both stationary weights lie strictly inside (0, 1).
    pub fn is_irreducible(&self) -> bool {
        self.pi.iter().all(|p| *p > 0.0 && *p < 1.0) && self.q[0][1] + self.q[1][0] > 0.0
    }

    /// `ρ(1)` for a regime `ρ`.
    pub fn up_probability(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Mu => self.mu1,
            Regime::Lambda => self.lambda1,
        }
    }

    pub fn transition(&self, from: Regime, to: Regime) -> f64 {
        self.q[from.index()][to.index()]
    }

    pub fn stationary(&self, regime: Regime) -> f64 {
        self.pi[regime.index()]
    }
}

/// Signs on {-1, 1} whose law at each step is the current regime of a
/// stationary two-state Markov chain over `{μ, λ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSwitching {
    params: RegimeParams,
    mu: Measure,
    lambda: Measure,
}

impl RegimeSwitching {
    pub fn new(params: RegimeParams) -> Result<Self, ModelError> {
        let params = RegimeParams::new(params.mu1, params.lambda1, params.q, Some(params.pi))?;
        Ok(Self {
            params,
            mu: Measure::Finite(FiniteMeasure::two_point(-1.0, 1.0, params.mu1)?),
            lambda: Measure::Finite(FiniteMeasure::two_point(-1.0, 1.0, params.lambda1)?),
        })
    }

    pub fn params(&self) -> &RegimeParams {
        &self.params
    }

    pub fn regime_measure(&self, regime: Regime) -> &Measure {
        match regime {
            Regime::Mu => &self.mu,
            Regime::Lambda => &self.lambda,
        }
    }

    /// The hidden chain `r₀, …, rₙ₋₁` started from `π`; one uniform per step.
    pub fn sample_regimes(&self, n: usize, stream: &mut Stream) -> Vec<Regime> {
        let mut regimes = Vec::with_capacity(n);
        let mut current = if stream.next_uniform() < self.params.pi[0] {
            Regime::Mu
        } else {
            Regime::Lambda
        };
        for i in 0..n {
            if i > 0 {
                let stay_mu = self.params.q[current.index()][0];
                current = if stream.next_uniform() < stay_mu {
                    Regime::Mu
                } else {
                    Regime::Lambda
                };
            }
            regimes.push(current);
        }
        regimes
    }
}

impl ProductDisintegration for RegimeSwitching {
    fn id(&self) -> ModelId {
        ModelId::RegimeSwitching
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(vec![-1.0, 1.0])
    }

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError> {
        check_horizon(n)?;
        let measures = self
            .sample_regimes(n, stream)
            .into_iter()
            .map(|r| self.regime_measure(r).clone())
            .collect();
        Ok(LatentPath {
            model: self.id(),
            measures,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn derived() -> RegimeParams {
        RegimeParams::new(0.7, 0.3, [[0.9, 0.1], [0.2, 0.8]], None).unwrap()
    }

    #[test]
    fn solves_pi_when_absent() {
        let p = derived();
        assert!((p.pi[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(p.is_irreducible());
    }

    #[test]
    fn rejects_invalid_params() {
        let q = [[0.9, 0.1], [0.2, 0.8]];
        assert!(matches!(
            RegimeParams::new(0.3, 0.7, q, None),
            Err(ModelError::RegimeOrdering { .. })
        ));
        assert!(matches!(
            RegimeParams::new(0.7, 0.3, [[0.8, 0.1], [0.2, 0.8]], None),
            Err(ModelError::NotRowStochastic { row: 0, .. })
        ));
        assert!(matches!(
            RegimeParams::new(0.7, 0.3, q, Some([0.5, 0.5])),
            Err(ModelError::NotStationary { .. })
        ));
        assert_eq!(
            RegimeParams::new(0.7, 0.3, [[1.0, 0.0], [0.0, 1.0]], None),
            Err(ModelError::Reducible)
        );
    }

    #[test]
    fn identity_transitions_freeze_the_regime() {
        let params =
            RegimeParams::new(0.9, 0.1, [[1.0, 0.0], [0.0, 1.0]], Some([0.5, 0.5])).unwrap();
        assert!(!params.is_irreducible());
        let model = RegimeSwitching::new(params).unwrap();
        let mut starts_mu = 0;
        for rep in 0..200 {
            let regimes = model.sample_regimes(50, &mut StreamKey::new(77, rep).stream());
            assert!(regimes.iter().all(|r| *r == regimes[0]));
            starts_mu += usize::from(regimes[0] == Regime::Mu);
        }
        assert!((60..=140).contains(&starts_mu), "{starts_mu}");
    }

    #[test]
    fn regime_marginal_is_stationary() {
        let model = RegimeSwitching::new(derived()).unwrap();
        let reps = 100_000;
        let mut mu_count = [0usize; 3];
        for rep in 0..reps {
            let regimes = model.sample_regimes(10, &mut StreamKey::new(2, rep).stream());
            for (slot, &n) in [0usize, 4, 9].iter().enumerate() {
                mu_count[slot] += usize::from(regimes[n] == Regime::Mu);
            }
        }
        for c in mu_count {
            assert!((c as f64 / reps as f64 - 2.0 / 3.0).abs() < 0.01);
        }
    }
}
