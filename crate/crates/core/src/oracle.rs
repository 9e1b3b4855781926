//! Exact finite-dimensional laws of the discrete models.
//!
//! `P(X₀ ∈ A₀, …, Xₙ ∈ Aₙ) = E[ξ₀(A₀)⋯ξₙ(Aₙ)]`, evaluated by closed form,
//! quadrature over the prior, or brute-force enumeration of the hidden regime
//! sequences. None of these routes shares code with the samplers, so Monte
//! Carlo frequencies can be checked against them.

use thiserror::Error;

use crate::models::{Model, ModelId, ProductDisintegration, Regime, RegimeParams, StateSpace};
use crate::observable::Observable;
use crate::stats::NeumaierSum;

/// Largest coordinate index a cylinder event may constrain.
pub const MAX_EVENT_INDEX: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("no exact finite-dimensional law is available for {0}")]
    UnsupportedModel(ModelId),
    #[error("event constrains index {0}, beyond the enumeration cap of {MAX_EVENT_INDEX}")]
    TooLong(usize),
    #[error("coordinate {0} is constrained twice")]
    DuplicateIndex(usize),
    #[error("coordinate {0} has an empty subset")]
    EmptySubset(usize),
    #[error("state {state} at coordinate {index} is outside the state space")]
    StateOutsideSpace { index: usize, state: f64 },
    #[error("transition matrix is reducible: Q(mu, lambda) + Q(lambda, mu) = 0")]
    ReducibleChain,
    #[error("observable is undefined at {0}")]
    UndefinedObservable(f64),
}

/// A finite conjunction `{X_i ∈ A_i}` of single-coordinate constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderEvent {
    coords: Vec<(usize, Vec<f64>)>,
}

impl CylinderEvent {
    pub fn new(coords: Vec<(usize, Vec<f64>)>) -> Result<Self, OracleError> {
        for (k, (index, subset)) in coords.iter().enumerate() {
            if subset.is_empty() {
                return Err(OracleError::EmptySubset(*index));
            }
            if coords[..k].iter().any(|(i, _)| i == index) {
                return Err(OracleError::DuplicateIndex(*index));
            }
        }
        Ok(Self { coords })
    }

    /// `{X₀ = x₀, …, Xₙ = xₙ}`.
    pub fn point(states: &[f64]) -> Self {
        Self {
            coords: states
                .iter()
                .enumerate()
                .map(|(i, x)| (i, vec![*x]))
                .collect(),
        }
    }

    pub fn coords(&self) -> &[(usize, Vec<f64>)] {
        &self.coords
    }

    /// Number of leading coordinates the event involves.
    pub fn span(&self) -> usize {
        self.coords.iter().map(|(i, _)| i + 1).max().unwrap_or(0)
    }

    pub fn contains(&self, path: &[f64]) -> bool {
        self.coords
            .iter()
            .all(|(i, set)| path.get(*i).is_some_and(|x| set.contains(x)))
    }

    fn check_states(&self, space: &StateSpace) -> Result<(), OracleError> {
        for (index, subset) in &self.coords {
            if let Some(&state) = subset.iter().find(|x| !space.contains(**x)) {
                return Err(OracleError::StateOutsideSpace {
                    index: *index,
                    state,
                });
            }
        }
        Ok(())
    }
}

/// `P(X ∈ event)` for the iid-uniform coin, the random walk, the exchangeable
/// coin, the regime-switching model, and canonical wrappers of these.
pub fn joint_exact(model: &Model, event: &CylinderEvent) -> Result<f64, OracleError> {
    if let Some(too_far) = event
        .coords
        .iter()
        .map(|(i, _)| *i)
        .find(|i| *i > MAX_EVENT_INDEX)
    {
        return Err(OracleError::TooLong(too_far));
    }
    match model {
        Model::IidUniformBernoulli(_) | Model::RandomWalk(_) => {
            event.check_states(&model.state_space())?;
            // E ξ(x) = 1/2 for each of the two states, and the ξᵢ are independent
            Ok(event
                .coords
                .iter()
                .map(|(_, set)| 0.5 * distinct_count(set) as f64)
                .product())
        }
        Model::ExchangeableBernoulli(m) => {
            event.check_states(&model.state_space())?;
            let (ones, zeros) = exchangeable_exponents(event);
            Ok(m.prior()
                .expect(|theta| theta.powi(ones) * (1.0 - theta).powi(zeros)))
        }
        Model::RegimeSwitching(m) => {
            event.check_states(&model.state_space())?;
            Ok(regime_enumeration(m.params(), event))
        }
        Model::Canonical(c) => joint_exact(&c.inner, event),
        Model::SubmartingaleCoin(_) | Model::StochasticVolatility(_) => {
            Err(OracleError::UnsupportedModel(model.id()))
        }
    }
}

fn distinct_count(set: &[f64]) -> usize {
    set.iter()
        .enumerate()
        .filter(|(i, x)| !set[..*i].contains(x))
        .count()
}

/// Counts of coordinates pinned to 1 and pinned to 0; `{0, 1}` constraints
/// contribute a factor of one.
fn exchangeable_exponents(event: &CylinderEvent) -> (i32, i32) {
    let mut ones = 0;
    let mut zeros = 0;
    for (_, set) in &event.coords {
        match (set.contains(&1.0), set.contains(&0.0)) {
            (true, false) => ones += 1,
            (false, true) => zeros += 1,
            _ => {}
        }
    }
    (ones, zeros)
}

/// `Σ_{r₀…rₙ} π(r₀) Π Q(r_{k-1}, r_k) Π r_k(A_k)` over all `2^{n+1}` regime
/// sequences.
fn regime_enumeration(p: &RegimeParams, event: &CylinderEvent) -> f64 {
    let len = event.span().max(1);
    let mut constraint: Vec<Option<&[f64]>> = vec![None; len];
    for (i, set) in &event.coords {
        constraint[*i] = Some(set);
    }
    let mass = |regime: Regime, set: &[f64]| -> f64 {
        let up = p.up_probability(regime);
        let mut total = 0.0;
        if set.contains(&1.0) {
            total += up;
        }
        if set.contains(&-1.0) {
            total += 1.0 - up;
        }
        total
    };
    let regime_at = |mask: u32, k: usize| {
        if mask >> k & 1 == 0 {
            Regime::Mu
        } else {
            Regime::Lambda
        }
    };
    let mut total = NeumaierSum::new();
    for mask in 0..(1u32 << len) {
        let mut weight = p.stationary(regime_at(mask, 0));
        for k in 0..len {
            let r = regime_at(mask, k);
            if k > 0 {
                weight *= p.transition(regime_at(mask, k - 1), r);
            }
            if let Some(set) = constraint[k] {
                weight *= mass(r, set);
            }
            if weight == 0.0 {
                break;
            }
        }
        total += weight;
    }
    total.total()
}

/// `Σ_x f(x) (μ(x)π_μ + λ(x)π_λ)` over `x ∈ {-1, 1}`.
pub fn regime_ergodic_limit(params: &RegimeParams, f: &Observable) -> Result<f64, OracleError> {
    let up = f.eval(1.0).ok_or(OracleError::UndefinedObservable(1.0))?;
    let down = f.eval(-1.0).ok_or(OracleError::UndefinedObservable(-1.0))?;
    let [pi_mu, pi_lambda] = params.pi;
    let p_up = params.mu1 * pi_mu + params.lambda1 * pi_lambda;
    let p_down = (1.0 - params.mu1) * pi_mu + (1.0 - params.lambda1) * pi_lambda;
    Ok(up * p_up + down * p_down)
}

/// Stationary vector of an irreducible 2×2 row-stochastic matrix, ordered
/// `(π_μ, π_λ)`.
pub fn stationary_vector(q: [[f64; 2]; 2]) -> Result<[f64; 2], OracleError> {
    let leave_mu = q[0][1];
    let leave_lambda = q[1][0];
    let total = leave_mu + leave_lambda;
    if total <= 0.0 {
        return Err(OracleError::ReducibleChain);
    }
    let pi_mu = leave_lambda / total;
    Ok([pi_mu, leave_mu / total])
}

/// Every point event `{X₀ = x₀, …, X_{n-1} = x_{n-1}}` over a finite state
/// space, in lexicographic order of the state list.
pub fn full_partition(states: &[f64], n: usize) -> Vec<CylinderEvent> {
    let k = states.len();
    let count = k.pow(n as u32);
    (0..count)
        .map(|mut code| {
            let mut path = vec![0.0; n];
            for slot in path.iter_mut().rev() {
                *slot = states[code % k];
                code /= k;
            }
            CylinderEvent::point(&path)
        })
        .collect()
}

/// Every cylinder event on coordinates `0..n` where each coordinate is
/// constrained to a nonempty subset of `states`.
pub fn all_cylinders(states: &[f64], n: usize) -> Vec<CylinderEvent> {
    let subsets: Vec<Vec<f64>> = (1u32..(1 << states.len()))
        .map(|mask| {
            states
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, x)| *x)
                .collect()
        })
        .collect();
    let k = subsets.len();
    (0..k.pow(n as u32))
        .map(|mut code| {
            let mut coords = Vec::with_capacity(n);
            for i in 0..n {
                coords.push((i, subsets[code % k].clone()));
                code /= k;
            }
            CylinderEvent { coords }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        ExchangeableBernoulli, IidUniformBernoulli, Prior, RegimeSwitching, SubmartingaleCoin,
    };

    fn derived_regime() -> Model {
        let p = RegimeParams::new(
            0.7,
            0.3,
            [[0.9, 0.1], [0.2, 0.8]],
            Some([2.0 / 3.0, 1.0 / 3.0]),
        )
        .unwrap();
        Model::RegimeSwitching(RegimeSwitching::new(p).unwrap())
    }

    #[test]
    fn iid_pair_of_heads() {
        let p = joint_exact(
            &Model::IidUniformBernoulli(IidUniformBernoulli),
            &CylinderEvent::point(&[1.0, 1.0]),
        );
        assert_eq!(p.unwrap(), 0.25);
    }

    #[test]
    fn frozen_deterministic_regimes() {
        let p = RegimeParams::new(1.0, 0.0, [[1.0, 0.0], [0.0, 1.0]], Some([0.5, 0.5])).unwrap();
        let model = Model::RegimeSwitching(RegimeSwitching::new(p).unwrap());
        assert_eq!(
            joint_exact(&model, &CylinderEvent::point(&[1.0, 1.0])).unwrap(),
            0.5
        );
    }

    #[test]
    fn four_term_regime_sum() {
        // μμ, μλ, λμ, λλ terms written out by hand
        let (mu, la, pm, pl) = (0.7, 0.3, 2.0 / 3.0, 1.0 / 3.0);
        let hand =
            mu * mu * pm * 0.9 + mu * la * pm * 0.1 + la * mu * pl * 0.2 + la * la * pl * 0.8;
        let got = joint_exact(&derived_regime(), &CylinderEvent::point(&[1.0, 1.0])).unwrap();
        assert!((got - hand).abs() < 1e-15);
        assert!((got - 0.346).abs() < 1e-12);
    }

    #[test]
    fn exchangeable_uniform_four_heads() {
        let model =
            Model::ExchangeableBernoulli(ExchangeableBernoulli::new(Prior::Uniform).unwrap());
        let got = joint_exact(&model, &CylinderEvent::point(&[1.0; 4])).unwrap();
        assert!((got - 0.2).abs() < 1e-10);
    }

    #[test]
    fn errors() {
        let sub = Model::SubmartingaleCoin(SubmartingaleCoin);
        assert_eq!(
            joint_exact(&sub, &CylinderEvent::point(&[1.0])),
            Err(OracleError::UnsupportedModel(ModelId::SubmartingaleCoin))
        );
        let iid = Model::IidUniformBernoulli(IidUniformBernoulli);
        let long = CylinderEvent::new(vec![(21, vec![1.0])]).unwrap();
        assert_eq!(joint_exact(&iid, &long), Err(OracleError::TooLong(21)));
        assert_eq!(
            joint_exact(&iid, &CylinderEvent::point(&[-1.0])),
            Err(OracleError::StateOutsideSpace {
                index: 0,
                state: -1.0
            })
        );
        assert_eq!(
            CylinderEvent::new(vec![(0, vec![1.0]), (0, vec![0.0])]),
            Err(OracleError::DuplicateIndex(0))
        );
        assert_eq!(
            CylinderEvent::new(vec![(2, vec![])]),
            Err(OracleError::EmptySubset(2))
        );
    }

    #[test]
    fn enumeration_cap_is_inclusive() {
        let full = CylinderEvent::new(vec![(MAX_EVENT_INDEX, vec![1.0])]).unwrap();
        let p = joint_exact(&derived_regime(), &full).unwrap();
        assert!((p - (0.7 * 2.0 / 3.0 + 0.3 / 3.0)).abs() < 1e-12, "{p:e}");
    }

    #[test]
    fn stationary_vectors() {
        assert_eq!(
            stationary_vector([[0.5, 0.5], [0.5, 0.5]]).unwrap(),
            [0.5, 0.5]
        );
        let pi = stationary_vector([[0.9, 0.1], [0.2, 0.8]]).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-15 && (pi[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            stationary_vector([[1.0, 0.0], [0.0, 1.0]]),
            Err(OracleError::ReducibleChain)
        );
    }

    #[test]
    fn ergodic_limits() {
        let Model::RegimeSwitching(m) = derived_regime() else {
            unreachable!()
        };
        let up = regime_ergodic_limit(m.params(), &Observable::Indicator { state: 1.0 }).unwrap();
        assert!((up - (0.7 * 2.0 / 3.0 + 0.3 * 1.0 / 3.0)).abs() < 1e-15);
        let one = regime_ergodic_limit(m.params(), &Observable::Constant { value: 1.0 }).unwrap();
        assert!((one - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partitions_enumerate_everything() {
        assert_eq!(full_partition(&[0.0, 1.0], 3).len(), 8);
        assert_eq!(all_cylinders(&[0.0, 1.0], 2).len(), 9);
        assert_eq!(
            full_partition(&[0.0, 1.0], 2)[1],
            CylinderEvent::point(&[0.0, 1.0])
        );
    }
}
