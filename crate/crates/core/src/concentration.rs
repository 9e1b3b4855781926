//! Conditional Hoeffding-type checks for `Sₙ = Σ_{i<n} Xᵢ` on `[0, 1]`.
//!
//! Each replication samples a path two-stage and records `Sₙ` together with
//! `E(Sₙ | ξ) = Σ ∫ x ξᵢ(dx)`. The bound under test is
//!
//! `P(Sₙ ≥ t | E(Sₙ|ξ) < t) ≤ exp(-2t²/n)`,
//!
//! estimated by rejection: only replications meeting the condition count.
//! Alongside it every report carries the centered form
//! `P(Sₙ - E(Sₙ|ξ) ≥ t) ≤ exp(-2t²/n)`, which is what conditional
//! independence delivers through the classical inequality.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::MeasureError;
use crate::models::{sample_path, LatentPath, Model, ModelError, ModelId, ProductDisintegration};
use crate::replicate::try_replicate;
use crate::rng::StreamKey;
use crate::stats::NeumaierSum;

pub const MIN_REPLICATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConcentrationError {
    #[error("threshold t must be positive and finite, got {0}")]
    BadThreshold(f64),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("need at least {MIN_REPLICATIONS} replications, got {0}")]
    TooFewReplications(usize),
    #[error("model {0} has states outside [0, 1]")]
    StateSpaceOutsideUnitInterval(ModelId),
    #[error("latent measure {index} has support [{lo}, {hi}], outside [0, 1]")]
    MeasureOutsideUnitInterval { index: usize, lo: f64, hi: f64 },
    #[error("condition E(S_n | xi) < t = {t} was never met in {replications} replications")]
    ConditionNeverMet { t: f64, replications: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// `exp(-2t²/n)`.
pub fn hoeffding_bound(n: usize, t: f64) -> f64 {
    (-2.0 * t * t / n as f64).exp()
}

/// `E(Sₙ | ξ) = Σᵢ ∫ x ξᵢ(dx)` for a latent path on `[0, 1]`.
pub fn conditional_mean(latent: &LatentPath) -> Result<f64, ConcentrationError> {
    let mut sum = NeumaierSum::new();
    for (index, m) in latent.measures.iter().enumerate() {
        let (lo, hi) = m.support_hull();
        if !(lo >= 0.0 && hi <= 1.0) {
            return Err(ConcentrationError::MeasureOutsideUnitInterval { index, lo, hi });
        }
        sum += m.mean()?;
    }
    Ok(sum.total())
}

/// Run parameters shared by [`hoeffding_check`] and [`tail_decomposition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSetup {
    pub n: usize,
    /// Threshold in the units of `Sₙ`.
    pub t: f64,
    pub replications: usize,
    /// Replication `r` samples under `StreamKey::new(seed, r)`.
    pub seed: u64,
    pub strict: bool,
}

/// One replication: the realized sum and its conditional mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumSample {
    pub sum: f64,
    pub conditional_mean: f64,
}

/// Replicated `(Sₙ, E(Sₙ|ξ))` pairs for one model and horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSamples {
    pub model: ModelId,
    pub n: usize,
    pub seed: u64,
    /// Every latent measure in every replication was a point mass.
    pub point_mass_latent: bool,
    pub samples: Vec<SumSample>,
}

impl SumSamples {
    pub fn draw(
        model: &Model,
        n: usize,
        replications: usize,
        seed: u64,
    ) -> Result<Self, ConcentrationError> {
        if n == 0 {
            return Err(ConcentrationError::ZeroHorizon);
        }
        if replications < MIN_REPLICATIONS {
            return Err(ConcentrationError::TooFewReplications(replications));
        }
        if !model.state_space().is_subset_of_unit_interval() {
            return Err(ConcentrationError::StateSpaceOutsideUnitInterval(
                model.id(),
            ));
        }
        let rows = try_replicate(
            replications,
            |r| -> Result<(SumSample, bool), ConcentrationError> {
                let (latent, observed) = sample_path(model, n, StreamKey::new(seed, r))?;
                let sum: NeumaierSum = observed.points.iter().copied().collect();
                let point_mass = latent.measures.iter().all(|m| m.is_point_mass());
                Ok((
                    SumSample {
                        sum: sum.total(),
                        conditional_mean: conditional_mean(&latent)?,
                    },
                    point_mass,
                ))
            },
        )?;
        let point_mass_latent = rows.iter().all(|(_, p)| *p);
        Ok(Self {
            model: model.id(),
            n,
            seed,
            point_mass_latent,
            samples: rows.into_iter().map(|(s, _)| s).collect(),
        })
    }

    fn frequency(&self, event: impl Fn(&SumSample) -> bool) -> f64 {
        self.samples.iter().filter(|s| event(s)).count() as f64 / self.samples.len() as f64
    }

    pub fn report(&self, t: f64, strict: bool) -> Result<ConcentrationReport, ConcentrationError> {
        check_threshold(t)?;
        let total = self.samples.len();
        let bound = hoeffding_bound(self.n, t);
        let in_condition: Vec<&SumSample> = self
            .samples
            .iter()
            .filter(|s| s.conditional_mean < t)
            .collect();
        let exceedances = in_condition.iter().filter(|s| s.sum >= t).count();
        let counts = Counts {
            total,
            in_condition: in_condition.len(),
            exceedances,
        };
        if strict && counts.in_condition == 0 {
            return Err(ConcentrationError::ConditionNeverMet {
                t,
                replications: total,
            });
        }
        let (empirical_conditional, slack) = if counts.in_condition == 0 {
            (0.0, 0.0)
        } else {
            let r = counts.in_condition as f64;
            (
                exceedances as f64 / r,
                3.0 * (bound * (1.0 - bound) / r).sqrt(),
            )
        };
        let status = if self.point_mass_latent {
            CheckStatus::Vacuous {
                reason: Vacuity::PointMassDisintegration,
            }
        } else if counts.in_condition == 0 {
            CheckStatus::Vacuous {
                reason: Vacuity::ConditionNeverMet,
            }
        } else if empirical_conditional <= bound + slack {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        let centered_tail = self.frequency(|s| s.sum - s.conditional_mean >= t);
        let centered_slack = 3.0 * (bound * (1.0 - bound) / total as f64).sqrt();
        Ok(ConcentrationReport {
            model: self.model,
            n: self.n,
            t,
            seed: self.seed,
            bound,
            counts,
            empirical_conditional,
            slack,
            status,
            decomposition_tail: self.frequency(|s| s.conditional_mean >= t),
            total_tail: self.frequency(|s| s.sum >= t),
            centered: CenteredTail {
                tail: centered_tail,
                slack: centered_slack,
                passed: centered_tail <= bound + centered_slack,
            },
        })
    }

    pub fn decomposition(&self, t: f64) -> Result<TailDecomposition, ConcentrationError> {
        check_threshold(t)?;
        let r = self.samples.len() as f64;
        let bound = hoeffding_bound(self.n, t);
        let total_tail = self.frequency(|s| s.sum >= t);
        let latent_tail = self.frequency(|s| s.conditional_mean >= t);
        let slack = 3.0
            * ((total_tail * (1.0 - total_tail) + latent_tail * (1.0 - latent_tail)) / r).sqrt();
        let bound_plus_latent_tail = bound + latent_tail;
        // E[exp(-2(t - E(Sₙ|ξ))²/n); E(Sₙ|ξ) < t] + P(E(Sₙ|ξ) ≥ t)
        let centered_sum: NeumaierSum = self
            .samples
            .iter()
            .filter(|s| s.conditional_mean < t)
            .map(|s| hoeffding_bound(self.n, t - s.conditional_mean))
            .collect();
        let centered_bound = centered_sum.total() / r + latent_tail;
        Ok(TailDecomposition {
            model: self.model,
            n: self.n,
            t,
            seed: self.seed,
            replications: self.samples.len(),
            bound,
            total_tail,
            latent_tail,
            bound_plus_latent_tail,
            slack,
            passed: total_tail <= bound_plus_latent_tail + slack,
            centered_bound,
            centered_passed: total_tail <= centered_bound + slack,
        })
    }
}

fn check_threshold(t: f64) -> Result<(), ConcentrationError> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(ConcentrationError::BadThreshold(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub in_condition: usize,
    pub exceedances: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vacuity {
    /// No replication satisfied `E(Sₙ|ξ) < t`.
    ConditionNeverMet,
    /// `ξᵢ = δ_{Xᵢ}`, so `E(Sₙ|ξ) = Sₙ` and the left side is zero by construction.
    PointMassDisintegration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Vacuous { reason: Vacuity },
}

/// Empirical `P(Sₙ - E(Sₙ|ξ) ≥ t)` against the same bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenteredTail {
    pub tail: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub model: ModelId,
    pub n: usize,
    pub t: f64,
    pub seed: u64,
    pub bound: f64,
    pub counts: Counts,
    /// Frequency of `Sₙ ≥ t` among replications with `E(Sₙ|ξ) < t`; 0 when none qualify.
    pub empirical_conditional: f64,
    /// `3·sqrt(bound(1 - bound)/R_cond)`.
    pub slack: f64,
    pub status: CheckStatus,
    /// Frequency of `E(Sₙ|ξ) ≥ t`.
    pub decomposition_tail: f64,
    /// Frequency of `Sₙ ≥ t`.
    pub total_tail: f64,
    pub centered: CenteredTail,
}

impl ConcentrationReport {
    pub fn is_violation(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDecomposition {
    pub model: ModelId,
    pub n: usize,
    pub t: f64,
    pub seed: u64,
    pub replications: usize,
    pub bound: f64,
    pub total_tail: f64,
    pub latent_tail: f64,
    pub bound_plus_latent_tail: f64,
    /// `3·sqrt((p_tot(1-p_tot) + p_lat(1-p_lat))/R)`.
    pub slack: f64,
    /// `total_tail ≤ bound_plus_latent_tail + slack`.
    pub passed: bool,
    /// Same decomposition with the bound applied at distance `t - E(Sₙ|ξ)`.
    pub centered_bound: f64,
    pub centered_passed: bool,
}

pub fn hoeffding_check(
    model: &Model,
    setup: &ConcentrationSetup,
) -> Result<ConcentrationReport, ConcentrationError> {
    check_threshold(setup.t)?;
    SumSamples::draw(model, setup.n, setup.replications, setup.seed)?.report(setup.t, setup.strict)
}

pub fn tail_decomposition(
    model: &Model,
    setup: &ConcentrationSetup,
) -> Result<TailDecomposition, ConcentrationError> {
    check_threshold(setup.t)?;
    let samples = SumSamples::draw(model, setup.n, setup.replications, setup.seed)?;
    if setup.strict
        && samples
            .samples
            .iter()
            .all(|s| s.conditional_mean >= setup.t)
    {
        return Err(ConcentrationError::ConditionNeverMet {
            t: setup.t,
            replications: setup.replications,
        });
    }
    samples.decomposition(setup.t)
}
