use serde::{Deserialize, Serialize};

use crate::measure::{BaseLaw, Measure, PushforwardMeasure};
use crate::rng::Stream;

use super::{check_horizon, LatentPath, ModelError, ModelId, ProductDisintegration, StateSpace};

/// Largest tolerated bound on the neglected tail of the stationary series.
pub const TRUNCATION_TAIL_BOUND: f64 = 1e-10;

/// Parameters of `H_t = α + βH_{t-1} + W_t`, `X_t = e^{H_t/2} Z_t` with
/// `W ~ U[-c_w, c_w]` and `Z ~ U[-c_z, c_z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvParams {
    pub alpha: f64,
    pub beta: f64,
    pub c_w: f64,
    pub c_z: f64,
    /// Depth `K` of the series `H₀ = α/(1-β) + Σ_{k=0..K} β^k W_{-k}`.
    pub truncation: usize,
}

impl Default for SvParams {
    fn default() -> Self {
        Self::new(0.0, 0.9, 0.5, 1.0, None).expect("defaults are valid")
    }
}

impl SvParams {
    /// Validates the parameters; `truncation = None` picks the smallest
    /// depth whose tail bound is at most [`TRUNCATION_TAIL_BOUND`].
    pub fn new(
        alpha: f64,
        beta: f64,
        c_w: f64,
        c_z: f64,
        truncation: Option<usize>,
    ) -> Result<Self, ModelError> {
        if !alpha.is_finite() {
            return Err(ModelError::NonFinite {
                name: "alpha",
                value: alpha,
            });
        }
        if !(beta.abs() < 1.0) {
            return Err(ModelError::NonStationaryVolatility(beta));
        }
        for (name, value) in [("c_w", c_w), ("c_z", c_z)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        let truncation = match truncation {
            Some(depth) => {
                let tail = tail_bound(beta, c_w, depth);
                if depth == 0 || tail > TRUNCATION_TAIL_BOUND {
                    return Err(ModelError::TruncationTooShort { depth, tail });
                }
                depth
            }
            None => (1..)
                .find(|&k| tail_bound(beta, c_w, k) <= TRUNCATION_TAIL_BOUND)
                .expect("|beta| < 1"),
        };
        Ok(Self {
            alpha,
            beta,
            c_w,
            c_z,
            truncation,
        })
    }

    pub fn stationary_mean(&self) -> f64 {
        self.alpha / (1.0 - self.beta)
    }

    /// Almost-sure bound on `|H_t|`.
    pub fn log_volatility_bound(&self) -> f64 {
        (self.alpha.abs() + self.c_w) / (1.0 - self.beta.abs())
    }

    pub fn innovation_law(&self) -> BaseLaw {
        BaseLaw::Uniform {
            half_width: self.c_z,
        }
    }

    fn shock(&self, stream: &mut Stream) -> f64 {
        (2.0 * stream.next_uniform() - 1.0) * self.c_w
    }

    /// One draw of the truncated stationary series for `H₀`.
    pub fn sample_stationary_h0(&self, stream: &mut Stream) -> f64 {
        let mut weight = 1.0;
        let mut series = 0.0;
        for _ in 0..=self.truncation {
            series += weight * self.shock(stream);
            weight *= self.beta;
        }
        self.stationary_mean() + series
    }
}

/// `|β|^{K+1} c_w / (1 - |β|)`.
fn tail_bound(beta: f64, c_w: f64, depth: usize) -> f64 {
    let b = beta.abs();
    b.powi(depth as i32 + 1) * c_w / (1.0 - b)
}

/// Stochastic volatility returns with compactly supported innovations.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticVolatility {
    params: SvParams,
}

impl StochasticVolatility {
    pub fn new(params: SvParams) -> Self {
        Self { params }
    }

    pub fn try_new(params: SvParams) -> Result<Self, ModelError> {
        let checked = SvParams::new(
            params.alpha,
            params.beta,
            params.c_w,
            params.c_z,
            Some(params.truncation),
        )?;
        Ok(Self::new(checked))
    }

    pub fn params(&self) -> &SvParams {
        &self.params
    }

    /// `(H₀, …, H_{n-1})`.
    pub fn sample_log_volatility(&self, n: usize, stream: &mut Stream) -> Vec<f64> {
        let p = &self.params;
        let mut path = Vec::with_capacity(n);
        let mut h = p.sample_stationary_h0(stream);
        for t in 0..n {
            if t > 0 {
                h = p.alpha + p.beta * h + p.shock(stream);
            }
            path.push(h);
        }
        path
    }

    /// `φ(h, ·)`, the law of `e^{h/2} Z`.
    pub fn conditional_law(&self, h: f64) -> Result<PushforwardMeasure, ModelError> {
        Ok(PushforwardMeasure::new(
            self.params.innovation_law(),
            (0.5 * h).exp(),
        )?)
    }
}

impl ProductDisintegration for StochasticVolatility {
    fn id(&self) -> ModelId {
        ModelId::StochasticVolatility
    }

    fn state_space(&self) -> StateSpace {
        let edge = (0.5 * self.params.log_volatility_bound()).exp() * self.params.c_z;
        StateSpace::Interval {
            lo: -edge,
            hi: edge,
        }
    }

    fn sample_latent(&self, n: usize, stream: &mut Stream) -> Result<LatentPath, ModelError> {
        check_horizon(n)?;
        let measures = self
            .sample_log_volatility(n, stream)
            .into_iter()
            .map(|h| self.conditional_law(h).map(Measure::Pushforward))
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
    use crate::models::{sample_observed, sample_path};
    use crate::rng::StreamKey;
    use crate::stats::{mean, sample_variance};

    #[test]
    fn default_truncation_meets_tail_bound() {
        let p = SvParams::default();
        assert_eq!((p.alpha, p.beta, p.c_w, p.c_z), (0.0, 0.9, 0.5, 1.0));
        assert!(tail_bound(0.9, 0.5, p.truncation) <= 1e-10);
        assert!(tail_bound(0.9, 0.5, p.truncation - 1) > 1e-10);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(matches!(
            SvParams::new(0.0, 1.0, 0.5, 1.0, None),
            Err(ModelError::NonStationaryVolatility(_))
        ));
        assert!(matches!(
            SvParams::new(0.0, 0.5, 0.0, 1.0, None),
            Err(ModelError::NonPositive { .. })
        ));
        assert!(matches!(
            SvParams::new(0.0, 0.9, 0.5, 1.0, Some(10)),
            Err(ModelError::TruncationTooShort { depth: 10, .. })
        ));
        assert!(SvParams::new(0.0, -0.5, 0.5, 1.0, Some(40)).is_ok());
    }

    #[test]
    fn decoupled_case_has_mean_alpha() {
        let p = SvParams::new(0.3, 0.0, 0.5, 1.0, None).unwrap();
        let model = StochasticVolatility::new(p);
        let h = model.sample_log_volatility(100_000, &mut StreamKey::new(3, 0).stream());
        let sigma = 0.5 / 3f64.sqrt() / (1e5f64).sqrt();
        assert!((mean(&h) - 0.3).abs() < 3.0 * sigma);
    }

    #[test]
    fn log_volatility_is_stationary_and_bounded() {
        let p = SvParams::new(0.2, 0.9, 0.5, 1.0, None).unwrap();
        let model = StochasticVolatility::new(p);
        let bound = p.log_volatility_bound();
        let reps = 400;
        let means: Vec<f64> = (0..reps)
            .map(|rep| {
                let h = model.sample_log_volatility(10_001, &mut StreamKey::new(9, rep).stream());
                assert!(h.iter().all(|x| x.abs() <= bound));
                mean(&h)
            })
            .collect();
        // path means are iid across replications; compare their average with α/(1-β)
        let grand = mean(&means);
        let se = (sample_variance(&means) / reps as f64).sqrt();
        assert!(
            (grand - p.stationary_mean()).abs() < 3.0 * se,
            "grand {grand} se {se}"
        );
    }

    #[test]
    fn forced_zero_innovations_give_zero_returns() {
        let model = StochasticVolatility::new(SvParams::default());
        let latent = model
            .sample_latent(25, &mut StreamKey::new(1, 1).stream())
            .unwrap();
        let obs = sample_observed(&latent, &mut Stream::constant(0.5));
        assert!(obs.points.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn returns_are_centered_with_sign_of_innovation() {
        let model = StochasticVolatility::new(SvParams::default());
        let key = StreamKey::new(44, 0);
        let (latent, obs) = sample_path(&model, 100_000, key).unwrap();
        let mut z_stream = key.observed().stream();
        for (m, x) in latent.measures.iter().zip(&obs.points) {
            let z = (2.0 * z_stream.next_uniform() - 1.0) * model.params().c_z;
            let Measure::Pushforward(pf) = m else {
                panic!("pushforward expected")
            };
            assert_eq!(*x, pf.scale * z);
            assert_eq!(x.signum(), z.signum());
        }
        let se = (sample_variance(&obs.points) / 1e5).sqrt();
        // serial dependence only enters through the scale, so the iid se is the right order
        assert!(mean(&obs.points).abs() < 3.0 * se);
    }
}
