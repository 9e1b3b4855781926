//! Probability measures on finite state spaces and on compact intervals.
//!
//! States are real labels (`f64`). Finite measures are validated at
//! construction and never renormalized: a weight vector that does not sum to
//! one within [`NORMALIZATION_TOLERANCE`] is rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::observable::Observable;
use crate::rng::Stream;

pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("support has {support} labels but {weights} weights were given")]
    LengthMismatch { support: usize, weights: usize },
    #[error("a finite measure needs a nonempty support")]
    EmptySupport,
    #[error("weight {weight} at index {index} is negative or not finite")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("weights sum to {sum}, not 1 within {NORMALIZATION_TOLERANCE:e}")]
    NotNormalized { sum: f64 },
    #[error("support label {0} appears more than once")]
    DuplicateLabel(f64),
    #[error("support label {0} is not finite")]
    NonFiniteLabel(f64),
    #[error("observable is undefined at support point {0}")]
    UndefinedObservable(f64),
    #[error("pushforward scale {0} must be finite and positive")]
    InvalidScale(f64),
    #[error("base law half-width {0} must be finite and positive")]
    InvalidHalfWidth(f64),
}

/// A probability vector over finitely many labelled states.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    support: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl FiniteMeasure {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        if support.len() != weights.len() {
            return Err(MeasureError::LengthMismatch {
                support: support.len(),
                weights: weights.len(),
            });
        }
        if support.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        for (index, &weight) in weights.iter().enumerate() {
            if !(weight >= 0.0 && weight.is_finite()) {
                return Err(MeasureError::InvalidWeight { index, weight });
            }
        }
        for (i, &label) in support.iter().enumerate() {
            if !label.is_finite() {
                return Err(MeasureError::NonFiniteLabel(label));
            }
            if support[..i].contains(&label) {
                return Err(MeasureError::DuplicateLabel(label));
            }
        }
        let cumulative: Vec<f64> = weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        let sum = *cumulative.last().expect("nonempty");
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(MeasureError::NotNormalized { sum });
        }
        let last_positive = weights
            .iter()
            .rposition(|w| *w > 0.0)
            .expect("weights sum to one");
        Ok(Self {
            support,
            weights,
            cumulative,
            last_positive,
        })
    }

    /// The two-point measure `{low -> 1 - p, high -> p}`.
    pub fn two_point(low: f64, high: f64, p: f64) -> Result<Self, MeasureError> {
        Self::new(vec![low, high], vec![1.0 - p, p])
    }

    /// Bernoulli(p) on {0, 1}.
    pub fn bernoulli(p: f64) -> Result<Self, MeasureError> {
        Self::two_point(0.0, 1.0, p)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `m({x})`; zero off the support.
    pub fn weight_of(&self, x: f64) -> f64 {
        self.support
            .iter()
            .position(|s| *s == x)
            .map_or(0.0, |i| self.weights[i])
    }

    /// `m(A)` for a finite set `A`.
    pub fn mass(&self, set: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .filter(|(s, _)| set.contains(s))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn integrate_with(&self, f: impl Fn(f64) -> Option<f64>) -> Result<f64, MeasureError> {
        self.support
            .iter()
            .zip(&self.weights)
            .try_fold(0.0, |acc, (&x, &w)| {
                let fx = f(x).ok_or(MeasureError::UndefinedObservable(x))?;
                Ok(acc + w * fx)
            })
    }

    pub fn integrate(&self, f: &Observable) -> Result<f64, MeasureError> {
        self.integrate_with(|x| f.eval(x))
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum()
    }

    /// Inverse-CDF draw using one uniform from `stream`.
    pub fn sample(&self, stream: &mut Stream) -> f64 {
        let u = stream.next_uniform();
        let index = self
            .cumulative
            .partition_point(|c| *c <= u)
            .min(self.last_positive);
        self.support[index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub atom: f64,
}

impl PointMass {
    pub fn new(atom: f64) -> Self {
        Self { atom }
    }

    pub fn integrate(&self, f: &Observable) -> Result<f64, MeasureError> {
        f.eval(self.atom)
            .ok_or(MeasureError::UndefinedObservable(self.atom))
    }
}

/// Innovation laws available as pushforward bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum BaseLaw {
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
}

impl BaseLaw {
    pub fn uniform(half_width: f64) -> Result<Self, MeasureError> {
        if half_width.is_finite() && half_width > 0.0 {
            Ok(BaseLaw::Uniform { half_width })
        } else {
            Err(MeasureError::InvalidHalfWidth(half_width))
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            BaseLaw::Uniform { .. } => "uniform",
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            BaseLaw::Uniform { half_width } => (-half_width, half_width),
        }
    }

    /// Mass of the closed interval `[lo, hi]`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            BaseLaw::Uniform { half_width } => {
                let a = lo.max(-half_width);
                let b = hi.min(half_width);
                if b <= a {
                    0.0
                } else {
                    (b - a) / (2.0 * half_width)
                }
            }
        }
    }

    pub fn sample(&self, stream: &mut Stream) -> f64 {
        match *self {
            BaseLaw::Uniform { half_width } => (2.0 * stream.next_uniform() - 1.0) * half_width,
        }
    }

    /// `E f(Z)` for an `f` that is a polynomial of degree <= 9 between
    /// consecutive breakpoints. Exact up to rounding under that assumption.
    fn expect_piecewise(
        &self,
        f: impl Fn(f64) -> Option<f64>,
        breakpoints: impl Iterator<Item = f64>,
    ) -> Result<f64, MeasureError> {
        let BaseLaw::Uniform { half_width } = *self;
        let (lo, hi) = (-half_width, half_width);
        for end in [lo, hi] {
            f(end).ok_or(MeasureError::UndefinedObservable(end))?;
        }
        let mut cuts: Vec<f64> = std::iter::once(lo)
            .chain(breakpoints.filter(|b| *b > lo && *b < hi))
            .chain(std::iter::once(hi))
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += gauss_legendre(&f, w[0], w[1])?;
        }
        Ok(total / (2.0 * half_width))
    }
}

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn gauss_legendre(f: &impl Fn(f64) -> Option<f64>, a: f64, b: f64) -> Result<f64, MeasureError> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let x = mid + half * node;
        acc += weight * f(x).ok_or(MeasureError::UndefinedObservable(x))?;
    }
    Ok(acc * half)
}

/// The law of `scale * Z` where `Z` follows `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushforwardMeasure {
    pub base: BaseLaw,
    pub scale: f64,
}

impl PushforwardMeasure {
    pub fn new(base: BaseLaw, scale: f64) -> Result<Self, MeasureError> {
        if scale.is_finite() && scale > 0.0 {
            Ok(Self { base, scale })
        } else {
            Err(MeasureError::InvalidScale(scale))
        }
    }

    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        self.base.interval_mass(lo / self.scale, hi / self.scale)
    }

    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        (lo * self.scale, hi * self.scale)
    }

    /// `E f(scale * Z)` by Gauss-Legendre quadrature over the base law, split
    /// at the observable's breakpoints.
    pub fn integrate(&self, f: &Observable) -> Result<f64, MeasureError> {
        let s = self.scale;
        self.base.expect_piecewise(
            |z| f.eval(s * z),
            f.breakpoints().into_iter().map(|b| b / s),
        )
    }

    pub fn sample(&self, stream: &mut Stream) -> f64 {
        self.scale * self.base.sample(stream)
    }
}

/// Any of the measures a latent path may hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Finite(FiniteMeasure),
    Point(PointMass),
    Pushforward(PushforwardMeasure),
}

impl Measure {
    pub fn integrate(&self, f: &Observable) -> Result<f64, MeasureError> {
        match self {
            Measure::Finite(m) => m.integrate(f),
            Measure::Point(m) => m.integrate(f),
            Measure::Pushforward(m) => m.integrate(f),
        }
    }

    pub fn mean(&self) -> Result<f64, MeasureError> {
        match self {
            Measure::Finite(m) => Ok(m.mean()),
            Measure::Point(m) => Ok(m.atom),
            Measure::Pushforward(m) => m.integrate(&Observable::Identity),
        }
    }

    pub fn sample(&self, stream: &mut Stream) -> f64 {
        match self {
            Measure::Finite(m) => m.sample(stream),
            Measure::Point(m) => m.atom,
            Measure::Pushforward(m) => m.sample(stream),
        }
    }

    /// Smallest closed interval containing the support.
    pub fn support_hull(&self) -> (f64, f64) {
        match self {
            Measure::Finite(m) => m
                .support()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(*x), hi.max(*x))
                }),
            Measure::Point(m) => (m.atom, m.atom),
            Measure::Pushforward(m) => m.support(),
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, Measure::Point(_))
    }
}

impl From<FiniteMeasure> for Measure {
    fn from(m: FiniteMeasure) -> Self {
        Measure::Finite(m)
    }
}

impl From<PointMass> for Measure {
    fn from(m: PointMass) -> Self {
        Measure::Point(m)
    }
}

impl From<PushforwardMeasure> for Measure {
    fn from(m: PushforwardMeasure) -> Self {
        Measure::Pushforward(m)
    }
}
