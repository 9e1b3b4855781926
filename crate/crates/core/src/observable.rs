//! Real-valued observables `f` on a state space.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("piecewise-linear observable needs at least two knots, got {0}")]
    TooFewKnots(usize),
    #[error("piecewise-linear knots must have strictly increasing abscissae (knot {0})")]
    UnsortedKnots(usize),
    #[error("interval indicator needs lo <= hi, got [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("observable parameters must not be NaN")]
    NotANumber,
}

/// The observable menu: indicators, the identity, the square, constants and
/// user-defined piecewise-linear maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    /// `1{x = state}`.
    Indicator {
        state: f64,
    },
    /// `1{lo <= x <= hi}`; either end may be infinite.
    Interval {
        lo: f64,
        hi: f64,
    },
    Identity,
    Square,
    Constant {
        value: f64,
    },
    /// Linear interpolation between knots `(x, y)`. Undefined outside the
    /// first and last abscissa.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

impl Observable {
    pub fn validate(&self) -> Result<(), ObservableError> {
        match self {
            Observable::Indicator { state } if state.is_nan() => Err(ObservableError::NotANumber),
            Observable::Constant { value } if value.is_nan() => Err(ObservableError::NotANumber),
            Observable::Interval { lo, hi } => {
                if lo.is_nan() || hi.is_nan() {
                    Err(ObservableError::NotANumber)
                } else if lo > hi {
                    Err(ObservableError::EmptyInterval { lo: *lo, hi: *hi })
                } else {
                    Ok(())
                }
            }
            Observable::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(ObservableError::TooFewKnots(knots.len()));
                }
                if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return Err(ObservableError::NotANumber);
                }
                match knots.windows(2).position(|w| w[0].0 >= w[1].0) {
                    Some(i) => Err(ObservableError::UnsortedKnots(i + 1)),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// `f(x)`, or `None` where `f` is undefined.
    pub fn eval(&self, x: f64) -> Option<f64> {
        match self {
            Observable::Indicator { state } => Some(if x == *state { 1.0 } else { 0.0 }),
            Observable::Interval { lo, hi } => Some(if *lo <= x && x <= *hi { 1.0 } else { 0.0 }),
            Observable::Identity => Some(x),
            Observable::Square => Some(x * x),
            Observable::Constant { value } => Some(*value),
            Observable::PiecewiseLinear { knots } => interpolate(knots, x),
        }
    }

    /// Points where `f` fails to be a polynomial of degree <= 2. Between two
    /// consecutive breakpoints the observable is smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Observable::Indicator { state } => vec![*state],
            Observable::Interval { lo, hi } => {
                [*lo, *hi].into_iter().filter(|v| v.is_finite()).collect()
            }
            Observable::PiecewiseLinear { knots } => knots.iter().map(|(x, _)| *x).collect(),
            Observable::Identity | Observable::Square | Observable::Constant { .. } => Vec::new(),
        }
    }

    /// Short stable identifier used in trace files.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

fn interpolate(knots: &[(f64, f64)], x: f64) -> Option<f64> {
    let (first, last) = (knots.first()?, knots.last()?);
    if !(first.0 <= x && x <= last.0) {
        return None;
    }
    // index of the first knot strictly right of x
    let right = knots.partition_point(|(kx, _)| *kx <= x);
    if right == knots.len() {
        return Some(last.1);
    }
    let (x0, y0) = knots[right - 1];
    let (x1, y1) = knots[right];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Indicator { state } => write!(f, "indicator({state})"),
            Observable::Interval { lo, hi } => write!(f, "interval({lo},{hi})"),
            Observable::Identity => f.write_str("identity"),
            Observable::Square => f.write_str("square"),
            Observable::Constant { value } => write!(f, "constant({value})"),
            Observable::PiecewiseLinear { knots } => write!(f, "piecewise_linear({})", knots.len()),
        }
    }
}
