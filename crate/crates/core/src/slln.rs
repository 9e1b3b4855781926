//! Running-mean diagnostics for `(1/n) Σ (f(Xᵢ) - ξᵢ(f)) → 0`.
//!
//! A [`ConvergenceTrace`] records, at each checkpoint `n`, the running mean of
//! `f(Xᵢ)`, the running mean of `ξᵢ(f)` and their gap. Sums are compensated so
//! the gap at `n = 10⁵` is exact to well below 1e-12.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::MeasureError;
use crate::models::{
    sample_path, LatentPath, Model, ModelError, ModelId, ObservedPath, ProductDisintegration,
    StochasticVolatility, SvParams,
};
use crate::observable::{Observable, ObservableError};
use crate::replicate::try_replicate;
use crate::rng::StreamKey;
use crate::stats::{format_real, median, sample_variance, NeumaierSum};

pub const DEFAULT_CHECKPOINTS: [usize; 4] = [100, 1_000, 10_000, 100_000];

/// Two running means count as stabilized when their last two checkpoint
/// values differ by less than this.
pub const STABILIZATION_TOLERANCE: f64 = 5e-3;

/// Number of independent `H₀` draws behind the direct Monte Carlo estimate of
/// `E g(H₀)`.
pub const SV_DIRECT_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SllnError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("checkpoints must be nonempty, positive, strictly increasing and at most the horizon {horizon}")]
    BadCheckpoints { horizon: usize },
    #[error("observable: {0}")]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("observable is undefined at observed point {0}")]
    UndefinedObservable(f64),
    #[error("checkpoints span {found} consecutive decades; at least 3 are needed")]
    TooFewDecades { found: usize },
    #[error("trace set is empty")]
    NoTraces,
    #[error("traces disagree on model, observable or checkpoints")]
    MismatchedTraces,
    #[error("expected model {expected} with observable {observable}, got {found_model} with {found_observable}")]
    WrongSetup {
        expected: ModelId,
        observable: String,
        found_model: ModelId,
        found_observable: String,
    },
    #[error("need at least 2 replications, got {0}")]
    TooFewReplications(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub mean_fx: f64,
    pub mean_xif: f64,
    /// `mean_fx - mean_xif`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub model: ModelId,
    pub key: StreamKey,
    pub observable: String,
    pub checkpoints: Vec<Checkpoint>,
}

impl ConvergenceTrace {
    pub fn terminal(&self) -> &Checkpoint {
        self.checkpoints
            .last()
            .expect("traces have at least one checkpoint")
    }

    pub fn stabilization(&self) -> Stabilization {
        match self.checkpoints.as_slice() {
            [.., a, b] => Stabilization {
                observed: (a.mean_fx - b.mean_fx).abs() < STABILIZATION_TOLERANCE,
                latent: (a.mean_xif - b.mean_xif).abs() < STABILIZATION_TOLERANCE,
            },
            _ => Stabilization {
                observed: false,
                latent: false,
            },
        }
    }
}

/// Whether each running mean settled over the last two checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilization {
    pub observed: bool,
    pub latent: bool,
}

impl Stabilization {
    pub fn agrees(&self) -> bool {
        self.observed == self.latent
    }
}

/// A trace together with the paths it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRun {
    pub trace: ConvergenceTrace,
    pub latent: LatentPath,
    pub observed: ObservedPath,
}

/// Default checkpoints clipped to `horizon`, always ending at `horizon`.
pub fn checkpoints_for(horizon: usize) -> Vec<usize> {
    let mut points: Vec<usize> = DEFAULT_CHECKPOINTS
        .iter()
        .copied()
        .filter(|n| *n < horizon)
        .collect();
    points.push(horizon);
    points
}

fn check_checkpoints(horizon: usize, checkpoints: &[usize]) -> Result<(), SllnError> {
    let increasing = checkpoints.windows(2).all(|w| w[0] < w[1]);
    match (checkpoints.first(), checkpoints.last()) {
        (Some(&first), Some(&last)) if first >= 1 && last <= horizon && increasing => Ok(()),
        _ => Err(SllnError::BadCheckpoints { horizon }),
    }
}

/// Samples one path of length `horizon` under `key` and records running
/// means at `checkpoints`.
pub fn run_trace(
    model: &Model,
    f: &Observable,
    horizon: usize,
    checkpoints: &[usize],
    key: StreamKey,
) -> Result<ConvergenceTrace, SllnError> {
    run_trace_with_paths(model, f, horizon, checkpoints, key).map(|run| run.trace)
}

pub fn run_trace_with_paths(
    model: &Model,
    f: &Observable,
    horizon: usize,
    checkpoints: &[usize],
    key: StreamKey,
) -> Result<TraceRun, SllnError> {
    if horizon == 0 {
        return Err(SllnError::ZeroHorizon);
    }
    check_checkpoints(horizon, checkpoints)?;
    f.validate()?;
    let (latent, observed) = sample_path(model, horizon, key)?;
    let checkpoints = trace_from_paths(f, &latent, &observed, checkpoints)?;
    let trace = ConvergenceTrace {
        model: model.id(),
        key,
        observable: f.id(),
        checkpoints,
    };
    Ok(TraceRun {
        trace,
        latent,
        observed,
    })
}

/// Running means of `f(Xᵢ)` and `ξᵢ(f)` over already sampled paths.
pub fn trace_from_paths(
    f: &Observable,
    latent: &LatentPath,
    observed: &ObservedPath,
    checkpoints: &[usize],
) -> Result<Vec<Checkpoint>, SllnError> {
    check_checkpoints(latent.horizon().min(observed.points.len()), checkpoints)?;
    let mut sum_fx = NeumaierSum::new();
    let mut sum_xif = NeumaierSum::new();
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for (i, (measure, &x)) in latent.measures.iter().zip(&observed.points).enumerate() {
        sum_fx += f.eval(x).ok_or(SllnError::UndefinedObservable(x))?;
        sum_xif += measure.integrate(f)?;
        if next.peek() == Some(&&(i + 1)) {
            let n = i + 1;
            let mean_fx = sum_fx.total() / n as f64;
            let mean_xif = sum_xif.total() / n as f64;
            rows.push(Checkpoint {
                n,
                mean_fx,
                mean_xif,
                gap: mean_fx - mean_xif,
            });
            next.next();
            if next.peek().is_none() {
                break;
            }
        }
    }
    Ok(rows)
}

/// `reps` independent traces; replication `r` uses `StreamKey::new(seed, r)`.
pub fn run_replications(
    model: &Model,
    f: &Observable,
    horizon: usize,
    checkpoints: &[usize],
    seed: u64,
    reps: usize,
) -> Result<Vec<ConvergenceTrace>, SllnError> {
    try_replicate(reps, |r| {
        run_trace(model, f, horizon, checkpoints, StreamKey::new(seed, r))
    })
}

/// Decay requirement between consecutive decades:
/// `median|gap(10n)| <= max(gamma * median|gap(n)|, floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayGuard {
    pub gamma: f64,
    pub floor: f64,
}

impl Default for DecayGuard {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecadeRow {
    pub n: usize,
    pub median_abs_gap: f64,
    /// Allowed value at this decade given the previous one; `None` for the first.
    pub limit: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub passed: bool,
    pub guard: DecayGuard,
    pub replications: usize,
    pub rows: Vec<DecadeRow>,
}

/// Checks that the median absolute gap over replications shrinks decade by
/// decade. Uses the powers of ten shared by every trace; at least three
/// consecutive decades are required.
pub fn gap_decay_check(
    traces: &[ConvergenceTrace],
    guard: DecayGuard,
) -> Result<DecayReport, SllnError> {
    let first = traces.first().ok_or(SllnError::NoTraces)?;
    let same_shape = traces.iter().all(|t| {
        t.model == first.model
            && t.observable == first.observable
            && t.checkpoints
                .iter()
                .map(|c| c.n)
                .eq(first.checkpoints.iter().map(|c| c.n))
    });
    if !same_shape {
        return Err(SllnError::MismatchedTraces);
    }
    let decades: Vec<usize> = first
        .checkpoints
        .iter()
        .enumerate()
        .filter(|(_, c)| is_power_of_ten(c.n))
        .map(|(i, _)| i)
        .collect();
    let steps = decades
        .windows(2)
        .take_while(|w| first.checkpoints[w[1]].n == 10 * first.checkpoints[w[0]].n)
        .count();
    if steps < 3 {
        return Err(SllnError::TooFewDecades { found: steps });
    }
    let mut rows: Vec<DecadeRow> = Vec::with_capacity(steps + 1);
    for &slot in &decades[..=steps] {
        let gaps: Vec<f64> = traces
            .iter()
            .map(|t| t.checkpoints[slot].gap.abs())
            .collect();
        let median_abs_gap = median(&gaps);
        let limit = rows
            .last()
            .map(|prev| (guard.gamma * prev.median_abs_gap).max(guard.floor));
        let ok = limit.is_none_or(|l| median_abs_gap <= l);
        rows.push(DecadeRow {
            n: first.checkpoints[slot].n,
            median_abs_gap,
            limit,
            ok,
        });
    }
    Ok(DecayReport {
        passed: rows.iter().all(|r| r.ok),
        guard,
        replications: traces.len(),
        rows,
    })
}

fn is_power_of_ten(mut n: usize) -> bool {
    if n == 0 {
        return false;
    }
    while n % 10 == 0 {
        n /= 10;
    }
    n == 1
}

/// `(ϑ_N, terminal running mean of 1{X = 1})` for a submartingale-coin run.
/// `ϑ_N` is within `2^-(N+1)` of the almost-sure limit.
pub fn submartingale_limit_estimate(
    trace: &ConvergenceTrace,
    latent: &LatentPath,
) -> Result<(f64, f64), SllnError> {
    let expected_observable = Observable::Indicator { state: 1.0 }.id();
    if trace.model != ModelId::SubmartingaleCoin
        || latent.model != ModelId::SubmartingaleCoin
        || trace.observable != expected_observable
    {
        return Err(SllnError::WrongSetup {
            expected: ModelId::SubmartingaleCoin,
            observable: expected_observable,
            found_model: trace.model,
            found_observable: trace.observable.clone(),
        });
    }
    let theta = latent
        .measures
        .last()
        .ok_or(SllnError::ZeroHorizon)?
        .mean()?;
    Ok((theta, trace.terminal().mean_fx))
}

/// Two independent estimates of `E g(H₀)` with `g(h) = ∫ f dφ(h, ·)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvEstimate {
    /// Mean over replications of `(1/N) Σ f(X_t)`, from observations only.
    pub path_mean: f64,
    pub path_se: f64,
    /// Mean of `g(H₀)` over independent truncated-series draws.
    pub direct_mean: f64,
    pub direct_se: f64,
    pub replications: usize,
    pub direct_draws: usize,
}

impl SvEstimate {
    pub fn combined_sigma(&self) -> f64 {
        self.path_se.hypot(self.direct_se)
    }

    pub fn agree_within(&self, sigmas: f64) -> bool {
        (self.path_mean - self.direct_mean).abs() <= sigmas * self.combined_sigma()
    }
}

/// Path-average vs direct Monte Carlo estimate of `E g(H₀)`. Replication `r`
/// samples under `StreamKey::new(seed, r)`; the direct draws read the
/// auxiliary substream of `StreamKey::new(seed, 0)`.
pub fn sv_functional_estimate(
    params: &SvParams,
    f: &Observable,
    horizon: usize,
    seed: u64,
    reps: usize,
) -> Result<SvEstimate, SllnError> {
    if horizon == 0 {
        return Err(SllnError::ZeroHorizon);
    }
    if reps < 2 {
        return Err(SllnError::TooFewReplications(reps));
    }
    f.validate()?;
    let model = StochasticVolatility::try_new(*params)?;
    let path_means = try_replicate(reps, |r| -> Result<f64, SllnError> {
        let (_, observed) = sample_path(&model, horizon, StreamKey::new(seed, r))?;
        let total = observed
            .points
            .iter()
            .map(|&x| f.eval(x).ok_or(SllnError::UndefinedObservable(x)))
            .collect::<Result<NeumaierSum, _>>()?;
        Ok(total.total() / horizon as f64)
    })?;

    let mut stream = StreamKey::new(seed, 0).auxiliary().stream();
    let mut direct = Vec::with_capacity(SV_DIRECT_DRAWS);
    for _ in 0..SV_DIRECT_DRAWS {
        let h0 = model.params().sample_stationary_h0(&mut stream);
        direct.push(model.conditional_law(h0)?.integrate(f)?);
    }

    Ok(SvEstimate {
        path_mean: crate::stats::mean(&path_means),
        path_se: (sample_variance(&path_means) / reps as f64).sqrt(),
        direct_mean: crate::stats::mean(&direct),
        direct_se: (sample_variance(&direct) / SV_DIRECT_DRAWS as f64).sqrt(),
        replications: reps,
        direct_draws: SV_DIRECT_DRAWS,
    })
}

/// Writes traces as CSV with columns `n,mean_fX,mean_xif,gap,replication,seed`.
pub fn write_traces_csv<W: Write>(traces: &[ConvergenceTrace], mut out: W) -> io::Result<()> {
    writeln!(out, "n,mean_fX,mean_xif,gap,replication,seed")?;
    for trace in traces {
        for c in &trace.checkpoints {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                c.n,
                format_real(c.mean_fx),
                format_real(c.mean_xif),
                format_real(c.gap),
                trace.key.stream,
                trace.key.seed
            )?;
        }
    }
    Ok(())
}
