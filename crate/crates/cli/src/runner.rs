use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use disintegration::concentration::{
    hoeffding_check, tail_decomposition, CheckStatus, ConcentrationError, ConcentrationReport,
    ConcentrationSetup, TailDecomposition,
};
use disintegration::models::{Model, ModelId, ProductDisintegration};
use disintegration::oracle::regime_ergodic_limit;
use disintegration::replicate::try_replicate;
use disintegration::slln::{
    gap_decay_check, run_trace_with_paths, submartingale_limit_estimate, write_traces_csv,
    ConvergenceTrace, DecayReport, SllnError,
};
use disintegration::stats::{format_real, mean, median, sample_variance};
use disintegration::{Observable, StreamKey};
use serde::Serialize;

use crate::config::Resolved;
use crate::error::CliError;
use crate::figure::{figure_rows, render_svg, write_figure_csv, FigureRow};

#[derive(Debug, Clone, Serialize)]
pub struct Terminal {
    pub mean_fx: f64,
    /// Across replications; absent with a single replication.
    pub mean_fx_variance: Option<f64>,
    pub mean_xif: f64,
    pub median_abs_gap: f64,
    pub max_abs_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizationCounts {
    pub observed: usize,
    pub latent: usize,
    /// Replications where exactly one of the two running means stabilized.
    pub disagreements: usize,
}

/// At least `required` replications land within `tolerance` of a target.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageCheck {
    /// Common target; absent when each replication has its own (the `ϑ_N` case).
    pub target: Option<f64>,
    pub tolerance: f64,
    pub within: usize,
    pub required: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationSummary {
    pub report: ConcentrationReport,
    pub decomposition: TailDecomposition,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub model: ModelId,
    pub observable: String,
    pub seed: String,
    pub horizon: usize,
    pub replications: usize,
    pub checkpoints: Vec<usize>,
    pub terminal: Terminal,
    pub stabilization: StabilizationCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ergodic_limit: Option<CoverageCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub submartingale_limit: Option<CoverageCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationSummary>,
    pub failed_checks: Vec<String>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.failed_checks.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub summary: Summary,
}

struct Replication {
    trace: ConvergenceTrace,
    limit_pair: Option<(f64, f64)>,
    path_rows: Option<Vec<(usize, f64, f64)>>,
    figure: Option<Vec<FigureRow>>,
}

fn slln_error(e: SllnError) -> CliError {
    CliError::Invariant(e.to_string())
}

fn concentration_error(e: ConcentrationError) -> CliError {
    match e {
        ConcentrationError::ConditionNeverMet { .. } => CliError::CheckFailed(e.to_string()),
        other => CliError::Invariant(other.to_string()),
    }
}

fn coverage(count: usize, fraction: f64) -> usize {
    // guard against 0.95 * 100 landing a hair above 95
    (fraction * count as f64 - 1e-9).ceil() as usize
}

/// Runs every replication and check of a resolved config, writes the
/// declared artifacts into `out_dir`, and fails with [`CliError::CheckFailed`]
/// afterwards if strict mode is on and any check failed.
pub fn run(resolved: &Resolved, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let cfg = &resolved.config;
    let model = &resolved.model;
    let f = &cfg.observable;
    let checkpoints = resolved.checkpoints();
    let want_limit =
        model.id() == ModelId::SubmartingaleCoin && cfg.checks.limit_tolerance.is_some();
    let want_limit = want_limit && *f == Observable::Indicator { state: 1.0 };
    if cfg.checks.limit_tolerance.is_some() && !want_limit {
        return Err(CliError::Invariant(
            "limit_tolerance needs the submartingale_coin model with indicator(1)".into(),
        ));
    }
    let regime = match model {
        Model::RegimeSwitching(m) => Some(m.params()),
        _ => None,
    };
    if cfg.checks.ergodic_tolerance.is_some() && regime.is_none() {
        return Err(CliError::Invariant(
            "ergodic_tolerance needs the regime_switching model".into(),
        ));
    }

    let reps = try_replicate(cfg.replications, |r| -> Result<Replication, CliError> {
        let run = run_trace_with_paths(
            model,
            f,
            cfg.horizon,
            checkpoints,
            StreamKey::new(resolved.seed, r),
        )
        .map_err(slln_error)?;
        let limit_pair = if want_limit {
            Some(submartingale_limit_estimate(&run.trace, &run.latent).map_err(slln_error)?)
        } else {
            None
        };
        let path_rows = if (r as usize) < cfg.outputs.paths {
            let rows = run
                .latent
                .measures
                .iter()
                .zip(&run.observed.points)
                .enumerate()
                .map(|(i, (m, &x))| {
                    Ok((
                        i,
                        x,
                        m.integrate(f)
                            .map_err(|e| CliError::Invariant(e.to_string()))?,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Some(rows)
        } else {
            None
        };
        let figure = if r == 0 && cfg.outputs.figure {
            Some(figure_rows(&run.latent, &run.observed)?)
        } else {
            None
        };
        Ok(Replication {
            trace: run.trace,
            limit_pair,
            path_rows,
            figure,
        })
    })?;
    let traces: Vec<ConvergenceTrace> = reps.iter().map(|r| r.trace.clone()).collect();

    let mut failed = Vec::new();
    let decay = if cfg.checks.decay {
        let report = gap_decay_check(&traces, cfg.checks.decay_guard.unwrap_or_default())
            .map_err(slln_error)?;
        if !report.passed {
            failed.push("decay".to_string());
        }
        Some(report)
    } else {
        None
    };

    let terminal_fx: Vec<f64> = traces.iter().map(|t| t.terminal().mean_fx).collect();
    let ergodic_limit = match (regime, cfg.checks.ergodic_tolerance) {
        (Some(params), Some(tolerance)) => {
            let target =
                regime_ergodic_limit(params, f).map_err(|e| CliError::Invariant(e.to_string()))?;
            let within = terminal_fx
                .iter()
                .filter(|m| (*m - target).abs() <= tolerance)
                .count();
            let required = coverage(traces.len(), cfg.checks.coverage);
            Some(CoverageCheck {
                target: Some(target),
                tolerance,
                within,
                required,
                passed: within >= required,
            })
        }
        _ => None,
    };
    let submartingale_limit = cfg.checks.limit_tolerance.map(|tolerance| {
        let within = reps
            .iter()
            .filter_map(|r| r.limit_pair)
            .filter(|(theta, m)| (theta - m).abs() <= tolerance)
            .count();
        let required = coverage(traces.len(), cfg.checks.coverage);
        CoverageCheck {
            target: None,
            tolerance,
            within,
            required,
            passed: within >= required,
        }
    });
    for (name, check) in [
        ("ergodic_limit", &ergodic_limit),
        ("submartingale_limit", &submartingale_limit),
    ] {
        if check.as_ref().is_some_and(|c| !c.passed) {
            failed.push(name.to_string());
        }
    }

    let concentration = match &cfg.concentration {
        Some(block) => {
            let setup = ConcentrationSetup {
                n: block.n,
                t: block.t,
                replications: block.replications,
                seed: resolved.seed,
                strict: cfg.strict,
            };
            let report = hoeffding_check(model, &setup).map_err(concentration_error)?;
            let decomposition = tail_decomposition(model, &setup).map_err(concentration_error)?;
            if report.status == CheckStatus::Fail {
                failed.push("hoeffding".to_string());
            }
            if !decomposition.passed {
                failed.push("tail_decomposition".to_string());
            }
            Some(ConcentrationSummary {
                report,
                decomposition,
            })
        }
        None => None,
    };

    let abs_gaps: Vec<f64> = traces.iter().map(|t| t.terminal().gap.abs()).collect();
    let stabilization: Vec<_> = traces.iter().map(|t| t.stabilization()).collect();
    let summary = Summary {
        name: cfg.name.clone(),
        model: model.id(),
        observable: f.id(),
        seed: format!("{:#x}", resolved.seed),
        horizon: cfg.horizon,
        replications: cfg.replications,
        checkpoints: checkpoints.to_vec(),
        terminal: Terminal {
            mean_fx: mean(&terminal_fx),
            mean_fx_variance: (terminal_fx.len() > 1).then(|| sample_variance(&terminal_fx)),
            mean_xif: mean(
                &traces
                    .iter()
                    .map(|t| t.terminal().mean_xif)
                    .collect::<Vec<_>>(),
            ),
            median_abs_gap: median(&abs_gaps),
            max_abs_gap: abs_gaps.iter().copied().fold(0.0, f64::max),
        },
        stabilization: StabilizationCounts {
            observed: stabilization.iter().filter(|s| s.observed).count(),
            latent: stabilization.iter().filter(|s| s.latent).count(),
            disagreements: stabilization.iter().filter(|s| !s.agrees()).count(),
        },
        decay,
        ergodic_limit,
        submartingale_limit,
        concentration,
        failed_checks: failed,
    };

    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut artifacts = Vec::new();
    let mut write = |file: &str, bytes: Vec<u8>| -> Result<(), CliError> {
        let path = out_dir.join(file);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        artifacts.push(path);
        Ok(())
    };
    write("effective_config.toml", cfg.to_toml().into_bytes())?;
    if cfg.outputs.traces {
        let mut buf = Vec::new();
        write_traces_csv(&traces, &mut buf).expect("writing to memory");
        write("traces.csv", buf)?;
    }
    if cfg.outputs.paths > 0 {
        let mut buf = Vec::new();
        writeln!(buf, "replication,i,x,xi_f").expect("writing to memory");
        for (r, rows) in reps.iter().enumerate() {
            for (i, x, xi_f) in rows.path_rows.iter().flatten() {
                writeln!(buf, "{r},{i},{},{}", format_real(*x), format_real(*xi_f))
                    .expect("writing to memory");
            }
        }
        write("paths.csv", buf)?;
    }
    if let Some(c) = &summary.concentration {
        write("concentration.json", to_json(c))?;
    }
    if let Some(rows) = reps.first().and_then(|r| r.figure.as_ref()) {
        let mut buf = Vec::new();
        write_figure_csv(rows, &mut buf).expect("writing to memory");
        write("figure.csv", buf)?;
        write("figure.svg", render_svg(rows)?.into_bytes())?;
    }
    if cfg.outputs.summary {
        write("summary.json", to_json(&summary))?;
    }

    if cfg.strict && !summary.passed() {
        return Err(CliError::CheckFailed(format!(
            "checks failed: {}",
            summary.failed_checks.join(", ")
        )));
    }
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        artifacts,
        summary,
    })
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    bytes
}
