//! Shared pieces of the acceptance suite: verdict lines, suite-wide timing
//! and the fixed concentration configurations.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use disintegration::models::{
    ExchangeableBernoulli, IidUniformBernoulli, Prior, RegimeParams, SubmartingaleCoin,
};
use disintegration::Model;

/// Writes straight to the process stdout so verdicts show up even when the
/// test harness captures `println!`.
pub fn line(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

/// Prints `[PASS]` or `[FAIL]` for one criterion, followed by indented detail.
pub fn verdict(id: u8, title: &str, passed: bool, detail: &[String]) -> bool {
    let mut text = format!(
        "[{}] criterion {id:02}: {title}",
        if passed { "PASS" } else { "FAIL" }
    );
    for d in detail {
        text.push_str("\n       ");
        text.push_str(d);
    }
    line(&text);
    passed
}

static SUITE_START: OnceLock<Instant> = OnceLock::new();
static STARTED: AtomicUsize = AtomicUsize::new(0);
static FINISHED: AtomicUsize = AtomicUsize::new(0);

/// Marks a criterion as running; dropping the guard marks it finished, also
/// on panic.
pub struct Running(());

pub fn start() -> Running {
    SUITE_START.get_or_init(Instant::now);
    STARTED.fetch_add(1, Ordering::SeqCst);
    Running(())
}

impl Drop for Running {
    fn drop(&mut self) {
        FINISHED.fetch_add(1, Ordering::SeqCst);
    }
}

/// Waits until every other criterion that has started has finished and
/// returns the wall time since the first one started. The caller must hold
/// its own [`Running`] guard.
pub fn wait_for_others() -> Duration {
    while FINISHED.load(Ordering::SeqCst) + 1 < STARTED.load(Ordering::SeqCst) {
        std::thread::sleep(Duration::from_millis(50));
    }
    SUITE_START.get().expect("caller has started").elapsed()
}

/// `μ(1) = 0.7`, `λ(1) = 0.3`, `Q = [[0.9, 0.1], [0.2, 0.8]]`, `π = (2/3, 1/3)`.
pub fn regime_params() -> RegimeParams {
    RegimeParams::new(0.7, 0.3, [[0.9, 0.1], [0.2, 0.8]], None).expect("valid parameters")
}

pub struct ConcentrationCase {
    pub label: &'static str,
    pub model: Model,
    pub n: usize,
    pub t: f64,
    pub seed: u64,
}

/// Every `[0, 1]`-valued model crossed with four `(n, t)` pairs.
pub fn concentration_suite() -> Vec<ConcentrationCase> {
    let models: [(&'static str, fn() -> Model); 5] = [
        ("iid_uniform_bernoulli", || {
            Model::IidUniformBernoulli(IidUniformBernoulli)
        }),
        ("exchangeable_uniform", || {
            Model::ExchangeableBernoulli(
                ExchangeableBernoulli::new(Prior::Uniform).expect("valid prior"),
            )
        }),
        ("exchangeable_point_0.3", || {
            Model::ExchangeableBernoulli(
                ExchangeableBernoulli::new(Prior::Point { p: 0.3 }).expect("valid prior"),
            )
        }),
        ("submartingale_coin", || {
            Model::SubmartingaleCoin(SubmartingaleCoin)
        }),
        ("canonical_iid", || {
            Model::canonical(Model::IidUniformBernoulli(IidUniformBernoulli))
        }),
    ];
    let grid = [(100, 20.0), (100, 60.0), (100, 90.0), (1000, 600.0)];
    let mut cases = Vec::new();
    for (label, build) in models {
        for (n, t) in grid {
            let seed = 0xC0C0_0000 + cases.len() as u64;
            cases.push(ConcentrationCase {
                label,
                model: build(),
                n,
                t,
                seed,
            });
        }
    }
    cases
}
