use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::suites::{checks, run_trial, trial_rng, Bound, Suite, TrialValues};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// `max` when the value must stay below the tolerance, `min` when above.
    pub bound: String,
    pub tolerance: f64,
    /// Largest value over trials for `max` checks, smallest for `min` checks.
    pub worst: f64,
    pub mean: f64,
    pub worst_trial: Option<u64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
    pub failures: Vec<TrialFailure>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub library_version: String,
    pub config: RunConfig,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
    pub wall_seconds: f64,
}

impl Report {
    /// Residuals and verdicts without timings, one line per check.
    pub fn residual_table(&self) -> String {
        let mut s = String::new();
        for suite in &self.suites {
            for c in &suite.checks {
                let _ = writeln!(
                    s,
                    "{}.{} {} worst={:e} mean={:e} trial={:?} pass={}",
                    suite.suite, c.name, c.bound, c.worst, c.mean, c.worst_trial, c.passed
                );
            }
            for f in &suite.failures {
                let _ = writeln!(s, "{}.error trial={} {}", suite.suite, f.trial, f.error);
            }
        }
        s
    }

    pub fn check(&self, suite: &str, name: &str) -> Option<&CheckReport> {
        self.suites
            .iter()
            .find(|s| s.suite == suite)?
            .checks
            .iter()
            .find(|c| c.name == name)
    }
}

fn summarize(name: &str, bound: Bound, tolerance: f64, values: &[(u64, f64)]) -> CheckReport {
    let mut worst = match bound {
        Bound::Max => f64::NEG_INFINITY,
        Bound::Min => f64::INFINITY,
    };
    let mut worst_trial = None;
    let mut sum = 0.0;
    let mut nan = false;
    for &(t, v) in values {
        sum += v;
        nan |= v.is_nan();
        let worse = match bound {
            Bound::Max => v > worst,
            Bound::Min => v < worst,
        };
        if worse || (v.is_nan() && worst_trial.is_none()) {
            worst = v;
            worst_trial = Some(t);
        }
    }
    if values.is_empty() {
        worst = f64::NAN;
    }
    let mean = if values.is_empty() { f64::NAN } else { sum / values.len() as f64 };
    let passed = values.is_empty()
        || (!nan
            && match bound {
                Bound::Max => worst <= tolerance,
                Bound::Min => worst >= tolerance,
            });
    let bound = match bound {
        Bound::Max => "max",
        Bound::Min => "min",
    };
    CheckReport {
        name: name.to_string(),
        bound: bound.into(),
        tolerance,
        worst,
        mean,
        worst_trial,
        passed,
    }
}

fn run_suite(cfg: &RunConfig, ctx: &hkorbit_core::algebra::AlgebraContext, suite: Suite, pool: &rayon::ThreadPool) -> SuiteReport {
    let start = Instant::now();
    let results: Vec<(u64, Result<TrialValues, String>)> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, t);
                (t, run_trial(suite, ctx, &mut rng).map_err(|e| e.to_string()))
            })
            .collect()
    });
    let failures: Vec<TrialFailure> = results
        .iter()
        .filter_map(|(t, r)| {
            r.as_ref().err().map(|e| TrialFailure {
                trial: *t,
                error: e.clone(),
            })
        })
        .collect();
    let checks: Vec<CheckReport> = checks(suite)
        .iter()
        .map(|spec| {
            let values: Vec<(u64, f64)> = results
                .iter()
                .filter_map(|(t, r)| r.as_ref().ok().and_then(|v| v.get(spec.name)).map(|v| (*t, *v)))
                .collect();
            summarize(spec.name, spec.bound, cfg.tolerances[spec.name], &values)
        })
        .collect();
    let passed = failures.is_empty() && checks.iter().all(|c| c.passed);
    SuiteReport {
        suite: suite.name().to_string(),
        passed,
        checks,
        failures,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the selected suites on a pool of `jobs` threads. The result does
/// not depend on `jobs` apart from the timing fields.
pub fn run_verify(cfg: &RunConfig, jobs: usize) -> Result<Report, CliError> {
    let ctx = cfg.context()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let start = Instant::now();
    let suites: Vec<SuiteReport> = cfg.selected().into_iter().map(|s| run_suite(cfg, &ctx, s, &pool)).collect();
    Ok(Report {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        passed: suites.iter().all(|s| s.passed),
        suites,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
