//! Sweeps over `n` with a fixed finite-rank pattern, `k = n / 2`, as
//! truncations of an infinite-dimensional Grassmannian: the compact point is
//! `x = e^{s x_1} . 0` and the fiber coordinate is `a = t x_1` transported to
//! `x`. All reported quantities should be independent of `n`.

use std::time::Instant;

use serde::Serialize;

use hkorbit_core::algebra::AlgebraContext;
use hkorbit_core::hyperkahler::{metric_g, potential_k, quaternion_report, shifted_potential};
use hkorbit_core::linalg::{c, exp_skew, CMat};
use hkorbit_core::mostow::{rho, FiberedPoint};
use hkorbit_core::orbit::CompactPoint;
use hkorbit_core::roots::build_sos;
use hkorbit_core::tangent::{self, AOperator};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub kappa: f64,
    /// Rotation `s` of the base point.
    pub rotation: f64,
    /// Fiber amplitude `t`.
    pub amplitude: f64,
    /// Rows with larger `n` are reported as skipped.
    pub max_n: usize,
    /// Largest `n` for which the full quaternion report is computed.
    pub max_n_quaternion: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kappa: 1.0,
            rotation: 0.4,
            amplitude: 0.7,
            max_n: 64,
            max_n_quaternion: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub status: String,
    pub potential: f64,
    pub shifted_potential: f64,
    pub g_horizontal: f64,
    pub g_vertical: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub quaternion_residual: f64,
    pub seconds: f64,
}

impl SweepRow {
    fn empty(n: usize, status: String) -> Self {
        let nan = f64::NAN;
        SweepRow {
            n,
            k: n / 2,
            status,
            potential: nan,
            shifted_potential: nan,
            g_horizontal: nan,
            g_vertical: nan,
            a_min: nan,
            a_max: nan,
            quaternion_residual: nan,
            seconds: 0.0,
        }
    }
}

pub const CSV_HEADER: &str = "n,k,status,potential,shifted_potential,g_horizontal,g_vertical,a_min,a_max,quaternion_residual,seconds";

fn evaluate(n: usize, cfg: &SweepConfig) -> Result<SweepRow, CliError> {
    let start = Instant::now();
    let ctx = AlgebraContext::new(n, n / 2, cfg.kappa)?;
    let x1 = build_sos(&ctx).triples[0].x.clone();
    let x = CompactPoint::from_unitary(&ctx, exp_skew(&(&x1 * c(cfg.rotation))));
    let a = x.from_base(&(&x1 * c(cfg.amplitude)));
    let x1 = x.from_base(&x1);
    let fp = FiberedPoint::from_parts(&ctx, x, a)?;
    let zero = CMat::zeros(n, n);
    let hor = rho(&ctx, &fp, &x1, &zero);
    let ver = rho(&ctx, &fp, &zero, &x1);
    let a = AOperator::new(&ctx, &tangent::upsilon_at(&ctx, &fp.y, fp.x.clone()))?;
    let spectrum = a.spectrum();
    let quaternion_residual = if n <= cfg.max_n_quaternion {
        quaternion_report(&ctx, &fp).max_residual()
    } else {
        f64::NAN
    };
    Ok(SweepRow {
        n,
        k: n / 2,
        status: "ok".into(),
        potential: potential_k(&ctx, &fp.y)?,
        shifted_potential: shifted_potential(&ctx, &fp.y)?,
        g_horizontal: metric_g(&ctx, &fp, &hor, &hor),
        g_vertical: metric_g(&ctx, &fp, &ver, &ver),
        a_min: spectrum[0],
        a_max: spectrum[spectrum.len() - 1],
        quaternion_residual,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// One row per entry of `ns`, which must be strictly increasing. Rows that
/// fail or exceed the size limit are reported and the sweep continues.
pub fn run_convergence(ns: &[usize], cfg: &SweepConfig) -> Result<Vec<SweepRow>, CliError> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("n list must be strictly increasing".into()));
    }
    Ok(ns
        .iter()
        .map(|&n| {
            if n > cfg.max_n {
                SweepRow::empty(n, format!("skipped: n exceeds limit {}", cfg.max_n))
            } else {
                evaluate(n, cfg).unwrap_or_else(|e| SweepRow::empty(n, format!("error: {e}")))
            }
        })
        .collect())
}

pub fn to_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_stabilise_across_n() {
        let rows = run_convergence(&[4, 8, 16], &SweepConfig::default()).unwrap();
        assert!(rows.iter().all(|r| r.status == "ok"));
        for r in &rows[1..] {
            for (a, b) in [
                (r.potential, rows[0].potential),
                (r.shifted_potential, rows[0].shifted_potential),
                (r.g_horizontal, rows[0].g_horizontal),
                (r.g_vertical, rows[0].g_vertical),
                (r.a_max, rows[0].a_max),
            ] {
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
        assert!(rows[..2].iter().all(|r| r.quaternion_residual < 1e-9));
        assert!(rows[0].potential.abs() > 1e-3);
    }

    #[test]
    fn ordering_and_limits() {
        assert!(run_convergence(&[8, 4], &SweepConfig::default()).is_err());
        let cfg = SweepConfig {
            max_n: 4,
            ..SweepConfig::default()
        };
        let rows = run_convergence(&[2, 6], &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].status, "ok");
        assert!(rows[1].status.starts_with("skipped"));
        let csv = to_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with(CSV_HEADER));
    }
}
