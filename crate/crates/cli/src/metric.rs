use serde::{Deserialize, Serialize};

use hkorbit_core::hyperkahler::{potential_k, quaternion_report, HkFrame};
use hkorbit_core::linalg;
use hkorbit_core::mostow::{self, FiberedPoint};
use hkorbit_core::orbit::ORBIT_TOL;
use hkorbit_core::tangent::{self, AOperator};

use crate::config::RunConfig;
use crate::io::{Point, PointFile, RealMatrixJson};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// Everything `metric` reports at one point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricRecord {
    pub library_version: String,
    pub config: RunConfig,
    pub point_kind: String,
    /// True when the point lies on the compact orbit, i.e. `V = 0`.
    pub on_compact_orbit: bool,
    pub potential: f64,
    /// Gram matrix of `g` in the frame `rho(b_i, 0)`, then `rho(0, b_i)`,
    /// for `b_i` orthonormal in `m_x`.
    pub gram: RealMatrixJson,
    pub gram_min_eigenvalue: f64,
    pub quaternion_residuals: Vec<NamedValue>,
    pub kks_constant: [f64; 2],
    pub a_spectrum: Vec<f64>,
}

pub fn evaluate(cfg: &RunConfig, fp: &FiberedPoint, point_kind: &str) -> Result<MetricRecord, CliError> {
    let ctx = cfg.context()?;
    let frame = HkFrame::new(&ctx, fp);
    let q = quaternion_report(&ctx, fp);
    let tb = tangent::upsilon_at(&ctx, &fp.y, fp.x.clone());
    let a = AOperator::new(&ctx, &tb)?;
    let scale = linalg::fro(&fp.y.shifted(&ctx));
    Ok(MetricRecord {
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        point_kind: point_kind.to_string(),
        on_compact_orbit: linalg::fro(&tb.v) <= ORBIT_TOL * scale,
        potential: potential_k(&ctx, &fp.y)?,
        gram: RealMatrixJson::from(&frame.gram),
        gram_min_eigenvalue: q.min_metric_eigenvalue,
        quaternion_residuals: q
            .residuals
            .iter()
            .map(|(n, v)| NamedValue {
                name: n.to_string(),
                value: *v,
            })
            .collect(),
        kks_constant: [q.kks_constant.re, q.kks_constant.im],
        a_spectrum: a.spectrum().to_vec(),
    })
}

pub fn run_metric_at(cfg: &RunConfig, point: &PointFile) -> Result<MetricRecord, CliError> {
    let ctx = cfg.context()?;
    match point.load(&ctx)? {
        Point::Orbit(y) => evaluate(cfg, &mostow::decompose(&ctx, &y)?, "orbit"),
        Point::Tangent(p) => evaluate(cfg, &tangent::fibered_from_tb(&ctx, &p)?, "tangent"),
    }
}
