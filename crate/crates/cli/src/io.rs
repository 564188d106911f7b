//! JSON formats. Complex matrices are stored row-major as `[re, im]` pairs
//! together with the space they belong to.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use hkorbit_core::algebra::{tag_residual, AlgebraContext, SpaceTag, TAG_TOL};
use hkorbit_core::linalg::{CMat, RMat};
use hkorbit_core::orbit::{CompactPoint, OrbitPointC};
use hkorbit_core::tangent::TangentBundlePoint;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub space_tag: SpaceTag,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_mat(m: &CMat, space_tag: SpaceTag) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| [m[(i, j)].re, m[(i, j)].im]))
            .collect();
        MatrixJson {
            space_tag,
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn to_mat(&self) -> Result<CMat, CliError> {
        if self.entries.len() != self.rows * self.cols {
            return Err(CliError::Config(format!(
                "matrix has {} entries, expected {}x{}",
                self.entries.len(),
                self.rows,
                self.cols
            )));
        }
        if self.entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CliError::Config("matrix has non-finite entries".into()));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i * self.cols + j];
            Complex64::new(re, im)
        }))
    }

    /// Reads the matrix and checks it lies in its declared space.
    pub fn to_element(&self, ctx: &AlgebraContext) -> Result<CMat, CliError> {
        let m = self.to_mat()?;
        ctx.check_shape(&m)?;
        let r = tag_residual(ctx, &m, self.space_tag);
        if r > TAG_TOL {
            return Err(hkorbit_core::Error::NotInSpace {
                space: self.space_tag.name(),
                residual: r,
            }
            .into());
        }
        Ok(m)
    }
}

/// Real matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl From<&RMat> for RealMatrixJson {
    fn from(m: &RMat) -> Self {
        let entries = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect();
        RealMatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }
}

/// A point given to `metric`: either a point `y` of the complexified orbit
/// or a point `(x, V)` of the tangent bundle of the compact orbit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointFile {
    Orbit { y: MatrixJson },
    Tangent { x: MatrixJson, v: MatrixJson },
}

pub enum Point {
    Orbit(OrbitPointC),
    Tangent(TangentBundlePoint),
}

impl PointFile {
    pub fn load(&self, ctx: &AlgebraContext) -> Result<Point, CliError> {
        Ok(match self {
            PointFile::Orbit { y } => Point::Orbit(OrbitPointC::new(ctx, y.to_mat()?)?),
            PointFile::Tangent { x, v } => {
                let x = CompactPoint::from_matrix(ctx, &x.to_mat()?)?;
                Point::Tangent(TangentBundlePoint::new(ctx, x, v.to_mat()?)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hkorbit_core::roots::build_sos;

    #[test]
    fn matrix_json_layout() {
        let m = CMat::from_fn(2, 2, |i, j| Complex64::new(i as f64, j as f64));
        let j = MatrixJson::from_mat(&m, SpaceTag::GC);
        assert_eq!(j.entries, vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.starts_with(r#"{"space_tag":"gC","rows":2"#));
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_mat().unwrap(), m);
    }

    #[test]
    fn element_tag_is_enforced() {
        let ctx = AlgebraContext::new(2, 1, 1.0).unwrap();
        let x1 = build_sos(&ctx).triples[0].x.clone();
        assert!(MatrixJson::from_mat(&x1, SpaceTag::M0).to_element(&ctx).is_ok());
        assert!(MatrixJson::from_mat(&x1, SpaceTag::K0).to_element(&ctx).is_err());
        let bad = MatrixJson {
            space_tag: SpaceTag::GC,
            rows: 2,
            cols: 2,
            entries: vec![[0.0, 0.0]; 3],
        };
        assert!(bad.to_mat().is_err());
    }

    #[test]
    fn point_file_kinds() {
        let ctx = AlgebraContext::new(2, 1, 1.0).unwrap();
        let zero = MatrixJson::from_mat(&CMat::zeros(2, 2), SpaceTag::GC);
        let orbit = format!(r#"{{"kind":"orbit","y":{}}}"#, serde_json::to_string(&zero).unwrap());
        let p: PointFile = serde_json::from_str(&orbit).unwrap();
        assert!(matches!(p.load(&ctx).unwrap(), Point::Orbit(_)));
        let off = MatrixJson::from_mat(&CMat::identity(2, 2), SpaceTag::GC);
        assert!(PointFile::Orbit { y: off }.load(&ctx).is_err());
    }
}
