//! Strongly orthogonal roots, the maximal abelian normal form of `m0`
//! elements and the curvature tensor `R(a, b) c = [[a, b], c]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::AlgebraContext;
use crate::linalg::{self, c, CMat};

#[derive(Debug, Clone)]
pub struct SosTriple {
    pub x: CMat,
    pub y: CMat,
    pub h: CMat,
}

/// The triples `(x_a, y_a = I x_a, h_a = [x_a, y_a] / 2i)` for
/// `a < min(k, n-k)`.
#[derive(Debug, Clone)]
pub struct SoSystem {
    pub triples: Vec<SosTriple>,
}

pub fn build_sos(ctx: &AlgebraContext) -> SoSystem {
    let triples = (0..ctx.rank())
        .map(|a| {
            let mut x = CMat::zeros(ctx.n, ctx.n);
            x[(a, ctx.k + a)] = c(1.0);
            x[(ctx.k + a, a)] = c(-1.0);
            let y = ctx.i_op(&x);
            let h = linalg::comm(&x, &y) / Complex64::new(0.0, 2.0);
            SosTriple { x, y, h }
        })
        .collect();
    SoSystem { triples }
}

impl SoSystem {
    pub fn rank(&self) -> usize {
        self.triples.len()
    }

    /// `sum_a t_a x_a`.
    pub fn combine(&self, coeffs: &[f64]) -> CMat {
        let n = self.triples[0].x.nrows();
        let mut out = CMat::zeros(n, n);
        for (t, s) in self.triples.iter().zip(coeffs) {
            out += &t.x * c(*s);
        }
        out
    }
}

/// `V = g (sum_a v_a x_a) g*` with `g` block-diagonal unitary and `v_a >= 0`.
#[derive(Debug, Clone)]
pub struct MaxAbelianCoords {
    pub conjugator: CMat,
    pub coeffs: Vec<f64>,
}

impl MaxAbelianCoords {
    pub fn reconstruct(&self, sos: &SoSystem) -> CMat {
        &self.conjugator * sos.combine(&self.coeffs) * self.conjugator.adjoint()
    }
}

/// Normal form from the singular value decomposition of the top-right block.
pub fn to_abelian_coords(ctx: &AlgebraContext, v: &CMat) -> MaxAbelianCoords {
    let (n, k) = (ctx.n, ctx.k);
    let z = v.view((0, k), (k, n - k)).into_owned();
    let svd = z.svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u_thin = svd.u.unwrap();
    let w_thin = svd.v_t.unwrap().adjoint();
    let u_sorted = DMatrix::from_columns(&order.iter().map(|&i| u_thin.column(i)).collect::<Vec<_>>());
    let w_sorted = DMatrix::from_columns(&order.iter().map(|&i| w_thin.column(i)).collect::<Vec<_>>());
    let u = linalg::complete_unitary(&u_sorted);
    let w = linalg::complete_unitary(&w_sorted);
    let mut g = CMat::zeros(n, n);
    g.view_mut((0, 0), (k, k)).copy_from(&u);
    g.view_mut((k, k), (n - k, n - k)).copy_from(&w);
    let coeffs = order.iter().map(|&i| svd.singular_values[i]).collect();
    MaxAbelianCoords { conjugator: g, coeffs }
}

/// `R(a, b) c = [[a, b], c]`.
pub fn curvature_r(a: &CMat, b: &CMat, x: &CMat) -> CMat {
    linalg::comm(&linalg::comm(a, b), x)
}
