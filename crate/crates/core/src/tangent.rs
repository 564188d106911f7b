//! The tangent bundle `TO` and the map `Upsilon: O^C -> TO`.
//!
//! `f1(a) = I (sinh ad(ia) / ad(ia)) I a` gives the fiber coordinate of
//! `Upsilon(Ad_D(e^{ia}) x)`, and `f2` is its inverse.  The pulled-back
//! metric is `g0(A h, h') + g0(A^-1 v, v')` with
//! `A_V = Id + I R(I V', V')`, `V' = phi(I R(IV, V)) V`.
//!
//! Vertical vectors are labelled by `v` in `i m_x`; the corresponding
//! displacement of the fiber coordinate is `i v`.

use crate::algebra::AlgebraContext;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, I};
use crate::mostow::{self, FiberedPoint};
use crate::orbit::{CompactPoint, OrbitPointC};
use crate::roots::curvature_r;
use crate::speccalc::{apply_ad_function, apply_operator_function, AdKernel, SelfAdjointOp};

/// Eigenvalues of `I R(IV, V)` below `-PSD_TOL * scale` are an error.
pub const PSD_TOL: f64 = 1e-10;

pub fn f1(ctx: &AlgebraContext, a0: &CMat) -> Result<CMat> {
    let ia = ctx.i_op(a0);
    Ok(ctx.i_op(&apply_ad_function(&AdKernel::SinhOverX, a0, &ia)?))
}

pub fn f2(ctx: &AlgebraContext, v0: &CMat) -> Result<CMat> {
    let iv = ctx.i_op(v0);
    Ok(ctx.i_op(&apply_ad_function(&AdKernel::ArgsinhOverX, v0, &iv)?))
}

/// A point `(x, V)` of `TO`, `V` in `m_x`.
#[derive(Debug, Clone)]
pub struct TangentBundlePoint {
    pub x: CompactPoint,
    pub v: CMat,
}

impl TangentBundlePoint {
    pub fn new(ctx: &AlgebraContext, x: CompactPoint, v: CMat) -> Result<Self> {
        let v0 = x.to_base(&v);
        let res = linalg::skew_residual(&v0) + linalg::fro(&ctx.block_diag(&v0));
        if res > 1e-10 * linalg::fro(&v).max(1.0) {
            return Err(Error::NotInSpace {
                space: "m_x",
                residual: res,
            });
        }
        Ok(TangentBundlePoint { x, v })
    }

    pub fn v0(&self) -> CMat {
        self.x.to_base(&self.v)
    }
}

/// `Upsilon(y) = (pi(y), -(1/c) I_{pi(y)} Im y)`.
pub fn upsilon(ctx: &AlgebraContext, y: &OrbitPointC) -> Result<TangentBundlePoint> {
    let proj = mostow::project_pi(ctx, y)?;
    Ok(upsilon_at(ctx, y, proj.point))
}

/// `Upsilon` when `pi(y)` is already known.
pub fn upsilon_at(ctx: &AlgebraContext, y: &OrbitPointC, x: CompactPoint) -> TangentBundlePoint {
    let im = (&y.y + y.y.adjoint()) * (-I * c(0.5));
    let v = x.i_op(ctx, &im) * c(-1.0 / ctx.c);
    TangentBundlePoint { x, v }
}

pub fn upsilon_inverse(ctx: &AlgebraContext, p: &TangentBundlePoint) -> Result<OrbitPointC> {
    let a0 = f2(ctx, &p.v0())?;
    mostow::forward(ctx, &p.x, &p.x.from_base(&a0))
}

/// `I R(IV, V)` on `m0`, for `V` in `m0`.
pub fn holomorphic_curvature_op(ctx: &AlgebraContext, v0: &CMat) -> Result<SelfAdjointOp> {
    let k = linalg::comm(&ctx.i_op(v0), v0);
    SelfAdjointOp::assemble(ctx.m0_basis(), |w| ctx.i_op(&linalg::comm(&k, w)))
}

/// The operator `A_V` on `m_x`, assembled at the base point and transported.
#[derive(Debug, Clone)]
pub struct AOperator {
    pub x: CompactPoint,
    pub op: SelfAdjointOp,
}

impl AOperator {
    pub fn new(ctx: &AlgebraContext, p: &TangentBundlePoint) -> Result<Self> {
        let v0 = p.v0();
        let curv = holomorphic_curvature_op(ctx, &v0)?;
        let vp = apply_operator_function(&AdKernel::PhiBg, &curv, &v0, PSD_TOL)?;
        let ivp = ctx.i_op(&vp);
        let op = SelfAdjointOp::assemble(ctx.m0_basis(), |w| w + ctx.i_op(&curvature_r(&ivp, &vp, w)))?;
        Ok(AOperator { x: p.x.clone(), op })
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.op.eigenvalues
    }

    /// `A` on `m_x`, extended complex-linearly to `m_x + i m_x`.
    pub fn apply(&self, w: &CMat) -> CMat {
        self.apply_real(w, |v| self.op.apply(v))
    }

    pub fn apply_inverse(&self, w: &CMat) -> CMat {
        self.apply_real(w, |v| self.op.apply_fn(|l| Ok(1.0 / l), v).expect("finite inverse"))
    }

    fn apply_real(&self, w: &CMat, f: impl Fn(&CMat) -> CMat) -> CMat {
        let w0 = self.x.to_base(w);
        let re = linalg::skew_part(&w0);
        let im = linalg::herm_part(&w0) * -I;
        self.x.from_base(&(f(&re) + f(&im) * I))
    }
}

/// `A_V(w)`, for a single application.
pub fn a_operator(ctx: &AlgebraContext, p: &TangentBundlePoint, w: &CMat) -> Result<CMat> {
    Ok(AOperator::new(ctx, p)?.apply(w))
}

/// Tangent vector of `TO`: horizontal label `h` in `m_x`, vertical label `v`
/// in `i m_x`.
#[derive(Debug, Clone)]
pub struct TBVector {
    pub h: CMat,
    pub v: CMat,
}

pub fn metric_gtilde(ctx: &AlgebraContext, a: &AOperator, x: &TBVector, y: &TBVector) -> f64 {
    let c3 = ctx.c.powi(3);
    c3 * (linalg::re_inner(&a.apply(&x.h), &y.h) + linalg::re_inner(&a.apply_inverse(&x.v), &y.v))
}

/// `J3 = [[0, i A^-1], [i A, 0]]`.
pub fn j3(a: &AOperator, x: &TBVector) -> TBVector {
    TBVector {
        h: a.apply_inverse(&x.v) * I,
        v: a.apply(&x.h) * I,
    }
}

/// `c^3 Re(<i v, h'> - <i v', h>)`.
pub fn liouville_omega3(ctx: &AlgebraContext, x: &TBVector, y: &TBVector) -> f64 {
    let c3 = ctx.c.powi(3);
    c3 * (linalg::re_inner(&(&x.v * I), &y.h) - linalg::re_inner(&(&y.v * I), &x.h))
}

/// Ambient displacement `(dx, dV)` of the horizontal lift of `h` at `p`.
pub fn horizontal_lift(ctx: &AlgebraContext, p: &TangentBundlePoint, h: &CMat) -> (CMat, CMat) {
    (linalg::comm(h, &(&p.x.x + &ctx.d)), linalg::comm(h, &p.v))
}

/// Splits an ambient displacement `(dx, dV)` at `p` into horizontal and
/// vertical labels, returning the labels and the out-of-fiber residual.
pub fn split_tangent(ctx: &AlgebraContext, p: &TangentBundlePoint, dx: &CMat, dv: &CMat) -> (TBVector, f64) {
    let dx0 = p.x.to_base(dx);
    let h0 = ctx.i_op(&ctx.off_diag(&linalg::skew_part(&dx0))) / c(ctx.c);
    let h = p.x.from_base(&h0);
    let w0 = p.x.to_base(&(dv - linalg::comm(&h, &p.v)));
    let wm = ctx.off_diag(&linalg::skew_part(&w0));
    let residual = linalg::fro(&(&w0 - &wm)) + linalg::fro(&(&dx0 - linalg::comm(&h0, &ctx.d)));
    (
        TBVector {
            h,
            v: p.x.from_base(&wm) * -I,
        },
        residual,
    )
}

/// Fibered point of `O^C` corresponding to `p` under `Upsilon`.
pub fn fibered_from_tb(ctx: &AlgebraContext, p: &TangentBundlePoint) -> Result<FiberedPoint> {
    let a0 = f2(ctx, &p.v0())?;
    FiberedPoint::from_parts(ctx, p.x.clone(), p.x.from_base(&a0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_element, SpaceTag};
    use crate::linalg::fro;
    use crate::orbit::random_compact_point;
    use crate::roots::build_sos;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn f1_on_rank_one() {
        let ctx = AlgebraContext::new(2, 1, 1.0).unwrap();
        let x1 = build_sos(&ctx).triples[0].x.clone();
        for t in [0.1, 0.7, 1.5] {
            let v = f1(&ctx, &(&x1 * c(t))).unwrap();
            assert!(fro(&(v + &x1 * c(0.5 * (2.0 * t).sinh()))) < 1e-13);
        }
        let a = f2(&ctx, &(&x1 * c(0.5))).unwrap();
        assert!(fro(&(a + &x1 * c(0.5 * 1.0f64.asinh()))) < 1e-14);
    }

    #[test]
    fn f2_inverts_f1() {
        let ctx = AlgebraContext::new(6, 2, 0.5).unwrap();
        for s in 0..5 {
            let a = random_element(&ctx, SpaceTag::M0, s, 2.5).mat;
            let back = f2(&ctx, &f1(&ctx, &a).unwrap()).unwrap();
            assert!(fro(&(back - &a)) < 1e-11);
        }
    }

    #[test]
    fn upsilon_matches_f1() {
        let ctx = AlgebraContext::new(5, 2, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = random_compact_point(&ctx, &mut rng);
        let a0 = random_element(&ctx, SpaceTag::M0, 2, 1.3).mat;
        let y = mostow::forward(&ctx, &x, &x.from_base(&a0)).unwrap();
        let p = upsilon(&ctx, &y).unwrap();
        assert!(fro(&(&p.x.x - &x.x)) < 1e-10);
        assert!(fro(&(&p.v - x.from_base(&f1(&ctx, &a0).unwrap()))) < 1e-10);
        let back = upsilon_inverse(&ctx, &p).unwrap();
        assert!(fro(&(back.y - &y.y)) < 1e-9);
    }

    #[test]
    fn a_on_rank_one() {
        let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
        let x1 = build_sos(&ctx).triples[0].x.clone();
        for v in [0.1, 0.5, 2.0] {
            let p = TangentBundlePoint::new(&ctx, CompactPoint::base(&ctx), &x1 * c(v)).unwrap();
            let ax = a_operator(&ctx, &p, &x1).unwrap();
            assert!(fro(&(ax - &x1 * c((1.0 + 4.0 * v * v).sqrt()))) < 1e-12);
        }
    }

    #[test]
    fn j3_squares_to_minus_one() {
        let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let x = random_compact_point(&ctx, &mut rng);
        let p = TangentBundlePoint::new(&ctx, x.clone(), x.from_base(&random_element(&ctx, SpaceTag::M0, 1, 1.0).mat)).unwrap();
        let a = AOperator::new(&ctx, &p).unwrap();
        assert!(a.spectrum()[0] >= 1.0 - 1e-12);
        let t = TBVector {
            h: x.from_base(&random_element(&ctx, SpaceTag::M0, 2, 1.0).mat),
            v: x.from_base(&random_element(&ctx, SpaceTag::M0, 3, 1.0).mat) * I,
        };
        let jj = j3(&a, &j3(&a, &t));
        assert!(fro(&(jj.h + &t.h)) < 1e-12 && fro(&(jj.v + &t.v)) < 1e-12);
    }
}
