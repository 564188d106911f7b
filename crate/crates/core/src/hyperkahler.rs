//! The hyperkähler structure of `O^C` in `rho` coordinates.
//!
//! A tangent vector at `y` is `X^{c + ic'} = [c + ic', y + D]` with `c, c'`
//! in `m_x`, `x = pi(y)`.  The metric is
//! `g(X^c, X^d) = g(X^{ic}, X^{id}) = c Re<[c, y + D], [d, x + D]>` with no
//! cross terms, `I1` is multiplication by `i`, and on the fiber over `x`
//! `I2` sends `X^d` to `X^{I_x d}` and `X^{id}` to `-X^{i I_x d}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::AlgebraContext;
use crate::error::Result;
use crate::linalg::{self, CMat, RMat, I};
use crate::mostow::{self, rho, FiberedPoint, TangentVecC};
use crate::orbit::{kks_form, OrbitPointC};

/// `K(y) = c Re<y, pi(y)>`. Vanishes on the fiber over `0` and equals
/// `c |x|^2` on the compact orbit, but is not a Kähler potential for
/// `omega1`: it differs from [`shifted_potential`] by `c Re<D, pi(y)>`,
/// which is not pluriharmonic.
pub fn potential_k(ctx: &AlgebraContext, y: &OrbitPointC) -> Result<f64> {
    let x = mostow::project_pi(ctx, y)?.point;
    Ok(ctx.c * linalg::re_inner(&y.y, &x.x))
}

/// `c Re<y + D, pi(y)>`, a Kähler potential: `dd^c` of it is `omega1`.
/// Also vanishes on the fiber over `0`; equals `c |x|^2 / 2` on the
/// compact orbit.
pub fn shifted_potential(ctx: &AlgebraContext, y: &OrbitPointC) -> Result<f64> {
    let x = mostow::project_pi(ctx, y)?.point;
    Ok(ctx.c * linalg::re_inner(&y.shifted(ctx), &x.x))
}

/// `c Re<[c, y + D], [d, x + D]>`, the metric on either half of the split.
pub fn metric_block(ctx: &AlgebraContext, fp: &FiberedPoint, c1: &CMat, d1: &CMat) -> f64 {
    let at_y = linalg::comm(c1, &fp.y.shifted(ctx));
    let at_x = linalg::comm(d1, &(&fp.x.x + &ctx.d));
    ctx.c * linalg::re_inner(&at_y, &at_x)
}

pub fn metric_g(ctx: &AlgebraContext, fp: &FiberedPoint, x: &TangentVecC, y: &TangentVecC) -> f64 {
    metric_block(ctx, fp, &x.c, &y.c) + metric_block(ctx, fp, &x.c_prime, &y.c_prime)
}

/// `omega1 = c Im(<X^{ic'}, pi_* X^d> - <X^{id'}, pi_* X^c>)`.
pub fn omega1(ctx: &AlgebraContext, fp: &FiberedPoint, x: &TangentVecC, y: &TangentVecC) -> f64 {
    let big = fp.y.shifted(ctx);
    let xd = &fp.x.x + &ctx.d;
    let first = linalg::tr_inner(&linalg::comm(&(&x.c_prime * I), &big), &linalg::comm(&y.c, &xd));
    let second = linalg::tr_inner(&linalg::comm(&(&y.c_prime * I), &big), &linalg::comm(&x.c, &xd));
    ctx.c * (first - second).im
}

pub fn i1(ctx: &AlgebraContext, fp: &FiberedPoint, x: &TangentVecC) -> TangentVecC {
    rho(ctx, fp, &-&x.c_prime, &x.c)
}

pub fn i2(ctx: &AlgebraContext, fp: &FiberedPoint, x: &TangentVecC) -> TangentVecC {
    rho(ctx, fp, &fp.x.i_op(ctx, &x.c), &-fp.x.i_op(ctx, &x.c_prime))
}

pub fn i3(ctx: &AlgebraContext, fp: &FiberedPoint, x: &TangentVecC) -> TangentVecC {
    i1(ctx, fp, &i2(ctx, fp, x))
}

/// Matrices of the structure in the basis `rho(b_i, 0), rho(0, b_i)` with
/// `b_i` orthonormal in `m_x`.
#[derive(Debug, Clone)]
pub struct HkFrame {
    pub vectors: Vec<TangentVecC>,
    pub gram: RMat,
    pub i1: RMat,
    pub i2: RMat,
    pub i3: RMat,
    pub omega1: RMat,
    pub omega_c: DMatrix<Complex64>,
}

impl HkFrame {
    pub fn new(ctx: &AlgebraContext, fp: &FiberedPoint) -> Self {
        let basis = fp.m_basis(ctx);
        let dim = basis.len();
        let zero = CMat::zeros(ctx.n, ctx.n);
        let vectors: Vec<TangentVecC> = basis
            .iter()
            .map(|b| rho(ctx, fp, b, &zero))
            .chain(basis.iter().map(|b| rho(ctx, fp, &zero, b)))
            .collect();
        let coords = |v: &TangentVecC| -> Vec<f64> {
            basis
                .iter()
                .map(|b| linalg::re_inner(b, &v.c))
                .chain(basis.iter().map(|b| linalg::re_inner(b, &v.c_prime)))
                .collect()
        };
        let op_matrix = |f: &dyn Fn(&TangentVecC) -> TangentVecC| {
            let cols: Vec<Vec<f64>> = vectors.iter().map(|v| coords(&f(v))).collect();
            RMat::from_fn(2 * dim, 2 * dim, |i, j| cols[j][i])
        };
        let m_i1 = op_matrix(&|v| i1(ctx, fp, v));
        let m_i2 = op_matrix(&|v| i2(ctx, fp, v));
        let m_i3 = op_matrix(&|v| i3(ctx, fp, v));
        let gram = RMat::from_fn(2 * dim, 2 * dim, |i, j| metric_g(ctx, fp, &vectors[i], &vectors[j]));
        let om1 = RMat::from_fn(2 * dim, 2 * dim, |i, j| omega1(ctx, fp, &vectors[i], &vectors[j]));
        let omega_c = DMatrix::from_fn(2 * dim, 2 * dim, |i, j| {
            kks_form(ctx, &fp.y, &vectors[i].ambient, &vectors[j].ambient)
        });
        HkFrame {
            vectors,
            gram,
            i1: m_i1,
            i2: m_i2,
            i3: m_i3,
            omega1: om1,
            omega_c,
        }
    }
}

/// Named residuals of the hyperkähler identities at one point.
#[derive(Debug, Clone)]
pub struct QuaternionReport {
    pub residuals: Vec<(&'static str, f64)>,
    /// Measured `lambda` in `omega^C = lambda (omega2 + i omega3)`.
    pub kks_constant: Complex64,
    pub min_metric_eigenvalue: f64,
}

impl QuaternionReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

fn rel(a: &RMat, b: &RMat) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn quaternion_report(ctx: &AlgebraContext, fp: &FiberedPoint) -> QuaternionReport {
    let f = HkFrame::new(ctx, fp);
    let dim = f.gram.nrows();
    let id = RMat::identity(dim, dim);
    let g = &f.gram;
    let gn = g.norm();
    let sq = |m: &RMat| (m * m + &id).norm() / (dim as f64).sqrt();
    let anti = |a: &RMat, b: &RMat| (a * b + b * a).norm() / (dim as f64).sqrt();
    let iso = |m: &RMat| (m.transpose() * g * m - g).norm() / gn;
    let w2 = f.i2.transpose() * g;
    let w3 = f.i3.transpose() * g;
    let w23 = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(w2[(i, j)], w3[(i, j)]));
    let lambda = w23.iter().zip(f.omega_c.iter()).map(|(w, o)| w.conj() * o).sum::<Complex64>() / w23.norm_squared();
    let hol = (&f.omega_c - &w23 * lambda).norm() / f.omega_c.norm();
    let re_wc = f.omega_c.map(|z| z.re);
    let residuals = vec![
        ("i1_squared", sq(&f.i1)),
        ("i2_squared", sq(&f.i2)),
        ("i3_squared", sq(&f.i3)),
        ("anticommute_12", anti(&f.i1, &f.i2)),
        ("anticommute_13", anti(&f.i1, &f.i3)),
        ("anticommute_23", anti(&f.i2, &f.i3)),
        ("metric_symmetry", (g - g.transpose()).norm() / gn),
        ("isometry_1", iso(&f.i1)),
        ("isometry_2", iso(&f.i2)),
        ("isometry_3", iso(&f.i3)),
        ("omega1_closed_form", rel(&f.omega1, &(f.i1.transpose() * g))),
        ("metric_from_kks", rel(&(re_wc * &f.i2), g)),
        ("kks_is_omega2_plus_i_omega3", hol),
    ];
    let min_eig = linalg::eigh_real(g).0[0] / gn;
    QuaternionReport {
        residuals,
        kks_constant: lambda,
        min_metric_eigenvalue: min_eig,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_element, SpaceTag};
    use crate::linalg::c;
    use crate::mostow::{forward, hessian_form};
    use crate::orbit::{random_compact_point, random_unitary, CompactPoint};
    use crate::roots::build_sos;
    use crate::tangent::{f1, AOperator, TangentBundlePoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_fp(ctx: &AlgebraContext, seed: u64, norm: f64) -> FiberedPoint {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = random_compact_point(ctx, &mut rng);
        let a = x.from_base(&random_element(ctx, SpaceTag::M0, seed + 100, norm).mat);
        FiberedPoint::from_parts(ctx, x, a).unwrap()
    }

    #[test]
    fn metric_example_at_zero() {
        let ctx = AlgebraContext::new(2, 1, 1.0).unwrap();
        let fp = FiberedPoint::base(&ctx);
        let x1 = build_sos(&ctx).triples[0].x.clone();
        let v = rho(&ctx, &fp, &x1, &CMat::zeros(2, 2));
        assert!((metric_g(&ctx, &fp, &v, &v) - 16.0).abs() < 1e-13);
    }

    #[test]
    fn quaternion_identities_hold() {
        for (n, k) in [(2, 1), (4, 2), (5, 2)] {
            let ctx = AlgebraContext::new(n, k, 0.5).unwrap();
            let rep = quaternion_report(&ctx, &random_fp(&ctx, 3, 1.2));
            for (name, r) in &rep.residuals {
                assert!(*r < 1e-9, "{name}: {r}");
            }
            assert!((rep.kks_constant - c(1.0)).norm() < 1e-9);
            assert!(rep.min_metric_eigenvalue > 0.0);
        }
    }

    #[test]
    fn fiber_metric_is_hessian_and_a_operator() {
        let ctx = AlgebraContext::new(5, 2, 1.0).unwrap();
        let a0 = random_element(&ctx, SpaceTag::M0, 8, 1.1).mat;
        let fp = FiberedPoint::from_parts(&ctx, CompactPoint::base(&ctx), a0.clone()).unwrap();
        let tb = TangentBundlePoint::new(&ctx, CompactPoint::base(&ctx), f1(&ctx, &a0).unwrap()).unwrap();
        let aop = AOperator::new(&ctx, &tb).unwrap();
        let c1 = random_element(&ctx, SpaceTag::M0, 9, 1.0).mat;
        let d1 = random_element(&ctx, SpaceTag::M0, 10, 1.0).mat;
        let g = metric_block(&ctx, &fp, &c1, &d1);
        assert!((g - ctx.c * hessian_form(&ctx, &a0, &c1, &d1)).abs() < 1e-11);
        let via_a = ctx.c.powi(3) * linalg::re_inner(&aop.apply(&c1), &d1);
        assert!((g - via_a).abs() < 1e-10 * g.abs().max(1.0), "{g} vs {via_a}");
    }

    #[test]
    fn invariance_under_unitaries() {
        let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
        let fp = random_fp(&ctx, 5, 0.9);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let w = random_unitary(4, &mut rng);
        let conj = |m: &CMat| &w * m * w.adjoint();
        let moved = FiberedPoint::from_parts(&ctx, CompactPoint::from_unitary(&ctx, &w * &fp.x.u), conj(&fp.a)).unwrap();
        let basis = fp.m_basis(&ctx);
        let x = rho(&ctx, &fp, &basis[0], &basis[3]);
        let y = rho(&ctx, &fp, &basis[2], &basis[1]);
        let xm = rho(&ctx, &moved, &conj(&basis[0]), &conj(&basis[3]));
        let ym = rho(&ctx, &moved, &conj(&basis[2]), &conj(&basis[1]));
        assert!((metric_g(&ctx, &fp, &x, &y) - metric_g(&ctx, &moved, &xm, &ym)).abs() < 1e-11);
        assert!((omega1(&ctx, &fp, &x, &y) - omega1(&ctx, &moved, &xm, &ym)).abs() < 1e-11);
    }

    #[test]
    fn potential_values() {
        let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
        let y0 = forward(&ctx, &CompactPoint::base(&ctx), &random_element(&ctx, SpaceTag::M0, 1, 1.0).mat).unwrap();
        assert!(potential_k(&ctx, &y0).unwrap().abs() < 1e-12);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let x = random_compact_point(&ctx, &mut rng);
        let k = potential_k(&ctx, &OrbitPointC { y: x.x.clone() }).unwrap();
        assert!((k - ctx.c * linalg::fro(&x.x).powi(2)).abs() < 1e-12);
        assert!(shifted_potential(&ctx, &y0).unwrap().abs() < 1e-12);
        let ks = shifted_potential(&ctx, &OrbitPointC { y: x.x.clone() }).unwrap();
        assert!((ks - 0.5 * k).abs() < 1e-12);
    }
}
