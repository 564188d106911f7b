//! Randomised verification suites.  Each trial draws its own generator from
//! the master seed and the trial index, so results do not depend on how
//! trials are scheduled.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use hkorbit_core::algebra::{random_element_with, AlgebraContext, SpaceTag};
use hkorbit_core::hyperkahler::{self, metric_g, omega1, quaternion_report};
use hkorbit_core::linalg::{self, c, comm, fro, re_inner, CMat, I};
use hkorbit_core::mostow::{self, rho, rho_inverse, FiberedPoint, TangentVecC};
use hkorbit_core::oracle::{self, FdConfig};
use hkorbit_core::orbit::{self, random_compact_point, random_unitary, CompactPoint, HolomorphicChart, OrbitPointC};
use hkorbit_core::roots::{build_sos, curvature_r, to_abelian_coords};
use hkorbit_core::speccalc::{apply_ad_function, apply_operator_function, AdKernel, SelfAdjointOp};
use hkorbit_core::tangent::{self, AOperator, TBVector, TangentBundlePoint};
use hkorbit_core::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Algebra,
    Roots,
    Mostow,
    Hyperkahler,
    Tangent,
    Closedness,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Algebra,
        Suite::Roots,
        Suite::Mostow,
        Suite::Hyperkahler,
        Suite::Tangent,
        Suite::Closedness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Roots => "roots",
            Suite::Mostow => "mostow",
            Suite::Hyperkahler => "hyperkahler",
            Suite::Tangent => "tangent",
            Suite::Closedness => "closedness",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

/// Whether a check bounds its value from above or from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub name: &'static str,
    pub bound: Bound,
    pub tolerance: f64,
}

const fn max(name: &'static str, tolerance: f64) -> CheckSpec {
    CheckSpec {
        name,
        bound: Bound::Max,
        tolerance,
    }
}

const fn min(name: &'static str, tolerance: f64) -> CheckSpec {
    CheckSpec {
        name,
        bound: Bound::Min,
        tolerance,
    }
}

const ALGEBRA_CHECKS: &[CheckSpec] = &[
    max("ad_invariance", 1e-12),
    max("jacobi", 1e-12),
    max("ad_d_squared", 1e-12),
    max("bracket_with_i", 1e-12),
    max("i_bracket_invariance", 1e-12),
    max("bracket_norm_identity", 1e-9),
    max("spectral_vs_series", 1e-9),
    max("spectral_vs_series_in_disk", 1e-9),
    min("sinh_over_x_spectrum", 1.0 - 1e-12),
];

const ROOTS_CHECKS: &[CheckSpec] = &[
    max("sos_relations", 1e-12),
    max("curvature_on_sos", 1e-12),
    max("abelian_reconstruction", 1e-10),
    max("abelian_power_series", 1e-10),
    max("bracket_norm_transport", 1e-9),
    max("cosh_kernel_transport", 1e-9),
    max("phi_on_curvature", 1e-9),
];

const MOSTOW_CHECKS: &[CheckSpec] = &[
    max("round_trip_x", 1e-7),
    max("round_trip_a", 1e-7),
    max("multi_start_spread", 1e-6),
    max("closed_form_projection", 1e-9),
    min("minimality_margin", -1e-9),
    min("strong_convexity_margin", -1e-12),
    max("hessian_vs_fd", 1e-5),
    max("equivariance", 1e-9),
];

const HYPERKAHLER_CHECKS: &[CheckSpec] = &[
    max("quaternion_identities", 1e-8),
    max("kks_constant_deviation", 1e-8),
    min("metric_min_eigenvalue", 0.0),
    max("compact_restriction", 1e-10),
    max("potential_on_zero_fiber", 1e-10),
    max("unitary_invariance", 1e-10),
    max("fiber_metric_is_hessian", 1e-10),
];

const TANGENT_CHECKS: &[CheckSpec] = &[
    max("f2_after_f1", 1e-9),
    max("base_of_upsilon", 1e-7),
    max("a_rank_one", 1e-10),
    min("a_min_eigenvalue", 1.0 - 1e-10),
    max("metric_via_a", 1e-9),
    max("upsilon_horizontal_fd", 1e-4),
    max("upsilon_vertical_fd", 1e-4),
    max("pullback_fd", 1e-4),
    max("j3_squared", 1e-10),
    max("j3_compatibility", 1e-9),
    max("liouville_form", 1e-12),
];

const CLOSEDNESS_CHECKS: &[CheckSpec] = &[
    max("ddc_shifted_potential_vs_omega1", 1e-4),
    max("d_omega1", 1e-3),
    max("d_omega2", 1e-3),
    max("d_omega3", 1e-3),
    min("fd_order", 1.9),
];

pub fn checks(suite: Suite) -> &'static [CheckSpec] {
    match suite {
        Suite::Algebra => ALGEBRA_CHECKS,
        Suite::Roots => ROOTS_CHECKS,
        Suite::Mostow => MOSTOW_CHECKS,
        Suite::Hyperkahler => HYPERKAHLER_CHECKS,
        Suite::Tangent => TANGENT_CHECKS,
        Suite::Closedness => CLOSEDNESS_CHECKS,
    }
}

/// Values reported by one trial, by check name.
pub type TrialValues = BTreeMap<&'static str, f64>;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn run_trial(suite: Suite, ctx: &AlgebraContext, rng: &mut ChaCha20Rng) -> Result<TrialValues> {
    match suite {
        Suite::Algebra => algebra_trial(ctx, rng),
        Suite::Roots => roots_trial(ctx, rng),
        Suite::Mostow => mostow_trial(ctx, rng),
        Suite::Hyperkahler => hyperkahler_trial(ctx, rng),
        Suite::Tangent => tangent_trial(ctx, rng),
        Suite::Closedness => closedness_trial(ctx, rng),
    }
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    fro(&(a - b)) / fro(b).max(1e-300)
}

/// Difference normalised by a reference scale (clamped away from zero).
fn scaled(a: &CMat, b: &CMat, scale: f64) -> f64 {
    fro(&(a - b)) / scale.max(1e-12)
}

fn m0(ctx: &AlgebraContext, rng: &mut ChaCha20Rng, norm: f64) -> CMat {
    random_element_with(ctx, SpaceTag::M0, rng, norm).mat
}

fn m0_upto(ctx: &AlgebraContext, rng: &mut ChaCha20Rng, max_norm: f64) -> CMat {
    let r = rng.random_range(0.05..=1.0) * max_norm;
    m0(ctx, rng, r)
}

pub fn sample_fiber_point(ctx: &AlgebraContext, rng: &mut ChaCha20Rng, max_norm: f64) -> Result<FiberedPoint> {
    let x = random_compact_point(ctx, rng);
    let a = x.from_base(&m0_upto(ctx, rng, max_norm));
    FiberedPoint::from_parts(ctx, x, a)
}

/// Kernels of the catalogue whose Taylor series at zero are entire.
pub fn entire_kernels() -> Vec<AdKernel> {
    vec![
        AdKernel::CoshM1OverX2,
        AdKernel::SinhOverX,
        AdKernel::SinOverX,
        AdKernel::Cos,
        AdKernel::Cosh,
        AdKernel::Exp,
    ]
}

/// Kernels of the catalogue with a finite Taylor radius at zero: one for
/// the square-root family, `pi / 2` for `sech`.
pub fn finite_radius_kernels() -> Vec<AdKernel> {
    vec![
        AdKernel::Sech,
        AdKernel::ArgsinhOverX,
        AdKernel::PhiBg,
        AdKernel::SqrtOnePlusM1OverX,
        AdKernel::SqrtOnePlus,
    ]
}

/// Relative gap between `f(ad(ia)) y` from the spectral engine and its
/// 15-term Taylor sum.
pub fn spectral_series_gap(kernel: &AdKernel, a: &CMat, y: &CMat) -> Result<f64> {
    let spectral = apply_ad_function(kernel, a, y)?;
    let ser = oracle::series_ad_function(kernel, &(a * I), y, 15)?;
    Ok(fro(&(&spectral - &ser)) / fro(&ser).max(fro(y)))
}

fn algebra_trial(ctx: &AlgebraContext, rng: &mut ChaCha20Rng) -> Result<TrialValues> {
    let mut out = TrialValues::new();
    let g = |rng: &mut ChaCha20Rng| random_element_with(ctx, SpaceTag::G, rng, 1.0).mat;
    let (a, b, w) = (g(rng), g(rng), g(rng));
    out.insert("ad_invariance", (re_inner(&comm(&a, &b), &w) + re_inner(&b, &comm(&a, &w))).abs());
    let jac = comm(&a, &comm(&b, &w)) + comm(&b, &comm(&w, &a)) + comm(&w, &comm(&a, &b));
    out.insert("jacobi", fro(&jac));
    let m = m0(ctx, rng, 1.0);
    let m2 = m0(ctx, rng, 1.0);
    out.insert("ad_d_squared", rel(&comm(&ctx.d, &comm(&ctx.d, &m)), &(&m * c(-ctx.c * ctx.c))));
    let (im, im2) = (ctx.i_op(&m), ctx.i_op(&m2));
    out.insert("bracket_with_i", fro(&(comm(&m, &im2) + comm(&im, &m2))));
    out.insert("i_bracket_invariance", fro(&(comm(&im, &im2) - comm(&m, &m2))));
    let lhs = re_inner(&comm(&m, &im), &comm(&m2, &im2));
    let rhs = fro(&comm(&m, &m2)).powi(2) + fro(&comm(&m, &im2)).powi(2);
    out.insert("bracket_norm_identity", (lhs - rhs).abs() / rhs.abs().max(1.0));

    let a1 = m0_upto(ctx, rng, 1.0);
    let y = random_element_with(ctx, SpaceTag::GC, rng, 1.0).mat;
    let mut worst: f64 = 0.0;
    for k in entire_kernels() {
        worst = worst.max(spectral_series_gap(&k, &a1, &y)?);
    }
    out.insert("spectral_vs_series", worst);
    // finite-radius kernels, inside a quarter of the convergence disk
    let rad = 2.0 * to_abelian_coords(ctx, &a1).coeffs[0];
    let a_small = &a1 * c(0.25 / rad.max(0.25));
    let mut worst: f64 = 0.0;
    for k in finite_radius_kernels().into_iter().chain([AdKernel::PhiBg.of_square()]) {
        worst = worst.max(spectral_series_gap(&k, &a_small, &y)?);
    }
    out.insert("spectral_vs_series_in_disk", worst);
    let a2 = m0_upto(ctx, rng, 2.0);
    let basis = g_basis(ctx.n);
    let op = SelfAdjointOp::assemble(basis, |v| {
        linalg::skew_part(&apply_ad_function(&AdKernel::SinhOverX, &a2, v).expect("entire kernel"))
    })?;
    out.insert("sinh_over_x_spectrum", op.min_eigenvalue());
    Ok(out)
}

/// Orthonormal basis of `u(n)` for `Re<.,.>`.
pub fn g_basis(n: usize) -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..n {
        let mut d = CMat::zeros(n, n);
        d[(i, i)] = I;
        out.push(d);
        for j in i + 1..n {
            let mut re = CMat::zeros(n, n);
            re[(i, j)] = c(s);
            re[(j, i)] = c(-s);
            let mut im = CMat::zeros(n, n);
            im[(i, j)] = I * s;
            im[(j, i)] = I * s;
            out.push(re);
            out.push(im);
        }
    }
    out
}

fn roots_trial(ctx: &AlgebraContext, rng: &mut ChaCha20Rng) -> Result<TrialValues> {
    let mut out = TrialValues::new();
    let sos = build_sos(ctx);
    let mut rel_err: f64 = 0.0;
    let mut curv: f64 = 0.0;
    let two_i = Complex64::new(0.0, 2.0);
    for (p, tp) in sos.triples.iter().enumerate() {
        for (q, tq) in sos.triples.iter().enumerate() {
            let d = if p == q { c(1.0) } else { c(0.0) };
            rel_err = rel_err
                .max(fro(&(comm(&tp.x, &tq.y) - &tp.h * two_i * d)))
                .max(fro(&(comm(&tp.h, &tq.x) + &tp.y * two_i * d)))
                .max(fro(&(comm(&tp.h, &tq.y) - &tp.x * two_i * d)));
            let r = curvature_r(&tp.x, &tp.y, &tq.x);
            curv = curv.max(fro(&(r - &tp.y * c(4.0) * d)));
        }
    }
    out.insert("sos_relations", rel_err);
    out.insert("curvature_on_sos", curv);

    let v = m0_upto(ctx, rng, 2.0);
    let nf = to_abelian_coords(ctx, &v);
    out.insert("abelian_reconstruction", scaled(&nf.reconstruct(&sos), &v, fro(&v)));
    // ad(i I V)^{2m} V = g (sum (2 v_a)^{2m} v_a x_a) g*
    let iv = ctx.i_op(&v);
    let mut p = v.clone();
    let mut worst: f64 = 0.0;
    for m in 1..=3 {
        p = comm(&iv, &comm(&iv, &p)) * c(-1.0);
        let coeffs: Vec<f64> = nf.coeffs.iter().map(|s| (2.0 * s).powi(2 * m) * s).collect();
        let expect = &nf.conjugator * sos.combine(&coeffs) * nf.conjugator.adjoint();
        worst = worst.max(rel(&p, &expect));
    }
    out.insert("abelian_power_series", worst);

    let a = m0_upto(ctx, rng, 1.5);
    let ia = ctx.i_op(&a);
    let mut worst: f64 = 0.0;
    for f in [AdKernel::Cosh, AdKernel::SinhOverX, AdKernel::CoshM1OverX2] {
        let lhs = apply_ad_function(&f, &a, &comm(&a, &ia))?;
        let ap = apply_ad_function(&f.clone().sqrt(), &ia, &a)?;
        worst = worst.max(rel(&lhs, &comm(&ap, &ctx.i_op(&ap))));
    }
    out.insert("bracket_norm_transport", worst);
    let vv = tangent::f1(ctx, &a)?;
    let lhs = apply_ad_function(&AdKernel::CoshM1OverX2, &a, &comm(&ia, &a))?;
    let rhs = apply_ad_function(&AdKernel::SqrtOnePlusM1OverX.of_square(), &vv, &comm(&ctx.i_op(&vv), &vv))?;
    out.insert("cosh_kernel_transport", rel(&lhs, &rhs));
    let lhs = apply_ad_function(&AdKernel::PhiBg.of_square(), &ctx.i_op(&vv), &vv)?;
    let curvature = tangent::holomorphic_curvature_op(ctx, &vv)?;
    let rhs = apply_operator_function(&AdKernel::PhiBg, &curvature, &vv, tangent::PSD_TOL)?;
    out.insert("phi_on_curvature", rel(&lhs, &rhs));
    Ok(out)
}

fn objective(y: &CMat, x: &CMat) -> f64 {
    0.5 * fro(&(y - x)).powi(2)
}

fn mostow_trial(ctx: &AlgebraContext, rng: &mut ChaCha20Rng) -> Result<TrialValues> {
    let mut out = TrialValues::new();
    let truth = sample_fiber_point(ctx, rng, 2.0)?;
    let fp = mostow::decompose(ctx, &truth.y)?;
    out.insert("round_trip_x", fro(&(&fp.x.x - &truth.x.x)));
    out.insert("round_trip_a", fro(&(&fp.a - &truth.a)));

    let moderate = sample_fiber_point(ctx, rng, 1.0)?;
    let mut spread: f64 = 0.0;
    for _ in 0..10 {
        let u0 = random_unitary(ctx.n, rng);
        let p = mostow::project_pi_from(ctx, &moderate.y, &u0)?;
        spread = spread.max(fro(&(&p.point.x - &moderate.x.x)));
    }
    out.insert("multi_start_spread", spread);
    out.insert("closed_form_projection", fro(&(oracle::ky_fan_projection(ctx, &fp.y.y) - &fp.x.x)));

    let y = &fp.y.y;
    let best = objective(y, &fp.x.x);
    let probe = oracle::probe_min_distance(ctx, y, &fp.x.x, 1000, rng);
    out.insert("minimality_margin", (probe - best) / best.max(1.0));

    // f(t) - f(0) >= t^2 c^2 / 4 along unit geodesics through 0, y over 0
    let a0 = m0_upto(ctx, rng, 1.5);
    let y0 = mostow::forward(ctx, &CompactPoint::base(ctx), &a0)?.y;
    let b = m0(ctx, rng, 1.0);
    let f = |t: f64| {
        let x = CompactPoint::from_unitary(ctx, linalg::exp_skew(&(&b * c(t)))).x;
        objective(&y0, &x)
    };
    let f0 = f(0.0);
    let mut margin = f64::INFINITY;
    for j in 1..=10 {
        let t = 0.05 * j as f64;
        for s in [t, -t] {
            margin = margin.min((f(s) - f0 - s * s * ctx.c * ctx.c / 4.0) / f0.max(1.0));
        }
    }
    out.insert("strong_convexity_margin", margin);
    let cfg = FdConfig {
        step: 1e-3,
        richardson: true,
    };
    let fd = oracle::fd_second_derivative(|t| Ok(f(t)), &cfg)?;
    let exact = mostow::hessian_form(ctx, &a0, &b, &b);
    out.insert("hessian_vs_fd", (fd - exact).abs() / exact.abs().max(1.0));

    let w = random_unitary(ctx.n, rng);
    let moved = OrbitPointC {
        y: &w * &fp.y.y * w.adjoint() + &w * &ctx.d * w.adjoint() - &ctx.d,
    };
    let moved_x = mostow::project_pi(ctx, &moved)?.point.x;
    let expect = &w * (&fp.x.x + &ctx.d) * w.adjoint() - &ctx.d;
    out.insert("equivariance", fro(&(moved_x - expect)));
    Ok(out)
}

fn hyperkahler_trial(ctx: &AlgebraContext, rng: &mut ChaCha20Rng) -> Result<TrialValues> {
    let mut out = TrialValues::new();
    let truth = sample_fiber_point(ctx, rng, 1.5)?;
    let fp = mostow::decompose(ctx, &truth.y)?;
    let rep = quaternion_report(ctx, &fp);
    out.insert("quaternion_identities", rep.max_residual());
    out.insert("kks_constant_deviation", (rep.kks_constant - c(1.0)).norm());
    out.insert("metric_min_eigenvalue", rep.min_metric_eigenvalue);

    let x = random_compact_point(ctx, rng);
    let on_o = FiberedPoint::from_parts(ctx, x.clone(), CMat::zeros(ctx.n, ctx.n))?;
    let basis = x.m_basis(ctx);
    let zero = CMat::zeros(ctx.n, ctx.n);
    let mut worst: f64 = 0.0;
    let c3 = ctx.c.powi(3);
    for _ in 0..4 {
        let u = &basis[rng.random_range(0..basis.len())];
        let v = &basis[rng.random_range(0..basis.len())];
        let g = metric_g(ctx, &on_o, &rho(ctx, &on_o, u, &zero), &rho(ctx, &on_o, v, &zero));
        worst = worst.max((g - orbit::kahler_metric_o(ctx, u, v)).abs() / c3);
    }
    out.insert("compact_restriction", worst);

    let y0 = mostow::forward(ctx, &CompactPoint::base(ctx), &m0_upto(ctx, rng, 1.5))?;
    let k = hyperkahler::potential_k(ctx, &y0)?;
    out.insert("potential_on_zero_fiber", k.abs());

    let w = random_unitary(ctx.n, rng);
    let conj = |m: &CMat| &w * m * w.adjoint();
    let moved = FiberedPoint::from_parts(ctx, CompactPoint::from_unitary(ctx, &w * &fp.x.u), conj(&fp.a))?;
    let fb = fp.m_basis(ctx);
    let (p, q) = (rng.random_range(0..fb.len()), rng.random_range(0..fb.len()));
    let xv = rho(ctx, &fp, &fb[p], &fb[q]);
    let yv = rho(ctx, &fp, &fb[q], &(&fb[p] * c(-1.0)));
    let xm = rho(ctx, &moved, &conj(&fb[p]), &conj(&fb[q]));
    let ym = rho(ctx, &moved, &conj(&fb[q]), &(conj(&fb[p]) * c(-1.0)));
    let s = metric_g(ctx, &fp, &xv, &xv).max(1.0);
    let d1 = (metric_g(ctx, &fp, &xv, &yv) - metric_g(ctx, &moved, &xm, &ym)).abs();
    let d2 = (omega1(ctx, &fp, &xv, &yv) - omega1(ctx, &moved, &xm, &ym)).abs();
    out.insert("unitary_invariance", d1.max(d2) / s);

    let a0 = m0_upto(ctx, rng, 1.5);
    let over0 = FiberedPoint::from_parts(ctx, CompactPoint::base(ctx), a0.clone())?;
    let (b1, b2) = (m0(ctx, rng, 1.0), m0(ctx, rng, 1.0));
    let g = hyperkahler::metric_block(ctx, &over0, &b1, &b2);
    let h = ctx.c * mostow::hessian_form(ctx, &a0, &b1, &b2);
    out.insert("fiber_metric_is_hessian", (g - h).abs() / c3);
    Ok(out)
}

/// Ambient velocity of `t -> (pi, Upsilon)(Ad_D(e^{t (c + ic')}) y)`, split
/// into horizontal and vertical labels at `Upsilon(y)`.
pub fn upsilon_pushforward(ctx: &AlgebraContext, fp: &FiberedPoint, v: &TangentVecC, cfg: &FdConfig) -> Result<(TBVector, f64)> {
    let lab = v.complex_label();
    let big = fp.y.shifted(ctx);
    let n = ctx.n;
    let curve = |t: f64| -> Result<CMat> {
        let g = (&lab * c(t)).exp();
        let gi = (&lab * c(-t)).exp();
        let y = OrbitPointC {
            y: &g * &big * gi - &ctx.d,
        };
        let p = tangent::upsilon(ctx, &y)?;
        let mut stacked = CMat::zeros(2 * n, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&p.x.x);
        stacked.view_mut((n, 0), (n, n)).copy_from(&p.v);
        Ok(stacked)
    };
    let vel = oracle::fd_pushforward(curve, cfg)?;
    let here = tangent::upsilon_at(ctx, &fp.y, fp.x.clone());
    let dx = vel.view((0, 0), (n, n)).into_owned();
    let dv = vel.view((n, 0), (n, n)).into_owned();
    Ok(tangent::split_tangent(ctx, &here, &dx, &dv))
}

fn tangent_trial(ctx: &AlgebraContext, rng: &mut ChaCha20Rng) -> Result<TrialValues> {
    let mut out = TrialValues::new();
    let a = m0_upto(ctx, rng, 3.0);
    out.insert("f2_after_f1", rel(&tangent::f2(ctx, &tangent::f1(ctx, &a)?)?, &a));

    let truth = sample_fiber_point(ctx, rng, 1.5)?;
    let p = tangent::upsilon(ctx, &truth.y)?;
    out.insert("base_of_upsilon", fro(&(&p.x.x - &truth.x.x)));

    let sos = build_sos(ctx);
    let x1 = &sos.triples[0].x;
    let mut worst: f64 = 0.0;
    for v in [0.1, 0.5, 2.0] {
        let pt = TangentBundlePoint::new(ctx, CompactPoint::base(ctx), x1 * c(v))?;
        let ax = tangent::a_operator(ctx, &pt, x1)?;
        worst = worst.max(rel(&ax, &(x1 * c((1.0 + 4.0 * v * v).sqrt()))));
    }
    out.insert("a_rank_one", worst);

    let aop = AOperator::new(ctx, &p)?;
    out.insert("a_min_eigenvalue", aop.spectrum()[0]);
    let fp = mostow::decompose(ctx, &truth.y)?;
    let basis = fp.m_basis(ctx);
    let pick = |rng: &mut ChaCha20Rng| {
        let mut m = CMat::zeros(ctx.n, ctx.n);
        for b in &basis {
            let t: f64 = rng.random_range(-1.0..1.0);
            m += b * c(t);
        }
        m
    };
    let (c1, d1) = (pick(rng), pick(rng));
    let c3 = ctx.c.powi(3);
    let g = hyperkahler::metric_block(ctx, &fp, &c1, &d1);
    out.insert(
        "metric_via_a",
        (g - c3 * re_inner(&aop.apply(&c1), &d1)).abs() / (c3 * fro(&c1) * fro(&d1)),
    );

    let cfg = FdConfig::default();
    let zero = CMat::zeros(ctx.n, ctx.n);
    let (hv, hres) = upsilon_pushforward(ctx, &fp, &rho(ctx, &fp, &c1, &zero), &cfg)?;
    out.insert("upsilon_horizontal_fd", (fro(&(&hv.h - &c1)) + fro(&hv.v) + hres) / fro(&c1));
    let (vv, vres) = upsilon_pushforward(ctx, &fp, &rho(ctx, &fp, &zero, &d1), &cfg)?;
    out.insert("upsilon_vertical_fd", (fro(&vv.h) + vres) / fro(&d1));

    let (e1, e2) = (pick(rng), pick(rng));
    let xv = rho(ctx, &fp, &c1, &e1);
    let yv = rho(ctx, &fp, &d1, &e2);
    let (tx, _) = upsilon_pushforward(ctx, &fp, &xv, &cfg)?;
    let (ty, _) = upsilon_pushforward(ctx, &fp, &yv, &cfg)?;
    let norm = (metric_g(ctx, &fp, &xv, &xv) * metric_g(ctx, &fp, &yv, &yv)).sqrt();
    let mut worst: f64 = 0.0;
    for (s, t, u, w) in [(&tx, &ty, &xv, &yv), (&tx, &tx, &xv, &xv), (&ty, &ty, &yv, &yv)] {
        worst = worst.max((tangent::metric_gtilde(ctx, &aop, s, t) - metric_g(ctx, &fp, u, w)).abs() / norm);
    }
    out.insert("pullback_fd", worst);

    let tb = |rng: &mut ChaCha20Rng| TBVector {
        h: pick(rng),
        v: pick(rng) * I,
    };
    let (s, t) = (tb(rng), tb(rng));
    let jj = tangent::j3(&aop, &tangent::j3(&aop, &s));
    out.insert(
        "j3_squared",
        (fro(&(&jj.h + &s.h)) + fro(&(&jj.v + &s.v))) / (fro(&s.h) + fro(&s.v)),
    );
    let lhs = tangent::metric_gtilde(ctx, &aop, &tangent::j3(&aop, &s), &t);
    let om = tangent::liouville_omega3(ctx, &s, &t);
    let scale = c3 * (fro(&s.h) + fro(&s.v)) * (fro(&t.h) + fro(&t.v));
    out.insert("j3_compatibility", (lhs - om).abs() / scale);
    let direct = c3 * ((linalg::tr_inner(&(&s.v * I), &t.h) - linalg::tr_inner(&(&t.v * I), &s.h)).re);
    out.insert("liouville_form", (om - direct).abs() / scale);
    Ok(out)
}

/// Unit vector in chart coordinates.
pub fn random_chart_direction(dim: usize, rng: &mut ChaCha20Rng) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v / c(n)
}

/// Tangent vectors in `rho` coordinates for chart directions at chart point `z`.
pub fn chart_vectors(
    ctx: &AlgebraContext,
    chart: &HolomorphicChart,
    z: &DVector<Complex64>,
    dirs: &[&DVector<Complex64>],
) -> Result<(FiberedPoint, Vec<TangentVecC>)> {
    let y = OrbitPointC { y: chart.point(z)? };
    let fp = mostow::decompose(ctx, &y)?;
    let vecs = dirs
        .iter()
        .map(|d| rho_inverse(ctx, &fp, &chart.differential(z, d)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((fp, vecs))
}

#[derive(Clone, Copy)]
enum KahlerForm {
    One,
    Two,
    Three,
}

fn form_value(
    ctx: &AlgebraContext,
    chart: &HolomorphicChart,
    form: KahlerForm,
    z: &DVector<Complex64>,
    u: &DVector<Complex64>,
    v: &DVector<Complex64>,
) -> Result<f64> {
    let (fp, vecs) = chart_vectors(ctx, chart, z, &[u, v])?;
    Ok(match form {
        KahlerForm::One => omega1(ctx, &fp, &vecs[0], &vecs[1]),
        KahlerForm::Two => metric_g(ctx, &fp, &hyperkahler::i2(ctx, &fp, &vecs[0]), &vecs[1]),
        KahlerForm::Three => metric_g(ctx, &fp, &hyperkahler::i3(ctx, &fp, &vecs[0]), &vecs[1]),
    })
}

/// `|dd^c K(X, Y) - omega1(X, Y)| / (|X|_g |Y|_g)` for chart vectors at the
/// chart center, with `dd^c` by finite differences.
pub fn ddc_residual(
    ctx: &AlgebraContext,
    chart: &HolomorphicChart,
    xi: &DVector<Complex64>,
    eta: &DVector<Complex64>,
    potential: fn(&AlgebraContext, &OrbitPointC) -> Result<f64>,
) -> Result<f64> {
    let z = DVector::<Complex64>::zeros(chart.dim());
    let (fp, vecs) = chart_vectors(ctx, chart, &z, &[xi, eta])?;
    let closed = omega1(ctx, &fp, &vecs[0], &vecs[1]);
    let fd = oracle::fd_ddc(
        chart,
        &z,
        xi,
        eta,
        |y| potential(ctx, &OrbitPointC { y: y.clone() }),
        &FdConfig::default(),
    )?;
    let norm = (metric_g(ctx, &fp, &vecs[0], &vecs[0]) * metric_g(ctx, &fp, &vecs[1], &vecs[1])).sqrt();
    Ok((fd - closed).abs() / norm)
}

fn closedness_trial(ctx: &AlgebraContext, rng: &mut ChaCha20Rng) -> Result<TrialValues> {
    let mut out = TrialValues::new();
    let truth = sample_fiber_point(ctx, rng, 1.0)?;
    let chart = HolomorphicChart::centered_at(ctx, &truth.y);
    let dim = chart.dim();
    let z = DVector::<Complex64>::zeros(dim);
    let (xi, eta, zeta) = (
        random_chart_direction(dim, rng),
        random_chart_direction(dim, rng),
        random_chart_direction(dim, rng),
    );
    let cfg = FdConfig::default();

    out.insert(
        "ddc_shifted_potential_vs_omega1",
        ddc_residual(ctx, &chart, &xi, &eta, hyperkahler::shifted_potential)?,
    );

    let (fp, vecs) = chart_vectors(ctx, &chart, &z, &[&xi, &eta, &zeta])?;
    let n3 = vecs.iter().map(|v| metric_g(ctx, &fp, v, v).sqrt()).product::<f64>();
    for (name, form) in [
        ("d_omega1", KahlerForm::One),
        ("d_omega2", KahlerForm::Two),
        ("d_omega3", KahlerForm::Three),
    ] {
        let d = oracle::fd_exterior_derivative(&z, [&xi, &eta, &zeta], |p, u, v| form_value(ctx, &chart, form, p, u, v), &cfg)?;
        out.insert(name, d.abs() / n3);
    }

    // order of the plain central scheme on the potential along a chart line
    let k = |t: f64| {
        hyperkahler::potential_k(
            ctx,
            &OrbitPointC {
                y: chart.point(&(&xi * c(t)))?,
            },
        )
    };
    let reference = oracle::fd_derivative(
        k,
        &FdConfig {
            step: 2e-3,
            richardson: true,
        },
    )?;
    let plain = |h: f64| {
        oracle::fd_derivative(
            k,
            &FdConfig {
                step: h,
                richardson: false,
            },
        )
        .map(|d| (d - reference).abs())
    };
    let (e1, e2) = (plain(0.02)?, plain(0.01)?);
    out.insert("fd_order", oracle::observed_order(e1, e2));
    Ok(out)
}
