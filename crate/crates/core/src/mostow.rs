//! Mostow decomposition `O^C = { Ad_D(e^{ia}) x : x in O, a in m_x }`.
//!
//! The projection `pi` sends `y` to the point of the compact orbit nearest
//! to it.  It is computed by Riemannian descent on `O` with Armijo steps
//! along geodesics, finished by Newton steps once the Hessian is positive.

use nalgebra::{Cholesky, DVector};

use crate::algebra::AlgebraContext;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat, I};
use crate::orbit::{CompactPoint, OrbitPointC};
use crate::speccalc::{apply_ad_function, AdKernel};
use crate::tangent;

pub const GRAD_TOL: f64 = 1e-10;
pub const MAX_ITERS: usize = 5000;
/// Gradient norm (relative to the objective scale) below which Newton steps are tried.
pub const NEWTON_SWITCH: f64 = 1e-4;

/// `Ad_D(e^{ia})(x)` for `a` in `m_x`.
pub fn forward(ctx: &AlgebraContext, x: &CompactPoint, a: &CMat) -> Result<OrbitPointC> {
    let a0 = x.to_base(a);
    let res = linalg::skew_residual(&a0) + linalg::fro(&ctx.block_diag(&a0));
    if res > 1e-10 * linalg::fro(a).max(1.0) {
        return Err(Error::NotInSpace {
            space: "m_x",
            residual: res,
        });
    }
    let e = linalg::exp_herm(&(a * I));
    let einv = linalg::exp_herm(&(a * -I));
    Ok(OrbitPointC {
        y: &e * (&x.x + &ctx.d) * einv - &ctx.d,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectionDiagnostics {
    pub iterations: usize,
    pub newton_steps: usize,
    pub grad_norm: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub point: CompactPoint,
    pub diagnostics: ProjectionDiagnostics,
}

struct Objective<'a> {
    ctx: &'a AlgebraContext,
    big: CMat,
}

impl Objective<'_> {
    fn value(&self, u: &CMat) -> f64 {
        let r = &self.big - u * &self.ctx.d * u.adjoint();
        0.5 * linalg::fro(&r).powi(2)
    }

    fn pulled(&self, u: &CMat) -> CMat {
        u.adjoint() * &self.big * u
    }

    /// Riemannian gradient at `u`, as an element of `m0`.
    fn gradient(&self, w: &CMat) -> CMat {
        let p = self.ctx.off_diag(&linalg::skew_part(w));
        self.ctx.i_op(&p) * c(-self.ctx.c)
    }

    /// Second derivative along geodesics, polarised, on the basis of `m0`.
    fn hessian(&self, w: &CMat, basis: &[CMat]) -> RMat {
        let d = &self.ctx.d;
        let resid = w - d;
        let bd: Vec<CMat> = basis.iter().map(|b| linalg::comm(b, d)).collect();
        let dim = basis.len();
        let mut h = RMat::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let sym = linalg::comm(&basis[i], &bd[j]) + linalg::comm(&basis[j], &bd[i]);
                let v = linalg::re_inner(&bd[i], &bd[j]) - 0.5 * linalg::re_inner(&resid, &sym);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }
}

/// Initial frame: nearest orbit point to the skew-Hermitian part of `y + D`,
/// i.e. the top-`k` eigenvectors of `(Y - Y*) / 2i`.
fn initial_frame(ctx: &AlgebraContext, big: &CMat) -> Result<CMat> {
    let h = (big - big.adjoint()) * (-I * c(0.5));
    let (vals, vecs) = linalg::eigh(&h);
    let n = ctx.n;
    let gap = vals[n - ctx.k] - vals[n - ctx.k - 1];
    let spread = vals[n - 1] - vals[0];
    if gap <= 1e-12 * spread.max(ctx.kappa) {
        return Err(Error::Degenerate(gap));
    }
    let mut u = CMat::zeros(n, n);
    for j in 0..n {
        let src = if j < ctx.k { n - ctx.k + j } else { j - ctx.k };
        u.set_column(j, &vecs.column(src));
    }
    Ok(u)
}

pub fn project_pi(ctx: &AlgebraContext, y: &OrbitPointC) -> Result<Projection> {
    let big = y.shifted(ctx);
    let u0 = initial_frame(ctx, &big)?;
    project_pi_from(ctx, y, &u0)
}

/// Runs the descent from the compact point represented by the unitary `u0`.
pub fn project_pi_from(ctx: &AlgebraContext, y: &OrbitPointC, u0: &CMat) -> Result<Projection> {
    let obj = Objective { ctx, big: y.shifted(ctx) };
    let scale = ctx.c * linalg::fro(&obj.big).max(ctx.kappa);
    let tol = GRAD_TOL.max(1e-14 * scale);
    let basis = ctx.m0_basis();
    let mut u = linalg::unitarize(u0);
    let mut f = obj.value(&u);
    let mut step = 1.0 / (ctx.c * ctx.c);
    let mut diag = ProjectionDiagnostics::default();
    for it in 0..MAX_ITERS {
        let w = obj.pulled(&u);
        let g = obj.gradient(&w);
        let gn = linalg::fro(&g);
        diag.iterations = it;
        diag.grad_norm = gn;
        diag.objective = f;
        if gn <= tol {
            return Ok(Projection {
                point: CompactPoint::from_unitary(ctx, u),
                diagnostics: diag,
            });
        }
        if gn < NEWTON_SWITCH * scale {
            if let Some(s) = newton_step(&obj, &w, &g, &basis) {
                let trial = linalg::unitarize(&(&u * linalg::exp_skew(&s)));
                let ft = obj.value(&trial);
                if ft <= f + 1e-13 * scale * scale.max(1.0) {
                    u = trial;
                    f = ft;
                    diag.newton_steps += 1;
                    continue;
                }
            }
        }
        // Armijo backtracking along the geodesic in direction -grad
        let mut t = (step * 2.0).min(std::f64::consts::FRAC_PI_4 / gn);
        let mut accepted = false;
        for _ in 0..80 {
            let trial = &u * linalg::exp_skew(&(&g * c(-t)));
            let ft = obj.value(&trial);
            if ft <= f - 1e-4 * t * gn * gn {
                u = linalg::unitarize(&trial);
                f = ft;
                step = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no decrease possible at working precision; accept if stationary enough
            if gn <= 1e3 * tol {
                return Ok(Projection {
                    point: CompactPoint::from_unitary(ctx, u),
                    diagnostics: diag,
                });
            }
            return Err(Error::NoConvergence { grad: gn, iters: it });
        }
    }
    Err(Error::NoConvergence {
        grad: diag.grad_norm,
        iters: MAX_ITERS,
    })
}

fn newton_step(obj: &Objective, w: &CMat, g: &CMat, basis: &[CMat]) -> Option<CMat> {
    let h = obj.hessian(w, basis);
    let chol = Cholesky::new(h)?;
    let gv = DVector::from_iterator(basis.len(), basis.iter().map(|b| linalg::re_inner(b, g)));
    let sv = chol.solve(&(-gv));
    let mut s = CMat::zeros(w.nrows(), w.ncols());
    for (b, t) in basis.iter().zip(sv.iter()) {
        s += b * c(*t);
    }
    let ns = linalg::fro(&s);
    if ns > std::f64::consts::FRAC_PI_4 {
        s *= c(std::f64::consts::FRAC_PI_4 / ns);
    }
    Some(s)
}

/// A point of `O^C` with its Mostow coordinates: `y = Ad_D(e^{ia}) x`,
/// `x = u D u* - D`, `a = u a0 u*`.
#[derive(Debug, Clone)]
pub struct FiberedPoint {
    pub y: OrbitPointC,
    pub x: CompactPoint,
    pub a: CMat,
    pub a0: CMat,
    /// `e^{i a0} D e^{-i a0}`, the pulled-back `y + D`.
    pub e: CMat,
}

impl FiberedPoint {
    pub fn from_parts(ctx: &AlgebraContext, x: CompactPoint, a: CMat) -> Result<Self> {
        let y = forward(ctx, &x, &a)?;
        let a0 = x.to_base(&a);
        let e = x.to_base(&y.shifted(ctx));
        Ok(FiberedPoint { y, x, a, a0, e })
    }

    pub fn base(ctx: &AlgebraContext) -> Self {
        let z = CMat::zeros(ctx.n, ctx.n);
        FiberedPoint {
            y: OrbitPointC::base(ctx),
            x: CompactPoint::base(ctx),
            a: z.clone(),
            a0: z,
            e: ctx.d.clone(),
        }
    }

    /// Orthonormal basis of `m_x`.
    pub fn m_basis(&self, ctx: &AlgebraContext) -> Vec<CMat> {
        self.x.m_basis(ctx)
    }
}

/// Recovers `a` in `m_x` from `y` once `x = pi(y)` is known.
pub fn fiber_coordinate(ctx: &AlgebraContext, y: &OrbitPointC, x: &CompactPoint) -> Result<CMat> {
    let y0 = x.to_base(&y.shifted(ctx)) - &ctx.d;
    let im = (&y0 + y0.adjoint()) * (-I * c(0.5));
    let v0 = ctx.i_op(&ctx.off_diag(&im)) * c(-1.0 / ctx.c);
    let a0 = tangent::f2(ctx, &v0)?;
    Ok(x.from_base(&a0))
}

/// `y -> (pi(y), a)`, checked by re-applying [`forward`].
pub fn decompose(ctx: &AlgebraContext, y: &OrbitPointC) -> Result<FiberedPoint> {
    let proj = project_pi(ctx, y)?;
    let a = fiber_coordinate(ctx, y, &proj.point)?;
    let fp = FiberedPoint::from_parts(ctx, proj.point, a)?;
    let err = linalg::fro(&(&fp.y.y - &y.y));
    if err > 1e-8 * linalg::fro(&y.shifted(ctx)) {
        return Err(Error::NotOnOrbit(format!("Mostow reconstruction error {err:.3e}")));
    }
    Ok(FiberedPoint { y: y.clone(), ..fp })
}

/// Tangent vector `X^{c + i c'}(y) = [c + i c', y + D]` with `c, c'` in `m_x`.
#[derive(Debug, Clone)]
pub struct TangentVecC {
    pub c: CMat,
    pub c_prime: CMat,
    pub ambient: CMat,
}

impl TangentVecC {
    pub fn complex_label(&self) -> CMat {
        &self.c + &self.c_prime * I
    }
}

pub fn rho(ctx: &AlgebraContext, fp: &FiberedPoint, c1: &CMat, c2: &CMat) -> TangentVecC {
    let lab = c1 + c2 * I;
    TangentVecC {
        c: c1.clone(),
        c_prime: c2.clone(),
        ambient: linalg::comm(&lab, &fp.y.shifted(ctx)),
    }
}

/// Inverts [`rho`]: pulls the ambient vector back to the fiber over `0`,
/// reads off the `m`-part of `e^{-ia} (c + ic') e^{ia}` and undoes
/// `cosh(ad(ia))` on it.
pub fn rho_inverse(ctx: &AlgebraContext, fp: &FiberedPoint, ambient: &CMat) -> Result<TangentVecC> {
    let e_pos = linalg::exp_herm(&(&fp.a0 * I));
    let e_neg = linalg::exp_herm(&(&fp.a0 * -I));
    let m = &e_neg * fp.x.to_base(ambient) * &e_pos;
    let leak = linalg::fro(&ctx.block_diag(&m));
    if leak > 1e-8 * linalg::fro(&m).max(1e-300) && leak > 1e-14 {
        return Err(Error::NotInSpace {
            space: "T_y O^C",
            residual: leak / linalg::fro(&m),
        });
    }
    let um = ctx.i_op(&ctx.off_diag(&m)) / c(ctx.c);
    let lab0 = apply_ad_function(&AdKernel::Sech, &fp.a0, &um)?;
    let c1 = fp.x.from_base(&linalg::skew_part(&lab0));
    let c2 = fp.x.from_base(&(linalg::herm_part(&lab0) * -I));
    Ok(TangentVecC {
        c: c1,
        c_prime: c2,
        ambient: ambient.clone(),
    })
}

/// `pi_*` in `rho` coordinates: the vertical label is dropped.
pub fn pi_pushforward(v: &TangentVecC) -> CMat {
    v.c.clone()
}

/// `Re<[c, e^{ia} D e^{-ia}], [d, D]>` at the fiber point `Ad_D(e^{ia}) 0`.
pub fn hessian_form(ctx: &AlgebraContext, a0: &CMat, c1: &CMat, d1: &CMat) -> f64 {
    let e = linalg::exp_herm(&(a0 * I)) * &ctx.d * linalg::exp_herm(&(a0 * -I));
    linalg::re_inner(&linalg::comm(c1, &e), &linalg::comm(d1, &ctx.d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_element, SpaceTag};
    use crate::linalg::fro;
    use crate::orbit::{random_compact_point, random_unitary};
    use crate::roots::build_sos;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn forward_example_n2() {
        let ctx = AlgebraContext::new(2, 1, 1.0).unwrap();
        let x1 = build_sos(&ctx).triples[0].x.clone();
        let t = 0.4;
        let y = forward(&ctx, &CompactPoint::base(&ctx), &(&x1 * c(t))).unwrap();
        // y = i (cosh 2t - 1) sigma_z + sinh(2t) sigma_x
        let expect = CMat::from_row_slice(
            2,
            2,
            &[
                num_complex::Complex64::new(0.0, (2.0 * t).cosh() - 1.0),
                c((2.0 * t).sinh()),
                c((2.0 * t).sinh()),
                num_complex::Complex64::new(0.0, 1.0 - (2.0 * t).cosh()),
            ],
        );
        assert!(fro(&(y.y - expect)) < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let y = forward(&ctx, &random_compact_point(&ctx, &mut rng), &CMat::zeros(4, 4)).unwrap();
        let y = OrbitPointC {
            y: &y.y + random_element(&ctx, SpaceTag::G, 4, 0.3).mat,
        };
        let obj = Objective {
            ctx: &ctx,
            big: y.shifted(&ctx),
        };
        let u = random_unitary(4, &mut rng);
        let g = obj.gradient(&obj.pulled(&u));
        let b = random_element(&ctx, SpaceTag::M0, 5, 1.0).mat;
        let h = 1e-6;
        let fd = (obj.value(&(&u * linalg::exp_skew(&(&b * c(h))))) - obj.value(&(&u * linalg::exp_skew(&(&b * c(-h)))))) / (2.0 * h);
        assert!((fd - linalg::re_inner(&g, &b)).abs() < 1e-7);
    }

    #[test]
    fn round_trip_and_zero_fiber() {
        for (n, k, kappa) in [(2, 1, 1.0), (5, 2, 0.5), (6, 3, 1.0)] {
            let ctx = AlgebraContext::new(n, k, kappa).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(n as u64);
            let x = random_compact_point(&ctx, &mut rng);
            let a = x.from_base(&random_element(&ctx, SpaceTag::M0, 6, 1.5).mat);
            let y = forward(&ctx, &x, &a).unwrap();
            let fp = decompose(&ctx, &y).unwrap();
            assert!(fro(&(&fp.x.x - &x.x)) < 1e-9, "x error");
            assert!(fro(&(&fp.a - &a)) < 1e-9, "a error");
            let y0 = forward(&ctx, &CompactPoint::base(&ctx), &random_element(&ctx, SpaceTag::M0, 7, 1.0).mat).unwrap();
            assert!(fro(&project_pi(&ctx, &y0).unwrap().point.x) < 1e-12);
        }
    }

    #[test]
    fn descent_from_random_start() {
        let ctx = AlgebraContext::new(6, 2, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let x = random_compact_point(&ctx, &mut rng);
        let a = x.from_base(&random_element(&ctx, SpaceTag::M0, 1, 1.0).mat);
        let y = forward(&ctx, &x, &a).unwrap();
        for _ in 0..5 {
            let u0 = random_unitary(6, &mut rng);
            let p = project_pi_from(&ctx, &y, &u0).unwrap();
            assert!(fro(&(&p.point.x - &x.x)) < 1e-8);
        }
    }

    #[test]
    fn rho_inverse_recovers_labels() {
        let ctx = AlgebraContext::new(5, 2, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let x = random_compact_point(&ctx, &mut rng);
        let fp = FiberedPoint::from_parts(&ctx, x.clone(), x.from_base(&random_element(&ctx, SpaceTag::M0, 2, 1.2).mat)).unwrap();
        let c1 = x.from_base(&random_element(&ctx, SpaceTag::M0, 3, 1.0).mat);
        let c2 = x.from_base(&random_element(&ctx, SpaceTag::M0, 4, 1.0).mat);
        let v = rho(&ctx, &fp, &c1, &c2);
        let back = rho_inverse(&ctx, &fp, &v.ambient).unwrap();
        assert!(fro(&(back.c - c1)) < 1e-11);
        assert!(fro(&(back.c_prime - c2)) < 1e-11);
        assert!(rho_inverse(&ctx, &fp, &linalg::identity(5)).is_err());
    }

    #[test]
    fn hessian_is_symmetric_positive() {
        let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
        let a0 = random_element(&ctx, SpaceTag::M0, 1, 1.5).mat;
        let basis = ctx.m0_basis();
        let h = RMat::from_fn(basis.len(), basis.len(), |i, j| hessian_form(&ctx, &a0, &basis[i], &basis[j]));
        assert!((&h - h.transpose()).norm() < 1e-12 * h.norm());
        assert!(linalg::eigh_real(&h).0[0] > 0.0);
    }
}
