//! The complex orbit `O^C = {g (D) g^-1 - D}` of pairs of complementary
//! subspaces, its compact real form `O`, the holomorphic subspace-pair chart
//! and the invariant forms living on them.

use nalgebra::DVector;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::AlgebraContext;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, I};

/// Relative tolerance of the spectral certificate of orbit membership.
pub const ORBIT_TOL: f64 = 1e-8;

/// A point `y` of the complex orbit, stored through `y` itself; `y + D` has
/// eigenvalues `i kappa` (multiplicity `k`) and `-i kappa`.
#[derive(Debug, Clone)]
pub struct OrbitPointC {
    pub y: CMat,
}

/// Residuals of the spectral certificate: `|(y+D)^2 + kappa^2|` relative to
/// `|y+D|^2`, and the deviation of the `+i kappa` multiplicity from `k`.
pub fn orbit_certificate(ctx: &AlgebraContext, y: &CMat) -> (f64, f64) {
    let big = y + &ctx.d;
    let k2 = ctx.kappa * ctx.kappa;
    let sq = &big * &big + linalg::identity(ctx.n) * c(k2);
    let rel = linalg::fro(&sq) / linalg::fro(&big).powi(2).max(k2);
    // Tr of the projector (1 - i Y / kappa) / 2 onto the +i kappa eigenspace
    let tr = ctx.n as f64 / 2.0 + (linalg::trace(&big) * -I).re / (2.0 * ctx.kappa);
    (rel, (tr - ctx.k as f64).abs())
}

impl OrbitPointC {
    pub fn new(ctx: &AlgebraContext, y: CMat) -> Result<Self> {
        ctx.check_shape(&y)?;
        let (rel, mult) = orbit_certificate(ctx, &y);
        if !(rel <= ORBIT_TOL && mult <= 1e-6) {
            return Err(Error::NotOnOrbit(format!(
                "certificate residual {rel:.3e}, multiplicity defect {mult:.3e}"
            )));
        }
        Ok(OrbitPointC { y })
    }

    pub fn base(ctx: &AlgebraContext) -> Self {
        OrbitPointC {
            y: CMat::zeros(ctx.n, ctx.n),
        }
    }

    /// `y + D`.
    pub fn shifted(&self, ctx: &AlgebraContext) -> CMat {
        &self.y + &ctx.d
    }

    /// Whether `y` lies on the compact orbit, i.e. `y + D` is skew-Hermitian.
    pub fn is_compact(&self, ctx: &AlgebraContext, tol: f64) -> bool {
        linalg::skew_residual(&self.shifted(ctx)) <= tol * linalg::fro(&self.shifted(ctx))
    }
}

/// A point `x = u D u* - D` of the compact orbit together with a unitary
/// representative `u`.
#[derive(Debug, Clone)]
pub struct CompactPoint {
    pub x: CMat,
    pub u: CMat,
}

impl CompactPoint {
    pub fn base(ctx: &AlgebraContext) -> Self {
        CompactPoint {
            x: CMat::zeros(ctx.n, ctx.n),
            u: linalg::identity(ctx.n),
        }
    }

    pub fn from_unitary(ctx: &AlgebraContext, u: CMat) -> Self {
        let x = &u * &ctx.d * u.adjoint() - &ctx.d;
        CompactPoint { x, u }
    }

    /// Recovers a unitary representative from the eigenvectors of `x + D`.
    pub fn from_matrix(ctx: &AlgebraContext, x: &CMat) -> Result<Self> {
        let big = x + &ctx.d;
        let skew = linalg::skew_residual(&big) / linalg::fro(&big);
        if skew > ORBIT_TOL {
            return Err(Error::NotOnOrbit(format!("not on the compact orbit: skew residual {skew:.3e}")));
        }
        OrbitPointC::new(ctx, x.clone())?;
        // (x + D) / (i kappa) is Hermitian with eigenvalues +-1
        let (_, vecs) = linalg::eigh(&(&big * (-I / c(ctx.kappa))));
        let n = ctx.n;
        let mut u = CMat::zeros(n, n);
        for j in 0..n {
            // the top k eigenvectors span H+, the rest H-
            let src = if j < ctx.k { n - ctx.k + j } else { j - ctx.k };
            u.set_column(j, &vecs.column(src));
        }
        Ok(CompactPoint { x: x.clone(), u })
    }

    /// `I_x = (1/c) ad(x + D)` on `m_x = u m0 u*`.
    pub fn i_op(&self, ctx: &AlgebraContext, m: &CMat) -> CMat {
        linalg::comm(&(&self.x + &ctx.d), m) / c(ctx.c)
    }

    pub fn to_base(&self, m: &CMat) -> CMat {
        self.u.adjoint() * m * &self.u
    }

    pub fn from_base(&self, m: &CMat) -> CMat {
        &self.u * m * self.u.adjoint()
    }

    /// Orthonormal basis of `m_x` for `Re<.,.>`.
    pub fn m_basis(&self, ctx: &AlgebraContext) -> Vec<CMat> {
        ctx.m0_basis().iter().map(|b| self.from_base(b)).collect()
    }
}

/// `Ad_D(g)(y) = g (y + D) g^-1 - D`.
pub fn ad_d_action(ctx: &AlgebraContext, g: &CMat, y: &CMat) -> Result<CMat> {
    let inv = g.clone().try_inverse().ok_or(Error::NotTransverse(f64::INFINITY))?;
    Ok(g * (y + &ctx.d) * inv - &ctx.d)
}

/// The holomorphic symplectic form at `0`: `Tr(X [D, Y])`.
pub fn kks_form_at_zero(ctx: &AlgebraContext, x: &CMat, y: &CMat) -> Complex64 {
    linalg::trace(&(x * linalg::comm(&ctx.d, y)))
}

/// The holomorphic symplectic form at a general point, obtained from the
/// one at `0` by invariance: `Tr(X [y + D, Y])` on ambient tangent vectors.
pub fn kks_form(ctx: &AlgebraContext, at: &OrbitPointC, x: &CMat, y: &CMat) -> Complex64 {
    linalg::trace(&(x * linalg::comm(&at.shifted(ctx), y)))
}

/// Kähler metric of the compact orbit in terms of `m_x` labels: `c^3 Re<c, d>`.
pub fn kahler_metric_o(ctx: &AlgebraContext, c1: &CMat, d1: &CMat) -> f64 {
    ctx.c.powi(3) * linalg::re_inner(c1, d1)
}

/// A pair of complementary subspaces given by column frames.
#[derive(Debug, Clone)]
pub struct SubspacePair {
    pub p: CMat,
    pub q: CMat,
}

/// Oblique projector onto `span(p)` along `span(q)`.
pub fn oblique_projector(p: &CMat, q: &CMat) -> Result<CMat> {
    let m = CMat::from_columns(&p.column_iter().chain(q.column_iter()).collect::<Vec<_>>());
    let sv = m.clone().singular_values();
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::NotTransverse(cond));
    }
    let inv = m.try_inverse().ok_or(Error::NotTransverse(cond))?;
    let k = p.ncols();
    Ok(p * inv.rows(0, k))
}

/// `y + D = i kappa (pi_P - pi_Q)` for the oblique projections of the pair.
pub fn point_from_pair(ctx: &AlgebraContext, pair: &SubspacePair) -> Result<OrbitPointC> {
    if pair.p.ncols() != ctx.k || pair.q.ncols() != ctx.n - ctx.k || pair.p.nrows() != ctx.n {
        return Err(Error::InvalidDimension {
            n: ctx.n,
            k: pair.p.ncols(),
        });
    }
    let pp = oblique_projector(&pair.p, &pair.q)?;
    let y = (pp * c(2.0) - linalg::identity(ctx.n)) * Complex64::new(0.0, ctx.kappa) - &ctx.d;
    Ok(OrbitPointC { y })
}

/// Orthonormal frames of the `+i kappa` and `-i kappa` eigenspaces of `y + D`.
pub fn pair_from_point(ctx: &AlgebraContext, y: &OrbitPointC) -> SubspacePair {
    let big = y.shifted(ctx);
    let proj = (linalg::identity(ctx.n) - &big * (I / c(ctx.kappa))) * c(0.5);
    let frame = |m: CMat, r: usize| {
        let svd = m.svd(true, false);
        let u = svd.u.unwrap();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        CMat::from_columns(&order[..r].iter().map(|&i| u.column(i)).collect::<Vec<_>>())
    };
    let q = frame(linalg::identity(ctx.n) - &proj, ctx.n - ctx.k);
    SubspacePair { p: frame(proj, ctx.k), q }
}

/// Holomorphic chart centered at a point: `P(Z) = P0 + Q0 Z`,
/// `Q(W) = Q0 + P0 W`, with coordinates `(Z, W)` flattened column-major.
#[derive(Debug, Clone)]
pub struct HolomorphicChart {
    pub p0: CMat,
    pub q0: CMat,
    pub kappa: f64,
    pub d: CMat,
}

impl HolomorphicChart {
    pub fn centered_at(ctx: &AlgebraContext, y: &OrbitPointC) -> Self {
        let pair = pair_from_point(ctx, y);
        HolomorphicChart {
            p0: pair.p,
            q0: pair.q,
            kappa: ctx.kappa,
            d: ctx.d.clone(),
        }
    }

    /// Complex dimension of the chart.
    pub fn dim(&self) -> usize {
        2 * self.p0.ncols() * self.q0.ncols()
    }

    fn frames(&self, z: &DVector<Complex64>) -> (CMat, CMat) {
        let (k, m) = (self.p0.ncols(), self.q0.ncols());
        let zm = CMat::from_column_slice(m, k, &z.as_slice()[..k * m]);
        let wm = CMat::from_column_slice(k, m, &z.as_slice()[k * m..]);
        (&self.p0 + &self.q0 * zm, &self.q0 + &self.p0 * wm)
    }

    fn projector(&self, z: &DVector<Complex64>) -> Result<(CMat, CMat, CMat)> {
        let (p, q) = self.frames(z);
        let m = CMat::from_columns(&p.column_iter().chain(q.column_iter()).collect::<Vec<_>>());
        let sv = m.clone().singular_values();
        let cond = sv.max() / sv.min();
        if !cond.is_finite() || cond > 1e8 {
            return Err(Error::ChartBreakdown(cond));
        }
        let inv = m.clone().try_inverse().ok_or(Error::ChartBreakdown(cond))?;
        let k = self.p0.ncols();
        Ok((&p * inv.rows(0, k), m, inv))
    }

    pub fn point(&self, z: &DVector<Complex64>) -> Result<CMat> {
        let (pp, _, _) = self.projector(z)?;
        let n = pp.nrows();
        Ok((pp * c(2.0) - linalg::identity(n)) * Complex64::new(0.0, self.kappa) - &self.d)
    }

    /// Ambient image of the chart vector `dz` at `z`.
    pub fn differential(&self, z: &DVector<Complex64>, dz: &DVector<Complex64>) -> Result<CMat> {
        let (pp, _, inv) = self.projector(z)?;
        let (k, m) = (self.p0.ncols(), self.q0.ncols());
        let dzm = CMat::from_column_slice(m, k, &dz.as_slice()[..k * m]);
        let dwm = CMat::from_column_slice(k, m, &dz.as_slice()[k * m..]);
        let dp = &self.q0 * dzm;
        let dq = &self.p0 * dwm;
        let dm = CMat::from_columns(&dp.column_iter().chain(dq.column_iter()).collect::<Vec<_>>());
        let n = pp.nrows();
        let mut e = CMat::zeros(n, n);
        for i in 0..k {
            e[(i, i)] = c(1.0);
        }
        // d(M E M^-1) = (dM E - pi_P dM) M^-1
        let dpp = (&dm * e - &pp * &dm) * inv;
        Ok(dpp * Complex64::new(0.0, 2.0 * self.kappa))
    }
}

pub fn random_unitary(n: usize, rng: &mut impl rand::Rng) -> CMat {
    // QR of a Ginibre matrix with the phases of R removed is Haar distributed
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        let col = q.column(j) * ph;
        q.set_column(j, &col);
    }
    q
}

pub fn random_compact_point(ctx: &AlgebraContext, rng: &mut impl rand::Rng) -> CompactPoint {
    CompactPoint::from_unitary(ctx, random_unitary(ctx.n, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_element, SpaceTag};
    use crate::linalg::fro;
    use crate::roots::build_sos;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn base_point_and_rejections() {
        let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
        assert!(OrbitPointC::new(&ctx, CMat::zeros(4, 4)).is_ok());
        let bad = random_element(&ctx, SpaceTag::GC, 1, 1.0).mat;
        assert!(OrbitPointC::new(&ctx, bad).is_err());
        // wrong multiplicity: -D has the right spectrum with k and n-k swapped
        let ctx3 = AlgebraContext::new(3, 1, 1.0).unwrap();
        assert!(OrbitPointC::new(&ctx3, &ctx3.d * c(-2.0)).is_err());
    }

    #[test]
    fn kks_examples_n2() {
        let ctx = AlgebraContext::new(2, 1, 1.0).unwrap();
        let sos = build_sos(&ctx);
        let t = &sos.triples[0];
        let w = kks_form_at_zero(&ctx, &t.x, &t.y);
        assert!((w - c(4.0)).norm() < 1e-14);
        assert!((kahler_metric_o(&ctx, &t.x, &t.x) - 16.0).abs() < 1e-14);
    }

    #[test]
    fn pair_round_trip() {
        let ctx = AlgebraContext::new(5, 2, 0.5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let pair = SubspacePair {
            p: crate::algebra::gaussian_matrix(5, &mut rng).columns(0, 2).into_owned(),
            q: crate::algebra::gaussian_matrix(5, &mut rng).columns(0, 3).into_owned(),
        };
        let y = point_from_pair(&ctx, &pair).unwrap();
        assert!(OrbitPointC::new(&ctx, y.y.clone()).is_ok());
        let back = point_from_pair(&ctx, &pair_from_point(&ctx, &y)).unwrap();
        assert!(fro(&(back.y - &y.y)) < 1e-10 * fro(&y.y).max(1.0));
        let degenerate = SubspacePair {
            p: pair.p.clone(),
            q: CMat::from_columns(&[pair.p.column(0), pair.q.column(1), pair.q.column(2)]),
        };
        assert!(point_from_pair(&ctx, &degenerate).is_err());
    }

    #[test]
    fn compact_points() {
        let ctx = AlgebraContext::new(6, 2, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let p = random_compact_point(&ctx, &mut rng);
        let op = OrbitPointC::new(&ctx, p.x.clone()).unwrap();
        assert!(op.is_compact(&ctx, 1e-12));
        let q = CompactPoint::from_matrix(&ctx, &p.x).unwrap();
        let rebuilt = CompactPoint::from_unitary(&ctx, q.u.clone());
        assert!(fro(&(rebuilt.x - &p.x)) < 1e-12);
    }

    #[test]
    fn chart_is_holomorphic_and_consistent() {
        let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let a = random_element(&ctx, SpaceTag::M0, 5, 0.7).mat;
        let u = random_unitary(4, &mut rng);
        let y0 = OrbitPointC {
            y: ad_d_action(&ctx, &(&u * linalg::exp_herm(&(&a * I))), &CMat::zeros(4, 4)).unwrap(),
        };
        let chart = HolomorphicChart::centered_at(&ctx, &y0);
        let zero = DVector::<Complex64>::zeros(chart.dim());
        assert!(fro(&(chart.point(&zero).unwrap() - &y0.y)) < 1e-10);
        let z = DVector::<Complex64>::from_fn(chart.dim(), |i, _| Complex64::new(0.05 * i as f64, -0.03));
        let dz = DVector::<Complex64>::from_fn(chart.dim(), |i, _| Complex64::new(0.2, 0.1 * i as f64));
        let h = 1e-6;
        let fd = (chart.point(&(&z + &dz * c(h))).unwrap() - chart.point(&(&z - &dz * c(h))).unwrap()) / c(2.0 * h);
        let exact = chart.differential(&z, &dz).unwrap();
        assert!(fro(&(&fd - &exact)) < 1e-7);
        // holomorphic: the differential is complex linear
        let idz = chart.differential(&z, &(&dz * I)).unwrap();
        assert!(fro(&(idz - exact * I)) < 1e-12);
    }
}
