//! The unitary model: `g = u(n)`, the grading element `D`, the splitting
//! `g = k0 + m0` and the complex structure `I = (1/c) ad(D)` on `m0`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, I};

/// Relative tolerance used when validating subspace tags.
pub const TAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceTag {
    #[serde(rename = "gC")]
    GC,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "k0")]
    K0,
    #[serde(rename = "m0")]
    M0,
    #[serde(rename = "mPlus")]
    MPlus,
    #[serde(rename = "mMinus")]
    MMinus,
}

impl SpaceTag {
    pub fn name(self) -> &'static str {
        match self {
            SpaceTag::GC => "gC",
            SpaceTag::G => "g",
            SpaceTag::K0 => "k0",
            SpaceTag::M0 => "m0",
            SpaceTag::MPlus => "mPlus",
            SpaceTag::MMinus => "mMinus",
        }
    }
}

/// Fixed data of the model: dimensions, `D = i kappa (p+ - p-)` and the
/// spectral constant `c`.
#[derive(Debug, Clone)]
pub struct AlgebraContext {
    pub n: usize,
    pub k: usize,
    pub kappa: f64,
    pub c: f64,
    pub d: CMat,
    pub p_plus: CMat,
    pub p_minus: CMat,
}

impl AlgebraContext {
    pub fn new(n: usize, k: usize, kappa: f64) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidDimension { n, k });
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidKappa(kappa));
        }
        let p_plus = CMat::from_fn(n, n, |i, j| if i == j && i < k { c(1.0) } else { c(0.0) });
        let p_minus = linalg::identity(n) - &p_plus;
        let d = (&p_plus - &p_minus) * Complex64::new(0.0, kappa);
        // c is read off the spectrum of -iD rather than assumed
        let (vals, _) = linalg::eigh(&(&d * -I));
        let gap = vals[n - 1] - vals[0];
        if (gap - 2.0 * kappa).abs() > 1e-12 * kappa.max(1.0) {
            return Err(Error::GapMismatch {
                measured: gap,
                expected: 2.0 * kappa,
            });
        }
        Ok(AlgebraContext {
            n,
            k,
            kappa,
            c: gap,
            d,
            p_plus,
            p_minus,
        })
    }

    /// Real dimension of `m0`.
    pub fn m_dim(&self) -> usize {
        2 * self.k * (self.n - self.k)
    }

    /// Rank of the strongly orthogonal system.
    pub fn rank(&self) -> usize {
        self.k.min(self.n - self.k)
    }

    pub fn check_shape(&self, m: &CMat) -> Result<()> {
        if m.nrows() != self.n || m.ncols() != self.n {
            return Err(Error::Shape {
                expected: self.n,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(())
    }

    pub fn block_diag(&self, m: &CMat) -> CMat {
        let k = self.k;
        CMat::from_fn(self.n, self.n, |i, j| if (i < k) == (j < k) { m[(i, j)] } else { c(0.0) })
    }

    pub fn off_diag(&self, m: &CMat) -> CMat {
        m - self.block_diag(m)
    }

    /// Top-right block only (the `+ic` eigenspace of `ad(D)`).
    pub fn upper_block(&self, m: &CMat) -> CMat {
        let k = self.k;
        CMat::from_fn(self.n, self.n, |i, j| if i < k && j >= k { m[(i, j)] } else { c(0.0) })
    }

    pub fn lower_block(&self, m: &CMat) -> CMat {
        let k = self.k;
        CMat::from_fn(self.n, self.n, |i, j| if i >= k && j < k { m[(i, j)] } else { c(0.0) })
    }

    /// `I(m) = (1/c)[D, m]` extended complex-linearly to off-diagonal matrices.
    pub fn i_op(&self, m: &CMat) -> CMat {
        linalg::comm(&self.d, m) / c(self.c)
    }

    /// Orthonormal basis of `m0` for the real pairing `Re<.,.>`.
    pub fn m0_basis(&self) -> Vec<CMat> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(self.m_dim());
        for i in 0..self.k {
            for j in self.k..self.n {
                let mut re = CMat::zeros(self.n, self.n);
                re[(i, j)] = c(s);
                re[(j, i)] = c(-s);
                let mut im = CMat::zeros(self.n, self.n);
                im[(i, j)] = Complex64::new(0.0, s);
                im[(j, i)] = Complex64::new(0.0, s);
                out.push(re);
                out.push(im);
            }
        }
        out
    }

    /// Coordinates of `m` in [`Self::m0_basis`].
    pub fn m0_coords(&self, m: &CMat) -> DVector<f64> {
        let basis = self.m0_basis();
        DVector::from_iterator(basis.len(), basis.iter().map(|b| linalg::re_inner(b, m)))
    }

    pub fn m0_from_coords(&self, v: &DVector<f64>) -> CMat {
        let mut out = CMat::zeros(self.n, self.n);
        for (b, x) in self.m0_basis().iter().zip(v.iter()) {
            out += b * c(*x);
        }
        out
    }
}

/// A matrix tagged with the subspace it is known to lie in.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub mat: CMat,
    pub tag: SpaceTag,
}

impl Element {
    /// Validates the tag invariants before tagging.
    pub fn new(ctx: &AlgebraContext, mat: CMat, tag: SpaceTag) -> Result<Self> {
        ctx.check_shape(&mat)?;
        let scale = linalg::fro(&mat).max(1.0);
        let residual = tag_residual(ctx, &mat, tag) / scale;
        if residual > TAG_TOL {
            return Err(Error::NotInSpace {
                space: tag.name(),
                residual,
            });
        }
        Ok(Element { mat, tag })
    }

    pub fn gc(mat: CMat) -> Self {
        Element { mat, tag: SpaceTag::GC }
    }

    pub fn norm(&self) -> f64 {
        linalg::fro(&self.mat)
    }
}

/// Distance of `m` from the subspace named by `tag`.
pub fn tag_residual(ctx: &AlgebraContext, m: &CMat, tag: SpaceTag) -> f64 {
    match tag {
        SpaceTag::GC => 0.0,
        SpaceTag::G => linalg::skew_residual(m),
        SpaceTag::K0 => linalg::skew_residual(m) + linalg::fro(&ctx.off_diag(m)),
        SpaceTag::M0 => linalg::skew_residual(m) + linalg::fro(&ctx.block_diag(m)),
        SpaceTag::MPlus => linalg::fro(&(m - ctx.upper_block(m))),
        SpaceTag::MMinus => linalg::fro(&(m - ctx.lower_block(m))),
    }
}

fn classify(ctx: &AlgebraContext, m: &CMat) -> SpaceTag {
    let scale = linalg::fro(m).max(1.0);
    for tag in [SpaceTag::K0, SpaceTag::M0, SpaceTag::G] {
        if tag_residual(ctx, m, tag) <= TAG_TOL * scale {
            return tag;
        }
    }
    SpaceTag::GC
}

pub fn bracket(ctx: &AlgebraContext, x: &Element, y: &Element) -> Element {
    use SpaceTag::*;
    let mat = linalg::comm(&x.mat, &y.mat);
    let tag = match (x.tag, y.tag) {
        (K0, K0) | (M0, M0) => K0,
        (K0, M0) | (M0, K0) => M0,
        (G | K0 | M0, G | K0 | M0) => G,
        _ => classify(ctx, &mat),
    };
    Element { mat, tag }
}

/// Hermitian pairing `<x, y> = Tr(x* y)`.
pub fn inner(x: &Element, y: &Element) -> Complex64 {
    linalg::tr_inner(&x.mat, &y.mat)
}

/// Orthogonal projection for the real pairing `Re<.,.>`.
///
/// `k0` and `m0` keep the block-diagonal and block-off-diagonal parts, so
/// they act on `gC` as the projections onto the complexified subspaces and
/// restrict to the real splitting on `g`.
pub fn project(ctx: &AlgebraContext, x: &Element, target: SpaceTag) -> Element {
    let mat = match target {
        SpaceTag::GC => x.mat.clone(),
        SpaceTag::G => linalg::skew_part(&x.mat),
        SpaceTag::K0 => ctx.block_diag(&x.mat),
        SpaceTag::M0 => ctx.off_diag(&x.mat),
        SpaceTag::MPlus => ctx.upper_block(&x.mat),
        SpaceTag::MMinus => ctx.lower_block(&x.mat),
    };
    let tag = if tag_residual(ctx, &mat, target) <= TAG_TOL * linalg::fro(&mat).max(1.0) {
        target
    } else {
        classify(ctx, &mat)
    };
    Element { mat, tag }
}

/// The complex structure on `m0` (and complex-linearly on its
/// complexification).
pub fn complex_structure_i(ctx: &AlgebraContext, m: &Element) -> Result<Element> {
    let residual = linalg::fro(&ctx.block_diag(&m.mat)) / m.norm().max(1.0);
    if residual > TAG_TOL {
        return Err(Error::NotInSpace { space: "m0", residual });
    }
    let mat = ctx.i_op(&m.mat);
    let tag = if m.tag == SpaceTag::M0 { SpaceTag::M0 } else { classify(ctx, &mat) };
    Ok(Element { mat, tag })
}

/// Random element of the tagged subspace with Frobenius norm `scale`.
pub fn random_element(ctx: &AlgebraContext, tag: SpaceTag, seed: u64, scale: f64) -> Element {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    random_element_with(ctx, tag, &mut rng, scale)
}

pub fn random_element_with(ctx: &AlgebraContext, tag: SpaceTag, rng: &mut impl rand::Rng, scale: f64) -> Element {
    let raw = gaussian_matrix(ctx.n, rng);
    let mat = match tag {
        SpaceTag::GC => raw,
        SpaceTag::G => linalg::skew_part(&raw),
        SpaceTag::K0 => ctx.block_diag(&linalg::skew_part(&raw)),
        SpaceTag::M0 => ctx.off_diag(&linalg::skew_part(&raw)),
        SpaceTag::MPlus => ctx.upper_block(&raw),
        SpaceTag::MMinus => ctx.lower_block(&raw),
    };
    let norm = linalg::fro(&mat);
    Element {
        mat: mat * c(scale / norm),
        tag,
    }
}

pub fn gaussian_matrix(n: usize, rng: &mut impl rand::Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}
