//! Independent reference computations used to check the engines: truncated
//! Taylor series of `ad`, finite differences and random probing.  Nothing
//! here calls the spectral calculus or the projection optimizer.

use nalgebra::DVector;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::AlgebraContext;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::orbit::HolomorphicChart;
use crate::speccalc::AdKernel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-4,
            richardson: true,
        }
    }
}

impl FdConfig {
    fn check(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0 && self.step < 1.0) {
            return Err(Error::BadStep(self.step));
        }
        Ok(())
    }
}

fn bracket(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binom_half(j: usize) -> f64 {
    // binomial(1/2, j)
    (0..j).map(|i| (0.5 - i as f64) / (i + 1) as f64).product()
}

fn series_sqrt(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; a.len()];
    b[0] = a[0].sqrt();
    for n in 1..a.len() {
        let conv: f64 = (1..n).map(|k| b[k] * b[n - k]).sum();
        b[n] = (a[n] - conv) / (2.0 * b[0]);
    }
    b
}

const EULER: [f64; 8] = [1.0, -1.0, 5.0, -61.0, 1385.0, -50521.0, 2702765.0, -199360981.0];

/// Taylor coefficients `f_0 .. f_terms` of a kernel at zero.
pub fn taylor_coeffs(kernel: &AdKernel, terms: usize) -> Result<Vec<f64>> {
    let even = |f: &dyn Fn(usize) -> f64| (0..=terms).map(|j| if j % 2 == 0 { f(j) } else { 0.0 }).collect::<Vec<_>>();
    let sign = |j: usize| if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(match kernel {
        AdKernel::Exp => (0..=terms).map(|j| 1.0 / factorial(j)).collect(),
        AdKernel::Cosh => even(&|j| 1.0 / factorial(j)),
        AdKernel::Cos => even(&|j| sign(j) / factorial(j)),
        AdKernel::SinhOverX => even(&|j| 1.0 / factorial(j + 1)),
        AdKernel::SinOverX => even(&|j| sign(j) / factorial(j + 1)),
        AdKernel::CoshM1OverX2 => even(&|j| 1.0 / factorial(j + 2)),
        AdKernel::Sech => {
            if terms / 2 >= EULER.len() {
                return Err(Error::NoTaylor(format!("{kernel} beyond order {}", 2 * EULER.len() - 1)));
            }
            even(&|j| EULER[j / 2] / factorial(j))
        }
        AdKernel::ArgsinhOverX => even(&|j| {
            let m = j / 2;
            let s = if m % 2 == 0 { 1.0 } else { -1.0 };
            s * factorial(2 * m) / (4f64.powi(m as i32) * factorial(m).powi(2) * (2 * m + 1) as f64)
        }),
        AdKernel::SqrtOnePlus => (0..=terms).map(binom_half).collect(),
        AdKernel::SqrtOnePlusM1OverX => (0..=terms).map(|j| binom_half(j + 1)).collect(),
        AdKernel::PhiBg => series_sqrt(&taylor_coeffs(&AdKernel::SqrtOnePlusM1OverX, terms)?),
        AdKernel::SqrtOf(inner) => {
            let a = taylor_coeffs(inner, terms)?;
            if a[0] <= 0.0 {
                return Err(Error::NoTaylor(kernel.to_string()));
            }
            series_sqrt(&a)
        }
        AdKernel::OfSquare(inner) => {
            let a = taylor_coeffs(inner, terms / 2)?;
            (0..=terms).map(|j| if j % 2 == 0 { a[j / 2] } else { 0.0 }).collect()
        }
    })
}

/// `sum_{j <= terms} f_j ad(a)^j (y)`.
pub fn series_ad_function(kernel: &AdKernel, a: &CMat, y: &CMat, terms: usize) -> Result<CMat> {
    let coeffs = taylor_coeffs(kernel, terms)?;
    let mut term = y.clone();
    let mut out = CMat::zeros(y.nrows(), y.ncols());
    for (j, f) in coeffs.iter().enumerate() {
        if j > 0 {
            term = bracket(a, &term);
        }
        if *f != 0.0 {
            out += &term * Complex64::new(*f, 0.0);
        }
    }
    Ok(out)
}

fn richardson<T>(cfg: &FdConfig, d: impl Fn(f64) -> Result<T>, combine: impl Fn(T, T) -> T) -> Result<T> {
    cfg.check()?;
    if cfg.richardson {
        Ok(combine(d(cfg.step)?, d(cfg.step / 2.0)?))
    } else {
        d(cfg.step)
    }
}

/// Central difference of a scalar function at `0`.
pub fn fd_derivative(f: impl Fn(f64) -> Result<f64>, cfg: &FdConfig) -> Result<f64> {
    richardson(cfg, |h| Ok((f(h)? - f(-h)?) / (2.0 * h)), |a, b| (4.0 * b - a) / 3.0)
}

/// Second central difference of a scalar function at `0`.
pub fn fd_second_derivative(f: impl Fn(f64) -> Result<f64>, cfg: &FdConfig) -> Result<f64> {
    let f0 = f(0.0)?;
    richardson(cfg, |h| Ok((f(h)? - 2.0 * f0 + f(-h)?) / (h * h)), |a, b| (4.0 * b - a) / 3.0)
}

/// Velocity at `0` of a matrix-valued curve.
pub fn fd_pushforward(curve: impl Fn(f64) -> Result<CMat>, cfg: &FdConfig) -> Result<CMat> {
    richardson(
        cfg,
        |h| Ok((curve(h)? - curve(-h)?) / Complex64::new(2.0 * h, 0.0)),
        |a, b| (b * Complex64::new(4.0, 0.0) - a) / Complex64::new(3.0, 0.0),
    )
}

/// `dd^c K (X, Y) = 2i d d-bar K (X, Y)` in a holomorphic chart, i.e.
/// `D^2 K[i xi, eta] - D^2 K[xi, i eta]` for the chart vectors.
pub fn fd_ddc(
    chart: &HolomorphicChart,
    z: &DVector<Complex64>,
    xi: &DVector<Complex64>,
    eta: &DVector<Complex64>,
    potential: impl Fn(&CMat) -> Result<f64>,
    cfg: &FdConfig,
) -> Result<f64> {
    let i = Complex64::new(0.0, 1.0);
    let k = |p: &DVector<Complex64>| potential(&chart.point(p)?);
    let mixed = |u: &DVector<Complex64>, v: &DVector<Complex64>, h: f64| -> Result<f64> {
        let hc = Complex64::new(h, 0.0);
        let pp = k(&(z + u * hc + v * hc))?;
        let pm = k(&(z + u * hc - v * hc))?;
        let mp = k(&(z - u * hc + v * hc))?;
        let mm = k(&(z - u * hc - v * hc))?;
        Ok((pp - pm - mp + mm) / (4.0 * h * h))
    };
    let ieta = eta * i;
    let ixi = xi * i;
    richardson(cfg, |h| Ok(mixed(&ixi, eta, h)? - mixed(xi, &ieta, h)?), |a, b| (4.0 * b - a) / 3.0)
}

/// `d omega (X, Y, Z)` for constant chart vector fields:
/// `X omega(Y, Z) - Y omega(X, Z) + Z omega(X, Y)`.
pub fn fd_exterior_derivative(
    z: &DVector<Complex64>,
    vecs: [&DVector<Complex64>; 3],
    form: impl Fn(&DVector<Complex64>, &DVector<Complex64>, &DVector<Complex64>) -> Result<f64>,
    cfg: &FdConfig,
) -> Result<f64> {
    let [x, y, w] = vecs;
    let along = |dir: &DVector<Complex64>, u: &DVector<Complex64>, v: &DVector<Complex64>| {
        fd_derivative(|t| form(&(z + dir * Complex64::new(t, 0.0)), u, v), cfg)
    };
    Ok(along(x, y, w)? - along(y, x, w)? + along(w, x, y)?)
}

/// Observed order of an approximation from errors at `h` and `h / 2`.
pub fn observed_order(err_h: f64, err_half: f64) -> f64 {
    (err_h / err_half).log2()
}

fn probe_unitary(n: usize, spread: f64, rng: &mut impl rand::Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let s = (&g - g.adjoint()) * Complex64::new(0.5 * spread, 0.0);
    s.exp()
}

/// Smallest `(1/2)|y + D - w (x + D) w*|^2` over random unitaries `w`: half
/// drawn globally, half as perturbations of `x` at logarithmically spread
/// scales.
pub fn probe_min_distance(ctx: &AlgebraContext, y: &CMat, x: &CMat, samples: usize, rng: &mut impl rand::Rng) -> f64 {
    let big = y + &ctx.d;
    let center = x + &ctx.d;
    let mut best = f64::INFINITY;
    for s in 0..samples {
        let w = if s % 2 == 0 {
            probe_unitary(ctx.n, 3.0, rng)
        } else {
            let e: f64 = rng.random_range(-4.0..0.0);
            probe_unitary(ctx.n, 10f64.powf(e), rng)
        };
        let cand = &w * &center * w.adjoint();
        let d = 0.5 * (&big - cand).norm_squared();
        best = best.min(d);
    }
    best
}

/// Nearest compact point in closed form: `i kappa (2 P - 1) - D` with `P`
/// the spectral projector on the top `k` eigenvalues of `(Y - Y*) / 2i`.
pub fn ky_fan_projection(ctx: &AlgebraContext, y: &CMat) -> CMat {
    let big = y + &ctx.d;
    let h = (&big - big.adjoint()) * Complex64::new(0.0, -0.5);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..ctx.n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut p = CMat::zeros(ctx.n, ctx.n);
    for &j in &idx[..ctx.k] {
        let v = eig.eigenvectors.column(j);
        p += &v * v.adjoint();
    }
    let id = CMat::identity(ctx.n, ctx.n);
    (p * Complex64::new(2.0, 0.0) - id) * Complex64::new(0.0, ctx.kappa) - &ctx.d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_examples() {
        let a = CMat::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, 0.0));
        let y = CMat::from_fn(3, 3, |i, j| Complex64::new(0.0, (i * j) as f64 + 1.0));
        let one = series_ad_function(&AdKernel::Exp, &a, &y, 1).unwrap();
        assert!((one - (&y + bracket(&a, &y))).norm() < 1e-15);
        assert!((series_ad_function(&AdKernel::Cosh, &a, &y, 0).unwrap() - &y).norm() == 0.0);
    }

    #[test]
    fn stored_coefficients_match_kernels() {
        let kernels = [
            AdKernel::ArgsinhOverX,
            AdKernel::PhiBg,
            AdKernel::Sech,
            AdKernel::SqrtOnePlus,
            AdKernel::CoshM1OverX2,
            AdKernel::Cos.of_square(),
            AdKernel::SinhOverX.sqrt(),
        ];
        for k in kernels {
            let c = taylor_coeffs(&k, 14).unwrap();
            let x: f64 = 0.05;
            let s: f64 = c.iter().enumerate().map(|(j, f)| f * x.powi(j as i32)).sum();
            assert!((s - k.eval(x).unwrap()).abs() < 1e-14, "{k}");
        }
    }

    #[test]
    fn fd_rules() {
        let cfg = FdConfig::default();
        let d = fd_derivative(|t| Ok((1.0 + t).sin()), &cfg).unwrap();
        assert!((d - 1f64.cos()).abs() < 1e-11);
        let d2 = fd_second_derivative(|t| Ok((2.0 * t).exp()), &cfg).unwrap();
        assert!((d2 - 4.0).abs() < 1e-6);
        assert!(fd_derivative(
            |t| Ok(t),
            &FdConfig {
                step: -1.0,
                richardson: false
            }
        )
        .is_err());
        let plain = FdConfig {
            step: 1e-2,
            richardson: false,
        };
        let err = |h: f64| (fd_derivative(|t| Ok((1.0 + t).sin()), &FdConfig { step: h, ..plain }).unwrap() - 1f64.cos()).abs();
        assert!(observed_order(err(1e-2), err(5e-3)) > 1.9);
    }
}
