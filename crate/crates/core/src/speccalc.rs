//! Functions of `ad(ia)` by Daleckii-Krein spectral calculus, and functions
//! of self-adjoint operators assembled on a real orthonormal basis.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat, I};

/// Eigenvalue differences below this use the kernel's limit at zero.
pub const ZERO_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum AdKernel {
    /// `(cosh x - 1) / x^2`
    CoshM1OverX2,
    /// `sinh x / x`
    SinhOverX,
    /// `sin x / x`
    SinOverX,
    Cos,
    Cosh,
    /// `1 / cosh x`
    Sech,
    /// `argsinh x / x`
    ArgsinhOverX,
    /// `((sqrt(1+x) - 1) / x)^(1/2)`, defined for `x >= -1`
    PhiBg,
    /// `(sqrt(1+x) - 1) / x`, defined for `x >= -1`
    SqrtOnePlusM1OverX,
    /// `sqrt(1 + x)`
    SqrtOnePlus,
    Exp,
    /// `sqrt(f(x))`
    SqrtOf(Box<AdKernel>),
    /// `f(x^2)`
    OfSquare(Box<AdKernel>),
}

impl fmt::Display for AdKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdKernel::CoshM1OverX2 => write!(f, "coshm1_over_x2"),
            AdKernel::SinhOverX => write!(f, "sinh_over_x"),
            AdKernel::SinOverX => write!(f, "sin_over_x"),
            AdKernel::Cos => write!(f, "cos"),
            AdKernel::Cosh => write!(f, "cosh"),
            AdKernel::Sech => write!(f, "sech"),
            AdKernel::ArgsinhOverX => write!(f, "argsinh_over_x"),
            AdKernel::PhiBg => write!(f, "phi_bg"),
            AdKernel::SqrtOnePlusM1OverX => write!(f, "sqrt1p_m1_over_x"),
            AdKernel::SqrtOnePlus => write!(f, "sqrt_1p"),
            AdKernel::Exp => write!(f, "exp"),
            AdKernel::SqrtOf(k) => write!(f, "sqrt_of({k})"),
            AdKernel::OfSquare(k) => write!(f, "{k}_of_square"),
        }
    }
}

fn asinh_stable(x: f64) -> f64 {
    let ax = x.abs();
    let r = if ax < 1e-4 {
        ax - ax.powi(3) / 6.0 + 3.0 * ax.powi(5) / 40.0
    } else {
        // log(x + sqrt(1+x^2)) written as log1p to keep small arguments exact
        (ax + ax * ax / ((1.0 + ax * ax).sqrt() + 1.0)).ln_1p()
    };
    r.copysign(x)
}

impl AdKernel {
    pub fn of_square(self) -> Self {
        AdKernel::OfSquare(Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        AdKernel::SqrtOf(Box::new(self))
    }

    /// Value of the removable singularity at zero.
    pub fn at_zero(&self) -> f64 {
        match self {
            AdKernel::CoshM1OverX2 => 0.5,
            AdKernel::PhiBg => std::f64::consts::FRAC_1_SQRT_2,
            AdKernel::SqrtOnePlusM1OverX => 0.5,
            AdKernel::SqrtOf(k) => k.at_zero().sqrt(),
            AdKernel::OfSquare(k) => k.at_zero(),
            _ => 1.0,
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            AdKernel::PhiBg | AdKernel::SqrtOnePlusM1OverX | AdKernel::SqrtOnePlus | AdKernel::Exp => false,
            AdKernel::SqrtOf(k) => k.is_even(),
            AdKernel::OfSquare(_) => true,
            _ => true,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let domain = || Error::KernelDomain {
            kernel: self.to_string(),
            at: x,
        };
        let v = match self {
            AdKernel::CoshM1OverX2 => {
                if x.abs() < ZERO_GAP {
                    0.5
                } else {
                    // (cosh x - 1)/x^2 = (sinh(x/2)/(x/2))^2 / 2, free of cancellation
                    let h = 0.5 * x;
                    0.5 * (h.sinh() / h).powi(2)
                }
            }
            AdKernel::SinhOverX => {
                if x.abs() < ZERO_GAP {
                    1.0
                } else {
                    x.sinh() / x
                }
            }
            AdKernel::SinOverX => {
                if x.abs() < ZERO_GAP {
                    1.0
                } else {
                    x.sin() / x
                }
            }
            AdKernel::Cos => x.cos(),
            AdKernel::Cosh => x.cosh(),
            AdKernel::Sech => 1.0 / x.cosh(),
            AdKernel::ArgsinhOverX => {
                if x.abs() < ZERO_GAP {
                    1.0
                } else {
                    asinh_stable(x) / x
                }
            }
            AdKernel::PhiBg => {
                if x < -1.0 {
                    return Err(domain());
                }
                // (sqrt(1+x) - 1)/x = 1/(sqrt(1+x) + 1)
                (1.0 / ((1.0 + x).sqrt() + 1.0)).sqrt()
            }
            AdKernel::SqrtOnePlusM1OverX => {
                if x < -1.0 {
                    return Err(domain());
                }
                1.0 / ((1.0 + x).sqrt() + 1.0)
            }
            AdKernel::SqrtOnePlus => {
                if x < -1.0 {
                    return Err(domain());
                }
                (1.0 + x).sqrt()
            }
            AdKernel::Exp => x.exp(),
            AdKernel::SqrtOf(k) => {
                let inner = k.eval(x)?;
                if inner < 0.0 {
                    return Err(domain());
                }
                inner.sqrt()
            }
            AdKernel::OfSquare(k) => k.eval(x * x)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain())
        }
    }
}

/// `f(ad(ia)) y` for skew-Hermitian `a` and arbitrary `y`.
pub fn apply_ad_function(kernel: &AdKernel, a: &CMat, y: &CMat) -> Result<CMat> {
    let scale = linalg::fro(a).max(1.0);
    let res = linalg::skew_residual(a) / scale;
    if res > 1e-10 {
        return Err(Error::NotInSpace { space: "g", residual: res });
    }
    let (mu, u) = linalg::eigh(&(a * I));
    let yt = u.adjoint() * y * &u;
    let n = mu.len();
    let mut f = CMat::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let d = mu[j] - mu[k];
            let v = if d.abs() < ZERO_GAP { kernel.at_zero() } else { kernel.eval(d)? };
            f[(j, k)] = yt[(j, k)] * v;
        }
    }
    Ok(&u * f * u.adjoint())
}

/// A self-adjoint real-linear operator on the span of an orthonormal basis,
/// stored by its symmetric matrix and spectral decomposition.
#[derive(Debug, Clone)]
pub struct SelfAdjointOp {
    pub basis: Vec<CMat>,
    pub matrix: RMat,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: RMat,
}

impl SelfAdjointOp {
    /// Assembles `op` on `basis`; rejects operators whose matrix is not
    /// symmetric to relative accuracy `1e-8`.
    pub fn assemble(basis: Vec<CMat>, op: impl Fn(&CMat) -> CMat) -> Result<Self> {
        let dim = basis.len();
        let images: Vec<CMat> = basis.iter().map(&op).collect();
        let m = RMat::from_fn(dim, dim, |i, j| linalg::re_inner(&basis[i], &images[j]));
        let asym = (&m - m.transpose()).norm() / m.norm().max(1.0);
        if asym > 1e-8 {
            return Err(Error::NotSelfAdjoint(asym));
        }
        let matrix = (&m + m.transpose()) * 0.5;
        let (eigenvalues, eigenvectors) = linalg::eigh_real(&matrix);
        Ok(SelfAdjointOp {
            basis,
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn coords(&self, v: &CMat) -> DVector<f64> {
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|b| linalg::re_inner(b, v)))
    }

    pub fn from_coords(&self, x: &DVector<f64>) -> CMat {
        let n = self.basis[0].nrows();
        let mut out = CMat::zeros(n, n);
        for (b, t) in self.basis.iter().zip(x.iter()) {
            out += b * c(*t);
        }
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `f(op) v` for `v` in the span of the basis.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Result<f64>, v: &CMat) -> Result<CMat> {
        let x = self.coords(v);
        let q = &self.eigenvectors;
        let mut y = q.transpose() * x;
        for (i, lam) in self.eigenvalues.iter().enumerate() {
            y[i] *= f(*lam)?;
        }
        Ok(self.from_coords(&(q * y)))
    }

    pub fn apply(&self, v: &CMat) -> CMat {
        self.from_coords(&(&self.matrix * self.coords(v)))
    }
}

/// `f(op) v` for a self-adjoint, positive semi-definite operator.  Eigenvalues
/// below `-tol` are rejected, smaller negative round-off is clamped to zero.
pub fn apply_operator_function(kernel: &AdKernel, op: &SelfAdjointOp, v: &CMat, tol: f64) -> Result<CMat> {
    let scale = op.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if op.min_eigenvalue() < -tol * scale {
        return Err(Error::NegativeSpectrum(op.min_eigenvalue()));
    }
    op.apply_fn(|lam| kernel.eval(lam.max(0.0)), v)
}
