//! Dense complex linear algebra helpers shared by the engines.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Hermitian trace pairing `Tr(a* b)`.
pub fn tr_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn fro(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().iter().sum()
}

pub fn skew_part(a: &CMat) -> CMat {
    (a - a.adjoint()) * c(0.5)
}

pub fn herm_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5)
}

pub fn skew_residual(a: &CMat) -> f64 {
    fro(&(a + a.adjoint()))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let h = herm_part(h);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_real(m: &RMat) -> (Vec<f64>, RMat) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = RMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `U diag(f(μ)) U*` for a Hermitian `h = U diag(μ) U*`.
pub fn herm_fn(h: &CMat, f: impl Fn(f64) -> Complex64) -> CMat {
    let (vals, u) = eigh(h);
    let d = CMat::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&x| f(x))));
    &u * d * u.adjoint()
}

/// `exp(s)` for skew-Hermitian `s`; the result is unitary.
pub fn exp_skew(s: &CMat) -> CMat {
    // s = -i h with h = i s Hermitian
    herm_fn(&(s * I), |mu| Complex64::new(0.0, -mu).exp())
}

/// `exp(h)` for Hermitian `h`.
pub fn exp_herm(h: &CMat) -> CMat {
    herm_fn(h, |mu| c(mu.exp()))
}

/// Closest unitary matrix (polar factor).
pub fn unitarize(u: &CMat) -> CMat {
    let svd = u.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// Extends orthonormal columns to a full unitary basis by Gram-Schmidt
/// against the standard basis.
pub fn complete_unitary(thin: &CMat) -> CMat {
    let n = thin.nrows();
    let mut cols: Vec<DVector<Complex64>> = thin.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut v = DVector::<Complex64>::zeros(n);
        v[e] = c(1.0);
        e += 1;
        for _ in 0..2 {
            for q in &cols {
                let p = q.dotc(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        if nv > 1e-6 {
            cols.push(v / c(nv));
        }
    }
    CMat::from_columns(&cols)
}

/// Least-squares solve of a real system via SVD.
pub fn lstsq(a: &RMat, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-13).expect("svd with both factors")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> CMat {
        CMat::from_fn(n, n, |i, j| Complex64::new((i as f64 * 0.7 + j as f64).sin(), (i * j) as f64 * 0.3))
    }

    #[test]
    fn eigh_reconstructs() {
        let a = sample(5);
        let h = herm_part(&a);
        let (vals, u) = eigh(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMat::from_diagonal(&DVector::from_iterator(5, vals.iter().map(|&x| c(x))));
        assert!(fro(&(&u * d * u.adjoint() - h)) < 1e-12);
    }

    #[test]
    fn exp_skew_matches_general_exp() {
        let s = skew_part(&sample(4));
        let u = exp_skew(&s);
        assert!(fro(&(&u - s.exp())) < 1e-12);
        assert!(fro(&(u.adjoint() * &u - identity(4))) < 1e-12);
    }

    #[test]
    fn completion_is_unitary() {
        let u = exp_skew(&skew_part(&sample(5)));
        let thin = u.columns(0, 2).into_owned();
        let full = complete_unitary(&thin);
        assert!(fro(&(full.adjoint() * &full - identity(5))) < 1e-12);
        assert!(fro(&(full.columns(0, 2) - thin)) < 1e-14);
    }
}
