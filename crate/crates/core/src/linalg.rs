//! Dense complex linear algebra helpers shared across the crate.
//!
//! Registers never exceed six qubits, so everything is a dense
//! `DMatrix<Complex64>` and validation by full eigendecomposition is cheap.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub type CMat = nalgebra::DMatrix<Complex64>;
pub type CVec = nalgebra::DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(n)) <= tol
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Real eigenvalues of a Hermitian matrix, unsorted.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Eigendecomposition of a Hermitian matrix; pairs `(eigenvalue, column)`
/// sorted by ascending eigenvalue.
pub fn hermitian_eigenpairs(m: &CMat) -> Vec<(f64, CVec)> {
    let eig = m.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, CVec)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, CVec::from(eig.eigenvectors.column(i).into_owned())))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn require_unitary(u: &CMat, tol: f64, what: &str) -> Result<()> {
    if !is_unitary(u, tol) {
        return Err(Error::NotUnitary(what.to_string()));
    }
    Ok(())
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the standard
/// phase fix on the R diagonal.
pub fn haar_unitary(dim: usize, stream: &RngStream) -> CMat {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let mut rng = stream.rng();
    let g = CMat::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r_diag = qr.r().diagonal().into_owned();
    let mut q = qr.q();
    for (j, d) in r_diag.iter().enumerate() {
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(dim: usize, stream: &RngStream) -> CMat {
    use rand::Rng;
    let mut rng = stream.rng();
    let g = CMat::from_fn(dim, dim, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&g + g.adjoint()) * cr(0.5)
}

/// Column-major vectorization, so that vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ).
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Superoperator of ρ ↦ Σᵢ Kᵢ ρ Kᵢ† in the column-major vec convention.
pub fn kraus_superoperator(kraus: &[CMat]) -> CMat {
    let d = kraus[0].nrows();
    let mut s = CMat::zeros(d * d, d * d);
    for k in kraus {
        s += kron(&k.conjugate(), k);
    }
    s
}

/// Superoperator of unitary conjugation ρ ↦ U ρ U†.
pub fn unitary_superoperator(u: &CMat) -> CMat {
    kron(&u.conjugate(), u)
}

pub fn dmatrix_from_rows(rows: &[Vec<Complex64>]) -> CMat {
    let nr = rows.len();
    let nc = rows[0].len();
    DMatrix::from_fn(nr, nc, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_unitary_is_unitary() {
        for dim in [2, 4, 8] {
            let u = haar_unitary(dim, &RngStream::from_seed(11));
            assert!(is_unitary(&u, 1e-10));
        }
    }

    #[test]
    fn hermitian_eig_on_complex_matrix() {
        let m = random_hermitian(8, &RngStream::from_seed(3));
        let pairs = hermitian_eigenpairs(&m);
        for (val, vec) in &pairs {
            let mv = &m * vec;
            let lv = vec * cr(*val);
            assert!((mv - lv).norm() < 1e-9);
        }
    }

    #[test]
    fn vec_convention_matches_kron_identity() {
        let stream = RngStream::from_seed(5);
        let a = haar_unitary(4, &stream.derive(&[0]));
        let b = haar_unitary(4, &stream.derive(&[1]));
        let rho = random_hermitian(4, &stream.derive(&[2]));
        let lhs = vectorize(&(&a * &rho * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&rho);
        assert!((lhs - rhs).norm() < 1e-10);
    }
}
