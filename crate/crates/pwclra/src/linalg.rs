//! Complex dense matrix helpers shared by the whole pipeline.
//!
//! Everything is built on `nalgebra::DMatrix<Complex<f64>>`. The unitary DFT
//! constructor reduces the phase index modulo the transform size in integer
//! arithmetic before touching floating point, which keeps large matrices
//! unitary to ~1e-13 instead of drifting with `j*k` round-off.
//!
//! # Example
//! ```
//! use pwclra::linalg::dft_matrix;
//! let f = dft_matrix(8);
//! let g = f.adjoint() * &f; // ≈ identity
//! assert!((g[(3, 3)].re - 1.0).abs() < 1e-12);
//! assert!(g[(3, 4)].norm() < 1e-12);
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout.
pub type CMat = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVec = DVector<Complex64>;

/// Shorthand complex constructor.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// exp(-2πi·k/x) with `k` reduced mod `x` in integer arithmetic.
#[inline]
fn unit_root(x: usize, k: usize) -> Complex64 {
    let k = k % x;
    Complex64::from_polar(1.0, -TAU * (k as f64) / (x as f64))
}

/// Unitary `x`×`x` DFT matrix: entry (j,k) = exp(-2πi·jk/x)/√x.
pub fn dft_matrix(x: usize) -> CMat {
    dft_column_block(x, x, 0)
}

/// First `y` columns of the unitary `x`×`x` DFT matrix.
///
/// Columns of the square DFT are orthonormal, so any `y ≤ x` leading columns
/// form an orthonormal, constant-modulus (1/√x) frame.
pub fn dft_like_matrix(x: usize, y: usize) -> Result<CMat> {
    if y > x {
        return Err(Error::Argument(format!(
            "dft_like_matrix: y = {y} exceeds x = {x}"
        )));
    }
    Ok(dft_column_block(x, y, 0))
}

/// `y` consecutive columns of the unitary `x`×`x` DFT matrix starting at
/// column `start`, wrapping modulo `x`.
pub fn dft_column_block(x: usize, y: usize, start: usize) -> CMat {
    let scale = 1.0 / (x as f64).sqrt();
    CMat::from_fn(x, y, |j, k| unit_root(x, j * ((start + k) % x)) * scale)
}

/// Stack matrices with equal column counts on top of each other.
pub fn vstack(blocks: &[CMat]) -> CMat {
    assert!(!blocks.is_empty(), "vstack of zero blocks");
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: ragged column counts");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Stack matrices with equal row counts side by side.
pub fn hstack(blocks: &[CMat]) -> CMat {
    assert!(!blocks.is_empty(), "hstack of zero blocks");
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack: ragged row counts");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Squared Frobenius norm.
#[inline]
pub fn fro_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// One draw from the standard circularly-symmetric complex Gaussian CN(0,1):
/// real and imaginary parts are independent N(0, 1/2).
#[inline]
pub fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. CN(0,1) entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| standard_complex(rng))
}

#[inline]
fn to_faer(m: &CMat) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

#[inline]
fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values of `m`, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    to_faer(m)
        .singular_values()
        .expect("singular values did not converge")
}

/// Thin SVD `m = U · diag(s) · V^H`, singular values descending.
pub fn svd_thin(m: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD failed to converge: {e:?}")))?;
    let s = svd.S().column_vector().iter().map(|x| x.re).collect();
    Ok((from_faer(svd.U()), s, from_faer(svd.V())))
}

/// Left singular vectors and singular values of `m`, descending.
pub fn left_svd(m: &CMat) -> Result<(CMat, Vec<f64>)> {
    let (u, s, _) = svd_thin(m)?;
    Ok((u, s))
}

/// Moore–Penrose pseudo-inverse with a relative singular-value cutoff.
pub fn pinv(m: &CMat) -> Result<CMat> {
    let (u, sv, v) = svd_thin(m)?;
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let tol = smax * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON;
    let k = sv.len();
    let mut sinv = CMat::zeros(k, k);
    for i in 0..k {
        if sv[i] > tol {
            sinv[(i, i)] = c64(1.0 / sv[i], 0.0);
        }
    }
    Ok(v * sinv * u.adjoint())
}

/// Solve the Hermitian positive-definite system `a x = b` (Cholesky, with an
/// LU fallback when the factorization fails marginally).
pub fn solve_hpd(a: &CMat, b: &CMat) -> Result<CMat> {
    if let Some(chol) = a.clone().cholesky() {
        return Ok(chol.solve(b));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Numerical("singular system in regularized solve".into()))
}

/// Maximum entry-wise absolute difference, for tests and diagnostics.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn dft_small_known_values() {
        let f = dft_matrix(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(f[(0, 0)].re, s, epsilon = 1e-15);
        assert_relative_eq!(f[(1, 1)].re, -s, epsilon = 1e-15);
        assert!(f[(1, 1)].im.abs() < 1e-15);
        // 4-point: entry (1,3) = exp(-2πi·3/4)/2 = (0 + i)/2
        let f4 = dft_matrix(4);
        assert_relative_eq!(f4[(1, 3)].im, 0.5, epsilon = 1e-15);
        assert!(f4[(1, 3)].re.abs() < 1e-15);
    }

    #[test]
    fn dft_unitary_even_when_large() {
        for x in [3usize, 8, 37, 256, 1024] {
            let f = dft_matrix(x);
            let g = f.adjoint() * &f;
            let eye = CMat::identity(x, x);
            assert!(
                max_abs_diff(&g, &eye) < 1e-12,
                "DFT({x}) lost unitarity: {}",
                max_abs_diff(&g, &eye)
            );
        }
    }

    #[test]
    fn dft_like_rejects_wide() {
        assert!(dft_like_matrix(4, 5).is_err());
        let f = dft_like_matrix(8, 3).unwrap();
        assert_eq!(f.shape(), (8, 3));
        let g = f.adjoint() * &f;
        assert!(max_abs_diff(&g, &CMat::identity(3, 3)) < 1e-13);
    }

    #[test]
    fn dft_block_wraps_and_matches_square() {
        let x = 16;
        let f = dft_matrix(x);
        let blk = dft_column_block(x, 5, 14); // columns 14,15,0,1,2
        for (k, col) in [14usize, 15, 0, 1, 2].into_iter().enumerate() {
            for j in 0..x {
                assert!((blk[(j, k)] - f[(j, col)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_modulus_columns() {
        let f = dft_column_block(32, 7, 11);
        let want = 1.0 / 32f64.sqrt();
        for z in f.iter() {
            assert_relative_eq!(z.norm(), want, epsilon = 1e-13);
        }
    }

    #[test]
    fn stack_roundtrip() {
        let a = CMat::from_fn(2, 3, |i, j| c64((i + j) as f64, 1.0));
        let b = CMat::from_fn(1, 3, |_, j| c64(j as f64, -1.0));
        let v = vstack(&[a.clone(), b.clone()]);
        assert_eq!(v.shape(), (3, 3));
        assert_eq!(v[(2, 1)], b[(0, 1)]);
        let h = hstack(&[a.clone(), a.clone()]);
        assert_eq!(h.shape(), (2, 6));
        assert_eq!(h[(1, 5)], a[(1, 2)]);
    }

    #[test]
    fn complex_gaussian_moments() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let n = 100_000;
        let m = complex_gaussian(&mut rng, n, 1);
        let mean: Complex64 = m.iter().sum::<Complex64>() / (n as f64);
        let var: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>() / (n as f64);
        assert!(mean.norm() < 0.02);
        assert!((var - 1.0).abs() < 0.02, "unit variance expected, got {var}");
    }

    #[test]
    fn pinv_recovers_tall_least_squares() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let p = complex_gaussian(&mut rng, 8, 3);
        let t = complex_gaussian(&mut rng, 3, 5);
        let m = &p * &t;
        let t_hat = pinv(&p).unwrap() * m;
        assert!(max_abs_diff(&t_hat, &t) < 1e-10);
    }

    #[test]
    fn svd_descending_and_accurate() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let a = complex_gaussian(&mut rng, 6, 4);
        let sv = singular_values(&a);
        assert!(sv.windows(2).all(|w| w[0] >= w[1]));
        let (u, sv2) = left_svd(&a).unwrap();
        assert_eq!(u.nrows(), 6);
        assert!((sv[0] - sv2[0]).abs() < 1e-12);
        // energy identity
        let e: f64 = sv.iter().map(|s| s * s).sum();
        assert_relative_eq!(e, fro_sq(&a), epsilon = 1e-10);
    }

    #[test]
    fn hpd_solve_matches_pinv() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let p = complex_gaussian(&mut rng, 10, 4);
        let a = p.adjoint() * &p + CMat::identity(4, 4) * c64(0.5, 0.0);
        let b = complex_gaussian(&mut rng, 4, 2);
        let x = solve_hpd(&a, &b).unwrap();
        assert!(max_abs_diff(&(&a * &x), &b) < 1e-10);
    }
}
