//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};

const SCHUR_MAX_ITER: usize = 10_000;

/// Largest eigenvalue modulus, from the real Schur form.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::dims(format!(
            "spectral radius of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(Error::NonConvergence("real Schur decomposition"))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Numerical rank with threshold `max(rows, cols) * eps * sigma_max`.
pub fn numeric_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * sv.max();
    sv.iter().filter(|&&s| s > tol).count()
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Symmetric PSD square root `S` with `S S = m`; negative eigenvalues from
/// round-off are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let d = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).abs().max() <= tol
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

pub fn ones(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Faddeev–LeVerrier characteristic polynomial + Durand–Kerner roots.
    fn charpoly_radius(m: &DMatrix<f64>) -> f64 {
        use nalgebra::Complex;
        let n = m.nrows();
        let mut coeffs = vec![1.0]; // c_n = 1, descending
        let mut mk = DMatrix::<f64>::zeros(n, n);
        let id = DMatrix::<f64>::identity(n, n);
        let mut c_prev = 1.0;
        for k in 1..=n {
            mk = m * (&mk + &id * c_prev);
            let c = -mk.trace() / k as f64;
            coeffs.push(c);
            c_prev = c;
        }
        let poly = |z: Complex<f64>| coeffs.iter().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c);
        let seed = Complex::new(0.4, 0.9);
        let mut roots: Vec<Complex<f64>> = (0..n).map(|k| seed.powu(k as u32)).collect();
        for _ in 0..2000 {
            let prev = roots.clone();
            for i in 0..n {
                let mut denom = Complex::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let zi = roots[i];
                roots[i] -= poly(zi) / denom;
            }
            let moved = roots.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if moved < 1e-15 {
                break;
            }
        }
        roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn radius_of_diagonal_and_rotation() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -0.9]));
        assert!((spectral_radius(&d).unwrap() - 0.9).abs() < 1e-14);
        let t: f64 = 0.7;
        let r = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!((spectral_radius(&r).unwrap() - 1.0).abs() < 1e-14);
        assert!(spectral_radius(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn radius_matches_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let m = DMatrix::from_fn(8, 8, |_, _| rng.random_range(-1.0..1.0));
            let want = charpoly_radius(&m);
            let got = spectral_radius(&m).unwrap();
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn norm_matches_gram_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
        let g = m.transpose() * &m;
        let mut v = DVector::from_element(4, 1.0);
        for _ in 0..5000 {
            v = &g * &v;
            v /= v.norm();
        }
        let lambda = (v.transpose() * &g * &v)[(0, 0)];
        assert!((spectral_norm(&m) - lambda.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sqrt_and_blocks() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = psd_sqrt(&m);
        assert!((&s * &s - &m).abs().max() < 1e-12);
        let b = block_diag(&[DMatrix::identity(2, 2), DMatrix::from_element(1, 1, 3.0)]);
        assert_eq!(b[(2, 2)], 3.0);
        assert_eq!(b[(0, 2)], 0.0);
        assert_eq!(numeric_rank(&b), 3);
    }
}
