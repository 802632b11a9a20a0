use nalgebra::DMatrix;

use super::SensorNetwork;
use crate::error::{Error, Result};
use crate::gain::assemble_dc;
use crate::linalg::spectral_norm;
use crate::structure::ComponentId;

/// Dimension of the observable subspace of `(phi, d)`, grown by orthogonal
/// Krylov steps on `phi^T` from the row space of `d`. New directions count
/// when their singular value exceeds `dim * eps * sigma_max`.
pub fn observable_dimension(phi: &DMatrix<f64>, d: &DMatrix<f64>) -> usize {
    let dim = phi.nrows();
    let scale = spectral_norm(phi).max(spectral_norm(d)).max(1.0);
    let tol = dim as f64 * f64::EPSILON * scale;
    let mut basis = DMatrix::<f64>::zeros(dim, 0);
    let mut frontier = d.transpose();
    let phi_t = phi.transpose();
    let mut first = true;
    while basis.ncols() < dim {
        let mut block = if first {
            first = false;
            frontier.clone()
        } else {
            &phi_t * &frontier
        };
        for _ in 0..2 {
            let proj = basis.transpose() * &block;
            block -= &basis * proj;
        }
        let svd = block.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let fresh: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > tol)
            .collect();
        if fresh.is_empty() {
            break;
        }
        let new = DMatrix::from_fn(dim, fresh.len(), |r, c| u[(r, fresh[c])]);
        let start = basis.ncols();
        basis = basis.resize_horizontally(start + new.ncols(), 0.0);
        basis.columns_mut(start, new.ncols()).copy_from(&new);
        frontier = new;
    }
    basis.ncols().min(dim)
}

/// Numeric observability of `(W ⊗ A, D_C)` with `D_C` assembled from `U`
/// and the output rows `c`.
pub fn check_distributed_observability(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    w: &DMatrix<f64>,
    u: &DMatrix<f64>,
) -> Result<bool> {
    if !a.is_square() || !w.is_square() {
        return Err(Error::dims("A and W must be square"));
    }
    if c.ncols() != a.nrows() || c.nrows() != w.nrows() {
        return Err(Error::dims(format!(
            "C is {}x{}, expected {}x{}",
            c.nrows(),
            c.ncols(),
            w.nrows(),
            a.nrows()
        )));
    }
    let phi = w.kronecker(a);
    let dc = assemble_dc(u, c)?;
    Ok(observable_dimension(&phi, &dc) == phi.nrows())
}

/// The sufficient conditions behind distributed observability, reported
/// apart from the numeric test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservabilityConditions {
    pub beta_strongly_connected: bool,
    /// Every α-sensor feeds every sensor outside its own component.
    pub alpha_sensors_are_hubs: bool,
}

impl ObservabilityConditions {
    pub fn evaluate(network: &SensorNetwork, components: &[ComponentId]) -> Result<Self> {
        if components.len() != network.len() {
            return Err(Error::dims(format!(
                "{} component labels for {} sensors",
                components.len(),
                network.len()
            )));
        }
        let hubs = network
            .alpha()
            .iter()
            .all(|&j| (0..network.len()).all(|i| components[i] == components[j] || network.u()[(i, j)] == 1.0));
        Ok(Self {
            beta_strongly_connected: network.beta_strongly_connected(),
            alpha_sensors_are_hubs: hubs,
        })
    }

    pub fn holds(&self) -> bool {
        self.beta_strongly_connected && self.alpha_sensors_are_hubs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centralized_single_sensor() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.3]);
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let one = DMatrix::identity(1, 1);
        // x2 drives x1, so measuring x1 sees both
        assert!(check_distributed_observability(&a, &c, &one, &one).unwrap());
        assert!(!check_distributed_observability(&a.transpose(), &c, &one, &one).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let a = DMatrix::identity(2, 2);
        let c = DMatrix::zeros(3, 2);
        let w = DMatrix::identity(2, 2);
        assert!(matches!(
            check_distributed_observability(&a, &c, &w, &w),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn krylov_dimension_matches_stacked_rank() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = 5;
            let mut a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            // make a rank-deficient unobservable corner in some trials
            if trial % 2 == 0 {
                for r in 0..n - 2 {
                    a[(r, n - 1)] = 0.0;
                    a[(r, n - 2)] = 0.0;
                }
            }
            let d = DMatrix::from_fn(1, n, |_, c| if c < n - 2 { rng.random_range(0.5..1.0) } else { 0.0 });
            let mut stacked = DMatrix::zeros(n, n);
            let mut p = DMatrix::identity(n, n);
            for k in 0..n {
                stacked.row_mut(k).copy_from(&(&d * &p));
                p = &a * p;
            }
            let oracle = crate::linalg::numeric_rank(&stacked);
            assert_eq!(observable_dimension(&a, &d), oracle, "trial {trial}");
        }
    }
}
