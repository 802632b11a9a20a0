//! Sensor networks: the row-stochastic consensus matrix `W` (β-network), the
//! 0-1 hub matrix `U` (α-network) and the checks that make the pair
//! `(W ⊗ A, D_C)` observable and tolerant to sensor loss.

mod connectivity;
mod io;
mod observability;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::structure::{ComponentId, OutputPlacement};

pub use connectivity::{
    all_subsets, connectivity_report, strongly_connected, strongly_connected_without, survives_removals,
    vertex_connectivity, ConnectivityReport,
};
pub use io::{parse_network, NETWORK_HEADER};
pub use observability::{check_distributed_observability, observable_dimension, ObservabilityConditions};

const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNetwork {
    w: DMatrix<f64>,
    u: DMatrix<f64>,
    alpha: Vec<usize>,
}

impl SensorNetwork {
    /// Validates `W` (nonnegative, rows sum to one, strongly connected
    /// pattern) and `U` (0-1, unit diagonal, off-diagonal ones only in
    /// α columns).
    pub fn new(w: DMatrix<f64>, u: DMatrix<f64>, mut alpha: Vec<usize>) -> Result<Self> {
        let net = Self::unchecked_connectivity(w, u, {
            alpha.sort_unstable();
            alpha.dedup();
            alpha
        })?;
        if !strongly_connected(&net.beta_adjacency()) {
            return Err(Error::dims("the pattern of W is not strongly connected"));
        }
        Ok(net)
    }

    // Everything but strong connectivity; reduced networks may lose it.
    fn unchecked_connectivity(w: DMatrix<f64>, u: DMatrix<f64>, alpha: Vec<usize>) -> Result<Self> {
        let n = w.nrows();
        if n == 0 {
            return Err(Error::EmptyNetwork);
        }
        if !w.is_square() || u.shape() != (n, n) {
            return Err(Error::dims(format!(
                "W is {}x{} and U is {}x{}",
                w.nrows(),
                w.ncols(),
                u.nrows(),
                u.ncols()
            )));
        }
        if let Some(&a) = alpha.iter().find(|&&a| a >= n) {
            return Err(Error::dims(format!("alpha sensor {} outside 1..={n}", a + 1)));
        }
        for i in 0..n {
            let row = w.row(i);
            if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::dims(format!("row {} of W has a negative entry", i + 1)));
            }
            if (row.sum() - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::dims(format!("row {} of W sums to {}", i + 1, row.sum())));
            }
            for j in 0..n {
                let x = u[(i, j)];
                if x != 0.0 && x != 1.0 {
                    return Err(Error::dims(format!("U[{}][{}] = {x} is not 0 or 1", i + 1, j + 1)));
                }
                if i == j && x != 1.0 {
                    return Err(Error::dims(format!("U[{0}][{0}] must be 1", i + 1)));
                }
                if i != j && x == 1.0 && alpha.binary_search(&j).is_err() {
                    return Err(Error::dims(format!(
                        "U[{}][{}] = 1 but sensor {} is not an alpha sensor",
                        i + 1,
                        j + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { w, u, alpha })
    }

    pub fn len(&self) -> usize {
        self.w.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    /// Out-neighbour lists of the β-network: `j -> i` when `W[i][j] > 0`
    /// (sensor `i` fuses the prior of `j`).
    pub fn beta_adjacency(&self) -> Vec<Vec<usize>> {
        pattern_adjacency(&self.w)
    }

    /// Sensors whose outputs reach sensor `i` (`U[i][j] = 1`), including `i`.
    pub fn alpha_in_neighbours(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.u[(i, j)] != 0.0).collect()
    }

    pub fn beta_strongly_connected(&self) -> bool {
        strongly_connected(&self.beta_adjacency())
    }

    /// Drops the given sensors, renormalizing the rows of `W`. The result
    /// may fail to be strongly connected; check [`Self::beta_strongly_connected`].
    pub fn without(&self, removed: &[usize]) -> Result<Self> {
        let keep = kept_indices(self.len(), removed)?;
        let m = keep.len();
        let mut w = DMatrix::from_fn(m, m, |i, j| self.w[(keep[i], keep[j])]);
        for i in 0..m {
            let s = w.row(i).sum();
            if s > 0.0 {
                w.row_mut(i).unscale_mut(s);
            } else {
                w[(i, i)] = 1.0;
            }
        }
        let u = DMatrix::from_fn(m, m, |i, j| self.u[(keep[i], keep[j])]);
        let alpha = keep
            .iter()
            .enumerate()
            .filter(|(_, k)| self.alpha.binary_search(k).is_ok())
            .map(|(i, _)| i)
            .collect();
        Self::unchecked_connectivity(w, u, alpha)
    }
}

/// Indices surviving removal of `removed` from `0..n`, with validation.
pub(crate) fn kept_indices(n: usize, removed: &[usize]) -> Result<Vec<usize>> {
    if let Some(&r) = removed.iter().find(|&&r| r >= n) {
        return Err(Error::dims(format!("cannot remove sensor {} of {n}", r + 1)));
    }
    let keep: Vec<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
    if keep.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    Ok(keep)
}

pub fn pattern_adjacency(w: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = w.nrows();
    (0..n)
        .map(|j| (0..n).filter(|&i| i != j && w[(i, j)] != 0.0).collect())
        .collect()
}

/// Row-stochastic `W` on a directed circulant: node `i` sends to
/// `i - 1, ..., i - (Q + 1)` (mod `N`) and to itself, which is the complete
/// digraph once `Q + 1 >= N - 1`. Weights are uniform in `[0.1, 1)` before
/// row normalization.
pub fn build_beta_network(n: usize, q: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n <= q {
        return Err(Error::InfeasibleConnectivity { n, q });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        w[(i, i)] = rng.random_range(0.1..1.0);
        for step in 1..=(q + 1).min(n - 1) {
            let to = (i + n - step) % n;
            w[(to, i)] = rng.random_range(0.1..1.0);
        }
    }
    for i in 0..n {
        let s = w.row(i).sum();
        w.row_mut(i).unscale_mut(s);
    }
    Ok(w)
}

/// Hub matrix for a placement: every α-sensor (one whose state lies in a
/// contraction) feeds every sensor outside its own component.
pub fn build_alpha_network(placement: &OutputPlacement) -> (DMatrix<f64>, Vec<usize>) {
    let sensors = placement.sensors();
    let components: Vec<ComponentId> = sensors.iter().map(|s| s.component).collect();
    let alpha: Vec<usize> = (0..sensors.len()).filter(|&j| sensors[j].is_alpha()).collect();
    (hub_matrix(&components, &alpha), alpha)
}

pub(crate) fn hub_matrix(components: &[ComponentId], alpha: &[usize]) -> DMatrix<f64> {
    let n = components.len();
    let mut u = DMatrix::identity(n, n);
    for &j in alpha {
        for i in 0..n {
            if components[i] != components[j] {
                u[(i, j)] = 1.0;
            }
        }
    }
    u
}

/// β- and α-networks for a placement.
pub fn design_network(placement: &OutputPlacement, seed: u64) -> Result<SensorNetwork> {
    let n = placement.sensors().len();
    let w = build_beta_network(n, placement.q, seed)?;
    let (u, alpha) = build_alpha_network(placement);
    SensorNetwork::new(w, u, alpha)
}
