//! Numeric LSI systems, fault injection and the single time-scale
//! distributed estimator.

mod engine;
mod noise;
mod stats;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gain::GainMatrix;
use crate::linalg::{is_symmetric, min_eigenvalue};
use crate::network::SensorNetwork;
use crate::structure::{EdgeList, SystemStructure};

pub use engine::{simulate, SimTrace};
pub use noise::NoiseStream;
pub use stats::{burn_in, empirical_residual_variance, residual_variance_bound, ResidualStats};

#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    pub a: DMatrix<f64>,
    /// One output row per sensor.
    pub c: DMatrix<f64>,
    pub sigma_nu: DMatrix<f64>,
    /// Diagonal of the measurement-noise covariance.
    pub sigma_zeta: Vec<f64>,
}

impl LtiSystem {
    pub fn new(a: DMatrix<f64>, c: DMatrix<f64>, sigma_nu: DMatrix<f64>, sigma_zeta: Vec<f64>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || c.ncols() != n || sigma_nu.shape() != (n, n) {
            return Err(Error::dims(format!(
                "A {}x{}, C {}x{}, sigma_nu {}x{}",
                a.nrows(),
                a.ncols(),
                c.nrows(),
                c.ncols(),
                sigma_nu.nrows(),
                sigma_nu.ncols()
            )));
        }
        if sigma_zeta.len() != c.nrows() {
            return Err(Error::dims("one measurement variance per output row expected"));
        }
        if !is_symmetric(&sigma_nu, 1e-12) || (n > 0 && min_eigenvalue(&sigma_nu) < -1e-12) {
            return Err(Error::DomainError(
                "process-noise covariance must be symmetric PSD".into(),
            ));
        }
        if sigma_zeta.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::DomainError("measurement variances must be nonnegative".into()));
        }
        Ok(Self {
            a,
            c,
            sigma_nu,
            sigma_zeta,
        })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn sensors(&self) -> usize {
        self.c.nrows()
    }

    /// Same dynamics with `sigma_nu = nu I` and every `sigma_zeta = zeta`.
    pub fn with_noise(mut self, nu: f64, zeta: f64) -> Result<Self> {
        let n = self.states();
        self.sigma_nu = DMatrix::identity(n, n) * nu;
        self.sigma_zeta = vec![zeta; self.sensors()];
        Self::new(self.a, self.c, self.sigma_nu, self.sigma_zeta)
    }

    /// Keeps the output rows not listed in `removed`.
    pub fn without_sensors(&self, removed: &[usize]) -> Result<Self> {
        let keep = crate::network::kept_indices(self.sensors(), removed)?;
        let c = DMatrix::from_fn(keep.len(), self.states(), |r, col| self.c[(keep[r], col)]);
        let sz = keep.iter().map(|&i| self.sigma_zeta[i]).collect();
        Self::new(self.a.clone(), c, self.sigma_nu.clone(), sz)
    }
}

/// Random values on the pattern of `structure`: `A[i][j]` for every edge
/// `j -> i` and `C[r][s]` for every measured state, drawn uniformly from
/// `range`. Noise covariances are zero.
pub fn instantiate_lsi(structure: &SystemStructure, seed: u64, range: (f64, f64)) -> Result<LtiSystem> {
    if !(range.0 < range.1) || !range.0.is_finite() || !range.1.is_finite() {
        return Err(Error::DomainError(format!("empty value range {range:?}")));
    }
    let n = structure.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(n, n);
    for (src, dst) in structure.edges() {
        a[(dst, src)] = rng.random_range(range.0..range.1);
    }
    let outputs = structure.outputs();
    let mut c = DMatrix::zeros(outputs.len(), n);
    for (r, row) in outputs.iter().enumerate() {
        for &s in row {
            c[(r, s)] = rng.random_range(range.0..range.1);
        }
    }
    let m = outputs.len();
    LtiSystem::new(a, c, DMatrix::zeros(n, n), vec![0.0; m])
}

/// `A` from the weights of an edge list (`src dst w` sets `A[dst][src] = w`;
/// unweighted edges get 1) and unit state outputs on `measured`.
pub fn instantiate_fixed(edges: &EdgeList, measured: &[usize]) -> Result<LtiSystem> {
    let n = edges.n;
    let mut a = DMatrix::zeros(n, n);
    for e in &edges.edges {
        a[(e.dst, e.src)] = e.weight.unwrap_or(1.0);
    }
    let mut c = DMatrix::zeros(measured.len(), n);
    for (r, &s) in measured.iter().enumerate() {
        if s >= n {
            return Err(Error::dims(format!("measured state {} outside 1..={n}", s + 1)));
        }
        c[(r, s)] = 1.0;
    }
    LtiSystem::new(a, c, DMatrix::zeros(n, n), vec![0.0; measured.len()])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaultKind {
    Constant(f64),
    Gaussian { mean: f64, std: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fault {
    pub sensor: usize,
    pub onset: usize,
    pub kind: FaultKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FaultProfile {
    pub faults: Vec<Fault>,
}

impl FaultProfile {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with(mut self, fault: Fault) -> Self {
        self.faults.push(fault);
        self
    }

    /// Earliest onset per sensor.
    pub fn onsets(&self, sensors: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; sensors];
        for f in &self.faults {
            if f.sensor < sensors {
                let slot: &mut Option<usize> = &mut out[f.sensor];
                *slot = Some(slot.map_or(f.onset, |o| o.min(f.onset)));
            }
        }
        out
    }

    fn validate(&self, sensors: usize) -> Result<()> {
        for f in &self.faults {
            if f.sensor >= sensors {
                return Err(Error::dims(format!("fault on sensor {} of {sensors}", f.sensor + 1)));
            }
            if let FaultKind::Gaussian { std, .. } = f.kind {
                if !(std >= 0.0) {
                    return Err(Error::DomainError(format!("fault std {std} is negative")));
                }
            }
        }
        Ok(())
    }
}

/// Drops sensors from the network, the output rows and the gain blocks.
pub fn remove_sensors(
    network: &SensorNetwork,
    system: &LtiSystem,
    k: &GainMatrix,
    removed: &[usize],
) -> Result<(SensorNetwork, LtiSystem, GainMatrix)> {
    if network.len() != system.sensors() || k.sensors() != network.len() {
        return Err(Error::dims("network, outputs and gain disagree on the sensor count"));
    }
    Ok((
        network.without(removed)?,
        system.without_sensors(removed)?,
        k.without(removed)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::parse_edge_list;

    #[test]
    fn fixed_weights_land_in_a() {
        let el = parse_edge_list("1 3 0.1\n3 1 0.8\n2 2\n").unwrap();
        let sys = instantiate_fixed(&el, &[0]).unwrap();
        assert_eq!(sys.a[(2, 0)], 0.1);
        assert_eq!(sys.a[(0, 2)], 0.8);
        assert_eq!(sys.a[(1, 1)], 1.0);
        assert_eq!(sys.c[(0, 0)], 1.0);
    }

    #[test]
    fn random_instantiation_keeps_pattern() {
        let s = SystemStructure::new(3, [(0, 1), (1, 2), (2, 2)], vec![vec![0]]).unwrap();
        let a = instantiate_lsi(&s, 1, (0.2, 1.0)).unwrap();
        let b = instantiate_lsi(&s, 2, (0.2, 1.0)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.a[(i, j)] != 0.0, s.has_edge(j, i));
                assert_eq!(b.a[(i, j)] != 0.0, s.has_edge(j, i));
            }
        }
        assert_ne!(a.a, b.a);
        let empty = SystemStructure::new(2, [], vec![vec![1]]).unwrap();
        assert_eq!(instantiate_lsi(&empty, 0, (0.1, 1.0)).unwrap().a, DMatrix::zeros(2, 2));
    }

    #[test]
    fn system_validation() {
        let a = DMatrix::identity(2, 2);
        let c = DMatrix::identity(2, 2);
        let bad_nu = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(LtiSystem::new(a.clone(), c.clone(), bad_nu, vec![0.0, 0.0]).is_err());
        assert!(LtiSystem::new(a.clone(), c.clone(), DMatrix::zeros(2, 2), vec![-1.0, 0.0]).is_err());
        assert!(LtiSystem::new(a, c, DMatrix::zeros(2, 2), vec![0.0]).is_err());
    }

    #[test]
    fn onsets_take_earliest() {
        let p = FaultProfile::none()
            .with(Fault {
                sensor: 1,
                onset: 60,
                kind: FaultKind::Constant(2.0),
            })
            .with(Fault {
                sensor: 1,
                onset: 30,
                kind: FaultKind::Constant(1.0),
            });
        assert_eq!(p.onsets(3), vec![None, Some(30), None]);
    }
}
