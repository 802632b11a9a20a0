use std::fmt::Write;

use nalgebra::{DMatrix, DVector};

use super::noise::{NoiseStream, TAG_FAULT, TAG_MEASUREMENT, TAG_PROCESS};
use super::{FaultKind, FaultProfile, LtiSystem};
use crate::error::{Error, Result};
use crate::gain::GainMatrix;
use crate::linalg::psd_sqrt;
use crate::network::SensorNetwork;

/// Everything a run produced, step by step. Index 0 is the initial step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub seed: u64,
    pub states: Vec<DVector<f64>>,
    /// `estimates[k][i]` is sensor `i`'s posterior `x̂_i(k|k)`.
    pub estimates: Vec<Vec<DVector<f64>>>,
    /// `y(k)` including noise and faults.
    pub outputs: Vec<DVector<f64>>,
    /// `residuals[k][i] = y_i(k) - c_i x̂_i(k|k)`.
    pub residuals: Vec<DVector<f64>>,
    /// `(1/N) sum_i |x̂_i(k|k) - x(k)|^2`
    pub mse: Vec<f64>,
    /// `ν(k)`, driving `x(k + 1) = A x(k) + ν(k)`.
    pub process_noise: Vec<DVector<f64>>,
    pub measurement_noise: Vec<DVector<f64>>,
    pub faults: Vec<DVector<f64>>,
    /// Earliest fault onset per sensor.
    pub fault_onsets: Vec<Option<usize>>,
}

impl SimTrace {
    pub fn horizon(&self) -> usize {
        self.states.len()
    }

    pub fn sensors(&self) -> usize {
        self.residuals.first().map_or(0, |r| r.len())
    }

    /// Stacked estimation error `x̂(k) - 1 ⊗ x(k)`.
    pub fn stacked_error(&self, k: usize) -> DVector<f64> {
        let n = self.states[k].len();
        let est = &self.estimates[k];
        DVector::from_fn(est.len() * n, |r, _| est[r / n][r % n] - self.states[k][r % n])
    }

    /// Residual series of one sensor.
    pub fn residual_series(&self, sensor: usize) -> Vec<f64> {
        self.residuals.iter().map(|r| r[sensor]).collect()
    }

    /// CSV with a comment header carrying the seed and scenario hash, then
    /// `k`, the states, every sensor's estimate, every residual and the MSE.
    pub fn to_csv(&self, scenario_hash: &str) -> String {
        let mut out = String::new();
        writeln!(out, "# seed={} scenario={scenario_hash}", self.seed).unwrap();
        let n = self.states.first().map_or(0, |s| s.len());
        let m = self.sensors();
        let mut cols = vec!["k".to_string()];
        cols.extend((1..=n).map(|a| format!("x{a}")));
        for i in 1..=m {
            cols.extend((1..=n).map(|a| format!("xhat{i}_{a}")));
        }
        cols.extend((1..=m).map(|i| format!("r{i}")));
        cols.push("mse".into());
        writeln!(out, "{}", cols.join(",")).unwrap();
        for k in 0..self.horizon() {
            let mut row = vec![k.to_string()];
            row.extend(self.states[k].iter().map(|v| format!("{v:?}")));
            for e in &self.estimates[k] {
                row.extend(e.iter().map(|v| format!("{v:?}")));
            }
            row.extend(self.residuals[k].iter().map(|v| format!("{v:?}")));
            row.push(format!("{:?}", self.mse[k]));
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

fn fault_vector(profile: &FaultProfile, stream: &NoiseStream, k: usize, sensors: usize) -> DVector<f64> {
    let draws = stream.normals(k, sensors);
    let mut f = DVector::zeros(sensors);
    for fault in &profile.faults {
        if k >= fault.onset {
            f[fault.sensor] += match fault.kind {
                FaultKind::Constant(v) => v,
                FaultKind::Gaussian { mean, std } => mean + std * draws[fault.sensor],
            };
        }
    }
    f
}

/// Runs the estimator for `horizon` steps (`k = 0 .. horizon - 1`).
///
/// Step 0 starts from `x(0) = x0` with every posterior at zero. For `k >= 1`
/// the truth moves by `x(k) = A x(k-1) + ν(k-1)`, each sensor fuses its
/// β-neighbours' propagated posteriors into a prior and corrects it with the
/// outputs of its α-neighbours.
pub fn simulate(
    system: &LtiSystem,
    network: &SensorNetwork,
    k: &GainMatrix,
    faults: &FaultProfile,
    horizon: usize,
    seed: u64,
    x0: &DVector<f64>,
) -> Result<SimTrace> {
    let n = system.states();
    let m = system.sensors();
    if network.len() != m || k.sensors() != m || k.states() != n || x0.len() != n {
        return Err(Error::dims(format!(
            "{m} output rows, {} network sensors, {} gain blocks of size {}, x0 of length {}",
            network.len(),
            k.sensors(),
            k.states(),
            x0.len()
        )));
    }
    faults.validate(m)?;
    let nu_sqrt = psd_sqrt(&system.sigma_nu);
    let zeta_std: DVector<f64> = DVector::from_iterator(m, system.sigma_zeta.iter().map(|s| s.sqrt()));
    let process = NoiseStream::new(seed, TAG_PROCESS);
    let measurement = NoiseStream::new(seed, TAG_MEASUREMENT);
    let fault_stream = NoiseStream::new(seed, TAG_FAULT);
    let w = network.w();
    let c = &system.c;
    let a = &system.a;
    let alpha_in: Vec<Vec<usize>> = (0..m).map(|i| network.alpha_in_neighbours(i)).collect();
    let c_rows: Vec<DVector<f64>> = (0..m).map(|j| c.row(j).transpose()).collect();

    let mut trace = SimTrace {
        seed,
        states: Vec::with_capacity(horizon),
        estimates: Vec::with_capacity(horizon),
        outputs: Vec::with_capacity(horizon),
        residuals: Vec::with_capacity(horizon),
        mse: Vec::with_capacity(horizon),
        process_noise: Vec::with_capacity(horizon),
        measurement_noise: Vec::with_capacity(horizon),
        faults: Vec::with_capacity(horizon),
        fault_onsets: faults.onsets(m),
    };
    let mut x = x0.clone();
    let mut post: Vec<DVector<f64>> = vec![DVector::zeros(n); m];
    for step in 0..horizon {
        if step > 0 {
            let nu = trace.process_noise.last().expect("noise of the previous step");
            x = a * &x + nu;
            let propagated: Vec<DVector<f64>> = post.iter().map(|p| a * p).collect();
            let mut next = Vec::with_capacity(m);
            let zeta = measurement.normals(step, m).component_mul(&zeta_std);
            let f = fault_vector(faults, &fault_stream, step, m);
            let y = c * &x + &zeta + &f;
            for i in 0..m {
                let mut prior = DVector::zeros(n);
                for j in 0..m {
                    let wij = w[(i, j)];
                    if wij != 0.0 {
                        prior.axpy(wij, &propagated[j], 1.0);
                    }
                }
                let mut innovation = DVector::zeros(n);
                for &j in &alpha_in[i] {
                    innovation.axpy(y[j] - c_rows[j].dot(&prior), &c_rows[j], 1.0);
                }
                next.push(prior + &k.blocks[i] * innovation);
            }
            post = next;
            push_outputs(&mut trace, &x, &post, c, y, zeta, f);
        } else {
            let zeta = measurement.normals(0, m).component_mul(&zeta_std);
            let f = fault_vector(faults, &fault_stream, 0, m);
            let y = c * &x + &zeta + &f;
            push_outputs(&mut trace, &x, &post, c, y, zeta, f);
        }
        trace.process_noise.push(&nu_sqrt * process.normals(step, n));
    }
    Ok(trace)
}

fn push_outputs(
    trace: &mut SimTrace,
    x: &DVector<f64>,
    post: &[DVector<f64>],
    c: &DMatrix<f64>,
    y: DVector<f64>,
    zeta: DVector<f64>,
    f: DVector<f64>,
) {
    let m = post.len();
    let residuals = DVector::from_fn(m, |i, _| y[i] - (c.row(i) * &post[i])[(0, 0)]);
    let mse = post.iter().map(|p| (p - x).norm_squared()).sum::<f64>() / m as f64;
    trace.states.push(x.clone());
    trace.estimates.push(post.to_vec());
    trace.outputs.push(y);
    trace.residuals.push(residuals);
    trace.mse.push(mse);
    trace.measurement_noise.push(zeta);
    trace.faults.push(f);
}
