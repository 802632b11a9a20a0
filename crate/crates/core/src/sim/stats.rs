use super::{LtiSystem, SimTrace};
use crate::error::{Error, Result};
use crate::gain::ErrorBound;

/// Steps discarded before steady-state statistics: `max(50, 5 / (1 - rho))`.
pub fn burn_in(rho: f64) -> usize {
    if !(rho < 1.0) {
        return usize::MAX;
    }
    50usize.max((5.0 / (1.0 - rho)).ceil() as usize)
}

/// `|c_i|_2 |Σ_e|_2 / N + sigma_zeta_i`, the working residual variance.
pub fn residual_variance_bound(bound: &ErrorBound, c_norm: f64, sigma_zeta: f64, sensors: usize) -> Result<f64> {
    if !bound.is_finite() {
        return Err(Error::UnstableError { b: bound.b });
    }
    Ok(c_norm * bound.bound / sensors as f64 + sigma_zeta)
}

/// Per-sensor residual variance over `k >= from`, pooled across traces.
pub fn empirical_residual_variance(traces: &[SimTrace], from: usize) -> Result<Vec<f64>> {
    let m = traces.first().map_or(0, |t| t.sensors());
    let mut sum = vec![0.0; m];
    let mut sq = vec![0.0; m];
    let mut count = 0usize;
    for t in traces {
        if t.sensors() != m {
            return Err(Error::dims("traces disagree on the sensor count"));
        }
        for r in t.residuals.iter().skip(from) {
            for i in 0..m {
                sum[i] += r[i];
                sq[i] += r[i] * r[i];
            }
            count += 1;
        }
    }
    if count < 2 {
        return Err(Error::EmptyWindow);
    }
    let c = count as f64;
    Ok((0..m).map(|i| (sq[i] - sum[i] * sum[i] / c) / (c - 1.0)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualStats {
    /// Working `Σ_r` per sensor.
    pub sigma_r: Vec<f64>,
    /// Calibration-run residual variance per sensor, when available.
    pub empirical: Option<Vec<f64>>,
}

impl ResidualStats {
    pub fn from_bound(bound: &ErrorBound, system: &LtiSystem) -> Result<Self> {
        let m = system.sensors();
        let sigma_r = (0..m)
            .map(|i| residual_variance_bound(bound, system.c.row(i).norm(), system.sigma_zeta[i], m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sigma_r,
            empirical: None,
        })
    }

    pub fn with_empirical(mut self, empirical: Vec<f64>) -> Result<Self> {
        if empirical.len() != self.sigma_r.len() {
            return Err(Error::ConfigMismatch(format!(
                "{} empirical variances for {} sensors",
                empirical.len(),
                self.sigma_r.len()
            )));
        }
        self.empirical = Some(empirical);
        Ok(self)
    }
}
