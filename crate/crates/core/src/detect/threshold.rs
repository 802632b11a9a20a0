use std::f64::consts::SQRT_2;

use super::special::{erf, erfcinv, inv_reg_upper_gamma, reg_upper_gamma};
use crate::error::{Error, Result};

fn check_far(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError(format!("false-alarm rate {p} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_window(window: usize, weight: f64) -> Result<()> {
    if window == 0 {
        return Err(Error::DomainError("window length must be at least 1".into()));
    }
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(Error::DomainError(format!("weight {weight} must lie in (0, 1]")));
    }
    Ok(())
}

/// `kappa = sqrt(2) erfinv(1 - p)`, evaluated through `erfcinv(p)` so small
/// `p` keep full precision.
pub fn kappa(p: f64) -> Result<f64> {
    check_far(p)?;
    Ok(SQRT_2 * erfcinv(p)?)
}

/// `theta_p = kappa(p) * sigma_r`.
pub fn stateless_threshold(p: f64, sigma_r: f64) -> Result<f64> {
    if !(sigma_r > 0.0) {
        return Err(Error::DomainError(format!("sigma_r {sigma_r} must be positive")));
    }
    Ok(kappa(p)? * sigma_r)
}

/// `(erf(3 kappa / sqrt 2) - erf(kappa / sqrt 2)) / 2`.
pub fn false_negative_rate(kappa: f64) -> f64 {
    (erf(3.0 * kappa / SQRT_2) - erf(kappa / SQRT_2)) / 2.0
}

/// Gamma shape of the (weighted) window statistic.
pub fn effective_dof(window: usize, weight: f64) -> f64 {
    if weight == 1.0 {
        window as f64 / 2.0
    } else {
        (1.0 - weight.powi(window as i32)) / (2.0 - 2.0 * weight)
    }
}

/// `sum_{m} mu^{k-m} r(m)^2 / sigma_r`; the last element of `residuals` is
/// step `k`.
pub fn distance_measure(residuals: &[f64], sigma_r: f64, weight: f64) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::EmptyWindow);
    }
    check_window(residuals.len(), weight)?;
    let mut acc = 0.0;
    for &r in residuals {
        acc = acc * weight + r * r;
    }
    Ok(acc / sigma_r)
}

/// `2 P^{-1}(1 - p, d)`: the measure level whose exceedance probability is `p`.
pub fn stateful_threshold(p: f64, window: usize, weight: f64) -> Result<f64> {
    check_far(p)?;
    check_window(window, weight)?;
    Ok(2.0 * inv_reg_upper_gamma(p, effective_dof(window, weight))?)
}

/// `p = 1 - P(d, measure / 2)`.
pub fn far_from_measure(measure: f64, window: usize, weight: f64) -> Result<f64> {
    check_window(window, weight)?;
    if measure.is_nan() || measure < 0.0 {
        return Err(Error::DomainError(format!("measure {measure} must be nonnegative")));
    }
    reg_upper_gamma(effective_dof(window, weight), measure / 2.0)
}

/// All thresholds for one sensor at one false-alarm rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSet {
    pub kappa: f64,
    pub theta_p: f64,
    pub theta_p_t: f64,
    pub theta_p_mu: f64,
}

impl ThresholdSet {
    pub fn new(p: f64, sigma_r: f64, window: usize, weight: f64) -> Result<Self> {
        Ok(Self {
            kappa: kappa(p)?,
            theta_p: stateless_threshold(p, sigma_r)?,
            theta_p_t: stateful_threshold(p, window, 1.0)?,
            theta_p_mu: stateful_threshold(p, window, weight)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_matches_confidence_bands() {
        assert!((kappa(0.317).unwrap() - 1.0).abs() < 2e-3);
        assert!((kappa(0.046).unwrap() - 2.0).abs() < 1e-2);
        // p = 1 - erf(1.5 / sqrt 2) = 13.36%
        let p = 1.0 - erf(1.5 / SQRT_2);
        assert!((p - 0.1336).abs() < 1e-4);
        assert!((stateless_threshold(p, 1.0).unwrap() - 1.5).abs() < 1e-12);
        assert!((stateless_threshold(0.05, 1.0).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn stateless_threshold_vanishes_as_p_to_one() {
        assert!(stateless_threshold(1.0 - 1e-9, 1.0).unwrap() < 1e-8);
        assert!(stateless_threshold(0.5, 0.0).is_err());
        assert!(stateless_threshold(0.0, 1.0).is_err());
    }

    #[test]
    fn false_negative_limits() {
        assert!(false_negative_rate(1e-9) < 1e-9);
        let p = 1.0 - erf(2.0 / SQRT_2);
        let fnr = false_negative_rate(2.0);
        assert!((fnr - p / 2.0).abs() < 1e-9);
    }

    #[test]
    fn distance_measure_means() {
        assert_eq!(distance_measure(&[0.0; 5], 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(distance_measure(&[1.0; 10], 1.0, 1.0).unwrap(), 10.0);
        let w = distance_measure(&[1.0; 10], 1.0, 0.75).unwrap();
        assert!((w - (1.0 - 0.75f64.powi(10)) / 0.25).abs() < 1e-12);
        // newest sample carries weight 1
        let v = distance_measure(&[2.0, 1.0], 1.0, 0.5).unwrap();
        assert!((v - (0.5 * 4.0 + 1.0)).abs() < 1e-15);
        assert_eq!(distance_measure(&[], 1.0, 1.0), Err(Error::EmptyWindow));
    }

    #[test]
    fn stateful_threshold_cases() {
        let t = stateful_threshold(0.05, 2, 1.0).unwrap();
        assert!((t - (-2.0 * 0.05f64.ln())).abs() < 1e-10);
        assert!((t - 5.991_464_547).abs() < 1e-8);
        assert!(stateful_threshold(0.003, 10, 1.0).unwrap() > stateful_threshold(0.05, 10, 1.0).unwrap());
        for t in [1, 3, 10, 16] {
            let a = stateful_threshold(0.01, t, 1.0).unwrap();
            let b = stateful_threshold(0.01, t, 1.0 - 1e-9).unwrap();
            assert!((a - b).abs() < 1e-5 * a, "T={t}");
        }
    }

    #[test]
    fn far_round_trip() {
        assert_eq!(far_from_measure(0.0, 10, 1.0).unwrap(), 1.0);
        for &p in &[0.3, 0.05, 0.003, 1e-4] {
            for t in [1, 2, 5, 10, 16] {
                for mu in [0.5, 0.75, 0.9, 1.0] {
                    let th = stateful_threshold(p, t, mu).unwrap();
                    let back = far_from_measure(th, t, mu).unwrap();
                    assert!((back - p).abs() < 1e-8, "p={p} T={t} mu={mu}: {back}");
                }
            }
        }
    }
}
