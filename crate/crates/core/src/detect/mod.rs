//! Stateless and stateful (chi-squared) residual detectors.
//!
//! `Σ_r` is a residual variance. The stateless detector compares `|r_i(k)|`
//! against `kappa * sqrt(Σ_r)`, with `kappa = sqrt(2) erfinv(1 - p)`. The
//! stateful detectors accumulate `sum mu^{k-m} r(m)^2 / Σ_r` over a sliding
//! window of length `T` and compare it against the `1 - p` quantile of a chi-squared law with
//! `2d` degrees of freedom, where `d = T/2` for the plain window and
//! `d = (1 - mu^T) / (2 - 2 mu)` for the weighted one. The weighted law is the
//! usual single-chi-squared approximation of a weighted chi-squared sum.

mod detector;
pub mod special;
mod threshold;

pub use detector::{
    alarm_csv, detector_decisions, first_alarm_delays, run_detector, Decision, DetectorConfig, DetectorMode,
    SensorDetector, SigmaSource,
};
pub use threshold::{
    distance_measure, effective_dof, false_negative_rate, far_from_measure, kappa, stateful_threshold,
    stateless_threshold, ThresholdSet,
};

/// One detector decision that crossed its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AlarmEvent {
    pub sensor: usize,
    pub step: usize,
    pub mode: DetectorMode,
    /// `|r|`, or the (weighted) distance measure.
    pub measure: f64,
    pub threshold: f64,
    /// False-alarm rate the threshold was designed for.
    pub far: f64,
    /// Steps since the sensor's earliest fault onset, when it has one and the
    /// alarm is not before it.
    pub delay: Option<usize>,
}
