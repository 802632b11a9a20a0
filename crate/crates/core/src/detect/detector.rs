use std::collections::VecDeque;
use std::fmt;
use std::fmt::Write;

use super::threshold::{distance_measure, stateful_threshold, stateless_threshold};
use super::AlarmEvent;
use crate::error::{Error, Result};
use crate::sim::{ResidualStats, SimTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorMode {
    Stateless,
    StatefulWindow,
    StatefulWeighted,
}

impl fmt::Display for DetectorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Stateless => "stateless",
            Self::StatefulWindow => "window",
            Self::StatefulWeighted => "weighted",
        })
    }
}

impl std::str::FromStr for DetectorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stateless" => Ok(Self::Stateless),
            "window" => Ok(Self::StatefulWindow),
            "weighted" => Ok(Self::StatefulWeighted),
            _ => Err(Error::DomainError(format!("unknown detector mode `{s}`"))),
        }
    }
}

/// Where `Σ_r` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaSource {
    /// The analytic residual variance bound.
    #[default]
    Bound,
    /// Variance measured on a fault-free calibration run.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub mode: DetectorMode,
    pub far: f64,
    pub window: usize,
    pub weight: f64,
    pub sigma_source: SigmaSource,
}

impl DetectorConfig {
    pub fn stateless(far: f64) -> Self {
        Self {
            mode: DetectorMode::Stateless,
            far,
            window: 1,
            weight: 1.0,
            sigma_source: SigmaSource::Bound,
        }
    }

    pub fn window(far: f64, window: usize) -> Self {
        Self {
            mode: DetectorMode::StatefulWindow,
            far,
            window,
            weight: 1.0,
            sigma_source: SigmaSource::Bound,
        }
    }

    pub fn weighted(far: f64, window: usize, weight: f64) -> Self {
        Self {
            mode: DetectorMode::StatefulWeighted,
            far,
            window,
            weight,
            sigma_source: SigmaSource::Bound,
        }
    }

    pub fn with_source(mut self, source: SigmaSource) -> Self {
        self.sigma_source = source;
        self
    }

    fn effective_weight(&self) -> f64 {
        match self.mode {
            DetectorMode::StatefulWeighted => self.weight,
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.far > 0.0 && self.far < 1.0) {
            return Err(Error::DomainError(format!(
                "false-alarm rate {} must lie in (0, 1)",
                self.far
            )));
        }
        if self.window == 0 {
            return Err(Error::DomainError("window length must be at least 1".into()));
        }
        if !(self.weight > 0.0 && self.weight <= 1.0) {
            return Err(Error::DomainError(format!("weight {} must lie in (0, 1]", self.weight)));
        }
        Ok(())
    }
}

/// One per-step decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub measure: f64,
    pub threshold: f64,
    pub alarm: bool,
}

/// Streaming detector for one sensor. Before `T` samples have arrived the
/// window holds what is available and the threshold uses that count.
#[derive(Debug, Clone)]
pub struct SensorDetector {
    config: DetectorConfig,
    sigma_r: f64,
    window: VecDeque<f64>,
    /// thresholds indexed by sample count - 1
    thresholds: Vec<f64>,
}

impl SensorDetector {
    pub fn new(config: DetectorConfig, sigma_r: f64) -> Result<Self> {
        config.validate()?;
        if !(sigma_r > 0.0) || !sigma_r.is_finite() {
            return Err(Error::DomainError(format!(
                "residual variance {sigma_r} must be positive"
            )));
        }
        let thresholds = match config.mode {
            DetectorMode::Stateless => vec![stateless_threshold(config.far, sigma_r.sqrt())?],
            _ => (1..=config.window)
                .map(|c| stateful_threshold(config.far, c, config.effective_weight()))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self {
            config,
            sigma_r,
            window: VecDeque::with_capacity(config.window),
            thresholds,
        })
    }

    pub fn push(&mut self, residual: f64) -> Decision {
        let (measure, threshold) = match self.config.mode {
            DetectorMode::Stateless => (residual.abs(), self.thresholds[0]),
            _ => {
                if self.window.len() == self.config.window {
                    self.window.pop_front();
                }
                self.window.push_back(residual);
                let (head, tail) = self.window.as_slices();
                let samples: Vec<f64> = head.iter().chain(tail).copied().collect();
                let measure = distance_measure(&samples, self.sigma_r, self.config.effective_weight())
                    .expect("window is nonempty and validated");
                (measure, self.thresholds[samples.len() - 1])
            }
        };
        Decision {
            measure,
            threshold,
            alarm: measure >= threshold,
        }
    }
}

fn sigma_for(stats: &ResidualStats, config: &DetectorConfig, sensors: usize) -> Result<Vec<f64>> {
    let sigma = match config.sigma_source {
        SigmaSource::Bound => stats.sigma_r.clone(),
        SigmaSource::Empirical => stats
            .empirical
            .clone()
            .ok_or_else(|| Error::ConfigMismatch("no empirical residual variance available".into()))?,
    };
    if sigma.len() != sensors {
        return Err(Error::ConfigMismatch(format!(
            "residual statistics cover {} sensors, the trace has {sensors}",
            sigma.len()
        )));
    }
    Ok(sigma)
}

/// Every per-step decision of every sensor, `[sensor][step]`.
pub fn detector_decisions(
    trace: &SimTrace,
    stats: &ResidualStats,
    config: &DetectorConfig,
) -> Result<Vec<Vec<Decision>>> {
    config.validate()?;
    let sigma = sigma_for(stats, config, trace.sensors())?;
    (0..trace.sensors())
        .map(|i| {
            let mut det = SensorDetector::new(*config, sigma[i])?;
            Ok(trace.residuals.iter().map(|r| det.push(r[i])).collect())
        })
        .collect()
}

/// Alarm events in (sensor, step) order.
pub fn run_detector(trace: &SimTrace, stats: &ResidualStats, config: &DetectorConfig) -> Result<Vec<AlarmEvent>> {
    let decisions = detector_decisions(trace, stats, config)?;
    let mut events = Vec::new();
    for (i, per_step) in decisions.iter().enumerate() {
        let onset = trace.fault_onsets.get(i).copied().flatten();
        for (k, d) in per_step.iter().enumerate() {
            if d.alarm {
                events.push(AlarmEvent {
                    sensor: i,
                    step: k,
                    mode: config.mode,
                    measure: d.measure,
                    threshold: d.threshold,
                    far: config.far,
                    delay: onset.filter(|&o| k >= o).map(|o| k - o),
                });
            }
        }
    }
    Ok(events)
}

/// First alarm delay per sensor, counted from its fault onset.
pub fn first_alarm_delays(events: &[AlarmEvent], sensors: usize) -> Vec<Option<usize>> {
    let mut out = vec![None; sensors];
    for e in events {
        if let (Some(d), Some(slot)) = (e.delay, out.get_mut(e.sensor)) {
            if slot.is_none_or(|s: usize| d < s) {
                *slot = Some(d);
            }
        }
    }
    out
}

/// `sensor,step,mode,measure,threshold,far,delay` with 1-based sensors and
/// an empty delay when unknown.
pub fn alarm_csv(events: &[AlarmEvent]) -> String {
    let mut out = String::from("sensor,step,mode,measure,threshold,far,delay\n");
    for e in events {
        writeln!(
            out,
            "{},{},{},{:?},{:?},{:?},{}",
            e.sensor + 1,
            e.step,
            e.mode,
            e.measure,
            e.threshold,
            e.far,
            e.delay.map(|d| d.to_string()).unwrap_or_default()
        )
        .unwrap();
    }
    out
}
