//! Scenario files: `[section]` headers followed by `key = value` lines.
//! `#` starts a comment. `fault` and `detector` may repeat; every other key
//! may appear once.

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::detect::{DetectorConfig, DetectorMode, SigmaSource};
use crate::error::{Error, Result};
use crate::gain::{GainConfig, Solver};
use crate::sim::FaultKind;

#[derive(Debug, Clone, PartialEq)]
pub enum StructureSource {
    Fig2,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSource {
    /// Edge weights from the structure source (1 when absent), unit outputs.
    Fixed,
    Random {
        seed: u64,
        low: f64,
        high: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlacementSpec {
    Auto {
        q: usize,
    },
    /// 0-based measured states, one sensor each.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSpec {
    Synthesized { seed: u64 },
    File(PathBuf),
}

/// A fault on a 0-based sensor index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultSpec {
    pub sensor: usize,
    pub onset: usize,
    pub kind: FaultKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Sustained `r^2 / Σ_r`.
    pub ratio: f64,
    pub windows: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            ratio: 2.0,
            windows: (2..=16).collect(),
            weights: vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub structure: StructureSource,
    pub weights: WeightSource,
    pub placement: PlacementSpec,
    pub network: NetworkSpec,
    pub gain: GainConfig,
    pub nu: f64,
    pub zeta: f64,
    pub faults: Vec<FaultSpec>,
    pub horizon: usize,
    pub x0: Option<Vec<f64>>,
    pub seeds: Vec<u64>,
    /// Fault-free steps per seed used to measure residual variance; 0 skips.
    pub calibration_horizon: usize,
    pub detectors: Vec<DetectorConfig>,
    pub sweep: SweepSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            structure: StructureSource::Fig2,
            weights: WeightSource::Fixed,
            placement: PlacementSpec::Auto { q: 0 },
            network: NetworkSpec::Synthesized { seed: 1 },
            gain: GainConfig::default(),
            nu: 0.01,
            zeta: 0.01,
            faults: Vec::new(),
            horizon: 100,
            x0: None,
            seeds: vec![1],
            calibration_horizon: 0,
            detectors: Vec::new(),
            sweep: SweepSpec::default(),
        }
    }
}

const MAX_HORIZON: usize = 10_000_000;
const MAX_LIST: usize = 100_000;

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| Error::parse(line, format!("`{key}`: cannot parse `{v}`")))
}

fn real(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(line, key, v)?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("`{key}`: `{v}` is not finite")));
    }
    Ok(x)
}

fn list<T>(line: usize, key: &str, v: &str, f: impl Fn(usize, &str, &str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = v.split_whitespace().collect();
    if items.is_empty() || items.len() > MAX_LIST {
        return Err(Error::parse(
            line,
            format!("`{key}` needs between 1 and {MAX_LIST} values"),
        ));
    }
    items.iter().map(|s| f(line, key, s)).collect()
}

/// `a..b` (inclusive) or a whitespace list.
fn usize_range(line: usize, key: &str, v: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = v.split_once("..") {
        let (a, b): (usize, usize) = (num(line, key, a.trim())?, num(line, key, b.trim())?);
        if a > b || b - a >= MAX_LIST {
            return Err(Error::parse(line, format!("`{key}`: bad range `{v}`")));
        }
        return Ok((a..=b).collect());
    }
    list(line, key, v, num::<usize>)
}

fn one_based(line: usize, key: &str, v: &str) -> Result<usize> {
    match num::<usize>(line, key, v)? {
        0 => Err(Error::parse(line, format!("`{key}`: indices are 1-based"))),
        i => Ok(i - 1),
    }
}

fn unit_interval(line: usize, key: &str, v: &str) -> Result<f64> {
    let x = real(line, key, v)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::parse(line, format!("`{key}`: {x} must lie in (0, 1)")));
    }
    Ok(x)
}

fn parse_fault(line: usize, v: &str) -> Result<FaultSpec> {
    let f: Vec<&str> = v.split_whitespace().collect();
    let (sensor, onset) = match f.as_slice() {
        [s, o, ..] => (one_based(line, "fault", s)?, num::<usize>(line, "fault", o)?),
        _ => {
            return Err(Error::parse(
                line,
                "fault = <sensor> <onset> constant <v> | gaussian <mean> <var>",
            ))
        }
    };
    let kind = match &f[2..] {
        ["constant", v] => FaultKind::Constant(real(line, "fault", v)?),
        ["gaussian", m, var] => {
            let var = real(line, "fault", var)?;
            if var < 0.0 {
                return Err(Error::parse(line, "fault variance must be nonnegative"));
            }
            FaultKind::Gaussian {
                mean: real(line, "fault", m)?,
                std: var.sqrt(),
            }
        }
        _ => {
            return Err(Error::parse(
                line,
                "fault kind must be `constant <v>` or `gaussian <mean> <var>`",
            ))
        }
    };
    Ok(FaultSpec { sensor, onset, kind })
}

fn parse_detector(line: usize, v: &str) -> Result<DetectorConfig> {
    let f: Vec<&str> = v.split_whitespace().collect();
    let mode: DetectorMode = f
        .first()
        .ok_or_else(|| Error::parse(line, "empty detector"))?
        .parse()
        .map_err(|e: Error| Error::parse(line, e.to_string()))?;
    let config = match (mode, &f[1..]) {
        (DetectorMode::Stateless, [p]) => DetectorConfig::stateless(unit_interval(line, "detector", p)?),
        (DetectorMode::StatefulWindow, [p, t]) => {
            DetectorConfig::window(unit_interval(line, "detector", p)?, num(line, "detector", t)?)
        }
        (DetectorMode::StatefulWeighted, [p, t, mu]) => DetectorConfig::weighted(
            unit_interval(line, "detector", p)?,
            num(line, "detector", t)?,
            real(line, "detector", mu)?,
        ),
        _ => {
            return Err(Error::parse(
                line,
                "detector = stateless <p> | window <p> <T> | weighted <p> <T> <mu>",
            ))
        }
    };
    config.validate().map_err(|e| Error::parse(line, e.to_string()))?;
    Ok(config)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut sc = Scenario::default();
    let mut section = String::new();
    let mut seen = BTreeSet::new();
    let mut weight_kind: Option<(usize, String)> = None;
    let (mut weight_seed, mut weight_range) = (1u64, (0.1, 1.0));
    let mut source = SigmaSource::Bound;
    let mut explicit_detectors = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line, "unterminated section header"))?
                .trim();
            if ![
                "system",
                "placement",
                "network",
                "gain",
                "faults",
                "run",
                "detectors",
                "sweep",
            ]
            .contains(&name)
            {
                return Err(Error::parse(line, format!("unknown section `{name}`")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::parse(line, "expected `key = value`"))?;
        if section.is_empty() {
            return Err(Error::parse(line, "key before any section header"));
        }
        let repeatable = matches!((section.as_str(), key), ("faults", "fault") | ("detectors", "detector"));
        if !repeatable && !seen.insert((section.clone(), key.to_string())) {
            return Err(Error::parse(line, format!("duplicate key `{key}` in [{section}]")));
        }
        match (section.as_str(), key) {
            ("system", "structure") => {
                sc.structure = match value {
                    "fig2" => StructureSource::Fig2,
                    "" => return Err(Error::parse(line, "empty structure path")),
                    p => StructureSource::File(PathBuf::from(p)),
                }
            }
            ("system", "weights") => weight_kind = Some((line, value.to_string())),
            ("system", "weight_seed") => weight_seed = num(line, key, value)?,
            ("system", "weight_range") => {
                let r = list(line, key, value, real)?;
                if r.len() != 2 || !(r[0] < r[1]) {
                    return Err(Error::parse(line, "weight_range = <low> <high> with low < high"));
                }
                weight_range = (r[0], r[1]);
            }
            ("system", "nu") | ("system", "zeta") => {
                let x = real(line, key, value)?;
                if x < 0.0 {
                    return Err(Error::parse(line, format!("`{key}` must be nonnegative")));
                }
                if key == "nu" {
                    sc.nu = x;
                } else {
                    sc.zeta = x;
                }
            }
            ("placement", "q") => {
                sc.placement = PlacementSpec::Auto {
                    q: num(line, key, value)?,
                }
            }
            ("placement", "outputs") => sc.placement = PlacementSpec::Explicit(list(line, key, value, one_based)?),
            ("network", "seed") => {
                sc.network = NetworkSpec::Synthesized {
                    seed: num(line, key, value)?,
                }
            }
            ("network", "file") => sc.network = NetworkSpec::File(PathBuf::from(value)),
            ("gain", "epsilon") => sc.gain.epsilon = unit_interval(line, key, value)?,
            ("gain", "solver") => {
                sc.gain.solver = value.parse::<Solver>().map_err(|e| Error::parse(line, e.to_string()))?
            }
            ("gain", "iterations") => sc.gain.max_iterations = num(line, key, value)?,
            ("gain", "tolerance") => sc.gain.tolerance = real(line, key, value)?,
            ("gain", "target_norm") => sc.gain.target_norm = unit_interval(line, key, value)?,
            ("faults", "fault") => sc.faults.push(parse_fault(line, value)?),
            ("run", "horizon") => {
                sc.horizon = num(line, key, value)?;
                if sc.horizon == 0 || sc.horizon > MAX_HORIZON {
                    return Err(Error::parse(line, format!("horizon must lie in 1..={MAX_HORIZON}")));
                }
            }
            ("run", "seeds") => {
                sc.seeds = if let Some((a, b)) = value.split_once("..") {
                    let (a, b): (u64, u64) = (num(line, key, a.trim())?, num(line, key, b.trim())?);
                    if a > b || b - a >= MAX_LIST as u64 {
                        return Err(Error::parse(line, format!("bad seed range `{value}`")));
                    }
                    (a..=b).collect()
                } else {
                    list(line, key, value, num::<u64>)?
                }
            }
            ("run", "x0") => sc.x0 = Some(list(line, key, value, real)?),
            ("run", "calibration_horizon") => {
                sc.calibration_horizon = num(line, key, value)?;
                if sc.calibration_horizon > MAX_HORIZON {
                    return Err(Error::parse(line, "calibration horizon too long"));
                }
            }
            ("detectors", "detector") => explicit_detectors.push(parse_detector(line, value)?),
            ("detectors", "source") => {
                source = match value {
                    "bound" => SigmaSource::Bound,
                    "empirical" => SigmaSource::Empirical,
                    _ => return Err(Error::parse(line, "source must be `bound` or `empirical`")),
                }
            }
            ("sweep", "ratio") => {
                sc.sweep.ratio = real(line, key, value)?;
                if sc.sweep.ratio < 0.0 {
                    return Err(Error::parse(line, "ratio must be nonnegative"));
                }
            }
            ("sweep", "windows") => {
                sc.sweep.windows = usize_range(line, key, value)?;
                if sc.sweep.windows.contains(&0) {
                    return Err(Error::parse(line, "windows must be positive"));
                }
            }
            ("sweep", "weights") => {
                sc.sweep.weights = list(line, key, value, real)?;
                if sc.sweep.weights.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
                    return Err(Error::parse(line, "weights must lie in (0, 1]"));
                }
            }
            _ => return Err(Error::parse(line, format!("unknown key `{key}` in [{section}]"))),
        }
    }
    if let Some((line, kind)) = weight_kind {
        sc.weights = match kind.as_str() {
            "fixed" => WeightSource::Fixed,
            "random" => WeightSource::Random {
                seed: weight_seed,
                low: weight_range.0,
                high: weight_range.1,
            },
            _ => return Err(Error::parse(line, "weights must be `fixed` or `random`")),
        };
    }
    sc.detectors = explicit_detectors.into_iter().map(|d| d.with_source(source)).collect();
    if source == SigmaSource::Empirical && sc.calibration_horizon == 0 {
        return Err(Error::parse(
            0,
            "empirical residual variance needs `calibration_horizon` in [run]",
        ));
    }
    if sc.gain.max_iterations == 0 || !(sc.gain.tolerance > 0.0) {
        return Err(Error::parse(0, "gain iterations and tolerance must be positive"));
    }
    Ok(sc)
}

/// The simulation study: the built-in system with outputs on x1, x6, x9
/// (parent SCCs) and x5 (contraction), a directed-cycle consensus network,
/// noise variances 0.01, a constant bias of 2 on the first sensor from step
/// 60 and a N(2, 0.5) fault on the contraction sensor from step 30.
pub const REFERENCE_SCENARIO: &str = "\
[system]
structure = fig2
weights = fixed
nu = 0.01
zeta = 0.01

[placement]
q = 0

[network]
seed = 1

[gain]
epsilon = 0.14
solver = auto
target_norm = 0.9944

[faults]
fault = 1 60 constant 2
fault = 4 30 gaussian 2 0.5

[run]
horizon = 100
seeds = 1..10
calibration_horizon = 5000

[detectors]
detector = stateless 0.32
detector = stateless 0.05
detector = stateless 0.003
detector = stateless 0.0001
detector = window 0.003 10
detector = window 0.0001 10
detector = weighted 0.05 10 0.75
detector = weighted 0.003 10 0.75
source = bound

[sweep]
ratio = 2
windows = 2..16
weights = 0.5 0.6 0.7 0.8 0.9 1.0
";
