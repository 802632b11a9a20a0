use std::fmt::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::{is_plain_name, parse_manifest, sha256_hex, Manifest};
use super::{design, fault_profile, initial_state, parse_scenario, Design, Scenario};
use crate::detect::{
    alarm_csv, detector_decisions, effective_dof, far_from_measure, run_detector, AlarmEvent, SigmaSource,
};
use crate::error::{Error, Result};
use crate::gain::GainFile;
use crate::network::{
    check_distributed_observability, connectivity_report, ConnectivityReport, ObservabilityConditions, SensorNetwork,
};
use crate::sim::{burn_in, empirical_residual_variance, simulate, FaultProfile, LtiSystem, ResidualStats, SimTrace};
use crate::structure::{
    check_structural_observability, find_contractions, scc_decompose, structural_rank, EdgeList, SccDecomposition,
    SystemStructure,
};

/// Calibration runs use `seed + CALIBRATION_SEED_OFFSET`.
pub const CALIBRATION_SEED_OFFSET: u64 = 1 << 32;

fn set(states: impl IntoIterator<Item = usize>) -> String {
    let names: Vec<String> = states.into_iter().map(|s| format!("x{}", s + 1)).collect();
    format!("{{{}}}", names.join(","))
}

/// Decomposition of a system digraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub states: usize,
    pub edges: usize,
    pub scc: SccDecomposition,
    pub contractions: Vec<Vec<usize>>,
    pub structural_rank: usize,
}

impl Analysis {
    pub fn parent_sccs(&self) -> Vec<Vec<usize>> {
        self.scc.parents().cloned().collect()
    }

    /// Parent SCCs, then contractions.
    pub fn equivalence_classes(&self) -> Vec<Vec<usize>> {
        let mut c = self.parent_sccs();
        c.extend(self.contractions.iter().cloned());
        c
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        writeln!(out, "states {}", self.states).unwrap();
        writeln!(out, "edges {}", self.edges).unwrap();
        writeln!(
            out,
            "structural rank {} (deficiency {})",
            self.structural_rank,
            self.states - self.structural_rank
        )
        .unwrap();
        for (i, (c, &p)) in self.scc.components.iter().zip(&self.scc.parent_flags).enumerate() {
            let tag = if p { " parent" } else { "" };
            writeln!(out, "scc {} {}{tag}", i + 1, set(c.iter().copied())).unwrap();
        }
        for (i, c) in self.contractions.iter().enumerate() {
            writeln!(out, "contraction {} {}", i + 1, set(c.iter().copied())).unwrap();
        }
        for (i, c) in self.equivalence_classes().iter().enumerate() {
            writeln!(out, "class {} {}", i + 1, set(c.iter().copied())).unwrap();
        }
        out
    }
}

pub fn cmd_analyze(edges: &EdgeList) -> Analysis {
    let s = edges.to_structure();
    Analysis {
        states: s.n(),
        edges: s.edge_count(),
        scc: scc_decompose(&s),
        contractions: find_contractions(&s)
            .contractions
            .into_iter()
            .map(|c| c.into_iter().collect())
            .collect(),
        structural_rank: structural_rank(&s),
    }
}

/// Outcome of removing one set of sensors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalCheck {
    pub removed: Vec<usize>,
    /// Every parent SCC and contraction keeps a measured state.
    pub structural: bool,
    /// `(W' ⊗ A, D_C')` stays observable on the reduced network.
    pub distributed: bool,
    pub beta_connected: bool,
}

impl RemovalCheck {
    pub fn holds(&self) -> bool {
        self.structural && self.distributed && self.beta_connected
    }
}

/// Removes every sensor set of size `1..=q` and rechecks observability.
/// `structure` carries one output row per sensor.
pub fn removal_checks(
    structure: &SystemStructure,
    network: &SensorNetwork,
    system: &LtiSystem,
    q: usize,
) -> Result<Vec<RemovalCheck>> {
    let n = network.len();
    let mut out = Vec::new();
    for size in 1..=q.min(n.saturating_sub(1)) {
        let mut err = None;
        crate::network::all_subsets(n, size, |removed| {
            match check_removal(structure, network, system, removed) {
                Ok(c) => out.push(c),
                Err(e) => err = Some(e),
            }
            err.is_none()
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(out)
}

fn check_removal(
    structure: &SystemStructure,
    network: &SensorNetwork,
    system: &LtiSystem,
    removed: &[usize],
) -> Result<RemovalCheck> {
    let rows: Vec<Vec<usize>> = structure
        .outputs()
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, r)| r.iter().copied().collect())
        .collect();
    let structural = check_structural_observability(&structure.with_outputs(rows)?);
    let net = network.without(removed)?;
    let sys = system.without_sensors(removed)?;
    let distributed = check_distributed_observability(&sys.a, &sys.c, net.w(), net.u())?;
    Ok(RemovalCheck {
        removed: removed.to_vec(),
        structural,
        distributed,
        beta_connected: net.beta_strongly_connected(),
    })
}

/// Largest `Q` for which `design` runs the exhaustive removal check.
pub const EXHAUSTIVE_REMOVAL_MAX_Q: usize = 2;

#[derive(Debug, Clone)]
pub struct DesignSummary {
    pub design: Design,
    pub connectivity: ConnectivityReport,
    pub distributed_observable: bool,
    pub conditions: ObservabilityConditions,
    /// `None` when `Q` exceeds [`EXHAUSTIVE_REMOVAL_MAX_Q`].
    pub removals: Option<Vec<RemovalCheck>>,
}

impl DesignSummary {
    pub fn placement_text(&self) -> String {
        let d = &self.design;
        let mut out = String::from("netobs-placement 1\n");
        writeln!(out, "q {}", d.q).unwrap();
        for (i, (s, c)) in d.measured_states().iter().zip(&d.components).enumerate() {
            let role = if d.network.alpha().contains(&i) {
                "alpha"
            } else {
                "beta"
            };
            writeln!(out, "sensor {} x{} {c} {role}", i + 1, s + 1).unwrap();
        }
        out
    }

    pub fn report(&self) -> String {
        let d = &self.design;
        let mut out = String::new();
        writeln!(out, "sensors {} (Q = {})", d.network.len(), d.q).unwrap();
        let states: Vec<String> = d.measured_states().iter().map(|s| format!("x{}", s + 1)).collect();
        writeln!(out, "outputs {}", states.join(" ")).unwrap();
        let alpha: Vec<String> = d.network.alpha().iter().map(|a| (a + 1).to_string()).collect();
        writeln!(out, "alpha sensors {}", alpha.join(" ")).unwrap();
        writeln!(out, "spectral radius {:.6}", d.rho).unwrap();
        writeln!(out, "spectral norm b {:.6}", d.bound.b).unwrap();
        writeln!(out, "error bound {:.6}", d.bound.bound).unwrap();
        writeln!(out, "vertex connectivity {}", self.connectivity.vertex_connectivity).unwrap();
        for (q, ok) in &self.connectivity.survives_removals {
            writeln!(out, "survives {q} removals {ok}").unwrap();
        }
        writeln!(out, "distributed observability {}", self.distributed_observable).unwrap();
        writeln!(
            out,
            "beta strongly connected {}",
            self.conditions.beta_strongly_connected
        )
        .unwrap();
        writeln!(out, "alpha sensors are hubs {}", self.conditions.alpha_sensors_are_hubs).unwrap();
        match &self.removals {
            Some(r) => {
                let failed: Vec<&RemovalCheck> = r.iter().filter(|c| !c.holds()).collect();
                writeln!(out, "removal checks {} passed of {}", r.len() - failed.len(), r.len()).unwrap();
                for c in failed {
                    let ids: Vec<String> = c.removed.iter().map(|i| (i + 1).to_string()).collect();
                    writeln!(
                        out,
                        "  removing {}: structural {} distributed {} connected {}",
                        ids.join(" "),
                        c.structural,
                        c.distributed,
                        c.beta_connected
                    )
                    .unwrap();
                }
            }
            None => writeln!(out, "removal checks skipped (Q > {EXHAUSTIVE_REMOVAL_MAX_Q})").unwrap(),
        }
        out
    }

    /// Placement, network, gain and report files.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let gain = GainFile {
            epsilon: self.design.epsilon,
            rho: self.design.rho,
            gain: self.design.gain.clone(),
        };
        std::fs::write(dir.join("placement.txt"), self.placement_text())?;
        std::fs::write(dir.join("network.txt"), self.design.network.to_text())?;
        std::fs::write(dir.join("gain.txt"), gain.to_text())?;
        std::fs::write(dir.join("design.txt"), self.report())?;
        Ok(())
    }
}

pub fn cmd_design(sc: &Scenario, base: &Path) -> Result<DesignSummary> {
    let d = design(sc, base)?;
    let adj = d.network.beta_adjacency();
    let connectivity = connectivity_report(&adj, d.q.max(1));
    let distributed_observable =
        check_distributed_observability(&d.system.a, &d.system.c, d.network.w(), d.network.u())?;
    let conditions = ObservabilityConditions::evaluate(&d.network, &d.components)?;
    let removals = if d.q <= EXHAUSTIVE_REMOVAL_MAX_Q {
        Some(removal_checks(&d.structure, &d.network, &d.system, d.q)?)
    } else {
        None
    };
    Ok(DesignSummary {
        design: d,
        connectivity,
        distributed_observable,
        conditions,
        removals,
    })
}

/// A finished simulation: traces, residual statistics, alarms and the
/// rendered report bundle.
#[derive(Debug, Clone)]
pub struct SimulationSummary {
    pub design: Design,
    pub traces: Vec<SimTrace>,
    pub stats: ResidualStats,
    /// `events[detector][seed]`
    pub events: Vec<Vec<Vec<AlarmEvent>>>,
    /// `(file name, contents)` in bundle order, manifest last.
    pub files: Vec<(String, String)>,
    pub manifest: Manifest,
}

impl SimulationSummary {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

fn residual_stats(sc: &Scenario, d: &Design, calibration: &[SimTrace]) -> Result<ResidualStats> {
    let empirical = if calibration.is_empty() {
        None
    } else {
        let from = burn_in(d.rho);
        if from + 2 > sc.calibration_horizon {
            return Err(Error::DomainError(format!(
                "calibration horizon {} does not outlast the {from}-step burn-in",
                sc.calibration_horizon
            )));
        }
        Some(empirical_residual_variance(calibration, from)?)
    };
    let needs_bound = sc.detectors.iter().any(|c| c.sigma_source == SigmaSource::Bound);
    match (ResidualStats::from_bound(&d.bound, &d.system), empirical) {
        (Ok(s), Some(e)) => s.with_empirical(e),
        (Ok(s), None) => Ok(s),
        (Err(_), Some(e)) if !needs_bound => Ok(ResidualStats {
            sigma_r: e.clone(),
            empirical: Some(e),
        }),
        (Err(e), _) => Err(e),
    }
}

fn mse_csv(traces: &[SimTrace], bound: f64) -> String {
    let mut out = String::from("k");
    for t in traces {
        write!(out, ",seed{}", t.seed).unwrap();
    }
    out.push_str(",mean,bound\n");
    let horizon = traces.first().map_or(0, |t| t.horizon());
    for k in 0..horizon {
        write!(out, "{k}").unwrap();
        let mut sum = 0.0;
        for t in traces {
            write!(out, ",{:?}", t.mse[k]).unwrap();
            sum += t.mse[k];
        }
        writeln!(out, ",{:?},{:?}", sum / traces.len() as f64, bound).unwrap();
    }
    out
}

fn run_all(sc: &Scenario, base: &Path, scenario_text: &str) -> Result<SimulationSummary> {
    if sc.seeds.is_empty() {
        return Err(Error::DomainError("no seeds to run".into()));
    }
    let d = design(sc, base)?;
    let x0 = initial_state(sc, d.system.states())?;
    let faults = fault_profile(sc);
    let traces = sc
        .seeds
        .par_iter()
        .map(|&s| simulate(&d.system, &d.network, &d.gain, &faults, sc.horizon, s, &x0))
        .collect::<Result<Vec<_>>>()?;
    let calibration_seeds: Vec<u64> = if sc.calibration_horizon > 0 {
        sc.seeds
            .iter()
            .map(|s| s.wrapping_add(CALIBRATION_SEED_OFFSET))
            .collect()
    } else {
        Vec::new()
    };
    let calibration = calibration_seeds
        .par_iter()
        .map(|&s| {
            simulate(
                &d.system,
                &d.network,
                &d.gain,
                &FaultProfile::none(),
                sc.calibration_horizon,
                s,
                &x0,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = residual_stats(sc, &d, &calibration)?;
    drop(calibration);

    let events = sc
        .detectors
        .par_iter()
        .map(|cfg| {
            traces
                .iter()
                .map(|t| run_detector(t, &stats, cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let decisions = sc
        .detectors
        .par_iter()
        .map(|cfg| {
            traces
                .iter()
                .map(|t| detector_decisions(t, &stats, cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let scenario_sha = sha256_hex(scenario_text.as_bytes());
    let mut files = vec![
        ("scenario.txt".to_string(), scenario_text.to_string()),
        ("mse.csv".to_string(), mse_csv(&traces, d.bound.bound)),
    ];
    for t in &traces {
        files.push((format!("trace_seed{}.csv", t.seed), t.to_csv(&scenario_sha)));
    }
    for (j, cfg) in sc.detectors.iter().enumerate() {
        let mut alarms = String::from("seed,");
        let mut resid = String::from("seed,k");
        for i in 1..=d.network.len() {
            write!(resid, ",measure{i},threshold{i},alarm{i}").unwrap();
        }
        resid.push('\n');
        for (t, (ev, dec)) in traces.iter().zip(events[j].iter().zip(&decisions[j])) {
            let body = alarm_csv(ev);
            let mut rows = body.lines();
            if t.seed == traces[0].seed {
                alarms.push_str(rows.next().unwrap_or(""));
                alarms.push('\n');
            } else {
                rows.next();
            }
            for r in rows {
                writeln!(alarms, "{},{r}", t.seed).unwrap();
            }
            for k in 0..t.horizon() {
                write!(resid, "{},{k}", t.seed).unwrap();
                for per_sensor in dec {
                    let x = per_sensor[k];
                    write!(resid, ",{:?},{:?},{}", x.measure, x.threshold, u8::from(x.alarm)).unwrap();
                }
                resid.push('\n');
            }
        }
        let tag = format!("d{}_{}_p{}", j + 1, cfg.mode, cfg.far);
        files.push((format!("alarms_{tag}.csv"), alarms));
        files.push((format!("residuals_{tag}.csv"), resid));
    }
    debug_assert!(files.iter().all(|(n, _)| is_plain_name(n)));
    let manifest = Manifest {
        scenario_sha256: scenario_sha,
        base: base.to_path_buf(),
        seeds: sc.seeds.clone(),
        calibration_seeds,
        rho: d.rho,
        b: d.bound.b,
        bound: d.bound.bound,
        a1: d.bound.a1,
        a2: d.bound.a2,
        sigma_r: stats.sigma_r.clone(),
        empirical: stats.empirical.clone(),
        files: files
            .iter()
            .map(|(n, b)| (n.clone(), sha256_hex(b.as_bytes())))
            .collect(),
    };
    files.push(("manifest.txt".to_string(), manifest.to_text()));
    Ok(SimulationSummary {
        design: d,
        traces,
        stats,
        events,
        files,
        manifest,
    })
}

/// Runs every seed and detector of a scenario. `scenario_text` is the file the
/// scenario was parsed from and is copied into the bundle.
pub fn cmd_simulate(scenario_text: &str, base: &Path) -> Result<SimulationSummary> {
    let sc = parse_scenario(scenario_text)?;
    run_all(&sc, base, scenario_text)
}

/// Rechecks a written bundle: file hashes, then a full regeneration from the
/// copied scenario. Returns the names of files that differ.
pub fn cmd_verify(dir: &Path) -> Result<Vec<String>> {
    let manifest = parse_manifest(&std::fs::read_to_string(dir.join("manifest.txt"))?)?;
    let mut bad = Vec::new();
    for (name, hash) in &manifest.files {
        match std::fs::read(dir.join(name)) {
            Ok(bytes) if sha256_hex(&bytes) == *hash => {}
            _ => bad.push(name.clone()),
        }
    }
    let text = std::fs::read_to_string(dir.join("scenario.txt"))?;
    if sha256_hex(text.as_bytes()) != manifest.scenario_sha256 {
        bad.push("scenario.txt".into());
        return Ok(bad);
    }
    let again = cmd_simulate(&text, &manifest.base)?;
    if again.manifest.files != manifest.files {
        for (name, hash) in &manifest.files {
            if !again.manifest.files.iter().any(|(n, h)| n == name && h == hash) && !bad.contains(name) {
                bad.push(format!("{name} (regenerated)"));
            }
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub window: usize,
    pub weight: f64,
    pub far: f64,
}

/// FAR of a sustained normalized residual `ratio = r^2 / Σ_r` on every
/// `(T, mu)` pair. The (weighted) measure then sits at `ratio * 2d`.
pub fn sweep_grid(ratio: f64, windows: &[usize], weights: &[f64]) -> Result<Vec<SweepPoint>> {
    if windows.is_empty() || weights.is_empty() {
        return Err(Error::DomainError("empty sweep grid".into()));
    }
    let mut out = Vec::with_capacity(windows.len() * weights.len());
    for &t in windows {
        for &mu in weights {
            let measure = ratio * 2.0 * effective_dof(t, mu);
            out.push(SweepPoint {
                window: t,
                weight: mu,
                far: far_from_measure(measure, t, mu)?,
            });
        }
    }
    Ok(out)
}

/// `T,mu,far` CSV for the scenario's sweep section.
pub fn cmd_sweep(sc: &Scenario) -> Result<String> {
    let grid = sweep_grid(sc.sweep.ratio, &sc.sweep.windows, &sc.sweep.weights)?;
    let mut out = String::from("T,mu,far\n");
    for p in grid {
        writeln!(out, "{},{:?},{:?}", p.window, p.weight, p.far).unwrap();
    }
    Ok(out)
}

/// Directory relative scenario paths resolve against.
pub fn scenario_base(path: &Path) -> PathBuf {
    let parent = path.parent().unwrap_or(Path::new("."));
    let parent = if parent.as_os_str().is_empty() {
        Path::new(".")
    } else {
        parent
    };
    std::fs::canonicalize(parent).unwrap_or_else(|_| parent.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fig2_edge_list;

    #[test]
    fn analyze_reports_fig2() {
        let a = cmd_analyze(&fig2_edge_list());
        assert_eq!(a.structural_rank, 9);
        let r = a.report();
        assert!(r.contains("contraction 1 {x2,x4,x5,x7,x9}"), "{r}");
        assert!(r.contains("{x9,x10} parent"), "{r}");
    }

    #[test]
    fn sweep_is_flat_at_small_weights() {
        let g = sweep_grid(2.0, &[8, 9], &[0.5]).unwrap();
        assert!((g[0].far - g[1].far).abs() < 0.005);
        assert!(sweep_grid(2.0, &[], &[0.5]).is_err());
    }
}
