use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netobs::harness::{
    cmd_analyze, cmd_design, cmd_simulate, cmd_sweep, cmd_verify, fig2_edge_list, parse_scenario, scenario_base,
    PlacementSpec, Scenario,
};
use netobs::structure::parse_edge_list;
use netobs::Error;

#[derive(Parser)]
#[command(
    name = "netobs",
    version,
    about = "Distributed estimation, Q-redundant design and localized fault detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print SCCs, contractions, equivalence classes and structural rank.
    Analyze {
        /// Edge-list file, or `fig2` for the built-in example.
        structure: String,
    },
    /// Place outputs, build the sensor networks and synthesize the gain.
    Design {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Edge-list file or `fig2`; overrides the scenario's structure.
        #[arg(long)]
        structure: Option<String>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run every seed and detector of a scenario and write the report bundle.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// False-alarm rate over the scenario's (T, mu) grid.
    Sweep {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Recheck a report bundle against its manifest.
    Verify {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

enum Failure {
    Lib(Error),
    Other(anyhow::Error),
    Mismatch(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::InsufficientComponentSize { .. } => Some("lower --q or measure a larger component"),
        Error::InfeasibleConnectivity { .. } => Some("add sensors or lower --q"),
        Error::NotObservable => Some("check the placement covers every parent SCC and contraction"),
        Error::SynthesisFailed(_) | Error::NonConvergence(_) => {
            Some("raise `iterations` or relax `epsilon` in the [gain] section")
        }
        _ => None,
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::InsufficientComponentSize { .. } | Error::InfeasibleConnectivity { .. } | Error::NotObservable => 3,
        Error::SynthesisFailed(_) | Error::NonConvergence(_) => 4,
        _ => 1,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn load_scenario(path: Option<&Path>) -> Result<(Scenario, String, PathBuf), Failure> {
    match path {
        Some(p) => {
            let text = read(p)?;
            Ok((parse_scenario(&text)?, text, scenario_base(p)))
        }
        None => Ok((Scenario::default(), String::new(), PathBuf::from("."))),
    }
}

fn structure_source(s: &str) -> netobs::harness::StructureSource {
    match s {
        "fig2" => netobs::harness::StructureSource::Fig2,
        p => netobs::harness::StructureSource::File(PathBuf::from(p)),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { structure } => {
            let edges = if structure == "fig2" {
                fig2_edge_list()
            } else {
                parse_edge_list(&read(Path::new(&structure))?)?
            };
            print!("{}", cmd_analyze(&edges).report());
        }
        Command::Design {
            scenario,
            structure,
            q,
            epsilon,
            seed,
            out_dir,
        } => {
            let (mut sc, _, mut base) = load_scenario(scenario.as_deref())?;
            if let Some(s) = structure {
                sc.structure = structure_source(&s);
                base = std::env::current_dir()?;
            }
            if let Some(q) = q {
                sc.placement = PlacementSpec::Auto { q };
            }
            if let Some(e) = epsilon {
                sc.gain.epsilon = e;
            }
            if let Some(s) = seed {
                sc.network = netobs::harness::NetworkSpec::Synthesized { seed: s };
            }
            let summary = cmd_design(&sc, &base)?;
            print!("{}", summary.report());
            if let Some(dir) = out_dir {
                summary.write(&dir)?;
                println!("wrote {}", dir.display());
            }
        }
        Command::Simulate {
            scenario,
            seed,
            epsilon,
            out_dir,
        } => {
            let mut text = read(&scenario)?;
            parse_scenario(&text)?;
            if seed.is_some() || epsilon.is_some() {
                text = override_scenario(&text, seed, epsilon);
            }
            let summary = cmd_simulate(&text, &scenario_base(&scenario))?;
            summary.write(&out_dir)?;
            let m = &summary.manifest;
            println!("spectral radius {:.6}", m.rho);
            println!("spectral norm b {:.6}", m.b);
            println!("error bound {:.6}", m.bound);
            println!("wrote {} files to {}", summary.files.len(), out_dir.display());
        }
        Command::Sweep { scenario, out_dir } => {
            let (sc, _, _) = load_scenario(scenario.as_deref())?;
            let csv = cmd_sweep(&sc)?;
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("sweep.csv"), csv)?;
                }
                None => print!("{csv}"),
            }
        }
        Command::Verify { out_dir } => {
            let bad = cmd_verify(&out_dir)?;
            if !bad.is_empty() {
                return Err(Failure::Mismatch(bad));
            }
            println!("bundle verified");
        }
    }
    Ok(())
}

/// Drops the scenario's own `seeds` / `epsilon` lines and appends the
/// overrides as trailing sections, so the copied scenario reproduces the run.
fn override_scenario(text: &str, seed: Option<u64>, epsilon: Option<f64>) -> String {
    let mut out = String::new();
    let mut section = String::new();
    for line in text.lines() {
        let t = line.split('#').next().unwrap_or("").trim();
        if let Some(name) = t.strip_prefix('[') {
            section = name.trim_end_matches(']').trim().to_string();
        }
        let key = t.split('=').next().unwrap_or("").trim();
        let dropped = (seed.is_some() && section == "run" && key == "seeds")
            || (epsilon.is_some() && section == "gain" && key == "epsilon");
        if !dropped {
            out.push_str(line);
            out.push('\n');
        }
    }
    if let Some(s) = seed {
        out.push_str(&format!("\n[run]\nseeds = {s}\n"));
    }
    if let Some(e) = epsilon {
        out.push_str(&format!("\n[gain]\nepsilon = {e}\n"));
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if let Some(h) = hint(&e) {
                eprintln!("hint: {h}");
            }
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch(files)) => {
            for f in files {
                eprintln!("mismatch: {f}");
            }
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_existing_keys() {
        let text = "[gain]\nepsilon = 0.2\n[run]\nseeds = 1..3\nhorizon = 5\n";
        let sc = parse_scenario(&override_scenario(text, Some(7), Some(0.1))).unwrap();
        assert_eq!(sc.seeds, vec![7]);
        assert_eq!(sc.gain.epsilon, 0.1);
        assert_eq!(sc.horizon, 5);
        assert_eq!(override_scenario(text, None, None), text);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&parse_scenario("[x]\n").unwrap_err()), 2);
        assert_eq!(exit_code(&Error::NotObservable), 3);
        assert_eq!(exit_code(&Error::SynthesisFailed("x".into())), 4);
        assert_eq!(exit_code(&Error::EmptyWindow), 1);
    }
}
