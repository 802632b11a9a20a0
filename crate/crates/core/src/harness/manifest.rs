//! Run manifest: the design figures behind a report bundle and the SHA-256 of
//! every file in it.

use std::fmt::Write;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_HEADER: &str = "netobs-manifest 1";
const MAX_ENTRIES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub scenario_sha256: String,
    /// Directory relative scenario paths were resolved against.
    pub base: PathBuf,
    pub seeds: Vec<u64>,
    pub calibration_seeds: Vec<u64>,
    pub rho: f64,
    pub b: f64,
    pub bound: f64,
    pub a1: f64,
    pub a2: f64,
    pub sigma_r: Vec<f64>,
    pub empirical: Option<Vec<f64>>,
    /// `(file name, sha256)` in bundle order.
    pub files: Vec<(String, String)>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

fn join<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MANIFEST_HEADER}").unwrap();
        writeln!(out, "scenario_sha256 {}", self.scenario_sha256).unwrap();
        writeln!(out, "base {}", self.base.display()).unwrap();
        writeln!(out, "seeds {}", join(&self.seeds)).unwrap();
        writeln!(out, "calibration_seeds {}", join(&self.calibration_seeds)).unwrap();
        writeln!(out, "rho {:?}", self.rho).unwrap();
        writeln!(out, "b {:?}", self.b).unwrap();
        writeln!(out, "bound {:?}", self.bound).unwrap();
        writeln!(out, "a1 {:?}", self.a1).unwrap();
        writeln!(out, "a2 {:?}", self.a2).unwrap();
        writeln!(out, "sigma_r {}", join(&self.sigma_r)).unwrap();
        match &self.empirical {
            Some(e) => writeln!(out, "empirical_sigma_r {}", join(e)).unwrap(),
            None => writeln!(out, "empirical_sigma_r none").unwrap(),
        }
        for (name, hash) in &self.files {
            writeln!(out, "file {name} {hash}").unwrap();
        }
        out
    }
}

fn is_hash(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// Bundle file names are plain names inside the bundle directory.
pub(crate) fn is_plain_name(s: &str) -> bool {
    !s.is_empty()
        && s != "."
        && s != ".."
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-'))
}

fn values<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = v.split_whitespace().collect();
    if items.len() > MAX_ENTRIES {
        return Err(Error::parse(line, format!("too many values for `{key}`")));
    }
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| Error::parse(line, format!("`{key}`: bad value `{s}`")))
        })
        .collect()
}

fn real(line: usize, key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| !x.is_nan())
        .ok_or_else(|| Error::parse(line, format!("`{key}`: bad number `{v}`")))
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == MANIFEST_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected `{MANIFEST_HEADER}`"))),
    }
    let mut scenario = None;
    let mut base = None;
    let mut seeds = None;
    let mut calibration = None;
    let (mut rho, mut b, mut bound, mut a1, mut a2) = (None, None, None, None, None);
    let mut sigma_r = None;
    let mut empirical = None;
    let mut files = Vec::new();
    for (ln, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let (key, rest) = raw.split_once(' ').unwrap_or((raw, ""));
        let dup = |seen: bool| {
            if seen {
                Err(Error::parse(ln, format!("duplicate `{key}`")))
            } else {
                Ok(())
            }
        };
        match key {
            "scenario_sha256" => {
                dup(scenario.is_some())?;
                if !is_hash(rest.trim()) {
                    return Err(Error::parse(ln, "scenario_sha256 must be 64 lowercase hex digits"));
                }
                scenario = Some(rest.trim().to_string());
            }
            "base" => {
                dup(base.is_some())?;
                base = Some(PathBuf::from(rest));
            }
            "seeds" => {
                dup(seeds.is_some())?;
                seeds = Some(values::<u64>(ln, key, rest)?);
            }
            "calibration_seeds" => {
                dup(calibration.is_some())?;
                calibration = Some(values::<u64>(ln, key, rest)?);
            }
            "rho" | "b" | "bound" | "a1" | "a2" => {
                let slot = match key {
                    "rho" => &mut rho,
                    "b" => &mut b,
                    "bound" => &mut bound,
                    "a1" => &mut a1,
                    _ => &mut a2,
                };
                dup(slot.is_some())?;
                *slot = Some(real(ln, key, rest)?);
            }
            "sigma_r" => {
                dup(sigma_r.is_some())?;
                sigma_r = Some(values::<f64>(ln, key, rest)?);
            }
            "empirical_sigma_r" => {
                dup(empirical.is_some())?;
                empirical = Some(if rest.trim() == "none" {
                    None
                } else {
                    Some(values::<f64>(ln, key, rest)?)
                });
            }
            "file" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                match f.as_slice() {
                    [name, hash] if is_plain_name(name) && is_hash(hash) => {
                        if files.len() >= MAX_ENTRIES {
                            return Err(Error::parse(ln, "too many files"));
                        }
                        files.push((name.to_string(), hash.to_string()));
                    }
                    _ => return Err(Error::parse(ln, "expected `file <name> <sha256>`")),
                }
            }
            _ => return Err(Error::parse(ln, format!("unknown key `{key}`"))),
        }
    }
    let missing = |what: &str| Error::parse(0, format!("manifest lacks `{what}`"));
    Ok(Manifest {
        scenario_sha256: scenario.ok_or_else(|| missing("scenario_sha256"))?,
        base: base.ok_or_else(|| missing("base"))?,
        seeds: seeds.ok_or_else(|| missing("seeds"))?,
        calibration_seeds: calibration.unwrap_or_default(),
        rho: rho.ok_or_else(|| missing("rho"))?,
        b: b.ok_or_else(|| missing("b"))?,
        bound: bound.ok_or_else(|| missing("bound"))?,
        a1: a1.ok_or_else(|| missing("a1"))?,
        a2: a2.ok_or_else(|| missing("a2"))?,
        sigma_r: sigma_r.ok_or_else(|| missing("sigma_r"))?,
        empirical: empirical.flatten(),
        files,
    })
}
