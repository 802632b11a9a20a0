use std::fmt::Write;

use nalgebra::DMatrix;

use super::GainMatrix;
use crate::error::{Error, Result};

pub const GAIN_HEADER: &str = "netobs-gain 1";
const MAX_DIM: usize = 4096;

/// A gain with the design figures it was exported with.
#[derive(Debug, Clone, PartialEq)]
pub struct GainFile {
    pub epsilon: f64,
    /// Achieved spectral radius of `Â`.
    pub rho: f64,
    pub gain: GainMatrix,
}

impl GainFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{GAIN_HEADER}").unwrap();
        writeln!(out, "sensors {}", self.gain.sensors()).unwrap();
        writeln!(out, "states {}", self.gain.states()).unwrap();
        writeln!(out, "epsilon {:?}", self.epsilon).unwrap();
        writeln!(out, "rho {:?}", self.rho).unwrap();
        for (i, b) in self.gain.blocks.iter().enumerate() {
            writeln!(out, "block {}", i + 1).unwrap();
            for r in 0..b.nrows() {
                let row: Vec<String> = b.row(r).iter().map(|x| format!("{x:?}")).collect();
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
        }
        out
    }
}

fn keyed<'a>(line: (usize, &'a str), key: &str) -> Result<&'a str> {
    let (ln, text) = line;
    match text.split_once(char::is_whitespace) {
        Some((k, v)) if k == key => Ok(v.trim()),
        _ => Err(Error::parse(ln, format!("expected `{key} <value>`"))),
    }
}

fn number(ln: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::parse(ln, format!("bad number `{s}`")))
}

fn count(ln: usize, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .ok()
        .filter(|&v| (1..=MAX_DIM).contains(&v))
        .ok_or_else(|| Error::parse(ln, format!("bad count `{s}`")))
}

pub fn parse_gain(text: &str) -> Result<GainFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = || lines.next().ok_or_else(|| Error::parse(0, "unexpected end of input"));

    let (ln, header) = next()?;
    if header != GAIN_HEADER {
        return Err(Error::parse(ln, format!("expected `{GAIN_HEADER}`")));
    }
    let l = next()?;
    let sensors = count(l.0, keyed(l, "sensors")?)?;
    let l = next()?;
    let states = count(l.0, keyed(l, "states")?)?;
    if sensors.saturating_mul(states) > MAX_DIM {
        return Err(Error::parse(l.0, "gain too large"));
    }
    let l = next()?;
    let epsilon = number(l.0, keyed(l, "epsilon")?)?;
    let l = next()?;
    let rho = number(l.0, keyed(l, "rho")?)?;
    let mut blocks = Vec::with_capacity(sensors);
    for i in 0..sensors {
        let l = next()?;
        if count(l.0, keyed(l, "block")?)? != i + 1 {
            return Err(Error::parse(l.0, format!("expected block {}", i + 1)));
        }
        let mut b = DMatrix::zeros(states, states);
        for r in 0..states {
            let (ln, row) = next()?;
            let vals: Vec<&str> = row.split_whitespace().collect();
            if vals.len() != states {
                return Err(Error::parse(
                    ln,
                    format!("expected {states} entries, found {}", vals.len()),
                ));
            }
            for (c, v) in vals.iter().enumerate() {
                b[(r, c)] = number(ln, v)?;
            }
        }
        blocks.push(b);
    }
    if let Ok((ln, _)) = next() {
        return Err(Error::parse(ln, "trailing content"));
    }
    Ok(GainFile {
        epsilon,
        rho,
        gain: GainMatrix { blocks },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = GainFile {
            epsilon: 0.14,
            rho: 0.93,
            gain: GainMatrix {
                blocks: vec![
                    DMatrix::from_row_slice(2, 2, &[0.1, -0.2, 1e-17, 3.0]),
                    DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.25, -1.0 / 3.0]),
                ],
            },
        };
        assert_eq!(parse_gain(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn bad_row_names_line() {
        let text = "netobs-gain 1\nsensors 1\nstates 2\nepsilon 0.1\nrho 0.5\nblock 1\n1 2\n3\n";
        assert!(matches!(parse_gain(text), Err(Error::Parse { line: 8, .. })));
        assert!(matches!(
            parse_gain("netobs-gain 1\nsensors 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
