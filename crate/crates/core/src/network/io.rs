use std::fmt::Write;

use nalgebra::DMatrix;

use super::SensorNetwork;
use crate::error::{Error, Result};

pub const NETWORK_HEADER: &str = "netobs-network 1";
const MAX_SENSORS: usize = 4096;

impl SensorNetwork {
    /// Text form: header, `sensors N`, `alpha i j ...` (1-based), then the
    /// `W` rows and the `U` rows, each after a line holding only `W` / `U`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let n = self.len();
        writeln!(out, "{NETWORK_HEADER}").unwrap();
        writeln!(out, "sensors {n}").unwrap();
        let alpha: Vec<String> = self.alpha.iter().map(|a| (a + 1).to_string()).collect();
        writeln!(out, "alpha {}", alpha.join(" ").trim_end()).unwrap();
        writeln!(out, "W").unwrap();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:?}", self.w[(i, j)])).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        writeln!(out, "U").unwrap();
        for i in 0..n {
            let row: Vec<&str> = (0..n).map(|j| if self.u[(i, j)] == 1.0 { "1" } else { "0" }).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }
}

pub fn parse_network(text: &str) -> Result<SensorNetwork> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("unexpected end of input, expected {what}")))
    };

    let (ln, header) = next("header")?;
    if header != NETWORK_HEADER {
        return Err(Error::parse(ln, format!("expected `{NETWORK_HEADER}`")));
    }
    let (ln, sensors) = next("sensor count")?;
    let n = match sensors.split_whitespace().collect::<Vec<_>>()[..] {
        ["sensors", v] => v
            .parse::<usize>()
            .ok()
            .filter(|&n| (1..=MAX_SENSORS).contains(&n))
            .ok_or_else(|| Error::parse(ln, format!("bad sensor count `{v}`")))?,
        _ => return Err(Error::parse(ln, "expected `sensors N`")),
    };
    let (ln, alpha_line) = next("alpha list")?;
    let mut fields = alpha_line.split_whitespace();
    if fields.next() != Some("alpha") {
        return Err(Error::parse(ln, "expected `alpha` list"));
    }
    let alpha = fields
        .map(|f| match f.parse::<usize>() {
            Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
            _ => Err(Error::parse(ln, format!("bad alpha sensor `{f}`"))),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut read_matrix = |tag: &str, binary: bool| -> Result<DMatrix<f64>> {
        let (ln, t) = next(tag)?;
        if t != tag {
            return Err(Error::parse(ln, format!("expected `{tag}`")));
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let (ln, row) = next("matrix row")?;
            let vals: Vec<&str> = row.split_whitespace().collect();
            if vals.len() != n {
                return Err(Error::parse(ln, format!("expected {n} entries, found {}", vals.len())));
            }
            for (j, v) in vals.iter().enumerate() {
                let x = if binary {
                    match *v {
                        "0" => 0.0,
                        "1" => 1.0,
                        _ => return Err(Error::parse(ln, format!("`{v}` is not 0 or 1"))),
                    }
                } else {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::parse(ln, format!("bad number `{v}`")))?
                };
                m[(i, j)] = x;
            }
        }
        Ok(m)
    };
    let w = read_matrix("W", false)?;
    let u = read_matrix("U", true)?;
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(ln, "trailing content"));
    }
    SensorNetwork::new(w, u, alpha)
}
