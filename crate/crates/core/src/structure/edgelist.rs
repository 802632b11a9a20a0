//! Text edge lists: one `src dst [weight]` per line, 1-indexed.
//!
//! Blank lines and `#` comments are ignored. The state count is the largest
//! index mentioned.

use super::SystemStructure;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub n: usize,
    /// 0-based edges in file order.
    pub edges: Vec<WeightedEdge>,
}

const MAX_STATES: usize = 1 << 20;

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut edges: Vec<WeightedEdge> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut n = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::parse(
                line_no,
                format!("expected `src dst [weight]`, found {} fields", fields.len()),
            ));
        }
        let src = parse_index(fields[0], line_no)?;
        let dst = parse_index(fields[1], line_no)?;
        let weight = match fields.get(2) {
            Some(w) => {
                let w: f64 = w
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid weight `{w}`")))?;
                if !w.is_finite() {
                    return Err(Error::parse(line_no, "weight must be finite"));
                }
                Some(w)
            }
            None => None,
        };
        if !seen.insert((src, dst)) {
            return Err(Error::parse(line_no, format!("duplicate edge {} {}", src + 1, dst + 1)));
        }
        n = n.max(src + 1).max(dst + 1);
        edges.push(WeightedEdge { src, dst, weight });
    }
    if edges.is_empty() {
        return Err(Error::parse(0, "edge list contains no edges"));
    }
    Ok(EdgeList { n, edges })
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid node index `{tok}`")))?;
    if v == 0 {
        return Err(Error::parse(line, "node indices are 1-based"));
    }
    if v > MAX_STATES {
        return Err(Error::parse(line, format!("node index {v} exceeds {MAX_STATES}")));
    }
    Ok(v - 1)
}

impl EdgeList {
    /// Pattern-only view; weights are dropped and there are no outputs.
    pub fn to_structure(&self) -> SystemStructure {
        SystemStructure::new(
            self.n,
            self.edges.iter().map(|e| (e.src, e.dst)),
            Vec::<Vec<usize>>::new(),
        )
        .expect("parsed indices are in range")
    }

    /// Serializes back to the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            match e.weight {
                Some(w) => out.push_str(&format!("{} {} {w}\n", e.src + 1, e.dst + 1)),
                None => out.push_str(&format!("{} {}\n", e.src + 1, e.dst + 1)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_weights_and_comments() {
        let el = parse_edge_list("# header\n1 3 0.1\n\n2 1   # trailing\n").unwrap();
        assert_eq!(el.n, 3);
        assert_eq!(
            el.edges,
            vec![
                WeightedEdge {
                    src: 0,
                    dst: 2,
                    weight: Some(0.1)
                },
                WeightedEdge {
                    src: 1,
                    dst: 0,
                    weight: None
                },
            ]
        );
        assert_eq!(parse_edge_list(&el.to_text()).unwrap(), el);
    }

    #[test]
    fn errors_name_the_line() {
        for (text, line) in [
            ("1 2\n1 x\n", 2),
            ("1 2\n\n0 1\n", 3),
            ("1\n", 1),
            ("1 2 3 4\n", 1),
            ("1 2 nan\n", 1),
            ("1 2\n1 2\n", 2),
        ] {
            match parse_edge_list(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} -> {other:?}"),
            }
        }
        assert!(parse_edge_list("# nothing\n").is_err());
    }
}
