#![allow(dead_code)]

use std::path::Path;

use nalgebra::DMatrix;
use netobs::harness::{design, parse_scenario, Design, Scenario, REFERENCE_SCENARIO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn reference() -> (Scenario, Design) {
    let sc = parse_scenario(REFERENCE_SCENARIO).unwrap();
    let d = design(&sc, Path::new(".")).unwrap();
    (sc, d)
}

pub fn scenario_design(text: &str) -> (Scenario, Design) {
    let sc = parse_scenario(text).unwrap();
    let d = design(&sc, Path::new(".")).unwrap();
    (sc, d)
}

/// Rank by Gaussian elimination with partial pivoting.
pub fn elimination_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1.0);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (piv, val) = (rank..rows)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((rank, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if val <= tol * scale {
            continue;
        }
        a.swap_rows(rank, piv);
        for r in rank + 1..rows {
            let f = a[(r, col)] / a[(rank, col)];
            for c in col..cols {
                let v = a[(rank, c)];
                a[(r, c)] -= f * v;
            }
        }
        rank += 1;
    }
    rank
}

/// Kalman observability matrix `[C; CA; ...; CA^{n-1}]`.
pub fn observability_matrix(a: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let m = c.nrows();
    let mut out = DMatrix::zeros(m * n, n);
    let mut block = c.clone();
    for k in 0..n {
        out.view_mut((k * m, 0), (m, n)).copy_from(&block);
        block = &block * a;
    }
    out
}

pub fn random_digraph(n: usize, p: f64, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && rng.random_bool(p)).collect())
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn reach(adj: &[Vec<usize>], removed: &[bool], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !removed[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

fn strongly_connected(adj: &[Vec<usize>], removed: &[bool]) -> bool {
    let n = adj.len();
    let rev: Vec<Vec<usize>> = (0..n)
        .map(|v| (0..n).filter(|&u| adj[u].contains(&v)).collect())
        .collect();
    let Some(start) = (0..n).find(|&v| !removed[v]) else {
        return true;
    };
    let (f, b) = (reach(adj, removed, start), reach(&rev, removed, start));
    (0..n).all(|v| removed[v] || (f[v] && b[v]))
}

/// Smallest node set whose removal leaves a digraph that is not strongly
/// connected, by enumerating subsets; `n - 1` for complete digraphs.
pub fn brute_separator(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    for k in 0..n.saturating_sub(1) {
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let removed: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
            if !strongly_connected(adj, &removed) {
                return k;
            }
        }
    }
    n.saturating_sub(1)
}
