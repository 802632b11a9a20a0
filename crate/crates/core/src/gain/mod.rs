//! Estimator gain: assembly of `D_C` and `D̄_C`, the closed-loop error matrix
//! `Â = (I - K D_C)(W ⊗ A)`, the steady-state error bound and the synthesis of
//! a block-diagonal `K` under the fault-isolation constraint
//! `|c_i K_i c_j'| <= eps |1 - c_j K_j c_j'|` for α-neighbours `j != i`.

mod ccl;
mod descent;
mod io;
mod sdp;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{block_diag, spectral_norm, spectral_radius};
use crate::network::check_distributed_observability;

pub use io::{parse_gain, GainFile, GAIN_HEADER};

/// Slack allowed when certifying the isolation constraint.
pub const ISOLATION_SLACK: f64 = 1e-9;

fn check_uc(u: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<()> {
    if !u.is_square() || u.nrows() != c.nrows() {
        return Err(Error::dims(format!(
            "U is {}x{} but C has {} rows",
            u.nrows(),
            u.ncols(),
            c.nrows()
        )));
    }
    Ok(())
}

/// `block i = sum_j U[i][j] c_j' c_j`, with `c_j` the rows of `c`.
pub fn assemble_dc(u: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_uc(u, c)?;
    let n = c.ncols();
    let blocks: Vec<DMatrix<f64>> = (0..u.nrows())
        .map(|i| {
            let mut b = DMatrix::zeros(n, n);
            for j in 0..u.ncols() {
                if u[(i, j)] != 0.0 {
                    let cj = c.row(j);
                    b += u[(i, j)] * cj.transpose() * cj;
                }
            }
            b
        })
        .collect();
    Ok(block_diag(&blocks))
}

/// `(U ⊗ 1_n) ∘ (1_N ⊗ C')`: entry `((i, a), j) = U[i][j] C[j][a]`.
pub fn assemble_dc_bar(u: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_uc(u, c)?;
    let (big_n, n) = (u.nrows(), c.ncols());
    Ok(DMatrix::from_fn(big_n * n, big_n, |r, j| u[(r / n, j)] * c[(j, r % n)]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    pub blocks: Vec<DMatrix<f64>>,
}

impl GainMatrix {
    pub fn zeros(sensors: usize, n: usize) -> Self {
        Self {
            blocks: vec![DMatrix::zeros(n, n); sensors],
        }
    }

    pub fn sensors(&self) -> usize {
        self.blocks.len()
    }

    pub fn states(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.nrows())
    }

    pub fn assembled(&self) -> DMatrix<f64> {
        block_diag(&self.blocks)
    }

    /// Keeps the blocks not listed in `removed`.
    pub fn without(&self, removed: &[usize]) -> Result<Self> {
        let keep = crate::network::kept_indices(self.sensors(), removed)?;
        Ok(Self {
            blocks: keep.iter().map(|&i| self.blocks[i].clone()).collect(),
        })
    }
}

/// Dimension checks shared by the closed-loop routines.
fn check_system(
    k: Option<&GainMatrix>,
    a: &DMatrix<f64>,
    w: &DMatrix<f64>,
    u: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<()> {
    let n = a.nrows();
    if !a.is_square() || !w.is_square() || c.ncols() != n || c.nrows() != w.nrows() {
        return Err(Error::dims(format!(
            "A {}x{}, W {}x{}, C {}x{}",
            a.nrows(),
            a.ncols(),
            w.nrows(),
            w.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    check_uc(u, c)?;
    if let Some(k) = k {
        if k.sensors() != w.nrows() || k.blocks.iter().any(|b| b.shape() != (n, n)) {
            return Err(Error::dims("gain blocks do not match the network"));
        }
    }
    Ok(())
}

/// `Â = (I - K D_C)(W ⊗ A)`.
pub fn closed_loop(
    k: &GainMatrix,
    a: &DMatrix<f64>,
    w: &DMatrix<f64>,
    u: &DMatrix<f64>,
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_system(Some(k), a, w, u, c)?;
    let phi = w.kronecker(a);
    let dc = assemble_dc(u, c)?;
    let dim = phi.nrows();
    Ok((DMatrix::identity(dim, dim) - k.assembled() * dc) * phi)
}

/// `diag[sum_j U[i][j] sigma_zeta[j] c_j' c_j]`.
pub fn sigma_zeta_bar(u: &DMatrix<f64>, c: &DMatrix<f64>, sigma_zeta: &[f64]) -> Result<DMatrix<f64>> {
    check_uc(u, c)?;
    if sigma_zeta.len() != c.nrows() {
        return Err(Error::dims("one measurement variance per sensor expected"));
    }
    let weighted = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * sigma_zeta[j]);
    assemble_dc(&weighted, c)
}

/// Constants of the steady-state error-covariance bound
/// `(a1 N |Σν| + a2 |Σ̄ζ|) / (1 - b^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    pub b: f64,
    pub a1: f64,
    pub a2: f64,
    pub sigma_nu: f64,
    pub sigma_zeta_bar: f64,
    /// `f64::INFINITY` when `b >= 1`.
    pub bound: f64,
}

impl ErrorBound {
    pub fn is_finite(&self) -> bool {
        self.bound.is_finite()
    }
}

pub fn error_bound(
    k: &GainMatrix,
    a: &DMatrix<f64>,
    w: &DMatrix<f64>,
    u: &DMatrix<f64>,
    c: &DMatrix<f64>,
    sigma_nu: &DMatrix<f64>,
    sigma_zeta: &[f64],
) -> Result<ErrorBound> {
    check_system(Some(k), a, w, u, c)?;
    if sigma_nu.shape() != a.shape() {
        return Err(Error::dims("process-noise covariance must be n x n"));
    }
    let a_hat = closed_loop(k, a, w, u, c)?;
    let kk = k.assembled();
    let dim = kk.nrows();
    let dc = assemble_dc(u, c)?;
    let b = spectral_norm(&a_hat);
    let a1 = spectral_norm(&(DMatrix::identity(dim, dim) - &kk * dc)).powi(2);
    let a2 = spectral_norm(&kk).powi(2);
    let snu = spectral_norm(sigma_nu);
    let szb = spectral_norm(&sigma_zeta_bar(u, c, sigma_zeta)?);
    let big_n = w.nrows() as f64;
    let bound = if b < 1.0 {
        (a1 * big_n * snu + a2 * szb) / (1.0 - b * b)
    } else {
        f64::INFINITY
    };
    Ok(ErrorBound {
        b,
        a1,
        a2,
        sigma_nu: snu,
        sigma_zeta_bar: szb,
        bound,
    })
}

/// One isolation pair `(i, j)`: sensor `i` receives α-sensor `j`'s output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsolationPair {
    pub i: usize,
    pub j: usize,
}

pub fn isolation_pairs(u: &DMatrix<f64>) -> Vec<IsolationPair> {
    let n = u.nrows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| IsolationPair { i, j }))
        .filter(|p| p.i != p.j && u[(p.i, p.j)] != 0.0)
        .collect()
}

/// `c_i K_i c_j'`.
pub(crate) fn coupling(k: &GainMatrix, c: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    (c.row(i) * &k.blocks[i] * c.row(j).transpose())[(0, 0)]
}

/// Largest `|c_i K_i c_j'| - eps |1 - c_j K_j c_j'|` over the isolation pairs;
/// nonpositive when the constraint holds. `-inf` when there are no pairs.
pub fn isolation_violation(k: &GainMatrix, u: &DMatrix<f64>, c: &DMatrix<f64>, eps: f64) -> f64 {
    isolation_pairs(u)
        .iter()
        .map(|p| coupling(k, c, p.i, p.j).abs() - eps * (1.0 - coupling(k, c, p.j, p.j)).abs())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Cone complementarity for small problems, descent otherwise.
    #[default]
    Auto,
    ConeComplementarity,
    Descent,
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "ccl" | "cone-complementarity" => Ok(Self::ConeComplementarity),
            "descent" => Ok(Self::Descent),
            _ => Err(Error::DomainError(format!("unknown solver `{s}`"))),
        }
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Auto => "auto",
            Self::ConeComplementarity => "ccl",
            Self::Descent => "descent",
        })
    }
}

/// Largest `nN` for which `Solver::Auto` picks cone complementarity.
pub const AUTO_CCL_MAX_DIM: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainConfig {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub solver: Solver,
    /// The descent stops once `|Â|_2` is at or below this value.
    pub target_norm: f64,
}

impl Default for GainConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.14,
            max_iterations: 5000,
            tolerance: 1e-7,
            solver: Solver::Auto,
            target_norm: 0.995,
        }
    }
}

impl GainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::DomainError(format!(
                "epsilon {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        if !(self.target_norm > 0.0 && self.target_norm < 1.0) {
            return Err(Error::DomainError(format!(
                "target norm {} must lie in (0, 1)",
                self.target_norm
            )));
        }
        if self.max_iterations == 0 || !(self.tolerance > 0.0) {
            return Err(Error::DomainError("iterations and tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Problem data shared by both solvers.
pub(crate) struct Problem<'a> {
    pub c: &'a DMatrix<f64>,
    pub u: &'a DMatrix<f64>,
    pub phi: DMatrix<f64>,
    /// `D_C (W ⊗ A)`
    pub dphi: DMatrix<f64>,
    pub n: usize,
    pub sensors: usize,
    pub pairs: Vec<IsolationPair>,
    pub eps: f64,
}

impl<'a> Problem<'a> {
    fn new(a: &DMatrix<f64>, w: &DMatrix<f64>, u: &'a DMatrix<f64>, c: &'a DMatrix<f64>, eps: f64) -> Result<Self> {
        let phi = w.kronecker(a);
        let dc = assemble_dc(u, c)?;
        let dphi = &dc * &phi;
        Ok(Self {
            c,
            u,
            phi,
            dphi,
            n: a.nrows(),
            sensors: w.nrows(),
            pairs: isolation_pairs(u),
            eps,
        })
    }

    pub fn a_hat(&self, k: &GainMatrix) -> DMatrix<f64> {
        &self.phi - k.assembled() * &self.dphi
    }

    /// Enforces the isolation constraint by shifting `c_i K_i c_j'` onto its
    /// bound along `c_i' c_j`. Repeats to settle couplings between pairs.
    pub fn project(&self, k: &mut GainMatrix) {
        for _ in 0..50 {
            let mut moved = false;
            for p in &self.pairs {
                let ci = self.c.row(p.i);
                let cj = self.c.row(p.j);
                let limit = self.eps * (1.0 - coupling(k, self.c, p.j, p.j)).abs() * (1.0 - 1e-12);
                let val = coupling(k, self.c, p.i, p.j);
                if val.abs() > limit {
                    let scale = ci.norm_squared() * cj.norm_squared();
                    if scale == 0.0 {
                        continue;
                    }
                    let delta = (val - val.signum() * limit) / scale;
                    k.blocks[p.i] -= delta * ci.transpose() * cj;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }
}

/// Synthesizes a block-diagonal gain with `ρ(Â) < 1` that satisfies the
/// isolation constraint. The descent solver additionally aims for
/// `|Â|_2 <= target_norm` so the steady-state bound is finite.
pub fn synthesize_gain(
    a: &DMatrix<f64>,
    w: &DMatrix<f64>,
    u: &DMatrix<f64>,
    c: &DMatrix<f64>,
    config: &GainConfig,
) -> Result<GainMatrix> {
    config.validate()?;
    check_system(None, a, w, u, c)?;
    if !check_distributed_observability(a, c, w, u)? {
        return Err(Error::NotObservable);
    }
    let problem = Problem::new(a, w, u, c, config.epsilon)?;
    let solver = match config.solver {
        Solver::Auto if problem.phi.nrows() <= AUTO_CCL_MAX_DIM => Solver::ConeComplementarity,
        Solver::Auto => Solver::Descent,
        s => s,
    };
    let k = match solver {
        Solver::ConeComplementarity => ccl::solve(&problem, config)?,
        _ => descent::solve(&problem, config)?,
    };
    certify(&problem, &k)?;
    Ok(k)
}

fn certify(problem: &Problem<'_>, k: &GainMatrix) -> Result<()> {
    let rho = spectral_radius(&problem.a_hat(k))?;
    if !(rho < 1.0) {
        return Err(Error::SynthesisFailed(format!(
            "spectral radius {rho:.6} is not below 1"
        )));
    }
    let v = isolation_violation(k, problem.u, problem.c, problem.eps);
    if v > ISOLATION_SLACK {
        return Err(Error::SynthesisFailed(format!(
            "isolation constraint violated by {v:.3e}"
        )));
    }
    Ok(())
}
