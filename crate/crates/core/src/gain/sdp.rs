//! A small log-barrier interior-point solver for
//! `min c'z  s.t.  F_l(z) = F_l0 + sum_a z_a F_la ≻ 0,  g_m(z) > 0`
//! with affine `g_m`. Newton steps on `t c'z - sum ln det F_l - sum ln g_m`,
//! `t` increased geometrically. Meant for problems with a few hundred
//! variables.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Symmetric sparse coefficient: both `(r, c)` and `(c, r)` are listed.
pub(crate) type Triplets = Vec<(usize, usize, f64)>;

pub(crate) struct Lmi {
    pub f0: DMatrix<f64>,
    pub terms: Vec<(usize, Triplets)>,
}

pub(crate) struct Affine {
    pub g0: f64,
    pub coeffs: Vec<(usize, f64)>,
}

pub(crate) struct BarrierProblem {
    pub cost: DVector<f64>,
    pub lmis: Vec<Lmi>,
    pub affine: Vec<Affine>,
}

pub(crate) struct BarrierOptions {
    pub gap: f64,
    pub max_newton: usize,
}

impl Lmi {
    fn eval(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut f = self.f0.clone();
        for (a, trip) in &self.terms {
            for &(r, c, v) in trip {
                f[(r, c)] += z[*a] * v;
            }
        }
        f
    }
}

impl Affine {
    fn eval(&self, z: &DVector<f64>) -> f64 {
        self.g0 + self.coeffs.iter().map(|&(a, v)| v * z[a]).sum::<f64>()
    }
}

impl BarrierProblem {
    fn barrier_dim(&self) -> f64 {
        (self.lmis.iter().map(|l| l.f0.nrows()).sum::<usize>() + self.affine.len()) as f64
    }

    /// `None` outside the strict domain.
    fn value(&self, z: &DVector<f64>, t: f64) -> Option<f64> {
        let mut v = t * self.cost.dot(z);
        for lmi in &self.lmis {
            let chol = Cholesky::new(lmi.eval(z))?;
            v -= 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        }
        for g in &self.affine {
            let x = g.eval(z);
            if !(x > 0.0) {
                return None;
            }
            v -= x.ln();
        }
        Some(v)
    }

    fn newton_system(&self, z: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let m = self.cost.len();
        let mut grad = &self.cost * t;
        let mut hess = DMatrix::zeros(m, m);
        for lmi in &self.lmis {
            let chol: Cholesky<f64, Dyn> = Cholesky::new(lmi.eval(z))?;
            let s = chol.inverse();
            let dim = s.nrows();
            let mut ssf: Vec<(usize, DMatrix<f64>)> = Vec::with_capacity(lmi.terms.len());
            for (a, trip) in &lmi.terms {
                let mut tr = 0.0;
                let mut m_a = DMatrix::zeros(dim, dim);
                for &(r, c, v) in trip {
                    tr += v * s[(c, r)];
                    // S F S accumulates v * S[:, r] S[c, :]
                    m_a.ger(v, &s.column(r), &s.row(c).transpose(), 1.0);
                }
                grad[*a] -= tr;
                ssf.push((*a, m_a));
            }
            for (a, m_a) in &ssf {
                for (b, trip) in &lmi.terms {
                    let h: f64 = trip.iter().map(|&(r, c, v)| v * m_a[(c, r)]).sum();
                    hess[(*a, *b)] += h;
                }
            }
        }
        for g in &self.affine {
            let x = g.eval(z);
            if !(x > 0.0) {
                return None;
            }
            for &(a, va) in &g.coeffs {
                grad[a] -= va / x;
                for &(b, vb) in &g.coeffs {
                    hess[(a, b)] += va * vb / (x * x);
                }
            }
        }
        Some((grad, hess))
    }

    /// Follows the central path from a strictly feasible `z`.
    pub fn solve(&self, mut z: DVector<f64>, opts: &BarrierOptions) -> Result<DVector<f64>> {
        let mut t = 1.0;
        if self.value(&z, t).is_none() {
            return Err(Error::SynthesisFailed("barrier start is not strictly feasible".into()));
        }
        let scale = self.barrier_dim();
        while scale / t > opts.gap {
            for _ in 0..opts.max_newton {
                let (grad, mut hess) = self
                    .newton_system(&z, t)
                    .ok_or(Error::NonConvergence("barrier iterate left the domain"))?;
                let ridge = 1e-12 * hess.diagonal().amax().max(1.0);
                for i in 0..hess.nrows() {
                    hess[(i, i)] += ridge;
                }
                let chol =
                    Cholesky::new(hess).ok_or(Error::NonConvergence("barrier Hessian is not positive definite"))?;
                let dz = -chol.solve(&grad);
                let decrement = -grad.dot(&dz);
                if decrement / 2.0 < 1e-9 {
                    break;
                }
                let f0 = self.value(&z, t).expect("current iterate is feasible");
                let mut s = 1.0;
                loop {
                    let cand = &z + s * &dz;
                    if let Some(f) = self.value(&cand, t) {
                        if f <= f0 - 0.25 * s * decrement {
                            z = cand;
                            break;
                        }
                    }
                    s *= 0.5;
                    if s < 1e-12 {
                        return Err(Error::NonConvergence("barrier line search"));
                    }
                }
            }
            t *= 8.0;
        }
        Ok(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // min x  s.t.  [[x, 1], [1, y]] ≻ 0, y < 4  ->  x -> 1/4
    #[test]
    fn two_by_two_lmi() {
        let lmi = Lmi {
            f0: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            terms: vec![(0, vec![(0, 0, 1.0)]), (1, vec![(1, 1, 1.0)])],
        };
        let p = BarrierProblem {
            cost: DVector::from_vec(vec![1.0, 0.0]),
            lmis: vec![lmi],
            affine: vec![Affine {
                g0: 4.0,
                coeffs: vec![(1, -1.0)],
            }],
        };
        let z = p
            .solve(
                DVector::from_vec(vec![2.0, 2.0]),
                &BarrierOptions {
                    gap: 1e-8,
                    max_newton: 100,
                },
            )
            .unwrap();
        assert!((z[0] - 0.25).abs() < 1e-6, "{z}");
    }

    #[test]
    fn infeasible_start_rejected() {
        let p = BarrierProblem {
            cost: DVector::from_vec(vec![1.0]),
            lmis: vec![],
            affine: vec![Affine {
                g0: -1.0,
                coeffs: vec![(0, 1.0)],
            }],
        };
        let opts = BarrierOptions {
            gap: 1e-6,
            max_newton: 10,
        };
        assert!(p.solve(DVector::from_vec(vec![0.0]), &opts).is_err());
    }
}
