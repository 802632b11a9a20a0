//! Cone-complementarity linearization. Each outer step minimizes
//! `tr(Y_k X + X_k Y)` subject to
//! `[X Â'; Â Y] ≻ 0`, `[X I; I Y] ≻ 0` and the (linear) isolation
//! inequalities, then re-linearizes at the new `(X, Y)`. Stops at the first
//! iterate with `ρ(Â) < 1`.

use nalgebra::{DMatrix, DVector};

use super::sdp::{Affine, BarrierOptions, BarrierProblem, Lmi, Triplets};
use super::{GainConfig, GainMatrix, Problem};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, spectral_radius};

const MAX_OUTER: usize = 200;

struct Layout {
    dim: usize,
    sym: Vec<(usize, usize)>,
    /// `(sensor i, α-neighbour l, row a)`: `K_i[a, :] += z * c_l`
    gains: Vec<(usize, usize, usize)>,
}

impl Layout {
    fn new(problem: &Problem<'_>) -> Self {
        let dim = problem.phi.nrows();
        let sym = (0..dim).flat_map(|p| (p..dim).map(move |q| (p, q))).collect();
        let mut gains = Vec::new();
        for i in 0..problem.sensors {
            for l in 0..problem.sensors {
                if problem.u[(i, l)] != 0.0 {
                    for a in 0..problem.n {
                        gains.push((i, l, a));
                    }
                }
            }
        }
        Self { dim, sym, gains }
    }

    fn x(&self, v: usize) -> usize {
        v
    }

    fn y(&self, v: usize) -> usize {
        self.sym.len() + v
    }

    fn k(&self, g: usize) -> usize {
        2 * self.sym.len() + g
    }

    fn nvar(&self) -> usize {
        2 * self.sym.len() + self.gains.len()
    }

    fn sym_triplets(&self, v: usize, offset: usize) -> Triplets {
        let (p, q) = self.sym[v];
        if p == q {
            vec![(p + offset, p + offset, 1.0)]
        } else {
            vec![(p + offset, q + offset, 1.0), (q + offset, p + offset, 1.0)]
        }
    }

    fn unpack_sym(&self, z: &DVector<f64>, base: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (v, &(p, q)) in self.sym.iter().enumerate() {
            m[(p, q)] = z[base + v];
            m[(q, p)] = z[base + v];
        }
        m
    }

    fn unpack_gain(&self, problem: &Problem<'_>, z: &DVector<f64>) -> GainMatrix {
        let mut k = GainMatrix::zeros(problem.sensors, problem.n);
        for (g, &(i, l, a)) in self.gains.iter().enumerate() {
            let row = problem.c.row(l) * z[self.k(g)];
            let mut target = k.blocks[i].row_mut(a);
            target += row;
        }
        k
    }
}

fn build(problem: &Problem<'_>, layout: &Layout) -> BarrierProblem {
    let dim = layout.dim;
    let n = problem.n;

    let mut lyap = Lmi {
        f0: DMatrix::zeros(2 * dim, 2 * dim),
        terms: Vec::new(),
    };
    lyap.f0.view_mut((dim, 0), (dim, dim)).copy_from(&problem.phi);
    lyap.f0
        .view_mut((0, dim), (dim, dim))
        .copy_from(&problem.phi.transpose());
    let mut coupling = Lmi {
        f0: DMatrix::zeros(2 * dim, 2 * dim),
        terms: Vec::new(),
    };
    for d in 0..dim {
        coupling.f0[(d, dim + d)] = 1.0;
        coupling.f0[(dim + d, d)] = 1.0;
    }
    for v in 0..layout.sym.len() {
        lyap.terms.push((layout.x(v), layout.sym_triplets(v, 0)));
        lyap.terms.push((layout.y(v), layout.sym_triplets(v, dim)));
        coupling.terms.push((layout.x(v), layout.sym_triplets(v, 0)));
        coupling.terms.push((layout.y(v), layout.sym_triplets(v, dim)));
    }
    // Â row (i n + a) loses z * c_l * D_C(W ⊗ A)[block i]
    for (g, &(i, l, a)) in layout.gains.iter().enumerate() {
        let block = problem.dphi.rows(i * n, n);
        let v = problem.c.row(l) * block;
        let mut trip = Triplets::new();
        for col in 0..dim {
            if v[col] != 0.0 {
                trip.push((dim + i * n + a, col, -v[col]));
                trip.push((col, dim + i * n + a, -v[col]));
            }
        }
        lyap.terms.push((layout.k(g), trip));
    }

    // c_p K_p c_q' as a linear form in the gain variables
    let form = |p: usize, q: usize| -> Vec<(usize, f64)> {
        layout
            .gains
            .iter()
            .enumerate()
            .filter(|(_, &(i, _, _))| i == p)
            .map(|(g, &(_, l, a))| {
                let cq = problem.c.row(q);
                (layout.k(g), problem.c[(p, a)] * problem.c.row(l).dot(&cq))
            })
            .filter(|&(_, v)| v != 0.0)
            .collect()
    };
    let mut affine = Vec::new();
    for pair in &problem.pairs {
        let cross = form(pair.i, pair.j);
        let own = form(pair.j, pair.j);
        for sign in [1.0, -1.0] {
            // eps (1 - c_j K_j c_j') - sign * c_i K_i c_j' > 0
            let mut coeffs: Vec<(usize, f64)> = own.iter().map(|&(a, v)| (a, -problem.eps * v)).collect();
            coeffs.extend(cross.iter().map(|&(a, v)| (a, -sign * v)));
            affine.push(Affine {
                g0: problem.eps,
                coeffs,
            });
        }
    }

    BarrierProblem {
        cost: DVector::zeros(layout.nvar()),
        lmis: vec![lyap, coupling],
        affine,
    }
}

fn linearized_cost(layout: &Layout, xk: &DMatrix<f64>, yk: &DMatrix<f64>) -> DVector<f64> {
    let mut cost = DVector::zeros(layout.nvar());
    for (v, &(p, q)) in layout.sym.iter().enumerate() {
        let w = if p == q { 1.0 } else { 2.0 };
        cost[layout.x(v)] = w * yk[(p, q)];
        cost[layout.y(v)] = w * xk[(p, q)];
    }
    cost
}

pub(super) fn solve(problem: &Problem<'_>, config: &GainConfig) -> Result<GainMatrix> {
    let layout = Layout::new(problem);
    let zero = GainMatrix::zeros(problem.sensors, problem.n);
    if spectral_radius(&problem.a_hat(&zero))? < 1.0 {
        return Ok(zero);
    }
    let mut bp = build(problem, &layout);
    let s = 2.0 * spectral_norm(&problem.phi).max(1.0);
    let mut z = DVector::zeros(layout.nvar());
    for (v, &(p, q)) in layout.sym.iter().enumerate() {
        if p == q {
            z[layout.x(v)] = s;
            z[layout.y(v)] = s;
        }
    }
    let opts = BarrierOptions {
        gap: config.tolerance.max(1e-9),
        max_newton: 200,
    };
    let mut xk = layout.unpack_sym(&z, 0);
    let mut yk = layout.unpack_sym(&z, layout.sym.len());
    for _ in 0..config.max_iterations.min(MAX_OUTER) {
        bp.cost = linearized_cost(&layout, &xk, &yk);
        z = bp.solve(z, &opts)?;
        let k = layout.unpack_gain(problem, &z);
        if spectral_radius(&problem.a_hat(&k))? < 1.0 {
            return Ok(k);
        }
        let x = layout.unpack_sym(&z, 0);
        let y = layout.unpack_sym(&z, layout.sym.len());
        let stalled = ((&x - &xk).norm() + (&y - &yk).norm()) < config.tolerance;
        xk = x;
        yk = y;
        if stalled {
            break;
        }
    }
    Err(Error::SynthesisFailed(
        "cone complementarity did not reach a stabilizing gain".into(),
    ))
}
