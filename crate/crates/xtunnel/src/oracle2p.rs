//! Exact ground state of two same-spin fermions on a coarse grid, and the
//! one-body reduced density matrix used to read off right-well occupations.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::ExchangeKernel;
use crate::grid::{Grid, GridFunction};
use crate::potentials::PhysicsParams;
use crate::spectrum::{assemble_hamiltonian, Hamiltonian, Orbital};
use crate::tridiag::{dot, lowest_pair, normalize};

/// Bound on the product-space dimension `n²`.
pub const MAX_PRODUCT_DIM: usize = 16384;
/// Lanczos steps per restart cycle.
const KRYLOV_DIM: usize = 160;
/// Natural occupations closer than this (relative) form one cluster.
const CLUSTER_REL: f64 = 1e-8;
/// Natural orbitals with smaller occupation are ignored.
const OCC_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct TwoParticleProblem {
    pub grid: Grid,
    pub u: GridFunction,
    pub kernel: ExchangeKernel,
    pub params: PhysicsParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleState {
    /// Amplitudes over pairs `i < j` in row-major order, unit Euclidean norm.
    pub amp: Vec<f64>,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Matrix-free two-fermion Hamiltonian over the antisymmetric pair basis.
#[derive(Debug, Clone)]
pub struct PairOperator {
    one_body: Hamiltonian,
    interaction: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    n: usize,
}

pub fn assemble_2p(p: &TwoParticleProblem) -> Result<PairOperator> {
    p.grid.ensure_same(p.u.grid())?;
    let n = p.grid.n;
    if n * n > MAX_PRODUCT_DIM {
        return Err(Error::DimensionExceeded { dim: n * n, max: MAX_PRODUCT_DIM });
    }
    let one_body = assemble_hamiltonian(&p.u, &p.params);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let interaction = pairs.iter().map(|&(i, j)| p.kernel.value(p.grid.x(i), p.grid.x(j))).collect();
    Ok(PairOperator { one_body, interaction, pairs, n })
}

impl PairOperator {
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn one_body(&self) -> &Hamiltonian {
        &self.one_body
    }

    /// Position of the pair `(i, j)`, `i < j`, in the amplitude vector.
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Antisymmetric amplitude `A(i, j)` of a pair vector.
    pub fn amplitude(&self, x: &[f64], i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => x[self.pair_index(i, j)],
            std::cmp::Ordering::Greater => -x[self.pair_index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.one_body.diag();
        let o = self.one_body.offdiag();
        let n = self.n;
        self.pairs
            .par_iter()
            .zip(self.interaction.par_iter())
            .map(|(&(i, j), v)| {
                let mut s = (d[i] + d[j] + v) * self.amplitude(x, i, j);
                if i > 0 {
                    s += o[i - 1] * self.amplitude(x, i - 1, j);
                }
                if i + 1 < n {
                    s += o[i] * self.amplitude(x, i + 1, j);
                }
                if j > 0 {
                    s += o[j - 1] * self.amplitude(x, i, j - 1);
                }
                if j + 1 < n {
                    s += o[j] * self.amplitude(x, i, j + 1);
                }
                s
            })
            .collect()
    }

    /// Full antisymmetric `n×n` amplitude matrix.
    pub fn full_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.amplitude(x, i, j))
    }

    /// Dense matrix of the operator, for small checks.
    pub fn dense(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        let mut e = vec![0.0; m];
        for c in 0..m {
            e[c] = 1.0;
            let col = self.apply(&e);
            e[c] = 0.0;
            out.column_mut(c).copy_from_slice(&col);
        }
        out
    }

    /// Pair amplitudes of the Slater determinant of two orbitals.
    pub fn slater(&self, a: &GridFunction, b: &GridFunction) -> Vec<f64> {
        let s = a.grid().h();
        let (a, b) = (a.values(), b.values());
        self.pairs.iter().map(|&(i, j)| s * (a[i] * b[j] - a[j] * b[i])).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-9, max_iterations: 20_000 }
    }
}

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization,
/// seeded with the normalized all-ones vector.
pub fn solve_ground_2p(op: &PairOperator, opts: LanczosOptions) -> Result<TwoParticleState> {
    let dim = op.dim();
    let mut v = vec![1.0; dim];
    normalize(&mut v);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iterations {
        let steps = KRYLOV_DIM.min(dim).min(opts.max_iterations - iterations).max(1);
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        for k in 0..steps {
            let mut w = op.apply(&basis[k]);
            iterations += 1;
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = dot(&w, &w).sqrt();
            if k + 1 == steps || b <= 1e-14 * a.abs().max(1.0) {
                break;
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }
        let m = alpha.len();
        let (_, s) = lowest_pair(&alpha, &beta[..m - 1]);
        let mut y = vec![0.0; dim];
        for (q, c) in basis.iter().zip(&s) {
            y.iter_mut().zip(q).for_each(|(a, b)| *a += c * b);
        }
        normalize(&mut y);
        let hy = op.apply(&y);
        let energy = dot(&hy, &y);
        residual = hy.iter().zip(&y).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>().sqrt();
        v = y;
        if residual <= opts.tol {
            return Ok(TwoParticleState { amp: v, energy, residual, iterations });
        }
    }
    Err(Error::NoConvergence { iterations, residual })
}

/// Lowest eigenpair of the dense operator.
pub fn dense_ground(op: &PairOperator) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(op.dense());
    let k = eig.eigenvalues.imin();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
}

/// One-body reduced density matrix `A·Aᵀ` in the Euclidean grid basis (trace 2).
pub fn reduced_density(op: &PairOperator, state: &TwoParticleState) -> DMatrix<f64> {
    let a = op.full_matrix(&state.amp);
    &a * a.transpose()
}

#[derive(Debug, Clone, Serialize)]
pub struct NaturalOrbital {
    pub occupation: f64,
    /// `<φ|h|φ>` after diagonalizing `h` inside a degenerate occupation cluster.
    pub energy: f64,
    #[serde(skip)]
    pub orbital: GridFunction,
}

/// Natural orbitals above the occupation floor, by decreasing occupation.
pub fn natural_orbitals(op: &PairOperator, state: &TwoParticleState) -> Vec<NaturalOrbital> {
    let grid = *op.one_body.grid();
    let eig = SymmetricEigen::new(reduced_density(op, state));
    let mut order: Vec<usize> = (0..op.n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let inv_sqrt_h = 1.0 / grid.h().sqrt();
    let mut out = Vec::new();
    let mut start = 0;
    while start < order.len() && eig.eigenvalues[order[start]] > OCC_FLOOR {
        let w0 = eig.eigenvalues[order[start]];
        let mut end = start + 1;
        while end < order.len() && (eig.eigenvalues[order[end]] - w0).abs() < CLUSTER_REL * w0.max(1.0) {
            end += 1;
        }
        let cols: Vec<Vec<f64>> = order[start..end].iter().map(|&c| eig.eigenvectors.column(c).iter().copied().collect()).collect();
        let size = cols.len();
        let hs = DMatrix::from_fn(size, size, |a, b| dot(&cols[a], &op.one_body.apply(&cols[b])));
        let sub = SymmetricEigen::new(hs);
        let mut sub_order: Vec<usize> = (0..size).collect();
        sub_order.sort_by(|&a, &b| sub.eigenvalues[a].total_cmp(&sub.eigenvalues[b]).then(a.cmp(&b)));
        for &k in &sub_order {
            let mut v = vec![0.0; op.n];
            for (c, col) in cols.iter().enumerate() {
                let coef = sub.eigenvectors[(c, k)];
                v.iter_mut().zip(col).for_each(|(a, b)| *a += coef * b);
            }
            let occupation = order[start..end].iter().map(|&c| eig.eigenvalues[c]).sum::<f64>() / size as f64;
            out.push(NaturalOrbital {
                occupation,
                energy: sub.eigenvalues[k],
                orbital: GridFunction::from_parts(grid, v.into_iter().map(|x| x * inv_sqrt_h).collect()),
            });
        }
        start = end;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct OccupationResult {
    /// `Σ n_k |<ψ_1R, φ_k>|²` over natural orbitals with energy inside the band.
    pub occupation: f64,
    /// Density integrated over `x > divider`.
    pub right_density: f64,
    pub natural: Vec<NaturalOrbital>,
}

/// Occupation of the right-well reference orbital carried by the low-energy
/// band of natural orbitals, plus the plain right-side density.
pub fn right_well_occupation(
    op: &PairOperator,
    state: &TwoParticleState,
    psi_1r: &Orbital,
    divider: f64,
    band: (f64, f64),
) -> Result<OccupationResult> {
    let grid = *op.one_body.grid();
    grid.ensure_same(psi_1r.grid())?;
    if !(divider > grid.x(0) && divider < grid.x(grid.n - 1)) {
        return Err(Error::InvalidParameter { name: "divider", reason: format!("{divider} is outside the grid") });
    }
    let rdm = reduced_density(op, state);
    let right_density = (0..grid.n).filter(|&i| grid.x(i) > divider).map(|i| rdm[(i, i)]).sum();
    let natural = natural_orbitals(op, state);
    let mut occupation = 0.0;
    for no in natural.iter().filter(|no| no.energy > band.0 && no.energy < band.1) {
        let c = psi_1r.psi.inner(&no.orbital)?;
        occupation += no.occupation * c * c;
    }
    Ok(OccupationResult { occupation, right_density, natural })
}
