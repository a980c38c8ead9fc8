//! Pair kernel, the exchange integral `G(2,1L;1R,2)`, the exchange admixture
//! and the monopole cancellation check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::grid::Grid;
use crate::spectrum::Orbital;

/// Overlap magnitude above which two orbitals count as non-orthogonal.
const ORTHO_TOL: f64 = 1e-8;

/// Soft-core interaction `e2 / sqrt((x - x')^2 + soft^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeKernel {
    pub e2: f64,
    pub soft: f64,
}

impl ExchangeKernel {
    pub fn new(e2: f64, soft: f64) -> Result<Self> {
        let k = ExchangeKernel { e2, soft };
        k.validate()?;
        Ok(k)
    }

    /// `e2 = 0` is allowed: it switches the interaction off.
    pub fn validate(&self) -> Result<()> {
        if !(self.e2.is_finite() && self.e2 >= 0.0) {
            return Err(Error::InvalidParameter { name: "kernel.e2", reason: format!("must be >= 0, got {}", self.e2) });
        }
        positive("kernel.soft", self.soft)
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        self.e2 / (d * d + self.soft * self.soft).sqrt()
    }

    #[must_use]
    pub fn with_e2(self, e2: f64) -> Self {
        ExchangeKernel { e2, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExchangeIntegralResult {
    pub g: f64,
    pub est_error: f64,
    pub orbitals_used: [String; 3],
}

/// Compensated (Neumaier) running sum.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// `Σ_ij a_i V(x_i, x_j) b_j · spacing²` over the points `idx`, evaluated in a
/// form symmetric under `a <-> b` with compensated summation. Rows run in
/// parallel and are reduced in index order. The second value is the root sum
/// of squared terms, the scale of the rounding in the terms themselves.
fn bilinear(grid: &Grid, idx: &[usize], spacing: f64, a: &[f64], b: &[f64], k: &ExchangeKernel) -> (f64, f64) {
    let rows: Vec<(f64, f64)> = (0..idx.len())
        .into_par_iter()
        .map(|p| {
            let i = idx[p];
            let xi = grid.x(i);
            let diag = a[i] * b[i] * k.value(xi, xi);
            let mut s = Compensated::default();
            s.add(diag);
            let mut sq = diag * diag;
            for &j in &idx[p + 1..] {
                let t = k.value(xi, grid.x(j)) * (a[i] * b[j] + a[j] * b[i]);
                s.add(t);
                sq += t * t;
            }
            (s.value(), sq)
        })
        .collect();
    let mut total = Compensated::default();
    let mut sq = 0.0;
    for (r, q) in rows {
        total.add(r);
        sq += q;
    }
    let w = spacing * spacing;
    (total.value() * w, sq.sqrt() * w)
}

/// First-order change of `G` when every orbital value moves by `ε·max|ψ|`,
/// the normwise precision of computed eigenvectors, summed over the support.
fn input_sensitivity(grid: &Grid, idx: &[usize], orbitals: [&[f64]; 3], a: &[f64], b: &[f64], k: &ExchangeKernel) -> f64 {
    let [p2, p1l, p1r] = orbitals;
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (m2, m1l, m1r) = (peak(p2), peak(p1l), peak(p1r));
    let rows: Vec<f64> = idx
        .par_iter()
        .map(|&i| {
            let xi = grid.x(i);
            let (mut va, mut vb) = (0.0, 0.0);
            for &j in idx {
                let v = k.value(xi, grid.x(j));
                va += v * a[j];
                vb += v * b[j];
            }
            m1l * (p2[i] * vb).abs() + m1r * (p2[i] * va).abs() + m2 * (p1l[i] * vb + p1r[i] * va).abs()
        })
        .collect();
    let h = grid.h();
    f64::EPSILON * rows.iter().sum::<f64>() * h * h
}

/// Points where either density exceeds 1e-16 of its maximum; the dropped
/// terms are below the summation round-off.
fn support(a: &[f64], b: &[f64]) -> Vec<usize> {
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (pa, pb) = (1e-16 * peak(a), 1e-16 * peak(b));
    (0..a.len()).filter(|&i| a[i].abs() > pa || b[i].abs() > pb).collect()
}

/// `G = ∬ ψ2(x) ψ1L(x) V(x, x') ψ1R(x') ψ2(x') dx dx'` by the double trapezoid sum.
///
/// `est_error` is `|G_h - G_2h| / 3` with `G_2h` from every other grid point,
/// floored at the rounding of the terms, `4·ε·(sqrt(Σ terms²) + |G|)`, plus
/// the first-order effect of orbital values known only to `ε·max|ψ|`; the
/// accumulation itself is compensated. Points where both
/// densities are negligible are skipped. It measures the
/// quadrature error for the given grid functions only, not their own
/// discretization error.
pub fn exchange_integral(
    psi2: &Orbital,
    psi1l: &Orbital,
    psi1r: &Orbital,
    kernel: &ExchangeKernel,
) -> Result<ExchangeIntegralResult> {
    let grid = *psi2.grid();
    grid.ensure_same(psi1l.grid())?;
    grid.ensure_same(psi1r.grid())?;
    let a = psi2.psi.zip_with(&psi1l.psi, |p, q| p * q)?.into_values();
    let b = psi1r.psi.zip_with(&psi2.psi, |p, q| p * q)?.into_values();
    let all = support(&a, &b);
    let odd: Vec<usize> = all.iter().copied().filter(|i| i % 2 == 1).collect();
    let (g, g_rms) = bilinear(&grid, &all, grid.h(), &a, &b, kernel);
    let (g2, _) = bilinear(&grid, &odd, 2.0 * grid.h(), &a, &b, kernel);
    let orbitals = [psi2.psi.values(), psi1l.psi.values(), psi1r.psi.values()];
    let roundoff =
        4.0 * f64::EPSILON * (g_rms + g.abs()) + input_sensitivity(&grid, &all, orbitals, &a, &b, kernel);
    Ok(ExchangeIntegralResult {
        g,
        est_error: ((g - g2).abs() / 3.0).max(roundoff),
        orbitals_used: [psi2.label.clone(), psi1l.label.clone(), psi1r.label.clone()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmixtureResult {
    pub b_g1: f64,
    pub g: f64,
    pub detuning: f64,
}

/// `B_G1 = G / (E_1L - E_1R)`.
pub fn admixture_bg1(g: &ExchangeIntegralResult, e1l: f64, e1r: f64) -> Result<AdmixtureResult> {
    let detuning = e1l - e1r;
    if detuning.abs() < 1e3 * f64::EPSILON * e1l.abs().max(e1r.abs()) || detuning == 0.0 {
        return Err(Error::DegenerateDetuning(detuning));
    }
    Ok(AdmixtureResult { b_g1: g.g / detuning, g: g.g, detuning })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipoleResult {
    /// `(e2/l)·<ψ2,ψ1>²`, the `1/l` term of the kernel expansion.
    pub monopole: f64,
    /// `G(2,1;1,2)` with the full-well orbital in both slots.
    pub g: f64,
    pub residual_ratio: f64,
}

/// Leading `1/l` term of the exchange integral between two eigenstates of one
/// Hamiltonian; it carries `<ψ2,ψ1>` and so vanishes with orthogonality.
pub fn multipole_leading(psi2: &Orbital, psi1: &Orbital, kernel: &ExchangeKernel, l: f64) -> Result<MultipoleResult> {
    positive("separation", l)?;
    let overlap = psi2.psi.inner(&psi1.psi)?;
    if overlap.abs() > ORTHO_TOL {
        return Err(Error::NotOrthogonal(overlap));
    }
    let monopole = kernel.e2 / l * overlap * overlap;
    let g = exchange_integral(psi2, psi1, psi1, kernel)?.g;
    Ok(MultipoleResult { monopole, g, residual_ratio: monopole.abs() / g.abs() })
}
