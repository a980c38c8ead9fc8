//! Nonlocal exchange operator, the inhomogeneous solve `(H - E)δψ = K` and the
//! under-barrier tail of the exchange-induced correction.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::ExchangeKernel;
use crate::fit::{loglog_fit, FitResult};
use crate::grid::GridFunction;
use crate::spectrum::{Hamiltonian, Orbital};
use crate::tridiag::TridiagLu;

/// Relative distance to the spectrum below which a shifted solve is refused.
const SINGULAR_REL: f64 = 1e-8;
/// Fraction of the gap to the next level by which the first-order solve is
/// shifted below the orbital energy.
const RESOLVENT_SHIFT: f64 = 1e-6;

/// Occupied orbital `ψ_q` and the pair kernel defining `K`.
#[derive(Debug, Clone)]
pub struct ExchangeSource {
    pub psi_q: Orbital,
    pub kernel: ExchangeKernel,
}

/// `K(x) = ψ_q(x) ∫ ψ_q(x') V(x, x') ψ_b(x') dx'`. No direct (Hartree) term.
pub fn apply_exchange(src: &ExchangeSource, psi_b: &GridFunction) -> Result<GridFunction> {
    let q = &src.psi_q.psi;
    q.grid().ensure_same(psi_b.grid())?;
    let g = *q.grid();
    let rho: Vec<f64> = q.values().iter().zip(psi_b.values()).map(|(a, b)| a * b).collect();
    let k = src.kernel;
    let values: Vec<f64> = (0..g.n)
        .into_par_iter()
        .map(|i| {
            let xi = g.x(i);
            let field: f64 = rho.iter().enumerate().map(|(j, r)| k.value(xi, g.x(j)) * r).sum();
            q.values()[i] * field * g.h()
        })
        .collect();
    GridFunction::new(g, values)
}

/// Solves `(H - e)·δψ = rhs` by pivoted tridiagonal elimination, refusing
/// energies within `1e-8·max(|e|, |E_k|)` of an eigenvalue.
pub fn solve_inhomogeneous(h: &Hamiltonian, e: f64, rhs: &GridFunction) -> Result<GridFunction> {
    h.grid().ensure_same(rhs.grid())?;
    let n = h.grid().n;
    let k = h.sturm_count(e);
    let neighbours = [k.checked_sub(1), (k < n).then_some(k)];
    for eig in neighbours.into_iter().flatten().map(|j| h.eigenvalue(j)) {
        let eig = eig?;
        let distance = (e - eig).abs();
        if distance <= SINGULAR_REL * e.abs().max(eig.abs()) {
            return Err(Error::NearSingular { energy: e, eigenvalue: eig, distance });
        }
    }
    let mut x = rhs.values().to_vec();
    TridiagLu::factor(h.diag(), h.offdiag(), e).solve_in_place(&mut x);
    GridFunction::new(*rhs.grid(), x)
}

/// First-order exchange correction to the eigenstate `psi1` of `h`:
/// `(H - E)δψ = K - ψ1<ψ1,K>` at `E` just below `E1`, then `ψ1` projected out.
pub fn first_order_correction(h: &Hamiltonian, psi1: &Orbital, src: &ExchangeSource) -> Result<GridFunction> {
    let kpsi = apply_exchange(src, &psi1.psi)?;
    let rhs = kpsi.axpy(-psi1.psi.inner(&kpsi)?, &psi1.psi)?;
    let index = h.sturm_count(psi1.energy);
    let gap = h.eigenvalue(index + 1)? - psi1.energy;
    let e = psi1.energy - RESOLVENT_SHIFT * gap;
    let delta = solve_inhomogeneous(h, e, &rhs)?;
    delta.axpy(-psi1.psi.inner(&delta)?, &psi1.psi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HfTailResult {
    #[serde(skip)]
    pub delta_psi: GridFunction,
    /// Distances from the origin bounding the window, nearest first.
    pub window: (f64, f64),
    /// `(x, δψ1(x)·x²/ψ2(x))` with `x` the distance from the origin.
    pub ratio_series: Vec<(f64, f64)>,
    pub flatness: f64,
    /// Fit of `ln|δψ1/ψ2|` against `ln x`.
    pub fit: FitResult,
}

/// Grid indices of the forbidden window outward (leftward) of `origin`: from
/// two spacings past the turning point `U = e` to where `|ψ2|` falls to 1e-6
/// of its maximum. Ordered by increasing distance.
pub fn tail_window(psi2: &Orbital, u: &GridFunction, e: f64, origin: f64) -> Result<Vec<usize>> {
    let g = u.grid();
    u.grid().ensure_same(psi2.grid())?;
    let start = g.nearest_index(origin);
    let turning = (0..=start).rev().find(|&i| u.values()[i] > e).ok_or(Error::EmptyWindow)?;
    let first = match turning.checked_sub(2) {
        Some(i) => i,
        None => return Err(Error::EmptyWindow),
    };
    let floor = 1e-6 * psi2.psi.sup_norm();
    let tiny = 1e3 * f64::EPSILON;
    let idx: Vec<usize> = (0..=first)
        .rev()
        .take_while(|&i| u.values()[i] > e && psi2.psi.values()[i].abs() >= floor.max(tiny))
        .collect();
    if idx.len() < 3 {
        return Err(Error::EmptyWindow);
    }
    Ok(idx)
}

/// Compares `δψ1` with `ψ2/x²` over the forbidden window left of `origin`.
pub fn tail_analysis(delta_psi: &GridFunction, psi2: &Orbital, u: &GridFunction, e: f64, origin: f64) -> Result<HfTailResult> {
    delta_psi.grid().ensure_same(u.grid())?;
    let g = u.grid();
    let idx = tail_window(psi2, u, e, origin)?;
    let dist = |i: usize| (origin - g.x(i)).abs();
    let ratio_series: Vec<(f64, f64)> = idx
        .iter()
        .map(|&i| {
            let x = dist(i);
            (x, delta_psi.values()[i] * x * x / psi2.psi.values()[i])
        })
        .collect();
    let mags = ratio_series.iter().map(|(_, r)| r.abs());
    let (lo, hi) = mags.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let xs: Vec<f64> = ratio_series.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| delta_psi.values()[i] / psi2.psi.values()[i]).collect();
    let fit = loglog_fit(&xs, &ys)?;
    Ok(HfTailResult {
        delta_psi: delta_psi.clone(),
        window: (xs[0], xs[xs.len() - 1]),
        ratio_series,
        flatness: hi / lo,
        fit,
    })
}

/// `ln|δψ1| - ln|ψ1|` at the window points, nearest first.
pub fn excess_over_orbital(delta_psi: &GridFunction, psi1: &Orbital, window: &[usize]) -> Vec<f64> {
    window
        .iter()
        .map(|&i| delta_psi.values()[i].abs().ln() - psi1.psi.values()[i].abs().ln())
        .collect()
}
