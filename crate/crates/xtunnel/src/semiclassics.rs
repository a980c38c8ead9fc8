//! Turning points and the under-barrier action `S = ∫ sqrt(2m(U - E)) dx`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::potentials::{barrier_top, well_bottom, PhysicsParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurningPoints {
    pub a: f64,
    pub b: f64,
    pub energy: f64,
}

impl TurningPoints {
    /// Coincident points at the barrier top, where the action vanishes.
    pub fn at_top(x: f64, energy: f64) -> Self {
        TurningPoints { a: x, b: x, energy }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WkbResult {
    pub action: f64,
    /// `-S/ħ`, kept separately so the exponent is exact.
    pub ln_t: f64,
    pub t_estimate: f64,
    pub turning: TurningPoints,
}

/// Roots of `U - E` on `bracket`, linearly interpolated inside the cells where
/// the sign changes. Requires exactly two changes with `U > E` between them.
pub fn find_turning_points(u: &GridFunction, e: f64, bracket: (f64, f64)) -> Result<TurningPoints> {
    let g = u.grid();
    let (lo, hi) = bracket;
    if !(hi > lo) {
        return Err(Error::EmptyInterval(lo, hi));
    }
    let idx: Vec<usize> = (0..g.n).filter(|&i| (lo..=hi).contains(&g.x(i))).collect();
    if idx.len() < 2 {
        return Err(Error::EmptyInterval(lo, hi));
    }
    let f = |i: usize| u.values()[i] - e;
    let mut roots = Vec::new();
    let mut rising = Vec::new();
    for w in idx.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        if (fa > 0.0) != (fb > 0.0) {
            let t = fa / (fa - fb);
            roots.push(g.x(w[0]) + t * g.h());
            rising.push(fb > 0.0);
        }
    }
    if roots.len() != 2 {
        return Err(Error::TurningPointCount(roots.len()));
    }
    if !rising[0] {
        return Err(Error::InvalidParameter {
            name: "bracket",
            reason: "U - E is negative between its sign changes, not a barrier".into(),
        });
    }
    Ok(TurningPoints { a: roots[0], b: roots[1], energy: e })
}

/// Ends of the instanton path of a double well: the two well minima, at the
/// energy of the shallower one. `centers` are rough well positions.
pub fn instanton_endpoints(u: &GridFunction, centers: (f64, f64)) -> Result<TurningPoints> {
    let g = u.grid();
    let (x_top, _) = barrier_top(u, centers)?;
    let (xa, ua) = well_bottom(u, (g.x(0), x_top))?;
    let (xb, ub) = well_bottom(u, (x_top, g.x(g.n - 1)))?;
    Ok(TurningPoints { a: xa, b: xb, energy: ua.max(ub) })
}

/// Linear interpolation of a grid function, clamped to the outermost points.
fn interpolate(u: &GridFunction, x: f64) -> f64 {
    let g = u.grid();
    let v = u.values();
    let s = (x - g.x(0)) / g.h();
    if s <= 0.0 {
        return v[0];
    }
    let i = s.floor() as usize;
    if i + 1 >= g.n {
        return v[g.n - 1];
    }
    let t = s - i as f64;
    v[i] + t * (v[i + 1] - v[i])
}

/// `∫ sqrt(2m·max(f, 0))` over a cell of length `dx` on which `f` is linear
/// between `fa` and `fb`: `(2/3)·sqrt(2m)·dx·(fb^1.5 - fa^1.5)/(fb - fa)`.
fn linear_cell(fa: f64, fb: f64, dx: f64, mass: f64) -> f64 {
    let (fa, fb) = (fa.max(0.0), fb.max(0.0));
    let c = (2.0 * mass).sqrt();
    if (fb - fa).abs() <= 1e-12 * fa.max(fb) {
        return c * dx * fa.max(fb).sqrt();
    }
    c * dx * (2.0 / 3.0) * (fb.powf(1.5) - fa.powf(1.5)) / (fb - fa)
}

/// Under-barrier action between the turning points.
///
/// Interior grid points carry the trapezoid rule. Each end cell, from a turning
/// point to the first grid point inside, uses a linear model of `U - E` through
/// the interpolated value at the turning point and the grid value, integrated
/// exactly; with `U(a) = E` this is `(2/3)·sqrt(2m(U_i - E))·(x_i - a)`.
pub fn action_integral(u: &GridFunction, e: f64, tp: &TurningPoints, params: &PhysicsParams) -> WkbResult {
    let g = u.grid();
    let m = params.mass;
    let f = |i: usize| u.values()[i] - e;
    let inside: Vec<usize> = (0..g.n).filter(|&i| g.x(i) > tp.a && g.x(i) < tp.b).collect();
    let action = match (inside.first(), inside.last()) {
        _ if tp.b <= tp.a => 0.0,
        (Some(&i0), Some(&i1)) => {
            let p = |i: usize| (2.0 * m * f(i).max(0.0)).sqrt();
            let interior: f64 = (i0..i1).map(|i| 0.5 * (p(i) + p(i + 1)) * g.h()).sum();
            let left = linear_cell(interpolate(u, tp.a) - e, f(i0), g.x(i0) - tp.a, m);
            let right = linear_cell(interpolate(u, tp.b) - e, f(i1), tp.b - g.x(i1), m);
            interior + left + right
        }
        // both points inside one cell
        _ => linear_cell(interpolate(u, tp.a) - e, interpolate(u, 0.5 * (tp.a + tp.b)) - e, tp.b - tp.a, m),
    };
    let ln_t = -action / params.hbar;
    WkbResult { action, ln_t, t_estimate: ln_t.exp(), turning: *tp }
}

/// Action through the barrier on `bracket` at energy `e`; zero at or above the top.
pub fn barrier_action(u: &GridFunction, e: f64, bracket: (f64, f64), params: &PhysicsParams) -> Result<WkbResult> {
    let (x_top, top) = barrier_top(u, bracket)?;
    if e >= top {
        return Ok(action_integral(u, e, &TurningPoints::at_top(x_top, e), params));
    }
    let tp = find_turning_points(u, e, bracket)?;
    Ok(action_integral(u, e, &tp, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_cell_reduces_to_endpoint_formula() {
        let v = linear_cell(0.0, 2.0, 0.5, 1.0);
        assert!((v - (2.0 / 3.0) * 2.0 * 0.5).abs() < 1e-15);
        assert!((linear_cell(1.0, 1.0, 2.0, 0.5) - 2.0).abs() < 1e-15);
    }
}
