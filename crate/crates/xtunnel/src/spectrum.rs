//! Discrete Hamiltonian, its lowest eigenpairs, localized well orbitals and
//! tunneling admixtures.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::potentials::{barrier_top, sample_potential, single_well_spec, PhysicsParams, PotentialSpec, Side};
use crate::tridiag::SymTridiag;

/// Components below this fraction of the peak are ignored by the sign rule.
const SIGN_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    params: PhysicsParams,
}

pub fn assemble_hamiltonian(u: &GridFunction, params: &PhysicsParams) -> Hamiltonian {
    let grid = *u.grid();
    let h = grid.h();
    let kin = params.hbar * params.hbar / (params.mass * h * h);
    Hamiltonian {
        grid,
        diag: u.values().iter().map(|v| kin + v).collect(),
        offdiag: vec![-0.5 * kin; grid.n - 1],
        params: *params,
    }
}

impl Hamiltonian {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    pub fn tridiag(&self) -> SymTridiag<'_> {
        SymTridiag::new(&self.diag, &self.offdiag)
    }

    pub fn norm_inf(&self) -> f64 {
        self.tridiag().norm()
    }

    /// Number of eigenvalues below `e`.
    pub fn sturm_count(&self, e: f64) -> usize {
        self.tridiag().sturm_count(e)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn apply_fn(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(f.grid())?;
        Ok(GridFunction::from_parts(self.grid, self.apply(f.values())))
    }

    /// `<f|H|f>` for a grid function.
    pub fn expectation(&self, f: &GridFunction) -> Result<f64> {
        self.apply_fn(f)?.inner(f)
    }

    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        self.check_range(&(k..k + 1))?;
        Ok(self.tridiag().eigenvalue(k))
    }

    /// Eigenpairs with indices in `range`.
    pub fn solve_range(&self, range: Range<usize>) -> Result<Spectrum> {
        self.check_range(&range)?;
        let t = self.tridiag();
        let start = range.start;
        let values = t.eigenvalues(range);
        let vectors = t.eigenvectors(&values);
        let pairs = values
            .into_iter()
            .zip(vectors)
            .enumerate()
            .map(|(j, (e, v))| Orbital::from_unit_vector(self.grid, v, e, format!("eigen-{}", start + j)))
            .collect();
        Ok(Spectrum { pairs, first_index: start })
    }

    /// Eigenpairs whose eigenvalues lie in `[lo, hi)`.
    pub fn solve_window(&self, lo: f64, hi: f64) -> Result<Spectrum> {
        let a = self.sturm_count(lo);
        let b = self.sturm_count(hi).max(a);
        if a == b {
            return Ok(Spectrum { pairs: Vec::new(), first_index: a });
        }
        self.solve_range(a..b)
    }

    /// Eigenstate nearest `e` among a few neighbours of its Sturm index,
    /// optionally restricted to one parity (+1 even, -1 odd).
    ///
    /// Members of a doublet whose splitting is below round-off come out as
    /// arbitrary mixtures; those are projected onto the requested parity.
    pub fn nearest_state(&self, e: f64, parity: Option<i8>) -> Result<Orbital> {
        let n = self.grid.n;
        let k = self.sturm_count(e);
        let range = k.saturating_sub(4)..(k + 4).min(n);
        let mut spec = self.solve_range(range)?;
        if let Some(p) = parity {
            spec.pairs = spec.pairs.into_iter().filter_map(|o| o.with_parity(p)).collect();
        }
        spec.nearest(e, |_| true)
            .cloned()
            .ok_or_else(|| Error::Parity(format!("no state of parity {parity:?} near E = {e}")))
    }

    fn check_range(&self, range: &Range<usize>) -> Result<()> {
        if range.start >= range.end || range.end > self.grid.n {
            return Err(Error::EigenCount { requested: range.end, order: self.grid.n });
        }
        Ok(())
    }
}

pub fn solve_lowest(h: &Hamiltonian, k: usize) -> Result<Spectrum> {
    if k == 0 {
        return Err(Error::EigenCount { requested: 0, order: h.grid.n });
    }
    h.solve_range(0..k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbital {
    pub psi: GridFunction,
    pub energy: f64,
    pub label: String,
}

impl Orbital {
    fn from_unit_vector(grid: Grid, mut v: Vec<f64>, energy: f64, label: String) -> Orbital {
        let scale = 1.0 / grid.h().sqrt();
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let first = v.iter().find(|x| x.abs() > SIGN_FLOOR * peak).copied().unwrap_or(1.0);
        let s = if first < 0.0 { -scale } else { scale };
        v.iter_mut().for_each(|x| *x *= s);
        Orbital { psi: GridFunction::from_parts(grid, v), energy, label }
    }

    /// Normalizes `psi` under `integrate`.
    pub fn normalized(psi: GridFunction, energy: f64, label: impl Into<String>) -> Orbital {
        let n = psi.norm();
        Orbital { psi: psi.scaled(1.0 / n), energy, label: label.into() }
    }

    #[must_use]
    pub fn relabeled(mut self, label: impl Into<String>) -> Orbital {
        self.label = label.into();
        self
    }

    pub fn grid(&self) -> &Grid {
        self.psi.grid()
    }

    pub fn sign_changes(&self) -> usize {
        let peak = self.psi.sup_norm();
        let mut last = 0.0f64;
        let mut changes = 0;
        for &v in self.psi.values() {
            if v.abs() <= SIGN_FLOOR * peak {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                changes += 1;
            }
            last = v;
        }
        changes
    }

    /// The orbital if it has parity `p`; its normalized projection onto that
    /// parity if it has none and at least a quarter of its weight there.
    fn with_parity(self, p: i8) -> Option<Orbital> {
        match self.parity() {
            Some(q) if q == p => return Some(self),
            Some(_) => return None,
            None => {}
        }
        let v = self.psi.values();
        let s = f64::from(p);
        let proj: Vec<f64> = v.iter().zip(v.iter().rev()).map(|(a, b)| 0.5 * (a + s * b)).collect();
        let weight = proj.iter().map(|x| x * x).sum::<f64>() / v.iter().map(|x| x * x).sum::<f64>();
        if weight < 0.25 {
            return None;
        }
        let norm = proj.iter().map(|x| x * x).sum::<f64>().sqrt();
        let unit = proj.into_iter().map(|x| x / norm).collect();
        Some(Orbital::from_unit_vector(*self.grid(), unit, self.energy, self.label))
    }

    /// +1 even, -1 odd, `None` when neither within 1e-6 (symmetric grids only).
    pub fn parity(&self) -> Option<i8> {
        let r = self.psi.reflection_overlap().ok()?;
        if (r - 1.0).abs() < 1e-6 {
            Some(1)
        } else if (r + 1.0).abs() < 1e-6 {
            Some(-1)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub pairs: Vec<Orbital>,
    /// Eigen-index of `pairs[0]`.
    pub first_index: usize,
}

impl Spectrum {
    pub fn energies(&self) -> Vec<f64> {
        self.pairs.iter().map(|o| o.energy).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pair whose energy is nearest `e`, restricted by `keep`.
    pub fn nearest(&self, e: f64, keep: impl Fn(&Orbital) -> bool) -> Option<&Orbital> {
        self.pairs
            .iter()
            .filter(|o| keep(o))
            .min_by(|a, b| (a.energy - e).abs().total_cmp(&(b.energy - e).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunnelingResult {
    pub t1: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    /// Unset for a symmetric well.
    pub b_t1: Option<f64>,
}

/// Left/right combinations of the lowest doublet of a symmetric double well.
pub fn localize_symmetric(spec: &Spectrum) -> Result<(Orbital, Orbital, TunnelingResult)> {
    if spec.pairs.len() < 2 || spec.first_index != 0 {
        return Err(Error::Parity("need the two lowest states".into()));
    }
    let (s0, s1) = (&spec.pairs[0], &spec.pairs[1]);
    match (s0.parity(), s1.parity()) {
        (Some(1), Some(-1)) => {}
        (p0, p1) => {
            return Err(Error::Parity(format!(
                "lowest states have parities {p0:?}, {p1:?}; expected even then odd"
            )))
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let left = s0.psi.zip_with(&s1.psi, |a, b| r * (a + b))?;
    let right = s0.psi.zip_with(&s1.psi, |a, b| r * (a - b))?;
    let mean = 0.5 * (s0.energy + s1.energy);
    let t = TunnelingResult {
        t1: 0.5 * (s1.energy - s0.energy),
        e_plus: s0.energy,
        e_minus: s1.energy,
        b_t1: None,
    };
    Ok((
        Orbital { psi: left, energy: mean, label: "L".into() },
        Orbital { psi: right, energy: mean, label: "R".into() },
        t,
    ))
}

#[derive(Debug, Clone)]
pub struct ReferenceOrbitals {
    pub psi_1l: Orbital,
    pub psi_1r: Orbital,
    pub psi_2: Orbital,
    pub e_1l: f64,
    pub e_1r: f64,
    pub barrier_top: f64,
}

/// How the delocalized orbital is picked from the full double-well spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Psi2Choice {
    /// Highest eigenstate below the barrier top.
    #[default]
    BelowBarrierTop,
    Index(usize),
}

pub fn reference_orbitals(
    spec: &PotentialSpec,
    params: &PhysicsParams,
    grid: &Grid,
    choice: Psi2Choice,
) -> Result<ReferenceOrbitals> {
    let well = spec.double_well()?;
    let u = sample_potential(spec, params, grid);
    let (_, top) = barrier_top(&u, (well.left_center(), well.right_center()))?;
    let single = |side: Side, label: &'static str| -> Result<Orbital> {
        let s = single_well_spec(spec, side)?;
        let h = assemble_hamiltonian(&sample_potential(&s, params, grid), params);
        let o = solve_lowest(&h, 1)?.pairs.remove(0);
        if o.energy >= top {
            return Err(Error::NoBoundState(if side == Side::L { "left" } else { "right" }));
        }
        Ok(o.relabeled(label))
    };
    let psi_1l = single(Side::L, "1L")?;
    let psi_1r = single(Side::R, "1R")?;
    let psi_2 = delocalized_orbital(&assemble_hamiltonian(&u, params), top, choice)?;
    Ok(ReferenceOrbitals {
        e_1l: psi_1l.energy,
        e_1r: psi_1r.energy,
        psi_1l,
        psi_1r,
        psi_2,
        barrier_top: top,
    })
}

/// The orbital `ψ2` of a full double-well Hamiltonian whose barrier top is `top`.
pub fn delocalized_orbital(h: &Hamiltonian, top: f64, choice: Psi2Choice) -> Result<Orbital> {
    let index = match choice {
        Psi2Choice::Index(i) => i,
        Psi2Choice::BelowBarrierTop => match h.sturm_count(top) {
            0 => return Err(Error::NoBoundState("double")),
            c => c - 1,
        },
    };
    Ok(h.solve_range(index..index + 1)?.pairs.remove(0).relabeled("2"))
}

/// `<psi_1R, ground>`, the measured tunneling admixture.
pub fn admixture_projection(ground: &Orbital, psi_1r: &Orbital) -> Result<f64> {
    psi_1r.psi.inner(&ground.psi)
}

/// Hopping matrix element `<psi_1R| U_L |psi_1L>` between isolated-well orbitals.
pub fn hopping_integral(spec: &PotentialSpec, params: &PhysicsParams, refs: &ReferenceOrbitals) -> Result<f64> {
    let left = single_well_spec(spec, Side::L)?;
    let ul = sample_potential(&left, params, refs.psi_1l.grid());
    let ul_psi = ul.zip_with(&refs.psi_1l.psi, |a, b| a * b)?;
    refs.psi_1r.psi.inner(&ul_psi)
}

/// Component on the right orbital of the lower eigenvector of `[[e_1L, t], [t, e_1R]]`,
/// with the left component set to 1.
pub fn two_level_admixture(t: f64, e_1l: f64, e_1r: f64) -> f64 {
    let mean = 0.5 * (e_1l + e_1r);
    let d = 0.5 * (e_1r - e_1l);
    let lower = mean - (d * d + t * t).sqrt();
    t / (lower - e_1r)
}
