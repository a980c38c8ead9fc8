//! Model configuration, parameter sweeps and the fits that turn scaling
//! statements into numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::exchange::{admixture_bg1, exchange_integral, multipole_leading, ExchangeKernel};
use crate::fit::{loglog_fit, semilog_inverse_fit, FitResult};
use crate::grid::{Grid, GridFunction};
use crate::hartree_fock::{excess_over_orbital, first_order_correction, tail_analysis, tail_window, ExchangeSource, HfTailResult};
use crate::oracle2p::{assemble_2p, right_well_occupation, solve_ground_2p, LanczosOptions, TwoParticleProblem};
use crate::potentials::{barrier_top, sample_potential, well_bottom, PhysicsParams, PotentialSpec};
use crate::semiclassics::{action_integral, barrier_action, instanton_endpoints, WkbResult};
use crate::spectrum::{
    admixture_projection, assemble_hamiltonian, delocalized_orbital, hopping_integral, reference_orbitals,
    solve_lowest, two_level_admixture, Hamiltonian, Psi2Choice, ReferenceOrbitals,
};

pub const SPLITTING_R2: f64 = 0.999;
pub const DISTANCE_R2: f64 = 0.99;
pub const CASE1_R2: f64 = 0.98;
pub const CASE2_R2: f64 = 0.999;
pub const CASE3_LOGLOG_R2: f64 = 0.99;
/// Allowed range of the tunneling exponent `S/ħ`.
pub const EXPONENT_RANGE: (f64, f64) = (5.0, 25.0);
/// A doublet needs the gap to the third state to exceed its splitting this many times.
pub const DOUBLET_RATIO: f64 = 10.0;
pub const MIN_POINTS_PER_CORE: f64 = 8.0;
pub const MIN_SCAN_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Resolution {
    Points(usize),
    Spacing(f64),
    /// Spacing `ħ / k`.
    PerHbar(f64),
    /// Spacing `core / k`, for the soft Coulomb well.
    PerCore(f64),
}

/// Box symmetric about the origin plus a resolution rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRule {
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: Resolution,
}

fn default_resolution() -> Resolution {
    Resolution::Points(2001)
}

impl Default for GridRule {
    fn default() -> Self {
        GridRule { half_width: None, resolution: default_resolution() }
    }
}

impl GridRule {
    pub fn resolve(&self, default_half: f64, hbar: f64, core: Option<f64>) -> Result<Grid> {
        let half = self.half_width.unwrap_or(default_half);
        positive("grid.half_width", half)?;
        let spacing = |s: f64| Grid::with_spacing(-half, half, s);
        match self.resolution {
            Resolution::Points(n) => Grid::symmetric(half, n),
            Resolution::Spacing(s) => spacing(s),
            Resolution::PerHbar(k) => {
                positive("grid.resolution.per_hbar", k)?;
                spacing(hbar / k)
            }
            Resolution::PerCore(k) => {
                positive("grid.resolution.per_core", k)?;
                let core = core.ok_or(Error::InvalidParameter {
                    name: "grid.resolution.per_core",
                    reason: "the potential has no core length".into(),
                })?;
                spacing(core / k)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelRule {
    /// Soft-core length; defaults to the well width (Gaussian wells), the core
    /// length (soft Coulomb) or 1.
    #[serde(default)]
    pub soft: Option<f64>,
}

/// Everything one pipeline run needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub physics: PhysicsParams,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grid: GridRule,
    #[serde(default)]
    pub kernel: KernelRule,
    /// Eigenstate index of `ψ2`; by default the highest state below the barrier top.
    #[serde(default)]
    pub psi2_index: Option<usize>,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        self.physics.validate()?;
        self.potential.validate()?;
        if let Some(s) = self.kernel.soft {
            positive("kernel.soft", s)?;
        }
        Ok(())
    }

    /// Half-width of the default box.
    pub fn default_half_width(&self) -> f64 {
        let p = &self.physics;
        match self.potential {
            PotentialSpec::DoubleGaussianWell { .. } => {
                self.potential.double_well().map(|w| w.default_half_width()).unwrap_or(1.0)
            }
            PotentialSpec::GaussianWell { width, center, .. } => center.abs() + 8.0 * width,
            PotentialSpec::Harmonic { omega, center } => center.abs() + 12.0 * (p.hbar / (p.mass * omega)).sqrt(),
            PotentialSpec::SoftCoulombWell { center, .. } => center.abs() + 12.0,
            PotentialSpec::InvertedParabolaBarrier { u0, k } => 2.0 * (2.0 * u0.abs() / k).sqrt() + 1.0,
            PotentialSpec::Zero => 1.0,
        }
    }

    fn core(&self) -> Option<f64> {
        match self.potential {
            PotentialSpec::SoftCoulombWell { core, .. } => Some(core),
            _ => None,
        }
    }

    pub fn resolve_grid(&self) -> Result<Grid> {
        self.grid.resolve(self.default_half_width(), self.physics.hbar, self.core())
    }

    pub fn resolve_kernel(&self) -> Result<ExchangeKernel> {
        let soft = self.kernel.soft.unwrap_or(match self.potential {
            PotentialSpec::DoubleGaussianWell { width, .. } | PotentialSpec::GaussianWell { width, .. } => width,
            PotentialSpec::SoftCoulombWell { core, .. } => core,
            _ => 1.0,
        });
        ExchangeKernel::new(self.physics.e2, soft)
    }

    pub fn psi2_choice(&self) -> Psi2Choice {
        self.psi2_index.map_or(Psi2Choice::BelowBarrierTop, Psi2Choice::Index)
    }

    pub fn hamiltonian(&self) -> Result<(Hamiltonian, GridFunction)> {
        self.validate()?;
        let grid = self.resolve_grid()?;
        let u = sample_potential(&self.potential, &self.physics, &grid);
        Ok((assemble_hamiltonian(&u, &self.physics), u))
    }

    /// The same model with one parameter replaced.
    pub fn at(&self, parameter: ScanParameter, value: f64) -> Result<ModelConfig> {
        let mut m = *self;
        match parameter {
            ScanParameter::Hbar => m.physics.hbar = value,
            ScanParameter::E2 => m.physics.e2 = value,
            ScanParameter::Separation => m.potential = self.potential.double_well()?.with_separation(value).into(),
            ScanParameter::Core => match &mut m.potential {
                PotentialSpec::SoftCoulombWell { core, .. } => *core = value,
                other => return Err(Error::WrongVariant { expected: "soft_coulomb_well", got: other.name() }),
            },
        }
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    Hbar,
    Separation,
    E2,
    Core,
}

impl ScanParameter {
    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::Hbar => "hbar",
            ScanParameter::Separation => "l",
            ScanParameter::E2 => "e2",
            ScanParameter::Core => "core",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    T1,
    #[serde(rename = "G", alias = "g")]
    G,
    #[serde(rename = "b_g1")]
    BG1,
    OverlapCase2,
    Occupation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub parameter: ScanParameter,
    pub values: Vec<f64>,
    pub observable: Observable,
    pub base: ModelConfig,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        let v = &self.values;
        if v.len() < MIN_SCAN_POINTS {
            return Err(Error::InvalidScan(format!("need at least {MIN_SCAN_POINTS} values, got {}", v.len())));
        }
        if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidScan(format!("values must be positive and finite, got {x}")));
        }
        if let Some(w) = v.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidScan(format!("values must be strictly ascending, got {} then {}", w[0], w[1])));
        }
        self.base.validate()
    }

    fn expect(&self, parameter: ScanParameter, observable: Observable) -> Result<()> {
        if self.parameter != parameter || self.observable != observable {
            return Err(Error::InvalidScan(format!(
                "this pipeline scans {parameter:?} for {observable:?}, got {:?} for {:?}",
                self.parameter, self.observable
            )));
        }
        self.validate()
    }

    /// Runs `point` for every value in parallel; results and the reported
    /// error follow the order of `values`.
    fn sweep<T: Send>(&self, point: impl Fn(ModelConfig, f64) -> Result<T> + Sync) -> Result<Vec<T>> {
        let out: Vec<Result<T>> = self
            .values
            .par_iter()
            .map(|&v| self.base.at(self.parameter, v).and_then(|m| point(m, v)))
            .collect();
        out.into_iter().collect()
    }
}

/// A table of scan rows, one per scanned value, in input order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub parameter: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScanResult {
    fn new(columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        ScanResult { parameter: columns[0].into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Passes the fit through only if its R² reaches `floor`.
pub fn require_linearity(fit: FitResult, floor: f64) -> Result<FitResult> {
    if fit.r2 < floor || !fit.r2.is_finite() {
        return Err(Error::InsufficientLinearity { r2: fit.r2, floor, axes: fit.axes });
    }
    Ok(fit)
}

fn regime(parameter: ScanParameter, value: f64, reason: String) -> Error {
    Error::Regime { parameter: parameter.name(), value, reason }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingScan {
    pub table: ScanResult,
    pub fit: FitResult,
    /// Instanton action between the well minima.
    pub action: WkbResult,
}

/// `t1 = (E1 - E0)/2` against ħ for a symmetric double well, fitted as
/// `ln t1` vs `1/ħ`; the slope is compared with `-S`.
pub fn scan_hbar_splitting(spec: &ScanSpec) -> Result<SplittingScan> {
    spec.expect(ScanParameter::Hbar, Observable::T1)?;
    let well = spec.base.potential.double_well()?;
    if well.depth_left != well.depth_right {
        return Err(Error::InvalidParameter { name: "potential", reason: "splitting scan needs a symmetric double well".into() });
    }
    let first = spec.base.at(ScanParameter::Hbar, spec.values[0])?;
    let (_, u) = first.hamiltonian()?;
    let tp = instanton_endpoints(&u, (well.left_center(), well.right_center()))?;
    let action = action_integral(&u, tp.energy, &tp, &first.physics);
    let rows = spec.sweep(|m, hbar| {
        let exponent = action.action / hbar;
        if !(EXPONENT_RANGE.0..=EXPONENT_RANGE.1).contains(&exponent) {
            return Err(regime(ScanParameter::Hbar, hbar, format!("S/ħ = {exponent:.3} outside {EXPONENT_RANGE:?}")));
        }
        let (h, _) = m.hamiltonian()?;
        let e = solve_lowest(&h, 3)?.energies();
        let split = e[1] - e[0];
        if e[2] - e[1] < DOUBLET_RATIO * split {
            return Err(regime(
                ScanParameter::Hbar,
                hbar,
                format!("not a tunneling doublet: gap {:.3e} vs splitting {split:.3e}", e[2] - e[1]),
            ));
        }
        Ok(vec![hbar, 0.5 * split, e[0], e[1], e[2], exponent])
    })?;
    let table = ScanResult::new(&["hbar", "t1", "e0", "e1", "e2", "s_over_hbar"], rows);
    let fit = semilog_inverse_fit(&spec.values, &table.column("t1").unwrap_or_default())?;
    Ok(SplittingScan { table, fit: require_linearity(fit, SPLITTING_R2)?, action })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceOptions {
    /// Smallest weight of `ψ2` allowed on either side of the barrier.
    #[serde(default = "default_side_weight")]
    pub min_side_weight: f64,
}

fn default_side_weight() -> f64 {
    0.01
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { min_side_weight: default_side_weight() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceScan {
    /// Columns `l, G, est_error`.
    pub table: ScanResult,
    pub fit: FitResult,
    /// `|monopole| / |G|` for the full-well ground state, per point.
    pub monopole_ratio: Vec<f64>,
    /// Weight of `ψ2` on its lighter side of the barrier, per point.
    pub side_weight: Vec<f64>,
}

/// Weight of `psi` on the lighter side of `x_top`.
fn minority_weight(psi: &GridFunction, x_top: f64) -> f64 {
    let g = psi.grid();
    let left: f64 = (0..g.n).filter(|&i| g.x(i) < x_top).map(|i| psi.values()[i].powi(2)).sum::<f64>() * g.h();
    let total = psi.norm().powi(2);
    left.min(total - left) / total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistancePoint {
    pub l: f64,
    pub g: f64,
    pub est_error: f64,
    pub monopole_ratio: f64,
    pub side_weight: f64,
}

/// One separation of the distance scan, orbitals solved for this `l`.
pub fn distance_point(m: &ModelConfig, opts: DistanceOptions) -> Result<DistancePoint> {
    let well = m.potential.double_well()?;
    let l = well.separation;
    let (_, u, refs) = references(m)?;
    let (x_top, _) = barrier_top(&u, (well.left_center(), well.right_center()))?;
    let side_weight = minority_weight(&refs.psi_2.psi, x_top);
    if side_weight < opts.min_side_weight {
        return Err(regime(
            ScanParameter::Separation,
            l,
            format!("ψ2 is localized: {side_weight:.3e} of its weight across the barrier, need {}", opts.min_side_weight),
        ));
    }
    let kernel = m.resolve_kernel()?;
    let g = exchange_integral(&refs.psi_2, &refs.psi_1l, &refs.psi_1r, &kernel)?;
    let h = assemble_hamiltonian(&u, &m.physics);
    let ground = solve_lowest(&h, 1)?.pairs.remove(0);
    let multipole = multipole_leading(&refs.psi_2, &ground, &kernel, l)?;
    Ok(DistancePoint { l, g: g.g, est_error: g.est_error, monopole_ratio: multipole.residual_ratio, side_weight })
}

/// `G(2,1L;1R,2)` against the well separation, orbitals re-solved at every `l`,
/// fitted as `ln|G|` vs `ln l`.
pub fn scan_distance_exchange(spec: &ScanSpec, opts: DistanceOptions) -> Result<DistanceScan> {
    spec.expect(ScanParameter::Separation, Observable::G)?;
    let points = spec.sweep(|m, _| distance_point(&m, opts))?;
    let rows = points.iter().map(|p| vec![p.l, p.g, p.est_error]).collect();
    let table = ScanResult::new(&["l", "G", "est_error"], rows);
    let fit = loglog_fit(&spec.values, &table.column("G").unwrap_or_default())?;
    Ok(DistanceScan {
        table,
        fit: require_linearity(fit, DISTANCE_R2)?,
        monopole_ratio: points.iter().map(|p| p.monopole_ratio).collect(),
        side_weight: points.iter().map(|p| p.side_weight).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorOverlapParams {
    pub omega: f64,
    pub p: f64,
    #[serde(default)]
    pub xi0: f64,
}

impl OscillatorOverlapParams {
    pub fn validate(&self) -> Result<()> {
        positive("case2.omega", self.omega)?;
        crate::error::finite("case2.p", self.p)?;
        crate::error::finite("case2.xi0", self.xi0)
    }

    /// `exp(-ξ²/2)` with `ξ = x·sqrt(mω/ħ) - ξ0`.
    fn gaussian(&self, physics: &PhysicsParams, x: f64) -> f64 {
        let xi = x * (physics.mass * self.omega / physics.hbar).sqrt() - self.xi0;
        (-0.5 * xi * xi).exp()
    }
}

/// `|∫ exp(-ξ²/2)·exp(ipx/ħ) dx|`, the cosine and sine parts combined in quadrature.
pub fn overlap_case2(params: &OscillatorOverlapParams, physics: &PhysicsParams, grid: &Grid) -> Result<f64> {
    params.validate()?;
    physics.validate()?;
    grid.validate()?;
    let edge = params.gaussian(physics, grid.x_min).max(params.gaussian(physics, grid.x_max));
    if edge > 1e-12 {
        return Err(Error::GridTooNarrow(edge));
    }
    let k = params.p / physics.hbar;
    let (mut c, mut s) = (0.0, 0.0);
    for x in grid.points() {
        let g = params.gaussian(physics, x);
        c += g * (k * x).cos();
        s += g * (k * x).sin();
    }
    Ok(grid.h() * c.hypot(s))
}

/// Box holding the Gaussian down to `e^-40` with 32 points per oscillation
/// and 16 per oscillator length.
pub fn case2_grid(params: &OscillatorOverlapParams, physics: &PhysicsParams) -> Result<Grid> {
    params.validate()?;
    let sigma = (physics.hbar / (physics.mass * params.omega)).sqrt();
    let center = params.xi0 * sigma;
    let half = 9.0 * sigma;
    let mut spacing = sigma / 16.0;
    if params.p != 0.0 {
        spacing = spacing.min(std::f64::consts::TAU * physics.hbar / params.p.abs() / 32.0);
    }
    Grid::with_spacing(center - half, center + half, spacing)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case2Scan {
    pub table: ScanResult,
    /// `ln(overlap(p)/overlap(0))` vs `1/ħ`.
    pub fit: FitResult,
    /// `-p²/(2mω)`.
    pub expected_slope: f64,
}

/// Oscillator/plane-wave overlap against ħ. The fitted observable is the
/// ratio to the `p = 0` overlap on the same grid, which removes the
/// `sqrt(ħ)` normalization prefactor.
pub fn scan_case2(spec: &ScanSpec, params: &OscillatorOverlapParams) -> Result<Case2Scan> {
    spec.expect(ScanParameter::Hbar, Observable::OverlapCase2)?;
    let rows = spec.sweep(|m, hbar| {
        let grid = case2_grid(params, &m.physics)?;
        let value = overlap_case2(params, &m.physics, &grid)?;
        let zero = overlap_case2(&OscillatorOverlapParams { p: 0.0, ..*params }, &m.physics, &grid)?;
        Ok(vec![hbar, value, zero, value / zero])
    })?;
    let table = ScanResult::new(&["hbar", "overlap", "overlap_p0", "ratio"], rows);
    let fit = semilog_inverse_fit(&spec.values, &table.column("ratio").unwrap_or_default())?;
    let m = spec.base.physics.mass;
    Ok(Case2Scan {
        table,
        fit: require_linearity(fit, CASE2_R2)?,
        expected_slope: -params.p * params.p / (2.0 * m * params.omega),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case1Options {
    /// `ψ1` is the even state nearest `U_min + fraction·(U_top - U_min)`.
    #[serde(default = "half")]
    pub e1_fraction: f64,
    /// `ψ2` is the odd state nearest this energy.
    #[serde(default = "four")]
    pub e2_reference: f64,
}

fn half() -> f64 {
    0.5
}

fn four() -> f64 {
    4.0
}

impl Default for Case1Options {
    fn default() -> Self {
        Case1Options { e1_fraction: half(), e2_reference: four() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbarExchangeScan {
    pub table: ScanResult,
    /// `ln|G|` vs `1/ħ`.
    pub semilog: FitResult,
    /// `ln|G|` vs `ln ħ`.
    pub loglog: FitResult,
}

/// `G(2,1;1,2)` between an under-barrier doublet member and an above-barrier
/// state of a symmetric double well, against ħ.
pub fn scan_hbar_exchange_case1(spec: &ScanSpec, opts: &Case1Options) -> Result<HbarExchangeScan> {
    spec.expect(ScanParameter::Hbar, Observable::G)?;
    let well = spec.base.potential.double_well()?;
    let rows = spec.sweep(|m, hbar| {
        let (h, u) = m.hamiltonian()?;
        let g = u.grid();
        let (x_top, top) = barrier_top(&u, (well.left_center(), well.right_center()))?;
        let (_, bottom) = well_bottom(&u, (g.x(0), x_top))?;
        let psi1 = h.nearest_state(bottom + opts.e1_fraction * (top - bottom), Some(1))?.relabeled("1");
        let psi2 = h.nearest_state(opts.e2_reference, Some(-1))?.relabeled("2");
        let r = exchange_integral(&psi2, &psi1, &psi1, &m.resolve_kernel()?)?;
        Ok(vec![hbar, r.g, r.est_error, psi1.energy, psi2.energy])
    })?;
    let table = ScanResult::new(&["hbar", "G", "est_error", "e1", "e2"], rows);
    let gs = table.column("G").unwrap_or_default();
    let semilog = require_linearity(semilog_inverse_fit(&spec.values, &gs)?, CASE1_R2)?;
    let loglog = loglog_fit(&spec.values, &gs)?;
    Ok(HbarExchangeScan { table, semilog, loglog })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case3Options {
    /// `ψ2` is the odd state nearest this energy.
    #[serde(default = "half")]
    pub e2_reference: f64,
    /// Scale the core as `ħ²/(m z)` at every point.
    #[serde(default = "yes")]
    pub tie_core: bool,
}

fn yes() -> bool {
    true
}

impl Default for Case3Options {
    fn default() -> Self {
        Case3Options { e2_reference: half(), tie_core: true }
    }
}

/// `G(2,1;1,2)` between the soft Coulomb ground state and a fixed-energy
/// continuum state, against ħ. Both fits are returned; only the log-log one
/// carries an R² floor.
pub fn scan_hbar_exchange_case3(spec: &ScanSpec, opts: &Case3Options) -> Result<HbarExchangeScan> {
    spec.expect(ScanParameter::Hbar, Observable::G)?;
    if !matches!(spec.base.potential, PotentialSpec::SoftCoulombWell { .. }) {
        return Err(Error::WrongVariant { expected: "soft_coulomb_well", got: spec.base.potential.name() });
    }
    let rows = spec.sweep(|mut m, hbar| {
        if let PotentialSpec::SoftCoulombWell { z, ref mut core, .. } = m.potential {
            if opts.tie_core {
                *core = hbar * hbar / (m.physics.mass * z);
            }
        }
        let core = m.core().unwrap_or(1.0);
        let points_per_core = core / m.resolve_grid()?.h();
        if points_per_core < MIN_POINTS_PER_CORE {
            return Err(Error::CoreUnderResolved { points_per_core });
        }
        let (h, _) = m.hamiltonian()?;
        let psi1 = solve_lowest(&h, 1)?.pairs.remove(0).relabeled("1");
        let psi2 = h.nearest_state(opts.e2_reference, Some(-1))?.relabeled("2");
        let r = exchange_integral(&psi2, &psi1, &psi1, &m.resolve_kernel()?)?;
        Ok(vec![hbar, r.g, r.est_error, core, psi1.energy, psi2.energy])
    })?;
    let table = ScanResult::new(&["hbar", "G", "est_error", "core", "e1", "e2"], rows);
    let gs = table.column("G").unwrap_or_default();
    let semilog = semilog_inverse_fit(&spec.values, &gs)?;
    let loglog = require_linearity(loglog_fit(&spec.values, &gs)?, CASE3_LOGLOG_R2)?;
    Ok(HbarExchangeScan { table, semilog, loglog })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HfOptions {
    /// Origin of the tail distance; defaults to the left-well center.
    #[serde(default)]
    pub origin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HfRun {
    pub n: usize,
    pub e1: f64,
    pub e2: f64,
    /// `S/ħ` of `ψ1` through the barrier between the wells.
    pub barrier_exponent: f64,
    pub tail: HfTailResult,
    /// `ln|δψ1| - ln|ψ1|` over the window, nearest first.
    pub excess: Vec<f64>,
    pub excess_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HfComparison {
    pub base: HfRun,
    pub refined: HfRun,
    pub slope_change: f64,
}

/// First-order exchange correction to the double-well ground state with `ψ2`
/// as the occupied orbital, and its tail left of the origin.
pub fn hf_tail_on(m: &ModelConfig, grid: Grid, opts: &HfOptions) -> Result<HfRun> {
    m.validate()?;
    let well = m.potential.double_well()?;
    let u = sample_potential(&m.potential, &m.physics, &grid);
    let h = assemble_hamiltonian(&u, &m.physics);
    let centers = (well.left_center(), well.right_center());
    let (_, top) = barrier_top(&u, centers)?;
    let psi1 = solve_lowest(&h, 1)?.pairs.remove(0).relabeled("1");
    let psi2 = delocalized_orbital(&h, top, m.psi2_choice())?;
    let barrier_exponent = barrier_action(&u, psi1.energy, centers, &m.physics)?.action / m.physics.hbar;
    let src = ExchangeSource { psi_q: psi2.clone(), kernel: m.resolve_kernel()? };
    let delta = first_order_correction(&h, &psi1, &src)?;
    let origin = opts.origin.unwrap_or(well.left_center());
    let tail = tail_analysis(&delta, &psi2, &u, psi1.energy, origin)?;
    let window = tail_window(&psi2, &u, psi1.energy, origin)?;
    let excess = excess_over_orbital(&delta, &psi1, &window);
    let excess_increasing = excess.windows(2).all(|w| w[1] > w[0]);
    Ok(HfRun { n: grid.n, e1: psi1.energy, e2: psi2.energy, barrier_exponent, tail, excess, excess_increasing })
}

/// The tail analysis on the configured grid and on its refinement.
pub fn hf_tail(m: &ModelConfig, opts: &HfOptions) -> Result<HfComparison> {
    let grid = m.resolve_grid()?;
    let (base, refined) = rayon::join(|| hf_tail_on(m, grid, opts), || hf_tail_on(m, grid.refined(), opts));
    let (base, refined) = (base?, refined?);
    let slope_change = (refined.tail.fit.slope - base.tail.fit.slope).abs();
    Ok(HfComparison { base, refined, slope_change })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExchangeReport {
    pub e_1l: f64,
    pub e_1r: f64,
    pub e_2: f64,
    pub barrier_top: f64,
    pub g: f64,
    pub est_error: f64,
    pub b_g1: f64,
    /// Hopping `<ψ1R|U_L|ψ1L>`.
    pub t: f64,
    /// Two-level admixture from the hopping.
    pub b_t1: f64,
    /// Measured `<ψ1R, ground>`.
    pub measured_admixture: f64,
    /// `|B_G1| / |t/(E_1R - E_1L)|`.
    pub dominance: f64,
    pub monopole_ratio: f64,
}

fn references(m: &ModelConfig) -> Result<(Grid, GridFunction, ReferenceOrbitals)> {
    m.validate()?;
    let grid = m.resolve_grid()?;
    let u = sample_potential(&m.potential, &m.physics, &grid);
    let refs = reference_orbitals(&m.potential, &m.physics, &grid, m.psi2_choice())?;
    Ok((grid, u, refs))
}

/// Exchange and direct admixtures of an asymmetric double well.
pub fn exchange_report(m: &ModelConfig) -> Result<ExchangeReport> {
    let (_, u, refs) = references(m)?;
    let kernel = m.resolve_kernel()?;
    let g = exchange_integral(&refs.psi_2, &refs.psi_1l, &refs.psi_1r, &kernel)?;
    let b = admixture_bg1(&g, refs.e_1l, refs.e_1r)?;
    let t = hopping_integral(&m.potential, &m.physics, &refs)?;
    let h = assemble_hamiltonian(&u, &m.physics);
    let ground = solve_lowest(&h, 1)?.pairs.remove(0);
    let l = m.potential.double_well()?.separation;
    let multipole = multipole_leading(&refs.psi_2, &ground, &kernel, l.max(f64::MIN_POSITIVE))?;
    Ok(ExchangeReport {
        e_1l: refs.e_1l,
        e_1r: refs.e_1r,
        e_2: refs.psi_2.energy,
        barrier_top: refs.barrier_top,
        g: g.g,
        est_error: g.est_error,
        b_g1: b.b_g1,
        t,
        b_t1: two_level_admixture(t, refs.e_1l, refs.e_1r),
        measured_admixture: admixture_projection(&ground, &refs.psi_1r)?,
        dominance: b.b_g1.abs() / (t / (refs.e_1r - refs.e_1l)).abs(),
        monopole_ratio: multipole.residual_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Defaults to the barrier-top position.
    #[serde(default)]
    pub divider: Option<f64>,
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { tol: default_tol(), divider: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    /// `E0 + E1` of the one-particle spectrum.
    pub e0_plus_e1: f64,
    pub free_energy: f64,
    pub energy: f64,
    pub band: (f64, f64),
    pub free_occupation: f64,
    pub occupation: f64,
    pub enhancement: f64,
    /// Measured `<ψ1R, ψ0>` of the one-particle ground state.
    pub b_t1: f64,
    pub b_g1: f64,
    /// `|B_t1 + B_G1|²`.
    pub predicted: f64,
    /// `occupation / predicted`.
    pub prediction_ratio: f64,
    pub free_right_density: f64,
    pub right_density: f64,
}

/// Exact two-fermion ground state with and without the interaction, the
/// occupation of `ψ1R` in both and the perturbative prediction.
pub fn oracle_report(m: &ModelConfig, opts: &OracleOptions) -> Result<OracleReport> {
    let (grid, u, refs) = references(m)?;
    let well = m.potential.double_well()?;
    let kernel = m.resolve_kernel()?;
    let problem = TwoParticleProblem { grid, u: u.clone(), kernel, params: m.physics };
    let lanczos = LanczosOptions { tol: opts.tol, ..LanczosOptions::default() };
    let op = assemble_2p(&problem)?;
    let free_op = assemble_2p(&TwoParticleProblem { kernel: kernel.with_e2(0.0), ..problem })?;
    let (state, free) = rayon::join(|| solve_ground_2p(&op, lanczos), || solve_ground_2p(&free_op, lanczos));
    let (state, free) = (state?, free?);
    let one = solve_lowest(op.one_body(), 2)?;
    let e = one.energies();
    let gap = e[1] - e[0];
    let band = (refs.e_1l - 0.5 * gap, refs.e_1l + 0.5 * gap);
    let divider = match opts.divider {
        Some(d) => d,
        None => barrier_top(&u, (well.left_center(), well.right_center()))?.0,
    };
    let occ = right_well_occupation(&op, &state, &refs.psi_1r, divider, band)?;
    let free_occ = right_well_occupation(&free_op, &free, &refs.psi_1r, divider, band)?;
    let b_t1 = admixture_projection(&one.pairs[0], &refs.psi_1r)?;
    let g = exchange_integral(&refs.psi_2, &refs.psi_1l, &refs.psi_1r, &kernel)?;
    let b_g1 = admixture_bg1(&g, refs.e_1l, refs.e_1r)?.b_g1;
    let predicted = (b_t1 + b_g1).powi(2);
    Ok(OracleReport {
        n: grid.n,
        e0_plus_e1: e[0] + e[1],
        free_energy: free.energy,
        energy: state.energy,
        band,
        free_occupation: free_occ.occupation,
        occupation: occ.occupation,
        enhancement: occ.occupation / free_occ.occupation,
        b_t1,
        b_g1,
        predicted,
        prediction_ratio: occ.occupation / predicted,
        free_right_density: free_occ.right_density,
        right_density: occ.right_density,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationScan {
    /// Columns `e2, occupation, shift`.
    pub table: ScanResult,
    /// `ln|shift|` vs `ln e2`.
    pub fit: FitResult,
}

/// Occupation shift over the non-interacting value against the kernel strength.
pub fn scan_e2_occupation(spec: &ScanSpec, opts: &OracleOptions) -> Result<OccupationScan> {
    spec.expect(ScanParameter::E2, Observable::Occupation)?;
    let rows = spec.sweep(|m, e2| {
        let r = oracle_report(&m, opts)?;
        Ok(vec![e2, r.occupation, r.occupation - r.free_occupation])
    })?;
    let table = ScanResult::new(&["e2", "occupation", "shift"], rows);
    let fit = loglog_fit(&spec.values, &table.column("shift").unwrap_or_default())?;
    Ok(OccupationScan { table, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub h: f64,
    pub energies: Vec<f64>,
    /// Half the lowest splitting, for symmetric double wells.
    pub t1: Option<f64>,
}

pub fn spectrum_report(m: &ModelConfig, count: usize) -> Result<SpectrumReport> {
    let (h, _) = m.hamiltonian()?;
    let energies = solve_lowest(&h, count)?.energies();
    let t1 = match m.potential.double_well() {
        Ok(w) if w.depth_left == w.depth_right && energies.len() >= 2 => Some(0.5 * (energies[1] - energies[0])),
        _ => None,
    };
    Ok(SpectrumReport { n: h.grid().n, h: h.grid().h(), energies, t1 })
}

/// Action at `energy` through the barrier on `bracket`; for a double well
/// without an energy, the instanton action between the well minima.
pub fn wkb_report(m: &ModelConfig, energy: Option<f64>, bracket: Option<(f64, f64)>) -> Result<WkbResult> {
    let (h, u) = m.hamiltonian()?;
    let g = *h.grid();
    match (energy, m.potential.double_well()) {
        (None, Ok(w)) => {
            let tp = instanton_endpoints(&u, (w.left_center(), w.right_center()))?;
            Ok(action_integral(&u, tp.energy, &tp, &m.physics))
        }
        (None, Err(_)) => Err(Error::InvalidParameter { name: "energy", reason: "required for this potential".into() }),
        (Some(e), _) => barrier_action(&u, e, bracket.unwrap_or((g.x(0), g.x(g.n - 1))), &m.physics),
    }
}
