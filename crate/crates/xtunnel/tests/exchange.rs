use std::f64::consts::PI;

use proptest::prelude::*;
use xtunnel::exchange::{admixture_bg1, exchange_integral, multipole_leading, ExchangeIntegralResult, ExchangeKernel};
use xtunnel::grid::{Grid, GridFunction};
use xtunnel::potentials::{sample_potential, DoubleWell, PhysicsParams, PotentialSpec};
use xtunnel::spectrum::{assemble_hamiltonian, reference_orbitals, solve_lowest, Orbital, Psi2Choice, ReferenceOrbitals};
use xtunnel::Error;

fn asym_well(l: f64) -> PotentialSpec {
    DoubleWell { depth_left: 4.0, depth_right: 3.7, width: 1.0, separation: l }.into()
}

fn refs(n: usize) -> ReferenceOrbitals {
    let spec = asym_well(8.0);
    let g = Grid::symmetric(spec.double_well().unwrap().default_half_width(), n).unwrap();
    reference_orbitals(&spec, &PhysicsParams::default(), &g, Psi2Choice::BelowBarrierTop).unwrap()
}

fn unit_kernel() -> ExchangeKernel {
    ExchangeKernel::new(1.0, 1.0).unwrap()
}

/// `sin(π p / q)` with the argument reduced exactly in integers.
fn sin_pi_ratio(p: usize, q: usize) -> f64 {
    (PI * (p % (2 * q)) as f64 / q as f64).sin()
}

/// Sine-series interpolation of Dirichlet samples onto the refined grid.
fn refine(f: &GridFunction) -> GridFunction {
    let g = f.grid();
    let n = g.n;
    let m = (n + 1) as f64;
    let c: Vec<f64> = (1..=n)
        .map(|k| {
            let s: f64 = f
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| v * sin_pi_ratio(k * (i + 1), n + 1))
                .sum();
            2.0 * s / m
        })
        .collect();
    let fine = g.refined();
    let values = (0..fine.n)
        .map(|j| {
            c.iter().enumerate().map(|(k, ck)| ck * sin_pi_ratio((k + 1) * (j + 1), 2 * (n + 1))).sum()
        })
        .collect();
    GridFunction::new(fine, values).unwrap()
}

/// Plain double loop with compensated accumulation.
fn brute_force(p2: &GridFunction, p1l: &GridFunction, p1r: &GridFunction, k: &ExchangeKernel) -> f64 {
    let g = p2.grid();
    let terms = (0..g.n).map(|i| {
        let row = compensated((0..g.n).map(|j| k.value(g.x(i), g.x(j)) * p1r.values()[j] * p2.values()[j]));
        p2.values()[i] * p1l.values()[i] * row
    });
    compensated(terms) * g.h() * g.h()
}

fn compensated(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

fn orbital(psi: GridFunction, label: &str) -> Orbital {
    Orbital { psi, energy: 0.0, label: label.into() }
}

#[test]
fn constant_kernel_factorizes() {
    let r = refs(601);
    let k = ExchangeKernel::new(1.0, 1e4).unwrap();
    // a broad probe overlapping both wells, so neither factor is small
    let probe = Orbital::normalized(r.psi_1l.psi.grid().sample(|x| (-x * x / 18.0).exp()), 0.0, "probe");
    let g = exchange_integral(&probe, &r.psi_1l, &r.psi_1r, &k).unwrap().g;
    let product = 1e-4 * probe.psi.inner(&r.psi_1l.psi).unwrap() * r.psi_1r.psi.inner(&probe.psi).unwrap();
    assert!((g / product - 1.0).abs() < 1e-6, "{g} vs {product}");
}

#[test]
fn self_exchange_is_positive() {
    let r = refs(401);
    let g = exchange_integral(&r.psi_2, &r.psi_2, &r.psi_2, &unit_kernel()).unwrap();
    assert!(g.g > 0.0);
    assert!(g.est_error >= 0.0);
    assert_eq!(g.orbitals_used, ["2".to_string(), "2".into(), "2".into()]);
}

#[test]
fn doubled_resolution_oracle() {
    let r = refs(301);
    let k = unit_kernel();
    let res = exchange_integral(&r.psi_2, &r.psi_1l, &r.psi_1r, &k).unwrap();
    let oracle = brute_force(&refine(&r.psi_2.psi), &refine(&r.psi_1l.psi), &refine(&r.psi_1r.psi), &k);
    assert!((res.g - oracle).abs() <= 3.0 * res.est_error, "{} vs {oracle}, est {}", res.g, res.est_error);
}

#[test]
fn grid_mismatch_is_rejected() {
    let r = refs(201);
    let other = refs(203);
    let err = exchange_integral(&r.psi_2, &other.psi_1l, &r.psi_1r, &unit_kernel()).unwrap_err();
    assert!(matches!(err, Error::GridMismatch { .. }));
}

#[test]
fn labels_swap_symmetrically() {
    let r = refs(401);
    let k = unit_kernel();
    let a = exchange_integral(&r.psi_2, &r.psi_1l, &r.psi_1r, &k).unwrap().g;
    let b = exchange_integral(&r.psi_2, &r.psi_1r, &r.psi_1l, &k).unwrap().g;
    assert!((a - b).abs() <= 1e-12 * a.abs());
}

#[test]
fn bg1_examples() {
    let g = |v: f64| ExchangeIntegralResult { g: v, est_error: 0.0, orbitals_used: Default::default() };
    let r = admixture_bg1(&g(1e-6), -1.0, -1.01).unwrap();
    assert!((r.b_g1 - 1e-4).abs() < 1e-16);
    assert_eq!(r.b_g1, r.g / r.detuning);
    assert_eq!(admixture_bg1(&g(0.0), -1.0, -0.9).unwrap().b_g1, 0.0);
    assert!(matches!(admixture_bg1(&g(1e-6), -1.0, -1.0), Err(Error::DegenerateDetuning(_))));
    assert!(matches!(admixture_bg1(&g(1e-6), 0.0, 0.0), Err(Error::DegenerateDetuning(_))));
}

fn full_well_states(l: f64) -> (Orbital, Orbital) {
    let spec = asym_well(l);
    let g = Grid::symmetric(spec.double_well().unwrap().default_half_width(), 801).unwrap();
    let p = PhysicsParams::default();
    let r = reference_orbitals(&spec, &p, &g, Psi2Choice::BelowBarrierTop).unwrap();
    let ground = solve_lowest(&assemble_hamiltonian(&sample_potential(&spec, &p, &g), &p), 1).unwrap();
    (r.psi_2, ground.pairs.into_iter().next().unwrap())
}

#[test]
fn monopole_cancels_for_eigenstates() {
    let (psi2, psi1) = full_well_states(8.0);
    let m = multipole_leading(&psi2, &psi1, &unit_kernel(), 8.0).unwrap();
    assert!(m.monopole.abs() <= 1e-6 * m.g.abs(), "{m:?}");
    assert!(m.residual_ratio.is_finite());
}

#[test]
fn monopole_rejects_mixed_orbital() {
    let (psi2, psi1) = full_well_states(8.0);
    let mixed = Orbital::normalized(psi1.psi.axpy(0.1, &psi2.psi).unwrap(), psi1.energy, "mixed");
    assert!(matches!(multipole_leading(&psi2, &mixed, &unit_kernel(), 8.0), Err(Error::NotOrthogonal(_))));
}

#[test]
fn symmetric_configuration_ratio_is_reported() {
    let spec: PotentialSpec = DoubleWell { depth_left: 4.0, depth_right: 4.0, width: 1.0, separation: 8.0 }.into();
    let g = Grid::symmetric(12.0, 801).unwrap();
    let p = PhysicsParams::default();
    let s = solve_lowest(&assemble_hamiltonian(&sample_potential(&spec, &p, &g), &p), 3).unwrap();
    let m = multipole_leading(&s.pairs[2], &s.pairs[0], &unit_kernel(), 8.0).unwrap();
    assert!(m.residual_ratio.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_in_each_orbital(c in -5.0f64..5.0) {
        prop_assume!(c.abs() > 1e-3);
        let r = refs(201);
        let k = unit_kernel();
        let base = exchange_integral(&r.psi_2, &r.psi_1l, &r.psi_1r, &k).unwrap().g;
        let scaled = orbital(r.psi_1l.psi.scaled(c), "c1L");
        let g = exchange_integral(&r.psi_2, &scaled, &r.psi_1r, &k).unwrap().g;
        prop_assert!((g - c * base).abs() <= 1e-12 * (c * base).abs());
    }

    #[test]
    fn swap_symmetry_for_generic_functions(s1 in 0.3f64..2.0, s2 in 0.3f64..2.0, x0 in -3.0f64..3.0, soft in 0.2f64..3.0) {
        let g = Grid::symmetric(8.0, 161).unwrap();
        let f1 = orbital(g.sample(|x| (-(x - x0).powi(2) / s1).exp()), "a");
        let f2 = orbital(g.sample(|x| x * (-(x + x0).powi(2) / s2).exp()), "b");
        let f3 = orbital(g.sample(|x| (-(x * x) / (s1 + s2)).exp()), "c");
        let k = ExchangeKernel::new(1.0, soft).unwrap();
        let a = exchange_integral(&f3, &f1, &f2, &k).unwrap();
        let b = exchange_integral(&f3, &f2, &f1, &k).unwrap();
        prop_assert!((a.g - b.g).abs() <= 1e-12 * a.g.abs());
        prop_assert!(a.est_error >= 0.0);
    }
}
