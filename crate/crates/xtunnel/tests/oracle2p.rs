use proptest::prelude::*;
use xtunnel::exchange::ExchangeKernel;
use xtunnel::grid::Grid;
use xtunnel::oracle2p::{
    assemble_2p, dense_ground, natural_orbitals, reduced_density, right_well_occupation, solve_ground_2p,
    LanczosOptions, PairOperator, TwoParticleProblem, TwoParticleState,
};
use xtunnel::potentials::{sample_potential, single_well_spec, DoubleWell, PhysicsParams, PotentialSpec, Side};
use xtunnel::spectrum::{assemble_hamiltonian, solve_lowest, Spectrum};
use xtunnel::Error;

fn well(dl: f64, dr: f64, l: f64) -> PotentialSpec {
    DoubleWell { depth_left: dl, depth_right: dr, width: 1.0, separation: l }.into()
}

fn problem(spec: &PotentialSpec, n: usize, e2: f64) -> TwoParticleProblem {
    let l = spec.double_well().unwrap().separation;
    let grid = Grid::symmetric(l / 2.0 + 6.0, n).unwrap();
    let params = PhysicsParams::default();
    TwoParticleProblem {
        grid,
        u: sample_potential(spec, &params, &grid),
        kernel: ExchangeKernel::new(e2, 1.0).unwrap(),
        params,
    }
}

fn one_body(p: &TwoParticleProblem, k: usize) -> Spectrum {
    solve_lowest(&assemble_hamiltonian(&p.u, &p.params), k).unwrap()
}

fn ground(op: &PairOperator) -> TwoParticleState {
    solve_ground_2p(op, LanczosOptions::default()).unwrap()
}

fn deterministic_vector(m: usize, salt: f64) -> Vec<f64> {
    (0..m).map(|i| ((i as f64 + salt) * 0.754_877_666).fract() - 0.5).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn non_interacting_energy_is_sum_of_two_lowest() {
    let p = problem(&well(5.0, 2.4, 6.0), 60, 0.0);
    let op = assemble_2p(&p).unwrap();
    let s = one_body(&p, 2);
    let g = ground(&op);
    assert!((g.energy - s.pairs[0].energy - s.pairs[1].energy).abs() < 1e-8, "{}", g.energy);
}

#[test]
fn non_interacting_state_is_a_slater_determinant() {
    let p = problem(&well(5.0, 2.4, 6.0), 60, 0.0);
    let op = assemble_2p(&p).unwrap();
    let s = one_body(&p, 2);
    let slater = op.slater(&s.pairs[0].psi, &s.pairs[1].psi);
    let overlap = dot(&slater, &ground(&op).amp);
    assert!(overlap * overlap >= 1.0 - 1e-6, "{overlap}");
}

#[test]
fn operator_is_symmetric() {
    let p = problem(&well(5.0, 2.4, 6.0), 40, 1.0);
    let op = assemble_2p(&p).unwrap();
    let x = deterministic_vector(op.dim(), 0.3);
    let y = deterministic_vector(op.dim(), 7.1);
    let (a, b) = (dot(&x, &op.apply(&y)), dot(&op.apply(&x), &y));
    let scale = dot(&x, &x).sqrt() * dot(&y, &y).sqrt() * op.one_body().norm_inf();
    assert!((a - b).abs() <= 1e-12 * scale);
}

#[test]
fn expanded_amplitudes_are_antisymmetric() {
    let p = problem(&well(5.0, 2.4, 6.0), 30, 1.0);
    let op = assemble_2p(&p).unwrap();
    let a = op.full_matrix(&ground(&op).amp);
    for i in 0..30 {
        assert_eq!(a[(i, i)], 0.0);
        for j in (0..30).filter(|&j| j != i) {
            assert_eq!(a[(i, j)].to_bits(), (-a[(j, i)]).to_bits());
        }
    }
}

#[test]
fn tighter_tolerance_moves_energy_little() {
    let p = problem(&well(5.0, 2.4, 6.0), 50, 1.0);
    let op = assemble_2p(&p).unwrap();
    let tol = 1e-7;
    let a = solve_ground_2p(&op, LanczosOptions { tol, ..Default::default() }).unwrap();
    let b = solve_ground_2p(&op, LanczosOptions { tol: tol / 10.0, ..Default::default() }).unwrap();
    assert!((a.energy - b.energy).abs() <= 10.0 * tol);
    assert!(b.residual <= tol / 10.0);
}

#[test]
fn lanczos_matches_dense_diagonalization() {
    let p = problem(&well(5.0, 2.4, 3.0), 16, 1.0);
    let op = assemble_2p(&p).unwrap();
    assert_eq!(op.dim(), 120);
    let (e, v) = dense_ground(&op);
    let g = solve_ground_2p(&op, LanczosOptions { tol: 1e-11, ..Default::default() }).unwrap();
    assert!((g.energy - e).abs() < 1e-10, "{} vs {e}", g.energy);
    assert!(dot(&v, &g.amp).abs() > 1.0 - 1e-9);
}

#[test]
fn iteration_cap_reports_residual() {
    let p = problem(&well(5.0, 2.4, 6.0), 60, 1.0);
    let op = assemble_2p(&p).unwrap();
    let err = solve_ground_2p(&op, LanczosOptions { tol: 1e-12, max_iterations: 5 }).unwrap_err();
    assert!(matches!(err, Error::NoConvergence { iterations: 5, .. }));
}

#[test]
fn dimension_bound() {
    let p = problem(&well(5.0, 2.4, 6.0), 129, 1.0);
    assert!(matches!(assemble_2p(&p), Err(Error::DimensionExceeded { .. })));
}

#[test]
fn density_matrix_is_fermionic() {
    let p = problem(&well(5.0, 2.4, 6.0), 60, 1.0);
    let op = assemble_2p(&p).unwrap();
    let rdm = reduced_density(&op, &ground(&op));
    assert!((rdm.trace() - 2.0).abs() < 1e-10);
    let eig = nalgebra::SymmetricEigen::new(rdm);
    assert!(eig.eigenvalues.iter().all(|&w| (-1e-10..=1.0 + 1e-10).contains(&w)));
    let occ: f64 = natural_orbitals(&op, &ground(&op)).iter().map(|n| n.occupation).sum();
    assert!((occ - 2.0).abs() < 1e-8);
}

#[test]
fn interaction_raises_the_energy() {
    let spec = well(5.0, 2.4, 6.0);
    let free = ground(&assemble_2p(&problem(&spec, 60, 0.0)).unwrap()).energy;
    let on = ground(&assemble_2p(&problem(&spec, 60, 1.0)).unwrap()).energy;
    assert!(on >= free);
}

#[test]
fn free_occupation_matches_single_particle_admixture() {
    let spec = well(5.0, 2.4, 6.0);
    let p = problem(&spec, 80, 0.0);
    let op = assemble_2p(&p).unwrap();
    let s = one_body(&p, 2);
    let right = solve_lowest(&assemble_hamiltonian(&sample_potential(&single_well_spec(&spec, Side::R).unwrap(), &p.params, &p.grid), &p.params), 1).unwrap();
    let left = solve_lowest(&assemble_hamiltonian(&sample_potential(&single_well_spec(&spec, Side::L).unwrap(), &p.params, &p.grid), &p.params), 1).unwrap();
    let half = 0.5 * (s.pairs[1].energy - s.pairs[0].energy);
    let e1l = left.pairs[0].energy;
    let r = right_well_occupation(&op, &ground(&op), &right.pairs[0], 0.0, (e1l - half, e1l + half)).unwrap();
    let b = right.pairs[0].psi.inner(&s.pairs[0].psi).unwrap();
    assert!((r.occupation / (b * b) - 1.0).abs() < 0.1, "{} vs {}", r.occupation, b * b);
}

#[test]
fn symmetric_free_occupation_is_the_slater_value() {
    let spec = well(4.0, 4.0, 6.0);
    let p = problem(&spec, 80, 0.0);
    let op = assemble_2p(&p).unwrap();
    let s = one_body(&p, 3);
    let right = solve_lowest(&assemble_hamiltonian(&sample_potential(&single_well_spec(&spec, Side::R).unwrap(), &p.params, &p.grid), &p.params), 1).unwrap();
    let e = right.pairs[0].energy;
    let band = (e - 0.5 * (s.pairs[2].energy - e), e + 0.5 * (s.pairs[2].energy - e));
    let r = right_well_occupation(&op, &ground(&op), &right.pairs[0], 0.0, band).unwrap();
    let c0 = right.pairs[0].psi.inner(&s.pairs[0].psi).unwrap();
    let c1 = right.pairs[0].psi.inner(&s.pairs[1].psi).unwrap();
    assert!((r.occupation - (c0 * c0 + c1 * c1)).abs() < 1e-8, "{} vs {}", r.occupation, c0 * c0 + c1 * c1);
    assert!((r.right_density - 1.0).abs() < 1e-6, "{}", r.right_density);
}

#[test]
fn divider_outside_grid_is_rejected() {
    let p = problem(&well(5.0, 2.4, 6.0), 30, 0.0);
    let op = assemble_2p(&p).unwrap();
    let s = one_body(&p, 1);
    assert!(right_well_occupation(&op, &ground(&op), &s.pairs[0], 100.0, (-10.0, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solves_are_reproducible(e2 in 0.0f64..2.0) {
        let p = problem(&well(5.0, 2.4, 4.0), 24, e2);
        let op = assemble_2p(&p).unwrap();
        let (a, b) = (ground(&op), ground(&op));
        prop_assert!(a.amp.iter().zip(&b.amp).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
