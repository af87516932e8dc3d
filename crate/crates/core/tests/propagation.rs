// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

use darkgate::config::preset;
use darkgate::dynamics::{expectation, max_step, propagate_static_grid, propagate_td, QuantumState, TimeGrid};
use darkgate::hilbert::{
    site_lowering, site_projector, CVector, CompositeSpace, ModeSpec, OperatorMatrix, Transition, C64, Q1, Q2, RC,
};
use darkgate::model::{
    build_heff_prime, build_interaction_qubit_hamiltonian, build_lab_qubit_hamiltonian, qubit_device_space,
    reduced_space, DeviceParams, Hamiltonian,
};

fn sec4() -> DeviceParams {
    preset("paper_sec4").unwrap().device().unwrap()
}

/// Detuned qubit-oscillator exchange with a static qubit drive.
fn driven_exchange() -> Hamiltonian {
    let space = CompositeSpace::new(vec![ModeSpec::qubit(1.0).unwrap(), ModeSpec::boson(1.0, 2).unwrap()]).unwrap();
    let s = site_lowering(&space, 0, Transition::Ge).unwrap();
    let a = site_lowering(&space, 1, Transition::Ge).unwrap();
    let mut h = Hamiltonian::new(space.dim());
    h.add_paired("g", C64::new(0.8, 0.0), &a * &s.dagger(), 1.3).unwrap();
    h.add_hermitian("x", 0.4, &s + &s.dagger()).unwrap();
    h
}

#[test]
fn rk4_error_falls_sixteenfold_per_halving() {
    let h = driven_exchange();
    let mut v = vec![C64::new(0.0, 0.0); h.dim()];
    v[0] = C64::new(1.0, 0.0);
    let psi0 = QuantumState::normalized_ket(v.into()).unwrap();
    let grid = TimeGrid::from_times(vec![400.0]).unwrap();
    let bound = max_step(&h);
    let run = |dt: f64| {
        propagate_td(&h, &psi0, &grid, Some(dt))
            .unwrap()
            .final_state()
            .as_ket()
            .unwrap()
            .clone()
    };
    let reference = run(bound / 16.0);
    let e1 = (run(bound) - &reference).norm();
    let e2 = (run(bound / 2.0) - &reference).norm();
    let ratio = e1 / e2;
    assert!(e1 > 1e-9, "error {e1:e} too small to measure the order");
    assert!((ratio - 16.0).abs() < 1.6, "ratio {ratio}");
}

#[test]
fn lab_and_interaction_frames_agree_on_populations() {
    let p = sec4();
    let space = qubit_device_space(&p, 2).unwrap();
    let lab = build_lab_qubit_hamiltonian(&p, &space).unwrap();
    let int = build_interaction_qubit_hamiltonian(&p, &space).unwrap();
    assert!(lab.is_static());
    assert!(!int.is_static());

    let eg = space.index_of(&[1, 0, 0, 0, 0]).unwrap();
    let ge = space.index_of(&[0, 1, 0, 0, 0]).unwrap();
    let mut v = CVector::zeros(space.dim());
    v[eg] = C64::new(1.0, 0.0);
    v[ge] = C64::new(0.0, 1.0);
    let psi0 = QuantumState::normalized_ket(v).unwrap();

    let grid = TimeGrid::uniform(100e-9, 21).unwrap();
    let a = propagate_static_grid(&lab, &psi0, &grid).unwrap();
    let b = propagate_td(&int, &psi0, &grid, None).unwrap();
    let mut worst = 0.0f64;
    for (x, y) in a.states.iter().zip(&b.states) {
        for i in 0..space.dim() {
            worst = worst.max((x.population(i) - y.population(i)).abs());
        }
    }
    assert!(worst < 1e-7, "population mismatch {worst:e}");
    // the exchange actually moves population
    assert!(a.states.last().unwrap().population(eg) < 0.9);
}

#[test]
fn dark_mode_hamiltonian_conserves_excitations() {
    let p = preset("paper_sec3_fig3").unwrap().device().unwrap();
    let space = reduced_space(&p, 2, true).unwrap();
    let h = build_heff_prime(&p, &space).unwrap();
    let c = site_lowering(&space, RC, Transition::Ge).unwrap();
    let mut n: OperatorMatrix = &c.dagger() * &c;
    n = &n + &site_projector(&space, Q1, 1).unwrap();
    n = &n + &site_projector(&space, Q2, 2).unwrap();

    let ee = space.index_of(&[1, 1, 0]).unwrap();
    let eg = space.index_of(&[1, 0, 0]).unwrap();
    let mut v = CVector::zeros(space.dim());
    v[ee] = C64::new(1.0, 0.0);
    v[eg] = C64::new(0.6, -0.3);
    let psi0 = QuantumState::normalized_ket(v).unwrap();
    let n0 = expectation(&n, &psi0).unwrap();
    let grid = TimeGrid::uniform(2e-7, 41).unwrap();
    let traj = propagate_static_grid(&h, &psi0, &grid).unwrap();
    for s in &traj.states {
        let drift = (expectation(&n, s).unwrap() - n0).abs();
        assert!(drift < 1e-9, "drift {drift:e}");
    }
    assert!(h.commutator_residual(&n).unwrap() < 1e-9 * h.at(0.0).max_abs());
}
