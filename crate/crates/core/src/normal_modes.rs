// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Collective modes of the resonator/line triplet.
//!
//! With equal frequencies and equal line couplings `g`, the modes
//! `C± = (a + b ± √2 f)/2` sit at `ω ± √2 g` and `C = (a − b)/√2` stays at
//! `ω` with no line component.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use nalgebra::{Matrix3, SymmetricEigen};
use serde::Serialize;

use crate::dynamics::{expectation, QuantumState};
use crate::error::{Error, Result};
use crate::hilbert::{
    site_lowering, CompositeSpace, ModeSpec, OperatorMatrix, Subspace, Transition, C64, Q1, Q2, RA, RB, RF,
};
use crate::model::{build_lab_qubit_hamiltonian, qubit_device_space, DeviceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BareMode {
    A,
    B,
    F,
}

/// Rows are `(C₊, C₋, C)`, columns `(a, b, f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    t: Matrix3<f64>,
}

impl Default for ModeTransform {
    fn default() -> Self {
        Self::new()
    }
}

impl ModeTransform {
    pub fn new() -> Self {
        let h = 0.5;
        let r = FRAC_1_SQRT_2;
        Self {
            t: Matrix3::new(h, h, r, h, h, -r, r, -r, 0.0),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.t
    }

    /// `max |T Tᵀ − I|`.
    pub fn unitarity_error(&self) -> f64 {
        (self.t * self.t.transpose() - Matrix3::identity()).abs().max()
    }

    /// Coefficients of a bare mode over `(C₊, C₋, C)`.
    pub fn transform_operator(&self, mode: BareMode) -> [f64; 3] {
        let col = match mode {
            BareMode::A => 0,
            BareMode::B => 1,
            BareMode::F => 2,
        };
        [self.t[(0, col)], self.t[(1, col)], self.t[(2, col)]]
    }
}

/// Embedded collective operators of a five-site device space.
#[derive(Debug, Clone)]
pub struct CollectiveModes {
    pub a: OperatorMatrix,
    pub b: OperatorMatrix,
    pub f: OperatorMatrix,
    pub c_plus: OperatorMatrix,
    pub c_minus: OperatorMatrix,
    pub c: OperatorMatrix,
}

fn combine(coeffs: [f64; 3], ops: [&OperatorMatrix; 3]) -> OperatorMatrix {
    let m = ops[0].matrix() * C64::new(coeffs[0], 0.0)
        + ops[1].matrix() * C64::new(coeffs[1], 0.0)
        + ops[2].matrix() * C64::new(coeffs[2], 0.0);
    OperatorMatrix::new(m)
}

fn number(op: &OperatorMatrix) -> OperatorMatrix {
    &op.dagger() * op
}

impl CollectiveModes {
    pub fn new(space: &CompositeSpace) -> Result<Self> {
        if space.n_modes() != 5 {
            return Err(Error::DimensionMismatch {
                expected: 5,
                found: space.n_modes(),
            });
        }
        for site in [RA, RB, RF] {
            if !matches!(space.mode(site)?, ModeSpec::Boson { .. }) {
                return Err(Error::param("space", format!("site {site} must be bosonic")));
            }
        }
        let a = site_lowering(space, RA, Transition::Ge)?;
        let b = site_lowering(space, RB, Transition::Ge)?;
        let f = site_lowering(space, RF, Transition::Ge)?;
        let t = ModeTransform::new();
        let row = |k: usize| [t.matrix()[(k, 0)], t.matrix()[(k, 1)], t.matrix()[(k, 2)]];
        let c_plus = combine(row(0), [&a, &b, &f]);
        let c_minus = combine(row(1), [&a, &b, &f]);
        let c = combine(row(2), [&a, &b, &f]);
        Ok(Self {
            a,
            b,
            f,
            c_plus,
            c_minus,
            c,
        })
    }

    pub fn populations(&self, state: &QuantumState) -> Result<ModePopulations> {
        Ok(ModePopulations {
            c_plus: expectation(&number(&self.c_plus), state)?,
            c_minus: expectation(&number(&self.c_minus), state)?,
            c: expectation(&number(&self.c), state)?,
            f: expectation(&number(&self.f), state)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModePopulations {
    pub c_plus: f64,
    pub c_minus: f64,
    pub c: f64,
    pub f: f64,
}

/// `⟨C₊⁺C₊⟩, ⟨C₋⁺C₋⟩, ⟨C⁺C⟩, ⟨f⁺f⟩` of a state on the full device space.
pub fn mode_populations(state: &QuantumState, space: &CompositeSpace) -> Result<ModePopulations> {
    CollectiveModes::new(space)?.populations(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HDoublePrimeReport {
    /// `max |H'' − H'| / max |H'|` on total excitation ≤ 1.
    pub residual_n1: f64,
    /// Same on total excitation ≤ 2.
    pub residual_n2: f64,
    /// `(ω − √2g, ω, ω + √2g)` read from the collective Hamiltonian.
    pub collective_frequencies: [f64; 3],
    /// Eigenvalues of the single-photon block of the bare mode Hamiltonian.
    pub bosonic_spectrum: [f64; 3],
    /// `max |spectrum − collective| / max(g, ω·ε)`, with `ε` machine epsilon.
    pub spectrum_error: f64,
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
}

fn max_abs_diff(a: &OperatorMatrix, b: &OperatorMatrix, sub: &Subspace) -> f64 {
    let d = sub.restrict_matrix(a.matrix()) - sub.restrict_matrix(b.matrix());
    d.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Builds the collective-mode Hamiltonian directly and compares it with the
/// Schrödinger-picture two-level device Hamiltonian.
pub fn verify_h_double_prime(params: &DeviceParams) -> Result<HDoublePrimeReport> {
    params.validate()?;
    let w = params.omega_a;
    let freqs = [params.omega_b, params.omega_f, params.omega1_ge, params.omega2_ge];
    if !freqs.iter().all(|&x| close(x, w)) {
        return Err(Error::param(
            "params",
            "all-resonance requires equal mode and qubit frequencies",
        ));
    }
    if !close(params.gf_a, params.gf_b) {
        return Err(Error::param("params", "requires gf_a == gf_b"));
    }
    let g = params.gf_a;
    let space = qubit_device_space(params, 2)?;
    let h_prime = build_lab_qubit_hamiltonian(params, &space)?.at(0.0);

    let modes = CollectiveModes::new(&space)?;
    let s1 = site_lowering(&space, Q1, Transition::Ge)?;
    let s2 = site_lowering(&space, Q2, Transition::Ge)?;
    let r = |x: f64| C64::new(x, 0.0);
    let collective_frequencies = [w - SQRT_2 * g, w, w + SQRT_2 * g];

    let mut hpp = number(&s1).matrix() * r(w) + number(&s2).matrix() * r(w);
    hpp += number(&modes.c).matrix() * r(w);
    hpp += number(&modes.c_plus).matrix() * r(collective_frequencies[2]);
    hpp += number(&modes.c_minus).matrix() * r(collective_frequencies[0]);
    let couple = |gq: f64, sign: f64, s: &OperatorMatrix| {
        let field = modes.c_plus.matrix() + modes.c_minus.matrix() + modes.c.matrix() * r(sign * SQRT_2);
        let up = field * s.dagger().matrix() * r(0.5 * gq);
        &up + up.adjoint()
    };
    hpp += couple(params.g1_ge, 1.0, &s1);
    hpp += couple(params.g2_ge, -1.0, &s2);
    let hpp = OperatorMatrix::new(hpp);

    let scale = h_prime.max_abs();
    let residual_n1 = max_abs_diff(&hpp, &h_prime, &space.excitation_subspace(1)) / scale;
    let residual_n2 = max_abs_diff(&hpp, &h_prime, &space.excitation_subspace(2)) / scale;

    // single photon in (a, b, f), shifted by ω so the splitting is resolved at
    // the scale of g
    let block = Matrix3::new(
        0.0,
        0.0,
        params.gf_a,
        0.0,
        0.0,
        params.gf_b,
        params.gf_a,
        params.gf_b,
        0.0,
    );
    let mut ev: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let offsets = [-SQRT_2 * g, 0.0, SQRT_2 * g];
    let unit = g.max(w * f64::EPSILON);
    let spectrum_error = ev
        .iter()
        .zip(offsets)
        .fold(0.0f64, |m, (e, o)| m.max((e - o).abs() / unit));

    Ok(HDoublePrimeReport {
        residual_n1,
        residual_n2,
        collective_frequencies,
        bosonic_spectrum: [w + ev[0], w + ev[1], w + ev[2]],
        spectrum_error,
    })
}
