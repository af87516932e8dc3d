// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Device parameters and every Hamiltonian / dissipator built from them.
//!
//! All frequencies are angular (rad/s) and all rates are in 1/s. Hamiltonians
//! are written in the interaction picture with respect to the bare mode
//! energies, so a coupling between levels with different bare frequencies
//! oscillates at their difference.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    hermitian_deviation, site_lowering, site_projector, CMatrix, CompositeSpace, ModeSpec, OperatorMatrix, Subspace,
    Transition, C64, Q1, Q2, RA, RB, RC, RF,
};

/// Physical parameters of the two-qutrit, three-mode device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_f: f64,
    pub omega1_ge: f64,
    pub omega1_es: f64,
    pub omega2_ge: f64,
    pub omega2_es: f64,
    pub g1_ge: f64,
    pub g2_ge: f64,
    pub gf_a: f64,
    pub gf_b: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub kappa_f: f64,
    pub gamma1_ge: f64,
    pub gamma2_ge: f64,
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("omega_f", self.omega_f),
            ("omega1_ge", self.omega1_ge),
            ("omega1_es", self.omega1_es),
            ("omega2_ge", self.omega2_ge),
            ("omega2_es", self.omega2_es),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [
            ("g1_ge", self.g1_ge),
            ("g2_ge", self.g2_ge),
            ("gf_a", self.gf_a),
            ("gf_b", self.gf_b),
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("kappa_f", self.kappa_f),
            ("gamma1_ge", self.gamma1_ge),
            ("gamma2_ge", self.gamma2_ge),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn g1_es(&self) -> f64 {
        SQRT_2 * self.g1_ge
    }

    pub fn g2_es(&self) -> f64 {
        SQRT_2 * self.g2_ge
    }

    pub fn gamma1_es(&self) -> f64 {
        2.0 * self.gamma1_ge
    }

    pub fn gamma2_es(&self) -> f64 {
        2.0 * self.gamma2_ge
    }

    /// Pure-dephasing rate of both excited levels of qutrit `l` (1 or 2).
    pub fn dephasing(&self, qutrit: usize) -> f64 {
        if qutrit == 1 {
            self.gamma1_ge
        } else {
            self.gamma2_ge
        }
    }

    pub fn anharmonicity1(&self) -> f64 {
        self.omega1_ge - self.omega1_es
    }

    pub fn anharmonicity2(&self) -> f64 {
        self.omega2_ge - self.omega2_es
    }

    pub fn delta1_ge(&self) -> f64 {
        self.omega1_ge - self.omega_a
    }

    pub fn delta1_es(&self) -> f64 {
        self.omega1_es - self.omega_a
    }

    pub fn delta2_ge(&self) -> f64 {
        self.omega2_ge - self.omega_b
    }

    pub fn delta2_es(&self) -> f64 {
        self.omega2_es - self.omega_b
    }

    pub fn delta_fa(&self) -> f64 {
        self.omega_f - self.omega_a
    }

    pub fn delta_fb(&self) -> f64 {
        self.omega_f - self.omega_b
    }

    /// Ratio of line coupling to the q1 coupling.
    pub fn delta_ratio(&self) -> f64 {
        self.gf_a / self.g1_ge
    }

    pub fn is_lossless(&self) -> bool {
        [self.kappa_a, self.kappa_b, self.kappa_f, self.gamma1_ge, self.gamma2_ge]
            .iter()
            .all(|&r| r == 0.0)
    }

    /// Same device with every loss channel switched off.
    pub fn lossless(&self) -> Self {
        Self {
            kappa_a: 0.0,
            kappa_b: 0.0,
            kappa_f: 0.0,
            gamma1_ge: 0.0,
            gamma2_ge: 0.0,
            ..*self
        }
    }

    /// Sets every decay and relaxation lifetime to `lifetime` seconds
    /// (`f64::INFINITY` disables loss).
    pub fn with_uniform_lifetime(&self, lifetime: f64) -> Self {
        let rate = lifetime_to_rate(lifetime);
        Self {
            kappa_a: rate,
            kappa_b: rate,
            kappa_f: rate,
            gamma1_ge: rate,
            gamma2_ge: rate,
            ..*self
        }
    }

    /// Symmetric line coupling `gf_a = gf_b = ratio * g1_ge`.
    pub fn with_delta_ratio(&self, ratio: f64) -> Self {
        Self {
            gf_a: ratio * self.g1_ge,
            gf_b: ratio * self.g1_ge,
            ..*self
        }
    }
}

pub fn lifetime_to_rate(lifetime: f64) -> f64 {
    if lifetime.is_infinite() {
        0.0
    } else {
        1.0 / lifetime
    }
}

/// The all-resonance operating point: q1's ge transition, q2's es
/// transition, both resonators and the line share one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllResonant {
    pub omega: f64,
    pub g1_ge: f64,
    pub g2_ge: f64,
    pub gf: f64,
    /// `omega_ge - omega_es`, shared by both qutrits.
    pub anharmonicity: f64,
    /// Common lifetime of every loss channel, seconds.
    pub lifetime: f64,
}

impl AllResonant {
    pub fn device(&self) -> Result<DeviceParams> {
        let rate = lifetime_to_rate(self.lifetime);
        let p = DeviceParams {
            omega_a: self.omega,
            omega_b: self.omega,
            omega_f: self.omega,
            omega1_ge: self.omega,
            omega1_es: self.omega - self.anharmonicity,
            omega2_ge: self.omega + self.anharmonicity,
            omega2_es: self.omega,
            g1_ge: self.g1_ge,
            g2_ge: self.g2_ge,
            gf_a: self.gf,
            gf_b: self.gf,
            kappa_a: rate,
            kappa_b: rate,
            kappa_f: rate,
            gamma1_ge: rate,
            gamma2_ge: rate,
        };
        p.validate()?;
        Ok(p)
    }
}

/// `[q1, q2, r_a, r_b, r_f]` with qutrits.
pub fn device_space(params: &DeviceParams, n_max: usize) -> Result<CompositeSpace> {
    CompositeSpace::new(vec![
        ModeSpec::qutrit(params.omega1_ge, params.omega1_es)?,
        ModeSpec::qutrit(params.omega2_ge, params.omega2_es)?,
        ModeSpec::boson(params.omega_a, n_max)?,
        ModeSpec::boson(params.omega_b, n_max)?,
        ModeSpec::boson(params.omega_f, n_max)?,
    ])
}

/// `[q1, q2, r_a, r_b, r_f]` with two-level qubits (ge transitions only).
pub fn qubit_device_space(params: &DeviceParams, n_max: usize) -> Result<CompositeSpace> {
    CompositeSpace::new(vec![
        ModeSpec::qubit(params.omega1_ge)?,
        ModeSpec::qubit(params.omega2_ge)?,
        ModeSpec::boson(params.omega_a, n_max)?,
        ModeSpec::boson(params.omega_b, n_max)?,
        ModeSpec::boson(params.omega_f, n_max)?,
    ])
}

/// `[q1, q2, C]`, the space left after eliminating the bright modes.
pub fn reduced_space(params: &DeviceParams, n_max: usize, qutrits: bool) -> Result<CompositeSpace> {
    let (q1, q2) = if qutrits {
        (
            ModeSpec::qutrit(params.omega1_ge, params.omega1_es)?,
            ModeSpec::qutrit(params.omega2_ge, params.omega2_es)?,
        )
    } else {
        (ModeSpec::qubit(params.omega1_ge)?, ModeSpec::qubit(params.omega2_ge)?)
    };
    CompositeSpace::new(vec![q1, q2, ModeSpec::boson(params.omega_a, n_max)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Qubit,
    Qutrit,
    Boson,
}

fn kind(m: &ModeSpec) -> Kind {
    match m {
        ModeSpec::Qubit { .. } => Kind::Qubit,
        ModeSpec::Qutrit { .. } => Kind::Qutrit,
        ModeSpec::Boson { .. } => Kind::Boson,
    }
}

fn require_layout(space: &CompositeSpace, layout: &[Kind]) -> Result<()> {
    if space.n_modes() != layout.len() {
        return Err(Error::DimensionMismatch {
            expected: layout.len(),
            found: space.n_modes(),
        });
    }
    for (site, (m, want)) in space.modes().iter().zip(layout).enumerate() {
        if kind(m) != *want {
            return Err(Error::param(
                "space",
                format!("site {site} must be {want:?}, found {:?}", kind(m)),
            ));
        }
    }
    Ok(())
}

const QUTRIT_DEVICE: [Kind; 5] = [Kind::Qutrit, Kind::Qutrit, Kind::Boson, Kind::Boson, Kind::Boson];
const QUBIT_DEVICE: [Kind; 5] = [Kind::Qubit, Kind::Qubit, Kind::Boson, Kind::Boson, Kind::Boson];

/// One term `c * O * exp(i * detuning * t)`, plus its Hermitian conjugate
/// when `paired`. Unpaired terms are Hermitian and static.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTerm {
    pub label: String,
    pub coefficient: C64,
    pub operator: OperatorMatrix,
    pub detuning: f64,
    pub paired: bool,
}

impl HamiltonianTerm {
    pub fn value_at(&self, t: f64) -> CMatrix {
        if self.paired {
            let phase = C64::from_polar(1.0, self.detuning * t);
            let m = self.operator.matrix() * (self.coefficient * phase);
            let adj = m.adjoint();
            m + adj
        } else {
            self.operator.matrix() * self.coefficient
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    dim: usize,
    terms: Vec<HamiltonianTerm>,
}

impl Hamiltonian {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    pub fn term(&self, label: &str) -> Option<&HamiltonianTerm> {
        self.terms.iter().find(|t| t.label == label)
    }

    fn check_dim(&self, op: &OperatorMatrix) -> Result<()> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: op.dim(),
            });
        }
        Ok(())
    }

    /// Adds `c * op * e^{i detuning t} + h.c.`.
    pub fn add_paired(&mut self, label: &str, coefficient: C64, op: OperatorMatrix, detuning: f64) -> Result<()> {
        self.check_dim(&op)?;
        if !detuning.is_finite() {
            return Err(Error::param(label, "detuning must be finite"));
        }
        self.terms.push(HamiltonianTerm {
            label: label.to_string(),
            coefficient,
            operator: op,
            detuning,
            paired: true,
        });
        Ok(())
    }

    /// Adds a static Hermitian term `c * op` with real `c`.
    pub fn add_hermitian(&mut self, label: &str, coefficient: f64, op: OperatorMatrix) -> Result<()> {
        self.check_dim(&op)?;
        if !op.is_hermitian() {
            return Err(Error::NotHermitian(hermitian_deviation(op.matrix())));
        }
        self.terms.push(HamiltonianTerm {
            label: label.to_string(),
            coefficient: C64::new(coefficient, 0.0),
            operator: op,
            detuning: 0.0,
            paired: false,
        });
        Ok(())
    }

    pub fn extend(&mut self, other: Hamiltonian) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        self.terms.extend(other.terms);
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.detuning == 0.0)
    }

    pub fn max_abs_detuning(&self) -> f64 {
        self.terms.iter().fold(0.0f64, |m, t| m.max(t.detuning.abs()))
    }

    /// The assembled Hermitian matrix at time `t`.
    pub fn at(&self, t: f64) -> OperatorMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for term in &self.terms {
            m += term.value_at(t);
        }
        OperatorMatrix::new(m)
    }

    /// Sum of the zero-detuning terms.
    pub fn static_part(&self) -> OperatorMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for term in self.terms.iter().filter(|t| t.detuning == 0.0) {
            m += term.value_at(0.0);
        }
        OperatorMatrix::new(m)
    }

    pub fn with_detunings_zeroed(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.detuning = 0.0;
        }
        out
    }

    pub fn without_detuned_terms(&self) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().filter(|t| t.detuning == 0.0).cloned().collect(),
        }
    }

    pub fn restrict(&self, subspace: &Subspace) -> Result<Self> {
        if subspace.full_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: subspace.full_dim(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                Ok(HamiltonianTerm {
                    operator: subspace.restrict_operator(&t.operator)?,
                    ..t.clone()
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            dim: subspace.dim(),
            terms,
        })
    }

    /// Largest `|[T, N]|` entry over all term operators.
    pub fn commutator_residual(&self, op: &OperatorMatrix) -> Result<f64> {
        self.check_dim(op)?;
        Ok(self
            .terms
            .iter()
            .map(|t| t.operator.commutator(op).max_abs())
            .fold(0.0, f64::max))
    }
}

/// Collapse operator `L` with rate `gamma`, entering as `gamma * D[L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    pub label: String,
    rate: f64,
    operator: OperatorMatrix,
}

impl LindbladChannel {
    pub fn new(label: &str, rate: f64, operator: OperatorMatrix) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::param(label, format!("rate must be finite and >= 0, got {rate}")));
        }
        Ok(Self {
            label: label.to_string(),
            rate,
            operator,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.operator
    }

    pub fn restrict(&self, subspace: &Subspace) -> Result<Self> {
        Ok(Self {
            label: self.label.clone(),
            rate: self.rate,
            operator: subspace.restrict_operator(&self.operator)?,
        })
    }
}

struct DeviceOps {
    a: OperatorMatrix,
    b: OperatorMatrix,
    f: OperatorMatrix,
    s1_ge: OperatorMatrix,
    s1_es: OperatorMatrix,
    s2_ge: OperatorMatrix,
    s2_es: OperatorMatrix,
}

impl DeviceOps {
    fn new(space: &CompositeSpace) -> Result<Self> {
        Ok(Self {
            a: site_lowering(space, RA, Transition::Ge)?,
            b: site_lowering(space, RB, Transition::Ge)?,
            f: site_lowering(space, RF, Transition::Ge)?,
            s1_ge: site_lowering(space, Q1, Transition::Ge)?,
            s1_es: site_lowering(space, Q1, Transition::Es)?,
            s2_ge: site_lowering(space, Q2, Transition::Ge)?,
            s2_es: site_lowering(space, Q2, Transition::Es)?,
        })
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `mode * sigma^+`: absorbs a photon, excites the transition.
fn absorb(mode: &OperatorMatrix, sigma_minus: &OperatorMatrix) -> OperatorMatrix {
    mode * &sigma_minus.dagger()
}

/// `f^+ * mode`: moves a photon from the resonator into the line.
fn hop(f: &OperatorMatrix, mode: &OperatorMatrix) -> OperatorMatrix {
    &f.dagger() * mode
}

/// Lab-frame (Schrödinger picture) Hamiltonian of the two-level device.
pub fn build_lab_qubit_hamiltonian(params: &DeviceParams, space: &CompositeSpace) -> Result<Hamiltonian> {
    params.validate()?;
    require_layout(space, &QUBIT_DEVICE)?;
    let ops = DeviceOps::new(space)?;
    let mut h = Hamiltonian::new(space.dim());
    h.add_hermitian("omega_a", params.omega_a, &ops.a.dagger() * &ops.a)?;
    h.add_hermitian("omega_b", params.omega_b, &ops.b.dagger() * &ops.b)?;
    h.add_hermitian("omega_f", params.omega_f, &ops.f.dagger() * &ops.f)?;
    h.add_hermitian("omega1", params.omega1_ge, &ops.s1_ge.dagger() * &ops.s1_ge)?;
    h.add_hermitian("omega2", params.omega2_ge, &ops.s2_ge.dagger() * &ops.s2_ge)?;
    h.add_paired("g1", real(params.g1_ge), absorb(&ops.a, &ops.s1_ge), 0.0)?;
    h.add_paired("g2", real(params.g2_ge), absorb(&ops.b, &ops.s2_ge), 0.0)?;
    h.add_paired("gf_a", real(params.gf_a), hop(&ops.f, &ops.a), 0.0)?;
    h.add_paired("gf_b", real(params.gf_b), hop(&ops.f, &ops.b), 0.0)?;
    Ok(h)
}

/// Interaction-picture counterpart of [`build_lab_qubit_hamiltonian`].
pub fn build_interaction_qubit_hamiltonian(params: &DeviceParams, space: &CompositeSpace) -> Result<Hamiltonian> {
    params.validate()?;
    require_layout(space, &QUBIT_DEVICE)?;
    let ops = DeviceOps::new(space)?;
    let mut h = Hamiltonian::new(space.dim());
    h.add_paired("g1", real(params.g1_ge), absorb(&ops.a, &ops.s1_ge), params.delta1_ge())?;
    h.add_paired("g2", real(params.g2_ge), absorb(&ops.b, &ops.s2_ge), params.delta2_ge())?;
    h.add_paired("gf_a", real(params.gf_a), hop(&ops.f, &ops.a), params.delta_fa())?;
    h.add_paired("gf_b", real(params.gf_b), hop(&ops.f, &ops.b), params.delta_fb())?;
    Ok(h)
}

/// Full interaction-picture qutrit Hamiltonian: both transitions of both
/// qutrits couple to their resonator, each at its own detuning.
pub fn build_h2q(params: &DeviceParams, space: &CompositeSpace) -> Result<Hamiltonian> {
    params.validate()?;
    require_layout(space, &QUTRIT_DEVICE)?;
    let ops = DeviceOps::new(space)?;
    let mut h = Hamiltonian::new(space.dim());
    h.add_paired(
        "g1_ge",
        real(params.g1_ge),
        absorb(&ops.a, &ops.s1_ge),
        params.delta1_ge(),
    )?;
    h.add_paired(
        "g1_es",
        real(params.g1_es()),
        absorb(&ops.a, &ops.s1_es),
        params.delta1_es(),
    )?;
    h.add_paired(
        "g2_ge",
        real(params.g2_ge),
        absorb(&ops.b, &ops.s2_ge),
        params.delta2_ge(),
    )?;
    h.add_paired(
        "g2_es",
        real(params.g2_es()),
        absorb(&ops.b, &ops.s2_es),
        params.delta2_es(),
    )?;
    h.add_paired("gf_a", real(params.gf_a), hop(&ops.f, &ops.a), params.delta_fa())?;
    h.add_paired("gf_b", real(params.gf_b), hop(&ops.f, &ops.b), params.delta_fb())?;
    Ok(h)
}

/// Resonant part only: q1-ge, q2-es and the two line couplings, static.
pub fn build_h2q_resonant(params: &DeviceParams, space: &CompositeSpace) -> Result<Hamiltonian> {
    params.validate()?;
    require_layout(space, &QUTRIT_DEVICE)?;
    let ops = DeviceOps::new(space)?;
    let mut h = Hamiltonian::new(space.dim());
    h.add_paired("g1_ge", real(params.g1_ge), absorb(&ops.a, &ops.s1_ge), 0.0)?;
    h.add_paired("g2_es", real(params.g2_es()), absorb(&ops.b, &ops.s2_es), 0.0)?;
    h.add_paired("gf_a", real(params.gf_a), hop(&ops.f, &ops.a), 0.0)?;
    h.add_paired("gf_b", real(params.gf_b), hop(&ops.f, &ops.b), 0.0)?;
    Ok(h)
}

/// The two off-resonant couplings dropped from [`build_h2q_resonant`]:
/// q1's es transition with `r_a` and q2's ge transition with `r_b`.
pub fn build_unresonant_corrections(params: &DeviceParams, space: &CompositeSpace) -> Result<Hamiltonian> {
    params.validate()?;
    require_layout(space, &QUTRIT_DEVICE)?;
    let ops = DeviceOps::new(space)?;
    let mut h = Hamiltonian::new(space.dim());
    h.add_paired(
        "g1_es",
        real(params.g1_es()),
        absorb(&ops.a, &ops.s1_es),
        params.delta1_es(),
    )?;
    h.add_paired(
        "g2_ge",
        real(params.g2_ge),
        absorb(&ops.b, &ops.s2_ge),
        params.delta2_ge(),
    )?;
    Ok(h)
}

/// Dark-mode effective Hamiltonian on `[q1, q2, C]` with two-level qubits.
pub fn build_heff(params: &DeviceParams, space: &CompositeSpace) -> Result<Hamiltonian> {
    params.validate()?;
    require_layout(space, &[Kind::Qubit, Kind::Qubit, Kind::Boson])?;
    let c = site_lowering(space, RC, Transition::Ge)?;
    let s1 = site_lowering(space, Q1, Transition::Ge)?;
    let s2 = site_lowering(space, Q2, Transition::Ge)?;
    let mut h = Hamiltonian::new(space.dim());
    h.add_paired("g1", real(params.g1_ge / SQRT_2), absorb(&c, &s1), 0.0)?;
    h.add_paired("g2", real(-params.g2_ge / SQRT_2), absorb(&c, &s2), 0.0)?;
    Ok(h)
}

/// Dark-mode effective Hamiltonian on `[q1, q2, C]` with qutrits: q1 couples
/// through ge, q2 through es.
pub fn build_heff_prime(params: &DeviceParams, space: &CompositeSpace) -> Result<Hamiltonian> {
    params.validate()?;
    require_layout(space, &[Kind::Qutrit, Kind::Qutrit, Kind::Boson])?;
    let c = site_lowering(space, RC, Transition::Ge)?;
    let s1 = site_lowering(space, Q1, Transition::Ge)?;
    let s2 = site_lowering(space, Q2, Transition::Es)?;
    let mut h = Hamiltonian::new(space.dim());
    h.add_paired("g1_ge", real(params.g1_ge / SQRT_2), absorb(&c, &s1), 0.0)?;
    h.add_paired("g2_es", real(-params.g2_es() / SQRT_2), absorb(&c, &s2), 0.0)?;
    Ok(h)
}

/// Photon loss of the three modes plus relaxation and pure dephasing of both
/// qutrits. Zero-rate channels are kept so the list shape never changes.
pub fn build_lindblad_channels(params: &DeviceParams, space: &CompositeSpace) -> Result<Vec<LindbladChannel>> {
    params.validate()?;
    require_layout(space, &QUTRIT_DEVICE)?;
    let ops = DeviceOps::new(space)?;
    let mut out = vec![
        LindbladChannel::new("kappa_a", params.kappa_a, ops.a)?,
        LindbladChannel::new("kappa_b", params.kappa_b, ops.b)?,
        LindbladChannel::new("kappa_f", params.kappa_f, ops.f)?,
        LindbladChannel::new("gamma1_ge", params.gamma1_ge, ops.s1_ge)?,
        LindbladChannel::new("gamma1_es", params.gamma1_es(), ops.s1_es)?,
        LindbladChannel::new("gamma2_ge", params.gamma2_ge, ops.s2_ge)?,
        LindbladChannel::new("gamma2_es", params.gamma2_es(), ops.s2_es)?,
    ];
    for (qutrit, site) in [(1, Q1), (2, Q2)] {
        let rate = params.dephasing(qutrit);
        out.push(LindbladChannel::new(
            &format!("dephasing{qutrit}_e"),
            rate,
            site_projector(space, site, 1)?,
        )?);
        out.push(LindbladChannel::new(
            &format!("dephasing{qutrit}_s"),
            rate,
            site_projector(space, site, 2)?,
        )?);
    }
    Ok(out)
}
