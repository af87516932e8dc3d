// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Propagators for kets and density matrices.
//!
//! * [`propagate_static`]: exact `exp(-iHt)` from a Hermitian eigendecomposition.
//! * [`propagate_td`]: fixed-step classical RK4 for `i dψ/dt = H(t) ψ`.
//! * [`propagate_lindblad`]: fixed-step RK4 on the density matrix itself,
//!   `dρ/dt = -i[H, ρ] + Σ γ D[L]ρ`.
//! * [`propagate_rotating_frame`]: exact propagation of an interaction-picture
//!   Hamiltonian whose detunings all come from a diagonal frame.

use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::hilbert::{hermitian_deviation, CMatrix, CVector, OperatorMatrix, C64, ONE, ZERO};
use crate::model::{Hamiltonian, LindbladChannel};

pub const KET_NORM_TOL: f64 = 1e-9;
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-8;
pub const DENSITY_POSITIVITY_TOL: f64 = 1e-8;

/// Steps per period of the fastest frequency in the problem.
pub const STEPS_PER_FASTEST_PERIOD: f64 = 50.0;

const MINUS_I: C64 = C64::new(0.0, -1.0);

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Ket(CVector),
    Density(CMatrix),
}

impl QuantumState {
    /// A ket that must already be normalized.
    pub fn ket(v: CVector) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::InvalidState(format!("ket norm {n} differs from 1")));
        }
        Ok(QuantumState::Ket(v))
    }

    pub fn normalized_ket(v: CVector) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(QuantumState::Ket(v / C64::new(n, 0.0)))
    }

    pub fn density(m: CMatrix) -> Result<Self> {
        let s = QuantumState::Density(m);
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Ket(v) => v.len(),
            QuantumState::Density(m) => m.nrows(),
        }
    }

    pub fn as_ket(&self) -> Option<&CVector> {
        match self {
            QuantumState::Ket(v) => Some(v),
            QuantumState::Density(_) => None,
        }
    }

    pub fn as_density(&self) -> Option<&CMatrix> {
        match self {
            QuantumState::Density(m) => Some(m),
            QuantumState::Ket(_) => None,
        }
    }

    pub fn to_density(&self) -> CMatrix {
        match self {
            QuantumState::Ket(v) => v * v.adjoint(),
            QuantumState::Density(m) => m.clone(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            QuantumState::Ket(v) => v.norm(),
            QuantumState::Density(m) => m.trace().re,
        }
    }

    /// Smallest eigenvalue of the density matrix (0 for a ket).
    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            QuantumState::Ket(_) => 0.0,
            QuantumState::Density(m) => {
                let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
                SymmetricEigen::new(sym)
                    .eigenvalues
                    .iter()
                    .fold(f64::INFINITY, |a, &b| a.min(b))
            }
        }
    }

    /// Population of one basis state.
    pub fn population(&self, index: usize) -> f64 {
        match self {
            QuantumState::Ket(v) => v[index].norm_sqr(),
            QuantumState::Density(m) => m[(index, index)].re,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            QuantumState::Ket(v) => {
                let n = v.norm();
                if (n - 1.0).abs() > KET_NORM_TOL {
                    return Err(Error::InvalidState(format!("ket norm {n} differs from 1")));
                }
            }
            QuantumState::Density(m) => {
                if !m.is_square() {
                    return Err(Error::InvalidState("density matrix must be square".into()));
                }
                let h = hermitian_deviation(m);
                if h > DENSITY_HERMITIAN_TOL {
                    return Err(Error::InvalidState(format!("density matrix not Hermitian ({h:e})")));
                }
                let tr = m.trace();
                if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
                    return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
                }
                let min = self.min_eigenvalue();
                if min < -DENSITY_POSITIVITY_TOL {
                    return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
                }
            }
        }
        Ok(())
    }
}

/// `<A>` for a Hermitian `A`.
pub fn expectation(op: &OperatorMatrix, state: &QuantumState) -> Result<f64> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: state.dim(),
        });
    }
    if !op.is_hermitian() {
        return Err(Error::NotHermitian(hermitian_deviation(op.matrix())));
    }
    let value = match state {
        QuantumState::Ket(v) => v.dotc(&(op.matrix() * v)),
        QuantumState::Density(r) => (op.matrix() * r).trace(),
    };
    let scale = 1.0 + value.re.abs();
    if value.im.abs() > 1e-10 * scale {
        return Err(Error::Invariant(format!(
            "expectation of a Hermitian operator has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Output times of a propagation, strictly increasing and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    /// `points` samples from 0 to `t_final` inclusive.
    pub fn uniform(t_final: f64, points: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::param("t_final", "must be finite and > 0"));
        }
        if points < 2 {
            return Err(Error::param("points", "need at least two samples"));
        }
        let last = (points - 1) as f64;
        Self::from_times((0..points).map(|k| t_final * k as f64 / last).collect())
    }

    /// `points` samples across `[from, to]`.
    pub fn linspace(from: f64, to: f64, points: usize) -> Result<Self> {
        if points < 2 || !(to > from) {
            return Err(Error::param("grid", "need points >= 2 and to > from"));
        }
        let last = (points - 1) as f64;
        Self::from_times((0..points).map(|k| from + (to - from) * k as f64 / last).collect())
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::param("times", "time grid is empty"));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::param("times", "times must be finite and >= 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("times", "times must be strictly increasing"));
        }
        Ok(Self(times))
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn last(&self) -> f64 {
        *self.0.last().expect("non-empty grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            observables: BTreeMap::new(),
        }
    }

    fn record(&mut self, t: f64, state: QuantumState) {
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables.get(name).map(Vec::as_slice)
    }

    /// Computes and stores a named series from the sampled states.
    pub fn observe<F: FnMut(&QuantumState) -> f64>(&mut self, name: &str, mut f: F) -> &[f64] {
        let series = self.states.iter().map(&mut f).collect();
        self.observables.insert(name.to_string(), series);
        &self.observables[name]
    }

    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectory holds at least one sample")
    }

    /// Largest absolute value of an observable series.
    pub fn max_abs(&self, name: &str) -> Option<f64> {
        self.observable(name)
            .map(|s| s.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }
}

/// Exact propagator of a static Hamiltonian.
#[derive(Debug, Clone)]
pub struct StaticPropagator {
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl StaticPropagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        if !h.is_static() {
            return Err(Error::param("hamiltonian", "static propagation needs zero detunings"));
        }
        Self::from_matrix(&h.at(0.0))
    }

    pub fn from_matrix(h: &OperatorMatrix) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian(hermitian_deviation(h.matrix())));
        }
        let eig = SymmetricEigen::new(h.matrix().clone());
        Ok(Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        let phases = CVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|&e| C64::from_polar(1.0, -e * t)),
        );
        let scaled = CMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * phases[j]
        });
        scaled * self.vectors.adjoint()
    }

    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        if state.dim() != self.energies.len() {
            return Err(Error::DimensionMismatch {
                expected: self.energies.len(),
                found: state.dim(),
            });
        }
        Ok(match state {
            QuantumState::Ket(v) => {
                let mut c = self.vectors.ad_mul(v);
                for (ci, &e) in c.iter_mut().zip(&self.energies) {
                    *ci *= C64::from_polar(1.0, -e * t);
                }
                QuantumState::Ket(&self.vectors * c)
            }
            QuantumState::Density(r) => {
                let u = self.unitary(t);
                QuantumState::Density(&u * r * u.adjoint())
            }
        })
    }
}

/// `exp(-iHt) ψ0` for a static Hermitian `H`.
pub fn propagate_static(h: &Hamiltonian, psi0: &QuantumState, t: f64) -> Result<QuantumState> {
    StaticPropagator::new(h)?.evolve(psi0, t)
}

pub fn propagate_static_grid(h: &Hamiltonian, psi0: &QuantumState, grid: &TimeGrid) -> Result<Trajectory> {
    let prop = StaticPropagator::new(h)?;
    let mut traj = Trajectory::with_capacity(grid.times().len());
    for &t in grid.times() {
        traj.record(t, prop.evolve(psi0, t)?);
    }
    Ok(traj)
}

/// `H(t) = S + Σ_k (A_k e^{iδ_k t} + h.c.)` with terms grouped by detuning.
#[derive(Debug, Clone)]
struct CompiledHamiltonian {
    fixed: CMatrix,
    oscillating: Vec<(f64, CMatrix)>,
}

impl CompiledHamiltonian {
    fn new(h: &Hamiltonian) -> Self {
        let n = h.dim();
        let mut fixed = CMatrix::zeros(n, n);
        let mut oscillating: Vec<(f64, CMatrix)> = Vec::new();
        for term in h.terms() {
            if term.detuning == 0.0 || !term.paired {
                fixed += term.value_at(0.0);
                continue;
            }
            let a = term.operator.matrix() * term.coefficient;
            match oscillating.iter_mut().find(|(d, _)| *d == term.detuning) {
                Some((_, acc)) => *acc += a,
                None => oscillating.push((term.detuning, a)),
            }
        }
        Self { fixed, oscillating }
    }

    fn write_at(&self, t: f64, out: &mut CMatrix) {
        out.copy_from(&self.fixed);
        let n = out.nrows();
        for (detuning, a) in &self.oscillating {
            let phase = C64::from_polar(1.0, detuning * t);
            for j in 0..n {
                for i in 0..n {
                    let v = a[(i, j)];
                    if v != ZERO {
                        let z = v * phase;
                        out[(i, j)] += z;
                        out[(j, i)] += z.conj();
                    }
                }
            }
        }
    }
}

/// Fastest angular frequency: largest detuning plus the spectral norm of the
/// static part.
pub fn fastest_frequency(h: &Hamiltonian) -> f64 {
    h.max_abs_detuning() + h.static_part().spectral_norm()
}

/// Largest admissible fixed step for `h`.
pub fn max_step(h: &Hamiltonian) -> f64 {
    let w = fastest_frequency(h);
    if w == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (STEPS_PER_FASTEST_PERIOD * w)
    }
}

fn resolve_step(h: &Hamiltonian, dt: Option<f64>, horizon: f64) -> Result<f64> {
    let bound = max_step(h);
    match dt {
        Some(dt) => {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::param("dt", "must be finite and > 0"));
            }
            if dt > bound * (1.0 + 1e-12) {
                return Err(Error::StepTooLarge { dt, bound });
            }
            Ok(dt)
        }
        None if bound.is_finite() => Ok(bound),
        // no dynamics at all; any single step per interval is exact
        None => Ok(horizon.max(f64::MIN_POSITIVE)),
    }
}

fn steps_between(t0: f64, t1: f64, dt: f64) -> usize {
    (((t1 - t0) / dt) - 1e-9).ceil().max(1.0) as usize
}

/// Classical RK4 for `i dψ/dt = H(t) ψ`. The norm is never rescaled; its
/// drift is reported as the `norm_error` observable and fails the run above
/// [`KET_NORM_TOL`].
pub fn propagate_td(h: &Hamiltonian, psi0: &QuantumState, grid: &TimeGrid, dt: Option<f64>) -> Result<Trajectory> {
    let QuantumState::Ket(psi0) = psi0 else {
        return Err(Error::InvalidState("propagate_td expects a ket".into()));
    };
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi0.len(),
        });
    }
    let dt = resolve_step(h, dt, grid.last())?;
    let compiled = CompiledHamiltonian::new(h);
    let n = h.dim();
    let mut h0 = CMatrix::zeros(n, n);
    let mut hmid = CMatrix::zeros(n, n);
    let mut h1 = CMatrix::zeros(n, n);

    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut traj = Trajectory::with_capacity(grid.times().len());
    let mut norm_error = Vec::with_capacity(grid.times().len());

    let mut k1 = CVector::zeros(n);
    let mut k2 = CVector::zeros(n);
    let mut k3 = CVector::zeros(n);
    let mut k4 = CVector::zeros(n);
    let mut tmp = CVector::zeros(n);

    for &target in grid.times() {
        if target > t {
            let steps = steps_between(t, target, dt);
            let step = (target - t) / steps as f64;
            let half = C64::new(0.5 * step, 0.0);
            let full = C64::new(step, 0.0);
            let sixth = C64::new(step / 6.0, 0.0);
            for s in 0..steps {
                let ts = t + s as f64 * step;
                compiled.write_at(ts, &mut h0);
                compiled.write_at(ts + 0.5 * step, &mut hmid);
                compiled.write_at(ts + step, &mut h1);

                k1.gemv(MINUS_I, &h0, &psi, ZERO);
                tmp.copy_from(&psi);
                tmp.axpy(half, &k1, ONE);
                k2.gemv(MINUS_I, &hmid, &tmp, ZERO);
                tmp.copy_from(&psi);
                tmp.axpy(half, &k2, ONE);
                k3.gemv(MINUS_I, &hmid, &tmp, ZERO);
                tmp.copy_from(&psi);
                tmp.axpy(full, &k3, ONE);
                k4.gemv(MINUS_I, &h1, &tmp, ZERO);

                psi.axpy(sixth, &k1, ONE);
                psi.axpy(sixth * 2.0, &k2, ONE);
                psi.axpy(sixth * 2.0, &k3, ONE);
                psi.axpy(sixth, &k4, ONE);
            }
            t = target;
        }
        let drift = (psi.norm() - 1.0).abs();
        if drift > KET_NORM_TOL {
            return Err(Error::Invariant(format!("norm drift {drift:e} at t = {target:e} s")));
        }
        norm_error.push(drift);
        traj.record(target, QuantumState::Ket(psi.clone()));
    }
    traj.observables.insert("norm_error".into(), norm_error);
    Ok(traj)
}

/// Nonzero entries of `sqrt(γ) L`.
#[derive(Debug, Clone)]
struct SparseJump {
    entries: Vec<(usize, usize, C64)>,
}

#[derive(Debug, Clone)]
struct LindbladGenerator {
    hamiltonian: CompiledHamiltonian,
    /// `-i/2 Σ γ L^† L`
    anti_hermitian: CMatrix,
    jumps: Vec<SparseJump>,
    /// Every `(i, k)` where `H_eff(t)` can be nonzero.
    pattern: Vec<(usize, usize)>,
}

impl LindbladGenerator {
    fn new(h: &Hamiltonian, channels: &[LindbladChannel]) -> Result<Self> {
        let n = h.dim();
        let mut loss = CMatrix::zeros(n, n);
        let mut jumps = Vec::new();
        for ch in channels.iter().filter(|c| c.rate() > 0.0) {
            let l = ch.operator().matrix();
            if l.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: l.nrows(),
                });
            }
            let rate = C64::new(ch.rate(), 0.0);
            loss += (l.adjoint() * l) * rate;
            let amp = C64::new(ch.rate().sqrt(), 0.0);
            let mut entries = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    if l[(i, j)] != ZERO {
                        entries.push((i, j, l[(i, j)] * amp));
                    }
                }
            }
            jumps.push(SparseJump { entries });
        }
        let hamiltonian = CompiledHamiltonian::new(h);
        let anti_hermitian = loss * C64::new(0.0, -0.5);
        let mut pattern = Vec::new();
        for k in 0..n {
            for i in 0..n {
                let live = hamiltonian.fixed[(i, k)] != ZERO
                    || anti_hermitian[(i, k)] != ZERO
                    || hamiltonian
                        .oscillating
                        .iter()
                        .any(|(_, a)| a[(i, k)] != ZERO || a[(k, i)] != ZERO);
                if live {
                    pattern.push((i, k));
                }
            }
        }
        Ok(Self {
            hamiltonian,
            anti_hermitian,
            jumps,
            pattern,
        })
    }

    fn effective_at(&self, t: f64, out: &mut CMatrix) {
        self.hamiltonian.write_at(t, out);
        *out += &self.anti_hermitian;
    }

    /// `out = -i H_eff ρ + i ρ H_eff^† + Σ L ρ L^†`, using `ρ = ρ^†`.
    fn rhs(&self, heff: &CMatrix, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix, values: &mut Vec<C64>) {
        values.clear();
        values.extend(self.pattern.iter().map(|&(i, k)| heff[(i, k)] * MINUS_I));
        scratch.fill(ZERO);
        let n = rho.nrows();
        for j in 0..n {
            for (&(i, k), &h) in self.pattern.iter().zip(values.iter()) {
                scratch[(i, j)] += h * rho[(k, j)];
            }
        }
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] = scratch[(i, j)] + scratch[(j, i)].conj();
            }
        }
        for jump in &self.jumps {
            for &(i, k, a) in &jump.entries {
                for &(j, l, b) in &jump.entries {
                    out[(i, j)] += a * rho[(k, l)] * b.conj();
                }
            }
        }
    }
}

fn add_scaled(y: &mut CMatrix, a: C64, x: &CMatrix) {
    y.zip_apply(x, |yi, xi| *yi += a * xi);
}

fn symmetrize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// RK4 integration of the Lindblad master equation on the `dim × dim`
/// density matrix. `ρ` is symmetrized after every step; trace deviation and
/// the smallest eigenvalue are recorded at each output time as the
/// `trace_error` and `min_eigenvalue` observables, and fail the run beyond
/// [`DENSITY_TRACE_TOL`] and [`DENSITY_POSITIVITY_TOL`].
pub fn propagate_lindblad(
    h: &Hamiltonian,
    channels: &[LindbladChannel],
    rho0: &QuantumState,
    grid: &TimeGrid,
    dt: Option<f64>,
) -> Result<Trajectory> {
    let rho0 = match rho0 {
        QuantumState::Ket(v) => QuantumState::ket(v.clone())?.to_density(),
        QuantumState::Density(m) => {
            rho0.validate()?;
            m.clone()
        }
    };
    if rho0.nrows() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho0.nrows(),
        });
    }
    let dt = resolve_step(h, dt, grid.last())?;
    let gen = LindbladGenerator::new(h, channels)?;
    let n = h.dim();
    let zeros = || CMatrix::zeros(n, n);
    let (mut h0, mut hmid, mut h1) = (zeros(), zeros(), zeros());
    let (mut k1, mut k2, mut k3, mut k4) = (zeros(), zeros(), zeros(), zeros());
    let (mut tmp, mut scratch) = (zeros(), zeros());
    let mut values = Vec::with_capacity(gen.pattern.len());

    let mut rho = rho0;
    let mut t = 0.0;
    let samples = grid.times().len();
    let mut traj = Trajectory::with_capacity(samples);
    let mut trace_error = Vec::with_capacity(samples);
    let mut min_eig = Vec::with_capacity(samples);

    for &target in grid.times() {
        if target > t {
            let steps = steps_between(t, target, dt);
            let step = (target - t) / steps as f64;
            let half = C64::new(0.5 * step, 0.0);
            let full = C64::new(step, 0.0);
            let sixth = C64::new(step / 6.0, 0.0);
            for s in 0..steps {
                let ts = t + s as f64 * step;
                gen.effective_at(ts, &mut h0);
                gen.effective_at(ts + 0.5 * step, &mut hmid);
                gen.effective_at(ts + step, &mut h1);

                gen.rhs(&h0, &rho, &mut k1, &mut scratch, &mut values);
                tmp.copy_from(&rho);
                add_scaled(&mut tmp, half, &k1);
                gen.rhs(&hmid, &tmp, &mut k2, &mut scratch, &mut values);
                tmp.copy_from(&rho);
                add_scaled(&mut tmp, half, &k2);
                gen.rhs(&hmid, &tmp, &mut k3, &mut scratch, &mut values);
                tmp.copy_from(&rho);
                add_scaled(&mut tmp, full, &k3);
                gen.rhs(&h1, &tmp, &mut k4, &mut scratch, &mut values);

                add_scaled(&mut rho, sixth, &k1);
                add_scaled(&mut rho, sixth * 2.0, &k2);
                add_scaled(&mut rho, sixth * 2.0, &k3);
                add_scaled(&mut rho, sixth, &k4);
                symmetrize(&mut rho);
            }
            t = target;
        }
        let state = QuantumState::Density(rho.clone());
        let drift = (rho.trace().re - 1.0).abs();
        let min = state.min_eigenvalue();
        if drift > DENSITY_TRACE_TOL {
            return Err(Error::Invariant(format!("trace drift {drift:e} at t = {target:e} s")));
        }
        if min < -DENSITY_POSITIVITY_TOL {
            return Err(Error::Invariant(format!("eigenvalue {min:e} at t = {target:e} s")));
        }
        trace_error.push(drift);
        min_eig.push(min);
        traj.record(target, state);
    }
    traj.observables.insert("trace_error".into(), trace_error);
    traj.observables.insert("min_eigenvalue".into(), min_eig);
    Ok(traj)
}

/// Frame energies `E_i` in which every term of `h` rotates exactly as
/// `exp(i (E_i - E_j) t)`; returns the largest mismatch in rad/s.
pub fn frame_mismatch(h: &Hamiltonian, frame: &[f64]) -> Result<f64> {
    if frame.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: frame.len(),
        });
    }
    let mut worst = 0.0f64;
    for term in h.terms() {
        let m = term.operator.matrix();
        for j in 0..h.dim() {
            for i in 0..h.dim() {
                if m[(i, j)] != ZERO {
                    worst = worst.max((frame[i] - frame[j] - term.detuning).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Exact propagation of an interaction-picture Hamiltonian
/// `H_I(t) = e^{iDt} V e^{-iDt}` with `D = diag(frame)`:
/// `ψ_I(t) = e^{iDt} e^{-i(D+V)t} ψ0`.
pub fn propagate_rotating_frame(
    h: &Hamiltonian,
    frame: &[f64],
    psi0: &QuantumState,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let scale = 1.0 + frame.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let mismatch = frame_mismatch(h, frame)?;
    if mismatch > 1e-9 * scale {
        return Err(Error::param(
            "frame",
            format!("Hamiltonian detunings do not follow the frame (mismatch {mismatch:e} rad/s)"),
        ));
    }
    let mut static_h = h.at(0.0).into_matrix();
    for (i, e) in frame.iter().enumerate() {
        static_h[(i, i)] += C64::new(*e, 0.0);
    }
    let prop = StaticPropagator::from_matrix(&OperatorMatrix::new(static_h))?;
    let mut traj = Trajectory::with_capacity(grid.times().len());
    for &t in grid.times() {
        let rotating = prop.evolve(psi0, t)?;
        let back = CVector::from_iterator(frame.len(), frame.iter().map(|&e| C64::from_polar(1.0, e * t)));
        let state = match rotating {
            QuantumState::Ket(v) => QuantumState::Ket(v.component_mul(&back)),
            QuantumState::Density(r) => QuantumState::Density(CMatrix::from_fn(r.nrows(), r.ncols(), |i, j| {
                back[i] * r[(i, j)] * back[j].conj()
            })),
        };
        traj.record(t, state);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{boson_annihilation, CompositeSpace, ModeSpec};
    use std::f64::consts::{PI, SQRT_2};

    fn ket(entries: &[C64]) -> QuantumState {
        QuantumState::ket(CVector::from_column_slice(entries)).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn exchange(g: f64, detuning: f64) -> Hamiltonian {
        // qubit x boson(1) with a g (a sigma^+ + h.c.) coupling
        let space = CompositeSpace::new(vec![ModeSpec::qubit(1.0).unwrap(), ModeSpec::boson(1.0, 1).unwrap()]).unwrap();
        let s = crate::hilbert::site_lowering(&space, 0, crate::hilbert::Transition::Ge).unwrap();
        let a = crate::hilbert::site_lowering(&space, 1, crate::hilbert::Transition::Ge).unwrap();
        let mut h = Hamiltonian::new(4);
        h.add_paired("g", c(g), &a * &s.dagger(), detuning).unwrap();
        h
    }

    #[test]
    fn static_zero_time_is_identity() {
        let h = exchange(1.3, 0.0);
        let psi = ket(&[c(0.6), C64::new(0.0, 0.8), c(0.0), c(0.0)]);
        let out = propagate_static(&h, &psi, 0.0).unwrap();
        assert!((out.as_ket().unwrap() - psi.as_ket().unwrap()).norm() < 1e-15);
    }

    #[test]
    fn static_diagonal_phases() {
        let mut h = Hamiltonian::new(3);
        let e = [0.3, -1.2, 2.5];
        h.add_hermitian(
            "d",
            1.0,
            OperatorMatrix::from_real(3, &[e[0], 0., 0., 0., e[1], 0., 0., 0., e[2]]),
        )
        .unwrap();
        let amp = 1.0 / 3f64.sqrt();
        let psi = ket(&[c(amp), c(amp), c(amp)]);
        let t = 0.7;
        let out = propagate_static(&h, &psi, t).unwrap();
        for (k, ek) in e.iter().enumerate() {
            let expected = C64::from_polar(amp, -ek * t);
            assert!((out.as_ket().unwrap()[k] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn static_exchange_half_period() {
        // |e,0> -> -i |g,1> after g' t = pi/2 with g' = g/sqrt2
        let g = 2.0;
        let h = exchange(g / SQRT_2, 0.0);
        let e0 = ket(&[c(0.0), c(0.0), c(1.0), c(0.0)]); // labels [q=1, n=0] -> index 2
        let t = PI / (2.0 * g / SQRT_2);
        let out = propagate_static(&h, &e0, t).unwrap();
        let v = out.as_ket().unwrap();
        assert!((v[1] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn static_rejects_time_dependent() {
        let h = exchange(1.0, 0.5);
        let psi = ket(&[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!(propagate_static(&h, &psi, 1.0).is_err());
    }

    #[test]
    fn rk4_matches_static_for_constant_h() {
        let h = exchange(1.1, 0.0);
        let psi = ket(&[c(0.0), c(0.0), c(1.0), c(0.0)]);
        let grid = TimeGrid::uniform(5.0, 11).unwrap();
        let traj = propagate_td(&h, &psi, &grid, None).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = propagate_static(&h, &psi, *t).unwrap();
            let f = s.as_ket().unwrap().dotc(exact.as_ket().unwrap()).norm_sqr();
            assert!(1.0 - f < 1e-9);
        }
        assert!(traj.max_abs("norm_error").unwrap() < 1e-7);
    }

    #[test]
    fn rk4_matches_rotating_frame_route() {
        let detuning = 3.0;
        let h = exchange(0.8, detuning);
        // the coupling a sigma^+ takes |g,1> (index 1) to |e,0> (index 2)
        let frame = vec![0.0, 0.0, detuning, 0.0];
        assert!(frame_mismatch(&h, &frame).unwrap() < 1e-15);
        let psi = ket(&[c(0.0), c(0.0), c(1.0), c(0.0)]);
        let grid = TimeGrid::uniform(4.0, 9).unwrap();
        let rk = propagate_td(&h, &psi, &grid, None).unwrap();
        let exact = propagate_rotating_frame(&h, &frame, &psi, &grid).unwrap();
        for (a, b) in rk.states.iter().zip(&exact.states) {
            assert!((a.as_ket().unwrap() - b.as_ket().unwrap()).norm() < 1e-8);
        }
        let wrong = vec![0.0; 4];
        assert!(propagate_rotating_frame(&h, &wrong, &psi, &grid).is_err());
    }

    #[test]
    fn rk4_rejects_oversized_step() {
        let h = exchange(1.0, 10.0);
        let psi = ket(&[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        let bound = max_step(&h);
        assert!(matches!(
            propagate_td(&h, &psi, &grid, Some(bound * 2.0)),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(propagate_td(&h, &psi, &grid, Some(bound)).is_ok());
    }

    #[test]
    fn lindblad_single_mode_decay_is_exponential() {
        let kappa = 0.7;
        let a = boson_annihilation(2).unwrap();
        let h = Hamiltonian::new(3);
        let ch = vec![LindbladChannel::new("kappa", kappa, a.clone()).unwrap()];
        let one = ket(&[c(0.0), c(1.0), c(0.0)]);
        let grid = TimeGrid::uniform(3.0, 7).unwrap();
        let traj = propagate_lindblad(&h, &ch, &one, &grid, Some(1e-3)).unwrap();
        let n = &a.dagger() * &a;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let pop = expectation(&n, s).unwrap();
            assert!((pop - (-kappa * t).exp()).abs() < 1e-10, "t={t} pop={pop}");
        }
        assert!(traj.max_abs("trace_error").unwrap() < 1e-12);
        assert!(traj.observable("min_eigenvalue").unwrap().iter().all(|&e| e > -1e-12));
    }

    #[test]
    fn lindblad_zero_rate_matches_unitary() {
        let h = exchange(1.2, 0.9);
        let a = boson_annihilation(1).unwrap();
        let _ = a;
        let psi = ket(&[c(0.0), c(0.6), c(0.8), c(0.0)]);
        let grid = TimeGrid::uniform(3.0, 5).unwrap();
        let unitary = propagate_td(&h, &psi, &grid, None).unwrap();
        let space = CompositeSpace::new(vec![ModeSpec::qubit(1.0).unwrap(), ModeSpec::boson(1.0, 1).unwrap()]).unwrap();
        let l = crate::hilbert::site_lowering(&space, 1, crate::hilbert::Transition::Ge).unwrap();
        let ch = vec![LindbladChannel::new("off", 0.0, l).unwrap()];
        let mixed = propagate_lindblad(&h, &ch, &psi, &grid, None).unwrap();
        for (u, r) in unitary.states.iter().zip(&mixed.states) {
            let v = u.as_ket().unwrap();
            let f = v.dotc(&(r.as_density().unwrap() * v)).re;
            assert!((1.0 - f).abs() < 1e-8);
        }
    }

    #[test]
    fn lindblad_rejects_invalid_rho() {
        let h = Hamiltonian::new(2);
        let bad = QuantumState::Density(CMatrix::from_row_slice(2, 2, &[c(0.7), c(0.0), c(0.0), c(0.7)]));
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        assert!(propagate_lindblad(&h, &[], &bad, &grid, None).is_err());
    }

    #[test]
    fn expectation_values() {
        let id = OperatorMatrix::identity(3);
        let psi = ket(&[c(0.0), c(0.6), C64::new(0.0, 0.8)]);
        assert!((expectation(&id, &psi).unwrap() - 1.0).abs() < 1e-15);
        let a = boson_annihilation(2).unwrap();
        let n = &a.dagger() * &a;
        assert_eq!(expectation(&n, &ket(&[c(1.0), c(0.0), c(0.0)])).unwrap(), 0.0);
        let see = OperatorMatrix::from_real(2, &[0., 0., 0., 1.]);
        let plus = ket(&[c(1.0 / SQRT_2), c(1.0 / SQRT_2)]);
        assert!((expectation(&see, &plus).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            expectation(&a, &ket(&[c(1.0), c(0.0), c(0.0)])),
            Err(Error::NotHermitian(_))
        ));
        assert!(matches!(expectation(&see, &psi), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::from_times(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::from_times(vec![-1.0]).is_err());
        assert!(TimeGrid::uniform(1.0, 1).is_err());
        let g = TimeGrid::uniform(2.0, 5).unwrap();
        assert_eq!(g.times(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
