// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Tensor-product Hilbert spaces of qubits, qutrits and truncated bosonic
//! modes, plus the elementary operators that act on them.
//!
//! Basis ordering is row-major over the mode list: the first mode is the
//! most significant index. For the device space the order is
//! `[q1, q2, r_a, r_b, r_f]` (see [`Q1`]..[`RF`]).

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::QuantumState;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance used for the eager Hermiticity flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Site indices of the device space.
pub const Q1: usize = 0;
pub const Q2: usize = 1;
pub const RA: usize = 2;
pub const RB: usize = 3;
pub const RF: usize = 4;
/// Site of the collective mode `C` in the reduced `[q1, q2, C]` space.
pub const RC: usize = 2;

/// One degree of freedom. Level index doubles as its excitation count.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum ModeSpec {
    Qubit { omega: f64 },
    Qutrit { omega_ge: f64, omega_es: f64 },
    Boson { omega: f64, n_max: usize },
}

fn check_frequency(name: &str, omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::param(name, format!("must be finite and > 0, got {omega}")));
    }
    Ok(())
}

impl ModeSpec {
    pub fn qubit(omega: f64) -> Result<Self> {
        check_frequency("omega", omega)?;
        Ok(ModeSpec::Qubit { omega })
    }

    pub fn qutrit(omega_ge: f64, omega_es: f64) -> Result<Self> {
        check_frequency("omega_ge", omega_ge)?;
        check_frequency("omega_es", omega_es)?;
        Ok(ModeSpec::Qutrit { omega_ge, omega_es })
    }

    pub fn boson(omega: f64, n_max: usize) -> Result<Self> {
        check_frequency("omega", omega)?;
        if n_max < 1 {
            return Err(Error::param("n_max", "Fock cutoff must be >= 1"));
        }
        Ok(ModeSpec::Boson { omega, n_max })
    }

    pub fn dim(&self) -> usize {
        match *self {
            ModeSpec::Qubit { .. } => 2,
            ModeSpec::Qutrit { .. } => 3,
            ModeSpec::Boson { n_max, .. } => n_max + 1,
        }
    }

    /// Bare energy of each level (rad/s), ground state at zero.
    pub fn level_energies(&self) -> Vec<f64> {
        match *self {
            ModeSpec::Qubit { omega } => vec![0.0, omega],
            ModeSpec::Qutrit { omega_ge, omega_es } => vec![0.0, omega_ge, omega_ge + omega_es],
            ModeSpec::Boson { omega, n_max } => (0..=n_max).map(|n| n as f64 * omega).collect(),
        }
    }
}

/// Ordered product of modes.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CompositeSpace {
    modes: Vec<ModeSpec>,
    dims: Vec<usize>,
    dim: usize,
}

impl CompositeSpace {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::param("modes", "a composite space needs at least one mode"));
        }
        let dims: Vec<usize> = modes.iter().map(ModeSpec::dim).collect();
        let dim = dims.iter().product();
        Ok(Self { modes, dims, dim })
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, site: usize) -> Result<&ModeSpec> {
        self.modes.get(site).ok_or(Error::SiteOutOfRange {
            site,
            modes: self.modes.len(),
        })
    }

    /// Flat row-major index of a product basis state.
    pub fn index_of(&self, labels: &[usize]) -> Result<usize> {
        if labels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: labels.len(),
            });
        }
        let mut index = 0;
        for (site, (&level, &dim)) in labels.iter().zip(&self.dims).enumerate() {
            if level >= dim {
                return Err(Error::LevelOutOfRange { site, level, dim });
            }
            index = index * dim + level;
        }
        Ok(index)
    }

    pub fn labels_of(&self, mut index: usize) -> Vec<usize> {
        let mut labels = vec![0; self.dims.len()];
        for (slot, &dim) in labels.iter_mut().zip(&self.dims).rev() {
            *slot = index % dim;
            index /= dim;
        }
        labels
    }

    /// Total excitation number of a basis state.
    pub fn excitation(&self, index: usize) -> usize {
        self.labels_of(index).iter().sum()
    }

    /// Diagonal operator counting excitations over all modes.
    pub fn number_operator(&self) -> OperatorMatrix {
        let diag = CVector::from_iterator(
            self.dim,
            (0..self.dim).map(|i| C64::new(self.excitation(i) as f64, 0.0)),
        );
        OperatorMatrix::new(CMatrix::from_diagonal(&diag))
    }

    /// Sum of bare level energies, diagonal in the product basis.
    pub fn bare_energies(&self) -> Vec<f64> {
        let per_mode: Vec<Vec<f64>> = self.modes.iter().map(ModeSpec::level_energies).collect();
        (0..self.dim)
            .map(|i| self.labels_of(i).iter().zip(&per_mode).map(|(&l, e)| e[l]).sum())
            .collect()
    }

    /// Basis states with at most `max_excitation` quanta.
    pub fn excitation_subspace(&self, max_excitation: usize) -> Subspace {
        let indices = (0..self.dim)
            .filter(|&i| self.excitation(i) <= max_excitation)
            .collect();
        Subspace {
            indices,
            full_dim: self.dim,
        }
    }
}

/// A coordinate subspace: a subset of product basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    indices: Vec<usize>,
    full_dim: usize,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Position of a full-space index inside the subspace.
    pub fn position(&self, full_index: usize) -> Option<usize> {
        self.indices.binary_search(&full_index).ok()
    }

    pub fn restrict_matrix(&self, m: &CMatrix) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| m[(self.indices[i], self.indices[j])])
    }

    pub fn restrict_operator(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        if op.dim() != self.full_dim {
            return Err(Error::DimensionMismatch {
                expected: self.full_dim,
                found: op.dim(),
            });
        }
        Ok(OperatorMatrix::new(self.restrict_matrix(op.matrix())))
    }

    /// Drops amplitudes outside the subspace; the caller is responsible for
    /// the state actually living there.
    pub fn restrict_state(&self, state: &QuantumState) -> Result<QuantumState> {
        if state.dim() != self.full_dim {
            return Err(Error::DimensionMismatch {
                expected: self.full_dim,
                found: state.dim(),
            });
        }
        Ok(match state {
            QuantumState::Ket(v) => {
                QuantumState::Ket(CVector::from_iterator(self.dim(), self.indices.iter().map(|&i| v[i])))
            }
            QuantumState::Density(r) => QuantumState::Density(self.restrict_matrix(r)),
        })
    }

    pub fn lift_state(&self, state: &QuantumState) -> Result<QuantumState> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        Ok(match state {
            QuantumState::Ket(v) => {
                let mut out = CVector::zeros(self.full_dim);
                for (k, &i) in self.indices.iter().enumerate() {
                    out[i] = v[k];
                }
                QuantumState::Ket(out)
            }
            QuantumState::Density(r) => {
                let mut out = CMatrix::zeros(self.full_dim, self.full_dim);
                for (a, &i) in self.indices.iter().enumerate() {
                    for (b, &j) in self.indices.iter().enumerate() {
                        out[(i, j)] = r[(a, b)];
                    }
                }
                QuantumState::Density(out)
            }
        })
    }
}

/// Dense complex operator with an eagerly computed Hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMatrix,
    hermitian: bool,
}

/// Largest entrywise |M - M^dag|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

impl OperatorMatrix {
    /// Panics if the matrix is not square.
    pub fn new(matrix: CMatrix) -> Self {
        assert!(matrix.is_square(), "operator matrices must be square");
        let hermitian = hermitian_deviation(&matrix) < HERMITIAN_TOL;
        Self { matrix, hermitian }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn from_real(rows: usize, entries: &[f64]) -> Self {
        Self::new(CMatrix::from_row_iterator(
            rows,
            rows,
            entries.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::new(&self.matrix * factor)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        if let Some(d) = other.diagonal_entries() {
            return Self::new(CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
                self.matrix[(i, j)] * (d[j] - d[i])
            }));
        }
        if let Some(d) = self.diagonal_entries() {
            return Self::new(CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
                other.matrix[(i, j)] * (d[i] - d[j])
            }));
        }
        Self::new(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }

    fn diagonal_entries(&self) -> Option<CVector> {
        let m = &self.matrix;
        let off = (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| i == j || m[(i, j)] == ZERO));
        (off && m.is_square()).then(|| m.diagonal())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        if self.hermitian {
            let eig = self.matrix.clone().symmetric_eigen();
            eig.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()))
        } else {
            let sv = self.matrix.clone().singular_values();
            sv.iter().fold(0.0f64, |m, &s| m.max(s))
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::new(&self.matrix + &rhs.matrix)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::new(&self.matrix - &rhs.matrix)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        let n = self.matrix.nrows();
        let nonzeros: Vec<(usize, usize, C64)> = (0..self.matrix.ncols())
            .flat_map(|k| (0..n).map(move |i| (i, k)))
            .filter_map(|(i, k)| {
                let v = self.matrix[(i, k)];
                (v != ZERO).then_some((i, k, v))
            })
            .collect();
        // embedded site operators have about one entry per row
        if nonzeros.len() * 8 > n * n || rhs.matrix.nrows() != self.matrix.ncols() {
            return OperatorMatrix::new(&self.matrix * &rhs.matrix);
        }
        let cols = rhs.matrix.ncols();
        let mut out = CMatrix::zeros(n, cols);
        for (i, k, v) in nonzeros {
            for j in 0..cols {
                let b = rhs.matrix[(k, j)];
                if b != ZERO {
                    out[(i, j)] += v * b;
                }
            }
        }
        OperatorMatrix::new(out)
    }
}

/// Truncated annihilation operator, `A[n-1, n] = sqrt(n)`.
pub fn boson_annihilation(n_max: usize) -> Result<OperatorMatrix> {
    if n_max < 1 {
        return Err(Error::param("n_max", "Fock cutoff must be >= 1"));
    }
    let mut m = CMatrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(OperatorMatrix::new(m))
}

/// Qutrit transitions, levels ordered g = 0, e = 1, s = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Transition {
    Ge,
    Es,
}

pub fn qutrit_lowering(transition: Transition) -> OperatorMatrix {
    let mut m = CMatrix::zeros(3, 3);
    match transition {
        Transition::Ge => m[(0, 1)] = ONE,
        Transition::Es => m[(1, 2)] = ONE,
    }
    OperatorMatrix::new(m)
}

pub fn qubit_lowering() -> OperatorMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 1)] = ONE;
    OperatorMatrix::new(m)
}

/// `|level><level|` on a single mode of dimension `dim`.
pub fn projector(dim: usize, level: usize) -> Result<OperatorMatrix> {
    if level >= dim {
        return Err(Error::LevelOutOfRange { site: 0, level, dim });
    }
    let mut m = CMatrix::zeros(dim, dim);
    m[(level, level)] = ONE;
    Ok(OperatorMatrix::new(m))
}

/// Lifts a single-mode operator to the composite space.
pub fn embed(op: &OperatorMatrix, site: usize, space: &CompositeSpace) -> Result<OperatorMatrix> {
    let dims = space.dims();
    if site >= dims.len() {
        return Err(Error::SiteOutOfRange {
            site,
            modes: dims.len(),
        });
    }
    let d = dims[site];
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.dim(),
        });
    }
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    let n = space.dim();
    let mut m = CMatrix::zeros(n, n);
    let src = op.matrix();
    for l in 0..left {
        for a in 0..d {
            for b in 0..d {
                let v = src[(a, b)];
                if v == ZERO {
                    continue;
                }
                let row0 = (l * d + a) * right;
                let col0 = (l * d + b) * right;
                for r in 0..right {
                    m[(row0 + r, col0 + r)] = v;
                }
            }
        }
    }
    Ok(OperatorMatrix {
        matrix: m,
        hermitian: op.hermitian,
    })
}

/// Lowering operator of the given mode, lifted to the composite space.
/// `transition` selects the qutrit transition and is ignored otherwise.
pub fn site_lowering(space: &CompositeSpace, site: usize, transition: Transition) -> Result<OperatorMatrix> {
    let local = match *space.mode(site)? {
        ModeSpec::Qubit { .. } => qubit_lowering(),
        ModeSpec::Qutrit { .. } => qutrit_lowering(transition),
        ModeSpec::Boson { n_max, .. } => boson_annihilation(n_max)?,
    };
    embed(&local, site, space)
}

/// Projector onto one level of one site, lifted to the composite space.
pub fn site_projector(space: &CompositeSpace, site: usize, level: usize) -> Result<OperatorMatrix> {
    let d = space.mode(site)?.dim();
    let local = projector(d, level).map_err(|_| Error::LevelOutOfRange { site, level, dim: d })?;
    embed(&local, site, space)
}

pub fn basis_ket(labels: &[usize], space: &CompositeSpace) -> Result<QuantumState> {
    let index = space.index_of(labels)?;
    let mut v = CVector::zeros(space.dim());
    v[index] = ONE;
    Ok(QuantumState::Ket(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn device_space(n_max: usize) -> CompositeSpace {
        CompositeSpace::new(vec![
            ModeSpec::qutrit(1.0, 0.9).unwrap(),
            ModeSpec::qutrit(1.1, 1.0).unwrap(),
            ModeSpec::boson(1.0, n_max).unwrap(),
            ModeSpec::boson(1.0, n_max).unwrap(),
            ModeSpec::boson(1.0, n_max).unwrap(),
        ])
        .unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilation_two_level() {
        let a = boson_annihilation(1).unwrap();
        assert_eq!(a.matrix(), &CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));
    }

    #[test]
    fn annihilation_three_level_entries() {
        let a = boson_annihilation(2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (i, j) {
                    (0, 1) => 1.0,
                    (1, 2) => 2f64.sqrt(),
                    _ => 0.0,
                };
                assert_eq!(a.matrix()[(i, j)], c(expected));
            }
        }
    }

    #[test]
    fn number_operator_diagonal() {
        let a = boson_annihilation(4).unwrap();
        let n = &a.dagger() * &a;
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j { i as f64 } else { 0.0 };
                assert!((n.matrix()[(i, j)] - c(expected)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn annihilation_rejects_zero_cutoff() {
        assert!(matches!(boson_annihilation(0), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn qutrit_lowering_entries() {
        let ge = qutrit_lowering(Transition::Ge);
        let es = qutrit_lowering(Transition::Es);
        let nonzero = |m: &OperatorMatrix| {
            let mut v = vec![];
            for i in 0..3 {
                for j in 0..3 {
                    if m.matrix()[(i, j)] != ZERO {
                        v.push((i, j, m.matrix()[(i, j)]));
                    }
                }
            }
            v
        };
        assert_eq!(nonzero(&ge), vec![(0, 1, ONE)]);
        assert_eq!(nonzero(&es), vec![(1, 2, ONE)]);
        // sigma_ge * sigma_es = |g><s|
        assert_eq!(nonzero(&(&ge * &es)), vec![(0, 2, ONE)]);
    }

    #[test]
    fn qutrit_number_identity() {
        let ge = qutrit_lowering(Transition::Ge);
        let es = qutrit_lowering(Transition::Es);
        let sum = &(&ge.dagger() * &ge) + &(&es.dagger() * &es);
        let expected = OperatorMatrix::from_real(3, &[0., 0., 0., 0., 1., 0., 0., 0., 1.]);
        assert_eq!(sum, expected);
    }

    #[test]
    fn truncated_commutator_below_cutoff() {
        for n_max in 1..6 {
            let a = boson_annihilation(n_max).unwrap();
            let comm = &a.commutator(&a.dagger()) - &OperatorMatrix::identity(n_max + 1);
            for n in 0..n_max {
                let mut ket = CVector::zeros(n_max + 1);
                ket[n] = ONE;
                assert!(comm.apply(&ket).norm() < 1e-14, "n_max={n_max} n={n}");
            }
            let mut top = CVector::zeros(n_max + 1);
            top[n_max] = ONE;
            assert!(comm.apply(&top).norm() > 0.5);
        }
    }

    #[test]
    fn embed_first_and_last_site() {
        let space = CompositeSpace::new(vec![ModeSpec::qubit(1.0).unwrap(), ModeSpec::qubit(1.0).unwrap()]).unwrap();
        let op = OperatorMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0), C64::new(2.0, 1.0), c(3.0), c(4.0)],
        ));
        let id = CMatrix::identity(2, 2);
        assert_eq!(embed(&op, 0, &space).unwrap().matrix(), &op.matrix().kronecker(&id));
        assert_eq!(embed(&op, 1, &space).unwrap().matrix(), &id.kronecker(op.matrix()));
    }

    #[test]
    fn embed_errors() {
        let space = device_space(2);
        let a = boson_annihilation(2).unwrap();
        assert!(matches!(embed(&a, 5, &space), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(
            embed(&qubit_lowering(), 2, &space),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn basis_ket_indices() {
        let space = device_space(1);
        let ket = basis_ket(&[0, 0, 0, 0, 0], &space).unwrap();
        let v = ket.as_ket().unwrap();
        assert_eq!(v[0], ONE);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        // enumeration oracle for |e,g,0,0,0> in [3,3,2,2,2]
        let mut expected = None;
        let mut count = 0;
        for q1 in 0..3 {
            for q2 in 0..3 {
                for a in 0..2 {
                    for b in 0..2 {
                        for f in 0..2 {
                            if [q1, q2, a, b, f] == [1, 0, 0, 0, 0] {
                                expected = Some(count);
                            }
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(expected, Some(24));
        assert_eq!(space.index_of(&[1, 0, 0, 0, 0]).unwrap(), 24);
        assert!(matches!(
            basis_ket(&[3, 0, 0, 0, 0], &space),
            Err(Error::LevelOutOfRange {
                site: 0,
                level: 3,
                dim: 3
            })
        ));
    }

    #[test]
    fn labels_round_trip() {
        let space = device_space(2);
        for i in 0..space.dim() {
            assert_eq!(space.index_of(&space.labels_of(i)).unwrap(), i);
        }
    }

    #[test]
    fn mode_spec_invariants() {
        assert!(ModeSpec::boson(1.0, 0).is_err());
        assert!(ModeSpec::qutrit(-1.0, 1.0).is_err());
        assert!(ModeSpec::qubit(f64::NAN).is_err());
        assert_eq!(ModeSpec::boson(1.0, 3).unwrap().dim(), 4);
        assert_eq!(ModeSpec::qutrit(1.0, 1.0).unwrap().dim(), 3);
        assert_eq!(device_space(2).dim(), 243);
    }

    #[test]
    fn subspace_round_trip() {
        let space = device_space(2);
        let sub = space.excitation_subspace(2);
        assert_eq!(sub.dim(), 21);
        let ket = basis_ket(&[1, 0, 0, 1, 0], &space).unwrap();
        let back = sub.lift_state(&sub.restrict_state(&ket).unwrap()).unwrap();
        assert_eq!(back, ket);
    }

    fn random_op(rng: &mut impl rand::Rng, d: usize) -> OperatorMatrix {
        OperatorMatrix::new(CMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        }))
    }

    #[test]
    fn embedded_ops_on_different_sites_commute() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let space = CompositeSpace::new(vec![
            ModeSpec::qutrit(1.0, 1.0).unwrap(),
            ModeSpec::qutrit(1.0, 1.0).unwrap(),
            ModeSpec::qubit(1.0).unwrap(),
        ])
        .unwrap();
        for _ in 0..5 {
            let a = embed(&random_op(&mut rng, 3), 0, &space).unwrap();
            let b = embed(&random_op(&mut rng, 3), 1, &space).unwrap();
            assert_eq!(a.commutator(&b).max_abs(), 0.0);
        }
    }

    #[test]
    fn diagonal_commutator_matches_products() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = random_op(&mut rng, 6);
        let d = OperatorMatrix::new(CMatrix::from_diagonal(&random_op(&mut rng, 6).matrix().diagonal()));
        for (x, y) in [(&a, &d), (&d, &a)] {
            let dense = x.matrix() * y.matrix() - y.matrix() * x.matrix();
            assert!((x.commutator(y).matrix() - dense).camax() < 1e-14);
        }
    }

    #[test]
    fn sparse_product_matches_dense() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let dense = random_op(&mut rng, 7);
        let mut m = CMatrix::zeros(7, 7);
        m[(0, 3)] = C64::new(0.5, -1.0);
        m[(4, 1)] = C64::new(2.0, 0.25);
        let sparse = OperatorMatrix::new(m);
        for (x, y) in [(&sparse, &dense), (&dense, &sparse), (&sparse, &sparse)] {
            assert!(((x * y).matrix() - x.matrix() * y.matrix()).camax() < 1e-14);
        }
    }

    #[test]
    fn kronecker_associativity() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let flat = CompositeSpace::new(vec![
            ModeSpec::qubit(1.0).unwrap(),
            ModeSpec::qutrit(1.0, 1.0).unwrap(),
            ModeSpec::boson(1.0, 1).unwrap(),
        ])
        .unwrap();
        // [[A, B], C] with the first two modes merged into one 6-level factor
        let merged =
            CompositeSpace::new(vec![ModeSpec::boson(1.0, 5).unwrap(), ModeSpec::boson(1.0, 1).unwrap()]).unwrap();
        let inner =
            CompositeSpace::new(vec![ModeSpec::qubit(1.0).unwrap(), ModeSpec::qutrit(1.0, 1.0).unwrap()]).unwrap();
        let op = random_op(&mut rng, 3);
        let direct = embed(&op, 1, &flat).unwrap();
        let nested = embed(&embed(&op, 1, &inner).unwrap(), 0, &merged).unwrap();
        assert_eq!(direct, nested);
    }

    proptest! {
        #[test]
        fn embed_preserves_hermiticity_and_norm(seed in 0u64..1000, site in 0usize..3) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let space = CompositeSpace::new(vec![
                ModeSpec::qutrit(1.0, 1.0).unwrap(),
                ModeSpec::boson(1.0, 2).unwrap(),
                ModeSpec::qubit(1.0).unwrap(),
            ]).unwrap();
            let d = space.dims()[site];
            let raw = random_op(&mut rng, d);
            let herm = OperatorMatrix::new(raw.matrix() + raw.matrix().adjoint());
            prop_assert!(herm.is_hermitian());
            let lifted = embed(&herm, site, &space).unwrap();
            prop_assert!(lifted.is_hermitian());
            prop_assert!((lifted.spectral_norm() - herm.spectral_norm()).abs() < 1e-10);
            let lifted_raw = embed(&raw, site, &space).unwrap();
            prop_assert!((lifted_raw.spectral_norm() - raw.spectral_norm()).abs() < 1e-10);
        }
    }
}
