//! Density matrices, Stokes vectors, and the standard scores built on them.
//!
//! A [`DensityMatrix`] is a 2×2 (qubit) or 4×4 (two-qubit) complex matrix,
//! validated to be Hermitian and unit-trace at construction. Positivity is
//! checked as well: [`DensityMatrix::new`] rejects matrices with an
//! eigenvalue below −1e-10, while [`DensityMatrix::new_relaxed`] admits them
//! and records the defect, which is what linear-inversion tomography needs
//! when counting noise pushes the reconstruction outside the physical set.
//!
//! The single-qubit Stokes convention follows the analyzer bases: s1 is the
//! H−V imbalance, s2 the S−T imbalance, s3 the R−L imbalance. In the (R, L)
//! column order used throughout,
//!
//! ```text
//! ρ = ½ (I + s1 σ_HV + s2 σ_ST + s3 σ_RL),
//! σ_HV = [[0,1],[1,0]],  σ_ST = [[0,i],[−i,0]],  σ_RL = diag(1,−1).
//! ```

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::polarization::PolarizationState;

/// Entrywise tolerance for Hermiticity and trace checks.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalue floor below which a matrix counts as non-positive.
pub const PSD_FLOOR: f64 = -1e-10;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("density matrices must be 2x2 or 4x4, got dim {0}")]
    BadDimension(usize),
    #[error("entry count {0} does not match dim {1}")]
    BadShape(usize, usize),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("Stokes vector has length {0} > 1, not a physical state")]
    NonPhysicalStokes(f64),
}

/// Hermitian, unit-trace complex matrix of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<C64>,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian and unit trace to 1e-12, all
    /// eigenvalues ≥ −1e-10.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self, MatrixError> {
        let m = Self::new_relaxed(dim, entries)?;
        if m.min_eigenvalue < PSD_FLOOR {
            return Err(MatrixError::NotPositive(m.min_eigenvalue));
        }
        Ok(m)
    }

    /// Like [`DensityMatrix::new`] but admits indefinite matrices, keeping
    /// the minimum eigenvalue on record. Hermiticity and trace are still
    /// enforced.
    pub fn new_relaxed(dim: usize, entries: Vec<C64>) -> Result<Self, MatrixError> {
        if dim != 2 && dim != 4 {
            return Err(MatrixError::BadDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(MatrixError::BadShape(entries.len(), dim));
        }
        let defect = linalg::hermiticity_defect(dim, &entries);
        if defect > HERMITICITY_TOL {
            return Err(MatrixError::NotHermitian(defect));
        }
        let tr = linalg::mat_trace(dim, &entries);
        if (tr.re - 1.0).abs() > HERMITICITY_TOL || tr.im.abs() > HERMITICITY_TOL {
            return Err(MatrixError::BadTrace(tr.re));
        }
        let min_eigenvalue = match dim {
            2 => min_eigenvalue_2x2(&entries),
            _ => linalg::hermitian_eigenvalues(dim, &entries)[0],
        };
        Ok(Self {
            dim,
            entries,
            min_eigenvalue,
        })
    }

    /// Maximally mixed state I/dim.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self {
            dim,
            entries,
            min_eigenvalue: 1.0 / dim as f64,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    /// Smallest eigenvalue, cached at construction.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// True when all eigenvalues sit above the −1e-10 floor.
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= PSD_FLOOR
    }

    /// Tr(ρ²); 1 for pure states.
    pub fn purity(&self) -> f64 {
        linalg::mat_trace(
            self.dim,
            &linalg::mat_mul(self.dim, &self.entries, &self.entries),
        )
        .re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.dim {
            2 => {
                let min = self.min_eigenvalue;
                vec![min, 1.0 - min]
            }
            _ => linalg::hermitian_eigenvalues(self.dim, &self.entries),
        }
    }
}

fn min_eigenvalue_2x2(entries: &[C64]) -> f64 {
    // Closed form for Hermitian 2x2 with trace t: (t - sqrt(gap)) / 2.
    let a = entries[0].re;
    let d = entries[3].re;
    let b = entries[1];
    let t = a + d;
    let gap = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
    (t - gap) / 2.0
}

/// Serialized form: row-major entries as [re, im] pairs plus a dim field.
#[derive(Serialize, Deserialize)]
struct DensityMatrixWire {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DensityMatrixWire {
            dim: self.dim,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = DensityMatrixWire::deserialize(deserializer)?;
        let entries = wire.entries.iter().map(|p| C64::new(p[0], p[1])).collect();
        DensityMatrix::new_relaxed(wire.dim, entries).map_err(serde::de::Error::custom)
    }
}

/// Stokes vector of a polarization qubit; unit length for pure states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self { s1, s2, s3 }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }

    pub fn norm(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }

    pub fn dot(&self, other: &StokesVector) -> f64 {
        self.s1 * other.s1 + self.s2 * other.s2 + self.s3 * other.s3
    }
}

/// Rank-1 projector |ψ⟩⟨ψ| of a pure state.
pub fn density_from_pure(state: &PolarizationState) -> DensityMatrix {
    let (c_r, c_l) = state.amplitudes();
    let entries = vec![
        c_r * c_r.conj(),
        c_r * c_l.conj(),
        c_l * c_r.conj(),
        c_l * c_l.conj(),
    ];
    // Outer products of unit vectors are Hermitian, unit-trace and PSD by
    // construction; skip revalidation to keep exact zeros exact.
    let min = min_eigenvalue_2x2(&entries);
    DensityMatrix {
        dim: 2,
        entries,
        min_eigenvalue: min,
    }
}

/// Stokes components s_i = Tr(ρ σ_i) of a qubit density matrix.
///
/// Rejects matrices that are not physical (relaxed linear-inversion output
/// should be converted explicitly, not silently).
pub fn stokes_from_density(rho: &DensityMatrix) -> Result<StokesVector, MatrixError> {
    if rho.dim() != 2 {
        return Err(MatrixError::BadDimension(rho.dim()));
    }
    if !rho.is_physical() {
        return Err(MatrixError::NotPositive(rho.min_eigenvalue()));
    }
    Ok(stokes_from_entries(rho.entries()))
}

pub(crate) fn stokes_from_entries(entries: &[C64]) -> StokesVector {
    let rl = entries[1]; // row R, column L
    StokesVector {
        s1: 2.0 * rl.re,
        s2: 2.0 * rl.im,
        s3: entries[0].re - entries[3].re,
    }
}

/// Qubit density matrix ρ = (I + Σ s_i σ_i)/2 of a Stokes vector.
///
/// Rejects |s| > 1 + 1e-10; use linear inversion for indefinite
/// reconstructions.
pub fn density_from_stokes(s: &StokesVector) -> Result<DensityMatrix, MatrixError> {
    let norm = s.norm();
    if norm > 1.0 + 1e-10 {
        return Err(MatrixError::NonPhysicalStokes(norm));
    }
    Ok(density_from_stokes_unchecked(s))
}

pub(crate) fn density_from_stokes_unchecked(s: &StokesVector) -> DensityMatrix {
    let entries = vec![
        C64::new((1.0 + s.s3) / 2.0, 0.0),
        C64::new(s.s1 / 2.0, s.s2 / 2.0),
        C64::new(s.s1 / 2.0, -s.s2 / 2.0),
        C64::new((1.0 - s.s3) / 2.0, 0.0),
    ];
    let min = min_eigenvalue_2x2(&entries);
    DensityMatrix {
        dim: 2,
        entries,
        min_eigenvalue: min,
    }
}

/// Overlap fidelity F = ⟨ψ|ρ|ψ⟩ of a qubit state with a pure target.
///
/// For a physical ρ the value lies in [0, 1]. The same trace expression is
/// evaluated for relaxed matrices (background-subtracted reconstructions),
/// where it can stray marginally outside that range.
pub fn fidelity(rho: &DensityMatrix, target: &PolarizationState) -> f64 {
    debug_assert_eq!(rho.dim(), 2);
    let (c_r, c_l) = target.amplitudes();
    let psi = [c_r, c_l];
    let mut value = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            value += psi[i].conj() * rho.get(i, j) * psi[j];
        }
    }
    debug_assert!(value.im.abs() < 1e-10);
    value.re
}

/// Degree of polarization |s| ∈ [0, 1]; 1 for pure states, 0 for
/// unpolarized light.
pub fn degree_of_polarization(rho: &DensityMatrix) -> f64 {
    stokes_from_entries(rho.entries()).norm()
}

/// Trace distance ½ Tr |ρ − σ|.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim());
    let dim = a.dim();
    let diff: Vec<C64> = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x - y)
        .collect();
    linalg::hermitian_eigenvalues(dim, &diff)
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
        / 2.0
}
