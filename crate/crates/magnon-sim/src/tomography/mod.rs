//! Three-basis state reconstruction for the retrieved photon.
//!
//! Click totals at the two analyzer ports of each basis give the Stokes
//! components directly, s_i = (n₊ − n₋)/(n₊ + n₋). Linear inversion turns
//! those into a density matrix without constraining physicality (counting
//! noise can push |s| past 1; the result is flagged, never clipped).
//! [`mle_reconstruct`] maximizes the product of per-port binomial
//! likelihoods over the physical set and is guaranteed positive. An
//! independently acquired background can be subtracted from the counts
//! before inversion, reproducing the tilde quantities of the fidelity
//! report.

mod mle;
mod sweep;

pub use mle::{mle_reconstruct, MleResult, MLE_MAX_ITERATIONS, MLE_TOLERANCE};
pub use sweep::{theta_sweep, CurvePoint, SinusoidFit, SweepResult, ThetaSample};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{
    self, degree_of_polarization, density_from_stokes_unchecked, fidelity, DensityMatrix,
    StokesVector,
};
use crate::polarization::{Basis, PolarizationState};
use crate::ValueWithError;

#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("basis {0:?} has no counts; insufficient data for inversion")]
    EmptyBasis(Basis),
    #[error("need counts for all three bases exactly once, got {0:?}")]
    BadBasisSet(Vec<Basis>),
    #[error("negative count in basis {0:?}")]
    NegativeCount(Basis),
    #[error("{0} theta samples are too few for a sinusoid fit (need at least 5)")]
    TooFewSamples(usize),
    #[error("sinusoid fit is degenerate: {0}")]
    DegenerateFit(String),
}

/// Click totals for one analyzer basis, with the independently measured
/// background for the same basis.
///
/// `background_norm` rescales the background acquisition to the signal
/// acquisition (signal windows divided by background windows); the
/// subtracted expectation is `background_norm × background_±`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisCounts {
    pub basis: Basis,
    pub n_plus: f64,
    pub n_minus: f64,
    pub background_plus: f64,
    pub background_minus: f64,
    pub background_norm: f64,
}

impl BasisCounts {
    /// Counts with no background information attached.
    pub fn raw(basis: Basis, n_plus: f64, n_minus: f64) -> Self {
        Self {
            basis,
            n_plus,
            n_minus,
            background_plus: 0.0,
            background_minus: 0.0,
            background_norm: 1.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.n_plus + self.n_minus
    }

    fn validate(&self) -> Result<(), TomographyError> {
        let all_counts = [
            self.n_plus,
            self.n_minus,
            self.background_plus,
            self.background_minus,
        ];
        if all_counts.iter().any(|&c| c < 0.0) || self.background_norm < 0.0 {
            return Err(TomographyError::NegativeCount(self.basis));
        }
        Ok(())
    }
}

/// Background-subtracted port counts with propagated uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubtractedCounts {
    pub basis: Basis,
    pub plus: f64,
    pub minus: f64,
    /// 1σ errors carried over from the raw and background counts.
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    /// Set when the background estimate exceeded the signal on both ports
    /// and the counts were zeroed.
    pub over_subtracted: bool,
}

impl SubtractedCounts {
    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }
}

/// Subtract the normalized background expectation from the port counts,
/// flooring at zero. Errors grow by the (scaled) Poisson error of the
/// background acquisition.
pub fn background_subtract(counts: &BasisCounts) -> SubtractedCounts {
    let r = counts.background_norm;
    let expected_plus = r * counts.background_plus;
    let expected_minus = r * counts.background_minus;
    let over_subtracted =
        expected_plus >= counts.n_plus && expected_minus >= counts.n_minus && counts.total() > 0.0;
    SubtractedCounts {
        basis: counts.basis,
        plus: (counts.n_plus - expected_plus).max(0.0),
        minus: (counts.n_minus - expected_minus).max(0.0),
        sigma_plus: (counts.n_plus + r * r * counts.background_plus).sqrt(),
        sigma_minus: (counts.n_minus + r * r * counts.background_minus).sqrt(),
        over_subtracted,
    }
}

/// Stokes vector estimate with per-component 1σ errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesEstimate {
    pub s: StokesVector,
    pub sigma: [f64; 3],
}

fn check_basis_set(counts: &[BasisCounts; 3]) -> Result<(), TomographyError> {
    let mut seen = [false; 3];
    for c in counts {
        c.validate()?;
        let axis = c.basis.stokes_axis();
        if seen[axis] {
            return Err(TomographyError::BadBasisSet(
                counts.iter().map(|c| c.basis).collect(),
            ));
        }
        seen[axis] = true;
    }
    Ok(())
}

/// Raw Stokes estimate from the three basis counts,
/// s_i = (n₊ − n₋)/(n₊ + n₋) with the binomial standard error
/// σ_i = 2 √(n₊ n₋ / (n₊ + n₋)³).
pub fn estimate_stokes(counts: &[BasisCounts; 3]) -> Result<StokesEstimate, TomographyError> {
    check_basis_set(counts)?;
    let mut s = [0.0f64; 3];
    let mut sigma = [0.0f64; 3];
    for c in counts {
        let total = c.total();
        if total <= 0.0 {
            return Err(TomographyError::EmptyBasis(c.basis));
        }
        let axis = c.basis.stokes_axis();
        s[axis] = (c.n_plus - c.n_minus) / total;
        sigma[axis] = 2.0 * (c.n_plus * c.n_minus / (total * total * total)).sqrt();
    }
    Ok(StokesEstimate {
        s: StokesVector::new(s[0], s[1], s[2]),
        sigma,
    })
}

/// Stokes estimate after background subtraction. Errors propagate from the
/// raw signal and background counts, σ(s) = 2 √(ñ₋² σ₊² + ñ₊² σ₋²) / Ñ².
pub fn estimate_stokes_subtracted(
    counts: &[BasisCounts; 3],
) -> Result<StokesEstimate, TomographyError> {
    check_basis_set(counts)?;
    let mut s = [0.0f64; 3];
    let mut sigma = [0.0f64; 3];
    for c in counts {
        let sub = background_subtract(c);
        let total = sub.total();
        if total <= 0.0 {
            return Err(TomographyError::EmptyBasis(c.basis));
        }
        let axis = c.basis.stokes_axis();
        s[axis] = (sub.plus - sub.minus) / total;
        sigma[axis] = 2.0
            * ((sub.minus * sub.sigma_plus).powi(2) + (sub.plus * sub.sigma_minus).powi(2)).sqrt()
            / (total * total);
    }
    Ok(StokesEstimate {
        s: StokesVector::new(s[0], s[1], s[2]),
        sigma,
    })
}

/// Linear-inversion reconstruction ρ = (I + Σ s_i σ_i)/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearInversion {
    pub rho: DensityMatrix,
    /// False when counting noise pushed an eigenvalue below zero.
    pub physical: bool,
    pub min_eigenvalue: f64,
}

/// Invert a Stokes vector into a (possibly non-physical) density matrix.
/// Non-physicality is flagged, never clipped here.
pub fn linear_inversion(s: &StokesVector) -> LinearInversion {
    let rho = density_from_stokes_unchecked(s);
    let min_eigenvalue = rho.min_eigenvalue();
    LinearInversion {
        physical: rho.is_physical(),
        min_eigenvalue,
        rho,
    }
}

/// Nearest physical state to a Stokes vector: the Bloch vector is clipped
/// to the unit ball, which is the Frobenius-nearest unit-trace PSD matrix
/// for a qubit.
pub fn nearest_physical(s: &StokesVector) -> DensityMatrix {
    let norm = s.norm();
    let clipped = if norm > 1.0 {
        StokesVector::new(s.s1 / norm, s.s2 / norm, s.s3 / norm)
    } else {
        *s
    };
    density_from_stokes_unchecked(&clipped)
}

/// Full reconstruction output: raw and background-subtracted linear
/// inversions plus the maximum-likelihood estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomographyResult {
    pub rho_raw: DensityMatrix,
    pub raw_physical: bool,
    pub rho_mle: DensityMatrix,
    pub mle_converged: bool,
    pub mle_iterations: u32,
    pub rho_bgsub: DensityMatrix,
    pub bgsub_physical: bool,
    pub stokes_raw: StokesEstimate,
    pub stokes_bgsub: StokesEstimate,
}

/// Run the whole reconstruction pipeline on one set of basis counts.
pub fn reconstruct(counts: &[BasisCounts; 3]) -> Result<TomographyResult, TomographyError> {
    let stokes_raw = estimate_stokes(counts)?;
    let raw = linear_inversion(&stokes_raw.s);
    let mle = mle_reconstruct(counts)?;
    let stokes_bgsub = estimate_stokes_subtracted(counts)?;
    let bgsub = linear_inversion(&stokes_bgsub.s);
    Ok(TomographyResult {
        rho_raw: raw.rho,
        raw_physical: raw.physical,
        rho_mle: mle.rho,
        mle_converged: mle.converged,
        mle_iterations: mle.iterations,
        rho_bgsub: bgsub.rho,
        bgsub_physical: bgsub.physical,
        stokes_raw,
        stokes_bgsub,
    })
}

/// Fidelity and degree-of-polarization report for one reconstruction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FidelityReport {
    /// F = Tr(ρ_raw |ψ⟩⟨ψ|) with its statistical error.
    pub fidelity: ValueWithError,
    /// Degree of polarization |s| of the raw reconstruction.
    pub degree_of_polarization: ValueWithError,
    /// Background-subtracted fidelity F̃.
    pub fidelity_bgsub: ValueWithError,
    /// Background-subtracted degree of polarization p̃.
    pub degree_of_polarization_bgsub: ValueWithError,
    /// True when F − 2σ_F clears the 2/3 bound of classical
    /// measure-and-prepare storage.
    pub exceeds_classical_limit: bool,
}

/// The classical bound on state-independent measure-and-prepare storage.
pub const CLASSICAL_FIDELITY_LIMIT: f64 = 2.0 / 3.0;

/// Score a reconstruction against the intended input state.
pub fn fidelity_report(result: &TomographyResult, target: &PolarizationState) -> FidelityReport {
    let target_bloch = density::stokes_from_density(&density::density_from_pure(target))
        .expect("pure states are physical");
    let f_raw = fidelity(&result.rho_raw, target);
    let f_sub = fidelity(&result.rho_bgsub, target);
    let sigma_f_raw = fidelity_sigma(&result.stokes_raw, &target_bloch);
    let sigma_f_sub = fidelity_sigma(&result.stokes_bgsub, &target_bloch);
    FidelityReport {
        fidelity: ValueWithError::new(f_raw, sigma_f_raw),
        degree_of_polarization: dop_estimate(&result.rho_raw, &result.stokes_raw),
        fidelity_bgsub: ValueWithError::new(f_sub, sigma_f_sub),
        degree_of_polarization_bgsub: dop_estimate(&result.rho_bgsub, &result.stokes_bgsub),
        exceeds_classical_limit: f_raw - 2.0 * sigma_f_raw > CLASSICAL_FIDELITY_LIMIT,
    }
}

fn fidelity_sigma(stokes: &StokesEstimate, target: &StokesVector) -> f64 {
    // F = (1 + s·t)/2 for a unit target axis t.
    let t = target.components();
    let mut var = 0.0;
    for i in 0..3 {
        var += (t[i] * stokes.sigma[i]).powi(2);
    }
    var.sqrt() / 2.0
}

fn dop_estimate(rho: &DensityMatrix, stokes: &StokesEstimate) -> ValueWithError {
    let p = degree_of_polarization(rho);
    let s = stokes.s.components();
    let sigma = if p > 0.0 {
        let mut var = 0.0;
        for i in 0..3 {
            var += (s[i] / p * stokes.sigma[i]).powi(2);
        }
        var.sqrt()
    } else {
        stokes.sigma.iter().fold(0.0f64, |acc, x| acc.max(*x))
    };
    ValueWithError::new(p, sigma)
}

/// Bootstrap cross-check of the fidelity error: resample the port counts
/// binomially `resamples` times and return the standard deviation of the
/// refitted fidelity.
pub fn bootstrap_fidelity_sigma(
    counts: &[BasisCounts; 3],
    target: &PolarizationState,
    resamples: u32,
    seed: u64,
) -> Result<f64, TomographyError> {
    use rand_distr::{Binomial, Distribution};

    check_basis_set(counts)?;
    let mut rng = crate::sim::rng::trial_rng(seed, 0);
    let mut values = Vec::with_capacity(resamples as usize);
    for _ in 0..resamples {
        let mut resampled = *counts;
        for c in resampled.iter_mut() {
            let total = c.total().round() as u64;
            if total == 0 {
                return Err(TomographyError::EmptyBasis(c.basis));
            }
            let p = (c.n_plus / c.total()).clamp(0.0, 1.0);
            let plus = Binomial::new(total, p)
                .map_err(|_| TomographyError::NegativeCount(c.basis))?
                .sample(&mut rng) as f64;
            c.n_plus = plus;
            c.n_minus = total as f64 - plus;
        }
        let est = estimate_stokes(&resampled)?;
        let inv = linear_inversion(&est.s);
        values.push(fidelity(&inv.rho, target));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok(var.sqrt())
}
