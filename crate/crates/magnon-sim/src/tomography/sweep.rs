//! Zenith-angle sweeps and sinusoid fits of the projection curves.
//!
//! With φ = 0 and θ varied, each analyzer port probability follows
//! A·cos(2θ + δ) + B. The fit is linear least squares on the basis
//! {cos 2θ, sin 2θ, 1}, so it is deterministic and needs no starting
//! point; contrast is reported as 2A (the peak-to-peak swing, which equals
//! the degree of polarization of the output along that basis axis).

use serde::{Deserialize, Serialize};

use crate::polarization::{Basis, FiducialState};

use super::{BasisCounts, TomographyError};

/// Counts of all three bases for one input zenith angle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThetaSample {
    pub theta: f64,
    pub counts: [BasisCounts; 3],
}

/// One point of a projection curve: the fraction of a basis's detections
/// that landed on one port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta: f64,
    pub probability: f64,
    /// Binomial 1σ error of the fraction.
    pub sigma: f64,
}

/// Least-squares fit of one port curve to A·cos(2θ + δ) + B.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub basis: Basis,
    pub port: FiducialState,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    /// Peak-to-peak swing 2A.
    pub contrast: f64,
    /// Root-mean-square of the fit residuals; the linearity metric.
    pub residual_rms: f64,
    /// Mean statistical 1σ of the fitted points, for residual comparison.
    pub mean_sigma: f64,
    pub points: Vec<CurvePoint>,
}

/// Output of [`theta_sweep`]: six fitted port curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub fits: Vec<SinusoidFit>,
}

impl SweepResult {
    pub fn fit(&self, port: FiducialState) -> Option<&SinusoidFit> {
        self.fits.iter().find(|f| f.port == port)
    }
}

/// Fit all six projection curves of a zenith-angle sweep.
///
/// Needs at least 5 θ samples; fewer (or a degenerate design matrix, e.g.
/// all θ equal) is an error.
pub fn theta_sweep(samples: &[ThetaSample]) -> Result<SweepResult, TomographyError> {
    if samples.len() < 5 {
        return Err(TomographyError::TooFewSamples(samples.len()));
    }
    let mut fits = Vec::with_capacity(6);
    for basis_index in 0..3 {
        let basis = samples[0].counts[basis_index].basis;
        let (plus_port, minus_port) = basis.ports();
        for (port, use_plus) in [(plus_port, true), (minus_port, false)] {
            let mut points = Vec::with_capacity(samples.len());
            for sample in samples {
                let c = &sample.counts[basis_index];
                if c.basis != basis {
                    return Err(TomographyError::BadBasisSet(vec![c.basis, basis]));
                }
                let total = c.total();
                if total <= 0.0 {
                    return Err(TomographyError::EmptyBasis(basis));
                }
                let numerator = if use_plus { c.n_plus } else { c.n_minus };
                let p = numerator / total;
                let sigma = (c.n_plus * c.n_minus / (total * total * total)).sqrt();
                points.push(CurvePoint {
                    theta: sample.theta,
                    probability: p,
                    sigma,
                });
            }
            fits.push(fit_sinusoid(basis, port, points)?);
        }
    }
    Ok(SweepResult { fits })
}

/// Linear least squares of p(θ) = a cos 2θ + b sin 2θ + B, then
/// A = √(a² + b²), δ = atan2(−b, a).
fn fit_sinusoid(
    basis: Basis,
    port: FiducialState,
    points: Vec<CurvePoint>,
) -> Result<SinusoidFit, TomographyError> {
    let n = points.len();
    // Normal equations for the design matrix [cos 2θ, sin 2θ, 1].
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for p in &points {
        let row = [(2.0 * p.theta).cos(), (2.0 * p.theta).sin(), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * p.probability;
        }
    }
    let coeffs = solve_3x3(ata, aty).ok_or_else(|| {
        TomographyError::DegenerateFit(format!(
            "singular normal equations for {} points of the {} curve",
            n,
            port.label()
        ))
    })?;
    let [a, b, offset] = coeffs;
    let amplitude = (a * a + b * b).sqrt();
    let phase = (-b).atan2(a);

    let mut ss = 0.0;
    let mut sigma_sum = 0.0;
    for p in &points {
        let model = a * (2.0 * p.theta).cos() + b * (2.0 * p.theta).sin() + offset;
        ss += (p.probability - model).powi(2);
        sigma_sum += p.sigma;
    }
    Ok(SinusoidFit {
        basis,
        port,
        amplitude,
        phase,
        offset,
        contrast: 2.0 * amplitude,
        residual_rms: (ss / n as f64).sqrt(),
        mean_sigma: sigma_sum / n as f64,
        points,
    })
}

fn solve_3x3(mut a: [[f64; 3]; 3], mut y: [f64; 3]) -> Option<[f64; 3]> {
    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        y.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            y[row] -= f * y[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = y[row];
        for k in (row + 1)..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
