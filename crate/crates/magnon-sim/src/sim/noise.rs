//! Calibrated noise model for the write/store/read channel.
//!
//! The herald probability is the product of three independent factors:
//! transverse optical depth α⊥, single-atom cooperativity η (the emission
//! probability into the resonator), and photon detection efficiency q. The
//! readout side is characterized by the retrieval probability ε into the
//! detection path, a mean background photon number per read window, dark
//! counts, a single magnon dephasing time T2, and the optical pumping
//! purity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::timing::ProtocolTiming;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("{name} = {value} is outside [0, 1]")]
    NotAProbability { name: &'static str, value: f64 },
    #[error("{name} = {value} must be non-negative")]
    Negative { name: &'static str, value: f64 },
    #[error("T2 must be positive, got {0}")]
    NonPositiveT2(f64),
}

/// How background photons in the read window are polarized.
///
/// The dominant background mechanism is the small σ± admixture the read
/// beam picks up from spin precession during the read window. By default
/// the resulting light is treated as unpolarized; the circular-bias mode
/// ties a net circular component to the precession angle accumulated over
/// the read pulse.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackgroundModel {
    #[default]
    Unpolarized,
    /// Circular (s3) bias proportional to sin of the read-window precession
    /// angle, scaled by `coupling` ∈ [−1, 1].
    CircularBias { coupling: f64 },
}

impl BackgroundModel {
    /// Stokes vector of the background light.
    pub fn stokes(&self, timing: &ProtocolTiming) -> [f64; 3] {
        match self {
            BackgroundModel::Unpolarized => [0.0, 0.0, 0.0],
            BackgroundModel::CircularBias { coupling } => {
                let angle = super::timing::larmor_angle(timing.read_duration, timing);
                [0.0, 0.0, (coupling * angle.sin()).clamp(-1.0, 1.0)]
            }
        }
    }
}

/// All noise knobs of the simulated memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Optical depth transverse to the resonator.
    pub alpha_perp: f64,
    /// Single-atom cooperativity; emission probability into the resonator.
    pub eta: f64,
    /// Photon detection efficiency.
    pub q: f64,
    /// Retrieval probability into the detection path, before the detector.
    pub epsilon_retrieval: f64,
    /// Mean background photons reaching the analyzer per read window.
    pub mu_bg: f64,
    /// Dark counts per detector per window.
    pub dark_rate: f64,
    /// Magnon dephasing time in seconds.
    pub t2: f64,
    /// Fraction of atoms pumped into the intended sublevels.
    pub pump_purity: f64,
    /// Probability that a heralded trial stores a double excitation, which
    /// reads out as two photons.
    pub p2: f64,
    /// Polarization model for the background light.
    pub background: BackgroundModel,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            alpha_perp: 0.01,
            eta: 1e-3,
            q: 0.1,
            epsilon_retrieval: 0.5,
            mu_bg: 0.0,
            dark_rate: 0.0,
            t2: 3e-6,
            pump_purity: 0.99,
            p2: 0.0,
            background: BackgroundModel::Unpolarized,
        }
    }
}

impl NoiseParams {
    /// Perfect channel: unit retrieval and detection, no background, no
    /// dark counts, no dephasing over any finite storage time.
    pub fn noiseless() -> Self {
        Self {
            alpha_perp: 1.0,
            eta: 1.0,
            q: 1.0,
            epsilon_retrieval: 1.0,
            mu_bg: 0.0,
            dark_rate: 0.0,
            t2: f64::INFINITY,
            pump_purity: 1.0,
            p2: 0.0,
            background: BackgroundModel::Unpolarized,
        }
    }

    /// The single calibrated configuration used for the reproduction runs.
    ///
    /// Herald factors are the measured ones (α⊥ = 0.01, η = 10⁻³, q = 0.1,
    /// p = 10⁻⁶) and ε = 0.5. The background level is the one free
    /// parameter: it is fitted in closed form so that the six-fiducial mean
    /// fidelity comes out at 0.935, the middle of the reported band. The
    /// same background then also reproduces the observed conditional
    /// autocorrelation (≈ 0.24) and the photonic concurrence scale without
    /// any extra double-excitation weight, so `p2` calibrates to zero. T2
    /// is set long (1 ms): over the 0.5 μs storage time the measured
    /// background-subtracted fidelities sit close to unity, which bounds
    /// the dephasing contribution to well below the photonic background.
    pub fn calibrated() -> Self {
        let mut noise = Self {
            t2: 1e-3,
            ..Self::default()
        };
        let timing = ProtocolTiming::default();
        let total_bg = fit_background_to_mean_fidelity(0.935, &noise, &timing);
        noise.mu_bg = (total_bg - (1.0 - noise.pump_purity) * noise.epsilon_retrieval).max(0.0);
        noise
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, value) in [
            ("alpha_perp", self.alpha_perp),
            ("eta", self.eta),
            ("q", self.q),
            ("epsilon_retrieval", self.epsilon_retrieval),
            ("pump_purity", self.pump_purity),
            ("p2", self.p2),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::NotAProbability { name, value });
            }
        }
        for (name, value) in [("mu_bg", self.mu_bg), ("dark_rate", self.dark_rate)] {
            if !(value >= 0.0) {
                return Err(NoiseError::Negative { name, value });
            }
        }
        if !(self.t2 > 0.0) {
            return Err(NoiseError::NonPositiveT2(self.t2));
        }
        Ok(())
    }

    /// Mean background photons per read window including the contribution
    /// of imperfectly pumped atoms, which scatter read light into the
    /// detection path with the retrieval-scale efficiency.
    pub fn effective_background(&self) -> f64 {
        self.mu_bg + (1.0 - self.pump_purity) * self.epsilon_retrieval
    }

    /// Weight of the unpolarized background in the retrieved state for a
    /// trial with signal emission probability `p_emit` (1 for a heralded
    /// trial, 0 for an unheralded one).
    pub fn background_weight(&self, p_emit: f64) -> f64 {
        let bg = self.effective_background();
        let signal = self.epsilon_retrieval * p_emit;
        if bg + signal == 0.0 {
            0.0
        } else {
            bg / (bg + signal)
        }
    }

    /// Magnon coherence surviving a storage interval `dt`.
    pub fn coherence_factor(&self, dt: f64) -> f64 {
        (-dt / self.t2).exp()
    }
}

/// Herald probability p = α⊥ · η · q.
pub fn herald_probability(noise: &NoiseParams) -> f64 {
    noise.alpha_perp * noise.q * noise.eta
}

/// Total background photon number per read window required for the mean
/// fidelity over the six fiducial states to equal `target`.
///
/// With background weight λ and storage coherence factor c, circular inputs
/// retain F = 1 − λ/2 and equatorial inputs F = (1−λ)(1+c)/2 + λ/2, so the
/// six-state mean is linear in λ and inverts in closed form. The returned
/// value is the effective background μ = ε λ/(1−λ).
pub fn fit_background_to_mean_fidelity(
    target: f64,
    noise: &NoiseParams,
    timing: &ProtocolTiming,
) -> f64 {
    let c = noise.coherence_factor(timing.storage_time());
    let intercept = (2.0 + c) / 3.0;
    let slope = 1.0 / 6.0 + c / 3.0;
    let lambda = ((intercept - target) / slope).clamp(0.0, 1.0 - 1e-12);
    noise.epsilon_retrieval * lambda / (1.0 - lambda)
}
