//! The write and read maps between photon polarization and the dual-rail
//! magnon.
//!
//! Ensemble A absorbs only |R⟩ light and ensemble B only |L⟩, so detecting
//! the fixed-polarization herald projects an input
//! cos θ |R⟩ + e^{iφ} sin θ |L⟩ onto the magnon superposition
//! cos θ |1⟩_A|0⟩_B + e^{iφ} sin θ |0⟩_A|1⟩_B without revealing which
//! ensemble was excited. The read pulse inverts the map: rail A re-emits
//! |R⟩, rail B re-emits |L⟩. Storage multiplies the A-B coherence by
//! exp(−Δt/T2) and the read window mixes in background light.

use num_complex::Complex64 as C64;

use crate::density::{self, DensityMatrix};
use crate::polarization::PolarizationState;
use crate::sim::noise::NoiseParams;
use crate::sim::timing::ProtocolTiming;

/// One stored dual-rail excitation with its decoherence bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnonRecord {
    /// Amplitude of |1⟩_A|0⟩_B.
    pub c_a: C64,
    /// Amplitude of |0⟩_A|1⟩_B.
    pub c_b: C64,
    /// Time the excitation was stored (the write pulse time).
    pub stored_at: f64,
    /// Factor applied to the A-B coherence at read time; 1 right after
    /// storage.
    pub coherence_factor: f64,
}

impl MagnonRecord {
    /// |c_A|² + |c_B|², 1 at storage.
    pub fn norm_sqr(&self) -> f64 {
        self.c_a.norm_sqr() + self.c_b.norm_sqr()
    }

    /// The same record with the rail amplitudes exchanged, used when the
    /// two ensembles have swapped roles for a trial.
    pub fn rail_swapped(&self) -> Self {
        Self {
            c_a: self.c_b,
            c_b: self.c_a,
            ..*self
        }
    }

    /// Record as read out at `read_time`: the coherence factor picks up
    /// exp(−Δt/T2) for the elapsed storage time.
    pub fn decohered(&self, noise: &NoiseParams, read_time: f64) -> Self {
        Self {
            coherence_factor: self.coherence_factor
                * noise.coherence_factor(read_time - self.stored_at),
            ..*self
        }
    }
}

/// Projection of an input polarization onto the dual-rail magnon,
/// c_A = cos θ, c_B = e^{iφ} sin θ.
pub fn write_map(input: &PolarizationState, stored_at: f64) -> MagnonRecord {
    let (c_r, c_l) = input.amplitudes();
    MagnonRecord {
        c_a: c_r,
        c_b: c_l,
        stored_at,
        coherence_factor: 1.0,
    }
}

/// Retrieved single-photon polarization state with its emission weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievedState {
    /// Polarization density matrix of the light in the read window.
    pub rho: DensityMatrix,
    /// Probability that the magnon was converted into a photon in the
    /// detection path (ε for a heralded read, 0 otherwise).
    pub emission_probability: f64,
    /// Weight of the magnon-sourced signal in `rho`; the remainder is
    /// background.
    pub signal_weight: f64,
}

/// Map a stored magnon back onto a photon polarization state.
///
/// The ideal output is the pure state with amplitudes (c_A, c_B) on
/// (|R⟩, |L⟩). Dephasing over the storage time multiplies the off-diagonal
/// by exp(−Δt/T2), and background light mixes in with weight
/// λ = μ_bg / (μ_bg + ε · P_emit). Passing `None` models reading an
/// un-heralded trial: background only, zero signal weight.
pub fn read_map(
    magnon: Option<&MagnonRecord>,
    noise: &NoiseParams,
    timing: &ProtocolTiming,
) -> RetrievedState {
    let bg_stokes = noise.background.stokes(timing);
    let rho_bg = density::density_from_stokes_unchecked(&density::StokesVector::new(
        bg_stokes[0],
        bg_stokes[1],
        bg_stokes[2],
    ));
    let Some(magnon) = magnon else {
        return RetrievedState {
            rho: rho_bg,
            emission_probability: 0.0,
            signal_weight: 0.0,
        };
    };

    let magnon = magnon.decohered(noise, timing.t_r);
    let lambda = noise.background_weight(1.0);

    // Signal part: dephased copy of the stored amplitudes on (|R>, |L>).
    let rr = magnon.c_a.norm_sqr();
    let ll = magnon.c_b.norm_sqr();
    let rl = magnon.c_a * magnon.c_b.conj() * magnon.coherence_factor;
    let w = 1.0 - lambda;
    let entries = vec![
        C64::new(w * rr, 0.0) + rho_bg.get(0, 0) * lambda,
        rl * w + rho_bg.get(0, 1) * lambda,
        rl.conj() * w + rho_bg.get(1, 0) * lambda,
        C64::new(w * ll, 0.0) + rho_bg.get(1, 1) * lambda,
    ];
    let rho = DensityMatrix::new(2, entries).expect("mixture of states is a state");
    RetrievedState {
        rho,
        emission_probability: noise.epsilon_retrieval,
        signal_weight: w,
    }
}

/// Signal polarization alone (no background), with the record's coherence
/// factor applied to the off-diagonal; this is what the analyzer routes
/// for magnon-sourced photons.
pub(crate) fn signal_density(magnon: &MagnonRecord) -> DensityMatrix {
    let rl = magnon.c_a * magnon.c_b.conj() * magnon.coherence_factor;
    let entries = vec![
        C64::new(magnon.c_a.norm_sqr(), 0.0),
        rl,
        rl.conj(),
        C64::new(magnon.c_b.norm_sqr(), 0.0),
    ];
    DensityMatrix::new(2, entries).expect("dephased pure state is a state")
}
