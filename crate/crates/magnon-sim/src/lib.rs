//! Click-level simulator and estimation toolkit for a heralded dual-rail
//! polarization quantum memory.
//!
//! The simulated device stores the polarization qubit of a write pulse as a
//! single collective spin excitation (magnon) shared between two overlapped
//! atomic ensembles, announces successful storage with a herald photon, and
//! later re-emits the photon with the original polarization. This crate
//! models the optical-pump → write → store → read sequence at the level of
//! detector clicks and provides the estimators used to score the retrieved
//! state:
//!
//! - [`polarization`] / [`density`]: polarization qubits, density matrices,
//!   Stokes vectors, and the six fiducial measurement states spanning three
//!   mutually unbiased bases.
//! - [`sim`]: the Monte Carlo engine with herald sampling, the write/read maps,
//!   Larmor-timed scheduling, dephasing, and the read-window background model.
//! - [`tomography`]: three-basis state reconstruction (linear inversion and
//!   physicality-constrained maximum likelihood), background subtraction,
//!   fidelity reports, and sinusoid fits for zenith-angle sweeps.
//! - [`stats`]: heralded coincidence tallies, the conditional
//!   autocorrelation g₂, and success-rate projections.
//! - [`entanglement`]: Wootters concurrence of the dual-rail state and the
//!   photonic lower bound built from measured yields.
//! - [`plan`] / [`commands`]: batch experiment plans loaded from TOML and
//!   the report writers behind the `magnon-sim` binary.
//!
//! Every random decision is drawn from a counter-based per-trial stream, so
//! a run is bit-reproducible for a fixed seed regardless of how trials are
//! scheduled across threads.
//!
//! # Quick start
//!
//! ```
//! use magnon_sim::polarization::{FiducialState, PolarizationState};
//! use magnon_sim::density::fidelity;
//! use magnon_sim::sim::{write_map, read_map, NoiseParams, ProtocolTiming};
//!
//! // Store H and read it back through a noiseless channel.
//! let input = FiducialState::H.state();
//! let timing = ProtocolTiming::default();
//! let noise = NoiseParams::noiseless();
//! let magnon = write_map(&input, timing.t_w);
//! let retrieved = read_map(Some(&magnon), &noise, &timing);
//! assert!((fidelity(&retrieved.rho, &input) - 1.0).abs() < 1e-12);
//! ```
//!
//! The `examples/` directory holds one runnable program per capability; see
//! the README for the list and for the CLI subcommands.

pub mod commands;
pub mod density;
pub mod entanglement;
mod linalg;
pub mod plan;
pub mod polarization;
pub mod records;
pub mod sim;
pub mod stats;
pub mod tomography;

use serde::{Deserialize, Serialize};

/// A scalar estimate together with its 1σ statistical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueWithError {
    pub value: f64,
    pub sigma: f64,
}

impl ValueWithError {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }
}
