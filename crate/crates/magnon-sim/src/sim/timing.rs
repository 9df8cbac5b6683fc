//! Protocol timing on the Larmor precession grid.
//!
//! A static magnetic field makes the two macroscopic ensemble spins precess
//! with period τ_L. The pulse schedule rides on that grid: optical pumping
//! at t = 0, the write pulse half a period later when the spins lie along
//! ∓x, and the read pulse a quarter period after that when they point along
//! the resonator axis ±z. Trials repeat every 1.5 τ_L so the two ensembles
//! exchange roles from one trial to the next.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TimingError {
    #[error("Larmor period must be positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("pulse schedule must satisfy 0 <= t_opt <= t_w < t_r")]
    BadSchedule,
    #[error("{name} duration {value} is not short against the Larmor period {tau_l}")]
    PulseTooLong {
        name: &'static str,
        value: f64,
        tau_l: f64,
    },
    #[error("trials per sequence must be positive")]
    NoTrials,
}

/// Pulse schedule for one optical-pump → write → read trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTiming {
    /// Larmor precession period in seconds.
    pub tau_l: f64,
    /// Optical pumping time; origin of the trial clock.
    pub t_opt: f64,
    /// Write pulse time, τ_L/2 by default.
    pub t_w: f64,
    /// Read pulse time, t_w + τ_L/4 by default.
    pub t_r: f64,
    /// Write pulse duration in seconds.
    pub write_duration: f64,
    /// Read pulse duration in seconds.
    pub read_duration: f64,
    /// Repetition period of one trial, 1.5 τ_L by default.
    pub trial_period: f64,
    /// Trials in one uninterrupted sequence.
    pub trials_per_sequence: u64,
}

impl ProtocolTiming {
    /// Default schedule derived from a given Larmor period.
    pub fn from_larmor_period(tau_l: f64) -> Self {
        Self {
            tau_l,
            t_opt: 0.0,
            t_w: tau_l / 2.0,
            t_r: tau_l / 2.0 + tau_l / 4.0,
            write_duration: 50e-9,
            read_duration: 100e-9,
            trial_period: 1.5 * tau_l,
            trials_per_sequence: 10_000,
        }
    }

    pub fn validate(&self) -> Result<(), TimingError> {
        if !(self.tau_l > 0.0) {
            return Err(TimingError::NonPositivePeriod(self.tau_l));
        }
        if !(0.0 <= self.t_opt && self.t_opt <= self.t_w && self.t_w < self.t_r) {
            return Err(TimingError::BadSchedule);
        }
        for (name, value) in [("write", self.write_duration), ("read", self.read_duration)] {
            if !(value > 0.0) || value / self.tau_l >= 0.25 {
                return Err(TimingError::PulseTooLong {
                    name,
                    value,
                    tau_l: self.tau_l,
                });
            }
        }
        if self.trials_per_sequence == 0 {
            return Err(TimingError::NoTrials);
        }
        Ok(())
    }

    /// Storage interval t_r − t_w over which the magnon dephases.
    pub fn storage_time(&self) -> f64 {
        self.t_r - self.t_w
    }
}

impl Default for ProtocolTiming {
    /// τ_L = 2 μs: write at 1 μs for 50 ns, read at 1.5 μs for 100 ns,
    /// one trial every 3 μs, 10⁴ trials per sequence.
    fn default() -> Self {
        Self::from_larmor_period(2e-6)
    }
}

/// Spin precession angle 2π t / τ_L, reduced to [0, 2π).
pub fn larmor_angle(t: f64, timing: &ProtocolTiming) -> f64 {
    (TAU * t / timing.tau_l).rem_euclid(TAU)
}
