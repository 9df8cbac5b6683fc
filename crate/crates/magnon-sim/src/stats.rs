//! Photon counting statistics on click streams.
//!
//! The single-photon character of the retrieved field is scored by the
//! conditional autocorrelation behind a balanced splitter,
//!
//! ```text
//! g₂ = N123 · N1 / (N12 · N13),
//! ```
//!
//! with N1 heralds, N12/N13 herald-port coincidences and N123 triple
//! coincidences, all counted per read window (no sub-window timing). An
//! ideal single-photon source gives 0, coherent light 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{herald_probability, NoiseParams, TrialRecord};
use crate::ValueWithError;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("insufficient statistics: N12·N13 = 0, g2 is undefined")]
    InsufficientStatistics,
    #[error("bootstrap needs at least 2 trials with a herald")]
    TooFewTrials,
}

/// Herald and coincidence totals of a click stream.
///
/// Counting assumes the analyzer was in the balanced, polarization-
/// insensitive configuration, so that D2 and D3 are interchangeable arms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceTally {
    pub n_trials: u64,
    /// Trials with a herald click.
    pub n1: u64,
    /// Trials with a herald and at least one D2 click.
    pub n12: u64,
    /// Trials with a herald and at least one D3 click.
    pub n13: u64,
    /// Trials with a herald and clicks on both analyzer arms.
    pub n123: u64,
}

impl CoincidenceTally {
    /// Merge two partial tallies; used to aggregate parallel scans.
    pub fn merge(&self, other: &CoincidenceTally) -> CoincidenceTally {
        CoincidenceTally {
            n_trials: self.n_trials + other.n_trials,
            n1: self.n1 + other.n1,
            n12: self.n12 + other.n12,
            n13: self.n13 + other.n13,
            n123: self.n123 + other.n123,
        }
    }

    pub fn add_trial(&mut self, d1: u32, d2: u32, d3: u32) {
        self.n_trials += 1;
        if d1 == 0 {
            return;
        }
        self.n1 += 1;
        if d2 > 0 {
            self.n12 += 1;
        }
        if d3 > 0 {
            self.n13 += 1;
        }
        if d2 > 0 && d3 > 0 {
            self.n123 += 1;
        }
    }

    /// Heralds per trial.
    pub fn herald_rate(&self) -> f64 {
        if self.n_trials == 0 {
            0.0
        } else {
            self.n1 as f64 / self.n_trials as f64
        }
    }
}

/// Count heralds and coincidences over a record stream.
pub fn tally<'a, I>(records: I) -> CoincidenceTally
where
    I: IntoIterator<Item = &'a TrialRecord>,
{
    let mut t = CoincidenceTally::default();
    for r in records {
        t.add_trial(r.d1(), r.d2(), r.d3());
    }
    t
}

/// Conditional autocorrelation g₂ = N123·N1/(N12·N13) with first-order
/// propagation of independent Poisson errors on the four counts.
pub fn conditional_g2(t: &CoincidenceTally) -> Result<ValueWithError, StatsError> {
    if t.n12 == 0 || t.n13 == 0 {
        return Err(StatsError::InsufficientStatistics);
    }
    let (n1, n12, n13, n123) = (t.n1 as f64, t.n12 as f64, t.n13 as f64, t.n123 as f64);
    let g2 = n123 * n1 / (n12 * n13);
    let rel_var = if t.n123 == 0 {
        0.0
    } else {
        1.0 / n123 + 1.0 / n1 + 1.0 / n12 + 1.0 / n13
    };
    Ok(ValueWithError::new(g2, g2 * rel_var.sqrt()))
}

/// Bootstrap cross-check of the g₂ error: resample trials with replacement
/// and return the standard deviation of the re-derived g₂.
pub fn bootstrap_g2(records: &[TrialRecord], resamples: u32, seed: u64) -> Result<f64, StatsError> {
    use rand::Rng;

    if records.len() < 2 {
        return Err(StatsError::TooFewTrials);
    }
    // Compact per-trial click flags so the resampling loop stays cheap.
    let flags: Vec<(bool, bool, bool)> = records
        .iter()
        .map(|r| (r.d1() > 0, r.d2() > 0, r.d3() > 0))
        .collect();
    let mut values = Vec::with_capacity(resamples as usize);
    for k in 0..resamples {
        let mut rng = crate::sim::rng::trial_rng(seed, k as u64);
        let mut t = CoincidenceTally::default();
        for _ in 0..flags.len() {
            let (d1, d2, d3) = flags[rng.gen_range(0..flags.len())];
            t.add_trial(u32::from(d1), u32::from(d2), u32::from(d3));
        }
        if let Ok(v) = conditional_g2(&t) {
            values.push(v.value);
        }
    }
    if values.len() < 2 {
        return Err(StatsError::InsufficientStatistics);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok(var.sqrt())
}

/// Success probability and rate for a given trial rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateProjection {
    /// Herald (success) probability per trial.
    pub herald_probability: f64,
    /// Successes per second at the given trial rate.
    pub success_rate: f64,
    pub trials_per_second: f64,
}

/// Project the heralded-storage success rate: p = α⊥ηq, rate = p · trials/s.
pub fn success_rate_projection(noise: &NoiseParams, trials_per_second: f64) -> RateProjection {
    let p = herald_probability(noise);
    RateProjection {
        herald_probability: p,
        success_rate: p * trials_per_second,
        trials_per_second,
    }
}

/// One-line JSON summary of a g₂ analysis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct G2Summary {
    pub g2: f64,
    pub err: f64,
    #[serde(rename = "N1")]
    pub n1: u64,
    #[serde(rename = "N12")]
    pub n12: u64,
    #[serde(rename = "N13")]
    pub n13: u64,
    #[serde(rename = "N123")]
    pub n123: u64,
    pub herald_rate: f64,
}

impl G2Summary {
    pub fn new(t: &CoincidenceTally, g2: ValueWithError) -> Self {
        Self {
            g2: g2.value,
            err: g2.sigma,
            n1: t.n1,
            n12: t.n12,
            n13: t.n13,
            n123: t.n123,
            herald_rate: t.herald_rate(),
        }
    }
}
