//! Batched trial execution.
//!
//! A block is a run of trials sharing one [`TrialContext`]; trials inside a
//! block get consecutive stream indices starting at the block's base, and
//! the block is evaluated with rayon. Because each trial owns its stream,
//! the collected records are identical whether the block runs on one thread
//! or many.

use rayon::prelude::*;

use crate::sim::rng::trial_rng;
use crate::sim::trial::{run_trial, TrialContext, TrialRecord};

/// Run `count` trials of one context in parallel.
///
/// `trial_base` offsets the recorded trial indices (and the ensemble-swap
/// parity); `stream_base` selects the RNG streams. Runs composed of several
/// blocks keep both counters monotone across blocks.
pub fn run_block(
    ctx: &TrialContext,
    trial_base: u64,
    count: u64,
    seed: u64,
    stream_base: u64,
) -> Vec<TrialRecord> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let trial_index = trial_base + i;
            let mut rng = trial_rng(seed, stream_base + i);
            run_trial(ctx, trial_index, &mut rng)
        })
        .collect()
}

/// Run a block serially; used to check schedule independence.
pub fn run_block_serial(
    ctx: &TrialContext,
    trial_base: u64,
    count: u64,
    seed: u64,
    stream_base: u64,
) -> Vec<TrialRecord> {
    (0..count)
        .map(|i| {
            let trial_index = trial_base + i;
            let mut rng = trial_rng(seed, stream_base + i);
            run_trial(ctx, trial_index, &mut rng)
        })
        .collect()
}

/// Run a trial sequence whose analyzer setting rotates per trial: trial i
/// uses `contexts[i % len]`. An empty context list or zero count gives an
/// empty record stream.
pub fn run_sequence(
    contexts: &[TrialContext],
    count: u64,
    seed: u64,
    stream_base: u64,
) -> Vec<TrialRecord> {
    if contexts.is_empty() {
        return Vec::new();
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            let ctx = &contexts[(i % contexts.len() as u64) as usize];
            let mut rng = trial_rng(seed, stream_base + i);
            run_trial(ctx, i, &mut rng)
        })
        .collect()
}
