//! Physicality-constrained maximum-likelihood reconstruction.
//!
//! The state is parameterized through a lower-triangular factor
//!
//! ```text
//! G = [ t1          0  ]        ρ = G†G / Tr(G†G),
//!     [ t3 + i t4   t2 ]
//! ```
//!
//! which is positive and unit-trace for any real (t1, t2, t3, t4). The
//! objective is the product of per-port binomial likelihoods of the three
//! basis settings; settings are measured in separate trials, so the three
//! factors are independent by construction. Optimization is deterministic
//! gradient ascent with a backtracking line search, started from the
//! linear-inversion estimate projected to the nearest physical state.

use num_complex::Complex64 as C64;

use crate::density::DensityMatrix;
use crate::polarization::Basis;

use super::{estimate_stokes, nearest_physical, BasisCounts, TomographyError};

/// Ascent stops when the log-likelihood improves by less than this.
pub const MLE_TOLERANCE: f64 = 1e-10;
/// Hard iteration cap; hitting it reports non-convergence.
pub const MLE_MAX_ITERATIONS: u32 = 10_000;

/// Maximum-likelihood reconstruction output.
#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    /// The reconstructed state; physical unconditionally.
    pub rho: DensityMatrix,
    /// False when the iteration cap was hit first; `rho` is then the best
    /// iterate found.
    pub converged: bool,
    pub iterations: u32,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, Copy)]
struct Factor {
    t: [f64; 4],
}

impl Factor {
    /// ρ = G†G / Tr(G†G) on the (R, L) basis.
    fn density_entries(&self) -> [C64; 4] {
        let [t1, t2, t3, t4] = self.t;
        let off = C64::new(t3, -t4) * t2; // (G†G)_{RL}
        let rr = t1 * t1 + t3 * t3 + t4 * t4;
        let ll = t2 * t2;
        let trace = rr + ll;
        if trace <= 0.0 {
            // Degenerate parameters: fall back to the maximally mixed state.
            return [
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.0),
            ];
        }
        [
            C64::new(rr / trace, 0.0),
            off / trace,
            off.conj() / trace,
            C64::new(ll / trace, 0.0),
        ]
    }

    /// Cholesky-like factorization of a physical qubit state.
    fn from_density(rho: &DensityMatrix) -> Self {
        let rr = rho.get(0, 0).re.max(0.0);
        let ll = rho.get(1, 1).re.max(0.0);
        let lr = rho.get(1, 0); // (t3 + i t4) t2
        if ll <= 1e-14 {
            return Self {
                t: [rr.sqrt(), 0.0, 0.0, 0.0],
            };
        }
        let t2 = ll.sqrt();
        let t3 = lr.re / t2;
        let t4 = lr.im / t2;
        let t1 = (rr - t3 * t3 - t4 * t4).max(0.0).sqrt();
        Self {
            t: [t1, t2, t3, t4],
        }
    }
}

/// Expected plus-port probabilities for the three bases given unit-trace ρ
/// entries: p₊ = (1 + s_i)/2 on each basis axis.
fn port_probabilities(entries: &[C64; 4]) -> [(Basis, f64); 3] {
    let rl = entries[1];
    let s3 = entries[0].re - entries[3].re;
    [
        (Basis::Hv, (1.0 + 2.0 * rl.re) / 2.0),
        (Basis::St, (1.0 + 2.0 * rl.im) / 2.0),
        (Basis::Lr, (1.0 + s3) / 2.0),
    ]
}

fn log_likelihood(factor: &Factor, counts: &[BasisCounts; 3]) -> f64 {
    let entries = factor.density_entries();
    let probs = port_probabilities(&entries);
    let mut ll = 0.0;
    for c in counts {
        let p_plus = probs
            .iter()
            .find(|(b, _)| *b == c.basis)
            .map(|(_, p)| *p)
            .expect("all bases present")
            .clamp(1e-12, 1.0 - 1e-12);
        ll += c.n_plus * p_plus.ln() + c.n_minus * (1.0 - p_plus).ln();
    }
    ll
}

fn gradient(factor: &Factor, counts: &[BasisCounts; 3]) -> [f64; 4] {
    // Central differences; the objective is smooth and cheap to evaluate.
    let scale = factor.t.iter().map(|t| t.abs()).fold(1.0f64, f64::max);
    let h = 1e-7 * scale;
    let mut grad = [0.0; 4];
    for k in 0..4 {
        let mut plus = *factor;
        plus.t[k] += h;
        let mut minus = *factor;
        minus.t[k] -= h;
        grad[k] = (log_likelihood(&plus, counts) - log_likelihood(&minus, counts)) / (2.0 * h);
    }
    grad
}

/// Maximum-likelihood density matrix for three-basis counts.
///
/// Convergence is declared when the log-likelihood improves by less than
/// [`MLE_TOLERANCE`]; after [`MLE_MAX_ITERATIONS`] steps the best iterate is
/// returned with `converged = false`.
pub fn mle_reconstruct(counts: &[BasisCounts; 3]) -> Result<MleResult, TomographyError> {
    // Fixed starting point: linear inversion projected into the state set.
    let start = estimate_stokes(counts)?;
    let mut factor = Factor::from_density(&nearest_physical(&start.s));
    // Keep the factor away from the exact boundary so the gradient can move
    // every parameter.
    for t in factor.t.iter_mut() {
        if t.abs() < 1e-6 {
            *t = 1e-6;
        }
    }

    let mut ll = log_likelihood(&factor, counts);
    let mut step = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..MLE_MAX_ITERATIONS {
        iterations = iter + 1;
        let grad = gradient(&factor, counts);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm == 0.0 {
            converged = true;
            break;
        }

        // Backtracking line search along the normalized gradient.
        let mut improved = false;
        while step > 1e-18 {
            let mut trial = factor;
            for k in 0..4 {
                trial.t[k] += step * grad[k] / grad_norm;
            }
            let trial_ll = log_likelihood(&trial, counts);
            if trial_ll > ll {
                let gain = trial_ll - ll;
                factor = trial;
                ll = trial_ll;
                step *= 1.5;
                improved = true;
                if gain < MLE_TOLERANCE {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !improved || converged {
            converged = true;
            break;
        }
    }

    let entries = factor.density_entries();
    let rho = DensityMatrix::new(2, entries.to_vec()).expect("G†G/Tr is physical");
    Ok(MleResult {
        rho,
        converged,
        iterations,
        log_likelihood: ll,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{
        density_from_pure, density_from_stokes, fidelity, trace_distance, DensityMatrix,
        StokesVector,
    };
    use crate::polarization::FiducialState;
    use crate::sim::rng::trial_rng;
    use rand_distr::{Binomial, Distribution};

    fn exact_counts(s: &StokesVector, n: f64) -> [BasisCounts; 3] {
        [
            BasisCounts::raw(Basis::Hv, n * (1.0 + s.s1) / 2.0, n * (1.0 - s.s1) / 2.0),
            BasisCounts::raw(Basis::St, n * (1.0 + s.s2) / 2.0, n * (1.0 - s.s2) / 2.0),
            BasisCounts::raw(Basis::Lr, n * (1.0 + s.s3) / 2.0, n * (1.0 - s.s3) / 2.0),
        ]
    }

    fn sampled_counts(s: &StokesVector, n: u64, seed: u64) -> [BasisCounts; 3] {
        let mut rng = trial_rng(seed, 0);
        let mut out = exact_counts(s, 0.0);
        for (c, p_plus) in
            out.iter_mut()
                .zip([(1.0 + s.s1) / 2.0, (1.0 + s.s2) / 2.0, (1.0 + s.s3) / 2.0])
        {
            let plus = Binomial::new(n, p_plus.clamp(0.0, 1.0))
                .unwrap()
                .sample(&mut rng) as f64;
            c.n_plus = plus;
            c.n_minus = n as f64 - plus;
        }
        out
    }

    #[test]
    fn exact_pure_counts_recover_the_state() {
        let h = FiducialState::H.state();
        let counts = exact_counts(&StokesVector::new(1.0, 0.0, 0.0), 1e6);
        let result = mle_reconstruct(&counts).unwrap();
        assert!(result.converged);
        assert!(
            fidelity(&result.rho, &h) > 0.999,
            "F = {}",
            fidelity(&result.rho, &h)
        );
    }

    #[test]
    fn sampled_mixed_counts_recover_the_identity() {
        let counts = sampled_counts(&StokesVector::new(0.0, 0.0, 0.0), 1_000_000, 3);
        let result = mle_reconstruct(&counts).unwrap();
        let target = DensityMatrix::maximally_mixed(2);
        assert!(result.converged);
        assert!(
            trace_distance(&result.rho, &target) < 0.01,
            "T = {}",
            trace_distance(&result.rho, &target)
        );
    }

    #[test]
    fn pathological_counts_still_give_a_physical_state() {
        let counts = [
            BasisCounts::raw(Basis::Hv, 1.0, 0.0),
            BasisCounts::raw(Basis::St, 1.0, 0.0),
            BasisCounts::raw(Basis::Lr, 1.0, 0.0),
        ];
        let result = mle_reconstruct(&counts).unwrap();
        assert!(result.rho.is_physical());
        let trace: f64 = (0..2).map(|i| result.rho.get(i, i).re).sum();
        assert!((trace - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mle_beats_linear_inversion_when_counts_are_unphysical() {
        // Counts consistent with |s| > 1.
        let counts = [
            BasisCounts::raw(Basis::Hv, 99.0, 1.0),
            BasisCounts::raw(Basis::St, 70.0, 30.0),
            BasisCounts::raw(Basis::Lr, 70.0, 30.0),
        ];
        let est = estimate_stokes(&counts).unwrap();
        assert!(est.s.norm() > 1.0);
        let result = mle_reconstruct(&counts).unwrap();
        assert!(result.rho.is_physical());
    }

    #[test]
    fn consistency_as_counts_grow() {
        // Median trace distance to the truth decreases monotonically over
        // n in {1e3, 1e4, 1e6}, 50 seeds each.
        let truth_s = StokesVector::new(0.4, 0.3, 0.5);
        let truth = density_from_stokes(&truth_s).unwrap();
        let mut medians = Vec::new();
        for (level, n) in [(0u64, 1_000u64), (1, 10_000), (2, 1_000_000)] {
            let mut distances: Vec<f64> = (0..50)
                .map(|seed| {
                    let counts = sampled_counts(&truth_s, n, 1000 * level + seed);
                    let result = mle_reconstruct(&counts).unwrap();
                    trace_distance(&result.rho, &truth)
                })
                .collect();
            distances.sort_by(f64::total_cmp);
            medians.push((distances[24] + distances[25]) / 2.0);
        }
        assert!(
            medians[0] > medians[1] && medians[1] > medians[2],
            "medians = {medians:?}"
        );
    }

    #[test]
    fn likelihood_prefers_the_generating_state() {
        let s = StokesVector::new(0.2, -0.5, 0.3);
        let counts = exact_counts(&s, 1e5);
        let result = mle_reconstruct(&counts).unwrap();
        let truth = density_from_stokes(&s).unwrap();
        assert!(trace_distance(&result.rho, &truth) < 1e-4);

        // And the reported likelihood is at least that of nearby states.
        let nearby = Factor::from_density(
            &density_from_stokes(&StokesVector::new(0.21, -0.5, 0.3)).unwrap(),
        );
        assert!(result.log_likelihood >= log_likelihood(&nearby, &counts));
    }

    #[test]
    fn factorization_round_trips_generic_states() {
        for f in FiducialState::ALL {
            let rho = density_from_pure(&f.state());
            let factor = Factor::from_density(&rho);
            let entries = factor.density_entries();
            let back = DensityMatrix::new(2, entries.to_vec()).unwrap();
            assert!(trace_distance(&rho, &back) < 1e-12, "{f:?}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        /// The estimate is physical for arbitrary counts, including those
        /// whose linear inversion is indefinite.
        #[test]
        fn mle_output_is_physical_for_any_counts(
            hv_plus in 0u32..400, hv_minus in 0u32..400,
            st_plus in 0u32..400, st_minus in 0u32..400,
            lr_plus in 0u32..400, lr_minus in 0u32..400,
        ) {
            let counts = [
                BasisCounts::raw(Basis::Hv, hv_plus as f64, hv_minus as f64),
                BasisCounts::raw(Basis::St, st_plus as f64, st_minus as f64),
                BasisCounts::raw(Basis::Lr, lr_plus as f64, lr_minus as f64),
            ];
            if counts.iter().any(|c| c.total() == 0.0) {
                proptest::prop_assert!(mle_reconstruct(&counts).is_err());
                return Ok(());
            }
            let result = mle_reconstruct(&counts).unwrap();
            proptest::prop_assert!(result.rho.is_physical());
            let trace: f64 = (0..2).map(|i| result.rho.get(i, i).re).sum();
            proptest::prop_assert!((trace - 1.0).abs() < 1e-12);
        }
    }
}
