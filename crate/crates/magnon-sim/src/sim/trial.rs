//! One click-level trial: herald sampling, readout detection, analyzer
//! routing, background and dark counts.
//!
//! Detector roles match the bench layout: D1 sits behind the herald filter,
//! D2 and D3 are the two analyzer output ports. In a basis setting D2
//! carries the "plus" port state (H, S or R) and D3 the partner; in
//! balanced mode the analyzer is a 50/50 splitter and every photon routes
//! to either detector with probability one half.
//!
//! All random decisions for a trial are drawn from the trial's own RNG in a
//! fixed order (herald, double excitation, per-photon detection and
//! routing, background number and routing, dark counts for D1, D2, D3), so
//! a record stream is reproducible for a fixed seed no matter how trials
//! are scheduled.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::density::{self, DensityMatrix};
use crate::polarization::{Basis, FiducialState, PolarizationState};
use crate::sim::magnon::{signal_density, write_map};
use crate::sim::noise::{herald_probability, NoiseParams};
use crate::sim::timing::ProtocolTiming;

/// Single-photon counting modules of the setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    /// Herald detector.
    D1,
    /// Analyzer plus port (or one arm of the balanced splitter).
    D2,
    /// Analyzer minus port (or the other arm).
    D3,
}

/// Photon count registered by one detector in one trial window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub trial_index: u64,
    pub detector: Detector,
    pub count: u32,
}

/// Analyzer configuration during the read window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnalyzerMode {
    /// Project onto the two ports of a polarization basis.
    Basis(Basis),
    /// Polarization-insensitive 50/50 split, used for autocorrelation runs.
    Balanced,
}

impl AnalyzerMode {
    pub fn label(&self) -> &'static str {
        match self {
            AnalyzerMode::Basis(b) => b.label(),
            AnalyzerMode::Balanced => "BAL",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        if s == "BAL" {
            return Some(AnalyzerMode::Balanced);
        }
        Basis::from_label(s).map(AnalyzerMode::Basis)
    }

    /// Port states as physically mounted: (D2, D3). `flipped` exchanges the
    /// two output ports, as a half-wave-plate relabeling would.
    pub fn ports(&self, flipped: bool) -> Option<(FiducialState, FiducialState)> {
        match self {
            AnalyzerMode::Balanced => None,
            AnalyzerMode::Basis(b) => {
                let (plus, minus) = b.ports();
                Some(if flipped {
                    (minus, plus)
                } else {
                    (plus, minus)
                })
            }
        }
    }
}

/// Everything recorded about one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    /// Whether a magnon was stored (herald fired).
    pub heralded: bool,
    /// Whether the two ensembles had exchanged roles this trial.
    pub ensembles_swapped: bool,
    /// Analyzer setting during the read window.
    pub setting: AnalyzerMode,
    /// Per-detector photon counts; detectors with zero counts are omitted.
    pub clicks: Vec<ClickRecord>,
}

impl TrialRecord {
    pub fn count(&self, detector: Detector) -> u32 {
        self.clicks
            .iter()
            .find(|c| c.detector == detector)
            .map_or(0, |c| c.count)
    }

    pub fn d1(&self) -> u32 {
        self.count(Detector::D1)
    }

    pub fn d2(&self) -> u32 {
        self.count(Detector::D2)
    }

    pub fn d3(&self) -> u32 {
        self.count(Detector::D3)
    }
}

/// How the herald decision is made for a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeraldMode {
    /// Bernoulli draw at the physical herald probability.
    Sample,
    /// Condition on successful storage (tomography-style acquisition).
    Forced,
    /// Suppress heralds entirely (background acquisition).
    Suppressed,
}

/// Immutable per-run context shared by all trials.
#[derive(Debug, Clone)]
pub struct TrialContext {
    pub input: PolarizationState,
    pub analyzer: AnalyzerMode,
    /// Exchange the two analyzer output ports.
    pub flip_ports: bool,
    pub noise: NoiseParams,
    pub timing: ProtocolTiming,
    pub herald: HeraldMode,
    /// Whether the read pulse fires on trials without a herald.
    pub read_unheralded: bool,
}

impl TrialContext {
    pub fn new(input: PolarizationState, analyzer: AnalyzerMode, noise: NoiseParams) -> Self {
        Self {
            input,
            analyzer,
            flip_ports: false,
            noise,
            timing: ProtocolTiming::default(),
            herald: HeraldMode::Sample,
            read_unheralded: true,
        }
    }

    /// Probability that a detected photon of state `rho` lands on D2.
    fn d2_probability(&self, rho: &DensityMatrix) -> f64 {
        match self.analyzer.ports(self.flip_ports) {
            None => 0.5,
            Some((d2_state, _)) => density::fidelity(rho, &d2_state.state()),
        }
    }
}

/// Run one trial and record its clicks.
pub fn run_trial<R: Rng>(ctx: &TrialContext, trial_index: u64, rng: &mut R) -> TrialRecord {
    let noise = &ctx.noise;
    let ensembles_swapped = trial_index % 2 == 1;

    let heralded = match ctx.herald {
        HeraldMode::Sample => rng.gen::<f64>() < herald_probability(noise),
        HeraldMode::Forced => true,
        HeraldMode::Suppressed => false,
    };

    let mut d1 = u32::from(heralded);
    let mut d2 = 0u32;
    let mut d3 = 0u32;

    let read_fires = heralded || ctx.read_unheralded;
    if read_fires {
        if heralded {
            // Store, dephase, and read the magnon back out. In swapped
            // trials ensemble A absorbs |L> instead of |R> and re-emits it
            // the same way at read, so the swap cancels in the emitted
            // polarization; it is tracked through the record regardless.
            let mut stored = write_map(&ctx.input, ctx.timing.t_w);
            if ensembles_swapped {
                stored = stored.rail_swapped();
            }
            let read_out = stored.decohered(noise, ctx.timing.t_r);
            let emitted = if ensembles_swapped {
                read_out.rail_swapped()
            } else {
                read_out
            };
            let rho_signal = signal_density(&emitted);
            let p_d2 = ctx.d2_probability(&rho_signal);

            let double = noise.p2 > 0.0 && rng.gen::<f64>() < noise.p2;
            let photons = if double { 2 } else { 1 };
            let detect_p = noise.epsilon_retrieval * noise.q;
            for _ in 0..photons {
                if rng.gen::<f64>() < detect_p {
                    if rng.gen::<f64>() < p_d2 {
                        d2 += 1;
                    } else {
                        d3 += 1;
                    }
                }
            }
        }

        // Background photons reaching the analyzer, thinned by detection.
        let mean_bg = noise.effective_background() * noise.q;
        if mean_bg > 0.0 {
            let s = noise.background.stokes(&ctx.timing);
            let rho_bg = density::density_from_stokes_unchecked(&density::StokesVector::new(
                s[0], s[1], s[2],
            ));
            let p_d2 = ctx.d2_probability(&rho_bg);
            let n = Poisson::new(mean_bg).expect("positive mean").sample(rng) as u32;
            for _ in 0..n {
                if rng.gen::<f64>() < p_d2 {
                    d2 += 1;
                } else {
                    d3 += 1;
                }
            }
        }
    }

    if noise.dark_rate > 0.0 {
        let poisson = Poisson::new(noise.dark_rate).expect("positive mean");
        d1 += poisson.sample(rng) as u32;
        if read_fires {
            d2 += poisson.sample(rng) as u32;
            d3 += poisson.sample(rng) as u32;
        }
    }

    let mut clicks = Vec::new();
    for (detector, count) in [(Detector::D1, d1), (Detector::D2, d2), (Detector::D3, d3)] {
        if count > 0 {
            clicks.push(ClickRecord {
                trial_index,
                detector,
                count,
            });
        }
    }

    TrialRecord {
        trial_index,
        heralded,
        ensembles_swapped,
        setting: ctx.analyzer,
        clicks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::trial_rng;

    fn deterministic_ctx() -> TrialContext {
        let mut noise = NoiseParams::noiseless();
        noise.alpha_perp = 1.0;
        TrialContext {
            herald: HeraldMode::Sample,
            ..TrialContext::new(
                FiducialState::R.state(),
                AnalyzerMode::Basis(Basis::Lr),
                noise,
            )
        }
    }

    #[test]
    fn unit_efficiency_r_input_always_clicks_the_r_port() {
        // p = 1, epsilon = q = 1: deterministic single click at the R port.
        let ctx = deterministic_ctx();
        for trial in 0..64 {
            let mut rng = trial_rng(1, trial);
            let record = run_trial(&ctx, trial, &mut rng);
            assert!(record.heralded);
            assert_eq!(record.d1(), 1);
            assert_eq!(record.d2(), 1, "R routes to the plus port (D2)");
            assert_eq!(record.d3(), 0);
        }
    }

    #[test]
    fn heralded_h_input_clicks_h_port_in_hv_basis() {
        let mut ctx = deterministic_ctx();
        ctx.input = FiducialState::H.state();
        ctx.analyzer = AnalyzerMode::Basis(Basis::Hv);
        ctx.herald = HeraldMode::Forced;
        for trial in 0..64 {
            let mut rng = trial_rng(3, trial);
            let record = run_trial(&ctx, trial, &mut rng);
            assert_eq!(record.d2(), 1);
            assert_eq!(record.d3(), 0);
        }
    }

    #[test]
    fn default_noise_heralds_are_rare() {
        // 10^6 trials at p = 10^-6: herald count is Poisson with mean 1.
        let ctx = TrialContext::new(
            FiducialState::H.state(),
            AnalyzerMode::Basis(Basis::Hv),
            NoiseParams::default(),
        );
        let mut heralds = 0u64;
        for trial in 0..1_000_000u64 {
            let mut rng = trial_rng(7, trial);
            if run_trial(&ctx, trial, &mut rng).heralded {
                heralds += 1;
            }
        }
        assert!(heralds <= 8, "heralds = {heralds}");
    }

    #[test]
    fn swap_flag_alternates_with_trial_parity() {
        let ctx = deterministic_ctx();
        let flags: Vec<bool> = (0..4)
            .map(|trial| {
                let mut rng = trial_rng(1, trial);
                run_trial(&ctx, trial, &mut rng).ensembles_swapped
            })
            .collect();
        assert_eq!(flags, vec![false, true, false, true]);
    }

    #[test]
    fn suppressed_heralds_yield_background_only() {
        let mut ctx = deterministic_ctx();
        ctx.herald = HeraldMode::Suppressed;
        ctx.noise.mu_bg = 0.2;
        ctx.noise.pump_purity = 1.0;
        let mut total = 0u32;
        for trial in 0..2_000u64 {
            let mut rng = trial_rng(11, trial);
            let record = run_trial(&ctx, trial, &mut rng);
            assert!(!record.heralded);
            assert_eq!(record.d1(), 0);
            total += record.d2() + record.d3();
        }
        // Mean clicks per window = mu_bg * q = 0.2; expect about 400.
        assert!((200..=600).contains(&total), "total = {total}");
    }

    #[test]
    fn no_read_means_no_analyzer_clicks() {
        let mut ctx = deterministic_ctx();
        ctx.herald = HeraldMode::Suppressed;
        ctx.read_unheralded = false;
        ctx.noise.mu_bg = 5.0;
        for trial in 0..100u64 {
            let mut rng = trial_rng(13, trial);
            let record = run_trial(&ctx, trial, &mut rng);
            assert_eq!(record.d2() + record.d3(), 0);
        }
    }

    #[test]
    fn flipped_ports_exchange_click_destinations() {
        let mut ctx = deterministic_ctx();
        ctx.flip_ports = true;
        let mut rng = trial_rng(1, 0);
        let record = run_trial(&ctx, 0, &mut rng);
        assert_eq!(record.d2(), 0);
        assert_eq!(record.d3(), 1);
    }
}
