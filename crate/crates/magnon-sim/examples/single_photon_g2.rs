//! Conditional autocorrelation of the retrieved field.
//!
//! Runs the balanced-analyzer coincidence measurement for three channels:
//! an ideal single-photon source (g₂ = 0), the calibrated memory
//! (g₂ ≈ 0.24, limited by read-window background), and a channel with a
//! large double-excitation weight pushing g₂ toward Poissonian light.
//!
//! ```bash
//! cargo run --example single_photon_g2
//! ```

use magnon_sim::polarization::FiducialState;
use magnon_sim::sim::{run_block, AnalyzerMode, HeraldMode, NoiseParams, TrialContext};
use magnon_sim::stats::{conditional_g2, tally, G2Summary};

fn measure(label: &str, noise: NoiseParams, trials: u64, seed: u64) {
    let ctx = TrialContext {
        herald: HeraldMode::Forced,
        ..TrialContext::new(FiducialState::H.state(), AnalyzerMode::Balanced, noise)
    };
    let records = run_block(&ctx, 0, trials, seed, 0);
    let t = tally(&records);
    match conditional_g2(&t) {
        Ok(g2) => {
            let summary = G2Summary::new(&t, g2);
            println!(
                "{label:12} g2 = {:.4} ± {:.4}   (N1 = {}, N12 = {}, N13 = {}, N123 = {})",
                summary.g2, summary.err, summary.n1, summary.n12, summary.n13, summary.n123
            );
        }
        Err(e) => println!("{label:12} {e}"),
    }
}

fn main() {
    println!("heralded g2 = N123*N1/(N12*N13) behind a 50/50 splitter\n");

    measure("ideal", NoiseParams::noiseless(), 100_000, 1);
    measure("calibrated", NoiseParams::calibrated(), 2_000_000, 2);

    let mut doubles = NoiseParams::calibrated();
    doubles.p2 = 0.5;
    measure("p2 = 0.5", doubles, 2_000_000, 3);

    println!("\n0 is an ideal single photon; 1 is Poissonian (coherent) light.");
}
