//! Herald-probability budget and success-rate projections.
//!
//! The heralding probability is the product of the transverse optical
//! depth, the single-atom cooperativity and the detection efficiency.
//! This example prints the budget for the current parameters and for the
//! projected trap/resonator upgrade.
//!
//! ```bash
//! cargo run --example herald_budget
//! ```

use magnon_sim::sim::{herald_probability, NoiseParams};
use magnon_sim::stats::success_rate_projection;

fn budget(label: &str, noise: &NoiseParams, trials_per_second: f64) {
    let p = herald_probability(noise);
    let projection = success_rate_projection(noise, trials_per_second);
    println!("{label}:");
    println!(
        "  alpha_perp = {:.3}, eta = {:.3}, q = {:.3}",
        noise.alpha_perp, noise.eta, noise.q
    );
    println!("  herald probability p = {p:.3e} per trial");
    println!(
        "  at {:.1e} trials/s -> {:.3e} heralded storage events per second\n",
        trials_per_second, projection.success_rate
    );
}

fn main() {
    let current = NoiseParams::default();
    budget("current setup", &current, 2e4);

    // Dipole trap (transverse optical depth -> 1) plus a modified
    // resonator (cooperativity -> 0.1).
    let mut upgraded = current;
    upgraded.alpha_perp = 1.0;
    upgraded.eta = 0.1;
    budget("projected upgrade", &upgraded, 2e4);

    let gain = herald_probability(&upgraded) / herald_probability(&current);
    println!("upgrade factor: {gain:.0}x");
}
