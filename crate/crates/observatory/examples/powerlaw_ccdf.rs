//! Fit a power-law tail exponent to heavy-tailed samples and print the
//! complementary cumulative distribution the fit runs over.
//!
//! Run with: cargo run --example powerlaw_ccdf

use observatory::metrics::{ccdf, fit_power_law};
use observatory::synth::gen_pareto;

fn main() {
    for gamma in [2.3, 2.5, 2.9] {
        let sample = gen_pareto(gamma, 1.0, 100_000, 42).unwrap();
        let fit = fit_power_law(&sample, 1.0).unwrap();
        println!(
            "planted gamma {gamma}: fitted {:.3} +/- {:.3} over {} tail points",
            fit.gamma, fit.std_err, fit.n_tail
        );
    }

    // CCDF of the same quantity, discretized the way share counts are.
    let sample = gen_pareto(2.5, 1.0, 10_000, 42).unwrap();
    let counts: Vec<u64> = sample.iter().map(|x| x.round() as u64).collect();
    let points = ccdf(&counts).unwrap();

    println!("\nx      P(X >= x)");
    for (x, p) in points.iter().take(8) {
        println!("{x:<6} {p:.4}");
    }
    println!("... ({} distinct values total)", points.len());
}
