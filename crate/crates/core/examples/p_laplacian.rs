//! Ground states for p ≠ 2 and the predicted exponential decay rate.
//!
//! Run with `cargo run --release --example p_laplacian`.

use peakscope::model::ProblemParams;
use peakscope::radial::{fit_decay_rate, shoot, FrozenCoefficients, ShootOptions};

fn main() -> peakscope::Result<()> {
    let cases = [(1.5, 3, 2.5), (2.0, 3, 4.0), (3.0, 4, 5.0)];
    let frozen = FrozenCoefficients::new(1.0, 2.0, 1.0)?;
    println!("  p  n    q       w(0)        fitted   predicted  rel.err");
    for (p, n, q) in cases {
        let params = ProblemParams::pure_power(n, p, q, q);
        let w = shoot(&params, frozen, &ShootOptions::default())?;
        let fit = fit_decay_rate(&w, &frozen)?;
        println!(
            "{p:4.1} {n:2} {q:4.1} {:12.8} {:10.6} {:10.6} {:9.2e}",
            w.shooting_value,
            fit.fitted_slope,
            fit.predicted_slope,
            fit.relative_error()
        );
    }
    Ok(())
}
