//! One-dimensional cubic soliton: w(0) = √2 and Σ = 4/3 in closed form.
//!
//! Run with `cargo run --release --example soliton`.

use peakscope::energy::energy_breakdown;
use peakscope::model::ProblemParams;
use peakscope::radial::{shoot_canonical, FrozenCoefficients};

fn main() -> peakscope::Result<()> {
    let params = ProblemParams::pure_power(1, 2.0, 4.0, 4.0);
    let w = shoot_canonical(&params, 1e-12)?;
    let e = energy_breakdown(&w, &FrozenCoefficients::UNIT)?;
    println!(
        "w(0)  = {:.15}  (exact {:.15})",
        w.shooting_value,
        2f64.sqrt()
    );
    println!("Sigma = {:.15}  (exact {:.15})", e.i_value, 4.0 / 3.0);
    // Compare against w(r) = √2 sech r at a few radii.
    for r0 in [0.5, 1.0, 2.0, 4.0] {
        let i = w.r.partition_point(|&r| r < r0);
        let exact = 2f64.sqrt() / w.r[i].cosh();
        println!(
            "r = {:6.3}  w = {:.12e}  sech error = {:.1e}",
            w.r[i],
            w.w[i],
            (w.w[i] - exact).abs()
        );
    }
    Ok(())
}
