//! Σ(z) along a slice of a landscape, its FD gradient next to N(z), and the
//! power law of Σ in V for frozen coefficients.
//!
//! Run with `cargo run --release --example sigma_landscape`.

use peakscope::field::CoefficientField;
use peakscope::model::ProblemParams;
use peakscope::sigma::{GroundStateLandscape, Landscape};

fn main() -> peakscope::Result<()> {
    let params = ProblemParams::pure_power(3, 2.0, 4.0, 4.0);
    let field = CoefficientField::parse("1", "1 + x1^2", "1 + 0.3*x2", 3)?;
    let land = GroundStateLandscape::new(field, params.clone())?;
    println!("    z1     Sigma          dSigma/dz1 (FD)   N1");
    for i in 0..=8 {
        let z = [-1.0 + 0.25 * i as f64, 0.2, 0.0];
        let s = land.sample(&z)?;
        let n = land.necessary_vector(&z)?;
        println!(
            "{:6.2}  {:.10}  {:+.10e}  {:+.10e}",
            z[0], s.sigma, s.grad_fd[0], n.n[0]
        );
    }

    let values: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&v| {
            let flat = CoefficientField::constant(1.0, v, 1.0, 3);
            let l = GroundStateLandscape::new(flat, params.clone()).unwrap();
            (v, l.sigma(&[0.0; 3]).unwrap())
        })
        .collect();
    let (x0, y0) = (values[0].0.ln(), values[0].1.ln());
    let (x1, y1) = (values[3].0.ln(), values[3].1.ln());
    println!("log-log slope of Sigma in V: {:.6}", (y1 - y0) / (x1 - x0));
    Ok(())
}
