//! The sampled Clarke subdifferential on injected surrogate landscapes.
//!
//! Run with `cargo run --example clarke_surrogate`.

use peakscope::sigma::{clarke_estimate, FnLandscape, Negated};

fn main() -> peakscope::Result<()> {
    let kink = FnLandscape {
        dim: 3,
        f: |z: &[f64]| z[0].abs(),
    };
    let bowl = FnLandscape {
        dim: 3,
        f: |z: &[f64]| z.iter().map(|x| x * x).sum(),
    };
    let show = |name: &str, est: peakscope::sigma::ClarkeEstimate| {
        println!(
            "{name:<22} min-norm point {:?}  |.| = {:.2e}  tol {:.2e}  contains 0: {}",
            est.min_norm_point
                .iter()
                .map(|x| (x * 1e6).round() / 1e6)
                .collect::<Vec<_>>(),
            est.min_norm,
            est.tolerance,
            est.contains_zero
        );
    };
    show("|z1| at 0", clarke_estimate(&kink, &[0.0; 3], 0.1, 15, 1)?);
    show(
        "|z1| at (0.5,0,0)",
        clarke_estimate(&kink, &[0.5, 0.0, 0.0], 0.1, 15, 1)?,
    );
    show("|z|^2 at 0", clarke_estimate(&bowl, &[0.0; 3], 0.05, 7, 1)?);
    show(
        "|z|^2 at (0.5,0,0)",
        clarke_estimate(&bowl, &[0.5, 0.0, 0.0], 0.05, 7, 1)?,
    );
    show(
        "-|z|^2 at (0.5,0,0)",
        clarke_estimate(&Negated(bowl), &[0.5, 0.0, 0.0], 0.05, 7, 1)?,
    );
    Ok(())
}
