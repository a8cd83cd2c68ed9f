//! Integral identities on a computed ground state: the dilation identity and
//! coordinate test fields whose cutoff band moves out with the profile.
//!
//! Run with `cargo run --release --example pohozaev_check`.

use peakscope::energy::{pucci_serrin_residual, TestField};
use peakscope::model::ProblemParams;
use peakscope::radial::{shoot_canonical, FrozenCoefficients};

fn main() -> peakscope::Result<()> {
    let params = ProblemParams::pure_power(3, 2.0, 4.0, 4.0);
    let unit = FrozenCoefficients::UNIT;
    let w = shoot_canonical(&params, 1e-12)?;
    let r_max = *w.r.last().unwrap();

    let dilation = pucci_serrin_residual(&w, &unit, TestField::Dilation)?;
    println!("dilation field residual: {dilation:.3e}");

    // A hand-perturbed copy breaks the identity.
    let mut bent = w.clone();
    for (r, v) in bent.r.iter().zip(bent.w.iter_mut()) {
        *v *= 1.0 + 0.01 * (-r * r).exp();
    }
    println!(
        "perturbed profile:       {:.3e}",
        pucci_serrin_residual(&bent, &unit, TestField::Dilation)?
    );

    for fraction in [0.25, 0.5, 0.75] {
        let field = TestField::Coordinate {
            axis: 0,
            cutoff_radius: fraction * r_max,
        };
        println!(
            "coordinate field, R = {:5.2}: {:.3e}",
            fraction * r_max,
            pucci_serrin_residual(&w, &unit, field)?
        );
    }
    Ok(())
}
