//! Scan a quadratic well for concentration candidates and certify them.
//!
//! Run with `cargo run --release --example locate_well`.

use peakscope::field::{BoxDomain, CoefficientField};
use peakscope::locator::{certify, scan_candidates, CertifyOptions};
use peakscope::model::ProblemParams;
use peakscope::sigma::GroundStateLandscape;

fn main() -> peakscope::Result<()> {
    let field = CoefficientField::parse(
        "1",
        "1 + (x1 - 0.3)^2 + (x2 + 0.2)^2 + (x3 - 0.1)^2",
        "1",
        3,
    )?;
    let land = GroundStateLandscape::new(field, ProblemParams::pure_power(3, 2.0, 4.0, 4.0))?;
    let domain = BoxDomain::cube(3, 1.0)?;
    let outcome = scan_candidates(&land, &domain, 8, None)?;
    println!(
        "{} seeds, {} candidates, |N| tolerance {:.2e}",
        outcome.seeds,
        outcome.candidates.len(),
        outcome.tolerance
    );
    for c in &outcome.candidates {
        println!(
            "candidate z = {:?}, |N| = {:.2e}, rank {}",
            c.z, c.n_norm, c.gram_rank
        );
        for step in &c.refinement_trace {
            println!("   {:?}  |N| = {:.2e}", step.point, step.n_norm);
        }
        let cert = certify(c, &land, &CertifyOptions::default());
        for check in &cert.checks {
            println!(
                "   {:<10} {:.2e} <= {:.1e}: {}",
                check.name, check.value, check.threshold, check.passed
            );
        }
        println!("   certified: {}", cert.certified);
    }

    // A constant field has N ≡ 0: flagged, not enumerated.
    let flat = GroundStateLandscape::new(
        CoefficientField::constant(1.0, 1.0, 1.0, 3),
        ProblemParams::pure_power(3, 2.0, 4.0, 4.0),
    )?;
    let out = scan_candidates(&flat, &domain, 4, None)?;
    println!(
        "constant field: degenerate = {}, candidates = {}",
        out.degenerate,
        out.candidates.len()
    );
    Ok(())
}
