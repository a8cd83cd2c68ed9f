//! Frozen reference values shared by the integration tests. None of them
//! are computed by the library.
#![allow(dead_code)]

/// w(0) of the positive radial solution of −Δw + w = w³ in R³, produced by
/// the fixed-step RK4 bisection in `oracles.rs` (step 1e-4, width 1e-10).
pub const REFERENCE_W0_N3_Q4: f64 = 4.337_387_679_945_568;

/// √2 sech r solves −w″ + w = w³ on the line.
pub fn soliton_w0() -> f64 {
    2f64.sqrt()
}

/// A − B/2 − C/4 with A = 2/3, B = 4, C = 16/3 for the sech soliton.
pub const SOLITON_SIGMA: f64 = 4.0 / 3.0;

/// Exponent of V in Σ for p = 2 from the scaling w ↦ γ w(λ ·):
/// γ² = V/K and λ² = V/a give Σ ∝ V^{q/(q−2) − n/2}.
pub fn v_exponent_p2(n: usize, q: f64) -> f64 {
    q / (q - 2.0) - n as f64 / 2.0
}

/// −(V / (a (p − 1)))^{1/p}: exponential tail rate of the frozen problem.
pub fn predicted_decay(p: f64, a: f64, v: f64) -> f64 {
    -(v / (a * (p - 1.0))).powf(1.0 / p)
}

/// One line per acceptance criterion, then the assertion.
pub fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "criterion {id:>2} [{name}]: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}
