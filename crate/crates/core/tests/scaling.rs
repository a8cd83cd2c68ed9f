//! Power laws of Σ in each frozen coefficient, checked against direct shooting.
//!
//! Writing u(x) = γ w(x/λ) with γ^{q-p} = V/K and λ^p = a/V turns every
//! energy term into a multiple of V γ^p λ^n, so for a pure power
//! Σ(a, V, K) ∝ a^{n/p} V^{1 + p/(q-p) - n/p} K^{-p/(q-p)}.
//! The frozen equation is shot directly here, so the scaling reduction is
//! not used to produce the numbers it is checked against.

use peakscope::energy::energy_breakdown;
use peakscope::model::ProblemParams;
use peakscope::radial::{shoot, FrozenCoefficients, ShootOptions};

fn level(params: &ProblemParams, a: f64, v: f64, k: f64) -> f64 {
    let frozen = FrozenCoefficients::new(a, v, k).unwrap();
    let profile = shoot(params, frozen, &ShootOptions::default()).unwrap();
    energy_breakdown(&profile, &frozen).unwrap().i_value
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

fn check_exponents(n: usize, p: f64, q: f64) {
    let params = ProblemParams::pure_power(n, p, q, q);
    let ts = [0.5f64, 1.0, 2.0];
    let fit = |f: &dyn Fn(f64) -> f64| {
        slope(&ts.iter().map(|&t| (t.ln(), f(t).ln())).collect::<Vec<_>>())
    };
    let nf = n as f64;
    let expected = [nf / p, 1.0 + p / (q - p) - nf / p, -p / (q - p)];
    let measured = [
        fit(&|t| level(&params, t, 1.0, 1.0)),
        fit(&|t| level(&params, 1.0, t, 1.0)),
        fit(&|t| level(&params, 1.0, 1.0, t)),
    ];
    for (name, (m, e)) in ["a", "V", "K"].iter().zip(measured.iter().zip(expected)) {
        assert!(
            (m - e).abs() < 1e-4,
            "n={n} p={p} q={q}: exponent of {name} is {m}, derived {e}"
        );
    }
}

#[test]
fn semilinear_cubic_exponents() {
    check_exponents(3, 2.0, 4.0);
}

#[test]
fn quasilinear_exponents() {
    check_exponents(3, 2.5, 4.0);
}
