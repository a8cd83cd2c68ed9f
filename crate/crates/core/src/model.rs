//! Problem parameters and the nonlinearity families.
//!
//! The gradient term is fixed to β(ξ) = |ξ|^p / p throughout, so that
//! ∇β(ξ) = |ξ|^{p-2} ξ and ∇β(ξ)·ξ = p β(ξ). Everything downstream (the
//! radial shooting, the energy integrals, the Pohozaev identity) relies on
//! this isotropic choice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One `c · s^{e-1}` term of a power-sum nonlinearity (F gets `c · s^e / e`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

/// The admissible nonlinearities f(s), s ≥ 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Nonlinearity {
    /// f(s) = s^{q-1}.
    PurePower(f64),
    /// f(s) = Σ c_j s^{e_j - 1}.
    PowerSum(Vec<PowerTerm>),
}

/// f, its antiderivative F (with F(0) = 0) and f′ at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearityEval {
    pub f: f64,
    pub big_f: f64,
    pub f_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Space dimension.
    pub n: usize,
    pub p: f64,
    /// Ambrosetti–Rabinowitz constant ϑ.
    pub theta: f64,
    pub nonlinearity: Nonlinearity,
    /// Admits n = 1, 2 (and p ≥ n) for closed-form solver checks.
    pub test_mode: bool,
}

/// One violated standing hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub hypothesis: &'static str,
    pub detail: String,
}

const AR_TOLERANCE: f64 = 1e-12;

/// Log-spaced samples of [10⁻⁶, 10⁶].
fn sample_grid() -> impl Iterator<Item = f64> {
    (0..=240).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0))
}

impl ProblemParams {
    pub fn pure_power(n: usize, p: f64, q: f64, theta: f64) -> Self {
        Self {
            n,
            p,
            theta,
            nonlinearity: Nonlinearity::PurePower(q),
            test_mode: n < 3,
        }
    }

    pub fn power_sum(n: usize, p: f64, terms: &[(f64, f64)], theta: f64) -> Self {
        Self {
            n,
            p,
            theta,
            nonlinearity: Nonlinearity::PowerSum(
                terms
                    .iter()
                    .map(|&(coeff, exponent)| PowerTerm { coeff, exponent })
                    .collect(),
            ),
            test_mode: n < 3,
        }
    }

    /// The (largest) growth exponent q.
    pub fn q(&self) -> f64 {
        match &self.nonlinearity {
            Nonlinearity::PurePower(q) => *q,
            Nonlinearity::PowerSum(terms) => terms
                .iter()
                .map(|t| t.exponent)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Critical Sobolev exponent p* = np/(n - p), infinite when n ≤ p.
    pub fn critical_exponent(&self) -> f64 {
        let n = self.n as f64;
        if n <= self.p {
            f64::INFINITY
        } else {
            n * self.p / (n - self.p)
        }
    }

    /// Exponents and coefficients as a uniform list of terms.
    pub fn terms(&self) -> Vec<PowerTerm> {
        match &self.nonlinearity {
            Nonlinearity::PurePower(q) => vec![PowerTerm {
                coeff: 1.0,
                exponent: *q,
            }],
            Nonlinearity::PowerSum(terms) => terms.clone(),
        }
    }

    pub fn is_pure_power(&self) -> bool {
        matches!(self.nonlinearity, Nonlinearity::PurePower(_))
    }

    /// Evaluates (f, F, f′) at s ≥ 0.
    pub fn eval_nonlinearity(&self, s: f64) -> Result<NonlinearityEval> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!(
                "nonlinearity evaluated at s = {s}; need finite s >= 0"
            )));
        }
        Ok(self.eval_unchecked(s))
    }

    /// (f, F, f′) without the sign check; negative s is treated as 0.
    pub(crate) fn eval_unchecked(&self, s: f64) -> NonlinearityEval {
        let s = s.max(0.0);
        let mut out = NonlinearityEval {
            f: 0.0,
            big_f: 0.0,
            f_prime: 0.0,
        };
        let mut add = |c: f64, e: f64| {
            if s == 0.0 {
                out.f_prime += if e > 2.0 {
                    0.0
                } else if e == 2.0 {
                    c
                } else if c > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                return;
            }
            let pow = s.powf(e - 2.0);
            out.f += c * pow * s;
            out.big_f += c * pow * s * s / e;
            out.f_prime += c * (e - 1.0) * pow;
        };
        match &self.nonlinearity {
            Nonlinearity::PurePower(q) => add(1.0, *q),
            Nonlinearity::PowerSum(terms) => {
                for t in terms {
                    add(t.coeff, t.exponent);
                }
            }
        }
        out
    }

    /// f(s) alone, with f(s) = 0 for s ≤ 0.
    #[inline]
    pub(crate) fn f(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.nonlinearity {
            Nonlinearity::PurePower(q) => s.powf(q - 1.0),
            Nonlinearity::PowerSum(terms) => terms
                .iter()
                .map(|t| t.coeff * s.powf(t.exponent - 1.0))
                .sum(),
        }
    }

    /// F(s) alone, zero for s ≤ 0.
    #[inline]
    pub(crate) fn big_f(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.nonlinearity {
            Nonlinearity::PurePower(q) => s.powf(*q) / q,
            Nonlinearity::PowerSum(terms) => terms
                .iter()
                .map(|t| t.coeff * s.powf(t.exponent) / t.exponent)
                .sum(),
        }
    }

    /// Checks every standing hypothesis; an empty report means valid.
    pub fn validate(&self) -> Result<Vec<Violation>> {
        let mut finite = self.p.is_finite() && self.theta.is_finite();
        for t in self.terms() {
            finite &= t.coeff.is_finite() && t.exponent.is_finite();
        }
        if !finite {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }

        let mut report = Vec::new();
        let flag = |report: &mut Vec<Violation>, hypothesis: &'static str, detail: String| {
            report.push(Violation { hypothesis, detail })
        };

        if self.n == 0 {
            flag(&mut report, "dimension", "n must be at least 1".into());
        } else if self.n < 3 && !self.test_mode {
            flag(
                &mut report,
                "dimension",
                format!("n = {} is only admitted in test mode", self.n),
            );
        }
        if !(self.p > 1.0) {
            flag(
                &mut report,
                "p-range",
                format!("p = {} must exceed 1", self.p),
            );
        }
        if self.p >= self.n as f64 && !self.test_mode {
            flag(
                &mut report,
                "p-range",
                format!("p = {} must be below n = {}", self.p, self.n),
            );
        }

        let p_star = self.critical_exponent();
        let terms = self.terms();
        if terms.is_empty() || !terms.iter().any(|t| t.coeff > 0.0) {
            flag(
                &mut report,
                "nonlinearity",
                "power sum needs at least one term with positive coefficient".into(),
            );
        }
        for t in &terms {
            if t.coeff < 0.0 {
                flag(
                    &mut report,
                    "nonlinearity",
                    format!("coefficient {} is negative", t.coeff),
                );
            }
            if !(t.exponent > self.p && t.exponent < p_star) {
                flag(
                    &mut report,
                    "exponent-window",
                    format!(
                        "exponent {} outside the open window ({}, {})",
                        t.exponent, self.p, p_star
                    ),
                );
            }
        }

        if !(self.theta > self.p) {
            flag(
                &mut report,
                "ambrosetti-rabinowitz",
                format!("theta = {} must exceed p = {}", self.theta, self.p),
            );
        }
        if report.iter().any(|v| v.hypothesis == "nonlinearity") {
            return Ok(report);
        }

        // Sampled AR condition 0 < ϑF(s) ≤ f(s)s.
        let mut ar_worst: Option<(f64, f64)> = None;
        for s in sample_grid() {
            let big_f = self.big_f(s);
            let fs = self.f(s) * s;
            if !(big_f > 0.0) {
                flag(
                    &mut report,
                    "ambrosetti-rabinowitz",
                    format!("F({s:e}) is not positive"),
                );
                break;
            }
            let excess = (self.theta * big_f - fs) / fs;
            if excess > AR_TOLERANCE && ar_worst.is_none_or(|(_, e)| excess > e) {
                ar_worst = Some((s, excess));
            }
        }
        if let Some((s, excess)) = ar_worst {
            flag(
                &mut report,
                "ambrosetti-rabinowitz",
                format!("theta*F(s) exceeds f(s)*s at s = {s:e} (relative excess {excess:e})"),
            );
        }

        // f(s)/s^{p-1} must decrease to 0 as s -> 0+, and f(s)/s^{q-1} stay
        // bounded as s -> infinity.
        let q = self.q();
        let small: Vec<f64> = sample_grid()
            .filter(|&s| s <= 1.0)
            .map(|s| self.f(s) / s.powf(self.p - 1.0))
            .collect();
        if small.windows(2).any(|w| w[0] > w[1] * (1.0 + 1e-12)) {
            flag(
                &mut report,
                "growth-at-zero",
                "f(s)/s^(p-1) is not decreasing towards s = 0".into(),
            );
        }
        let large: Vec<f64> = sample_grid()
            .filter(|&s| s >= 1.0)
            .map(|s| self.f(s) / s.powf(q - 1.0))
            .collect();
        if large.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12)) {
            flag(
                &mut report,
                "growth-at-infinity",
                "f(s)/s^(q-1) grows as s increases".into(),
            );
        }

        Ok(report)
    }

    /// Validates and turns any violation into an error.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate()?;
        if report.is_empty() {
            Ok(())
        } else {
            let msg: Vec<String> = report
                .iter()
                .map(|v| format!("{}: {}", v.hypothesis, v.detail))
                .collect();
            Err(Error::InvalidInput(msg.join("; ")))
        }
    }

    /// The positive s where K f(s) = V s^{p-1}; below it the source term of
    /// the radial equation pushes profiles up.
    pub(crate) fn balance_point(&self, v: f64, k: f64) -> f64 {
        // K f(s)/s^{p−1} − V, summed term-wise in ln s to avoid underflow.
        let terms = self.terms();
        let g = |l: f64| {
            k * terms
                .iter()
                .map(|t| t.coeff * ((t.exponent - self.p) * l).exp())
                .sum::<f64>()
                - v
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        while g(lo) >= 0.0 {
            lo *= 2.0;
        }
        while g(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    }
}
