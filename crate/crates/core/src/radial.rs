//! Radial ground states of −a Δ_p w + V w^{p−1} = K f(w) by shooting.
//!
//! The equation is integrated as a first-order system in (w, ψ) with the
//! flux ψ = |w′|^{p−2} w′, so nothing is ever divided by |w′|^{p−2}:
//!
//! ```text
//! w′ = sign(ψ) |ψ|^{1/(p−1)}
//! ψ′ = −(n−1) ψ / r + (V w^{p−1} − K f(w)) / a
//! ```
//!
//! Shooting on w(0) separates trajectories that cross zero (w(0) too large)
//! from trajectories whose slope turns positive (w(0) too small). Because
//! the decaying branch is exponentially unstable forwards in r, only the
//! part of the bisected trajectory on which the two bracket trajectories
//! still agree is kept. Beyond it the profile is continued with the
//! logarithmic variables ℓ = ln w, ρ = ψ / w^{p−1}, integrated backwards
//! from far out, where the decaying branch is the stable one.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemParams;
use crate::ode::{Dopri5, Halt};
use crate::quadrature::{cubic_weights, hermite, GAUSS4};

/// Coefficients of the limiting problem frozen at a point: a = α(z), V(z),
/// K(z).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenCoefficients {
    pub a: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl FrozenCoefficients {
    pub const UNIT: FrozenCoefficients = FrozenCoefficients {
        a: 1.0,
        v: 1.0,
        k: 1.0,
    };

    pub fn new(a: f64, v: f64, k: f64) -> Result<Self> {
        for (name, value) in [("a", a), ("V", v), ("K", k)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "frozen coefficient {name} = {value} must be positive and finite"
                )));
            }
        }
        Ok(Self { a, v, k })
    }

    /// Exponential decay rate (V / (a (p−1)))^{1/p} of ground states.
    pub fn decay_rate(&self, p: f64) -> f64 {
        (self.v / (self.a * (p - 1.0))).powf(1.0 / p)
    }
}

/// Solver settings for [`shoot`].
#[derive(Clone, Copy, Debug)]
pub struct ShootOptions {
    /// Target width of the w(0) bracket, relative to max(1, w(0)).
    pub tol: f64,
    /// Output grid spacing, in decay lengths.
    pub grid_step: f64,
    /// Initial r_max, in decay lengths.
    pub r_max_lengths: f64,
    /// Bracket search gives up beyond this multiple of the balance point.
    pub w0_search_factor: f64,
    /// The grid step is halved until [`ode_residual`] is at most this.
    pub residual_target: f64,
    /// Upper bound on grid refinements.
    pub max_refinements: usize,
    pub integrator: Dopri5,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            grid_step: 0.005,
            r_max_lengths: 30.0,
            w0_search_factor: 1e6,
            residual_target: 2.5e-7,
            max_refinements: 4,
            integrator: Dopri5::default(),
        }
    }
}

/// A discretized positive radial profile with its derivative.
#[derive(Clone, Debug, Serialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub w_prime: Vec<f64>,
    pub params: ProblemParams,
    pub frozen: FrozenCoefficients,
    /// Fitted logarithmic tail slope (NaN when not computable).
    pub decay_rate_fit: f64,
    /// w(0).
    pub shooting_value: f64,
}

/// Fitted and predicted tail slopes of ln w.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub fitted_slope: f64,
    pub predicted_slope: f64,
}

impl DecayFit {
    pub fn relative_error(&self) -> f64 {
        ((self.fitted_slope - self.predicted_slope) / self.predicted_slope).abs()
    }
}

#[inline]
fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fate {
    Overshoot,
    Undershoot,
    Unresolved,
}

struct Shooter<'a> {
    params: &'a ProblemParams,
    frozen: FrozenCoefficients,
    opts: ShootOptions,
    r0: f64,
    r_limit: f64,
}

impl Shooter<'_> {
    fn rhs(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        let p = self.params.p;
        let nm1 = self.params.n as f64 - 1.0;
        let FrozenCoefficients { a, v, k } = self.frozen;
        move |r: f64, y: &[f64; 2]| {
            let w = y[0];
            let source = v * signed_pow(w, p - 1.0) - k * self.params.f(w);
            [
                signed_pow(y[1], 1.0 / (p - 1.0)),
                -nm1 * y[1] / r + source / a,
            ]
        }
    }

    /// State at r₀ from the integrated flux near the origin.
    fn start(&self, w0: f64) -> [f64; 2] {
        let FrozenCoefficients { a, v, k } = self.frozen;
        let n = self.params.n as f64;
        let source = k * self.params.f(w0) - v * w0.powf(self.params.p - 1.0);
        [w0, -(self.r0 / n) * source / a]
    }

    fn fate(&self, w0: f64) -> Result<Fate> {
        let y0 = self.start(w0);
        if y0[1] >= 0.0 {
            return Ok(Fate::Undershoot);
        }
        let (mut r, mut y, mut h) = (self.r0, y0, 0.0);
        let stop = |_: f64, y: &[f64; 2]| y[0] <= 0.0 || y[1] > 0.0;
        let halt = self.opts.integrator.advance(
            &self.rhs(),
            &mut r,
            &mut y,
            self.r_limit,
            &mut h,
            &stop,
        )?;
        Ok(match halt {
            Halt::Reached => Fate::Unresolved,
            Halt::Stopped if y[0] <= 0.0 => Fate::Overshoot,
            Halt::Stopped => Fate::Undershoot,
        })
    }

    /// Integrates node to node; stops early at the first sign event.
    fn trajectory(&self, w0: f64, grid: &[f64]) -> Result<Vec<[f64; 2]>> {
        let mut y = self.start(w0);
        let mut out = vec![y];
        if y[1] >= 0.0 {
            return Ok(out);
        }
        let (mut r, mut h) = (grid[0], 0.0);
        let stop = |_: f64, y: &[f64; 2]| y[0] <= 0.0 || y[1] > 0.0;
        for &node in &grid[1..] {
            let halt =
                self.opts
                    .integrator
                    .advance(&self.rhs(), &mut r, &mut y, node, &mut h, &stop)?;
            if halt == Halt::Stopped {
                break;
            }
            out.push(y);
        }
        Ok(out)
    }

    /// Brackets and bisects w(0); returns (lo, w0, hi).
    fn bisect(&self) -> Result<(f64, f64, f64)> {
        let FrozenCoefficients { v, k, .. } = self.frozen;
        let balance = self.params.balance_point(v, k);

        let mut lo = balance * (1.0 + 1e-3);
        let mut tries = 0;
        while self.fate(lo)? != Fate::Undershoot {
            tries += 1;
            if tries > 20 {
                return Err(Error::NoGroundState(
                    "no undershooting w(0) above the balance point".into(),
                ));
            }
            lo = balance + (lo - balance) / 10.0;
        }
        let mut hi = 2.0 * lo;
        loop {
            match self.fate(hi)? {
                Fate::Overshoot => break,
                _ if hi > balance * self.opts.w0_search_factor => {
                    return Err(Error::NoGroundState(format!(
                        "no overshooting w(0) below {:e}",
                        balance * self.opts.w0_search_factor
                    )))
                }
                Fate::Undershoot => {
                    lo = hi;
                    hi *= 2.0;
                }
                Fate::Unresolved => hi *= 2.0,
            }
        }

        loop {
            if hi - lo <= self.opts.tol * lo.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match self.fate(mid)? {
                Fate::Overshoot => hi = mid,
                Fate::Undershoot => lo = mid,
                Fate::Unresolved => return Ok((lo, mid, hi)),
            }
        }
        Ok((lo, 0.5 * (lo + hi), hi))
    }

    /// Backward integration of (ln w, ψ/w^{p−1}) from `r_end` down to
    /// `grid[from]`, with ln w matched to `log_target` at `grid[from]`.
    /// Returns (ln w, ρ) at grid[from..].
    fn tail(
        &self,
        grid: &[f64],
        from: usize,
        log_target: f64,
        r_end: f64,
    ) -> Result<Vec<[f64; 2]>> {
        let p = self.params.p;
        let n = self.params.n as f64;
        let FrozenCoefficients { a, v, k } = self.frozen;
        let kappa = self.frozen.decay_rate(p);
        let rho0 = kappa.powf(p - 1.0);
        let rho1 = (n - 1.0) * kappa.powf(p - 2.0) / p;
        let m = (n - 1.0) / (p * (p - 1.0));
        let rhs = |r: f64, y: &[f64; 2]| {
            let w = y[0].exp();
            let ratio = if w > 0.0 {
                k * self.params.f(w) / w.powf(p - 1.0)
            } else {
                0.0
            };
            let dl = signed_pow(y[1], 1.0 / (p - 1.0));
            [
                dl,
                (v - ratio) / a - (n - 1.0) * y[1] / r - (p - 1.0) * y[1] * dl,
            ]
        };
        let r_from = grid[from];
        let mut ell_end = log_target - kappa * (r_end - r_from) - m * (r_end / r_from).ln();
        let mut out = Vec::new();
        for _ in 0..30 {
            out.clear();
            let mut y = [ell_end, -(rho0 + rho1 / r_end)];
            let (mut r, mut h) = (r_end, -0.0);
            for &node in grid[from..].iter().rev() {
                self.opts
                    .integrator
                    .advance(&rhs, &mut r, &mut y, node, &mut h, &|_, _| false)?;
                out.push(y);
            }
            out.reverse();
            let miss = log_target - out[0][0];
            ell_end += miss;
            if miss.abs() <= 1e-14 * log_target.abs().max(1.0) {
                break;
            }
        }
        Ok(out)
    }
}

/// Ratio of the geometric part of the output grid.
const GRADING: f64 = 1.05;

/// Output grid: geometric from r₀ until the spacing reaches `step`,
/// uniform beyond, so neighbouring spacings never jump.
fn radial_grid(r0: f64, step: f64, r_max: f64) -> Vec<f64> {
    let mut grid = vec![r0];
    let mut x = r0;
    while (GRADING - 1.0) * x < step {
        x *= GRADING;
        grid.push(x);
    }
    let count = ((r_max - x) / step).ceil().max(0.0) as usize;
    grid.extend((1..=count).map(|i| x + i as f64 * step));
    grid
}

/// Ground state of the canonical problem a = V = K = 1.
pub fn shoot_canonical(params: &ProblemParams, tol: f64) -> Result<RadialProfile> {
    shoot(
        params,
        FrozenCoefficients::UNIT,
        &ShootOptions {
            tol,
            ..ShootOptions::default()
        },
    )
}

/// Ground state of −a Δ_p w + V w^{p−1} = K f(w) by direct shooting.
pub fn shoot(
    params: &ProblemParams,
    frozen: FrozenCoefficients,
    opts: &ShootOptions,
) -> Result<RadialProfile> {
    params.ensure_valid()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tol = {} must be positive",
            opts.tol
        )));
    }
    let p = params.p;
    let kappa = frozen.decay_rate(p);
    let length = 1.0 / kappa;
    let r0 = 1e-6 * (1.0 + length);
    let mut step = opts.grid_step * length;
    let mut refinements = 0;
    let mut r_max = opts.r_max_lengths * length;

    let shooter = Shooter {
        params,
        frozen,
        opts: *opts,
        r0,
        r_limit: (opts.r_max_lengths + 40.0) * length,
    };
    let (lo, w0, hi) = shooter.bisect()?;
    log::debug!("w(0) bracket [{lo:.17e}, {hi:.17e}]");

    for _attempt in 0..6 + opts.max_refinements {
        let grid = radial_grid(r0, step, r_max);
        let mid = shooter.trajectory(w0, &grid)?;
        let below = shooter.trajectory(lo, &grid)?;
        let above = shooter.trajectory(hi, &grid)?;
        let reach = mid.len().min(below.len()).min(above.len());
        let mut trusted = 0;
        for i in 0..reach {
            let dw = (above[i][0] - below[i][0]).abs();
            let dpsi = (above[i][1] - below[i][1]).abs();
            if dw > 1e-9 * mid[i][0].abs() || dpsi > 1e-9 * mid[i][1].abs() {
                break;
            }
            trusted = i;
        }
        // Either bisection hit the floating-point floor (lo == hi up to an
        // ulp, trajectories identical) or it stopped at `tol`.
        if trusted + 1 == grid.len() {
            trusted = grid.len() - 2;
        }
        if mid[trusted][0] > 0.05 * w0 {
            return Err(Error::SolverFailure(format!(
                "shooting trajectory unresolved beyond r = {:.3} (w = {:.3e}); tighten tol",
                grid[trusted], mid[trusted][0]
            )));
        }

        let r_end = r_max + 10.0 * length;
        let tail = shooter.tail(&grid, trusted, mid[trusted][0].ln(), r_end)?;

        let mut w = Vec::with_capacity(grid.len());
        let mut w_prime = Vec::with_capacity(grid.len());
        for state in &mid[..=trusted] {
            w.push(state[0]);
            w_prime.push(signed_pow(state[1], 1.0 / (p - 1.0)));
        }
        for state in &tail[1..] {
            let wi = state[0].exp();
            w.push(wi);
            w_prime.push(wi * signed_pow(state[1], 1.0 / (p - 1.0)));
        }
        let splice_rho = mid[trusted][1] / mid[trusted][0].powf(p - 1.0);
        log::debug!(
            "splice at r = {:.4}: flux ratio mismatch {:.3e}",
            grid[trusted],
            ((tail[0][1] - splice_rho) / splice_rho).abs()
        );

        if *w.last().expect("nonempty grid") >= 1e-8 * w0 {
            r_max *= 1.5;
            continue;
        }

        let mut profile = RadialProfile {
            r: grid,
            w,
            w_prime,
            params: params.clone(),
            frozen,
            decay_rate_fit: f64::NAN,
            shooting_value: w0,
        };
        profile.check_shape()?;
        let residual = ode_residual(&profile, &frozen)?;
        if residual > opts.residual_target && refinements < opts.max_refinements {
            log::debug!("residual {residual:.2e} at step {step:.3e}; refining");
            step *= 0.5;
            refinements += 1;
            continue;
        }
        profile.decay_rate_fit = fit_decay_rate(&profile, &frozen)?.fitted_slope;
        return Ok(profile);
    }
    Err(Error::SolverFailure(
        "tail criterion w(r_max) < 1e-8 w(0) not met after extending r_max".into(),
    ))
}

/// Maps the canonical ground state w to u(x) = γ w(x/λ), the ground state
/// for frozen (a, V, K), with γ = (V/K)^{1/(q−p)} and λ = (a/V)^{1/p}.
pub fn solve_frozen(
    canonical: &RadialProfile,
    frozen: FrozenCoefficients,
) -> Result<RadialProfile> {
    if canonical.frozen != FrozenCoefficients::UNIT {
        return Err(Error::InvalidInput(
            "solve_frozen expects the a = V = K = 1 profile".into(),
        ));
    }
    if !canonical.params.is_pure_power() {
        return Err(Error::Unsupported(
            "scaling reduction needs a pure-power nonlinearity; shoot the frozen equation directly"
                .into(),
        ));
    }
    let (gamma, lambda) = scaling_factors(&canonical.params, frozen);
    let mut profile = RadialProfile {
        r: canonical.r.iter().map(|r| lambda * r).collect(),
        w: canonical.w.iter().map(|w| gamma * w).collect(),
        w_prime: canonical
            .w_prime
            .iter()
            .map(|d| gamma / lambda * d)
            .collect(),
        params: canonical.params.clone(),
        frozen,
        decay_rate_fit: f64::NAN,
        shooting_value: gamma * canonical.shooting_value,
    };
    profile.decay_rate_fit = fit_decay_rate(&profile, &frozen)?.fitted_slope;
    Ok(profile)
}

/// (γ, λ) of the pure-power scaling reduction.
pub fn scaling_factors(params: &ProblemParams, frozen: FrozenCoefficients) -> (f64, f64) {
    let p = params.p;
    let q = params.q();
    (
        (frozen.v / frozen.k).powf(1.0 / (q - p)),
        (frozen.a / frozen.v).powf(1.0 / p),
    )
}

/// Relative w mismatch treated as integration noise by [`ode_residual`].
pub const CONSISTENCY_NOISE: f64 = 1e-10;

/// Worst unscaled defects found by [`ode_residual_report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Flux balance defect and the left end of its cell.
    pub equation: f64,
    pub equation_at: f64,
    /// w against ∫w′ defect and the left end of its cell.
    pub consistency: f64,
    pub consistency_at: f64,
    /// max(1, max w^{q−1}).
    pub scale: f64,
}

impl ResidualReport {
    pub fn scaled(&self) -> f64 {
        self.equation.max(self.consistency) / self.scale
    }
}

/// Scaled sup-norm residual of −a Δ_p w + V w^{p−1} − K f(w) on the grid.
///
/// Each cell [r_i, r_{i+1}] compares the flux increment
/// a (r^{n−1} |w′|^{p−2} w′) |_{r_i}^{r_{i+1}} with the integral of
/// r^{n−1}(V w^{p−1} − K f(w)) over the cell (cubic Hermite interpolation
/// of w, 4-point Gauss), divided by the cell measure. A second term flags
/// w values that disagree with the w′ column. The maximum is normalized by
/// max(1, w(0)^{q−1}).
pub fn ode_residual(profile: &RadialProfile, frozen: &FrozenCoefficients) -> Result<f64> {
    Ok(ode_residual_report(profile, frozen)?.scaled())
}

/// The two defects behind [`ode_residual`], with locations.
pub fn ode_residual_report(
    profile: &RadialProfile,
    frozen: &FrozenCoefficients,
) -> Result<ResidualReport> {
    profile.check_lengths()?;
    let params = &profile.params;
    let p = params.p;
    let n = params.n as i32;
    let FrozenCoefficients { a, v, k } = *frozen;
    let (r, w, d) = (&profile.r, &profile.w, &profile.w_prime);
    let flux = |i: usize| r[i].powi(n - 1) * signed_pow(d[i], p - 1.0);
    let w_top = w.iter().copied().fold(0.0, f64::max);
    let mut report = ResidualReport {
        equation: 0.0,
        equation_at: f64::NAN,
        consistency: 0.0,
        consistency_at: f64::NAN,
        scale: w_top.powf(params.q() - 1.0).max(1.0),
    };
    for i in 0..r.len().saturating_sub(1) {
        let h = r[i + 1] - r[i];
        let mut source = 0.0;
        for (x, wt) in GAUSS4 {
            let t = 0.5 * (x + 1.0);
            let s = r[i] + t * h;
            let u = hermite(t, h, w[i], d[i], w[i + 1], d[i + 1]);
            let g = v * signed_pow(u, p - 1.0) - k * params.f(u);
            source += 0.5 * h * wt * s.powi(n - 1) * g;
        }
        let measure = (r[i + 1].powi(n) - r[i].powi(n)) / n as f64;
        let res = ((a * (flux(i + 1) - flux(i)) - source) / measure).abs();
        if res > report.equation {
            report.equation = res;
            report.equation_at = r[i];
        }
    }
    // Disagreement between w increments and the integral of the cubic
    // through four neighbouring w′ values, pushed through the linearized
    // flux: a (p−1)|w′|^{p−2} δw′ / h with δw′ ≈ e / h.
    if r.len() >= 4 {
        for i in 0..r.len() - 1 {
            let j = i.saturating_sub(1).min(r.len() - 4);
            let x = [r[j], r[j + 1], r[j + 2], r[j + 3]];
            let c = cubic_weights(x, r[i], r[i + 1]);
            let integral: f64 = (0..4).map(|m| c[m] * d[j + m]).sum();
            let e = w[i + 1] - w[i] - integral;
            // Mismatches at the integrator's own accuracy are not defects;
            // near the origin 1/h² would otherwise amplify them.
            let excess = e.abs() - CONSISTENCY_NOISE * w[i].abs().max(w[i + 1].abs());
            if excess <= 0.0 {
                continue;
            }
            let h = r[i + 1] - r[i];
            let slope = d[i].abs().max(d[i + 1].abs());
            let res = a * (p - 1.0) * slope.powf(p - 2.0) * excess / (h * h);
            if res > report.consistency {
                report.consistency = res;
                report.consistency_at = r[i];
            }
        }
    }
    Ok(report)
}

/// Tail slope of ln w on r ∈ [0.6 r_max, 0.9 r_max], after removing the
/// algebraic prefactor r^{−(n−1)/(p(p−1))} of the far field, against the
/// predicted −(V/(a(p−1)))^{1/p}.
pub fn fit_decay_rate(profile: &RadialProfile, frozen: &FrozenCoefficients) -> Result<DecayFit> {
    profile.check_lengths()?;
    let p = profile.params.p;
    let n = profile.params.n as f64;
    let m = (n - 1.0) / (p * (p - 1.0));
    let r_max = *profile
        .r
        .last()
        .ok_or_else(|| Error::InvalidInput("empty profile".into()))?;
    let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&r, &w) in profile.r.iter().zip(&profile.w) {
        if r < 0.6 * r_max || r > 0.9 * r_max {
            continue;
        }
        if !(w > 1e-300) {
            return Err(Error::TailUnderflow(format!("w({r:.3}) = {w:e}")));
        }
        let y = w.ln() + m * r.ln();
        sx += r;
        sy += y;
        sxx += r * r;
        sxy += r * y;
        count += 1.0;
    }
    if count < 3.0 {
        return Err(Error::TailUnderflow(
            "fewer than 3 nodes in the tail window".into(),
        ));
    }
    let fitted_slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    Ok(DecayFit {
        fitted_slope,
        predicted_slope: -frozen.decay_rate(p),
    })
}

impl RadialProfile {
    /// Wraps raw samples (e.g. read from CSV or perturbed by hand).
    pub fn from_samples(
        r: Vec<f64>,
        w: Vec<f64>,
        w_prime: Vec<f64>,
        params: ProblemParams,
        frozen: FrozenCoefficients,
    ) -> Result<Self> {
        let mut profile = RadialProfile {
            shooting_value: w.first().copied().unwrap_or(0.0),
            r,
            w,
            w_prime,
            params,
            frozen,
            decay_rate_fit: f64::NAN,
        };
        profile.check_lengths()?;
        if profile.r.windows(2).any(|x| !(x[1] > x[0]))
            || profile.r.first().is_some_and(|&r| r < 0.0)
        {
            return Err(Error::InvalidInput(
                "radial grid must be nonnegative and increasing".into(),
            ));
        }
        if let Ok(fit) = fit_decay_rate(&profile, &frozen) {
            profile.decay_rate_fit = fit.fitted_slope;
        }
        Ok(profile)
    }

    /// The same grid with w ≡ 0.
    pub fn zero_like(&self) -> Self {
        RadialProfile {
            w: vec![0.0; self.r.len()],
            w_prime: vec![0.0; self.r.len()],
            decay_rate_fit: f64::NAN,
            shooting_value: 0.0,
            ..self.clone()
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.w.iter().all(|&w| w == 0.0) && self.w_prime.iter().all(|&d| d == 0.0)
    }

    /// Multiplies the profile (and its derivative) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        RadialProfile {
            w: self.w.iter().map(|w| factor * w).collect(),
            w_prime: self.w_prime.iter().map(|d| factor * d).collect(),
            shooting_value: factor * self.shooting_value,
            ..self.clone()
        }
    }

    fn check_lengths(&self) -> Result<()> {
        if self.r.len() != self.w.len() || self.r.len() != self.w_prime.len() {
            return Err(Error::InvalidInput(format!(
                "profile columns differ in length ({}, {}, {})",
                self.r.len(),
                self.w.len(),
                self.w_prime.len()
            )));
        }
        Ok(())
    }

    /// Positivity and monotonicity of a converged ground state.
    fn check_shape(&self) -> Result<()> {
        if let Some(i) = self.w.iter().position(|&w| !(w > 0.0)) {
            return Err(Error::SolverFailure(format!(
                "profile not positive at r = {}",
                self.r[i]
            )));
        }
        let bad_slope = self.w_prime.iter().position(|&d| !(d < 0.0));
        let bad_step = self.w.windows(2).position(|x| x[1] > x[0]);
        if let Some(i) = bad_slope.or(bad_step) {
            return Err(Error::SolverFailure(format!(
                "profile not monotone near r = {}",
                self.r[i]
            )));
        }
        Ok(())
    }

    /// Writes `r,w,w_prime` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"r,w,w_prime\n")?;
        for i in 0..self.r.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.r[i], self.w[i], self.w_prime[i]
            )?;
        }
        Ok(())
    }

    /// Reads the format written by [`RadialProfile::write_csv`].
    pub fn read_csv<R: BufRead>(
        input: R,
        params: ProblemParams,
        frozen: FrozenCoefficients,
    ) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::InvalidInput("empty profile file".into()))?;
        if header.trim() != "r,w,w_prime" {
            return Err(Error::InvalidInput(format!(
                "unexpected profile header `{header}`"
            )));
        }
        let (mut r, mut w, mut d) = (Vec::new(), Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidInput(format!("line {}: bad number `{s}`", lineno + 2))
                })
            };
            if cols.len() != 3 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 3 columns",
                    lineno + 2
                )));
            }
            r.push(parse(cols[0])?);
            w.push(parse(cols[1])?);
            d.push(parse(cols[2])?);
        }
        Self::from_samples(r, w, d, params, frozen)
    }
}
