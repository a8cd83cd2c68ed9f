//! Energy integrals of radial profiles and the identities they satisfy.
//!
//! For u(x) = w(|x|) and frozen (a, V, K) the functional is
//! I(u) = a A + (V/p) B − K Φ with A = ∫|∇u|^p/p, B = ∫|u|^p and
//! Φ = ∫F(u). All integrals are radial, weighted by r^{n−1} and the
//! sphere area (2 for n = 1, both half-lines).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Nonlinearity, ProblemParams};
use crate::quadrature::{radial_integral, sphere_abs_moment};
use crate::radial::{
    shoot, shoot_canonical, solve_frozen, FrozenCoefficients, RadialProfile, ShootOptions,
};

/// The integrals making up I(u).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// ∫ |∇u|^p / p
    #[serde(rename = "A")]
    pub kinetic: f64,
    /// ∫ |u|^p
    #[serde(rename = "B")]
    pub mass: f64,
    /// ∫ |u|^q, pure powers only.
    #[serde(rename = "C")]
    pub q_moment: Option<f64>,
    /// ∫ F(u)
    #[serde(rename = "Phi")]
    pub primitive: f64,
    #[serde(rename = "I_value")]
    pub i_value: f64,
    /// ∫ f(u) u
    #[serde(skip)]
    pub nonlinear_moment: f64,
}

/// Quadrature of the energy integrals of `profile` for frozen (a, V, K).
pub fn energy_breakdown(
    profile: &RadialProfile,
    frozen: &FrozenCoefficients,
) -> Result<EnergyBreakdown> {
    if profile.r.len() != profile.w.len() || profile.r.len() != profile.w_prime.len() {
        return Err(Error::InvalidInput(
            "profile columns differ in length".into(),
        ));
    }
    let params = &profile.params;
    let n = params.n;
    let p = params.p;
    let integral = |g: &dyn Fn(f64, f64) -> f64| {
        let samples: Vec<f64> = profile
            .w
            .iter()
            .zip(&profile.w_prime)
            .map(|(&w, &d)| g(w, d))
            .collect();
        radial_integral(n, &profile.r, &samples)
    };
    let kinetic = integral(&|_, d| d.abs().powf(p) / p);
    let mass = integral(&|w, _| w.abs().powf(p));
    let q_moment = params
        .is_pure_power()
        .then(|| integral(&|w, _| w.abs().powf(params.q())));
    let primitive = integral(&|w, _| params.big_f(w));
    let nonlinear_moment = integral(&|w, _| params.f(w) * w);
    let FrozenCoefficients { a, v, k } = *frozen;
    Ok(EnergyBreakdown {
        kinetic,
        mass,
        q_moment,
        primitive,
        i_value: a * kinetic + v / p * mass - k * primitive,
        nonlinear_moment,
    })
}

/// |p a A + V B − K ∫f(u)u| / (K ∫f(u)u); zero exactly on the Nehari set.
pub fn nehari_residual(e: &EnergyBreakdown, frozen: &FrozenCoefficients, p: f64) -> f64 {
    let rhs = frozen.k * e.nonlinear_moment;
    (p * frozen.a * e.kinetic + frozen.v * e.mass - rhs).abs() / rhs
}

/// The θ > 0 maximizing I(θ u), i.e. putting θ u on the Nehari set.
pub fn nehari_project(direction: &RadialProfile, frozen: &FrozenCoefficients) -> Result<f64> {
    let params = &direction.params;
    let p = params.p;
    let e = energy_breakdown(direction, frozen)?;
    let quadratic = p * frozen.a * e.kinetic + frozen.v * e.mass;
    match &params.nonlinearity {
        Nonlinearity::PurePower(q) => {
            let c = e.q_moment.unwrap_or(0.0);
            if !(c > 0.0) {
                return Err(Error::InvalidInput(
                    "Nehari projection of an identically zero direction".into(),
                ));
            }
            Ok((quadratic / (frozen.k * c)).powf(1.0 / (q - p)))
        }
        Nonlinearity::PowerSum(terms) => {
            // θ^{−p} K ∫f(θu)θu = K Σ c θ^{e−p} ∫|u|^e, increasing in θ.
            let moments: Vec<(f64, f64, f64)> = terms
                .iter()
                .map(|t| {
                    let m = radial_integral(
                        params.n,
                        &direction.r,
                        &direction
                            .w
                            .iter()
                            .map(|w| w.abs().powf(t.exponent))
                            .collect::<Vec<_>>(),
                    );
                    (t.coeff, t.exponent, m)
                })
                .collect();
            if !moments.iter().any(|&(c, _, m)| c * m > 0.0) {
                return Err(Error::InvalidInput(
                    "Nehari projection of an identically zero direction".into(),
                ));
            }
            let g = |log_theta: f64| {
                frozen.k
                    * moments
                        .iter()
                        .map(|&(c, ex, m)| c * m * ((ex - p) * log_theta).exp())
                        .sum::<f64>()
                    - quadratic
            };
            let (mut lo, mut hi) = (-1.0, 1.0);
            while g(lo) > 0.0 {
                lo *= 2.0;
            }
            while g(hi) < 0.0 {
                hi *= 2.0;
            }
            while hi - lo > 1e-13 {
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
            Ok((0.5 * (lo + hi)).exp())
        }
    }
}

/// Ground state for frozen coefficients: scaling of the canonical profile
/// for pure powers, direct shooting otherwise.
pub fn ground_state(params: &ProblemParams, frozen: FrozenCoefficients) -> Result<RadialProfile> {
    if params.is_pure_power() {
        solve_frozen(
            &shoot_canonical(params, ShootOptions::default().tol)?,
            frozen,
        )
    } else {
        shoot(params, frozen, &ShootOptions::default())
    }
}

/// The minimax level c = max_θ I(θ v) at the ground state v.
pub fn mountain_pass_level(frozen: FrozenCoefficients, params: &ProblemParams) -> Result<f64> {
    let profile = ground_state(params, frozen)?;
    projected_level(&profile, &frozen)
}

/// max_θ I(θ u) for a nontrivial direction u.
pub fn projected_level(direction: &RadialProfile, frozen: &FrozenCoefficients) -> Result<f64> {
    let theta = nehari_project(direction, frozen)?;
    Ok(energy_breakdown(&direction.scaled(theta), frozen)?.i_value)
}

/// Projected levels of the bump family w (1 + s e^{−(r/ρ)²}); each is an
/// upper bound for the minimax level, attained only at s = 0.
pub fn bump_family_levels(
    ground: &RadialProfile,
    frozen: &FrozenCoefficients,
    amplitudes: &[f64],
    widths: &[f64],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(amplitudes.len() * widths.len());
    for &s in amplitudes {
        for &rho in widths {
            let mut dir = ground.clone();
            for i in 0..dir.r.len() {
                let x = dir.r[i] / rho;
                let bump = (-x * x).exp();
                let d_bump = -2.0 * x / rho * bump;
                let (w, d) = (ground.w[i], ground.w_prime[i]);
                dir.w[i] = w * (1.0 + s * bump);
                dir.w_prime[i] = d * (1.0 + s * bump) + w * s * d_bump;
            }
            out.push(projected_level(&dir, frozen)?);
        }
    }
    Ok(out)
}

/// |(n−p) a A + n (V/p) B − n K Φ| / (n K Φ), the dilation identity.
pub fn pohozaev_residual(profile: &RadialProfile, frozen: &FrozenCoefficients) -> Result<f64> {
    let e = energy_breakdown(profile, frozen)?;
    Ok(pohozaev_from(
        &e,
        frozen,
        profile.params.n,
        profile.params.p,
    ))
}

fn pohozaev_from(e: &EnergyBreakdown, frozen: &FrozenCoefficients, n: usize, p: f64) -> f64 {
    let n = n as f64;
    let FrozenCoefficients { a, v, k } = *frozen;
    let lhs = (n - p) * a * e.kinetic + n * v / p * e.mass - n * k * e.primitive;
    lhs.abs() / (n * k * e.primitive)
}

/// Test vector fields for the domain-variation identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TestField {
    /// h(x) = x.
    Dilation,
    /// h(x) = T(|x|/R) e_k with the C¹ cutoff T (1 inside R, 0 beyond 2R);
    /// `axis` is zero-based.
    Coordinate { axis: usize, cutoff_radius: f64 },
}

/// C¹ cutoff: 1 on [0, 1], 0 on [2, ∞), cubic in between.
pub fn cutoff(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let s = t - 1.0;
        1.0 - 3.0 * s * s + 2.0 * s * s * s
    }
}

pub fn cutoff_derivative(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        0.0
    } else {
        let s = t - 1.0;
        6.0 * s * s - 6.0 * s
    }
}

/// Normalized defect of ∫ Dh ∇β(∇u)·∇u − div h L(u) = 0 with
/// L = aβ(∇u) + (V/p)|u|^p − K F(u), for constant coefficients.
///
/// For `Dilation` this is [`pohozaev_residual`]. For `Coordinate` the
/// integrand is (T′/R) θ_k (a|u′|^p − L), odd in θ_k, so its integral over
/// a radial profile cancels exactly; what is returned instead is the
/// integral over one hemisphere, i.e. the size of the cutoff-band terms
/// before cancellation, divided by n K Φ. It decays with the profile as R
/// grows.
pub fn pucci_serrin_residual(
    profile: &RadialProfile,
    frozen: &FrozenCoefficients,
    field: TestField,
) -> Result<f64> {
    let params = &profile.params;
    match field {
        TestField::Dilation => pohozaev_residual(profile, frozen),
        TestField::Coordinate {
            axis,
            cutoff_radius,
        } => {
            if axis >= params.n {
                return Err(Error::InvalidInput(format!(
                    "axis {axis} out of range for n = {}",
                    params.n
                )));
            }
            let r_max = profile.r.last().copied().unwrap_or(0.0);
            // The band [R, 2R] may run past the grid end; the exponential
            // tail closure of the radial integral covers the remainder.
            if !(cutoff_radius > 0.0) || cutoff_radius >= r_max {
                return Err(Error::InvalidInput(format!(
                    "cutoff radius {cutoff_radius} must lie inside the grid (r_max = {r_max})"
                )));
            }
            if profile.is_trivial() {
                return Ok(0.0);
            }
            let decay_length = 1.0 / frozen.decay_rate(params.p);
            if cutoff_radius < 3.0 * decay_length {
                log::warn!(
                    "cutoff radius {cutoff_radius:.3} is under 3 decay lengths; boundary terms dominate"
                );
            }
            let p = params.p;
            let FrozenCoefficients { a, v, k } = *frozen;
            let band: Vec<f64> = (0..profile.r.len())
                .map(|i| {
                    let (r, w, d) = (profile.r[i], profile.w[i], profile.w_prime[i]);
                    let grad = d.abs().powf(p);
                    let lagrangian = a * grad / p + v / p * w.abs().powf(p) - k * params.big_f(w);
                    cutoff_derivative(r / cutoff_radius).abs() / cutoff_radius
                        * (a * grad - lagrangian).abs()
                })
                .collect();
            // Angular factor: ∫ over {θ_k > 0} of θ_k, half the absolute moment.
            let radial = radial_integral(params.n, &profile.r, &band)
                / crate::quadrature::sphere_area(params.n);
            let hemisphere = 0.5 * sphere_abs_moment(params.n) * radial;
            let e = energy_breakdown(profile, frozen)?;
            Ok(hemisphere / (params.n as f64 * k * e.primitive))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soliton() -> RadialProfile {
        shoot_canonical(&ProblemParams::pure_power(1, 2.0, 4.0, 4.0), 1e-12).unwrap()
    }

    #[test]
    fn soliton_integrals() {
        let e = energy_breakdown(&soliton(), &FrozenCoefficients::UNIT).unwrap();
        assert!((e.kinetic - 2.0 / 3.0).abs() < 1e-8, "{e:?}");
        assert!((e.mass - 4.0).abs() < 1e-8);
        assert!((e.q_moment.unwrap() - 16.0 / 3.0).abs() < 1e-8);
        assert!((e.i_value - 4.0 / 3.0).abs() < 1e-8);
        assert!(
            (nehari_project(&soliton(), &FrozenCoefficients::UNIT).unwrap() - 1.0).abs() < 1e-8
        );
    }

    #[test]
    fn zero_profile_integrals_vanish() {
        let zero = soliton().zero_like();
        let e = energy_breakdown(&zero, &FrozenCoefficients::UNIT).unwrap();
        assert_eq!(
            (e.kinetic, e.mass, e.primitive, e.i_value),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert!(nehari_project(&zero, &FrozenCoefficients::UNIT).is_err());
        let field = TestField::Coordinate {
            axis: 0,
            cutoff_radius: 5.0,
        };
        assert_eq!(
            pucci_serrin_residual(&zero, &FrozenCoefficients::UNIT, field).unwrap(),
            0.0
        );
    }

    #[test]
    fn homogeneity_of_projection() {
        let w = soliton();
        let t1 = nehari_project(&w, &FrozenCoefficients::UNIT).unwrap();
        let t2 = nehari_project(&w.scaled(2.0), &FrozenCoefficients::UNIT).unwrap();
        assert!((t2 - t1 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_sum_projection_matches_pure_power_limit() {
        let pure = shoot_canonical(&ProblemParams::pure_power(3, 2.0, 4.0, 4.0), 1e-12).unwrap();
        let mut as_sum = pure.clone();
        as_sum.params = ProblemParams::power_sum(3, 2.0, &[(1.0, 4.0)], 4.0);
        let d = pure.scaled(0.7);
        let mut d_sum = as_sum.scaled(0.7);
        d_sum.params = as_sum.params.clone();
        let t1 = nehari_project(&d, &FrozenCoefficients::UNIT).unwrap();
        let t2 = nehari_project(&d_sum, &FrozenCoefficients::UNIT).unwrap();
        assert!((t1 - t2).abs() < 1e-11 * t1, "{t1} {t2}");
    }

    #[test]
    fn identities_at_the_three_dimensional_ground_state() {
        let w = shoot_canonical(&ProblemParams::pure_power(3, 2.0, 4.0, 4.0), 1e-12).unwrap();
        let e = energy_breakdown(&w, &FrozenCoefficients::UNIT).unwrap();
        assert!(nehari_residual(&e, &FrozenCoefficients::UNIT, 2.0) < 1e-7);
        assert!(pohozaev_residual(&w, &FrozenCoefficients::UNIT).unwrap() < 1e-7);
        assert!(pohozaev_residual(&w.scaled(1.1), &FrozenCoefficients::UNIT).unwrap() > 1e-2);
    }

    #[test]
    fn coordinate_field_terms_shrink_with_the_cutoff() {
        let w = shoot_canonical(&ProblemParams::pure_power(3, 2.0, 4.0, 4.0), 1e-12).unwrap();
        let r_max = *w.r.last().unwrap();
        let res = |radius: f64| {
            pucci_serrin_residual(
                &w,
                &FrozenCoefficients::UNIT,
                TestField::Coordinate {
                    axis: 0,
                    cutoff_radius: radius,
                },
            )
            .unwrap()
        };
        assert!(res(r_max / 2.0) <= 1e-4);
        assert!(res(1.0) > res(4.0) && res(4.0) > res(8.0));
        assert!(res(0.75 * r_max) < res(r_max / 2.0));
        assert!(pucci_serrin_residual(
            &w,
            &FrozenCoefficients::UNIT,
            TestField::Coordinate {
                axis: 0,
                cutoff_radius: r_max
            }
        )
        .is_err());
    }

    #[test]
    fn cutoff_is_c1() {
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(2.5), 0.0);
        assert!((cutoff(1.5) - 0.5).abs() < 1e-15);
        for t in [1.0, 2.0] {
            assert!(cutoff_derivative(t).abs() < 1e-15);
            assert!((cutoff(t + 1e-9) - cutoff(t - 1e-9)).abs() < 1e-12);
        }
        let h = 1e-6;
        let fd = (cutoff(1.3 + h) - cutoff(1.3 - h)) / (2.0 * h);
        assert!((fd - cutoff_derivative(1.3)).abs() < 1e-8);
    }

    #[test]
    fn bump_family_stays_above_the_level() {
        let w = soliton();
        let c = projected_level(&w, &FrozenCoefficients::UNIT).unwrap();
        let levels = bump_family_levels(
            &w,
            &FrozenCoefficients::UNIT,
            &[-0.2, 0.1, 0.3],
            &[0.5, 2.0],
        )
        .unwrap();
        assert!(levels.iter().all(|&l| l >= c - 1e-6), "{levels:?} vs {c}");
        assert!((c - 4.0 / 3.0).abs() < 1e-8);
    }
}
