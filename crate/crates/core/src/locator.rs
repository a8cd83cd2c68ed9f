//! Weak-concentration candidates: zeros of N(z), the rank of the coefficient
//! gradients, and a per-candidate certification.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{energy_breakdown, nehari_residual, pohozaev_residual};
use crate::error::{Error, Result};
use crate::field::{BoxDomain, CoefficientField};
use crate::radial::fit_decay_rate;
use crate::sigma::{
    clarke_estimate, default_step, norm, sigma_grad_fd, ClarkeEstimate, GroundStateLandscape,
    Landscape,
};

const MAX_ITERATIONS: usize = 30;
const MAX_HALVINGS: usize = 12;

/// Relative singular-value threshold used by [`gram_rank`] by default.
pub const GRAM_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramRank {
    pub rank: usize,
    pub lin_dep: bool,
    pub singular_values: Vec<f64>,
}

/// Numerical rank of the rows `[∇α; ∇V; ∇K]`.
pub fn gram_rank_of(grad_alpha: &[f64], grad_v: &[f64], grad_k: &[f64], tol: f64) -> GramRank {
    let n = grad_alpha.len();
    let rows: Vec<f64> = [grad_alpha, grad_v, grad_k].concat();
    let m = DMatrix::from_row_slice(3, n, &rows);
    let mut singular_values: Vec<f64> = m.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = if top == 0.0 {
        0
    } else {
        singular_values.iter().filter(|&&s| s > tol * top).count()
    };
    GramRank {
        rank,
        lin_dep: rank <= 2,
        singular_values,
    }
}

/// [`gram_rank_of`] with gradients of `field` at `z`. Coefficient signs
/// are not checked.
pub fn gram_rank(field: &CoefficientField, z: &[f64], tol: f64) -> Result<GramRank> {
    let ga = field.alpha.eval_with_gradient(z)?.gradient;
    let gv = field.v.eval_with_gradient(z)?.gradient;
    let gk = field.k.eval_with_gradient(z)?.gradient;
    Ok(gram_rank_of(&ga, &gv, &gk, tol))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub point: Vec<f64>,
    #[serde(rename = "N_norm")]
    pub n_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateReport {
    pub z: Vec<f64>,
    #[serde(rename = "N")]
    pub n_vec: Vec<f64>,
    #[serde(rename = "N_norm")]
    pub n_norm: f64,
    pub gram_rank: usize,
    pub lin_dep: bool,
    pub grad_sigma_fd: Vec<f64>,
    #[serde(rename = "in_C_set")]
    pub in_c_set: bool,
    pub refinement_trace: Vec<TracePoint>,
    /// Refinement reached |N| ≤ tolerance.
    pub refined: bool,
    pub tolerance: f64,
    /// A coefficient is nonsmooth here; only the Clarke check is meaningful.
    pub clarke_only: bool,
    /// Axes along which N does not vary on the scan grid.
    pub degenerate_axes: Vec<usize>,
    /// Ground states are unique here (pure power, p ≤ 2); otherwise the
    /// report describes the computed branch only.
    pub unique_branch: bool,
}

impl CandidateReport {
    /// Full report at `z` without refinement.
    pub fn at(land: &GroundStateLandscape, z: &[f64], tolerance: f64) -> Result<Self> {
        let nv = land.necessary_vector(z)?;
        let gram = gram_rank_of(
            &nv.field.grad_alpha,
            &nv.field.grad_v,
            &nv.field.grad_k,
            GRAM_TOL,
        );
        let n_norm = nv.norm();
        let params = land.params();
        let in_c_set = n_norm <= tolerance && gram.lin_dep;
        Ok(Self {
            z: z.to_vec(),
            n_norm,
            gram_rank: gram.rank,
            lin_dep: gram.lin_dep,
            grad_sigma_fd: sigma_grad_fd(land, z, default_step(z))?,
            in_c_set,
            refinement_trace: vec![TracePoint {
                point: z.to_vec(),
                n_norm,
            }],
            refined: n_norm <= tolerance,
            tolerance,
            clarke_only: nv.field.nonsmooth,
            degenerate_axes: Vec::new(),
            unique_branch: params.p <= 2.0 && params.is_pure_power(),
            n_vec: nv.n,
        })
    }
}

/// Result of [`scan_candidates`].
#[derive(Clone, Debug, Serialize)]
pub struct ScanOutcome {
    pub candidates: Vec<CandidateReport>,
    /// N vanishes on (at least half of) the grid; no point list is given.
    pub degenerate: bool,
    pub grid_median_norm: f64,
    pub grid_max_norm: f64,
    pub tolerance: f64,
    pub seeds: usize,
}

/// Grid scan of N followed by damped Newton from each local minimum of |N|.
/// `tol` overrides the default 10⁻⁶ · max|N| on the grid.
pub fn scan_candidates(
    land: &GroundStateLandscape,
    domain: &BoxDomain,
    grid_n: usize,
    tol: Option<f64>,
) -> Result<ScanOutcome> {
    if grid_n < 4 {
        return Err(Error::InvalidInput("grid_n must be at least 4".into()));
    }
    if domain.dim() != land.dim() {
        return Err(Error::InvalidInput(
            "box dimension differs from field dimension".into(),
        ));
    }
    let indices = domain.indices(grid_n);
    let values: Vec<Vec<f64>> = indices
        .par_iter()
        .map(|idx| Ok(land.necessary_vector(&domain.node(grid_n, idx))?.n))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = values.iter().map(|v| norm(v)).collect();
    let grid_max_norm = norms.iter().copied().fold(0.0, f64::max);
    let grid_median_norm = median(&norms);
    let energy_scale = {
        let e = land.frozen_energy(land.field().eval(&domain.node(grid_n, &indices[0]))?.frozen)?;
        e.kinetic + e.mass + e.primitive
    };
    let tolerance = tol.unwrap_or(1e-6 * grid_max_norm);
    let mut outcome = ScanOutcome {
        candidates: Vec::new(),
        degenerate: grid_median_norm <= 1e-12 * energy_scale,
        grid_median_norm,
        grid_max_norm,
        tolerance,
        seeds: 0,
    };
    if outcome.degenerate {
        return Ok(outcome);
    }

    let n = domain.dim();
    let invariant = 1e-12 * grid_max_norm;
    let degenerate_axes: Vec<usize> = (0..n)
        .filter(|&axis| {
            indices.iter().all(|idx| {
                if idx[axis] + 1 == grid_n {
                    return true;
                }
                let mut next = idx.clone();
                next[axis] += 1;
                let a = &values[BoxDomain::flat(grid_n, idx)];
                let b = &values[BoxDomain::flat(grid_n, &next)];
                a.iter().zip(b).all(|(x, y)| (x - y).abs() <= invariant)
            })
        })
        .collect();

    let seeds: Vec<Vec<f64>> = indices
        .iter()
        .filter(|idx| {
            let here = norms[BoxDomain::flat(grid_n, idx)];
            (0..n).all(|axis| {
                [-1i64, 1].iter().all(|&d| {
                    let k = idx[axis] as i64 + d;
                    if k < 0 || k >= grid_n as i64 {
                        return true;
                    }
                    let mut other = (*idx).clone();
                    other[axis] = k as usize;
                    here <= norms[BoxDomain::flat(grid_n, &other)]
                })
            })
        })
        .map(|idx| domain.node(grid_n, idx))
        .collect();
    outcome.seeds = seeds.len();

    let refined: Vec<Option<CandidateReport>> = seeds
        .par_iter()
        .map(|seed| refine(land, domain, seed, tolerance))
        .collect::<Result<_>>()?;

    let diag = norm(
        &domain
            .hi
            .iter()
            .zip(&domain.lo)
            .map(|(h, l)| h - l)
            .collect::<Vec<_>>(),
    );
    let same = |a: &[f64], b: &[f64]| {
        (0..n)
            .filter(|i| !degenerate_axes.contains(i))
            .all(|i| (a[i] - b[i]).abs() <= 1e-4 * diag)
    };
    for mut report in refined.into_iter().flatten() {
        if outcome.candidates.iter().any(|c| same(&c.z, &report.z)) {
            continue;
        }
        report.degenerate_axes = degenerate_axes.clone();
        outcome.candidates.push(report);
    }
    Ok(outcome)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn jacobian(land: &GroundStateLandscape, z: &[f64]) -> Result<DMatrix<f64>> {
    let n = z.len();
    let h = default_step(z);
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[j] += h;
        zm[j] -= h;
        let np = land.necessary_vector(&zp)?.n;
        let nm = land.necessary_vector(&zm)?.n;
        for i in 0..n {
            jac[(i, j)] = (np[i] - nm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Newton step −J⁺N with singular values below 10⁻¹⁰ relative dropped.
fn newton_step(jac: DMatrix<f64>, n_vec: &[f64]) -> Vec<f64> {
    let svd = jac.svd(true, true);
    let top = svd.singular_values.max();
    if top == 0.0 {
        return vec![0.0; n_vec.len()];
    }
    let pinv = svd
        .pseudo_inverse(1e-10 * top)
        .expect("u and v were computed");
    (pinv * DVector::from_column_slice(n_vec))
        .iter()
        .map(|x| -x)
        .collect()
}

/// Damped Newton from `seed`; `None` if the iterates leave the box before
/// reaching the tolerance.
fn refine(
    land: &GroundStateLandscape,
    domain: &BoxDomain,
    seed: &[f64],
    tolerance: f64,
) -> Result<Option<CandidateReport>> {
    let mut z = seed.to_vec();
    let mut nz = land.necessary_vector(&z)?.n;
    let mut trace = vec![TracePoint {
        point: z.clone(),
        n_norm: norm(&nz),
    }];
    let mut damping: f64 = 1.0;
    let mut left_box = false;
    for _ in 0..MAX_ITERATIONS {
        let current = norm(&nz);
        if current == 0.0 {
            break;
        }
        let step = newton_step(jacobian(land, &z)?, &nz);
        let step_len = norm(&step);
        if step_len <= 1e-14 * (1.0 + norm(&z)) {
            break;
        }
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a + damping * s).collect();
            if !domain.contains(&trial) {
                left_box = true;
            } else if let Ok(nv) = land.necessary_vector(&trial) {
                if norm(&nv.n) < current {
                    accepted = Some((trial, nv.n));
                    break;
                }
            }
            damping *= 0.5;
        }
        let Some((trial, n_trial)) = accepted else {
            break;
        };
        let moved = damping * step_len;
        z = trial;
        nz = n_trial;
        trace.push(TracePoint {
            point: z.clone(),
            n_norm: norm(&nz),
        });
        damping = (2.0 * damping).min(1.0);
        if norm(&nz) <= tolerance && moved <= 1e-8 * (1.0 + norm(&z)) {
            break;
        }
    }
    let converged = norm(&nz) <= tolerance;
    if !converged && left_box {
        return Ok(None);
    }
    let mut report = CandidateReport::at(land, &z, tolerance)?;
    report.refinement_trace = trace;
    report.refined = converged;
    report.in_c_set = converged && report.in_c_set;
    Ok(Some(report))
}

/// Thresholds for [`certify`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertifyOptions {
    pub residual_tol: f64,
    pub decay_tol: f64,
    pub grad_tol: f64,
    pub clarke_radius: f64,
    /// Defaults to 2n + 1 when zero.
    pub clarke_samples: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-5,
            decay_tol: 0.02,
            grad_tol: 1e-4,
            clarke_radius: 1e-3,
            clarke_samples: 0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certification {
    pub checks: Vec<CheckOutcome>,
    pub certified: bool,
    pub failing: Vec<&'static str>,
    pub clarke: Option<ClarkeEstimate>,
}

/// Re-checks a candidate. Failures are recorded, never raised; a check
/// that cannot be evaluated fails with value NaN.
pub fn certify(
    report: &CandidateReport,
    land: &GroundStateLandscape,
    opts: &CertifyOptions,
) -> Certification {
    let z = &report.z;
    let mut checks = Vec::new();
    let mut push = |name, value: f64, threshold: f64| {
        checks.push(CheckOutcome {
            name,
            value,
            threshold,
            passed: value <= threshold,
        })
    };
    let solved = land
        .field()
        .eval(z)
        .and_then(|fe| Ok((land.ground_state(fe.frozen)?, fe.frozen)));
    match &solved {
        Ok((profile, frozen)) => {
            let poho = pohozaev_residual(profile, frozen).unwrap_or(f64::NAN);
            push("pohozaev", poho, opts.residual_tol);
            let nehari = energy_breakdown(profile, frozen)
                .map(|e| nehari_residual(&e, frozen, land.params().p))
                .unwrap_or(f64::NAN);
            push("nehari", nehari, opts.residual_tol);
            let decay = fit_decay_rate(profile, frozen)
                .map(|d| d.relative_error())
                .unwrap_or(f64::NAN);
            push("decay", decay, opts.decay_tol);
        }
        Err(_) => {
            for (name, t) in [
                ("pohozaev", opts.residual_tol),
                ("nehari", opts.residual_tol),
                ("decay", opts.decay_tol),
            ] {
                push(name, f64::NAN, t);
            }
        }
    }
    push("lin_dep", report.gram_rank as f64, 2.0);
    push("grad_sigma", norm(&report.grad_sigma_fd), opts.grad_tol);
    let samples = if opts.clarke_samples == 0 {
        2 * z.len() + 1
    } else {
        opts.clarke_samples
    };
    let clarke = clarke_estimate(land, z, opts.clarke_radius, samples, opts.seed).ok();
    match &clarke {
        Some(c) => push("clarke", c.min_norm, c.tolerance),
        None => push("clarke", f64::NAN, 0.0),
    }
    let failing: Vec<&'static str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    Certification {
        certified: failing.is_empty(),
        checks,
        failing,
        clarke,
    }
}

/// A candidate with its certification, as written to JSON lines.
#[derive(Clone, Debug, Serialize)]
pub struct CertifiedCandidate {
    #[serde(flatten)]
    pub report: CandidateReport,
    pub certification: Certification,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemParams;

    fn landscape(alpha: &str, v: &str, k: &str) -> GroundStateLandscape {
        let field = CoefficientField::parse(alpha, v, k, 3).unwrap();
        GroundStateLandscape::new(field, ProblemParams::pure_power(3, 2.0, 4.0, 4.0)).unwrap()
    }

    #[test]
    fn gram_ranks() {
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        assert_eq!(gram_rank_of(&e(2), &e(0), &e(1), GRAM_TOL).rank, 3);
        let gv = [1.0, 2.0, 0.5];
        let gk = [0.0, -1.0, 3.0];
        let ga: Vec<f64> = gv.iter().zip(&gk).map(|(a, b)| a + b).collect();
        let r = gram_rank_of(&ga, &gv, &gk, GRAM_TOL);
        assert_eq!((r.rank, r.lin_dep), (2, true));
        assert_eq!(
            gram_rank_of(&[0.0; 3], &[0.0; 3], &[0.0; 3], GRAM_TOL).rank,
            0
        );
        let field = CoefficientField::parse("1", "1 + x1^2", "2 + x1", 3).unwrap();
        assert_eq!(
            gram_rank(&field, &[1.0, 0.0, 0.0], GRAM_TOL).unwrap().rank,
            1
        );
    }

    #[test]
    fn well_has_one_certified_candidate() {
        let land = landscape("1", "1 + (x1 - 0.3)^2 + (x2 + 0.2)^2 + (x3 - 0.1)^2", "1");
        let domain = BoxDomain::cube(3, 1.0).unwrap();
        let out = scan_candidates(&land, &domain, 6, None).unwrap();
        assert!(!out.degenerate);
        assert_eq!(out.candidates.len(), 1, "{:?}", out.candidates);
        let c = &out.candidates[0];
        let dz = norm(&[c.z[0] - 0.3, c.z[1] + 0.2, c.z[2] - 0.1]);
        assert!(dz <= 1e-6, "{dz}");
        assert!(c.in_c_set && c.lin_dep && c.refined);
        let cert = certify(c, &land, &CertifyOptions::default());
        assert!(cert.certified, "{:?}", cert.checks);
        // A grid point away from the minimum is forced through.
        let off = CandidateReport::at(&land, &[0.9, 0.0, 0.0], out.tolerance).unwrap();
        let cert = certify(&off, &land, &CertifyOptions::default());
        assert!(cert.failing.contains(&"grad_sigma"));
    }

    #[test]
    fn constant_field_is_degenerate() {
        let land = landscape("1", "1", "1");
        let out = scan_candidates(&land, &BoxDomain::cube(3, 1.0).unwrap(), 4, None).unwrap();
        assert!(out.degenerate && out.candidates.is_empty());
        let r = CandidateReport::at(&land, &[0.2, 0.0, 0.0], 1e-12).unwrap();
        assert!(certify(&r, &land, &CertifyOptions::default()).certified);
    }

    #[test]
    fn invariant_axis_collapses_to_one_candidate() {
        let land = landscape("1", "1 + x1^2", "1 + x2^2");
        let out = scan_candidates(&land, &BoxDomain::cube(3, 1.0).unwrap(), 5, None).unwrap();
        assert_eq!(out.candidates.len(), 1, "{:?}", out.candidates);
        let c = &out.candidates[0];
        assert_eq!(c.degenerate_axes, vec![2]);
        assert!(c.z[0].abs() < 1e-8 && c.z[1].abs() < 1e-8);
        assert_eq!(c.n_vec[2], 0.0);
    }

    #[test]
    fn cancelling_slopes_give_zero_n() {
        // Measure B and Phi at the origin, then tilt K so its slope cancels V's.
        let probe = landscape("1", "1 + x1", "1");
        let e = probe.necessary_vector(&[0.0; 3]).unwrap().energy;
        let slope = e.mass / 2.0 / e.primitive;
        let land = landscape("1", "1 + x1", &format!("1 + {slope:.17e}*x1"));
        let nv = land.necessary_vector(&[0.0; 3]).unwrap();
        assert!(nv.norm() < 1e-12 * e.mass, "{:?}", nv.n);
    }
}
