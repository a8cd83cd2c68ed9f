//! The ground-state energy Σ(z) of the frozen problem at z, its gradients
//! and a sampled Clarke subdifferential.
//!
//! Everything that only needs Σ as a function of z is written against the
//! [`Landscape`] trait, so surrogate functions can be injected in place of
//! the PDE-backed [`GroundStateLandscape`].

use std::collections::HashMap;
use std::sync::RwLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{energy_breakdown, nehari_project, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::field::{BoxDomain, CoefficientField, FieldEval};
use crate::hull::min_norm_point;
use crate::model::ProblemParams;
use crate::radial::{
    scaling_factors, shoot, solve_frozen, FrozenCoefficients, RadialProfile, ShootOptions,
};

/// A scalar function of z ∈ R^n.
pub trait Landscape: Sync {
    fn dim(&self) -> usize;
    fn sigma(&self, z: &[f64]) -> Result<f64>;
}

/// Surrogate landscape from a closure.
pub struct FnLandscape<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Landscape for FnLandscape<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn sigma(&self, z: &[f64]) -> Result<f64> {
        Ok((self.f)(z))
    }
}

/// −Σ for any landscape Σ.
pub struct Negated<L>(pub L);

impl<L: Landscape> Landscape for Negated<L> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn sigma(&self, z: &[f64]) -> Result<f64> {
        Ok(-self.0.sigma(z)?)
    }
}

/// Σ at one point with its ingredients.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaSample {
    pub z: Vec<f64>,
    pub sigma: f64,
    pub grad_fd: Vec<f64>,
    pub frozen: FrozenCoefficients,
    pub ground_energy: EnergyBreakdown,
    /// A coefficient expression is at a kink here.
    pub nonsmooth: bool,
}

/// ∂Γ± along one direction, on the ground-state branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaPm {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    /// False when ground states are not known to be unique (p > 2 or a
    /// power sum); the value is then that of the computed branch only.
    pub unique_branch: bool,
}

/// The coefficient-gradient pairing N(z) = ∇α A + ∇V B/p − ∇K Φ.
#[derive(Clone, Debug)]
pub struct NecessaryVector {
    pub n: Vec<f64>,
    pub energy: EnergyBreakdown,
    pub field: FieldEval,
}

impl NecessaryVector {
    pub fn norm(&self) -> f64 {
        norm(&self.n)
    }
}

/// Σ backed by ground states of the frozen problem.
pub struct GroundStateLandscape {
    field: CoefficientField,
    params: ProblemParams,
    opts: ShootOptions,
    /// Canonical profile and its integrals, for pure powers.
    canonical: Option<(RadialProfile, EnergyBreakdown)>,
    /// Power-sum energies keyed by the exact bits of (a, V, K).
    cache: RwLock<HashMap<[u64; 3], EnergyBreakdown>>,
}

impl GroundStateLandscape {
    pub fn new(field: CoefficientField, params: ProblemParams) -> Result<Self> {
        Self::with_options(field, params, ShootOptions::default())
    }

    pub fn with_options(
        field: CoefficientField,
        params: ProblemParams,
        opts: ShootOptions,
    ) -> Result<Self> {
        params.ensure_valid()?;
        if field.n != params.n {
            return Err(Error::InvalidInput(format!(
                "field dimension {} differs from n = {}",
                field.n, params.n
            )));
        }
        if params.n < 3 && !params.test_mode {
            return Err(Error::InvalidInput(
                "landscapes need n >= 3 outside test mode".into(),
            ));
        }
        let canonical = if params.is_pure_power() {
            let w = shoot(&params, FrozenCoefficients::UNIT, &opts)?;
            let e = energy_breakdown(&w, &FrozenCoefficients::UNIT)?;
            Some((w, e))
        } else {
            None
        };
        Ok(Self {
            field,
            params,
            opts,
            canonical,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn canonical(&self) -> Option<&RadialProfile> {
        self.canonical.as_ref().map(|(w, _)| w)
    }

    /// Ground-state profile for frozen coefficients.
    pub fn ground_state(&self, frozen: FrozenCoefficients) -> Result<RadialProfile> {
        match &self.canonical {
            Some((w, _)) => solve_frozen(w, frozen),
            None => shoot(&self.params, frozen, &self.opts),
        }
    }

    /// Integrals of the ground state at frozen coefficients. Pure powers
    /// scale the canonical integrals; power sums shoot (cached) and use the
    /// Nehari projection of the computed profile.
    pub fn frozen_energy(&self, frozen: FrozenCoefficients) -> Result<EnergyBreakdown> {
        if let Some((_, e)) = &self.canonical {
            return Ok(self.scaled_energy(e, frozen));
        }
        let key = [frozen.a.to_bits(), frozen.v.to_bits(), frozen.k.to_bits()];
        if let Some(e) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(*e);
        }
        let profile = self.ground_state(frozen)?;
        let theta = nehari_project(&profile, &frozen)?;
        let e = energy_breakdown(&profile.scaled(theta), &frozen)?;
        self.cache
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert(e);
        Ok(e)
    }

    fn scaled_energy(&self, e: &EnergyBreakdown, frozen: FrozenCoefficients) -> EnergyBreakdown {
        let p = self.params.p;
        let q = self.params.q();
        let n = self.params.n as f64;
        let (gamma, lambda) = scaling_factors(&self.params, frozen);
        let low = gamma.powf(p) * lambda.powf(n);
        let high = gamma.powf(q) * lambda.powf(n);
        let kinetic = gamma.powf(p) * lambda.powf(n - p) * e.kinetic;
        let mass = low * e.mass;
        let primitive = high * e.primitive;
        let FrozenCoefficients { a, v, k } = frozen;
        EnergyBreakdown {
            kinetic,
            mass,
            q_moment: e.q_moment.map(|c| high * c),
            primitive,
            i_value: a * kinetic + v / p * mass - k * primitive,
            nonlinear_moment: high * e.nonlinear_moment,
        }
    }

    /// Σ(z) with its FD gradient; for pure powers the closed-form value is
    /// checked against quadrature of the scaled profile.
    pub fn sample(&self, z: &[f64]) -> Result<SigmaSample> {
        let fe = self.field.eval(z)?;
        let energy = self.frozen_energy(fe.frozen)?;
        let sigma = energy.i_value;
        let ground_energy = if self.canonical.is_some() {
            let direct = energy_breakdown(&self.ground_state(fe.frozen)?, &fe.frozen)?;
            let rel = ((direct.i_value - sigma) / sigma).abs();
            if rel > 1e-8 {
                return Err(Error::Inconsistent(format!(
                    "closed-form Σ {sigma} and quadrature Σ {} differ by {rel:e}",
                    direct.i_value
                )));
            }
            direct
        } else {
            energy
        };
        let grad_fd = sigma_grad_fd(self, z, default_step(z))?;
        Ok(SigmaSample {
            z: z.to_vec(),
            sigma,
            grad_fd,
            frozen: fe.frozen,
            ground_energy,
            nonsmooth: fe.nonsmooth,
        })
    }

    /// N(z) = ∇α(z) A + ∇V(z) B/p − ∇K(z) Φ at the ground state.
    pub fn necessary_vector(&self, z: &[f64]) -> Result<NecessaryVector> {
        let field = self.field.eval(z)?;
        let energy = self.frozen_energy(field.frozen)?;
        let p = self.params.p;
        let n = (0..z.len())
            .map(|i| {
                field.grad_alpha[i] * energy.kinetic + field.grad_v[i] * energy.mass / p
                    - field.grad_k[i] * energy.primitive
            })
            .collect();
        Ok(NecessaryVector { n, energy, field })
    }

    /// ∂Γ±(z; w) on the ground-state branch: N(z)·w for both components.
    pub fn gamma_pm(&self, z: &[f64], w: &[f64]) -> Result<GammaPm> {
        if w.len() != z.len() || (norm(w) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(
                "direction must be a unit vector in R^n".into(),
            ));
        }
        let nv = self.necessary_vector(z)?;
        let g: f64 = nv.n.iter().zip(w).map(|(a, b)| a * b).sum();
        Ok(GammaPm {
            gamma_minus: g,
            gamma_plus: g,
            unique_branch: self.params.p <= 2.0 && self.params.is_pure_power(),
        })
    }
}

impl Landscape for GroundStateLandscape {
    fn dim(&self) -> usize {
        self.field.n
    }
    fn sigma(&self, z: &[f64]) -> Result<f64> {
        let fe = self.field.eval(z)?;
        Ok(self.frozen_energy(fe.frozen)?.i_value)
    }
}

/// One-shot Σ(z) for a field.
pub fn sigma_at(
    field: &CoefficientField,
    params: &ProblemParams,
    z: &[f64],
) -> Result<SigmaSample> {
    GroundStateLandscape::new(field.clone(), params.clone())?.sample(z)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// 10⁻⁴ (1 + |z|).
pub fn default_step(z: &[f64]) -> f64 {
    1e-4 * (1.0 + norm(z))
}

/// Central differences of Σ at two step sizes per coordinate, Richardson
/// extrapolated when they disagree by more than 10⁻⁴ relative. A failed
/// stencil is retried once with a step ten times smaller.
pub fn sigma_grad_fd<L: Landscape + ?Sized>(land: &L, z: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "FD step {step} must be positive"
        )));
    }
    (0..z.len())
        .map(|i| partial(land, z, i, step).or_else(|_| partial(land, z, i, step / 10.0)))
        .collect()
}

fn partial<L: Landscape + ?Sized>(land: &L, z: &[f64], i: usize, h: f64) -> Result<f64> {
    let diff = |h: f64| -> Result<f64> {
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[i] += h;
        zm[i] -= h;
        Ok((land.sigma(&zp)? - land.sigma(&zm)?) / (2.0 * h))
    };
    let coarse = diff(h)?;
    let fine = diff(h / 2.0)?;
    let size = coarse.abs().max(fine.abs());
    if (coarse - fine).abs() > 1e-4 * size {
        Ok((4.0 * fine - coarse) / 3.0)
    } else {
        Ok(fine)
    }
}

/// Sampled Clarke subdifferential of Σ near z.
#[derive(Clone, Debug, Serialize)]
pub struct ClarkeEstimate {
    pub center: Vec<f64>,
    pub radius: f64,
    pub seed: u64,
    pub sample_points: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<f64>>,
    /// Convex weights of `min_norm_point` over `gradients`.
    pub weights: Vec<f64>,
    pub min_norm_point: Vec<f64>,
    pub min_norm: f64,
    pub tolerance: f64,
    pub contains_zero: bool,
    /// All sampled gradients coincided.
    pub degenerate: bool,
}

/// Gradients at z and at `sample_count − 1` points uniform in the ball of
/// `radius` around z; zero is declared inside their hull when the hull's
/// min-norm point is within 10⁻³ of the largest sampled gradient norm.
pub fn clarke_estimate<L: Landscape + ?Sized>(
    land: &L,
    z: &[f64],
    radius: f64,
    sample_count: usize,
    seed: u64,
) -> Result<ClarkeEstimate> {
    let n = z.len();
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "radius {radius} must be positive"
        )));
    }
    if sample_count < 2 * n + 1 {
        return Err(Error::InvalidInput(format!(
            "sample_count {sample_count} is below 2n + 1 = {}",
            2 * n + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new(0.0f64, 1.0).expect("valid range");
    let mut points = vec![z.to_vec()];
    while points.len() < sample_count {
        let dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let len = norm(&dir);
        if len == 0.0 {
            continue;
        }
        let r = radius * unit.sample(&mut rng).powf(1.0 / n as f64);
        points.push(z.iter().zip(&dir).map(|(c, d)| c + r * d / len).collect());
    }
    let step = default_step(z).min(radius / 10.0);
    let gradients: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| sigma_grad_fd(land, x, step))
        .collect::<Result<_>>()?;
    let scale = gradients.iter().map(|g| norm(g)).fold(0.0, f64::max);
    let tolerance = (1e-3 * scale).max(1e-10);
    let degenerate = gradients.iter().all(|g| g == &gradients[0]);
    let (weights, point) = if degenerate {
        let mut w = vec![0.0; gradients.len()];
        w[0] = 1.0;
        (w, gradients[0].clone())
    } else {
        let h = min_norm_point(&gradients);
        (h.weights, h.point)
    };
    let min_norm = norm(&point);
    Ok(ClarkeEstimate {
        center: z.to_vec(),
        radius,
        seed,
        sample_points: points,
        gradients,
        weights,
        min_norm_point: point,
        min_norm,
        tolerance,
        contains_zero: min_norm <= tolerance,
        degenerate,
    })
}

/// Σ on a tensor grid, in lexicographic order, evaluated in parallel.
pub fn sigma_grid<L: Landscape + ?Sized>(
    land: &L,
    domain: &BoxDomain,
    grid_n: usize,
) -> Vec<(Vec<f64>, Result<f64>)> {
    domain
        .indices(grid_n)
        .par_iter()
        .map(|idx| {
            let z = domain.node(grid_n, idx);
            let s = land.sigma(&z);
            (z, s)
        })
        .collect()
}

/// max |Σ(z) − Σ(z′)| / |z − z′| over axis-adjacent grid nodes.
pub fn sigma_lipschitz_probe<L: Landscape + ?Sized>(
    land: &L,
    domain: &BoxDomain,
    grid_n: usize,
) -> Result<f64> {
    if grid_n < 3 {
        return Err(Error::InvalidInput("grid_n must be at least 3".into()));
    }
    let values: Vec<f64> = sigma_grid(land, domain, grid_n)
        .into_iter()
        .map(|(_, s)| s)
        .collect::<Result<_>>()?;
    let h = domain.spacing(grid_n);
    let mut worst: f64 = 0.0;
    for idx in domain.indices(grid_n) {
        let here = values[BoxDomain::flat(grid_n, &idx)];
        for axis in 0..idx.len() {
            if idx[axis] + 1 < grid_n {
                let mut next = idx.clone();
                next[axis] += 1;
                let there = values[BoxDomain::flat(grid_n, &next)];
                worst = worst.max((there - here).abs() / h[axis]);
            }
        }
    }
    Ok(worst)
}

/// One row of a Σ scan.
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub z: Vec<f64>,
    pub outcome: std::result::Result<(f64, Vec<f64>), String>,
}

/// Σ and its FD gradient at every node; failures are kept per row.
pub fn scan_sigma<L: Landscape + ?Sized>(
    land: &L,
    domain: &BoxDomain,
    grid_n: usize,
) -> Vec<ScanRow> {
    domain
        .indices(grid_n)
        .par_iter()
        .map(|idx| {
            let z = domain.node(grid_n, idx);
            let outcome = land
                .sigma(&z)
                .and_then(|s| Ok((s, sigma_grad_fd(land, &z, default_step(&z))?)))
                .map_err(|e| e.to_string());
            ScanRow { z, outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well(n: usize) -> GroundStateLandscape {
        let v = (1..=n)
            .map(|i| format!("x{i}^2"))
            .collect::<Vec<_>>()
            .join(" + ");
        let field = CoefficientField::parse("1", &format!("1 + {v}"), "1", n).unwrap();
        GroundStateLandscape::new(field, ProblemParams::pure_power(n, 2.0, 4.0, 4.0)).unwrap()
    }

    #[test]
    fn soliton_energy_and_v_scaling() {
        let params = ProblemParams::pure_power(1, 2.0, 4.0, 4.0);
        let one = sigma_at(
            &CoefficientField::constant(1.0, 1.0, 1.0, 1),
            &params,
            &[0.0],
        )
        .unwrap();
        assert!((one.sigma - 4.0 / 3.0).abs() < 1e-8);
        let four = sigma_at(
            &CoefficientField::constant(1.0, 4.0, 1.0, 1),
            &params,
            &[0.0],
        )
        .unwrap();
        assert!((four.sigma / one.sigma - 8.0).abs() < 1e-10);
        let k2 = sigma_at(
            &CoefficientField::constant(1.0, 1.0, 2.0, 1),
            &params,
            &[0.0],
        )
        .unwrap();
        assert!((k2.sigma / one.sigma - 0.5).abs() < 1e-10);
        assert!(one.grad_fd[0].abs() < 1e-12);
    }

    #[test]
    fn well_gradient_and_n() {
        let land = well(3);
        let s0 = land.sample(&[0.0, 0.0, 0.0]).unwrap();
        assert!(s0.grad_fd.iter().all(|g| g.abs() < 1e-6));
        let z = [1.0, 0.0, 0.0];
        let s = land.sample(&z).unwrap();
        let nv = land.necessary_vector(&z).unwrap();
        assert!((nv.n[0] - nv.energy.mass).abs() < 1e-12);
        assert!(
            (s.grad_fd[0] - nv.n[0]).abs() < 1e-4 * nv.n[0],
            "{:?} {:?}",
            s.grad_fd,
            nv.n
        );
        let g = land.gamma_pm(&z, &[1.0, 0.0, 0.0]).unwrap();
        let g_neg = land.gamma_pm(&z, &[-1.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.gamma_minus, -g_neg.gamma_minus);
        assert!(g.unique_branch);
        assert!(land.gamma_pm(&z, &[2.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn power_sum_landscape_uses_direct_shooting() {
        let params = ProblemParams::power_sum(3, 2.0, &[(1.0, 4.0)], 4.0);
        let field = CoefficientField::parse("1", "1 + x1^2", "1", 3).unwrap();
        let direct = GroundStateLandscape::new(field.clone(), params).unwrap();
        let scaled =
            GroundStateLandscape::new(field, ProblemParams::pure_power(3, 2.0, 4.0, 4.0)).unwrap();
        for z in [[0.0, 0.0, 0.0], [0.7, 0.2, 0.0]] {
            let a = direct.sigma(&z).unwrap();
            let b = scaled.sigma(&z).unwrap();
            assert!(((a - b) / b).abs() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn clarke_on_surrogates() {
        let kink = FnLandscape {
            dim: 3,
            f: |z: &[f64]| z[0].abs(),
        };
        let est = clarke_estimate(&kink, &[0.0; 3], 0.1, 9, 7).unwrap();
        assert!(est.contains_zero, "{est:?}");
        let bowl = FnLandscape {
            dim: 3,
            f: |z: &[f64]| z.iter().map(|x| x * x).sum(),
        };
        assert!(
            clarke_estimate(&bowl, &[0.0; 3], 0.05, 7, 1)
                .unwrap()
                .contains_zero
        );
        let off = clarke_estimate(&bowl, &[0.5, 0.0, 0.0], 0.05, 7, 1).unwrap();
        assert!(!off.contains_zero);
        // Negation mirrors the estimate.
        let neg = clarke_estimate(&Negated(bowl), &[0.5, 0.0, 0.0], 0.05, 7, 1).unwrap();
        for (a, b) in off.min_norm_point.iter().zip(&neg.min_norm_point) {
            assert!((a + b).abs() < 1e-9);
        }
        assert!(clarke_estimate(&kink, &[0.0; 3], 0.1, 6, 7).is_err());
    }

    #[test]
    fn constant_landscape_is_flat() {
        let params = ProblemParams::pure_power(3, 2.0, 4.0, 4.0);
        let land = GroundStateLandscape::new(CoefficientField::constant(1.0, 1.0, 1.0, 3), params)
            .unwrap();
        let b = BoxDomain::cube(3, 1.0).unwrap();
        assert_eq!(sigma_lipschitz_probe(&land, &b, 3).unwrap(), 0.0);
        let rows = scan_sigma(&land, &b, 2);
        assert_eq!(rows.len(), 8);
        let first = rows[0].outcome.as_ref().unwrap().0;
        assert!(rows.iter().all(|r| r.outcome.as_ref().unwrap().0 == first));
    }

    #[test]
    fn rejected_points_surface_as_errors() {
        let params = ProblemParams::pure_power(3, 2.0, 4.0, 4.0);
        let field = CoefficientField::parse("1", "x1", "1", 3).unwrap();
        let land = GroundStateLandscape::new(field, params).unwrap();
        assert!(matches!(
            land.sigma(&[-1.0, 0.0, 0.0]),
            Err(Error::NonPositiveCoefficient { name: "V", .. })
        ));
    }
}
