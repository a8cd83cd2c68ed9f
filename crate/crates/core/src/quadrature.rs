//! Radial quadrature on the solver's nonuniform grids.

use std::f64::consts::PI;

/// Γ(k/2) for a positive integer k.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "gamma_half(0) is a pole");
    let mut g = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut m = if k.is_multiple_of(2) { 2 } else { 1 };
    while m < k {
        g *= m as f64 / 2.0;
        m += 2;
    }
    g
}

/// Surface measure ω_{n-1} = 2π^{n/2}/Γ(n/2) of the unit sphere in Rⁿ;
/// for n = 1 this is 2, the two half-lines.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// ∫_{S^{n-1}} |θ_k| dσ(θ) for any fixed coordinate k.
pub fn sphere_abs_moment(n: usize) -> f64 {
    2.0 * PI.powf((n as f64 - 1.0) / 2.0) / gamma_half(n + 1)
}

/// Weights of ∫_a^b for the quadratic through (x0, x1, x2).
fn quadratic_weights(x: [f64; 3], a: f64, b: f64) -> [f64; 3] {
    // Integrate each Lagrange basis polynomial exactly, in coordinates
    // centred on x1 for conditioning.
    let c = x[1];
    let (t0, t1, t2) = (x[0] - c, 0.0, x[2] - c);
    let (a, b) = (a - c, b - c);
    let m1 = b - a;
    let m2 = (b * b - a * a) / 2.0;
    let m3 = (b * b * b - a * a * a) / 3.0;
    // L_i(t) = (t - tj)(t - tk) / ((ti - tj)(ti - tk))
    let basis = |ti: f64, tj: f64, tk: f64| -> f64 {
        (m3 - (tj + tk) * m2 + tj * tk * m1) / ((ti - tj) * (ti - tk))
    };
    [basis(t0, t1, t2), basis(t1, t0, t2), basis(t2, t0, t1)]
}

/// Composite Simpson over arbitrary increasing nodes: paired panels use the
/// quadratic through three nodes; an odd leftover panel uses the quadratic
/// through the last three nodes restricted to that panel.
pub fn simpson_nonuniform(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let m = x.len();
    if m < 2 {
        return 0.0;
    }
    if m == 2 {
        return 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < m {
        let w = quadratic_weights([x[i], x[i + 1], x[i + 2]], x[i], x[i + 2]);
        total += w[0] * y[i] + w[1] * y[i + 1] + w[2] * y[i + 2];
        i += 2;
    }
    if i + 1 < m {
        let j = m - 3;
        let w = quadratic_weights([x[j], x[j + 1], x[j + 2]], x[m - 2], x[m - 1]);
        total += w[0] * y[j] + w[1] * y[j + 1] + w[2] * y[j + 2];
    }
    total
}

/// ω_{n-1} ∫_0^∞ r^{n-1} g(r) dr for samples g on the grid `r` (first node
/// r₀ > 0 small). The [0, r₀] sliver uses g(r₀) and the part beyond the
/// last node is closed with the exponential fitted to the last two nodes.
pub fn radial_integral(n: usize, r: &[f64], g: &[f64]) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    let weighted: Vec<f64> = r
        .iter()
        .zip(g)
        .map(|(&ri, &gi)| ri.powi(n as i32 - 1) * gi)
        .collect();
    let mut total = simpson_nonuniform(r, &weighted);
    total += g[0] * r[0].powi(n as i32) / n as f64;
    let m = r.len();
    if m >= 2 {
        let (a, b) = (weighted[m - 2], weighted[m - 1]);
        if a > 0.0 && b > 0.0 && b < a {
            let rate = (a / b).ln() / (r[m - 1] - r[m - 2]);
            total += b / rate;
        }
    }
    sphere_area(n) * total
}

/// Weights of ∫_a^b for the cubic through four distinct nodes.
pub fn cubic_weights(x: [f64; 4], a: f64, b: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    let half = 0.5 * (b - a);
    for (t, wt) in GAUSS4 {
        let s = a + half * (t + 1.0);
        for (j, o) in out.iter_mut().enumerate() {
            let mut l = 1.0;
            for (m, &xm) in x.iter().enumerate() {
                if m != j {
                    l *= (s - xm) / (x[j] - xm);
                }
            }
            *o += half * wt * l;
        }
    }
    out
}

/// 4-point Gauss–Legendre nodes and weights on [-1, 1].
pub const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

/// Cubic Hermite interpolant on [x0, x1] from values and slopes, evaluated
/// at x0 + t (x1 - x0).
pub fn hermite(t: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sphere_abs_moment(1) - 2.0).abs() < 1e-15);
        assert!((sphere_abs_moment(3) - 2.0 * PI).abs() < 1e-13);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn simpson_is_exact_for_quadratics_on_irregular_grids() {
        let x = [0.0, 0.1, 0.35, 0.4, 0.9, 1.3, 2.0];
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t * t - t + 2.0).collect();
        let exact = 8.0 - 2.0 + 4.0;
        assert!((simpson_nonuniform(&x, &y) - exact).abs() < 1e-13);
        let x6 = &x[..6];
        let y6 = &y[..6];
        let exact6 = 1.3f64.powi(3) - 1.3 * 1.3 / 2.0 + 2.0 * 1.3;
        assert!((simpson_nonuniform(x6, y6) - exact6).abs() < 1e-13);
    }

    #[test]
    fn gaussian_radial_integral() {
        // ∫_{R³} e^{-|x|²} dx = π^{3/2}
        let r: Vec<f64> = std::iter::once(1e-6)
            .chain((1..=1200).map(|i| i as f64 * 0.01))
            .collect();
        let g: Vec<f64> = r.iter().map(|t| (-t * t).exp()).collect();
        let v = radial_integral(3, &r, &g);
        assert!((v - PI.powf(1.5)).abs() / PI.powf(1.5) < 1e-9, "{v}");
    }

    #[test]
    fn cubic_weights_integrate_cubics() {
        let f = |x: f64| 2.0 * x * x * x - x * x + 3.0;
        let big_f = |x: f64| 0.5 * x.powi(4) - x * x * x / 3.0 + 3.0 * x;
        let x = [0.1, 0.25, 0.3, 0.7];
        let w = cubic_weights(x, 0.25, 0.3);
        let approx: f64 = (0..4).map(|j| w[j] * f(x[j])).sum();
        assert!((approx - (big_f(0.3) - big_f(0.25))).abs() < 1e-15);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let (a, b) = (0.5, 1.25);
        for t in [0.0, 0.3, 0.77, 1.0] {
            let x = a + t * (b - a);
            let v = hermite(t, b - a, f(a), df(a), f(b), df(b));
            assert!((v - f(x)).abs() < 1e-14);
        }
    }
}
