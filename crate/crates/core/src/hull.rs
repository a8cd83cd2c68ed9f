//! Minimum-norm point of the convex hull of finitely many vectors.

/// Result of [`min_norm_point`].
#[derive(Clone, Debug, PartialEq)]
pub struct HullPoint {
    /// Convex weights (nonnegative, summing to one).
    pub weights: Vec<f64>,
    pub point: Vec<f64>,
    pub norm: f64,
    /// Frank–Wolfe duality gap at exit; bounds ‖x‖² − min ‖·‖².
    pub gap: f64,
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

fn combine(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let dim = points[0].len();
    let mut x = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        for (xi, pi) in x.iter_mut().zip(p) {
            *xi += w * pi;
        }
    }
    x
}

/// Minimizes ‖Σ λᵢ gᵢ‖ over the simplex by accelerated projected gradient
/// (FISTA), stopping on the Frank–Wolfe gap.
pub fn min_norm_point(points: &[Vec<f64>]) -> HullPoint {
    assert!(!points.is_empty(), "empty point set");
    let m = points.len();
    let gram: Vec<Vec<f64>> = points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect();
    let scale = (0..m).map(|i| gram[i][i]).fold(0.0, f64::max);
    if scale == 0.0 {
        return HullPoint {
            weights: vec![1.0 / m as f64; m],
            point: vec![0.0; points[0].len()],
            norm: 0.0,
            gap: 0.0,
        };
    }
    // Gradient of λᵀGλ is 2Gλ; trace bounds the top eigenvalue.
    let lipschitz = 2.0 * (0..m).map(|i| gram[i][i]).sum::<f64>();
    let grad = |lam: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| 2.0 * (0..m).map(|j| gram[i][j] * lam[j]).sum::<f64>())
            .collect()
    };
    let objective = |lam: &[f64]| -> f64 {
        (0..m)
            .map(|i| lam[i] * (0..m).map(|j| gram[i][j] * lam[j]).sum::<f64>())
            .sum()
    };
    let gap_of = |lam: &[f64]| -> f64 {
        let g = grad(lam);
        let inner: f64 = g.iter().zip(lam).map(|(a, b)| a * b).sum();
        let best = g.iter().copied().fold(f64::INFINITY, f64::min);
        0.5 * (inner - best)
    };

    let mut lam = vec![1.0 / m as f64; m];
    let mut y = lam.clone();
    let mut t: f64 = 1.0;
    let mut gap = gap_of(&lam);
    for _ in 0..20_000 {
        if gap <= 1e-15 * scale {
            break;
        }
        let g = grad(&y);
        let step: Vec<f64> = y
            .iter()
            .zip(&g)
            .map(|(yi, gi)| yi - gi / lipschitz)
            .collect();
        let next = project_simplex(&step);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        // Restart momentum when the objective goes up.
        if objective(&next) > objective(&lam) {
            t = 1.0;
            y = lam.clone();
            continue;
        }
        y = next
            .iter()
            .zip(&lam)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        lam = next;
        t = t_next;
        gap = gap_of(&lam);
    }
    let point = combine(points, &lam);
    let norm = point.iter().map(|x| x * x).sum::<f64>().sqrt();
    HullPoint {
        weights: lam,
        point,
        norm,
        gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn segment_through_origin() {
        let h = min_norm_point(&[vec![-1.0, 0.0], vec![1.0, 0.0]]);
        assert!(h.norm < 1e-9);
    }

    #[test]
    fn segment_off_origin() {
        // Closest point of [(1, 1), (1, −1)] is (1, 0).
        let h = min_norm_point(&[vec![1.0, 1.0], vec![1.0, -1.0]]);
        assert!(
            (h.point[0] - 1.0).abs() < 1e-7 && h.point[1].abs() < 1e-7,
            "{h:?}"
        );
    }

    #[test]
    fn vertex_is_optimal() {
        let h = min_norm_point(&[vec![1.0, 0.0], vec![3.0, 1.0], vec![2.0, -2.0]]);
        assert!(
            (h.point[0] - 1.0).abs() < 1e-7 && h.point[1].abs() < 1e-7,
            "{h:?}"
        );
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
    }

    proptest! {
        #[test]
        fn weights_are_convex_and_point_is_their_combination(
            pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..8)
        ) {
            let h = min_norm_point(&pts);
            let total: f64 = h.weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(h.weights.iter().all(|&w| w >= 0.0));
            let x = combine(&pts, &h.weights);
            for (a, b) in x.iter().zip(&h.point) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            // No sample point is closer to the origin than the hull point.
            for p in &pts {
                let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(h.norm <= n + 1e-6);
            }
        }
    }
}
