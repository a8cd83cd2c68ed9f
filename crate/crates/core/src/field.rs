//! Coefficient fields α, V, K over R^n and the boxes they are scanned on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::radial::FrozenCoefficients;

/// Axis-aligned box [lo₁, hi₁] × … × [loₙ, hiₙ].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput(
                "box bounds must have equal, nonzero length".into(),
            ));
        }
        if let Some(i) =
            (0..lo.len()).find(|&i| !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "box axis {} has lo = {} not below hi = {}",
                i + 1,
                lo[i],
                hi[i]
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The cube [−h, h]^n.
    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; n], vec![half_width; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Node spacing per axis for `grid_n` nodes.
    pub fn spacing(&self, grid_n: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|i| (self.hi[i] - self.lo[i]) / (grid_n - 1) as f64)
            .collect()
    }

    /// Coordinates of the node with multi-index `idx`.
    pub fn node(&self, grid_n: usize, idx: &[usize]) -> Vec<f64> {
        let h = self.spacing(grid_n);
        idx.iter()
            .enumerate()
            .map(|(i, &k)| {
                if k + 1 == grid_n {
                    self.hi[i]
                } else {
                    self.lo[i] + k as f64 * h[i]
                }
            })
            .collect()
    }

    /// Multi-indices of a `grid_n`^n tensor grid in lexicographic order (the
    /// first axis varies slowest).
    pub fn indices(&self, grid_n: usize) -> Vec<Vec<usize>> {
        let n = self.dim();
        let total = grid_n.pow(n as u32);
        (0..total)
            .map(|mut flat| {
                let mut idx = vec![0; n];
                for slot in idx.iter_mut().rev() {
                    *slot = flat % grid_n;
                    flat /= grid_n;
                }
                idx
            })
            .collect()
    }

    /// Flat position of a multi-index in [`BoxDomain::indices`] order.
    pub fn flat(grid_n: usize, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * grid_n + k)
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter()
            .enumerate()
            .all(|(i, &x)| x >= self.lo[i] && x <= self.hi[i])
    }
}

/// Lowest sampled coefficient values on a box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityCertificate {
    pub domain: BoxDomain,
    pub samples_per_axis: usize,
    pub floor: f64,
    pub min_alpha: f64,
    pub min_v: f64,
    pub min_k: f64,
}

/// Values and exact gradients of α, V, K at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEval {
    pub frozen: FrozenCoefficients,
    pub grad_alpha: Vec<f64>,
    pub grad_v: Vec<f64>,
    pub grad_k: Vec<f64>,
    /// Some expression crossed a kink (abs at 0, ...).
    pub nonsmooth: bool,
}

#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub alpha: Expr,
    pub v: Expr,
    pub k: Expr,
    pub n: usize,
    certificate: Option<PositivityCertificate>,
}

impl CoefficientField {
    pub fn new(alpha: Expr, v: Expr, k: Expr, n: usize) -> Result<Self> {
        for (name, e) in [("alpha", &alpha), ("V", &v), ("K", &k)] {
            if e.arity() > n {
                return Err(Error::InvalidInput(format!(
                    "{name} uses x{} but n = {n}",
                    e.arity()
                )));
            }
        }
        Ok(Self {
            alpha,
            v,
            k,
            n,
            certificate: None,
        })
    }

    pub fn parse(alpha: &str, v: &str, k: &str, n: usize) -> Result<Self> {
        Self::new(parse(alpha, n)?, parse(v, n)?, parse(k, n)?, n)
    }

    pub fn constant(a: f64, v: f64, k: f64, n: usize) -> Self {
        Self {
            alpha: Expr::Num(a),
            v: Expr::Num(v),
            k: Expr::Num(k),
            n,
            certificate: None,
        }
    }

    /// All three coefficients are variable-free.
    pub fn is_constant(&self) -> bool {
        [&self.alpha, &self.v, &self.k]
            .iter()
            .all(|e| e.constant_value().is_some())
    }

    pub fn certificate(&self) -> Option<&PositivityCertificate> {
        self.certificate.as_ref()
    }

    /// Values and gradients at `z`; rejects nonpositive coefficients.
    pub fn eval(&self, z: &[f64]) -> Result<FieldEval> {
        if z.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, field dimension is {}",
                z.len(),
                self.n
            )));
        }
        let ea = self.alpha.eval_with_gradient(z)?;
        let ev = self.v.eval_with_gradient(z)?;
        let ek = self.k.eval_with_gradient(z)?;
        for (name, value) in [("alpha", ea.value), ("V", ev.value), ("K", ek.value)] {
            if !(value > 0.0) {
                return Err(Error::NonPositiveCoefficient {
                    name,
                    at: z.to_vec(),
                    value,
                });
            }
        }
        Ok(FieldEval {
            frozen: FrozenCoefficients {
                a: ea.value,
                v: ev.value,
                k: ek.value,
            },
            nonsmooth: ea.nonsmooth || ev.nonsmooth || ek.nonsmooth,
            grad_alpha: ea.gradient,
            grad_v: ev.gradient,
            grad_k: ek.gradient,
        })
    }

    /// Samples α, V, K on a `per_axis`^n grid of `domain`: α and V must
    /// reach `floor`, K must stay positive.
    pub fn certify_positive(
        &mut self,
        domain: &BoxDomain,
        floor: f64,
        per_axis: usize,
    ) -> Result<&PositivityCertificate> {
        if domain.dim() != self.n {
            return Err(Error::InvalidInput(
                "box dimension differs from field dimension".into(),
            ));
        }
        let per_axis = per_axis.max(2);
        let (mut min_alpha, mut min_v, mut min_k) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for idx in domain.indices(per_axis) {
            let z = domain.node(per_axis, &idx);
            let a = self.alpha.eval(&z)?;
            let v = self.v.eval(&z)?;
            let k = self.k.eval(&z)?;
            for (name, value, bound) in [("alpha", a, floor), ("V", v, floor)] {
                if !(value >= bound) || !(value > 0.0) {
                    return Err(Error::NonPositiveCoefficient { name, at: z, value });
                }
            }
            if !(k > 0.0) {
                return Err(Error::NonPositiveCoefficient {
                    name: "K",
                    at: z,
                    value: k,
                });
            }
            min_alpha = min_alpha.min(a);
            min_v = min_v.min(v);
            min_k = min_k.min(k);
        }
        self.certificate = Some(PositivityCertificate {
            domain: domain.clone(),
            samples_per_axis: per_axis,
            floor,
            min_alpha,
            min_v,
            min_k,
        });
        Ok(self.certificate.as_ref().expect("just set"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_grid() {
        let b = BoxDomain::cube(2, 1.0).unwrap();
        let idx = b.indices(3);
        assert_eq!(idx.len(), 9);
        assert_eq!(idx[1], vec![0, 1]);
        assert_eq!(idx[3], vec![1, 0]);
        assert_eq!(b.node(3, &[2, 1]), vec![1.0, 0.0]);
        for (flat, i) in idx.iter().enumerate() {
            assert_eq!(BoxDomain::flat(3, i), flat);
        }
        assert!(BoxDomain::new(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn evaluation_and_rejection() {
        let f = CoefficientField::parse("1", "1 + x1^2", "2 - x2", 3).unwrap();
        let e = f.eval(&[1.0, 0.5, 0.0]).unwrap();
        assert_eq!(e.frozen.v, 2.0);
        assert_eq!(e.grad_v, vec![2.0, 0.0, 0.0]);
        assert_eq!(e.grad_k, vec![0.0, -1.0, 0.0]);
        assert!(matches!(
            f.eval(&[0.0, 3.0, 0.0]),
            Err(Error::NonPositiveCoefficient { name: "K", .. })
        ));
        assert!(CoefficientField::parse("1", "x4", "1", 3).is_err());
    }

    #[test]
    fn positivity_certificate() {
        let mut f = CoefficientField::parse("1", "0.5 + x1^2", "1", 2).unwrap();
        let b = BoxDomain::cube(2, 1.0).unwrap();
        let cert = f.certify_positive(&b, 0.1, 5).unwrap();
        assert_eq!(cert.min_v, 0.5);
        assert!(f.certify_positive(&b, 0.6, 5).is_err());
    }
}
