//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// How an [`Dopri5::advance`] call ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Halt {
    Reached,
    Stopped,
}

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

impl Dopri5 {
    /// Integrates `y' = rhs(t, y)` from `*t` towards `t_end` (either
    /// direction), updating `t`, `y` and the step-size hint `h` in place.
    ///
    /// `stop` is checked after every accepted step; when it fires the state
    /// is left at the end of that step.
    pub fn advance<const N: usize>(
        &self,
        rhs: &impl Fn(f64, &[f64; N]) -> [f64; N],
        t: &mut f64,
        y: &mut [f64; N],
        t_end: f64,
        h: &mut f64,
        stop: &impl Fn(f64, &[f64; N]) -> bool,
    ) -> Result<Halt> {
        let dir = if t_end >= *t { 1.0 } else { -1.0 };
        let span = (t_end - *t).abs();
        if span == 0.0 {
            return Ok(Halt::Reached);
        }
        if !(h.abs() > 0.0) || !h.is_finite() {
            *h = span.min(1e-3);
        }
        let h_min = 1e-14 * t.abs().max(t_end.abs()).max(1.0);
        let mut k = [[0.0; N]; 7];
        k[0] = rhs(*t, y);
        for _ in 0..self.max_steps {
            let remaining = (t_end - *t) * dir;
            if remaining <= h_min {
                *t = t_end;
                return Ok(Halt::Reached);
            }
            let hint = h.abs();
            let mut step = hint.min(remaining);
            let clamped = step < hint;
            let mut ytmp = [0.0; N];
            loop {
                let hs = dir * step;
                for s in 1..7 {
                    for i in 0..N {
                        let mut acc = y[i];
                        for (j, kj) in k.iter().enumerate().take(s) {
                            acc += hs * A[s][j] * kj[i];
                        }
                        ytmp[i] = acc;
                    }
                    k[s] = rhs(*t + C[s] * hs, &ytmp);
                }
                // ytmp now holds the fifth-order solution (row 6 of A).
                let mut err = 0.0;
                for i in 0..N {
                    let mut e = 0.0;
                    for (s, ks) in k.iter().enumerate() {
                        e += E[s] * ks[i];
                    }
                    let sc = self.atol + self.rtol * y[i].abs().max(ytmp[i].abs());
                    err += (hs * e / sc).powi(2);
                }
                let err = (err / N as f64).sqrt();
                if err.is_finite() && err <= 1.0 {
                    *t = if step == remaining { t_end } else { *t + hs };
                    *y = ytmp;
                    k[0] = k[6];
                    let grow = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    let mut next = step * grow;
                    if clamped && step == hint.min(remaining) {
                        // A step shortened only to land on t_end says nothing
                        // about the attainable size.
                        next = next.max(hint);
                    }
                    *h = dir * next;
                    break;
                }
                let shrink = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                step *= shrink;
                if step < h_min {
                    return Err(Error::SolverFailure(format!(
                        "step size underflow at t = {}",
                        *t
                    )));
                }
            }
            if stop(*t, y) {
                return Ok(Halt::Stopped);
            }
            if *t == t_end {
                return Ok(Halt::Reached);
            }
        }
        Err(Error::SolverFailure(format!(
            "step budget exhausted at t = {}",
            *t
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_forward_and_backward() {
        let solver = Dopri5::default();
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        let (mut t, mut y, mut h) = (0.0, [1.0], 0.0);
        let halt = solver
            .advance(&rhs, &mut t, &mut y, 5.0, &mut h, &|_, _| false)
            .unwrap();
        assert_eq!(halt, Halt::Reached);
        assert_eq!(t, 5.0);
        assert!((y[0] - (-5f64).exp()).abs() < 1e-13);

        let mut h = -0.1;
        solver
            .advance(&rhs, &mut t, &mut y, 0.0, &mut h, &|_, _| false)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_stops_on_event() {
        let solver = Dopri5::default();
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let (mut t, mut y, mut h) = (0.0, [1.0, 0.0], 0.0);
        let halt = solver
            .advance(&rhs, &mut t, &mut y, 10.0, &mut h, &|_, y| y[0] < 0.0)
            .unwrap();
        assert_eq!(halt, Halt::Stopped);
        assert!(t > std::f64::consts::FRAC_PI_2 && t < 2.0);
    }

    #[test]
    fn piecewise_advance_matches_single_sweep() {
        let solver = Dopri5::default();
        let rhs = |t: f64, y: &[f64; 2]| [y[1], -y[0] * (1.0 + 0.1 * t)];
        let (mut t, mut y, mut h) = (0.0, [1.0, 0.0], 0.0);
        solver
            .advance(&rhs, &mut t, &mut y, 3.0, &mut h, &|_, _| false)
            .unwrap();
        let (mut t2, mut y2, mut h2) = (0.0, [1.0, 0.0], 0.0);
        for i in 1..=300 {
            solver
                .advance(&rhs, &mut t2, &mut y2, i as f64 * 0.01, &mut h2, &|_, _| {
                    false
                })
                .unwrap();
        }
        assert!((y[0] - y2[0]).abs() < 1e-10);
    }
}
