//! Adaptive Dormand–Prince 5(4) integrator for small autonomous systems.

use crate::error::{Error, Result};


const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights equal the last row of A (FSAL).
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_STAR: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-8,
            atol: 1e-10,
            max_steps: 2_000_000,
        }
    }
}

/// Accepted steps of an integration.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

/// Integrates `y' = f(y)` from `t0` to `t_end`, recording every accepted step.
///
/// `stop` is checked after each accepted step; returning `true` ends the
/// integration early at that step.
pub fn integrate<const N: usize, F, S>(
    f: F,
    y0: [f64; N],
    t0: f64,
    t_end: f64,
    tol: Tolerances,
    mut stop: S,
) -> Result<Solution<N>>
where
    F: Fn(&[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N], &[f64; N]) -> bool,
{
    if !(t_end > t0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "integration horizon must be > 0",
        });
    }
    let mut t = t0;
    let mut y = y0;
    let mut k = [[0.0; N]; 7];
    k[0] = f(&y);
    let mut sol = Solution {
        times: vec![t],
        states: vec![y],
    };
    if stop(t, &y, &k[0]) {
        return Ok(sol);
    }
    let mut h = initial_step(&y, &k[0], tol, t_end - t0);
    for _ in 0..tol.max_steps {
        if t >= t_end {
            return Ok(sol);
        }
        h = h.min(t_end - t);
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                *yi += h * acc;
            }
            k[s] = f(&ys);
        }
        let mut y_new = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += B[s] * k[s][i];
                lo += B_STAR[s] * k[s][i];
            }
            y_new[i] = y[i] + h * hi;
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            let e = h * (hi - lo) / scale;
            err += e * e;
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::NumericalBlowup {
                t,
                node: 0,
                value: err,
            });
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            // FSAL: the last stage is f(y_new).
            k[0] = k[6];
            sol.times.push(t);
            sol.states.push(y);
            if stop(t, &y, &k[0]) {
                return Ok(sol);
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::NumericalBlowup { t, node: 0, value: h });
        }
    }
    Err(Error::Config(format!(
        "step budget of {} exhausted at t = {t}",
        tol.max_steps
    )))
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], tol: Tolerances, span: f64) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12)
}
