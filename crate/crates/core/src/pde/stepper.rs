use serde::{Deserialize, Serialize};

use super::{Field, Scheme, SimConfig};
use crate::error::{Error, Result};
use crate::kinetics::{rates, Params};
use crate::waves::ScalarBistable;

/// Undershoots down to this value are clamped to zero; anything lower is an error.
pub const CLAMP_WINDOW: f64 = -1e-12;

/// Reaction terms driven by a [`Stepper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kinetics {
    /// The full prey/predator system.
    Coupled(Params),
    /// Prey only, with the predator frozen at `v_level`.
    Scalar(ScalarBistable),
    /// No reaction: prey diffuses with coefficient 1, predator with `diffusion`.
    Inert { diffusion: f64 },
}

impl Kinetics {
    pub fn predator_diffusion(&self) -> f64 {
        match self {
            Kinetics::Coupled(p) => p.diffusion,
            Kinetics::Scalar(_) => 0.0,
            Kinetics::Inert { diffusion } => *diffusion,
        }
    }

    #[inline]
    fn reaction(&self, u: f64, v: f64) -> (f64, f64) {
        match self {
            Kinetics::Coupled(p) => rates(p, u, v),
            Kinetics::Scalar(sb) => (sb.reaction(u), 0.0),
            Kinetics::Inert { .. } => (0.0, 0.0),
        }
    }
}

/// Extremes observed over every step, before clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            min_u: f64::INFINITY,
            max_u: f64::NEG_INFINITY,
            min_v: f64::INFINITY,
            max_v: f64::NEG_INFINITY,
        }
    }
}

/// Pre-factored backward-Euler matrix `I - a L` with mirrored-ghost boundaries.
#[derive(Debug, Clone)]
struct ImplicitDiffusion {
    sub: Vec<f64>,
    sup: Vec<f64>,
    inv: Vec<f64>,
}

impl ImplicitDiffusion {
    fn new(n: usize, a: f64) -> Self {
        let mut sub = vec![-a; n];
        let mut sup = vec![-a; n];
        sub[0] = 0.0;
        sub[n - 1] = -2.0 * a;
        sup[0] = -2.0 * a;
        sup[n - 1] = 0.0;
        let diag = 1.0 + 2.0 * a;
        let mut inv = vec![0.0; n];
        let mut c_prev = 0.0;
        for i in 0..n {
            let m = 1.0 / (diag - sub[i] * c_prev);
            inv[i] = m;
            c_prev = sup[i] * m;
            sup[i] = c_prev;
        }
        ImplicitDiffusion { sub, sup, inv }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        let mut prev = 0.0;
        for i in 0..n {
            prev = (x[i] - self.sub[i] * prev) * self.inv[i];
            x[i] = prev;
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.sup[i] * x[i + 1];
        }
    }
}

/// Advances a [`Field`] by one time step.
#[derive(Debug, Clone)]
pub struct Stepper {
    kinetics: Kinetics,
    scheme: Scheme,
    dt: f64,
    inv_dx2: f64,
    implicit_u: Option<ImplicitDiffusion>,
    implicit_v: Option<ImplicitDiffusion>,
    scratch_u: Vec<f64>,
    scratch_v: Vec<f64>,
    bounds: Bounds,
}

impl Stepper {
    pub fn new(kinetics: Kinetics, cfg: &SimConfig) -> Result<Self> {
        let dv = kinetics.predator_diffusion();
        cfg.validate(dv)?;
        let n = cfg.grid.nx;
        let dx = cfg.grid.dx();
        let (implicit_u, implicit_v) = match cfg.scheme {
            Scheme::Explicit => (None, None),
            Scheme::Split => (
                Some(ImplicitDiffusion::new(n, cfg.dt / (dx * dx))),
                (dv > 0.0).then(|| ImplicitDiffusion::new(n, cfg.dt * dv / (dx * dx))),
            ),
        };
        Ok(Stepper {
            kinetics,
            scheme: cfg.scheme,
            dt: cfg.dt,
            inv_dx2: 1.0 / (dx * dx),
            implicit_u,
            implicit_v,
            scratch_u: vec![0.0; n],
            scratch_v: vec![0.0; n],
            bounds: Bounds::default(),
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Folds the values of `field` into the running [`Bounds`].
    pub fn observe(&mut self, field: &Field) {
        let b = &mut self.bounds;
        for (&u, &v) in field.u.iter().zip(&field.v) {
            b.min_u = b.min_u.min(u);
            b.max_u = b.max_u.max(u);
            b.min_v = b.min_v.min(v);
            b.max_v = b.max_v.max(v);
        }
    }

    /// One step of length `dt`. Does not touch `field.t`.
    pub fn step(&mut self, field: &mut Field) -> Result<()> {
        match self.scheme {
            Scheme::Explicit => self.explicit(field),
            Scheme::Split => self.split(field),
        }
        self.finish(field)
    }

    fn explicit(&mut self, field: &mut Field) {
        let n = field.u.len();
        let dv = self.kinetics.predator_diffusion();
        let (u, v) = (&field.u, &field.v);
        for i in 0..n {
            let (l, r) = neighbours(i, n);
            let lap_u = (u[l] - 2.0 * u[i] + u[r]) * self.inv_dx2;
            let lap_v = (v[l] - 2.0 * v[i] + v[r]) * self.inv_dx2;
            let (fu, fv) = self.kinetics.reaction(u[i], v[i]);
            self.scratch_u[i] = u[i] + self.dt * (lap_u + fu);
            self.scratch_v[i] = v[i] + self.dt * (dv * lap_v + fv);
        }
        std::mem::swap(&mut field.u, &mut self.scratch_u);
        std::mem::swap(&mut field.v, &mut self.scratch_v);
    }

    fn split(&mut self, field: &mut Field) {
        let dt = self.dt;
        let k = self.kinetics;
        if !matches!(k, Kinetics::Inert { .. }) {
            for (u, v) in field.u.iter_mut().zip(field.v.iter_mut()) {
                let (u0, v0) = (*u, *v);
                let (a1, b1) = k.reaction(u0, v0);
                let (a2, b2) = k.reaction(u0 + 0.5 * dt * a1, v0 + 0.5 * dt * b1);
                let (a3, b3) = k.reaction(u0 + 0.5 * dt * a2, v0 + 0.5 * dt * b2);
                let (a4, b4) = k.reaction(u0 + dt * a3, v0 + dt * b3);
                *u = u0 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
                *v = v0 + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            }
        }
        if let Some(m) = &self.implicit_u {
            m.solve(&mut field.u);
        }
        if let Some(m) = &self.implicit_v {
            m.solve(&mut field.v);
        }
    }

    fn finish(&mut self, field: &mut Field) -> Result<()> {
        let b = &mut self.bounds;
        for (i, (u, &v)) in field.u.iter_mut().zip(&field.v).enumerate() {
            if !u.is_finite() {
                return Err(Error::NumericalBlowup { t: field.t, node: i, value: *u });
            }
            if !v.is_finite() {
                return Err(Error::NumericalBlowup { t: field.t, node: i, value: v });
            }
            b.min_u = b.min_u.min(*u);
            b.max_u = b.max_u.max(*u);
            b.min_v = b.min_v.min(v);
            b.max_v = b.max_v.max(v);
            if *u < 0.0 {
                if *u < CLAMP_WINDOW {
                    return Err(Error::NegativeDensity { t: field.t, node: i, value: *u });
                }
                *u = 0.0;
            }
        }
        Ok(())
    }
}

/// Neighbour indices with mirrored ghosts (`u_{-1} = u_1`, `u_n = u_{n-2}`).
#[inline]
fn neighbours(i: usize, n: usize) -> (usize, usize) {
    let l = if i == 0 { 1 } else { i - 1 };
    let r = if i == n - 1 { n - 2 } else { i + 1 };
    (l, r)
}
