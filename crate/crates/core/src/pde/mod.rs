//! One-dimensional simulation of the prey/predator system and of the scalar
//! comparison equations on `[0, L]` with zero-flux boundaries.
//!
//! Fields are advanced by [`Stepper`], sampled at a fixed interval into a
//! [`History`] of per-sample statistics, and the history is classified into an
//! [`OutcomeReport`].

mod classify;
mod export;
mod stepper;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kinetics::Params;
use crate::ode::upper_state;
use crate::rk::{self, Tolerances};
use crate::waves::{threshold_set, u_pm, ScalarBistable, ThresholdSet};

pub use classify::{classify, Diagnostics, History, Outcome, OutcomeReport, Regime, SampleStats};
pub use export::{read_snapshot_csv, write_snapshot_csv, SnapshotRow};
pub use stepper::{Bounds, Kinetics, Stepper};

/// Uniform grid of `nx` nodes on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(rename = "L")]
    pub length: f64,
    pub nx: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            length: 400.0,
            nx: 4096,
        }
    }
}

impl Grid {
    pub fn new(length: f64, nx: usize) -> Result<Grid> {
        let g = Grid { length, nx };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::InvalidParameter {
                name: "L",
                value: self.length,
                reason: "domain length must be finite and > 0",
            });
        }
        if self.nx < 16 {
            return Err(Error::InvalidParameter {
                name: "nx",
                value: self.nx as f64,
                reason: "grid needs at least 16 nodes",
            });
        }
        Ok(())
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.length / (self.nx - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Nearest node to `x`, clamped to the grid.
    pub fn node_at(&self, x: f64) -> usize {
        ((x / self.dx()).round().max(0.0) as usize).min(self.nx - 1)
    }

    /// Trapezoid-rule integral of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.dx() * (inner + 0.5 * (values[0] + values[n - 1]))
    }
}

/// Time discretisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Forward Euler on reaction and diffusion together. Needs
    /// `dt <= dx^2 / (2 max(1, d))`.
    Explicit,
    /// Classical RK4 on the reaction, then backward Euler on the diffusion.
    #[default]
    Split,
}

/// Smoothed step `u0(x) = 1 / (1 + exp(k (x - x0)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    /// Front position; `None` means `L / 2`.
    pub x0: Option<f64>,
    /// Steepness; `f64::INFINITY` gives a sharp step.
    pub k: f64,
}

impl Default for InitialProfile {
    fn default() -> Self {
        InitialProfile { x0: None, k: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    /// Front detection level; `None` means half the expected plateau.
    pub front_level: Option<f64>,
    pub extinction_eps: f64,
    pub ic: InitialProfile,
    pub scheme: Scheme,
    /// Time between history samples. Also the lag of the temporal residual.
    pub sample_interval: f64,
    /// Residual below which the run is considered stationary.
    pub stationary_tol: f64,
    /// Times at which full fields are kept.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            grid: Grid::default(),
            dt: 0.02,
            t_end: 2000.0,
            front_level: None,
            extinction_eps: 1e-6,
            ic: InitialProfile::default(),
            scheme: Scheme::Split,
            sample_interval: 1.0,
            stationary_tol: 1e-7,
            snapshot_times: Vec::new(),
        }
    }
}

impl SimConfig {
    /// The coarser configuration used for parameter sweeps.
    pub fn sweep() -> Self {
        SimConfig {
            grid: Grid {
                length: 400.0,
                nx: 1024,
            },
            t_end: 800.0,
            ..SimConfig::default()
        }
    }

    pub fn front_start(&self) -> f64 {
        self.ic.x0.unwrap_or(0.5 * self.grid.length)
    }

    /// Largest stable explicit time step for predator diffusion `d`.
    pub fn cfl_limit(&self, d: f64) -> f64 {
        let dx = self.grid.dx();
        dx * dx / (2.0 * d.max(1.0))
    }

    pub fn validate(&self, d: f64) -> Result<()> {
        self.grid.validate()?;
        for (name, value) in [
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("extinction_eps", self.extinction_eps),
            ("sample_interval", self.sample_interval),
            ("stationary_tol", self.stationary_tol),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        if !(self.ic.k > 0.0) {
            return Err(Error::InvalidParameter {
                name: "k",
                value: self.ic.k,
                reason: "initial front steepness must be > 0",
            });
        }
        if let Some(level) = self.front_level {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::InvalidParameter {
                    name: "front_level",
                    value: level,
                    reason: "front level must lie in (0, 1)",
                });
            }
        }
        let x0 = self.front_start();
        let l = self.grid.length;
        if !(x0 >= 0.1 * l && x0 <= 0.9 * l) {
            return Err(Error::Config(format!(
                "initial front x0 = {x0} must lie in [0.1 L, 0.9 L] = [{}, {}]",
                0.1 * l,
                0.9 * l
            )));
        }
        if self.scheme == Scheme::Explicit && self.dt > self.cfl_limit(d) {
            return Err(Error::Config(format!(
                "explicit scheme needs dt <= dx^2 / (2 max(1, d)) = {}, got dt = {}",
                self.cfl_limit(d),
                self.dt
            )));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn steps_per_sample(&self) -> usize {
        ((self.sample_interval / self.dt).round() as usize).max(1)
    }

    /// Probe nodes at `0.25 L`, `0.5 L`, `0.75 L`.
    pub fn probe_nodes(&self) -> [usize; 3] {
        let l = self.grid.length;
        [0.25, 0.5, 0.75].map(|f| self.grid.node_at(f * l))
    }
}

/// Nodal prey and predator densities at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Field {
    pub fn uniform(nx: usize, u: f64, v: f64) -> Field {
        Field {
            t: 0.0,
            u: vec![u; nx],
            v: vec![v; nx],
        }
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_i max(|u_i - other.u_i|, |v_i - other.v_i|)`.
    pub fn sup_distance(&self, other: &Field) -> f64 {
        let du = self.u.iter().zip(&other.u).map(|(a, b)| (a - b).abs());
        let dv = self.v.iter().zip(&other.v).map(|(a, b)| (a - b).abs());
        du.chain(dv).fold(0.0, f64::max)
    }

    /// SHA-256 over the little-endian bytes of `t`, `u` and `v`, hex encoded.
    pub fn determinism_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.t.to_le_bytes());
        for x in self.u.iter().chain(&self.v) {
            hasher.update(x.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Initial data: smoothed step in `u`, `v = 1`.
pub fn init_field(cfg: &SimConfig) -> Result<Field> {
    cfg.validate(1.0)?;
    let x0 = cfg.front_start();
    let k = cfg.ic.k;
    let u = (0..cfg.grid.nx)
        .map(|i| {
            let s = cfg.grid.x(i) - x0;
            if k.is_infinite() {
                return if s < 0.0 {
                    1.0
                } else if s > 0.0 {
                    0.0
                } else {
                    0.5
                };
            }
            let z = k * s;
            if z > 0.0 {
                let e = (-z).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + z.exp())
            }
        })
        .collect();
    Ok(Field {
        t: 0.0,
        u,
        v: vec![1.0; cfg.grid.nx],
    })
}

/// Front positions and the fitted front speed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontObservation {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// Least-squares slope over the last half of the samples.
    pub fitted_speed: Option<f64>,
}

impl FrontObservation {
    pub fn from_samples(times: Vec<f64>, positions: Vec<f64>) -> Self {
        let fitted_speed = fit_speed(&times, &positions);
        FrontObservation {
            times,
            positions,
            fitted_speed,
        }
    }
}

fn fit_speed(times: &[f64], positions: &[f64]) -> Option<f64> {
    let n = times.len();
    let start = n / 2;
    let (t, x) = (&times[start..], &positions[start..]);
    if t.len() < 2 {
        return None;
    }
    let m = t.len() as f64;
    let t_mean = t.iter().sum::<f64>() / m;
    let x_mean = x.iter().sum::<f64>() / m;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (ti, xi) in t.iter().zip(x) {
        sxy += (ti - t_mean) * (xi - x_mean);
        sxx += (ti - t_mean) * (ti - t_mean);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Everything produced by a simulation.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub field: Field,
    pub front: FrontObservation,
    pub report: OutcomeReport,
    pub history: History,
    pub bounds: Bounds,
    pub snapshots: Vec<Field>,
}

/// Simulates the coupled system from [`init_field`] data and classifies the run.
pub fn run(p: &Params, cfg: &SimConfig) -> Result<RunOutput> {
    p.validate()?;
    cfg.validate(p.diffusion)?;
    let u_ref = match upper_state(p.encounter, p.handling, p.conversion) {
        Some((u, _)) => u,
        None => scalar_plateau(p.encounter, p.handling),
    };
    let thresholds = if p.encounter > 1.0 {
        Some(threshold_set(p.encounter, p.conversion)?)
    } else {
        None
    };
    let field = init_field(cfg)?;
    simulate(Kinetics::Coupled(*p), field, cfg, u_ref, thresholds.as_ref(), p.handling)
}

/// Simulates the scalar comparison equation and returns the full output.
pub fn scalar_simulate(sb: &ScalarBistable, cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate(1.0)?;
    let mut field = init_field(cfg)?;
    field.v.fill(sb.v_level);
    let u_ref = scalar_plateau(sb.e_eff, sb.h_eff);
    simulate(Kinetics::Scalar(*sb), field, cfg, u_ref, None, sb.h_eff)
}

/// Measured front of the scalar comparison equation.
pub fn scalar_run(sb: &ScalarBistable, cfg: &SimConfig) -> Result<FrontObservation> {
    if !sb.is_bistable() {
        return Err(Error::Regime(format!(
            "scalar equation with E = {}, h = {} is not bistable",
            sb.e_eff, sb.h_eff
        )));
    }
    Ok(scalar_simulate(sb, cfg)?.front)
}

fn scalar_plateau(e: f64, h: f64) -> f64 {
    u_pm(e, h).map(|(_, up)| up).unwrap_or(1.0)
}

/// Advances `field` with `kinetics` and classifies the sampled history.
pub fn simulate(
    kinetics: Kinetics,
    mut field: Field,
    cfg: &SimConfig,
    u_ref: f64,
    thresholds: Option<&ThresholdSet>,
    h: f64,
) -> Result<RunOutput> {
    cfg.validate(kinetics.predator_diffusion())?;
    if field.u.len() != cfg.grid.nx || field.v.len() != cfg.grid.nx {
        return Err(Error::Config(format!(
            "field has {} nodes, grid has {}",
            field.u.len(),
            cfg.grid.nx
        )));
    }
    let level = cfg.front_level.unwrap_or(0.5 * u_ref);
    let mut stepper = Stepper::new(kinetics, cfg)?;
    stepper.observe(&field);
    let mut history = History::new(cfg, level);
    history.record(&field, f64::INFINITY);
    let mut previous = field.clone();
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = cfg.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    while pending.last().is_some_and(|&s| s <= field.t) {
        pending.pop();
        snapshots.push(field.clone());
    }

    let total = cfg.total_steps();
    let per_sample = cfg.steps_per_sample();
    let eps = cfg.extinction_eps;
    let probes = cfg.probe_nodes();
    let t0 = field.t;
    for n in 1..=total {
        stepper.step(&mut field)?;
        field.t = t0 + n as f64 * cfg.dt;
        if n % per_sample != 0 && n != total {
            continue;
        }
        let residual = field.sup_distance(&previous);
        let stats = history.record(&field, residual).clone();
        while pending.last().is_some_and(|&s| s <= field.t) {
            pending.pop();
            snapshots.push(field.clone());
        }
        if stats.max_u < eps {
            break;
        }
        let beyond = stats.front.is_some_and(|x| x > 0.9 * cfg.grid.length);
        if beyond && probes.iter().all(|&i| field.u[i] > 10.0 * eps) {
            break;
        }
        if residual < cfg.stationary_tol {
            break;
        }
        previous.t = field.t;
        previous.u.copy_from_slice(&field.u);
        previous.v.copy_from_slice(&field.v);
    }
    let report = classify(&history, thresholds, h, cfg);
    Ok(RunOutput {
        front: history.front_observation(),
        field,
        report,
        history,
        bounds: stepper.bounds(),
        snapshots,
    })
}

/// Solution of `phi' = phi(1 - phi) - E phi / (1 + E h phi)`, `phi(0) = 1`,
/// at the requested increasing `times`.
///
/// With the predator at or above 1 the prey density satisfies
/// `max_x u(t) <= phi(t)`.
pub fn comparison_envelope(e: f64, h: f64, times: &[f64]) -> Result<Vec<f64>> {
    let f = |y: &[f64; 1]| {
        let u = y[0];
        [u * (1.0 - u) - e * u / (1.0 + e * h * u)]
    };
    let tol = Tolerances {
        rtol: 1e-11,
        atol: 1e-14,
        ..Default::default()
    };
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut y = [1.0];
    for &target in times {
        if target < t {
            return Err(Error::Config("envelope times must be increasing".into()));
        }
        if target > t {
            let sol = rk::integrate(f, y, t, target, tol, |_, _, _| false)?;
            y = *sol.states.last().expect("non-empty solution");
            t = target;
        }
        out.push(y[0]);
    }
    Ok(out)
}
