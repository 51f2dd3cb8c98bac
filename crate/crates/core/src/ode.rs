//! Steady states, stability and the ODE thresholds `h*` and `h**` of the
//! space-free system.
//!
//! Positive steady states are the roots in `(0,1)` of the cubic
//! `P_h(u) = (1-u)(1+Ehu)^2 - E(1+Ehu+E alpha u)`, equivalently the
//! intersections of the nullclines `f_h` and `g_h`. For each `u` in `(0,1)`
//! there is exactly one handling time `h(u)` making `u` a root; its minimum
//! over `u` is `h*`.

use serde::{Deserialize, Serialize};

use crate::error::{require_bistable_encounter, Error, Result};
use crate::kinetics::{
    eigenvalues, iso_f, iso_f_prime, iso_g, jacobian, rates, theta, trace_det, KineticsPoint, Params,
};
use crate::rk::{self, Tolerances};
use crate::roots::{bisect, golden_min, sign_changes};

/// Grid used to bracket roots of `P_h` and to seed the `h*` minimization.
pub const ROOT_SCAN_POINTS: usize = 4096;
const ROOT_TOL: f64 = 1e-12;
const MIN_TOL: f64 = 1e-10;
/// Below this distance `mu(h)` and `u*` are treated as coincident.
const DEGENERATE_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyKind {
    #[serde(rename = "trivial_00")]
    Trivial00,
    #[serde(rename = "trivial_10")]
    Trivial10,
    #[serde(rename = "control_01")]
    Control01,
    PositiveLow,
    PositiveHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Stability {
    Stable,
    Unstable,
    /// Stable iff the predator growth rate exceeds `r_crit`.
    Conditional { r_crit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub u: f64,
    pub v: f64,
    pub kind: SteadyKind,
    pub stability: Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeRegimeLabel {
    UnstableControl,
    Monostable,
    ConditionalBistable,
    Bistable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeRegime {
    pub label: OdeRegimeLabel,
    pub h_star: Option<f64>,
    pub h_star_star: Option<f64>,
}

fn params(e: f64, h: f64, alpha: f64, r: f64) -> Params {
    Params {
        encounter: e,
        handling: h,
        conversion: alpha,
        growth: r,
        diffusion: 1.0,
    }
}

/// `P_h(u)`; its roots in `(0,1)` are the prey levels of positive steady states.
pub fn steady_cubic(e: f64, h: f64, alpha: f64, u: f64) -> f64 {
    let s = 1.0 + e * h * u;
    (1.0 - u) * s * s - e * (s + e * alpha * u)
}

/// The handling time for which `u` is the prey level of a positive steady state.
pub fn h_of_u(e: f64, alpha: f64, u: f64) -> Result<f64> {
    require_bistable_encounter(e)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("h(u) requires u in (0,1), got {u}")));
    }
    let w = u * (1.0 - u);
    let radical = (1.0 + 4.0 * alpha * w).sqrt();
    Ok((0.5 * e * (1.0 + radical) + u - 1.0) / (e * w))
}

/// `h*(E, alpha)` and its argmin `u_crit`.
///
/// Below `h*` the ODE has no positive steady state, above it has two.
pub fn h_star(e: f64, alpha: f64) -> Result<(f64, f64)> {
    require_bistable_encounter(e)?;
    let n = ROOT_SCAN_POINTS;
    let step = 1.0 / (n + 1) as f64;
    let h = |u: f64| h_of_u(e, alpha, u).unwrap_or(f64::INFINITY);
    let (mut best_i, mut best) = (1, f64::INFINITY);
    for i in 1..=n {
        let val = h(i as f64 * step);
        if val < best {
            best = val;
            best_i = i;
        }
    }
    let lo = ((best_i - 1) as f64 * step).max(f64::EPSILON);
    let hi = ((best_i + 1) as f64 * step).min(1.0 - f64::EPSILON);
    let (u_crit, h_min) = golden_min(h, lo, hi, MIN_TOL);
    Ok((h_min.min(best), u_crit))
}

/// The cubic in `x = Eh` whose root in `(1, inf)` is `E h**`.
pub fn h_star_star_cubic(e: f64, alpha: f64, x: f64) -> f64 {
    (x + 1.0).powi(3) - 4.0 * e * (x * x + x * (e * alpha + 1.0) - e * alpha)
}

/// `h**(E, alpha)`: above it the upper positive state is stable for every `r`.
pub fn h_star_star(e: f64, alpha: f64) -> Result<f64> {
    require_bistable_encounter(e)?;
    let cubic = |x: f64| h_star_star_cubic(e, alpha, x);
    // cubic(1) = 8(1 - E) < 0; the largest root sits above 1.
    let mut hi = 2.0;
    while cubic(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Regime(format!("no root of the h** cubic for E = {e}, alpha = {alpha}")));
        }
    }
    let x = bisect(cubic, 1.0, hi, ROOT_TOL * hi)?;
    Ok(x / e)
}

/// Prey levels of positive steady states, by scanning `P_h` on `(0,1)`.
pub fn positive_roots(e: f64, h: f64, alpha: f64) -> Vec<f64> {
    scan_roots(|u| steady_cubic(e, h, alpha, u))
}

/// Same roots located from `f_h(u) = g_h(u)` instead of the cubic.
pub fn positive_roots_by_isoclines(e: f64, h: f64, alpha: f64) -> Vec<f64> {
    let p = params(e, h, alpha, 1.0);
    scan_roots(|u| iso_f(&p, u) - iso_g(&p, u))
}

fn scan_roots<F: Fn(f64) -> f64>(f: F) -> Vec<f64> {
    sign_changes(&f, 0.0, 1.0, ROOT_SCAN_POINTS)
        .into_iter()
        .filter_map(|(a, b)| if a == b { Some(a) } else { bisect(&f, a, b, ROOT_TOL).ok() })
        .collect()
}

/// `mu(h) = (Eh - 1)/(2Eh)`, the vertex of the prey nullcline.
pub fn nullcline_vertex(e: f64, h: f64) -> f64 {
    (e * h - 1.0) / (2.0 * e * h)
}

fn verdict_from_jacobian(p: &Params, pt: KineticsPoint) -> Stability {
    let ev = eigenvalues(&jacobian(p, pt));
    if ev.iter().all(|z| z.0 < 0.0) {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

fn upper_state_stability(p: &Params, u: f64, v: f64) -> Stability {
    let mu = nullcline_vertex(p.encounter, p.handling);
    if mu < u - DEGENERATE_GAP {
        Stability::Stable
    } else {
        Stability::Conditional {
            r_crit: theta(p, u) * iso_f_prime(p, u) / v,
        }
    }
}

/// All non-negative steady states with their stability verdicts.
///
/// At the fold `h = h*` the double root is reported twice (low and high at
/// the same `u`) so that positive states are always counted with multiplicity.
pub fn steady_states(e: f64, h: f64, alpha: f64, r: f64) -> Result<Vec<SteadyState>> {
    let p = Params::new(e, h, alpha, r, 1.0)?;
    let control = if e > 1.0 { Stability::Stable } else { Stability::Unstable };
    let mut out = vec![
        SteadyState {
            u: 0.0,
            v: 0.0,
            kind: SteadyKind::Trivial00,
            stability: Stability::Unstable,
        },
        SteadyState {
            u: 1.0,
            v: 0.0,
            kind: SteadyKind::Trivial10,
            stability: Stability::Unstable,
        },
        SteadyState {
            u: 0.0,
            v: 1.0,
            kind: SteadyKind::Control01,
            stability: control,
        },
    ];

    let mut roots = positive_roots(e, h, alpha);
    if roots.is_empty() && e > 1.0 {
        let (hs, u_crit) = h_star(e, alpha)?;
        if (h - hs).abs() <= 1e-9 * hs.max(1.0) {
            roots = vec![u_crit, u_crit];
        }
    }
    let n = roots.len();
    for (i, &u) in roots.iter().enumerate() {
        let v = iso_f(&p, u);
        let high = i + 1 == n;
        let kind = if high { SteadyKind::PositiveHigh } else { SteadyKind::PositiveLow };
        let stability = if e > 1.0 && n == 2 {
            if high {
                upper_state_stability(&p, u, v)
            } else {
                Stability::Unstable
            }
        } else {
            verdict_from_jacobian(&p, KineticsPoint { u, v })
        };
        out.push(SteadyState { u, v, kind, stability });
    }
    Ok(out)
}

/// The upper positive state `(u*, v*)`, if any.
pub fn upper_state(e: f64, h: f64, alpha: f64) -> Option<(f64, f64)> {
    let roots = positive_roots(e, h, alpha);
    let u = *roots.last()?;
    if e > 1.0 && roots.len() < 2 {
        return None;
    }
    Some((u, iso_f(&params(e, h, alpha, 1.0), u)))
}

/// The predator growth threshold below which `(u*, v*)` loses stability.
///
/// `Ok(None)` means `(u*, v*)` is stable for every `r` (`h >= h**`).
pub fn r_crit(e: f64, h: f64, alpha: f64) -> Result<Option<f64>> {
    require_bistable_encounter(e)?;
    let (u, v) = upper_state(e, h, alpha).ok_or_else(|| {
        Error::Regime(format!("no positive steady state at E = {e}, h = {h}, alpha = {alpha}"))
    })?;
    if h >= h_star_star(e, alpha)? {
        return Ok(None);
    }
    let p = params(e, h, alpha, 1.0);
    Ok(Some(theta(&p, u) * iso_f_prime(&p, u) / v))
}

/// Position of `h` relative to `h*` and `h**`.
pub fn ode_regime(e: f64, h: f64, alpha: f64) -> Result<OdeRegime> {
    if e <= 1.0 {
        return Ok(OdeRegime {
            label: OdeRegimeLabel::UnstableControl,
            h_star: None,
            h_star_star: None,
        });
    }
    let (hs, _) = h_star(e, alpha)?;
    let hss = h_star_star(e, alpha)?;
    let label = if h < hs {
        OdeRegimeLabel::Monostable
    } else if h > hss {
        OdeRegimeLabel::Bistable
    } else {
        OdeRegimeLabel::ConditionalBistable
    };
    Ok(OdeRegime {
        label,
        h_star: Some(hs),
        h_star_star: Some(hss),
    })
}

/// A trajectory of the space-free system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<KineticsPoint>,
    /// Final state when the vector field fell below [`ASYMPTOTE_RHS`].
    pub asymptote: Option<KineticsPoint>,
}

/// Vector field norm at which a trajectory is declared to have settled.
pub const ASYMPTOTE_RHS: f64 = 1e-8;

/// Integrates the space-free system from `(u0, v0)` up to `t_end`.
pub fn integrate_ode(p: &Params, u0: f64, v0: f64, t_end: f64) -> Result<Trajectory> {
    p.validate()?;
    if !(u0 > 0.0 && u0 <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "u0",
            value: u0,
            reason: "initial prey density must lie in (0, 1]",
        });
    }
    if !(v0 >= 1.0) || !v0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "v0",
            value: v0,
            reason: "initial predator density must be >= 1",
        });
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "integration horizon must be > 0",
        });
    }
    let mut settled = false;
    let sol = rk::integrate(
        |y: &[f64; 2]| {
            let (du, dv) = rates(p, y[0], y[1]);
            [du, dv]
        },
        [u0, v0],
        0.0,
        t_end,
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
            ..Default::default()
        },
        |_, _, dy| {
            settled = dy[0].abs().max(dy[1].abs()) < ASYMPTOTE_RHS;
            settled
        },
    )?;
    let states: Vec<KineticsPoint> = sol
        .states
        .iter()
        .map(|y| KineticsPoint {
            u: y[0].max(0.0),
            v: y[1].max(0.0),
        })
        .collect();
    let asymptote = if settled { states.last().copied() } else { None };
    Ok(Trajectory {
        times: sol.times,
        states,
        asymptote,
    })
}

/// Determinant of the Jacobian at a steady state (used by stability checks).
pub fn jacobian_det(p: &Params, u: f64, v: f64) -> f64 {
    trace_det(&jacobian(p, KineticsPoint { u, v })).1
}
