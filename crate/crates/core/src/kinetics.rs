//! Dimensionless predator–prey kinetics.
//!
//! The reaction part of the model is
//!
//! ```text
//! du/dt = u(1-u) - E u v / (1 + E h u)
//! dv/dt = r ( v(1-v) + alpha E u v / (1 + E h u) )
//! ```
//!
//! where `u` is the invasive prey and `v` the generalist predator, both scaled
//! by their carrying capacities. Everything else in the crate evaluates these
//! functions, so they are kept allocation-free and branch-light.

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Result};

/// Parameters of the dimensional model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    /// Prey diffusion rate.
    pub prey_diffusion: f64,
    /// Predator diffusion rate.
    pub predator_diffusion: f64,
    /// Prey intrinsic growth rate.
    pub prey_growth: f64,
    /// Predator intrinsic growth rate on alternative food.
    pub predator_growth: f64,
    /// Prey carrying capacity.
    pub prey_capacity: f64,
    /// Predator carrying capacity in the absence of the focal prey.
    pub predator_capacity: f64,
    /// Encounter rate, 1/(density·time).
    pub encounter: f64,
    /// Handling time.
    pub handling: f64,
    /// Conversion efficiency of eaten prey into predators.
    pub conversion_efficiency: f64,
}

impl RawParams {
    pub fn validate(&self) -> Result<()> {
        positive("D_u", self.prey_diffusion)?;
        positive("D_v", self.predator_diffusion)?;
        positive("r1", self.prey_growth)?;
        positive("r2", self.predator_growth)?;
        positive("K1", self.prey_capacity)?;
        positive("K2", self.predator_capacity)?;
        positive("E_raw", self.encounter)?;
        positive("h_raw", self.handling)?;
        positive("gamma", self.conversion_efficiency)?;
        Ok(())
    }
}

/// Dimensionless parameter bundle `(E, h, alpha, r, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Encounter rate `E`.
    #[serde(rename = "E")]
    pub encounter: f64,
    /// Handling time `h`.
    #[serde(rename = "h")]
    pub handling: f64,
    /// Conversion rate `alpha`.
    #[serde(rename = "alpha")]
    pub conversion: f64,
    /// Predator growth rate relative to the prey, `r`.
    #[serde(rename = "r")]
    pub growth: f64,
    /// Predator diffusion relative to the prey, `d`.
    #[serde(rename = "d")]
    pub diffusion: f64,
}

impl Params {
    pub fn new(encounter: f64, handling: f64, conversion: f64, growth: f64, diffusion: f64) -> Result<Self> {
        let p = Params {
            encounter,
            handling,
            conversion,
            growth,
            diffusion,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("E", self.encounter)?;
        non_negative("h", self.handling)?;
        non_negative("alpha", self.conversion)?;
        positive("r", self.growth)?;
        positive("d", self.diffusion)?;
        Ok(())
    }
}

/// A prey/predator density pair. Both components are non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticsPoint {
    pub u: f64,
    pub v: f64,
}

impl KineticsPoint {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        non_negative("u", u)?;
        non_negative("v", v)?;
        Ok(KineticsPoint { u, v })
    }
}

/// Maps the dimensional model onto `(E, h, alpha, r, d)`.
pub fn nondimensionalize(raw: &RawParams) -> Result<Params> {
    raw.validate()?;
    let r = raw.predator_growth / raw.prey_growth;
    let conversion_scaled = raw.conversion_efficiency * raw.prey_capacity / raw.predator_capacity;
    Params::new(
        raw.encounter * raw.predator_capacity / raw.prey_growth,
        raw.prey_growth * raw.handling * raw.prey_capacity / raw.predator_capacity,
        conversion_scaled / r,
        r,
        raw.predator_diffusion / raw.prey_diffusion,
    )
}

/// Holling II predation per predator, `E u / (1 + E h u)`.
#[inline]
pub fn theta(p: &Params, u: f64) -> f64 {
    debug_assert!(u >= 0.0);
    let e = p.encounter;
    e * u / (1.0 + e * p.handling * u)
}

/// Prey nullcline `v = f_h(u) = (1-u)(1+Ehu)/E`.
#[inline]
pub fn iso_f(p: &Params, u: f64) -> f64 {
    debug_assert!(u >= 0.0);
    let e = p.encounter;
    (1.0 - u) * (1.0 + e * p.handling * u) / e
}

/// Predator nullcline `v = g_h(u) = 1 + alpha E u / (1+Ehu)`.
#[inline]
pub fn iso_g(p: &Params, u: f64) -> f64 {
    1.0 + p.conversion * theta(p, u)
}

/// `f_h'(u) = (Eh - 1 - 2Ehu)/E`.
#[inline]
pub fn iso_f_prime(p: &Params, u: f64) -> f64 {
    let eh = p.encounter * p.handling;
    (eh - 1.0 - 2.0 * eh * u) / p.encounter
}

/// `g_h'(u) = alpha E / (1+Ehu)^2`.
#[inline]
pub fn iso_g_prime(p: &Params, u: f64) -> f64 {
    let den = 1.0 + p.encounter * p.handling * u;
    p.conversion * p.encounter / (den * den)
}

/// Reaction terms without the non-negativity check. Used by the PDE hot loop.
#[inline]
pub(crate) fn rates(p: &Params, u: f64, v: f64) -> (f64, f64) {
    let predation = p.encounter * u * v / (1.0 + p.encounter * p.handling * u);
    let du = u * (1.0 - u) - predation;
    let dv = p.growth * (v * (1.0 - v) + p.conversion * predation);
    (du, dv)
}

/// Right-hand side of the space-free system at `pt`.
pub fn reaction_rhs(p: &Params, pt: KineticsPoint) -> (f64, f64) {
    rates(p, pt.u, pt.v)
}

/// Exact Jacobian of [`reaction_rhs`], row-major:
/// `[[d(du)/du, d(du)/dv], [d(dv)/du, d(dv)/dv]]`.
pub fn jacobian(p: &Params, pt: KineticsPoint) -> [[f64; 2]; 2] {
    let (e, h, a, r) = (p.encounter, p.handling, p.conversion, p.growth);
    let (u, v) = (pt.u, pt.v);
    let den = 1.0 + e * h * u;
    let dpred_du = e * v / (den * den);
    let dpred_dv = e * u / den;
    [
        [1.0 - 2.0 * u - dpred_du, -dpred_dv],
        [r * a * dpred_du, r * (1.0 - 2.0 * v + a * dpred_dv)],
    ]
}

/// Trace and determinant of a 2x2 matrix.
pub fn trace_det(m: &[[f64; 2]; 2]) -> (f64, f64) {
    (m[0][0] + m[1][1], m[0][0] * m[1][1] - m[0][1] * m[1][0])
}

/// Eigenvalues of a 2x2 matrix as `(re, im)` pairs.
pub fn eigenvalues(m: &[[f64; 2]; 2]) -> [(f64, f64); 2] {
    let (tr, det) = trace_det(m);
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [(tr / 2.0 - s, 0.0), (tr / 2.0 + s, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(tr / 2.0, -s), (tr / 2.0, s)]
    }
}
