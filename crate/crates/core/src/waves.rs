//! Scalar bistable comparison equations and the PDE thresholds.
//!
//! Freezing the predator at a constant level `v_level` turns the prey
//! equation into the scalar bistable equation
//!
//! ```text
//! u_t = u_xx + u(1-u) - E v_level u / (1 + E h u)
//! ```
//!
//! With `v_level = 1` it bounds the prey from above (extinction threshold
//! `h-`), with `v_level = v_bar` from below (invasion threshold `h+`). The sign
//! of its front speed equals the sign of the potential `W` at the upper stable
//! state.

use serde::{Deserialize, Serialize};

use crate::error::{positive, require_bistable_encounter, Error, Result};
use crate::ode::{h_star, h_star_star};
use crate::roots::bisect;

/// Absolute tolerance on threshold handling times.
pub const THRESHOLD_TOL: f64 = 1e-10;
/// `|W|` at or below this value is reported as a zero wave speed.
pub const ZERO_SPEED_POTENTIAL: f64 = 1e-10;

/// `h1(E)`: below it the spatially homogeneous supersolution decays to zero.
pub fn h1(e: f64) -> Result<f64> {
    if !(e > 1.0) || !e.is_finite() {
        return Err(Error::Domain(format!("h1(E) requires E > 1, got E = {e}")));
    }
    Ok((2.0 * e - 1.0 + 2.0 * (e * (e - 1.0)).sqrt()) / e)
}

/// Unstable and stable positive roots `(u-, u+)` of the scalar reaction term.
pub fn u_pm(e: f64, h: f64) -> Result<(f64, f64)> {
    let threshold = h1(e)?;
    positive("h", h)?;
    let eh = e * h;
    let b = 1.0 - 1.0 / eh;
    let disc = b * b - 4.0 * (e - 1.0) / eh;
    if h < threshold && disc < 0.0 {
        return Err(Error::NoRealRoots { e, h, h1: threshold });
    }
    let s = disc.max(0.0).sqrt();
    Ok((0.5 * (b - s), 0.5 * (b + s)))
}

/// `W(E,h,u) = int_0^u [s(1-s) - E s/(1+Ehs)] ds` in closed form.
pub fn potential_w(e: f64, h: f64, u: f64) -> f64 {
    debug_assert!(h > 0.0 && u >= 0.0);
    u * u / 2.0 - u * u * u / 3.0 - u / h + (e * h * u).ln_1p() / (e * h * h)
}

/// `W` evaluated at the upper stable state `u+(E,h)`.
pub fn potential_at_upper(e: f64, h: f64) -> Result<f64> {
    let (_, up) = u_pm(e, h)?;
    Ok(potential_w(e, h, up))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedSign {
    /// Zero invades; the front retreats.
    Negative,
    Zero,
    /// The upper state invades; the front advances.
    Positive,
}

/// Direction of the bistable front of the scalar equation with `v_level = 1`.
pub fn wave_speed_sign(e: f64, h: f64) -> Result<SpeedSign> {
    let threshold = h1(e)?;
    if h <= threshold {
        return Err(Error::Regime(format!(
            "h = {h} <= h1(E) = {threshold}: the scalar equation is not bistable"
        )));
    }
    let w = potential_at_upper(e, h)?;
    Ok(if w.abs() <= ZERO_SPEED_POTENTIAL {
        SpeedSign::Zero
    } else if w > 0.0 {
        SpeedSign::Positive
    } else {
        SpeedSign::Negative
    })
}

/// Root of `h -> W(E, h, u+(E,h))` on `(h1(E), inf)`.
pub fn h_minus(e: f64) -> Result<f64> {
    require_bistable_encounter(e).map_err(|_| Error::Domain(format!("h-(E) requires E > 1, got E = {e}")))?;
    let lo_edge = h1(e)?;
    let f = |h: f64| potential_at_upper(e, h).unwrap_or(f64::NAN);
    let mut lo = lo_edge + 1e-9;
    if !(f(lo) < 0.0) {
        lo = lo_edge;
    }
    let hi = 16.0 / 3.0 + 1.0;
    bisect(f, lo, hi, THRESHOLD_TOL)
}

/// Uniform upper bound of the predator density.
pub fn v_bar(e: f64, h: f64, alpha: f64) -> f64 {
    1.0 + alpha * e / (1.0 + e * h)
}

/// `F(h) = h - v_bar h-(E v_bar)`, whose root is `h+`.
pub fn invasion_condition(e: f64, alpha: f64, h: f64) -> Result<f64> {
    let vb = v_bar(e, h, alpha);
    Ok(h - vb * h_minus(e * vb)?)
}

/// Root of [`invasion_condition`]: above it the subsolution invades.
pub fn h_plus(e: f64, alpha: f64) -> Result<f64> {
    require_bistable_encounter(e).map_err(|_| Error::Domain(format!("h+(E, alpha) requires E > 1, got E = {e}")))?;
    let lo = h_minus(e)?;
    let f = |h: f64| invasion_condition(e, alpha, h).unwrap_or(f64::NAN);
    if f(lo) >= 0.0 {
        return Ok(lo);
    }
    let mut hi = 2.0 * lo;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Regime(format!("h+ bracket diverged for E = {e}, alpha = {alpha}")));
        }
    }
    bisect(f, lo, hi, THRESHOLD_TOL)
}

/// Scalar comparison equation with the predator frozen at `v_level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarBistable {
    pub e_eff: f64,
    pub h_eff: f64,
    pub v_level: f64,
}

impl ScalarBistable {
    pub fn new(e: f64, h: f64, v_level: f64) -> Result<Self> {
        positive("E", e)?;
        positive("h", h)?;
        if !(v_level >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "v_level",
                value: v_level,
                reason: "frozen predator level must be >= 1",
            });
        }
        Ok(ScalarBistable {
            e_eff: e * v_level,
            h_eff: h / v_level,
            v_level,
        })
    }

    /// Reaction term `u(1-u) - E_eff u/(1 + E_eff h_eff u)`.
    #[inline]
    pub fn reaction(&self, u: f64) -> f64 {
        u * (1.0 - u) - self.e_eff * u / (1.0 + self.e_eff * self.h_eff * u)
    }

    pub fn is_bistable(&self) -> bool {
        h1(self.e_eff).map(|t| self.h_eff > t).unwrap_or(false)
    }

    pub fn upper_state(&self) -> Result<f64> {
        Ok(u_pm(self.e_eff, self.h_eff)?.1)
    }

    pub fn speed_sign(&self) -> Result<SpeedSign> {
        wave_speed_sign(self.e_eff, self.h_eff)
    }
}

/// All threshold curves at one `(E, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    #[serde(rename = "E")]
    pub e: f64,
    pub alpha: f64,
    pub h1: f64,
    pub h_star: f64,
    pub u_crit: f64,
    pub h_star_star: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    /// `(max(h*, h-), h+)` when nonempty.
    pub zone_i: Option<(f64, f64)>,
    /// `(h-, h*)` when nonempty.
    pub zone_ii: Option<(f64, f64)>,
}

impl ThresholdSet {
    /// Handling-time zone of `h` at this `(E, alpha)`.
    pub fn zone(&self, h: f64) -> Zone {
        if h < self.h1 {
            Zone::UniformExtinction
        } else if h < self.h_minus {
            Zone::Extinction
        } else if h < self.h_plus {
            if h > self.h_star {
                Zone::TransitionI
            } else {
                Zone::TransitionII
            }
        } else {
            Zone::Invasion
        }
    }
}

/// Analytic zone of a point of the `(E, h)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    UnstableControl,
    UniformExtinction,
    Extinction,
    #[serde(rename = "transition_I")]
    TransitionI,
    #[serde(rename = "transition_II")]
    TransitionII,
    Invasion,
}

impl Zone {
    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::UnstableControl => "unstable_control",
            Zone::UniformExtinction => "uniform_extinction",
            Zone::Extinction => "extinction",
            Zone::TransitionI => "transition_I",
            Zone::TransitionII => "transition_II",
            Zone::Invasion => "invasion",
        }
    }

    pub fn parse(s: &str) -> Option<Zone> {
        [
            Zone::UnstableControl,
            Zone::UniformExtinction,
            Zone::Extinction,
            Zone::TransitionI,
            Zone::TransitionII,
            Zone::Invasion,
        ]
        .into_iter()
        .find(|z| z.as_str() == s)
    }

    pub fn is_transition(&self) -> bool {
        matches!(self, Zone::TransitionI | Zone::TransitionII)
    }
}

pub fn threshold_set(e: f64, alpha: f64) -> Result<ThresholdSet> {
    require_bistable_encounter(e)?;
    crate::error::non_negative("alpha", alpha)?;
    let (hs, u_crit) = h_star(e, alpha)?;
    let hm = h_minus(e)?;
    let hp = h_plus(e, alpha)?;
    let lower_i = hs.max(hm);
    Ok(ThresholdSet {
        e,
        alpha,
        h1: h1(e)?,
        h_star: hs,
        u_crit,
        h_star_star: h_star_star(e, alpha)?,
        h_minus: hm,
        h_plus: hp,
        zone_i: (lower_i < hp).then_some((lower_i, hp)),
        zone_ii: (hm < hs).then_some((hm, hs)),
    })
}

/// Zone of `(E, h)`; `E <= 1` is always [`Zone::UnstableControl`].
pub fn zone_of(e: f64, h: f64, alpha: f64) -> Result<(Zone, Option<ThresholdSet>)> {
    if e <= 1.0 {
        return Ok((Zone::UnstableControl, None));
    }
    let t = threshold_set(e, alpha)?;
    Ok((t.zone(h), Some(t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson quadrature of the scalar reaction term.
    fn w_quadrature(e: f64, h: f64, u: f64) -> f64 {
        let n = 20_000;
        let step = u / n as f64;
        let g = |s: f64| s * (1.0 - s) - e * s / (1.0 + e * h * s);
        let mut acc = g(0.0) + g(u);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * step);
        }
        acc * step / 3.0
    }

    #[test]
    fn h1_values() {
        assert!((h1(1.0 + 1e-12).unwrap() - 1.0).abs() < 1e-5);
        assert!((h1(2.0).unwrap() - (3.0 + 2.0 * 2f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((h1(1e6).unwrap() - 4.0).abs() < 1e-2);
        assert!(matches!(h1(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn u_pm_exact_case() {
        let (lo, hi) = u_pm(2.0, 3.0).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-14 && (hi - 0.5).abs() < 1e-14);
        let poly = |u: f64| -6.0 * u * u + 5.0 * u - 1.0;
        assert!(poly(lo).abs() < 1e-14 && poly(hi).abs() < 1e-14);
    }

    #[test]
    fn u_pm_double_root_and_large_h() {
        let e = 3.0;
        let t = h1(e).unwrap();
        let (lo, hi) = u_pm(e, t).unwrap();
        assert!((hi - lo).abs() < 1e-6);
        assert!((lo - 0.5 * (1.0 - 1.0 / (e * t))).abs() < 1e-6);
        assert!(u_pm(e, 1e9).unwrap().1 > 0.999);
        assert!(matches!(u_pm(e, 0.9 * t), Err(Error::NoRealRoots { .. })));
    }

    #[test]
    fn potential_values_and_quadrature() {
        assert_eq!(potential_w(2.0, 3.0, 0.0), 0.0);
        let w = potential_w(2.0, 3.0, 0.5);
        let hand = 1.0 / 8.0 - 1.0 / 24.0 - 1.0 / 6.0 + 4f64.ln() / 18.0;
        assert!((w - hand).abs() < 1e-15);
        assert!((w - (-0.0063)).abs() < 1e-4, "{w}");
        assert!((w - w_quadrature(2.0, 3.0, 0.5)).abs() < 1e-12);

        let up = u_pm(2.0, 4.0).unwrap().1;
        assert!((up - 0.695).abs() < 1e-3, "{up}");
        let w = potential_w(2.0, 4.0, up);
        assert!((w - 0.015).abs() < 1e-3, "{w}");
        assert!((w - w_quadrature(2.0, 4.0, up)).abs() < 1e-12);
    }

    #[test]
    fn speed_signs() {
        assert_eq!(wave_speed_sign(2.0, 3.0).unwrap(), SpeedSign::Negative);
        assert_eq!(wave_speed_sign(2.0, 4.0).unwrap(), SpeedSign::Positive);
        let hm = h_minus(2.0).unwrap();
        assert_eq!(wave_speed_sign(2.0, hm).unwrap(), SpeedSign::Zero);
        let t = h1(2.0).unwrap();
        assert!(matches!(wave_speed_sign(2.0, t), Err(Error::Regime(_))));
    }

    #[test]
    fn h_minus_bracket() {
        let hm = h_minus(2.0).unwrap();
        assert!(hm > 3.25 && hm < 3.35, "{hm}");
        assert!(matches!(h_minus(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn v_bar_values() {
        assert_eq!(v_bar(2.0, 5.0, 0.0), 1.0);
        assert!((v_bar(2.0, 5.0, 4.0) - (1.0 + 8.0 / 11.0)).abs() < 1e-15);
        assert!(v_bar(2.0, 5.0, 4.0) > v_bar(2.0, 6.0, 4.0));
    }

    #[test]
    fn h_plus_degenerates_without_conversion() {
        for &e in &[1.5, 2.0, 10.0] {
            assert!((h_plus(e, 0.0).unwrap() - h_minus(e).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn scalar_bistable_substitution() {
        let sb = ScalarBistable::new(2.0, 5.0, 1.5).unwrap();
        assert_eq!(sb.e_eff, 3.0);
        assert!((sb.h_eff - 5.0 / 1.5).abs() < 1e-15);
        // identical reaction to the frozen-predator prey equation
        let u = 0.4;
        let direct = u * (1.0 - u) - 2.0 * u * 1.5 / (1.0 + 2.0 * 5.0 * u);
        assert!((sb.reaction(u) - direct).abs() < 1e-15);
        assert!(ScalarBistable::new(2.0, 5.0, 0.5).is_err());
    }

    #[test]
    fn threshold_set_zones() {
        let t = threshold_set(2.0, 4.0).unwrap();
        assert!(t.h_minus < t.h_star && t.h_star < t.h_plus);
        assert!(t.zone_i.is_some() && t.zone_ii.is_some());
        assert_eq!(t.zone(5.35), Zone::TransitionII);
        assert_eq!(t.zone(5.6), Zone::TransitionI);
        assert_eq!(t.zone(2.5), Zone::UniformExtinction);
        assert_eq!(t.zone(3.0), Zone::Extinction);
        assert_eq!(t.zone(7.0), Zone::Invasion);

        let t0 = threshold_set(2.0, 0.0).unwrap();
        assert!(t0.zone_i.is_none());
        assert!(t0.zone_ii.is_none());
        assert!((t0.h_star - t0.h1).abs() < 1e-9);

        for &e in &[1.2, 2.0, 10.0, 80.0] {
            let t = threshold_set(e, 20.0).unwrap();
            assert!(t.zone_ii.is_some(), "E = {e}");
        }
        assert!(matches!(threshold_set(0.5, 1.0), Err(Error::Regime(_))));
    }

    #[test]
    fn zone_names_round_trip() {
        for z in [
            Zone::UnstableControl,
            Zone::UniformExtinction,
            Zone::Extinction,
            Zone::TransitionI,
            Zone::TransitionII,
            Zone::Invasion,
        ] {
            assert_eq!(Zone::parse(z.as_str()), Some(z));
            let json = serde_json::to_string(&z).unwrap();
            assert_eq!(json, format!("\"{}\"", z.as_str()));
        }
    }

    #[test]
    fn limits_at_extreme_encounter_rates() {
        assert!((h_minus(1.0 + 1e-6).unwrap() - 1.0).abs() < 1e-2);
        assert!((h_minus(1e6).unwrap() - 16.0 / 3.0).abs() < 1e-2);
        assert!((h_plus(1e6, 4.0).unwrap() - 8.0).abs() < 1e-2);
    }

    #[test]
    fn potential_is_negative_at_h1() {
        for i in 0..200 {
            let e = 1.0 + 1e-3 + 99.0 * i as f64 / 199.0;
            let t = h1(e).unwrap();
            let (_, up) = u_pm(e, t).unwrap();
            assert!(potential_w(e, t, up) < 0.0, "E = {e}");
        }
    }

    #[test]
    fn potential_increases_with_handling_time() {
        for &e in &[1.05, 2.0, 7.0, 50.0] {
            let t = h1(e).unwrap();
            let mut prev = f64::NEG_INFINITY;
            let mut h = t + 0.01;
            while h < t + 6.0 {
                let w = potential_at_upper(e, h).unwrap();
                assert!(w > prev, "E = {e}, h = {h}");
                prev = w;
                h += 0.01;
            }
        }
    }

    #[test]
    fn h_plus_increases_with_conversion() {
        let mut prev = h_plus(2.0, 0.0).unwrap();
        for alpha in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let hp = h_plus(2.0, alpha).unwrap();
            assert!(hp > prev);
            prev = hp;
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn steady_states_are_critical_points_of_w(e in 1.01f64..50.0, dh in 0.01f64..10.0) {
            let h = h1(e).unwrap() + dh;
            let (lo, hi) = u_pm(e, h).unwrap();
            let step = 1e-5;
            for u in [lo, hi] {
                let fd = (potential_w(e, h, u + step) - potential_w(e, h, u - step)) / (2.0 * step);
                proptest::prop_assert!(fd.abs() < 1e-7, "u = {u}: {fd}");
            }
            proptest::prop_assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
        }

        #[test]
        fn thresholds_are_ordered(e in 1.01f64..60.0, alpha in 0.01f64..20.0) {
            let t = threshold_set(e, alpha).unwrap();
            proptest::prop_assert!(t.h1 < t.h_minus, "{t:?}");
            proptest::prop_assert!(t.h_minus < t.h_plus, "{t:?}");
            proptest::prop_assert!(t.h_star < t.h_plus, "{t:?}");
            proptest::prop_assert!(t.h_star <= t.h_star_star + 1e-9, "{t:?}");
        }

        #[test]
        fn thresholds_increase_with_encounter_rate(e in 1.01f64..60.0, factor in 1.01f64..3.0, alpha in 0.0f64..10.0) {
            let e2 = e * factor;
            proptest::prop_assert!(h_minus(e2).unwrap() > h_minus(e).unwrap());
            proptest::prop_assert!(h_plus(e2, alpha).unwrap() > h_plus(e, alpha).unwrap());
        }
    }
}
