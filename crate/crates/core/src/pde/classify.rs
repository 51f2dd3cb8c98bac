use serde::{Deserialize, Serialize};

use super::{Field, FrontObservation, Grid, SimConfig};
use crate::waves::ThresholdSet;

/// Spatial variance of `u` above which a stationary state counts as patterned.
pub const PATTERN_VARIANCE: f64 = 1e-4;
/// Ratio `max/min` of prey in the bulk that still counts as spatially uniform.
pub const UNIFORM_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    UniformExtinction,
    Extinction,
    Invasion,
    Undetermined,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::UniformExtinction => "uniform_extinction",
            Outcome::Extinction => "extinction",
            Outcome::Invasion => "invasion",
            Outcome::Undetermined => "undetermined",
        }
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        [
            Outcome::UniformExtinction,
            Outcome::Extinction,
            Outcome::Invasion,
            Outcome::Undetermined,
        ]
        .into_iter()
        .find(|o| o.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "ETW")]
    Etw,
    #[serde(rename = "ITW")]
    Itw,
    #[serde(rename = "pulse")]
    Pulse,
    #[serde(rename = "turing")]
    Turing,
    #[serde(rename = "uniform_decay")]
    UniformDecay,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Etw => "ETW",
            Regime::Itw => "ITW",
            Regime::Pulse => "pulse",
            Regime::Turing => "turing",
            Regime::UniformDecay => "uniform_decay",
            Regime::Undetermined => "undetermined",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        [
            Regime::Etw,
            Regime::Itw,
            Regime::Pulse,
            Regime::Turing,
            Regime::UniformDecay,
            Regime::Undetermined,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_u_final: f64,
    pub spatial_variance_final: f64,
    /// `max |f(t_end) - f(t_end - sample_interval)|`; absent for a single sample.
    pub temporal_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub outcome: Outcome,
    pub regime: Regime,
    pub front_speed: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Summary of one sampled field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub t: f64,
    pub max_u: f64,
    /// Position of the leftmost maximum of `u`.
    pub argmax_x: f64,
    pub variance_u: f64,
    /// Extremes of `u` on the bulk `[0, x0 - 0.1 L]` behind the initial front.
    pub bulk_max: f64,
    pub bulk_min: f64,
    /// Minimum of `u` on `[0, argmax_x - 20 dx]`, if that interval is nonempty.
    pub trail_min: Option<f64>,
    pub probes: [f64; 3],
    /// Rightmost down-crossing of the front level, anywhere on the grid.
    pub front: Option<f64>,
    /// Sup-distance to the previous sample.
    pub residual: f64,
}

/// Sampled statistics of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub grid: Grid,
    pub level: f64,
    pub extinction_eps: f64,
    pub bulk_edge: f64,
    pub probes: [usize; 3],
    pub samples: Vec<SampleStats>,
}

impl History {
    pub fn new(cfg: &SimConfig, level: f64) -> History {
        History {
            grid: cfg.grid,
            level,
            extinction_eps: cfg.extinction_eps,
            bulk_edge: cfg.front_start() - 0.1 * cfg.grid.length,
            probes: cfg.probe_nodes(),
            samples: Vec::new(),
        }
    }

    /// History of an arbitrary sequence of fields.
    pub fn from_fields(fields: &[Field], cfg: &SimConfig, level: f64) -> History {
        let mut h = History::new(cfg, level);
        let mut prev: Option<&Field> = None;
        for f in fields {
            let residual = prev.map_or(f64::INFINITY, |p| f.sup_distance(p));
            h.record(f, residual);
            prev = Some(f);
        }
        h
    }

    pub fn record(&mut self, field: &Field, residual: f64) -> &SampleStats {
        let dx = self.grid.dx();
        let u = &field.u;
        let n = u.len();
        let mut imax = 0;
        for i in 1..n {
            if u[i] > u[imax] {
                imax = i;
            }
        }
        let mean = u.iter().sum::<f64>() / n as f64;
        let variance_u = u.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let bulk_end = self.grid.node_at(self.bulk_edge.max(0.0));
        let bulk = &u[..=bulk_end];
        let trail_end = imax.checked_sub(20);
        let front = (0..n - 1).rev().find_map(|i| {
            (u[i] >= self.level && u[i + 1] < self.level)
                .then(|| self.grid.x(i) + dx * (u[i] - self.level) / (u[i] - u[i + 1]))
        });
        self.samples.push(SampleStats {
            t: field.t,
            max_u: u[imax],
            argmax_x: self.grid.x(imax),
            variance_u,
            bulk_max: bulk.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            bulk_min: bulk.iter().copied().fold(f64::INFINITY, f64::min),
            trail_min: trail_end.map(|e| u[..=e].iter().copied().fold(f64::INFINITY, f64::min)),
            probes: self.probes.map(|i| u[i]),
            front,
            residual,
        });
        self.samples.last().expect("just pushed")
    }

    /// Front positions restricted to `[0.1 L, 0.9 L]`.
    pub fn front_observation(&self) -> FrontObservation {
        let l = self.grid.length;
        let (times, positions) = self
            .samples
            .iter()
            .filter_map(|s| s.front.filter(|&x| x >= 0.1 * l && x <= 0.9 * l).map(|x| (s.t, x)))
            .unzip();
        FrontObservation::from_samples(times, positions)
    }

    fn decayed_uniformly(&self) -> bool {
        let eps = self.extinction_eps;
        self.samples.iter().filter(|s| s.bulk_max > eps).all(|s| {
            s.argmax_x <= self.bulk_edge && s.bulk_max < UNIFORM_RATIO * s.bulk_min
        })
    }

    /// The maximum translates monotonically by more than `20 dx` after the
    /// wake behind it has dropped below the extinction level.
    fn translated_pulse(&self) -> bool {
        let eps = self.extinction_eps;
        let dx = self.grid.dx();
        let Some(start) = self.samples.iter().position(|s| s.trail_min.is_some_and(|m| m < eps)) else {
            return false;
        };
        let alive: Vec<&SampleStats> = self.samples[start..].iter().filter(|s| s.max_u > 10.0 * eps).collect();
        let (Some(first), Some(last)) = (alive.first(), alive.last()) else {
            return false;
        };
        let monotone = alive.windows(2).all(|w| w[1].argmax_x >= w[0].argmax_x - 2.0 * dx);
        monotone && last.argmax_x - first.argmax_x > 20.0 * dx
    }

    /// Probes behind the last front all sit on the plateau.
    fn plateau_behind_front(&self) -> bool {
        let Some(last) = self.samples.last() else {
            return false;
        };
        let front = last.front.unwrap_or(f64::INFINITY);
        let behind: Vec<f64> = self
            .probes
            .iter()
            .zip(last.probes)
            .filter(|(&i, _)| self.grid.x(i) < front)
            .map(|(_, u)| u)
            .collect();
        !behind.is_empty() && behind.iter().all(|&u| u >= self.level)
    }
}

/// Decision tree from a sampled history to an outcome and a regime.
///
/// `h` and `thresholds` are used only to decide whether a stationary
/// heterogeneous state can be a Turing pattern (`h < h*`).
pub fn classify(history: &History, thresholds: Option<&ThresholdSet>, h: f64, cfg: &SimConfig) -> OutcomeReport {
    let front = history.front_observation();
    let speed = front.fitted_speed;
    let Some(last) = history.samples.last() else {
        return OutcomeReport {
            outcome: Outcome::Undetermined,
            regime: Regime::Undetermined,
            front_speed: None,
            diagnostics: Diagnostics {
                max_u_final: f64::NAN,
                spatial_variance_final: f64::NAN,
                temporal_residual: None,
            },
        };
    };
    let residual = (history.samples.len() > 1).then_some(last.residual);
    let diagnostics = Diagnostics {
        max_u_final: last.max_u,
        spatial_variance_final: last.variance_u,
        temporal_residual: residual,
    };
    let (outcome, regime) = if last.max_u < cfg.extinction_eps {
        if history.decayed_uniformly() {
            (Outcome::UniformExtinction, Regime::UniformDecay)
        } else if history.translated_pulse() {
            (Outcome::Extinction, Regime::Pulse)
        } else if speed.is_some_and(|c| c < 0.0) {
            (Outcome::Extinction, Regime::Etw)
        } else {
            (Outcome::Extinction, Regime::Undetermined)
        }
    } else if residual.is_some_and(|r| r < cfg.stationary_tol) {
        let below_h_star = thresholds.is_some_and(|t| h < t.h_star);
        if last.variance_u > PATTERN_VARIANCE && below_h_star {
            (Outcome::Invasion, Regime::Turing)
        } else if last.variance_u <= PATTERN_VARIANCE {
            (Outcome::Invasion, Regime::Undetermined)
        } else {
            (Outcome::Undetermined, Regime::Undetermined)
        }
    } else if speed.is_some_and(|c| c > 0.0) && history.plateau_behind_front() {
        (Outcome::Invasion, Regime::Itw)
    } else {
        (Outcome::Undetermined, Regime::Undetermined)
    };
    OutcomeReport {
        outcome,
        regime,
        front_speed: speed,
        diagnostics,
    }
}
