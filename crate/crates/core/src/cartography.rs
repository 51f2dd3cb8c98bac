//! Handling-time thresholds from simulation and parameter-plane sweeps.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::kinetics::Params;
use crate::pde::{run, Outcome, OutcomeReport, Regime, SimConfig};
use crate::waves::{h_minus, h_plus, zone_of, ThresholdSet, Zone};

/// Number of points in the monotonicity pre-scan.
pub const PRESCAN_POINTS: usize = 9;
/// Bisection stops once the bracket is narrower than this.
pub const HCRIT_TOL: f64 = 1e-3;

/// Whether a run counts as invasion for the `h_crit` bisection.
///
/// Runs that end undetermined fall back to the sign of the front speed.
pub fn invades(report: &OutcomeReport) -> bool {
    match report.outcome {
        Outcome::Invasion => true,
        Outcome::Undetermined => report.front_speed.is_some_and(|c| c > 0.0),
        Outcome::Extinction | Outcome::UniformExtinction => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub h: f64,
    pub invades: bool,
    pub outcome: Outcome,
    pub regime: Regime,
    pub front_speed: Option<f64>,
}

/// Result of [`h_crit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcritReport {
    #[serde(rename = "E")]
    pub e: f64,
    pub alpha: f64,
    pub r: f64,
    pub d: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    /// `None` when the pre-scan is not monotone or never switches.
    pub h_crit: Option<f64>,
    /// Final bisection bracket `(extinction, invasion)`.
    pub bracket: Option<(f64, f64)>,
    pub monotone: bool,
    #[serde(default)]
    pub scan: Vec<ScanPoint>,
}

fn probe(p: Params, h: f64, cfg: &SimConfig) -> Result<ScanPoint> {
    let p = Params { handling: h, ..p };
    let report = run(&p, cfg)?.report;
    Ok(ScanPoint {
        h,
        invades: invades(&report),
        outcome: report.outcome,
        regime: report.regime,
        front_speed: report.front_speed,
    })
}

/// Simulated threshold separating extinction from invasion on `[h-, h+]`.
pub fn h_crit(e: f64, alpha: f64, r: f64, d: f64, cfg: &SimConfig) -> Result<HcritReport> {
    let hm = h_minus(e)?;
    let hp = h_plus(e, alpha)?;
    let base = Params::new(e, hm, alpha, r, d)?;
    let mut report = HcritReport {
        e,
        alpha,
        r,
        d,
        h_minus: hm,
        h_plus: hp,
        h_crit: None,
        bracket: None,
        monotone: true,
        scan: Vec::new(),
    };
    if hp - hm <= HCRIT_TOL {
        report.h_crit = Some(hm);
        return Ok(report);
    }
    let hs: Vec<f64> = (0..PRESCAN_POINTS)
        .map(|i| hm + (hp - hm) * i as f64 / (PRESCAN_POINTS - 1) as f64)
        .collect();
    report.scan = hs.par_iter().map(|&h| probe(base, h, cfg)).collect::<Result<_>>()?;

    let switches = report.scan.windows(2).filter(|w| w[0].invades != w[1].invades).count();
    let first = report.scan[0].invades;
    report.monotone = switches == 0 || (switches == 1 && !first);
    if switches != 1 || first {
        return Ok(report);
    }
    let k = report.scan.iter().position(|s| s.invades).expect("one switch");
    let (mut lo, mut hi) = (report.scan[k - 1].h, report.scan[k].h);
    while hi - lo > HCRIT_TOL {
        let mid = 0.5 * (lo + hi);
        if probe(base, mid, cfg)?.invades {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.bracket = Some((lo, hi));
    report.h_crit = Some(0.5 * (lo + hi));
    Ok(report)
}

/// Inclusive uniform range `lo, ..., hi` with `steps` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Range> {
        let r = Range { lo, hi, steps };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Config(format!(
                "range [{}, {}] must be finite and strictly increasing",
                self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(Error::Config(format!("range needs at least 2 steps, got {}", self.steps)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(rename = "E_range")]
    pub e_range: Range,
    pub h_range: Range,
    pub alpha: f64,
    pub r: f64,
    pub d: f64,
    pub sim: SimConfig,
    /// When set, cells on either side of a simulated extinction/invasion
    /// boundary are rerun with this configuration.
    pub refine: Option<SimConfig>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.e_range.validate()?;
        self.h_range.validate()?;
        positive("E", self.e_range.lo)?;
        non_negative("h", self.h_range.lo)?;
        non_negative("alpha", self.alpha)?;
        positive("r", self.r)?;
        positive("d", self.d)?;
        self.sim.validate(self.d)?;
        if let Some(c) = &self.refine {
            c.validate(self.d)?;
        }
        Ok(())
    }
}

/// Analytic zone plus, in the transition zone, the simulated outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "E")]
    pub e: f64,
    pub h: f64,
    pub alpha: f64,
    pub r: f64,
    pub d: f64,
    pub zone: Zone,
    pub outcome: Option<Outcome>,
    pub regime: Option<Regime>,
    pub front_speed: Option<f64>,
    pub h1: Option<f64>,
    pub h_star: Option<f64>,
    pub h_minus: Option<f64>,
    pub h_plus: Option<f64>,
}

impl SweepRecord {
    fn simulate(&mut self, cfg: &SimConfig) {
        let report = Params::new(self.e, self.h, self.alpha, self.r, self.d).and_then(|p| run(&p, cfg));
        match report {
            Ok(out) => {
                self.outcome = Some(out.report.outcome);
                self.regime = Some(out.report.regime);
                self.front_speed = out.report.front_speed;
            }
            Err(_) => {
                self.outcome = Some(Outcome::Undetermined);
                self.regime = Some(Regime::Undetermined);
                self.front_speed = None;
            }
        }
    }

    fn simulated_invasion(&self) -> Option<bool> {
        let outcome = self.outcome?;
        Some(invades(&OutcomeReport {
            outcome,
            regime: self.regime.unwrap_or(Regime::Undetermined),
            front_speed: self.front_speed,
            diagnostics: crate::pde::Diagnostics {
                max_u_final: f64::NAN,
                spatial_variance_final: f64::NAN,
                temporal_residual: None,
            },
        }))
    }
}

fn analytic_record(e: f64, h: f64, spec: &SweepSpec) -> Result<SweepRecord> {
    let (zone, t): (Zone, Option<ThresholdSet>) = zone_of(e, h, spec.alpha)?;
    Ok(SweepRecord {
        e,
        h,
        alpha: spec.alpha,
        r: spec.r,
        d: spec.d,
        zone,
        outcome: None,
        regime: None,
        front_speed: None,
        h1: t.map(|t| t.h1),
        h_star: t.map(|t| t.h_star),
        h_minus: t.map(|t| t.h_minus),
        h_plus: t.map(|t| t.h_plus),
    })
}

/// Labels every point of the `(E, h)` grid, `E` outer and `h` inner.
pub fn sweep_plane(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let es = spec.e_range.values();
    let hs = spec.h_range.values();
    let points: Vec<(f64, f64)> = es.iter().flat_map(|&e| hs.iter().map(move |&h| (e, h))).collect();
    let mut records: Vec<SweepRecord> = points
        .par_iter()
        .map(|&(e, h)| {
            let mut rec = analytic_record(e, h, spec)?;
            if rec.zone.is_transition() {
                rec.simulate(&spec.sim);
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;

    if let Some(fine) = &spec.refine {
        let nh = hs.len();
        let mut boundary = vec![false; records.len()];
        for row in 0..es.len() {
            for j in 0..nh - 1 {
                let (a, b) = (row * nh + j, row * nh + j + 1);
                if let (Some(x), Some(y)) = (records[a].simulated_invasion(), records[b].simulated_invasion()) {
                    if x != y {
                        boundary[a] = true;
                        boundary[b] = true;
                    }
                }
            }
        }
        records
            .par_iter_mut()
            .zip(boundary.par_iter())
            .filter(|(_, &b)| b)
            .for_each(|(rec, _)| rec.simulate(fine));
    }
    Ok(records)
}

/// Qualitative shape of an `h_crit(d)` curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveShape {
    Decreasing,
    Increasing,
    RiseThenFall,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub d: f64,
    pub r: f64,
    pub h_crit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcritCurve {
    pub points: Vec<CurvePoint>,
    pub shape: CurveShape,
}

/// Shape of a sequence, ignoring changes smaller than `tol`.
pub fn curve_shape(values: &[f64], tol: f64) -> CurveShape {
    let steps: Vec<i8> = values
        .windows(2)
        .map(|w| {
            let dv = w[1] - w[0];
            if dv > tol {
                1
            } else if dv < -tol {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    if steps.iter().all(|&s| s <= 0) {
        return CurveShape::Decreasing;
    }
    if steps.iter().all(|&s| s >= 0) {
        return CurveShape::Increasing;
    }
    let peak = steps.iter().position(|&s| s < 0).expect("has a fall");
    if steps[..peak].iter().all(|&s| s > 0) && steps[peak..].iter().all(|&s| s < 0) {
        CurveShape::RiseThenFall
    } else {
        CurveShape::Other
    }
}

/// `h_crit` for each `d`, evaluated in parallel.
pub fn hcrit_vs_d(e: f64, alpha: f64, r: f64, d_list: &[f64], cfg: &SimConfig) -> Result<HcritCurve> {
    let points: Vec<CurvePoint> = d_list
        .par_iter()
        .map(|&d| {
            Ok(CurvePoint {
                d,
                r,
                h_crit: h_crit(e, alpha, r, d, cfg)?.h_crit,
            })
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = points.iter().filter_map(|p| p.h_crit).collect();
    Ok(HcritCurve {
        shape: curve_shape(&values, 2.0 * HCRIT_TOL),
        points,
    })
}

pub const SWEEP_HEADER: &str = "E,h,alpha,r,d,zone,outcome,regime,front_speed,h1,h_star,h_minus,h_plus";
pub const CURVE_HEADER: &str = "d,r,h_crit";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("CSV: {e}"))
}

pub fn write_sweep_csv<W: Write>(w: W, records: &[SweepRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER.split(',')).map_err(csv_err)?;
    for r in records {
        out.write_record([
            num(r.e),
            num(r.h),
            num(r.alpha),
            num(r.r),
            num(r.d),
            r.zone.as_str().to_string(),
            r.outcome.map(|o| o.as_str()).unwrap_or_default().to_string(),
            r.regime.map(|g| g.as_str()).unwrap_or_default().to_string(),
            opt_num(r.front_speed),
            opt_num(r.h1),
            opt_num(r.h_star),
            opt_num(r.h_minus),
            opt_num(r.h_plus),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Config(e.to_string()))
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &str) -> Result<()> {
    let got = rdr.headers().map_err(csv_err)?;
    if got.iter().ne(expected.split(',')) {
        return Err(Error::Config(format!(
            "expected CSV header `{expected}`, got `{}`",
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, SWEEP_HEADER)?;
    rdr.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn write_curve_csv<W: Write>(w: W, points: &[CurvePoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CURVE_HEADER.split(',')).map_err(csv_err)?;
    for p in points {
        out.write_record([num(p.d), num(p.r), opt_num(p.h_crit)]).map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Config(e.to_string()))
}

pub fn read_curve_csv<R: Read>(r: R) -> Result<Vec<CurvePoint>> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, CURVE_HEADER)?;
    rdr.deserialize().map(|row| row.map_err(csv_err)).collect()
}
