use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::{Deserialize, Serialize};

use predwave::cartography::{h_crit, hcrit_vs_d, sweep_plane, write_curve_csv, write_sweep_csv, Range, SweepRecord, SweepSpec};
use predwave::io::{sha256_hex, to_csv, RunManifest};
use predwave::ode::{integrate_ode, steady_states};
use predwave::pde::{run, write_snapshot_csv, Field, Grid, InitialProfile, Regime, Scheme, SimConfig};
use predwave::waves::{threshold_set, zone_of};
use predwave::{Error, Params};

use crate::settings::{ConfigFile, NumberList};
use crate::{Cli, Command, Common, Format, Model, Sim, SweepGrid};

pub const DEFAULT_OUT: &str = "predwave-out";

/// File name of the manifest written by `command`.
pub fn manifest_name(command: &str) -> String {
    format!("{command}.manifest.json")
}

/// Process exit status of a successful invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Undetermined,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        match s {
            Status::Ok => ExitCode::SUCCESS,
            Status::Undetermined => ExitCode::from(3),
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::Regime(_)
            | Error::Domain(_)
            | Error::NoRealRoots { .. }
            | Error::Config(_) => 2,
            Error::NoSignChange { .. } | Error::NumericalBlowup { .. } | Error::NegativeDensity { .. } => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<Status, Failure>;

/// Resolved options and collected outputs of one invocation.
struct Context {
    file: ConfigFile,
    out: PathBuf,
    format: Format,
    manifest: RunManifest,
    started: Instant,
}

impl Context {
    fn new(command: &str, common: &Common) -> Result<Self, Failure> {
        let file = match &common.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let out = file
            .pick::<PathBuf>("out", common.out.clone())?
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let format = file.pick::<Format>("format", common.format)?.unwrap_or(Format::Json);
        let mut ctx = Context {
            file,
            out,
            format,
            manifest: RunManifest::new(command, Vec::new()),
            started: Instant::now(),
        };
        ctx.arg("format", format.extension());
        Ok(ctx)
    }

    fn arg(&mut self, key: &str, value: impl ToString) {
        self.manifest.args.push(format!("--{key}"));
        self.manifest.args.push(value.to_string());
    }

    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        std::fs::create_dir_all(&self.out)?;
        std::fs::write(self.out.join(name), bytes)?;
        self.manifest.outputs.push(name.to_string());
        self.manifest.output_hashes.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Writes `result.<ext>`, prints it, and writes the manifest.
    fn finish(mut self, result_name: &str, text: String) -> Result<(), Failure> {
        let name = format!("{result_name}.{}", self.format.extension());
        self.emit(&name, text.as_bytes())?;
        print!("{text}");
        if !text.ends_with('\n') {
            println!();
        }
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        std::fs::write(self.out.join(manifest_name(&self.manifest.command)), self.manifest.to_json()?)?;
        Ok(())
    }

    fn encode<T: Serialize>(&self, rows: &[T], single: bool) -> Result<String, Failure> {
        Ok(match self.format {
            Format::Csv => to_csv(rows)?,
            Format::Json if single => predwave::io::to_json(&rows[0])?,
            Format::Json => predwave::io::to_json(&rows)?,
        })
    }
}

pub fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Thresholds { common, model } => thresholds(&common, &model),
        Command::Steady { common, model } => steady(&common, &model),
        Command::Ode {
            common,
            model,
            u0,
            v0,
            t_end,
        } => ode(&common, &model, u0, v0, t_end),
        Command::Simulate { common, model, sim } => simulate(&common, &model, &sim),
        Command::Classify { common, model, sim } => classify(&common, &model, &sim),
        Command::Hcrit {
            common,
            model,
            sim,
            d_list,
        } => hcrit(&common, &model, &sim, d_list),
        Command::Sweep {
            common,
            model,
            sim,
            grid,
            refine,
        } => sweep(&common, &model, &sim, &grid, refine),
        Command::Replay { manifest, out } => replay(&manifest, out),
    }
}

fn encounter_and_conversion(ctx: &mut Context, m: &Model) -> Result<(f64, f64), Failure> {
    let e = ctx.file.require("E", m.e)?;
    let alpha = ctx.file.require("alpha", m.alpha)?;
    ctx.arg("E", e);
    ctx.arg("alpha", alpha);
    Ok((e, alpha))
}

fn full_params(ctx: &mut Context, m: &Model) -> Result<Params, Failure> {
    let (e, alpha) = encounter_and_conversion(ctx, m)?;
    let h = ctx.file.require("h", m.h)?;
    let r = ctx.file.pick("r", m.r)?.unwrap_or(1.0);
    let d = ctx.file.pick("d", m.d)?.unwrap_or(1.0);
    for (k, v) in [("h", h), ("r", r), ("d", d)] {
        ctx.arg(k, v);
    }
    let p = Params::new(e, h, alpha, r, d)?;
    ctx.manifest.params = Some(p);
    Ok(p)
}

fn sim_config(ctx: &mut Context, s: &Sim, base: SimConfig) -> Result<SimConfig, Failure> {
    let f = &ctx.file;
    let grid = Grid {
        length: f.pick("L", s.length)?.unwrap_or(base.grid.length),
        nx: f.pick("nx", s.nx)?.unwrap_or(base.grid.nx),
    };
    let scheme = match f.pick::<String>("scheme", s.scheme.clone())?.as_deref() {
        None => base.scheme,
        Some("split") => Scheme::Split,
        Some("explicit") => Scheme::Explicit,
        Some(other) => return Err(Error::Config(format!("unknown scheme `{other}` (split or explicit)")).into()),
    };
    let cfg = SimConfig {
        grid,
        dt: f.pick("dt", s.dt)?.unwrap_or(base.dt),
        t_end: f.pick("t_end", s.t_end)?.unwrap_or(base.t_end),
        front_level: f.pick("front_level", s.front_level)?.or(base.front_level),
        extinction_eps: f.pick("eps", s.eps)?.unwrap_or(base.extinction_eps),
        ic: InitialProfile {
            x0: Some(f.pick("x0", s.x0)?.unwrap_or(0.5 * grid.length)),
            k: f.pick("k", s.k)?.unwrap_or(base.ic.k),
        },
        scheme,
        sample_interval: f.pick("sample_interval", s.sample_interval)?.unwrap_or(base.sample_interval),
        stationary_tol: base.stationary_tol,
        snapshot_times: f.pick::<NumberList>("snapshots", s.snapshots.clone())?.map(|l| l.0).unwrap_or_default(),
    };
    ctx.arg("L", cfg.grid.length);
    ctx.arg("nx", cfg.grid.nx);
    ctx.arg("dt", cfg.dt);
    ctx.arg("t-end", cfg.t_end);
    ctx.arg("x0", cfg.front_start());
    ctx.arg("k", cfg.ic.k);
    ctx.arg("scheme", if cfg.scheme == Scheme::Split { "split" } else { "explicit" });
    if let Some(level) = cfg.front_level {
        ctx.arg("front-level", level);
    }
    ctx.arg("eps", cfg.extinction_eps);
    ctx.arg("sample-interval", cfg.sample_interval);
    if !cfg.snapshot_times.is_empty() {
        ctx.arg("snapshots", NumberList(cfg.snapshot_times.clone()));
    }
    ctx.manifest.sim = Some(cfg.clone());
    Ok(cfg)
}

fn thresholds(common: &Common, m: &Model) -> CmdResult {
    let mut ctx = Context::new("thresholds", common)?;
    let (e, alpha) = encounter_and_conversion(&mut ctx, m)?;
    let t = threshold_set(e, alpha)?;
    let text = ctx.encode(&[t], true)?;
    ctx.finish("thresholds", text)?;
    Ok(Status::Ok)
}

fn steady(common: &Common, m: &Model) -> CmdResult {
    let mut ctx = Context::new("steady", common)?;
    let p = full_params(&mut ctx, m)?;
    let states = steady_states(p.encounter, p.handling, p.conversion, p.growth)?;
    let text = ctx.encode(&states, false)?;
    ctx.finish("steady", text)?;
    Ok(Status::Ok)
}

/// Summary printed by `ode`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSummary {
    pub u0: f64,
    pub v0: f64,
    pub t_final: f64,
    pub u_final: f64,
    pub v_final: f64,
    pub settled: bool,
    pub steps: usize,
}

fn ode(common: &Common, m: &Model, u0: Option<f64>, v0: Option<f64>, t_end: Option<f64>) -> CmdResult {
    let mut ctx = Context::new("ode", common)?;
    let p = full_params(&mut ctx, m)?;
    let u0 = ctx.file.pick("u0", u0)?.unwrap_or(0.9);
    let v0 = ctx.file.pick("v0", v0)?.unwrap_or(1.0);
    let t_end = ctx.file.pick("t_end", t_end)?.unwrap_or(1000.0);
    ctx.arg("u0", u0);
    ctx.arg("v0", v0);
    ctx.arg("t-end", t_end);
    let traj = integrate_ode(&p, u0, v0, t_end)?;
    let last = *traj.states.last().expect("trajectory starts at the initial state");
    let summary = OdeSummary {
        u0,
        v0,
        t_final: *traj.times.last().expect("non-empty"),
        u_final: last.u,
        v_final: last.v,
        settled: traj.asymptote.is_some(),
        steps: traj.times.len() - 1,
    };
    #[derive(Serialize)]
    struct Row {
        t: f64,
        u: f64,
        v: f64,
    }
    let rows: Vec<Row> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| Row { t, u: s.u, v: s.v })
        .collect();
    ctx.emit("trajectory.csv", to_csv(&rows)?.as_bytes())?;
    let text = ctx.encode(&[summary], true)?;
    ctx.finish("ode", text)?;
    Ok(Status::Ok)
}

fn snapshot_bytes(grid: &Grid, f: &Field) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_snapshot_csv(&mut buf, grid, f)?;
    Ok(buf)
}

/// Runs the simulation and writes field files; returns the run output.
fn simulate_into(ctx: &mut Context, p: &Params, cfg: &SimConfig) -> Result<predwave::pde::RunOutput, Failure> {
    let out = run(p, cfg)?;
    for snap in &out.snapshots {
        let name = format!("snapshot_t{}.csv", snap.t);
        ctx.emit(&name, &snapshot_bytes(&cfg.grid, snap)?)?;
    }
    ctx.emit("final.csv", &snapshot_bytes(&cfg.grid, &out.field)?)?;
    #[derive(Serialize)]
    struct FrontRow {
        t: f64,
        x: f64,
    }
    let rows: Vec<FrontRow> = out
        .front
        .times
        .iter()
        .zip(&out.front.positions)
        .map(|(&t, &x)| FrontRow { t, x })
        .collect();
    let front = if rows.is_empty() { "t,x\n".to_string() } else { to_csv(&rows)? };
    ctx.emit("front.csv", front.as_bytes())?;
    ctx.manifest.determinism_hash = Some(out.field.determinism_hash());
    Ok(out)
}

fn status_of(regime: Option<Regime>) -> Status {
    if regime == Some(Regime::Undetermined) {
        Status::Undetermined
    } else {
        Status::Ok
    }
}

fn simulate(common: &Common, m: &Model, s: &Sim) -> CmdResult {
    let mut ctx = Context::new("simulate", common)?;
    let p = full_params(&mut ctx, m)?;
    let cfg = sim_config(&mut ctx, s, SimConfig::default())?;
    let out = simulate_into(&mut ctx, &p, &cfg)?;
    let text = ctx.encode(&[out.report], true)?;
    ctx.finish("report", text)?;
    Ok(status_of(Some(out.report.regime)))
}

fn classify(common: &Common, m: &Model, s: &Sim) -> CmdResult {
    let mut ctx = Context::new("classify", common)?;
    let p = full_params(&mut ctx, m)?;
    let cfg = sim_config(&mut ctx, s, SimConfig::default())?;
    let (zone, t) = zone_of(p.encounter, p.handling, p.conversion)?;
    let out = simulate_into(&mut ctx, &p, &cfg)?;
    let rec = SweepRecord {
        e: p.encounter,
        h: p.handling,
        alpha: p.conversion,
        r: p.growth,
        d: p.diffusion,
        zone,
        outcome: Some(out.report.outcome),
        regime: Some(out.report.regime),
        front_speed: out.report.front_speed,
        h1: t.map(|t| t.h1),
        h_star: t.map(|t| t.h_star),
        h_minus: t.map(|t| t.h_minus),
        h_plus: t.map(|t| t.h_plus),
    };
    let text = match ctx.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &[rec])?;
            String::from_utf8(buf).expect("ASCII CSV")
        }
        Format::Json => predwave::io::to_json(&rec)?,
    };
    ctx.finish("classify", text)?;
    Ok(status_of(rec.regime))
}

fn hcrit(common: &Common, m: &Model, s: &Sim, d_list: Option<NumberList>) -> CmdResult {
    let mut ctx = Context::new("hcrit", common)?;
    let (e, alpha) = encounter_and_conversion(&mut ctx, m)?;
    let r = ctx.file.pick("r", m.r)?.unwrap_or(1.0);
    ctx.arg("r", r);
    let d_list = ctx.file.pick::<NumberList>("d_list", d_list)?;
    let cfg = sim_config(&mut ctx, s, SimConfig::sweep())?;
    if let Some(list) = d_list {
        ctx.arg("d-list", &list);
        let curve = hcrit_vs_d(e, alpha, r, &list.0, &cfg)?;
        let text = match ctx.format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_curve_csv(&mut buf, &curve.points)?;
                String::from_utf8(buf).expect("ASCII CSV")
            }
            Format::Json => predwave::io::to_json(&curve)?,
        };
        ctx.finish("hcrit_curve", text)?;
        return Ok(Status::Ok);
    }
    let d = ctx.file.pick("d", m.d)?.unwrap_or(1.0);
    ctx.arg("d", d);
    let report = h_crit(e, alpha, r, d, &cfg)?;
    let text = ctx.encode(&[report], true)?;
    ctx.finish("hcrit", text)?;
    Ok(Status::Ok)
}

fn sweep(common: &Common, m: &Model, s: &Sim, g: &SweepGrid, refine: Option<bool>) -> CmdResult {
    let mut ctx = Context::new("sweep", common)?;
    let alpha = ctx.file.require("alpha", m.alpha)?;
    let r = ctx.file.pick("r", m.r)?.unwrap_or(1.0);
    let d = ctx.file.pick("d", m.d)?.unwrap_or(1.0);
    let f = &ctx.file;
    let e_range = Range::new(
        f.pick("E_min", g.e_min)?.unwrap_or(0.5),
        f.pick("E_max", g.e_max)?.unwrap_or(10.0),
        f.pick("E_steps", g.e_steps)?.unwrap_or(8),
    )?;
    let h_range = Range::new(
        f.pick("h_min", g.h_min)?.unwrap_or(0.5),
        f.pick("h_max", g.h_max)?.unwrap_or(10.0),
        f.pick("h_steps", g.h_steps)?.unwrap_or(8),
    )?;
    let refine = f.pick("refine", refine)?.unwrap_or(false);
    for (k, v) in [("alpha", alpha), ("r", r), ("d", d)] {
        ctx.arg(k, v);
    }
    for (k, v) in [("E-min", e_range.lo), ("E-max", e_range.hi), ("h-min", h_range.lo), ("h-max", h_range.hi)] {
        ctx.arg(k, v);
    }
    ctx.arg("E-steps", e_range.steps);
    ctx.arg("h-steps", h_range.steps);
    ctx.arg("refine", refine);
    let sim = sim_config(&mut ctx, s, SimConfig::sweep())?;
    let spec = SweepSpec {
        e_range,
        h_range,
        alpha,
        r,
        d,
        sim,
        refine: refine.then(SimConfig::default),
    };
    let records = sweep_plane(&spec)?;
    let text = match ctx.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &records)?;
            String::from_utf8(buf).expect("ASCII CSV")
        }
        Format::Json => predwave::io::to_json(&records)?,
    };
    ctx.finish("sweep", text)?;
    Ok(Status::Ok)
}

fn replay(manifest_path: &Path, out: Option<PathBuf>) -> CmdResult {
    let text = std::fs::read_to_string(manifest_path)?;
    let original = RunManifest::from_json(&text)?;
    let out = out.unwrap_or_else(|| manifest_path.parent().unwrap_or(Path::new(".")).join("replay"));
    let mut argv = vec!["predwave".to_string(), original.command.clone()];
    argv.extend(original.args.iter().cloned());
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let cli = Cli::try_parse_from(&argv).map_err(|e| Failure {
        code: 2,
        message: format!("manifest arguments do not parse: {e}"),
    })?;
    let status = dispatch(cli)?;
    let replayed = RunManifest::from_json(&std::fs::read_to_string(out.join(manifest_name(&original.command)))?)?;
    let mut mismatches = Vec::new();
    if replayed.determinism_hash != original.determinism_hash {
        mismatches.push("determinism hash".to_string());
    }
    for (name, hash) in &original.output_hashes {
        if replayed.output_hashes.get(name) != Some(hash) {
            mismatches.push(name.clone());
        }
    }
    if mismatches.is_empty() {
        eprintln!("replay: {} outputs reproduced exactly", original.output_hashes.len());
        Ok(status)
    } else {
        Err(Failure {
            code: 1,
            message: format!("replay differs in: {}", mismatches.join(", ")),
        })
    }
}
