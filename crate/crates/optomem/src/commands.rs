//! Subcommand implementations shared by the binary and the tests.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use optomem_core::analysis::{self, Analysis, JumpReport};
use optomem_core::integrator::{self, IntegratorConfig};
use optomem_core::optimizer::{ga_optimize, FormFactorObjective, OptResult};
use optomem_core::{model, DriveSpec, MeanFieldState, OmParams, Trajectory};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AnalysisSection, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io;

/// Settings common to all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Runtime {
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
    /// Command line that started the run, for the manifest.
    pub command: String,
}

impl Runtime {
    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            if j == 0 {
                return Err(CliError::Validation("--jobs must be >= 1".into()));
            }
            b = b.num_threads(j);
        }
        b.build().map_err(|e| CliError::Validation(format!("thread pool: {e}")))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    started_unix_seconds: u64,
    wall_time_seconds: f64,
    config: &'a RunConfig,
}

fn write_manifest(dir: &Path, rt: &Runtime, cfg: &RunConfig, started: SystemTime, clock: Instant) -> CliResult<()> {
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: &rt.command,
        started_unix_seconds: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        wall_time_seconds: clock.elapsed().as_secs_f64(),
        config: cfg,
    };
    let text = toml::to_string_pretty(&m).map_err(|e| CliError::Validation(format!("manifest: {e}")))?;
    io::write_text(&dir.join("manifest.toml"), &text)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Output directory: the explicit flag, else the config's, else `fallback`.
pub fn output_dir(flag: Option<&Path>, cfg: Option<&RunConfig>, fallback: &str) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

/// Integrates the configured drive over `simulation.cycles` periods.
pub fn simulate_in_memory(cfg: &RunConfig) -> CliResult<Trajectory> {
    simulate_drive(cfg, &cfg.drive)
}

fn simulate_drive(cfg: &RunConfig, drive: &DriveSpec) -> CliResult<Trajectory> {
    let icfg = IntegratorConfig::resolve(&cfg.params, drive, &cfg.integrator)?;
    let horizon = cfg.simulation.cycles as f64 * drive.period()?;
    Ok(integrator::integrate(&cfg.params, drive, cfg.initial, horizon, &icfg)?)
}

/// Per-cycle metrics plus the phonon plateau report (when the series spans
/// enough windows).
pub fn analyze_in_memory(
    traj: &Trajectory,
    params: &OmParams,
    section: &AnalysisSection,
) -> CliResult<(Analysis, Option<JumpReport>)> {
    let a = analysis::analyze(traj, params, &section.options())?;
    let jumps = analysis::detect_jumps(&traj.times, &traj.n_phonon(), section.jump_window * traj.period).ok();
    Ok((a, jumps))
}

/// `simulate`: trajectory CSV and manifest.
pub fn simulate(cfg: &RunConfig, out: &Path, rt: &Runtime) -> CliResult<Trajectory> {
    let (started, clock) = (SystemTime::now(), Instant::now());
    ensure_dir(out)?;
    let traj = simulate_in_memory(cfg)?;
    io::write_trajectory(&out.join("trajectory.csv"), &traj)?;
    write_manifest(out, rt, cfg, started, clock)?;
    log::info!("wrote {} samples to {}", traj.len(), out.display());
    Ok(traj)
}

/// `analyze`: per-cycle metrics, loops and summary for a trajectory CSV.
pub fn analyze(
    trajectory: &Path,
    period: f64,
    params: &OmParams,
    section: &AnalysisSection,
    out: &Path,
) -> CliResult<Analysis> {
    ensure_dir(out)?;
    let traj = io::read_trajectory(trajectory, period)?;
    let (a, jumps) = analyze_in_memory(&traj, params, section)?;
    io::write_metrics(&out.join("metrics.csv"), &a)?;
    let loops = analysis::normalize(&traj, section.output, params, section.normalization)?;
    io::write_loops(&out.join("loops.csv"), &loops)?;
    io::write_text(&out.join("summary.toml"), &io::summary_toml(&a, jumps.as_ref()))?;
    Ok(a)
}

/// The GA objective described by a config.
pub fn objective(cfg: &RunConfig) -> CliResult<FormFactorObjective> {
    let opt = cfg
        .optimizer
        .as_ref()
        .ok_or_else(|| CliError::Validation("config has no [optimizer] section".into()))?;
    let mut obj = FormFactorObjective::new(cfg.params, cfg.drive.kind(), cfg.analysis.output, opt.ga.cycles);
    obj.normalization = cfg.analysis.normalization;
    obj.skip_cycles = opt.ga.skip_cycles;
    obj.integrator = cfg.integrator;
    obj.initial = cfg.initial;
    Ok(obj)
}

/// Runs the configured GA on the worker pool.
pub fn optimize_in_memory(cfg: &RunConfig, rt: &Runtime) -> CliResult<OptResult> {
    let opt = cfg
        .optimizer
        .as_ref()
        .ok_or_else(|| CliError::Validation("config has no [optimizer] section".into()))?;
    let obj = objective(cfg)?;
    let space = opt.space();
    space.validate_for(cfg.drive.kind())?;
    let pool = rt.pool()?;
    let result = pool.install(|| {
        ga_optimize(&space, &opt.ga, |pop| pop.par_iter().map(|theta| obj.cost(theta)).collect())
    })?;
    Ok(obj.finish(result))
}

/// `optimize`: report, history, and the best drive's trajectory and loops.
pub fn optimize(cfg: &RunConfig, out: &Path, rt: &Runtime) -> CliResult<OptResult> {
    let (started, clock) = (SystemTime::now(), Instant::now());
    ensure_dir(out)?;
    let result = optimize_in_memory(cfg, rt)?;
    let names = cfg.drive.kind().parameter_names();

    let mut report = String::new();
    report.push_str(&format!("best_form_factor = {}\n", io::num(-result.best_cost)));
    report.push_str(&format!("best_cost = {}\n", io::num(result.best_cost)));
    report.push_str(&format!("evaluations = {}\n", result.evaluations));
    report.push_str(&format!("ceiling_violations = {}\n", result.ceiling_violations));
    let per_cycle: Vec<String> = result.per_cycle_f.iter().map(|v| io::num(*v)).collect();
    report.push_str(&format!("per_cycle_form_factor = [{}]\n\n[theta_star]\n", per_cycle.join(", ")));
    for (n, v) in names.iter().zip(&result.theta_star) {
        report.push_str(&format!("{n} = {}\n", io::num(*v)));
    }
    io::write_text(&out.join("report.toml"), &report)?;

    let mut history = String::from("generation,best_cost\n");
    for (g, c) in result.history.iter().enumerate() {
        history.push_str(&format!("{g},{}\n", io::num(*c)));
    }
    io::write_text(&out.join("history.csv"), &history)?;

    let best = DriveSpec::from_theta(cfg.drive.kind(), &result.theta_star)?;
    let mut best_cfg = cfg.clone();
    best_cfg.drive = best;
    best_cfg.simulation.cycles = cfg.optimizer.as_ref().map_or(5, |o| o.ga.cycles + o.ga.skip_cycles);
    match simulate_in_memory(&best_cfg) {
        Ok(traj) => {
            io::write_trajectory(&out.join("best_trajectory.csv"), &traj)?;
            let loops = analysis::normalize(&traj, cfg.analysis.output, &cfg.params, cfg.analysis.normalization)?;
            io::write_loops(&out.join("best_loops.csv"), &loops)?;
        }
        Err(e) => log::warn!("could not re-simulate the best drive: {e}"),
    }
    write_manifest(out, rt, cfg, started, clock)?;
    Ok(result)
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub outcome: Result<SweepMetrics, String>,
}

/// Summary metrics of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetrics {
    pub mean_form_factor: f64,
    pub max_intersections: usize,
    pub storing: &'static str,
    pub plateaus: Option<usize>,
}

/// Cartesian product of the sweep axes in name order.
pub fn grid_points(axes: &[(String, Vec<f64>)]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for (_, values) in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    points
}

fn sweep_point(cfg: &RunConfig, names: &[String], values: &[f64]) -> CliResult<SweepMetrics> {
    let mut drive = cfg.drive.clone();
    for (n, v) in names.iter().zip(values) {
        drive = drive.with_parameter(n, *v)?;
    }
    drive.validate()?;
    let traj = simulate_drive(cfg, &drive)?;
    let (a, jumps) = analyze_in_memory(&traj, &cfg.params, &cfg.analysis)?;
    Ok(SweepMetrics {
        mean_form_factor: a.mean_form_factor,
        max_intersections: a.max_intersections,
        storing: a.storing.as_str(),
        plateaus: jumps.map(|j| j.plateaus.len()),
    })
}

/// Runs every grid point concurrently; failures are kept per row.
pub fn sweep_in_memory(cfg: &RunConfig, axes: &[(String, Vec<f64>)], rt: &Runtime) -> CliResult<Vec<SweepRow>> {
    let names: Vec<String> = axes.iter().map(|(n, _)| n.clone()).collect();
    let points = grid_points(axes);
    let pool = rt.pool()?;
    Ok(pool.install(|| {
        points
            .into_par_iter()
            .map(|values| {
                let outcome = sweep_point(cfg, &names, &values).map_err(|e| e.to_string());
                SweepRow { values, outcome }
            })
            .collect()
    }))
}

/// `sweep`: one summary row per grid point in `sweep.csv`.
pub fn sweep(cfg: &RunConfig, axes: &[(String, Vec<f64>)], out: &Path, rt: &Runtime) -> CliResult<Vec<SweepRow>> {
    let (started, clock) = (SystemTime::now(), Instant::now());
    ensure_dir(out)?;
    let rows = sweep_in_memory(cfg, axes, rt)?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    let mut header: Vec<String> = axes.iter().map(|(n, _)| n.clone()).collect();
    header.extend(["mean_form_factor", "max_intersections", "storing", "plateaus", "error"].map(String::from));
    w.write_record(&header)?;
    for row in &rows {
        let mut rec: Vec<String> = row.values.iter().map(|v| io::num(*v)).collect();
        match &row.outcome {
            Ok(m) => rec.extend([
                io::num(m.mean_form_factor),
                m.max_intersections.to_string(),
                m.storing.to_string(),
                m.plateaus.map(|p| p.to_string()).unwrap_or_default(),
                String::new(),
            ]),
            Err(e) => rec.extend([String::new(), String::new(), String::new(), String::new(), e.clone()]),
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io(out.join("sweep.csv"), e))?;
    let mut echo = cfg.clone();
    echo.sweep = Some(crate::config::SweepSection {
        grid: axes.iter().cloned().collect(),
    });
    write_manifest(out, rt, &echo, started, clock)?;
    Ok(rows)
}

/// Parses `name=v1,v2,...`.
pub fn parse_axis(spec: &str) -> CliResult<(String, Vec<f64>)> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("grid axis `{spec}` is not of the form name=v1,v2")))?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("grid axis `{name}`: `{v}` is not a number")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(CliError::Validation(format!("grid axis `{name}` has no values")));
    }
    Ok((name.trim().to_string(), values))
}

/// Outcome of one built-in check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn below(name: &'static str, value: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value < tolerance,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<28} value {:.3e} tolerance {:.1e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance,
            self.detail
        )
    }
}

/// Runs the analytic-oracle checks.
pub fn verify_checks() -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    let bare = OmParams {
        g_m: 0.0,
        ..OmParams::default()
    };

    let r = analysis::verify_delta_pulse(&bare, 1.0, 3.0)?;
    checks.push(Check::below(
        "delta-pulse area",
        r.relative_error,
        0.02,
        format!("numeric {:.6e} analytic {:.6e} finite part {:.6e}", r.numeric, r.analytic, r.finite_part),
    ));

    let undamped = OmParams { kappa: 0.0, ..bare };
    let r0 = analysis::verify_delta_pulse(&undamped, 1.0, 3.0)?;
    checks.push(Check {
        name: "delta-pulse kappa = 0",
        value: r0.analytic,
        tolerance: 0.0,
        passed: r0.analytic == 0.0,
        detail: format!("analytic {:.3e}", r0.analytic),
    });

    let areas: Vec<f64> = [1.0, 0.1, 0.01]
        .iter()
        .map(|k| analysis::delta_pulse_analytic_area(&OmParams { kappa: *k, ..bare }, 1.0, 3.0 / k))
        .collect();
    checks.push(Check {
        name: "delta-pulse kappa -> 0",
        value: areas[2],
        tolerance: 0.0,
        passed: areas.windows(2).all(|w| w[1] < w[0]),
        detail: format!("areas {:.3e} {:.3e} {:.3e}", areas[0], areas[1], areas[2]),
    });

    let base = crate::scenarios::single_loop().config();
    let traj = simulate_in_memory(&base)?;
    let res = model::oscillator_residual(&traj, &base.params)?;
    checks.push(Check::below("oscillator identity", res.relative, 1e-4, "single-loop".into()));

    let decoupled = OmParams { g_m: 0.0, ..base.params };
    let mut dcfg = base.clone();
    dcfg.params = decoupled;
    dcfg.initial = MeanFieldState::VACUUM;
    let dtraj = simulate_in_memory(&dcfg)?;
    let dres = model::oscillator_residual(&dtraj, &decoupled)?;
    checks.push(Check {
        name: "oscillator identity g = 0",
        value: dres.relative,
        tolerance: 1e-12,
        passed: dres.relative <= 1e-12,
        detail: "single-loop drive, bare cavity".into(),
    });

    let k = integrator::integral_representation_check(&traj, &base.params)?;
    checks.push(Check::below(
        "kernel representation",
        k.photon.max(k.phonon),
        1e-3,
        format!("photon {:.3e} phonon {:.3e}", k.photon, k.phonon),
    ));
    Ok(checks)
}

/// `verify`: prints and stores the check report; fails when any check fails.
pub fn verify(out: Option<&Path>) -> CliResult<Vec<Check>> {
    let checks = verify_checks()?;
    let report: String = checks.iter().map(|c| c.line() + "\n").collect();
    print!("{report}");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        io::write_text(&dir.join("verify.txt"), &report)?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(checks)
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
