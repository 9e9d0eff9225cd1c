//! CSV formats for trajectories and per-cycle metrics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use optomem_core::analysis::{Analysis, JumpReport};
use optomem_core::{model, MeanFieldState, Trajectory};

use crate::error::{CliError, CliResult};

/// Trajectory columns.
pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "E", "Xc", "Pc", "Xm", "Pm", "n_photon", "n_phonon"];
/// Per-cycle metric columns.
pub const METRICS_HEADER: [&str; 6] = ["cycle", "area", "perimeter", "form_factor", "n_intersections", "storing"];

/// Full-precision rendering (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Writes a trajectory with one row per sample.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(TRAJECTORY_HEADER)?;
    for ((t, e), s) in traj.times.iter().zip(&traj.drive).zip(&traj.states) {
        let row = [
            *t,
            *e,
            s.x_c,
            s.p_c,
            s.x_m,
            s.p_m,
            model::photon_number(s),
            model::phonon_number(s),
        ];
        w.write_record(row.iter().map(|v| num(*v)))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a trajectory written by [`write_trajectory`]; `period` sets the
/// cycle length used for segmentation.
pub fn read_trajectory(path: &Path, period: f64) -> CliResult<Trajectory> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header != TRAJECTORY_HEADER {
        return Err(CliError::Validation(format!(
            "{}: expected columns {}, found {}",
            path.display(),
            TRAJECTORY_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut times = Vec::new();
    let mut drive = Vec::new();
    let mut states = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut v = [0.0; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            let field = rec.get(k).unwrap_or("");
            *slot = field.trim().parse().map_err(|_| {
                CliError::Validation(format!(
                    "{}: row {}: column {} is not a number: {field:?}",
                    path.display(),
                    line + 2,
                    TRAJECTORY_HEADER[k]
                ))
            })?;
        }
        times.push(v[0]);
        drive.push(v[1]);
        states.push(MeanFieldState::new(v[2], v[3], v[4], v[5]));
    }
    Ok(Trajectory::from_parts(times, drive, states, period)?)
}

/// Writes per-cycle metrics.
pub fn write_metrics(path: &Path, analysis: &Analysis) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(METRICS_HEADER)?;
    for m in &analysis.cycles {
        w.write_record([
            m.cycle_index.to_string(),
            num(m.area),
            num(m.perimeter),
            num(m.form_factor),
            m.n_intersections.to_string(),
            m.storing.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes normalized loops as `cycle,x,y` rows.
pub fn write_loops(path: &Path, loops: &[optomem_core::LoopCurve]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["cycle", "x", "y"])?;
    for (k, c) in loops.iter().enumerate() {
        for p in &c.points {
            w.write_record([(k + 1).to_string(), num(p[0]), num(p[1])])?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Human-readable analysis summary in TOML.
pub fn summary_toml(analysis: &Analysis, jumps: Option<&JumpReport>) -> String {
    let mut s = String::new();
    s.push_str(&format!("mean_form_factor = {}\n", num(analysis.mean_form_factor)));
    s.push_str(&format!("averaged_cycles = {}\n", analysis.averaged_cycles));
    s.push_str(&format!("max_intersections = {}\n", analysis.max_intersections));
    s.push_str(&format!("storing = \"{}\"\n", analysis.storing.as_str()));
    let open = analysis.cycles.iter().filter(|c| !c.closed).map(|c| c.cycle_index.to_string());
    s.push_str(&format!("open_cycles = [{}]\n", open.collect::<Vec<_>>().join(", ")));
    if let Some(j) = jumps {
        s.push_str(&format!("plateaus = {}\njumps = {}\n", j.plateaus.len(), j.jumps.len()));
        for p in &j.plateaus {
            s.push_str(&format!(
                "\n[[plateau]]\nt_start = {}\nt_end = {}\nlevel = {}\nwindows = {}\n",
                num(p.t_start),
                num(p.t_end),
                num(p.level),
                p.windows
            ));
        }
        for jump in &j.jumps {
            s.push_str(&format!(
                "\n[[jump]]\ntime = {}\nfrom = {}\nto = {}\n",
                num(jump.time),
                num(jump.from),
                num(jump.to)
            ));
        }
    }
    s
}

/// Writes `text` to `path`.
pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).and_then(|_| f.flush()).map_err(|e| CliError::io(path, e))
}
