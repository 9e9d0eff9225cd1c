//! Memory metrics of input-output loops.
//!
//! A trajectory is cut into drive cycles `[(n-1)T, nT]`. Each cycle gives a
//! loop `(x, y) = (E(t), y(t))` whose area, perimeter and form factor
//! `F = 4 pi A / P^2` quantify memory. The area is the winding-magnitude
//! area `int |w| dA`, so the two lobes of a pinched (figure-eight) loop add
//! instead of cancelling; for loops without self-intersections it equals
//! the Green's-theorem circulation `|oint x dy| = |oint y dx|`.

mod delta;
mod geometry;
mod jumps;
mod storing;

use alloc::vec::Vec;

pub use delta::{
    delta_pulse_analytic_area, finite_part_halving, kick_area, richardson_halving, verify_delta_pulse,
    DeltaPulseReport,
    DELTA_PULSE_SIGMA_FRACTIONS,
};
pub use geometry::{Circulation, Crossing, CLUSTER_RADIUS, ENDPOINT_TOLERANCE};
pub use jumps::{detect_jumps, Jump, JumpReport, Plateau};
pub use storing::{classify_storing, Storing, DEFAULT_STORING_EPS};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::math::{self, PI};
use crate::model::{self, MeanFieldState, OmParams};

/// Relative endpoint gap (against the bounding-box diagonal) below which a
/// cycle counts as closed.
pub const CLOSURE_TOLERANCE: f64 = 1e-3;

/// Minimum number of samples in a loop.
pub const MIN_LOOP_POINTS: usize = 8;

/// Observable plotted against the drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OutputSelector {
    /// Mean photon number.
    #[default]
    Photon,
    /// Mean phonon number.
    Phonon,
    /// Cavity energy `omega_c <a+a>`.
    CavityEnergy,
    /// Cavity position quadrature.
    XC,
    /// Cavity momentum quadrature.
    PC,
    /// Mechanical position quadrature.
    XM,
    /// Mechanical momentum quadrature.
    PM,
}

impl OutputSelector {
    /// Value of the observable for one state.
    pub fn value(self, state: &MeanFieldState, params: &OmParams) -> f64 {
        match self {
            OutputSelector::Photon => model::photon_number(state),
            OutputSelector::Phonon => model::phonon_number(state),
            OutputSelector::CavityEnergy => params.omega_c * model::photon_number(state),
            OutputSelector::XC => state.x_c,
            OutputSelector::PC => state.p_c,
            OutputSelector::XM => state.x_m,
            OutputSelector::PM => state.p_m,
        }
    }

    /// Name used in files and reports.
    pub fn as_str(self) -> &'static str {
        match self {
            OutputSelector::Photon => "photon",
            OutputSelector::Phonon => "phonon",
            OutputSelector::CavityEnergy => "cavity_energy",
            OutputSelector::XC => "x_c",
            OutputSelector::PC => "p_c",
            OutputSelector::XM => "x_m",
            OutputSelector::PM => "p_m",
        }
    }
}

/// Where the normalizing maxima `max|x|`, `max|y|` are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Normalization {
    /// Each cycle is scaled by its own maxima.
    #[default]
    PerCycle,
    /// All cycles share the maxima of the whole analysis window.
    Global,
}

/// One cycle of an input-output trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopCurve {
    /// Ordered `(x, y)` samples.
    pub points: Vec<[f64; 2]>,
    /// Whether the endpoint gap is below [`CLOSURE_TOLERANCE`] of the
    /// bounding-box diagonal.
    pub closed: bool,
}

impl LoopCurve {
    /// Wraps samples, computing the closure flag.
    pub fn new(points: Vec<[f64; 2]>) -> Self {
        let closed = closure_gap(&points) <= CLOSURE_TOLERANCE;
        Self { points, closed }
    }

    /// Builds a curve from separate coordinate series.
    pub fn from_xy(x: &[f64], y: &[f64]) -> Self {
        Self::new(x.iter().zip(y).map(|(a, b)| [*a, *b]).collect())
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when there are no samples.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self {
            points,
            closed: self.closed,
        }
    }
}

/// Endpoint gap divided by the bounding-box diagonal.
fn closure_gap(points: &[[f64; 2]]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let diag = math::hypot(x1 - x0, y1 - y0);
    let a = points[0];
    let b = points[points.len() - 1];
    let gap = math::hypot(b[0] - a[0], b[1] - a[1]);
    if diag == 0.0 {
        0.0
    } else {
        gap / diag
    }
}

/// Sample index ranges `[start, end]` (inclusive) of the complete cycles,
/// counted from the first sample.
pub fn cycle_windows(traj: &Trajectory) -> Vec<(usize, usize)> {
    let dt = traj.dt();
    let count = math::floor(traj.span() / traj.period + 1e-9) as usize;
    let last = traj.len() - 1;
    (1..=count)
        .map(|k| {
            let a = math::ceil(((k - 1) as f64 * traj.period) / dt - 1e-6) as usize;
            let b = math::floor((k as f64 * traj.period) / dt + 1e-6) as usize;
            (a.min(last), b.min(last))
        })
        .collect()
}

/// Splits a trajectory into normalized per-cycle loops `(E/max|E|, y/max|y|)`.
pub fn normalize(
    traj: &Trajectory,
    output: OutputSelector,
    params: &OmParams,
    normalization: Normalization,
) -> Result<Vec<LoopCurve>> {
    let windows = cycle_windows(traj);
    if windows.is_empty() {
        return Err(Error::ShortTrajectory {
            horizon: traj.span(),
            period: traj.period,
        });
    }
    let y: Vec<f64> = traj.states.iter().map(|s| output.value(s, params)).collect();
    let x = &traj.drive;
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let (whole_a, whole_b) = (windows[0].0, windows[windows.len() - 1].1);
    let global = (max_abs(&x[whole_a..=whole_b]), max_abs(&y[whole_a..=whole_b]));

    let mut curves = Vec::with_capacity(windows.len());
    for (a, b) in windows {
        if b + 1 - a < MIN_LOOP_POINTS {
            return Err(Error::TooFewSamples {
                needed: MIN_LOOP_POINTS,
                got: b + 1 - a,
            });
        }
        let (sx, sy) = match normalization {
            Normalization::PerCycle => (max_abs(&x[a..=b]), max_abs(&y[a..=b])),
            Normalization::Global => global,
        };
        if sx == 0.0 {
            return Err(Error::DegenerateSignal { axis: "x" });
        }
        if sy == 0.0 {
            return Err(Error::DegenerateSignal { axis: "y" });
        }
        let pts = (a..=b).map(|i| [x[i] / sx, y[i] / sy]).collect();
        curves.push(LoopCurve::new(pts));
    }
    Ok(curves)
}

/// Both Green's circulations of the closed loop.
pub fn circulation(curve: &LoopCurve) -> Result<Circulation> {
    if curve.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: curve.len(),
        });
    }
    Ok(geometry::circulation(&curve.points))
}

/// Winding-magnitude area of the chord-closed loop.
pub fn loop_area(curve: &LoopCurve) -> Result<f64> {
    if curve.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: curve.len(),
        });
    }
    let pts = geometry::cleaned(&curve.points);
    let crossings = geometry::polygon_crossings(&pts);
    Ok(geometry::winding_areas(&pts, &crossings).0)
}

/// Perimeter of the loop including the closing chord (zero for a closed loop).
pub fn loop_perimeter(curve: &LoopCurve) -> f64 {
    geometry::closed_perimeter(&curve.points)
}

/// Length of the sampled path without the closing chord.
pub fn path_length(curve: &LoopCurve) -> f64 {
    geometry::open_length(&curve.points)
}

/// `4 pi A / P^2`, clamped to `[0, 1]`.
pub fn form_factor(curve: &LoopCurve) -> Result<f64> {
    let perimeter = loop_perimeter(curve);
    if perimeter <= 0.0 {
        return Err(Error::ZeroPerimeter);
    }
    Ok(clamp_form_factor(4.0 * PI * loop_area(curve)? / (perimeter * perimeter)))
}

fn clamp_form_factor(f: f64) -> f64 {
    if f > 1.0 + 1e-6 {
        log::warn!("form factor {f} exceeds the isoperimetric bound");
    }
    f.clamp(0.0, 1.0)
}

/// Number of distinct transverse self-intersections of the chord-closed loop.
pub fn count_self_intersections(curve: &LoopCurve) -> usize {
    self_intersections(curve).len()
}

/// Locations of the distinct self-intersections.
pub fn self_intersections(curve: &LoopCurve) -> Vec<Crossing> {
    let pts = geometry::cleaned(&curve.points);
    geometry::cluster(&geometry::polygon_crossings(&pts))
}

/// Per-cycle memory quantities.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CycleMetrics {
    /// 1-based cycle number.
    pub cycle_index: usize,
    /// Enclosed area (winding-magnitude).
    pub area: f64,
    /// Perimeter of the chord-closed loop.
    pub perimeter: f64,
    /// `4 pi A / P^2`.
    pub form_factor: f64,
    /// Distinct self-intersections.
    pub n_intersections: usize,
    /// Energy-storing label.
    pub storing: Storing,
    /// Whether the loop closed on its own.
    pub closed: bool,
}

/// All metrics of one loop.
pub fn cycle_metrics(curve: &LoopCurve, cycle_index: usize, eps: (f64, f64)) -> Result<CycleMetrics> {
    if curve.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: curve.len(),
        });
    }
    let pts = geometry::cleaned(&curve.points);
    let raw = geometry::polygon_crossings(&pts);
    let area = geometry::winding_areas(&pts, &raw).0;
    let perimeter = loop_perimeter(curve);
    if perimeter <= 0.0 {
        return Err(Error::ZeroPerimeter);
    }
    Ok(CycleMetrics {
        cycle_index,
        area,
        perimeter,
        form_factor: clamp_form_factor(4.0 * PI * area / (perimeter * perimeter)),
        n_intersections: geometry::cluster(&raw).len(),
        storing: classify_storing(curve, eps.0, eps.1),
        closed: curve.closed,
    })
}

/// Options controlling cycle analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct AnalysisOptions {
    /// Observable on the output axis.
    pub output: OutputSelector,
    /// Normalization scope.
    pub normalization: Normalization,
    /// Leading cycles left out of the averages.
    pub skip_cycles: usize,
    /// Input threshold of the storing classifier.
    pub eps_x: f64,
    /// Output threshold of the storing classifier.
    pub eps_y: f64,
    /// Leave cycles that did not close out of the averages.
    pub exclude_open: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            output: OutputSelector::Photon,
            normalization: Normalization::PerCycle,
            skip_cycles: 0,
            eps_x: DEFAULT_STORING_EPS,
            eps_y: DEFAULT_STORING_EPS,
            exclude_open: false,
        }
    }
}

/// Per-cycle metrics and their summary for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    /// Metrics of every complete cycle.
    pub cycles: Vec<CycleMetrics>,
    /// Mean form factor over the cycles that enter the average.
    pub mean_form_factor: f64,
    /// Number of cycles in the average.
    pub averaged_cycles: usize,
    /// Storing label of the last complete cycle.
    pub storing: Storing,
    /// Largest self-intersection count over the averaged cycles.
    pub max_intersections: usize,
}

impl AnalysisOptions {
    pub(crate) fn counts(&self, m: &CycleMetrics) -> bool {
        m.cycle_index > self.skip_cycles && (m.closed || !self.exclude_open)
    }
}

/// Runs the per-cycle analysis of a trajectory.
pub fn analyze(traj: &Trajectory, params: &OmParams, opts: &AnalysisOptions) -> Result<Analysis> {
    let curves = normalize(traj, opts.output, params, opts.normalization)?;
    let mut cycles = Vec::with_capacity(curves.len());
    for (k, c) in curves.iter().enumerate() {
        cycles.push(cycle_metrics(c, k + 1, (opts.eps_x, opts.eps_y))?);
    }
    let used: Vec<&CycleMetrics> = cycles.iter().filter(|m| opts.counts(m)).collect();
    let mean_form_factor = if used.is_empty() {
        0.0
    } else {
        used.iter().map(|m| m.form_factor).sum::<f64>() / used.len() as f64
    };
    let max_intersections = used.iter().map(|m| m.n_intersections).max().unwrap_or(0);
    let storing = cycles.last().map(|m| m.storing).unwrap_or(Storing::Indeterminate);
    Ok(Analysis {
        averaged_cycles: used.len(),
        cycles,
        mean_form_factor,
        storing,
        max_intersections,
    })
}
