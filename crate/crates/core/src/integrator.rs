//! Adaptive Dormand-Prince 5(4) integration onto a uniform output grid.
//!
//! The controller never steps across an output sample: every sample time is
//! reached by the end of an accepted step, so sampled values are solution
//! values and not interpolants.

use alloc::vec::Vec;

use crate::drives::DriveSpec;
use crate::error::{invalid, Error, Result};
use crate::math;
use crate::model::{self, MeanFieldState, OmParams};

/// Samples per drive period on the default output grid.
pub const SAMPLES_PER_PERIOD: f64 = 2000.0;

/// Step and tolerance settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegratorConfig {
    /// Relative tolerance.
    pub rel_tol: f64,
    /// Absolute tolerance per quadrature.
    pub abs_tol: f64,
    /// Largest internal step.
    pub max_step: f64,
    /// Largest internal step inside a pulse of a pulsed drive. Steps outside
    /// pulses never cross the start of the next one.
    #[cfg_attr(feature = "serde", serde(default))]
    pub pulse_step: Option<f64>,
    /// Spacing of the output grid.
    pub sample_dt: f64,
}

/// Optional overrides of [`IntegratorConfig`] fields, as read from config
/// files. Missing fields take drive-dependent defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct IntegratorSettings {
    /// Relative tolerance override.
    pub rel_tol: Option<f64>,
    /// Absolute tolerance override.
    pub abs_tol: Option<f64>,
    /// Maximum step override.
    pub max_step: Option<f64>,
    /// In-pulse maximum step override.
    pub pulse_step: Option<f64>,
    /// Output spacing override.
    pub sample_dt: Option<f64>,
}

impl IntegratorConfig {
    /// Defaults for a drive: `rel_tol = 1e-9`,
    /// `abs_tol = 1e-6 max(1, E0/kappa)`, `max_step = T/200`,
    /// `sample_dt = T/2000`, and for pulsed drives
    /// `pulse_step = min(sigma/5, T/200)`.
    pub fn for_drive(params: &OmParams, spec: &DriveSpec) -> Result<Self> {
        let period = spec.period()?;
        let max_step = period / 200.0;
        Ok(Self {
            rel_tol: 1e-9,
            abs_tol: 1e-6 * (spec.amplitude() / params.kappa).max(1.0),
            max_step,
            pulse_step: spec.sigma().map(|s| (s / 5.0).min(max_step)),
            sample_dt: period / SAMPLES_PER_PERIOD,
        })
    }

    /// A drive-independent configuration with a uniform step cap.
    pub fn uniform(rel_tol: f64, abs_tol: f64, max_step: f64, sample_dt: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_step,
            pulse_step: None,
            sample_dt,
        }
    }

    /// Step cap for a step starting at `t`.
    pub fn step_limit(&self, spec: &DriveSpec, t: f64) -> f64 {
        let Some(fine) = self.pulse_step else {
            return self.max_step;
        };
        match spec.next_pulse_window(t) {
            Some((start, _)) if start - t <= fine * 1e-6 => fine.min(self.max_step),
            Some((start, _)) => self.max_step.min(start - t),
            None => self.max_step,
        }
    }

    /// Drive defaults with the given overrides applied.
    pub fn resolve(params: &OmParams, spec: &DriveSpec, settings: &IntegratorSettings) -> Result<Self> {
        let mut cfg = Self::for_drive(params, spec)?;
        if let Some(v) = settings.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = settings.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = settings.max_step {
            cfg.max_step = v;
        }
        if let Some(v) = settings.pulse_step {
            cfg.pulse_step = Some(v);
        }
        if let Some(v) = settings.sample_dt {
            cfg.sample_dt = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks `0 < rel_tol < 1` and positivity of the rest.
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid("rel_tol", "must lie in (0, 1)"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(invalid("abs_tol", "must be > 0"));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(invalid("max_step", "must be > 0"));
        }
        if let Some(p) = self.pulse_step {
            if !(p > 0.0 && p.is_finite()) {
                return Err(invalid("pulse_step", "must be > 0"));
            }
        }
        if !(self.sample_dt > 0.0 && self.sample_dt.is_finite()) {
            return Err(invalid("sample_dt", "must be > 0"));
        }
        Ok(())
    }
}

/// Uniformly sampled drive and state history.
///
/// Photon and phonon numbers are derived from the stored states on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample times, uniformly spaced.
    pub times: Vec<f64>,
    /// Drive amplitude `E(t_i)`.
    pub drive: Vec<f64>,
    /// Mean-field state at each sample.
    pub states: Vec<MeanFieldState>,
    /// Drive period used for cycle segmentation.
    pub period: f64,
}

impl Trajectory {
    /// Assembles a trajectory, checking lengths and grid uniformity.
    pub fn from_parts(
        times: Vec<f64>,
        drive: Vec<f64>,
        states: Vec<MeanFieldState>,
        period: f64,
    ) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: n });
        }
        if drive.len() != n || states.len() != n {
            return Err(invalid("trajectory", "series lengths differ"));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(invalid("period", "must be > 0"));
        }
        let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
        if dt.is_nan() || dt <= 0.0 {
            return Err(invalid("times", "must be strictly increasing"));
        }
        for w in times.windows(2) {
            let step = w[1] - w[0];
            // the step reproduces dt up to rounding of the absolute times
            let tol = 1e-12 * dt + 4.0 * f64::EPSILON * w[1].abs();
            if (step - dt).abs() > tol {
                return Err(invalid("times", "grid is not uniform"));
            }
        }
        Ok(Self {
            times,
            drive,
            states,
            period,
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// Always false for a valid trajectory.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing.
    pub fn dt(&self) -> f64 {
        let n = self.times.len();
        (self.times[n - 1] - self.times[0]) / (n - 1) as f64
    }

    /// Time covered by the samples.
    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Mean photon number series.
    pub fn n_photon(&self) -> Vec<f64> {
        self.states.iter().map(model::photon_number).collect()
    }

    /// Mean phonon number series.
    pub fn n_phonon(&self) -> Vec<f64> {
        self.states.iter().map(model::phonon_number).collect()
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

type Vec4 = [f64; 4];

#[inline]
fn axpy(y: &Vec4, h: f64, terms: &[(f64, &Vec4)]) -> Vec4 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `dy/dt = field(t, y)` from `y0` and records `y` at
/// `t_i = i * cfg.sample_dt` for `i = 0..n_samples`. Steps never exceed
/// `cfg.max_step`.
pub fn integrate_field<F>(field: F, y0: Vec4, n_samples: usize, cfg: &IntegratorConfig) -> Result<Vec<Vec4>>
where
    F: FnMut(f64, &Vec4) -> Vec4,
{
    integrate_field_limited(field, |_| cfg.max_step, y0, n_samples, cfg)
}

/// Like [`integrate_field`], but a step starting at `t` is capped by
/// `limit(t)` (itself at most `cfg.max_step`).
pub fn integrate_field_limited<F, L>(
    mut field: F,
    limit: L,
    y0: Vec4,
    n_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<Vec4>>
where
    F: FnMut(f64, &Vec4) -> Vec4,
    L: Fn(f64) -> f64,
{
    cfg.validate()?;
    let mut out = Vec::with_capacity(n_samples);
    if n_samples == 0 {
        return Ok(out);
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: 0.0 });
    }
    out.push(y0);

    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = field(t, &y);
    let mut h = (0.1 * limit(0.0)).min(cfg.sample_dt);
    let mut err_prev: f64 = 1e-4;

    for i in 1..n_samples {
        let target = i as f64 * cfg.sample_dt;
        while t < target {
            let remaining = target - t;
            let cap = limit(t).min(cfg.max_step);
            let last = h >= remaining && remaining <= cap;
            let truncated = last || h > cap;
            let step = if last { remaining } else { h.min(cap) };
            if step < 1e-13 * t.abs().max(1.0) && !truncated {
                return Err(Error::StepSizeUnderflow { t });
            }

            let k2 = field(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = field(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = field(
                t + C4 * step,
                &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = field(
                t + C5 * step,
                &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = field(
                t + step,
                &axpy(
                    &y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                step,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let t_new = if last { target } else { t + step };
            let k7 = field(t_new, &y_new);

            let mut acc = 0.0;
            let mut finite = true;
            for j in 0..4 {
                let e = step
                    * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
                let sc = cfg.abs_tol + cfg.rel_tol * y[j].abs().max(y_new[j].abs());
                let r = e / sc;
                acc += r * r;
                finite &= y_new[j].is_finite();
            }
            let err = if finite { math::sqrt(acc / 4.0) } else { f64::INFINITY };

            if err <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * math::powf(err, -ALPHA) * math::powf(err_prev, BETA))
                        .clamp(MIN_FACTOR, MAX_FACTOR)
                };
                err_prev = err.max(1e-4);
                // a step truncated by a sample or cap keeps the controller's size
                let base = if truncated { h.max(step) } else { step };
                h = (base * fac).min(cfg.max_step);
            } else {
                let fac = if err.is_finite() {
                    (SAFETY * math::powf(err, -0.2)).max(MIN_FACTOR)
                } else {
                    MIN_FACTOR
                };
                h = step * fac;
                if h < 1e-13 * t.abs().max(1.0) {
                    return Err(if finite {
                        Error::StepSizeUnderflow { t }
                    } else {
                        Error::NonFinite { t }
                    });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Integrates the mean-field equations under `spec` over `[0, horizon]`.
pub fn integrate(
    params: &OmParams,
    spec: &DriveSpec,
    init: MeanFieldState,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_with_rhs(
        |s, e| model::rhs(s, params, e),
        params,
        spec,
        init,
        horizon,
        cfg,
    )
}

/// Like [`integrate`] but with a caller-supplied right-hand side
/// `(state, E(t)) -> derivative`. Used to check the diagnostics against
/// deliberately wrong dynamics.
pub fn integrate_with_rhs<R>(
    rhs: R,
    params: &OmParams,
    spec: &DriveSpec,
    init: MeanFieldState,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory>
where
    R: Fn(&MeanFieldState, f64) -> MeanFieldState,
{
    params.validate()?;
    spec.validate()?;
    cfg.validate()?;
    let period = spec.period()?;
    if !(horizon.is_finite() && horizon >= period * (1.0 - 1e-12)) {
        return Err(Error::ShortTrajectory { horizon, period });
    }
    if !init.is_finite() {
        return Err(Error::NonFinite { t: 0.0 });
    }
    let n_samples = math::floor(horizon / cfg.sample_dt + 1e-9) as usize + 1;
    let ys = integrate_field_limited(
        |t, y| rhs(&MeanFieldState::from_array(*y), spec.evaluate(t)).to_array(),
        |t| cfg.step_limit(spec, t),
        init.to_array(),
        n_samples,
        cfg,
    )?;
    let times: Vec<f64> = (0..n_samples).map(|i| i as f64 * cfg.sample_dt).collect();
    let drive = times.iter().map(|&t| spec.evaluate(t)).collect();
    let states = ys.into_iter().map(MeanFieldState::from_array).collect();
    Trajectory::from_parts(times, drive, states, period)
}

/// Maximum deviations between the integrated photon/phonon numbers and
/// their causal exponential-kernel representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDeviation {
    /// `max |n_kernel - n_ode| / max n_ode` for photons.
    pub photon: f64,
    /// Same for phonons.
    pub phonon: f64,
}

/// Rebuilds `<a+a>` and `<b+b>` from the resonant-drive kernel integrals
///
/// ```text
/// n_c(t) = sqrt2     int_0^t E(t') X_c(t') exp(-2 kappa   (t - t')) dt'
/// n_m(t) = sqrt2 g_m int_0^t n_c(t') P_m(t') exp(-2 gamma_m (t - t')) dt'
/// ```
///
/// using the trapezoidal rule on the sample grid, evaluated by the O(N)
/// recurrence `I_{k+1} = I_k e^{-G dt} + dt/2 (f_k e^{-G dt} + f_{k+1})`.
/// Deviations are relative to the peak of each directly integrated series.
/// The trajectory must start from vacuum.
pub fn integral_representation_check(traj: &Trajectory, params: &OmParams) -> Result<KernelDeviation> {
    if params.delta != 0.0 {
        return Err(invalid("delta", "kernel representation holds only at resonance"));
    }
    let dt = traj.dt();
    let n_c = traj.n_photon();
    let n_m = traj.n_phonon();
    let photon_src: Vec<f64> = traj
        .drive
        .iter()
        .zip(&traj.states)
        .map(|(e, s)| math::SQRT_2 * e * s.x_c)
        .collect();
    let phonon_src: Vec<f64> = n_c
        .iter()
        .zip(&traj.states)
        .map(|(n, s)| math::SQRT_2 * params.g_m * n * s.p_m)
        .collect();
    let photon = max_relative_deviation(&exp_kernel_trapezoid(&photon_src, 2.0 * params.kappa, dt), &n_c);
    let phonon = max_relative_deviation(
        &exp_kernel_trapezoid(&phonon_src, 2.0 * params.gamma_m(), dt),
        &n_m,
    );
    Ok(KernelDeviation { photon, phonon })
}

/// Trapezoidal `int_0^{t_k} f(t') e^{-rate (t_k - t')} dt'` on a uniform grid.
pub fn exp_kernel_trapezoid(f: &[f64], rate: f64, dt: f64) -> Vec<f64> {
    let decay = math::exp(-rate * dt);
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    if f.is_empty() {
        return out;
    }
    out.push(0.0);
    for w in f.windows(2) {
        acc = acc * decay + 0.5 * dt * (w[0] * decay + w[1]);
        out.push(acc);
    }
    out
}

fn max_relative_deviation(approx: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let worst = approx
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, r)| m.max((a - r).abs()));
    if worst == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        worst / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> OmParams {
        OmParams::default()
    }

    #[test]
    fn vacuum_stays_vacuum() {
        let spec = DriveSpec::Sinusoidal { e0: 0.0, omega: 1.0 };
        let p = params();
        let cfg = IntegratorConfig::for_drive(&p, &spec).unwrap();
        let traj = integrate(&p, &spec, MeanFieldState::VACUUM, 3.0 * spec.period().unwrap(), &cfg).unwrap();
        assert!(traj.states.iter().all(|s| *s == MeanFieldState::VACUUM));
        assert_eq!(traj.len(), 6001);
    }

    #[test]
    fn linear_cavity_matches_closed_form() {
        // g_m = 0, resonant: X_c' = -kappa X_c + sqrt2 E0 sin(w t)
        let p = OmParams { g_m: 0.0, ..params() };
        let (e0, w) = (1e5, 1.3);
        let spec = DriveSpec::Sinusoidal { e0, omega: w };
        let cfg = IntegratorConfig::for_drive(&p, &spec).unwrap();
        let traj = integrate(&p, &spec, MeanFieldState::VACUUM, 4.0 * spec.period().unwrap(), &cfg).unwrap();
        let k = p.kappa;
        let peak = math::SQRT_2 * e0 / math::sqrt(k * k + w * w);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = math::SQRT_2 * e0 * (k * math::sin(w * t) - w * math::cos(w * t) + w * math::exp(-k * t))
                / (k * k + w * w);
            assert!((s.x_c - exact).abs() <= cfg.rel_tol * 1e2 * peak, "t = {t}");
            assert_eq!(s.p_c, 0.0);
            assert_eq!(s.x_m, 0.0);
        }
    }

    #[test]
    fn decoupled_mechanics_stay_at_rest() {
        let p = OmParams { g_m: 0.0, ..params() };
        let spec = DriveSpec::GaussianTrain { e0: 1e6, t_s: 5.0, sigma: 0.5 };
        let cfg = IntegratorConfig::for_drive(&p, &spec).unwrap();
        let traj = integrate(&p, &spec, MeanFieldState::VACUUM, 20.0, &cfg).unwrap();
        assert!(traj.states.iter().all(|s| s.x_m == 0.0 && s.p_m == 0.0));
    }

    #[test]
    fn undriven_photon_number_decays_monotonically() {
        let p = params();
        let spec = DriveSpec::Sinusoidal { e0: 0.0, omega: 1.0 };
        let cfg = IntegratorConfig::for_drive(&p, &spec).unwrap();
        let init = MeanFieldState::new(3e3, -2e3, 10.0, 5.0);
        let traj = integrate(&p, &spec, init, spec.period().unwrap(), &cfg).unwrap();
        let n = traj.n_photon();
        assert!(n.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn defaults_follow_drive() {
        let p = params();
        let g = DriveSpec::GaussianTrain { e0: 1e6, t_s: 5.0, sigma: 0.5 };
        let cfg = IntegratorConfig::for_drive(&p, &g).unwrap();
        assert_relative_eq!(cfg.max_step, 0.05);
        assert_relative_eq!(cfg.pulse_step.unwrap(), 0.05);
        let narrow = DriveSpec::GaussianTrain { e0: 1e6, t_s: 5.0, sigma: 0.1 };
        let c = IntegratorConfig::for_drive(&p, &narrow).unwrap();
        assert_relative_eq!(c.pulse_step.unwrap(), 0.02);
        // first window is [4.2, 5.8]
        assert_relative_eq!(c.step_limit(&narrow, 0.0), 0.05);
        assert_relative_eq!(c.step_limit(&narrow, 4.19), 0.01, max_relative = 1e-9);
        assert_relative_eq!(c.step_limit(&narrow, 5.0), 0.02);
        assert_relative_eq!(c.step_limit(&narrow, 6.0), 0.05);
        assert_relative_eq!(cfg.sample_dt, 10.0 / 2000.0);
        assert_relative_eq!(cfg.abs_tol, 1.0);
        let s = DriveSpec::Sinusoidal { e0: 10.0, omega: 1.0 };
        let cfg = IntegratorConfig::for_drive(&p, &s).unwrap();
        assert_relative_eq!(cfg.max_step, math::TAU / 200.0);
        assert_relative_eq!(cfg.abs_tol, 1e-5);
        let over = IntegratorSettings { rel_tol: Some(1e-6), ..Default::default() };
        assert_eq!(IntegratorConfig::resolve(&p, &s, &over).unwrap().rel_tol, 1e-6);
        let bad = IntegratorSettings { rel_tol: Some(2.0), ..Default::default() };
        assert!(IntegratorConfig::resolve(&p, &s, &bad).is_err());
    }

    #[test]
    fn short_horizon_rejected() {
        let p = params();
        let s = DriveSpec::Sinusoidal { e0: 1.0, omega: 1.0 };
        let cfg = IntegratorConfig::for_drive(&p, &s).unwrap();
        assert!(matches!(
            integrate(&p, &s, MeanFieldState::VACUUM, 1.0, &cfg),
            Err(Error::ShortTrajectory { .. })
        ));
    }

    #[test]
    fn blow_up_reports_failure_time() {
        let cfg = IntegratorConfig::uniform(1e-9, 1e-9, 0.1, 0.01);
        // y' = y^2 from y = 1 explodes at t = 1
        let r = integrate_field(|_, y| [y[0] * y[0], 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], 201, &cfg);
        match r {
            Err(Error::StepSizeUnderflow { t }) | Err(Error::NonFinite { t }) => {
                assert!((t - 1.0).abs() < 1e-2, "t = {t}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exp_kernel_recurrence_matches_direct_sum() {
        let dt = 0.01;
        let f: Vec<f64> = (0..300).map(|i| math::sin(i as f64 * dt * 3.0) + 1.0).collect();
        let rec = exp_kernel_trapezoid(&f, 2.0, dt);
        for k in [0usize, 1, 57, 299] {
            let mut direct = 0.0;
            for j in 0..k {
                let a = f[j] * math::exp(-2.0 * (k - j) as f64 * dt);
                let b = f[j + 1] * math::exp(-2.0 * (k - j - 1) as f64 * dt);
                direct += 0.5 * dt * (a + b);
            }
            assert_relative_eq!(rec[k], direct, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_check_vacuum_is_exact() {
        let p = params();
        let spec = DriveSpec::Sinusoidal { e0: 0.0, omega: 1.0 };
        let cfg = IntegratorConfig::for_drive(&p, &spec).unwrap();
        let traj = integrate(&p, &spec, MeanFieldState::VACUUM, spec.period().unwrap(), &cfg).unwrap();
        let d = integral_representation_check(&traj, &p).unwrap();
        assert_eq!((d.photon, d.phonon), (0.0, 0.0));
        let detuned = OmParams { delta: 0.1, ..p };
        assert!(integral_representation_check(&traj, &detuned).is_err());
    }

    #[test]
    fn kernel_check_phonon_exact_without_coupling() {
        let p = OmParams { g_m: 0.0, ..params() };
        let spec = DriveSpec::GaussianTrain { e0: 1e4, t_s: 5.0, sigma: 0.5 };
        let cfg = IntegratorConfig::for_drive(&p, &spec).unwrap();
        let traj = integrate(&p, &spec, MeanFieldState::VACUUM, 20.0, &cfg).unwrap();
        let d = integral_representation_check(&traj, &p).unwrap();
        assert_eq!(d.phonon, 0.0);
        assert!(d.photon < 1e-3);
    }

    #[test]
    fn uniform_grid_enforced() {
        let s = alloc::vec![MeanFieldState::VACUUM; 3];
        assert!(Trajectory::from_parts(alloc::vec![0.0, 1.0, 2.5], alloc::vec![0.0; 3], s.clone(), 1.0).is_err());
        assert!(Trajectory::from_parts(alloc::vec![0.0, 1.0, 2.0], alloc::vec![0.0; 2], s.clone(), 1.0).is_err());
        assert!(Trajectory::from_parts(alloc::vec![0.0, 0.1, 0.2], alloc::vec![0.0; 3], s, 1.0).is_ok());
    }
}
