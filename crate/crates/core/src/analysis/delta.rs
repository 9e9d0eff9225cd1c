//! Loop area of a single regularized kick on the bare cavity.

use alloc::vec::Vec;

use super::{loop_area, LoopCurve};
use crate::drives::DriveSpec;
use crate::error::{invalid, Result};
use crate::integrator::{integrate_field, IntegratorConfig};
use crate::math::{self, SQRT_2};
use crate::model::{self, MeanFieldState, OmParams};

/// Kick widths used for the extrapolation, as fractions of `t_s`.
pub const DELTA_PULSE_SIGMA_FRACTIONS: [f64; 3] = [1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0];

/// Output samples per kick width.
const SAMPLES_PER_SIGMA: f64 = 20.0;

/// Closed-form loop area `2 sqrt2 kappa omega_c e0^3 exp(-2 kappa t_s)`.
pub fn delta_pulse_analytic_area(params: &OmParams, e0: f64, t_s: f64) -> f64 {
    let k = params.kappa;
    2.0 * SQRT_2 * k * params.omega_c * e0 * e0 * e0 * math::exp(-2.0 * k * t_s)
}

/// Two-level Richardson extrapolation of values at `h, h/2, h/4` assuming
/// `A(h) = A0 + c h + d h^2 + ...`.
pub fn richardson_halving(a: [f64; 3]) -> f64 {
    let r1 = 2.0 * a[1] - a[0];
    let r2 = 2.0 * a[2] - a[1];
    (4.0 * r2 - r1) / 3.0
}

/// Constant term `b` of `A(h) = a/h + b + c h` through values at `h, h/2, h/4`.
pub fn finite_part_halving(a: [f64; 3]) -> f64 {
    let b1 = 2.0 * a[0] - a[1];
    let b2 = 2.0 * a[1] - a[2];
    2.0 * b2 - b1
}

/// Outcome of the kick-area comparison.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DeltaPulseReport {
    /// Kick widths, largest first.
    pub sigmas: [f64; 3],
    /// Unnormalized loop areas at each width.
    pub areas: [f64; 3],
    /// Richardson value at zero width.
    pub numeric: f64,
    /// Closed-form area.
    pub analytic: f64,
    /// `|numeric - analytic| / |analytic|`; infinite when only the analytic
    /// value vanishes.
    pub relative_error: f64,
    /// Width-independent part of the areas after removing a `1/sigma` term.
    pub finite_part: f64,
    /// Set when `4 kappa t_s < 10`, so the cavity has not relaxed by `2 t_s`.
    pub closure_warning: bool,
}

/// Simulates one kick of area `e0` at `t_s` on the bare cavity (`g_m = 0`)
/// for each width in [`DELTA_PULSE_SIGMA_FRACTIONS`], measures the raw area
/// of `(E, omega_c n)` over `[0, 2 t_s]` and extrapolates to zero width.
pub fn verify_delta_pulse(params: &OmParams, e0: f64, t_s: f64) -> Result<DeltaPulseReport> {
    if params.g_m != 0.0 {
        return Err(invalid("g_m", "kick check needs the bare cavity (g_m = 0)"));
    }
    if !(params.kappa >= 0.0 && params.kappa.is_finite()) {
        return Err(invalid("kappa", "must be finite and >= 0"));
    }
    if !(e0.is_finite() && e0 > 0.0) {
        return Err(invalid("e0", "must be finite and > 0"));
    }
    if !(t_s.is_finite() && t_s > 0.0) {
        return Err(invalid("t_s", "must be finite and > 0"));
    }
    let closure_warning = 4.0 * params.kappa * t_s < 10.0;
    if closure_warning {
        log::warn!("cavity has not relaxed by 2 t_s (4 kappa t_s = {})", 4.0 * params.kappa * t_s);
    }
    let mut sigmas = [0.0; 3];
    let mut areas = [0.0; 3];
    for (k, frac) in DELTA_PULSE_SIGMA_FRACTIONS.iter().enumerate() {
        sigmas[k] = frac * t_s;
        areas[k] = kick_area(params, e0, t_s, sigmas[k])?;
    }
    let numeric = richardson_halving(areas);
    let analytic = delta_pulse_analytic_area(params, e0, t_s);
    let diff = (numeric - analytic).abs();
    let relative_error = if analytic != 0.0 {
        diff / analytic.abs()
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(DeltaPulseReport {
        sigmas,
        areas,
        numeric,
        analytic,
        relative_error,
        finite_part: finite_part_halving(areas),
        closure_warning,
    })
}

/// Raw loop area for one kick width.
pub fn kick_area(params: &OmParams, e0: f64, t_s: f64, sigma: f64) -> Result<f64> {
    let spec = DriveSpec::DeltaPulse {
        e0,
        t_s,
        sigma: Some(sigma),
    };
    spec.validate()?;
    let period = 2.0 * t_s;
    let steps = math::ceil(SAMPLES_PER_SIGMA * period / sigma).max(2000.0) as usize;
    let dt = period / steps as f64;
    let cfg = IntegratorConfig::uniform(1e-10, 1e-9 * spec.amplitude().max(1.0), sigma / 5.0, dt);
    let ys = integrate_field(
        |t, y| model::rhs(&MeanFieldState::from_array(*y), params, spec.evaluate(t)).to_array(),
        MeanFieldState::VACUUM.to_array(),
        steps + 1,
        &cfg,
    )?;
    let points: Vec<[f64; 2]> = ys
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let s = MeanFieldState::from_array(*y);
            [spec.evaluate(i as f64 * dt), params.omega_c * model::photon_number(&s)]
        })
        .collect();
    loop_area(&LoopCurve::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bare() -> OmParams {
        OmParams {
            g_m: 0.0,
            ..OmParams::default()
        }
    }

    #[test]
    fn analytic_examples() {
        let p = bare();
        let a = delta_pulse_analytic_area(&p, 1.0, 3.0);
        assert_relative_eq!(a, 2.0 * SQRT_2 * 20.0 * math::exp(-6.0), max_relative = 1e-14);
        assert_relative_eq!(delta_pulse_analytic_area(&p, 2.0, 3.0), 8.0 * a, max_relative = 1e-14);
        let zero = OmParams { kappa: 0.0, ..p };
        assert_eq!(delta_pulse_analytic_area(&zero, 1.0, 3.0), 0.0);
    }

    #[test]
    fn analytic_vanishes_with_kappa() {
        let mut last = f64::INFINITY;
        for k in [1.0, 0.1, 0.01] {
            let p = OmParams { kappa: k, ..bare() };
            let a = delta_pulse_analytic_area(&p, 1.0, 3.0 / k);
            assert!(a < last);
            last = a;
        }
    }

    #[test]
    fn richardson_is_exact_for_quadratics() {
        let f = |h: f64| 3.0 - 2.0 * h + 5.0 * h * h;
        assert_relative_eq!(richardson_halving([f(0.4), f(0.2), f(0.1)]), 3.0, epsilon = 1e-12);
        let g = |h: f64| 7.0 / h - 1.5 + 4.0 * h;
        assert_relative_eq!(finite_part_halving([g(0.4), g(0.2), g(0.1)]), -1.5, epsilon = 1e-12);
    }

    #[test]
    fn requires_bare_cavity() {
        assert!(verify_delta_pulse(&OmParams::default(), 1.0, 3.0).is_err());
    }

    #[test]
    fn regularized_area_follows_width_asymptotics() {
        // For a kick of width s on a relaxed cavity the area grows like
        // omega_c e0^3 [1/(2 s sqrt(pi)) - kappa (2/3 + sqrt3/(2 pi))].
        let p = bare();
        let r = verify_delta_pulse(&p, 1.0, 3.0).unwrap();
        let c = 2.0 / 3.0 + math::sqrt(3.0) / (2.0 * math::PI);
        let errors: Vec<f64> = r
            .sigmas
            .iter()
            .zip(r.areas)
            .map(|(s, a)| {
                let oracle = p.omega_c * (1.0 / (2.0 * s * math::sqrt(math::PI)) - c);
                (a - oracle).abs() / oracle
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
        assert!(errors[2] < 2e-3, "{errors:?}");
        assert_relative_eq!(r.finite_part, -p.omega_c * c, max_relative = 2e-2);
    }
}
