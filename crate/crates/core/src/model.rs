//! Physical parameters, mean-field state and equations of motion.
//!
//! The state holds the quadrature expectation values `X_c, P_c, X_m, P_m`
//! of the cavity and mechanical modes. With `E(t)` the drive amplitude,
//! `Delta` the detuning and `gamma_m = omega_m / Q`:
//!
//! ```text
//! dX_c/dt = -kappa X_c + Delta P_c - sqrt2 g_m X_m P_c + sqrt2 E(t)
//! dP_c/dt = -kappa P_c - Delta X_c + sqrt2 g_m X_m X_c
//! dX_m/dt = -gamma_m X_m + omega_m P_m
//! dP_m/dt = -gamma_m P_m - omega_m X_m + g_m / sqrt2 (X_c^2 + P_c^2)
//! ```

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::integrator::Trajectory;
use crate::math::{self, SQRT_2};

/// Physical constants of the cavity-mechanics system, in units of `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct OmParams {
    /// Detuning `omega_c - omega_L`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub delta: f64,
    /// Mechanical frequency.
    #[cfg_attr(feature = "serde", serde(default = "defaults::omega_m"))]
    pub omega_m: f64,
    /// Optomechanical coupling.
    #[cfg_attr(feature = "serde", serde(default = "defaults::g_m"))]
    pub g_m: f64,
    /// Cavity damping rate (the unit rate).
    #[cfg_attr(feature = "serde", serde(default = "defaults::kappa"))]
    pub kappa: f64,
    /// Mechanical quality factor. Always given explicitly in config files.
    pub quality: f64,
    /// Cavity frequency; only scales the cavity-energy observable.
    #[cfg_attr(feature = "serde", serde(default = "defaults::omega_c"))]
    pub omega_c: f64,
}

#[cfg(feature = "serde")]
mod defaults {
    pub fn omega_m() -> f64 {
        20.0
    }
    pub fn g_m() -> f64 {
        1e-5
    }
    pub fn kappa() -> f64 {
        1.0
    }
    pub fn omega_c() -> f64 {
        20.0
    }
}

impl Default for OmParams {
    /// `omega_m = 20`, `g_m = 1e-5`, `Q = 1e4`, resonant drive, `omega_c = 20`.
    fn default() -> Self {
        Self {
            delta: 0.0,
            omega_m: 20.0,
            g_m: 1e-5,
            kappa: 1.0,
            quality: 1e4,
            omega_c: 20.0,
        }
    }
}

impl OmParams {
    /// Checks the hard invariants. A mechanical damping that is not small
    /// compared to `kappa` only logs a warning.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta", self.delta),
            ("omega_m", self.omega_m),
            ("g_m", self.g_m),
            ("kappa", self.kappa),
            ("quality", self.quality),
            ("omega_c", self.omega_c),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.kappa <= 0.0 {
            return Err(invalid("kappa", "must be > 0"));
        }
        if self.omega_m <= 0.0 {
            return Err(invalid("omega_m", "must be > 0"));
        }
        if self.quality <= 0.0 {
            return Err(invalid("quality", "must be > 0"));
        }
        if self.g_m < 0.0 {
            return Err(invalid("g_m", "must be >= 0"));
        }
        let gamma = self.gamma_m();
        if gamma > 0.1 * self.kappa {
            log::warn!(
                "mechanical damping gamma_m = {gamma} is not small compared to kappa = {}",
                self.kappa
            );
        }
        Ok(())
    }

    /// Mechanical damping rate `omega_m / Q`.
    pub fn gamma_m(&self) -> f64 {
        derive_gamma_m(self)
    }
}

/// Mechanical damping rate `gamma_m = omega_m / Q`.
pub fn derive_gamma_m(params: &OmParams) -> f64 {
    params.omega_m / params.quality
}

/// Mean values of the cavity and mechanical quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct MeanFieldState {
    /// Cavity position quadrature `X_c`.
    pub x_c: f64,
    /// Cavity momentum quadrature `P_c`.
    pub p_c: f64,
    /// Mechanical position quadrature `X_m`.
    pub x_m: f64,
    /// Mechanical momentum quadrature `P_m`.
    pub p_m: f64,
}

impl MeanFieldState {
    /// The vacuum state `(0, 0, 0, 0)`.
    pub const VACUUM: Self = Self::new(0.0, 0.0, 0.0, 0.0);

    /// Builds a state from its four quadratures.
    pub const fn new(x_c: f64, p_c: f64, x_m: f64, p_m: f64) -> Self {
        Self { x_c, p_c, x_m, p_m }
    }

    /// Components as `[X_c, P_c, X_m, P_m]`.
    pub const fn to_array(self) -> [f64; 4] {
        [self.x_c, self.p_c, self.x_m, self.p_m]
    }

    /// Inverse of [`MeanFieldState::to_array`].
    pub const fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Right-hand side of the mean-field equations for drive amplitude `e_t`.
pub fn rhs(state: &MeanFieldState, params: &OmParams, e_t: f64) -> MeanFieldState {
    let MeanFieldState { x_c, p_c, x_m, p_m } = *state;
    let kappa = params.kappa;
    let delta = params.delta;
    let g = params.g_m;
    let gamma = params.gamma_m();
    let wm = params.omega_m;
    MeanFieldState {
        x_c: -kappa * x_c + delta * p_c - SQRT_2 * g * x_m * p_c + SQRT_2 * e_t,
        p_c: -kappa * p_c - delta * x_c + SQRT_2 * g * x_m * x_c,
        x_m: -gamma * x_m + wm * p_m,
        p_m: -gamma * p_m - wm * x_m + g / SQRT_2 * (x_c * x_c + p_c * p_c),
    }
}

/// Mean photon number `(X_c^2 + P_c^2) / 2`.
#[inline]
pub fn photon_number(state: &MeanFieldState) -> f64 {
    0.5 * (state.x_c * state.x_c + state.p_c * state.p_c)
}

/// Mean phonon number `(X_m^2 + P_m^2) / 2`.
#[inline]
pub fn phonon_number(state: &MeanFieldState) -> f64 {
    0.5 * (state.x_m * state.x_m + state.p_m * state.p_m)
}

/// Pointwise residual of the forced damped oscillator identity obeyed by
/// the mechanical displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorResidual {
    /// Times of the interior samples where the stencil applies.
    pub times: Vec<f64>,
    /// `X_m'' + 2 gamma X_m' + (omega_m^2 + gamma^2) X_m - sqrt2 g_m omega_m n`.
    pub residual: Vec<f64>,
    /// `||residual||_2` divided by the largest `||term||_2` of the identity;
    /// zero when every term vanishes.
    pub relative: f64,
}

/// Evaluates the oscillator identity along a trajectory.
///
/// Derivatives use fourth-order central differences, so the first and last
/// two samples are dropped.
pub fn oscillator_residual(traj: &Trajectory, params: &OmParams) -> Result<OscillatorResidual> {
    let n = traj.len();
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: n });
    }
    let dt = traj.dt();
    let gamma = params.gamma_m();
    let w0sq = params.omega_m * params.omega_m + gamma * gamma;
    let force = SQRT_2 * params.g_m * params.omega_m;
    let x: Vec<f64> = traj.states.iter().map(|s| s.x_m).collect();

    let mut times = Vec::with_capacity(n - 4);
    let mut residual = Vec::with_capacity(n - 4);
    // squared norms of: acceleration, damping, restoring, forcing
    let mut norms = [0.0f64; 4];
    let mut rnorm = 0.0;
    for i in 2..n - 2 {
        let d1 = (x[i - 2] - 8.0 * x[i - 1] + 8.0 * x[i + 1] - x[i + 2]) / (12.0 * dt);
        let d2 = (-x[i - 2] + 16.0 * x[i - 1] - 30.0 * x[i] + 16.0 * x[i + 1] - x[i + 2])
            / (12.0 * dt * dt);
        let terms = [
            d2,
            2.0 * gamma * d1,
            w0sq * x[i],
            -force * photon_number(&traj.states[i]),
        ];
        let r: f64 = terms.iter().sum();
        for (acc, t) in norms.iter_mut().zip(terms) {
            *acc += t * t;
        }
        rnorm += r * r;
        times.push(traj.times[i]);
        residual.push(r);
    }
    let largest = norms.iter().copied().fold(0.0, f64::max);
    let relative = if largest > 0.0 {
        math::sqrt(rnorm / largest)
    } else {
        0.0
    };
    Ok(OscillatorResidual {
        times,
        residual,
        relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_params() -> OmParams {
        OmParams {
            delta: 0.0,
            omega_m: 20.0,
            g_m: 1e-5,
            kappa: 1.0,
            quality: 1e4,
            omega_c: 20.0,
        }
    }

    #[test]
    fn gamma_m_examples() {
        let mut p = default_params();
        assert_relative_eq!(p.gamma_m(), 2e-3, max_relative = 1e-15);
        p.quality = 1e6;
        assert_relative_eq!(p.gamma_m(), 2e-5, max_relative = 1e-15);
        p.omega_m = 1.0;
        p.quality = 1.0;
        assert_eq!(derive_gamma_m(&p), 1.0);
    }

    #[test]
    fn rhs_vacuum_fixed_point() {
        let d = rhs(&MeanFieldState::VACUUM, &default_params(), 0.0);
        assert_eq!(d, MeanFieldState::VACUUM);
    }

    #[test]
    fn rhs_drive_only() {
        let e0 = 1e6;
        let d = rhs(&MeanFieldState::VACUUM, &default_params(), e0);
        assert_eq!(d, MeanFieldState::new(SQRT_2 * e0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn rhs_hand_evaluated() {
        // Direct substitution at (1,1,1,1), Delta = 0, kappa = 1, omega_m = 20,
        // gamma_m = 2e-3, g_m = 1e-5, no drive.
        let d = rhs(&MeanFieldState::new(1.0, 1.0, 1.0, 1.0), &default_params(), 0.0);
        let s2 = core::f64::consts::SQRT_2;
        assert_relative_eq!(d.x_c, -1.0 - s2 * 1e-5, max_relative = 1e-15);
        assert_relative_eq!(d.p_c, -1.0 + s2 * 1e-5, max_relative = 1e-15);
        assert_relative_eq!(d.x_m, -2e-3 + 20.0, max_relative = 1e-15);
        assert_relative_eq!(d.p_m, -2e-3 - 20.0 + 1e-5 / s2 * 2.0, max_relative = 1e-15);
    }

    #[test]
    fn rhs_keeps_detuning_terms() {
        let p = OmParams {
            delta: 0.5,
            g_m: 0.0,
            ..default_params()
        };
        let d = rhs(&MeanFieldState::new(2.0, 3.0, 0.0, 0.0), &p, 0.0);
        assert_relative_eq!(d.x_c, -2.0 + 1.5);
        assert_relative_eq!(d.p_c, -3.0 - 1.0);
    }

    #[test]
    fn number_examples() {
        let s2 = core::f64::consts::SQRT_2;
        assert_eq!(photon_number(&MeanFieldState::new(0.0, 0.0, 5.0, 5.0)), 0.0);
        assert_relative_eq!(photon_number(&MeanFieldState::new(s2, 0.0, 0.0, 0.0)), 1.0);
        assert_eq!(photon_number(&MeanFieldState::new(3.0, 4.0, 0.0, 0.0)), 12.5);
        assert_eq!(phonon_number(&MeanFieldState::new(7.0, 7.0, 0.0, 0.0)), 0.0);
        assert_relative_eq!(phonon_number(&MeanFieldState::new(0.0, 0.0, s2, 0.0)), 1.0);
        assert_eq!(phonon_number(&MeanFieldState::new(0.0, 0.0, 1.0, 1.0)), 1.0);
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut p = default_params();
        assert!(p.validate().is_ok());
        p.quality = 0.0;
        assert!(p.validate().is_err());
        p = default_params();
        p.kappa = -1.0;
        assert!(p.validate().is_err());
        p = default_params();
        p.g_m = -1e-5;
        assert!(p.validate().is_err());
        p = default_params();
        p.omega_m = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn residual_needs_five_samples() {
        let traj = Trajectory::from_parts(
            alloc::vec![0.0, 0.1, 0.2, 0.3],
            alloc::vec![0.0; 4],
            alloc::vec![MeanFieldState::VACUUM; 4],
            1.0,
        )
        .unwrap();
        assert_eq!(
            oscillator_residual(&traj, &default_params()),
            Err(Error::TooFewSamples { needed: 5, got: 4 })
        );
    }

    #[test]
    fn residual_zero_for_constant_zero_displacement() {
        let n = 50;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
        let states = alloc::vec![MeanFieldState::new(3.0, 1.0, 0.0, 0.0); n];
        let traj = Trajectory::from_parts(times, alloc::vec![0.0; n], states, 1.0).unwrap();
        let p = OmParams {
            g_m: 0.0,
            ..default_params()
        };
        let r = oscillator_residual(&traj, &p).unwrap();
        assert_eq!(r.relative, 0.0);
        assert!(r.residual.iter().all(|v| *v == 0.0));
    }
}
