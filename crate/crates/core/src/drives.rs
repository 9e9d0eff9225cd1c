//! Periodic control fields `E(t)` and their fundamental periods.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{self, PI, TAU};

/// Gaussian pulses are summed only within this many widths of their center.
pub const GAUSSIAN_CUTOFF_SIGMAS: f64 = 8.0;

/// Default width of the regularized delta kick, as a fraction of the kick time.
pub const DELTA_SIGMA_FRACTION: f64 = 1.0 / 200.0;

/// Shape of a drive, without its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DriveKind {
    /// Gaussian pulses at odd multiples of the separation.
    GaussianTrain,
    /// `E0 sin(omega t)`.
    Sinusoidal,
    /// `E0 sin^2(omega t)`.
    SquareSinusoidal,
    /// Unit-area Gaussian of vanishing width, scaled by `E0`.
    DeltaPulse,
    /// Linearly interpolated user samples.
    Tabulated,
}

impl DriveKind {
    /// Name used in config files and reports.
    pub fn as_str(self) -> &'static str {
        match self {
            DriveKind::GaussianTrain => "gaussian_train",
            DriveKind::Sinusoidal => "sinusoidal",
            DriveKind::SquareSinusoidal => "square_sinusoidal",
            DriveKind::DeltaPulse => "delta_pulse",
            DriveKind::Tabulated => "tabulated",
        }
    }

    /// Names of the tunable parameters, in optimizer order.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            DriveKind::GaussianTrain => &["e0", "t_s", "sigma"],
            DriveKind::Sinusoidal | DriveKind::SquareSinusoidal => &["e0", "omega"],
            DriveKind::DeltaPulse => &["e0", "t_s", "sigma"],
            DriveKind::Tabulated => &[],
        }
    }
}

impl core::fmt::Display for DriveKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A periodic control field.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum DriveSpec {
    /// `sum_{n odd >= 1} E0 exp(-(t - n t_s)^2 / (2 sigma^2))`, period `2 t_s`.
    GaussianTrain {
        /// Pulse amplitude.
        e0: f64,
        /// Pulse separation.
        t_s: f64,
        /// Pulse width.
        sigma: f64,
    },
    /// `E0 sin(omega t)`, period `2 pi / omega`.
    Sinusoidal {
        /// Amplitude.
        e0: f64,
        /// Angular frequency.
        omega: f64,
    },
    /// `E0 sin^2(omega t)`, period `pi / omega`.
    SquareSinusoidal {
        /// Amplitude.
        e0: f64,
        /// Angular frequency.
        omega: f64,
    },
    /// Kick of integrated area `e0` at `t_s`, realized as a normalized
    /// Gaussian of width `sigma`. Period `2 t_s`.
    DeltaPulse {
        /// Integrated area of the kick.
        e0: f64,
        /// Kick time.
        t_s: f64,
        /// Regularization width; defaults to `t_s / 200`.
        #[cfg_attr(feature = "serde", serde(default))]
        sigma: Option<f64>,
    },
    /// Piecewise-linear interpolation of `(time, value)` samples. With a
    /// period the table is repeated; otherwise the end values are held.
    Tabulated {
        /// Samples with strictly increasing times.
        samples: Vec<(f64, f64)>,
        /// Declared period, required by cycle-based analysis.
        #[cfg_attr(feature = "serde", serde(default))]
        period: Option<f64>,
    },
}

impl DriveSpec {
    /// Shape of the drive.
    pub fn kind(&self) -> DriveKind {
        match self {
            DriveSpec::GaussianTrain { .. } => DriveKind::GaussianTrain,
            DriveSpec::Sinusoidal { .. } => DriveKind::Sinusoidal,
            DriveSpec::SquareSinusoidal { .. } => DriveKind::SquareSinusoidal,
            DriveSpec::DeltaPulse { .. } => DriveKind::DeltaPulse,
            DriveSpec::Tabulated { .. } => DriveKind::Tabulated,
        }
    }

    /// Checks positivity and ordering constraints.
    pub fn validate(&self) -> Result<()> {
        fn nonneg(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(name, "must be finite and >= 0"))
            }
        }
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, "must be finite and > 0"))
            }
        }
        match self {
            DriveSpec::GaussianTrain { e0, t_s, sigma } => {
                nonneg("e0", *e0)?;
                positive("t_s", *t_s)?;
                positive("sigma", *sigma)
            }
            DriveSpec::Sinusoidal { e0, omega } | DriveSpec::SquareSinusoidal { e0, omega } => {
                nonneg("e0", *e0)?;
                positive("omega", *omega)
            }
            DriveSpec::DeltaPulse { e0, t_s, sigma } => {
                nonneg("e0", *e0)?;
                positive("t_s", *t_s)?;
                if let Some(s) = sigma {
                    positive("sigma", *s)?;
                }
                Ok(())
            }
            DriveSpec::Tabulated { samples, period } => {
                if samples.len() < 2 {
                    return Err(invalid("samples", "need at least two samples"));
                }
                if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(invalid("samples", "must be finite"));
                }
                if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(invalid("samples", "times must be strictly increasing"));
                }
                if let Some(p) = period {
                    positive("period", *p)?;
                }
                Ok(())
            }
        }
    }

    /// Peak amplitude scale, used to size absolute tolerances. For a delta
    /// kick this is the peak of the regularized Gaussian.
    pub fn amplitude(&self) -> f64 {
        match self {
            DriveSpec::GaussianTrain { e0, .. }
            | DriveSpec::Sinusoidal { e0, .. }
            | DriveSpec::SquareSinusoidal { e0, .. } => *e0,
            DriveSpec::DeltaPulse { e0, .. } => {
                let sigma = self.sigma().unwrap_or(1.0);
                e0 / (sigma * math::sqrt(TAU))
            }
            DriveSpec::Tabulated { samples, .. } => {
                samples.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
            }
        }
    }

    /// Width of the sharpest feature, for pulsed drives.
    pub fn sigma(&self) -> Option<f64> {
        match self {
            DriveSpec::GaussianTrain { sigma, .. } => Some(*sigma),
            DriveSpec::DeltaPulse { t_s, sigma, .. } => {
                Some(sigma.unwrap_or(t_s * DELTA_SIGMA_FRACTION))
            }
            _ => None,
        }
    }

    /// The first pulse window `[start, end]` that ends after `t`, for drives
    /// made of localized pulses. Windows extend
    /// [`GAUSSIAN_CUTOFF_SIGMAS`] widths around each center.
    pub fn next_pulse_window(&self, t: f64) -> Option<(f64, f64)> {
        let sigma = self.sigma()?;
        let reach = GAUSSIAN_CUTOFF_SIGMAS * sigma;
        let center = match self {
            DriveSpec::GaussianTrain { t_s, .. } => {
                let mut n = math::ceil((t - reach) / t_s).max(1.0);
                if n % 2.0 == 0.0 {
                    n += 1.0;
                }
                n * t_s
            }
            DriveSpec::DeltaPulse { t_s, .. } => *t_s,
            _ => return None,
        };
        (center + reach > t).then_some((center - reach, center + reach))
    }

    /// Drive amplitude at time `t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        match self {
            DriveSpec::GaussianTrain { e0, t_s, sigma } => gaussian_train(*e0, *t_s, *sigma, t),
            DriveSpec::Sinusoidal { e0, omega } => e0 * math::sin(omega * t),
            DriveSpec::SquareSinusoidal { e0, omega } => {
                let s = math::sin(omega * t);
                e0 * s * s
            }
            DriveSpec::DeltaPulse { e0, t_s, .. } => {
                let sigma = self.sigma().unwrap_or(1.0);
                let u = (t - t_s) / sigma;
                e0 / (sigma * math::sqrt(TAU)) * math::exp(-0.5 * u * u)
            }
            DriveSpec::Tabulated { samples, period } => {
                let t = match period {
                    Some(p) => samples[0].0 + math::rem_euclid(t - samples[0].0, *p),
                    None => t,
                };
                interpolate(samples, t)
            }
        }
    }

    /// Fundamental period of the drive.
    pub fn period(&self) -> Result<f64> {
        match self {
            DriveSpec::GaussianTrain { t_s, .. } | DriveSpec::DeltaPulse { t_s, .. } => {
                Ok(2.0 * t_s)
            }
            DriveSpec::Sinusoidal { omega, .. } => Ok(TAU / omega),
            DriveSpec::SquareSinusoidal { omega, .. } => Ok(PI / omega),
            DriveSpec::Tabulated { period, .. } => period.ok_or(Error::MissingPeriod),
        }
    }

    /// Builds a drive of `kind` from an optimizer parameter vector, in the
    /// order of [`DriveKind::parameter_names`].
    pub fn from_theta(kind: DriveKind, theta: &[f64]) -> Result<Self> {
        let need = kind.parameter_names().len();
        if need == 0 {
            return Err(Error::InvalidTheta(alloc::format!(
                "{kind} drives have no tunable parameters"
            )));
        }
        if theta.len() != need {
            return Err(Error::InvalidTheta(alloc::format!(
                "{kind} expects {need} parameters, got {}",
                theta.len()
            )));
        }
        let spec = match kind {
            DriveKind::GaussianTrain => DriveSpec::GaussianTrain {
                e0: theta[0],
                t_s: theta[1],
                sigma: theta[2],
            },
            DriveKind::Sinusoidal => DriveSpec::Sinusoidal {
                e0: theta[0],
                omega: theta[1],
            },
            DriveKind::SquareSinusoidal => DriveSpec::SquareSinusoidal {
                e0: theta[0],
                omega: theta[1],
            },
            DriveKind::DeltaPulse => DriveSpec::DeltaPulse {
                e0: theta[0],
                t_s: theta[1],
                sigma: Some(theta[2]),
            },
            DriveKind::Tabulated => unreachable!(),
        };
        spec.validate()
            .map_err(|e| Error::InvalidTheta(alloc::format!("{e}")))?;
        Ok(spec)
    }

    /// Sets one named parameter, as used by grid sweeps.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut out = self.clone();
        let slot = match (&mut out, name) {
            (DriveSpec::GaussianTrain { e0, .. }, "e0")
            | (DriveSpec::Sinusoidal { e0, .. }, "e0")
            | (DriveSpec::SquareSinusoidal { e0, .. }, "e0")
            | (DriveSpec::DeltaPulse { e0, .. }, "e0") => e0,
            (DriveSpec::GaussianTrain { t_s, .. }, "t_s")
            | (DriveSpec::DeltaPulse { t_s, .. }, "t_s") => t_s,
            (DriveSpec::GaussianTrain { sigma, .. }, "sigma") => sigma,
            (DriveSpec::DeltaPulse { sigma, .. }, "sigma") => {
                *sigma = Some(value);
                return Ok(out);
            }
            (DriveSpec::Sinusoidal { omega, .. }, "omega")
            | (DriveSpec::SquareSinusoidal { omega, .. }, "omega") => omega,
            _ => {
                return Err(Error::InvalidParameter {
                    name: "grid axis",
                    reason: alloc::format!("`{name}` is not a parameter of {}", self.kind()),
                })
            }
        };
        *slot = value;
        Ok(out)
    }
}

fn gaussian_train(e0: f64, t_s: f64, sigma: f64, t: f64) -> f64 {
    let reach = GAUSSIAN_CUTOFF_SIGMAS * sigma;
    let lo = math::ceil((t - reach) / t_s).max(1.0);
    let hi = math::floor((t + reach) / t_s);
    if hi < lo {
        return 0.0;
    }
    let mut n = lo as i64;
    if n % 2 == 0 {
        n += 1;
    }
    let hi = hi as i64;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut sum = 0.0;
    while n <= hi {
        let d = t - n as f64 * t_s;
        sum += math::exp(-d * d * inv);
        n += 2;
    }
    e0 * sum
}

fn interpolate(samples: &[(f64, f64)], t: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let k = samples.partition_point(|(ts, _)| *ts <= t);
    let (t0, v0) = samples[k - 1];
    let (t1, v1) = samples[k];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn sinusoidal_peak() {
        let d = DriveSpec::Sinusoidal { e0: 3.0, omega: 1.7 };
        assert_relative_eq!(d.evaluate(PI / (2.0 * 1.7)), 3.0, max_relative = 1e-15);
    }

    #[test]
    fn square_sinusoidal_zero_at_half_turn() {
        let d = DriveSpec::SquareSinusoidal { e0: 1e6, omega: 2.0 };
        assert!(d.evaluate(PI / 2.0).abs() < 1e-24 * 1e6 + 1e-20);
        assert_relative_eq!(d.period().unwrap(), PI / 2.0);
    }

    #[test]
    fn gaussian_train_peak_has_negligible_tails() {
        let t_s = 5.0;
        let d = DriveSpec::GaussianTrain { e0: 2.0, t_s, sigma: t_s / 10.0 };
        // Nearest neighbours sit 2 t_s away: exp(-(2 t_s)^2 / (2 sigma^2)) = e^-200.
        assert_relative_eq!(d.evaluate(t_s), 2.0, max_relative = 1e-8);
        assert_relative_eq!(d.evaluate(3.0 * t_s), 2.0, max_relative = 1e-8);
        // even multiples carry no pulse
        assert!(d.evaluate(2.0 * t_s) < 1e-80);
    }

    #[test]
    fn gaussian_train_starts_at_first_odd_pulse() {
        let d = DriveSpec::GaussianTrain { e0: 1.0, t_s: 5.0, sigma: 1.25 };
        assert_eq!(d.evaluate(0.0), math::exp(-25.0 / (2.0 * 1.5625)));
        let broad = DriveSpec::GaussianTrain { e0: 1.0, t_s: 1.0, sigma: 1.0 };
        let direct: f64 = (0..10)
            .map(|k| {
                let n = (2 * k + 1) as f64;
                let d = 4.0 - n;
                if d.abs() <= 8.0 {
                    math::exp(-d * d / 2.0)
                } else {
                    0.0
                }
            })
            .sum();
        assert_relative_eq!(broad.evaluate(4.0), direct, max_relative = 1e-14);
    }

    #[test]
    fn pulse_windows() {
        let g = DriveSpec::GaussianTrain { e0: 1.0, t_s: 5.0, sigma: 0.1 };
        assert_eq!(g.next_pulse_window(0.0), Some((4.2, 5.8)));
        assert_eq!(g.next_pulse_window(5.0), Some((4.2, 5.8)));
        let w = g.next_pulse_window(6.0).unwrap();
        assert_relative_eq!(w.0, 14.2);
        assert_relative_eq!(w.1, 15.8);
        let d = DriveSpec::DeltaPulse { e0: 1.0, t_s: 3.0, sigma: Some(0.1) };
        assert!(d.next_pulse_window(4.0).is_none());
        assert!(DriveSpec::Sinusoidal { e0: 1.0, omega: 1.0 }.next_pulse_window(0.0).is_none());
    }

    #[test]
    fn periods() {
        let g = DriveSpec::GaussianTrain { e0: 1.0, t_s: 5.0, sigma: 0.5 };
        assert_eq!(g.period().unwrap(), 10.0);
        let s = DriveSpec::Sinusoidal { e0: 1.0, omega: 1.055 };
        assert_relative_eq!(s.period().unwrap(), TAU / 1.055);
        let q = DriveSpec::SquareSinusoidal { e0: 1.0, omega: 2.0 };
        assert_relative_eq!(q.period().unwrap(), PI / 2.0);
        let dp = DriveSpec::DeltaPulse { e0: 1.0, t_s: 3.0, sigma: None };
        assert_eq!(dp.period().unwrap(), 6.0);
        let tab = DriveSpec::Tabulated { samples: vec![(0.0, 0.0), (1.0, 1.0)], period: None };
        assert_eq!(tab.period(), Err(Error::MissingPeriod));
    }

    #[test]
    fn delta_pulse_integrates_to_e0() {
        let t_s = 3.0;
        for frac in [50.0, 100.0, 200.0] {
            let d = DriveSpec::DeltaPulse { e0: 1.7, t_s, sigma: Some(t_s / frac) };
            // composite Simpson over one period
            let n = 200_000;
            let h = 2.0 * t_s / n as f64;
            let mut s = d.evaluate(0.0) + d.evaluate(2.0 * t_s);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * d.evaluate(i as f64 * h);
            }
            assert_relative_eq!(s * h / 3.0, 1.7, max_relative = 1e-6);
        }
        let d = DriveSpec::DeltaPulse { e0: 1.0, t_s: 4.0, sigma: None };
        assert_eq!(d.sigma(), Some(0.02));
    }

    #[test]
    fn tabulated_interpolates_and_wraps() {
        let d = DriveSpec::Tabulated {
            samples: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)],
            period: Some(2.0),
        };
        assert_eq!(d.evaluate(0.5), 1.0);
        assert_eq!(d.evaluate(1.5), 1.0);
        assert_eq!(d.evaluate(2.5), 1.0);
        assert_eq!(d.amplitude(), 2.0);
        let held = DriveSpec::Tabulated { samples: vec![(0.0, 1.0), (1.0, 3.0)], period: None };
        assert_eq!(held.evaluate(5.0), 3.0);
    }

    #[test]
    fn validation() {
        assert!(DriveSpec::GaussianTrain { e0: -1.0, t_s: 1.0, sigma: 1.0 }.validate().is_err());
        assert!(DriveSpec::GaussianTrain { e0: 1.0, t_s: 1.0, sigma: 0.0 }.validate().is_err());
        assert!(DriveSpec::Sinusoidal { e0: 1.0, omega: 0.0 }.validate().is_err());
        assert!(DriveSpec::Tabulated { samples: vec![(1.0, 0.0), (0.5, 1.0)], period: None }
            .validate()
            .is_err());
        assert!(DriveSpec::Tabulated { samples: vec![(0.0, 0.0)], period: None }.validate().is_err());
    }

    #[test]
    fn theta_round_trip_and_overrides() {
        let d = DriveSpec::from_theta(DriveKind::GaussianTrain, &[1e5, 5.0, 0.5]).unwrap();
        assert_eq!(d, DriveSpec::GaussianTrain { e0: 1e5, t_s: 5.0, sigma: 0.5 });
        assert!(DriveSpec::from_theta(DriveKind::Sinusoidal, &[1.0]).is_err());
        assert!(DriveSpec::from_theta(DriveKind::Sinusoidal, &[1.0, -1.0]).is_err());
        let s = d.with_parameter("sigma", 1.25).unwrap();
        assert_eq!(s, DriveSpec::GaussianTrain { e0: 1e5, t_s: 5.0, sigma: 1.25 });
        assert!(d.with_parameter("omega", 1.0).is_err());
    }

    proptest! {
        #[test]
        fn periodicity(
            which in 0usize..3,
            e0 in 1.0f64..1e6,
            omega in 0.1f64..5.0,
            t_s in 1.0f64..20.0,
            frac in 0.02f64..0.3,
            phase in 0.0f64..1.0,
            k in 0u32..10,
        ) {
            let spec = match which {
                0 => DriveSpec::Sinusoidal { e0, omega },
                1 => DriveSpec::SquareSinusoidal { e0, omega },
                _ => DriveSpec::GaussianTrain { e0, t_s, sigma: frac * t_s },
            };
            let period = spec.period().unwrap();
            let mut t = (k as f64 + phase) * period;
            if which == 2 {
                // the train has no pulse before t_s
                t += period;
            }
            let diff = (spec.evaluate(t + period) - spec.evaluate(t)).abs();
            prop_assert!(diff < 1e-10 * e0, "diff = {diff}");
        }

        #[test]
        fn sign_structure(e0 in 0.0f64..1e6, omega in 0.1f64..5.0, t in 0.0f64..100.0) {
            let square = DriveSpec::SquareSinusoidal { e0, omega };
            let train = DriveSpec::GaussianTrain { e0, t_s: 1.0 + omega, sigma: 0.3 };
            prop_assert!(square.evaluate(t) >= 0.0);
            prop_assert!(train.evaluate(t) >= 0.0);
        }
    }

    #[test]
    fn sinusoid_changes_sign() {
        let d = DriveSpec::Sinusoidal { e0: 1.0, omega: 1.0 };
        assert!(d.evaluate(0.5 * PI) > 0.0);
        assert!(d.evaluate(1.5 * PI) < 0.0);
    }
}
