//! Plateau and jump detection in a phonon-number series.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;

/// Consecutive window medians closer than this (relative) belong to one plateau.
pub const PLATEAU_TOLERANCE: f64 = 0.05;
/// Relative change above which a step between windows is a jump.
pub const JUMP_THRESHOLD: f64 = 0.20;
/// Minimum number of windows in a plateau.
pub const MIN_PLATEAU_WINDOWS: usize = 2;
/// Minimum number of windows in the series.
pub const MIN_WINDOWS: usize = 3;

/// A run of nearly equal window medians.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Plateau {
    /// Start of the first window.
    pub t_start: f64,
    /// End of the last window.
    pub t_end: f64,
    /// Median of the window medians in the run.
    pub level: f64,
    /// Number of windows.
    pub windows: usize,
}

/// A sudden change between two consecutive windows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Jump {
    /// Boundary between the two windows.
    pub time: f64,
    /// Median before the jump.
    pub from: f64,
    /// Median after the jump.
    pub to: f64,
}

/// Plateaus and jumps found in a series.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JumpReport {
    /// Per-window medians.
    pub medians: Vec<f64>,
    /// Detected plateaus in time order.
    pub plateaus: Vec<Plateau>,
    /// Detected jumps in time order.
    pub jumps: Vec<Jump>,
}

/// Splits `series` (sampled at `times`) into windows of duration `window`,
/// takes the median of each, and groups the medians into plateaus.
///
/// Relative differences use `max(|a|, |b|, 1e-3 max|median|)` as scale so a
/// series that sits at zero does not produce spurious jumps.
pub fn detect_jumps(times: &[f64], series: &[f64], window: f64) -> Result<JumpReport> {
    if times.len() != series.len() {
        return Err(invalid("series", "times and values differ in length"));
    }
    if !(window.is_finite() && window > 0.0) {
        return Err(invalid("window", "must be finite and > 0"));
    }
    if times.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: times.len(),
        });
    }
    let t0 = times[0];
    let count = math::floor((times[times.len() - 1] - t0) / window + 1e-9) as usize;
    if count < MIN_WINDOWS {
        return Err(Error::TooFewSamples {
            needed: MIN_WINDOWS,
            got: count,
        });
    }
    let mut medians = Vec::with_capacity(count);
    let mut buf = Vec::new();
    let mut idx = 0;
    for k in 0..count {
        let end = t0 + (k + 1) as f64 * window;
        buf.clear();
        while idx < times.len() && times[idx] < end - 1e-12 * window {
            buf.push(series[idx]);
            idx += 1;
        }
        if buf.is_empty() {
            return Err(invalid("window", "shorter than the sample spacing"));
        }
        medians.push(math::median(&buf));
    }

    let floor = 1e-3 * medians.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rel = |a: f64, b: f64| {
        let scale = a.abs().max(b.abs()).max(floor);
        if scale == 0.0 {
            0.0
        } else {
            (a - b).abs() / scale
        }
    };

    let mut plateaus = Vec::new();
    let mut jumps = Vec::new();
    let mut run_start = 0;
    let close_run = |start: usize, end: usize, plateaus: &mut Vec<Plateau>| {
        let len = end - start + 1;
        if len >= MIN_PLATEAU_WINDOWS {
            plateaus.push(Plateau {
                t_start: t0 + start as f64 * window,
                t_end: t0 + (end + 1) as f64 * window,
                level: math::median(&medians[start..=end]),
                windows: len,
            });
        }
    };
    for k in 1..count {
        let d = rel(medians[k - 1], medians[k]);
        if d >= PLATEAU_TOLERANCE {
            close_run(run_start, k - 1, &mut plateaus);
            run_start = k;
        }
        if d > JUMP_THRESHOLD {
            jumps.push(Jump {
                time: t0 + k as f64 * window,
                from: medians[k - 1],
                to: medians[k],
            });
        }
    }
    close_run(run_start, count - 1, &mut plateaus);
    Ok(JumpReport {
        medians,
        plateaus,
        jumps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn staircase_with_three_levels() {
        let t = grid(3001, 0.01);
        let y: Vec<f64> = t
            .iter()
            .map(|&t| if t < 10.0 { 1.0 } else if t < 20.0 { 3.0 } else { 7.0 })
            .collect();
        let r = detect_jumps(&t, &y, 1.0).unwrap();
        assert_eq!(r.plateaus.len(), 3);
        assert_eq!(r.jumps.len(), 2);
        let levels: Vec<f64> = r.plateaus.iter().map(|p| p.level).collect();
        assert_eq!(levels, [1.0, 3.0, 7.0]);
        assert!((r.jumps[0].time - 10.0).abs() < 1e-9);
    }

    #[test]
    fn fast_ramp_has_no_plateau() {
        let t = grid(2001, 0.01);
        let y: Vec<f64> = t.iter().map(|&t| math::exp(0.1 * t)).collect();
        let r = detect_jumps(&t, &y, 1.0).unwrap();
        assert!(r.plateaus.is_empty());
        assert!(r.jumps.is_empty());
    }

    #[test]
    fn slow_ramp_is_at_most_one_plateau() {
        let t = grid(2001, 0.01);
        let y: Vec<f64> = t.iter().map(|&t| 10.0 + 0.1 * t).collect();
        let r = detect_jumps(&t, &y, 1.0).unwrap();
        assert!(r.plateaus.len() <= 1);
        assert!(r.jumps.is_empty());
    }

    #[test]
    fn noise_spikes_do_not_break_plateaus() {
        let t = grid(1001, 0.01);
        let y: Vec<f64> = (0..t.len()).map(|i| if i % 17 == 0 { 50.0 } else { 2.0 }).collect();
        let r = detect_jumps(&t, &y, 1.0).unwrap();
        assert_eq!(r.plateaus.len(), 1);
    }

    #[test]
    fn rejects_short_series() {
        let t = grid(11, 0.1);
        assert!(detect_jumps(&t, &[0.0; 11], 1.0).is_err());
        assert!(detect_jumps(&t, &[0.0; 10], 0.1).is_err());
    }
}
