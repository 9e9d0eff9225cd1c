//! Energy-storing classification of a normalized loop.

use super::LoopCurve;

/// Default input and output thresholds.
pub const DEFAULT_STORING_EPS: f64 = 0.02;

/// Whether the output persists while the input vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Storing {
    /// The loop avoids the origin: output stays finite at zero input.
    EnergyStoring,
    /// The output returns to zero somewhere the input does.
    NonStoring,
    /// The input never comes close to zero.
    Indeterminate,
}

impl Storing {
    /// Label used in reports.
    pub fn as_str(self) -> &'static str {
        match self {
            Storing::EnergyStoring => "energy-storing",
            Storing::NonStoring => "non-storing",
            Storing::Indeterminate => "indeterminate",
        }
    }
}

/// Labels a normalized loop by the smallest output seen where `|x| < eps_x`.
pub fn classify_storing(curve: &LoopCurve, eps_x: f64, eps_y: f64) -> Storing {
    let min_y = curve
        .points
        .iter()
        .filter(|p| p[0].abs() < eps_x)
        .map(|p| p[1].abs())
        .fold(None, |m: Option<f64>, y| Some(m.map_or(y, |m| m.min(y))));
    match min_y {
        None => Storing::Indeterminate,
        Some(y) if y < eps_y => Storing::NonStoring,
        Some(_) => Storing::EnergyStoring,
    }
}
