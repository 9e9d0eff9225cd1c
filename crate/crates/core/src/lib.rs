//! Mean-field simulation and memory metrics for pulsed cavity optomechanics.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! - [`model`]: parameters, the four-quadrature mean-field state and its
//!   right-hand side, photon and phonon observables.
//! - [`drives`]: periodic control fields (Gaussian trains, sinusoidal,
//!   square-sinusoidal, regularized delta kick, tabulated).
//! - [`integrator`]: adaptive Dormand-Prince 5(4) integration onto a uniform
//!   sample grid, plus the exponential-kernel consistency check.
//! - [`analysis`]: input-output loops, area, perimeter, form factor,
//!   self-intersections, energy-storing labels and phonon plateaus.
//! - [`optimizer`]: the cycle-averaged form-factor cost and a seeded real-coded
//!   genetic algorithm.
//!
//! All rates are in units of the cavity damping `kappa`, times in `1/kappa`.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod drives;
mod error;
pub mod integrator;
mod math;
pub mod model;
pub mod optimizer;

pub use error::{Error, Result};

pub use analysis::{CycleMetrics, LoopCurve, OutputSelector, Storing};
pub use drives::{DriveKind, DriveSpec};
pub use integrator::{integrate, IntegratorConfig, Trajectory};
pub use model::{MeanFieldState, OmParams};
pub use optimizer::{ga_optimize, FormFactorObjective, GaConfig, OptResult, SearchSpace};
