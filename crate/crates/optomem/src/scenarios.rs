//! Canned configurations: characteristic regimes and the known optima.

use optomem_core::analysis::OutputSelector;
use optomem_core::{DriveKind, DriveSpec, GaConfig, OmParams, SearchSpace};

use crate::config::{AnalysisSection, OptimizerSection, RunConfig, SimulationSection, SCHEMA_VERSION};

/// A named drive with the observable it is judged on.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub drive: DriveSpec,
    pub output: OutputSelector,
    pub cycles: usize,
}

impl Scenario {
    /// Run configuration with default physics (`omega_m = 20`, `Q = 1e4`,
    /// `g_m = 1e-5`, resonant drive).
    pub fn config(&self) -> RunConfig {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            params: OmParams::default(),
            drive: self.drive.clone(),
            integrator: Default::default(),
            initial: Default::default(),
            simulation: SimulationSection { cycles: self.cycles },
            analysis: AnalysisSection {
                output: self.output,
                ..Default::default()
            },
            optimizer: None,
            sweep: None,
            output_dir: None,
        }
    }
}

const fn gaussian(e0: f64, t_s: f64, sigma: f64) -> DriveSpec {
    DriveSpec::GaussianTrain { e0, t_s, sigma }
}

/// One optimum from the form-factor table.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub scenario: Scenario,
    /// Optimal drive parameters in `DriveKind::parameter_names` order.
    pub theta: Vec<f64>,
    /// Reported optimal form factor.
    pub form_factor: f64,
}

impl Optimum {
    pub fn kind(&self) -> DriveKind {
        self.scenario.drive.kind()
    }

    /// Each optimal parameter scaled by `[0.1, 10]`.
    pub fn search_space(&self) -> SearchSpace {
        SearchSpace::around(self.kind(), &self.theta, 0.1, 10.0).expect("table parameters are valid")
    }

    /// Scenario config with a GA section over [`Self::search_space`].
    pub fn optimizer_config(&self, seed: u64) -> RunConfig {
        let mut cfg = self.scenario.config();
        cfg.optimizer = Some(OptimizerSection {
            bounds: self.search_space().bounds,
            ga: GaConfig::with_seed(seed),
        });
        cfg
    }
}

/// The six optimized drives (three shapes, photon and phonon outputs).
pub fn optima() -> Vec<Optimum> {
    use OutputSelector::{Phonon, Photon};
    let rows: [(&'static str, DriveKind, OutputSelector, Vec<f64>, f64); 6] = [
        ("optimum-gaussian-photon", DriveKind::GaussianTrain, Photon, vec![5.717e5, 16.119, 0.313], 0.925),
        ("optimum-gaussian-phonon", DriveKind::GaussianTrain, Phonon, vec![2.015e5, 30.974, 0.224], 0.863),
        ("optimum-sinusoidal-photon", DriveKind::Sinusoidal, Photon, vec![8.745e4, 1.055], 0.450),
        ("optimum-sinusoidal-phonon", DriveKind::Sinusoidal, Phonon, vec![7.895e4, 1.918], 0.441),
        ("optimum-square-photon", DriveKind::SquareSinusoidal, Photon, vec![7.498e5, 1.644], 0.965),
        ("optimum-square-phonon", DriveKind::SquareSinusoidal, Phonon, vec![2.173e5, 2.794], 0.963),
    ];
    rows.into_iter()
        .map(|(name, kind, output, theta, form_factor)| Optimum {
            scenario: Scenario {
                name,
                drive: DriveSpec::from_theta(kind, &theta).expect("table parameters are valid"),
                output,
                cycles: 5,
            },
            theta,
            form_factor,
        })
        .collect()
}

/// Narrow non-adiabatic Gaussian train: loops through the origin.
pub fn non_storing() -> Scenario {
    Scenario { name: "gaussian-non-storing", drive: gaussian(1e6, 5.0, 0.5), output: OutputSelector::Photon, cycles: 5 }
}

/// Square-sinusoidal drive at `omega = 0.075 omega_m`: output persists at zero input.
pub fn storing() -> Scenario {
    Scenario {
        name: "square-storing",
        drive: DriveSpec::SquareSinusoidal { e0: 1e6, omega: 0.075 * 20.0 },
        output: OutputSelector::Photon,
        cycles: 5,
    }
}

/// Narrow fast pulses, single loop.
pub fn single_loop() -> Scenario {
    Scenario { name: "single-loop", drive: gaussian(1e4, 5.0, 0.5), output: OutputSelector::Photon, cycles: 5 }
}

/// Broader fast pulses.
pub fn double_loop() -> Scenario {
    Scenario { name: "double-loop", drive: gaussian(1e4, 5.0, 1.25), output: OutputSelector::Photon, cycles: 5 }
}

/// Slow wide pulses (adiabatic).
pub fn adiabatic() -> Scenario {
    Scenario { name: "adiabatic", drive: gaussian(1e4, 50.0, 12.5), output: OutputSelector::Photon, cycles: 5 }
}

/// Strong broad pulses, multi-loop.
pub fn n_loop() -> Scenario {
    Scenario { name: "n-loop", drive: gaussian(3e6, 5.0, 1.25), output: OutputSelector::Photon, cycles: 5 }
}

/// Very strong pulses, phonon staircase.
pub fn phonon_jumps() -> Scenario {
    Scenario { name: "phonon-jumps", drive: gaussian(6e6, 5.0, 1.25), output: OutputSelector::Phonon, cycles: 20 }
}

/// Every canned scenario by name.
pub fn all() -> Vec<Scenario> {
    let mut v = vec![non_storing(), storing(), single_loop(), double_loop(), adiabatic(), n_loop(), phonon_jumps()];
    v.extend(optima().into_iter().map(|t| t.scenario));
    v
}

/// Looks a scenario up by name.
pub fn by_name(name: &str) -> Option<Scenario> {
    all().into_iter().find(|s| s.name == name)
}

/// Config for a named scenario; table rows come with an optimizer section
/// seeded with 1.
pub fn config_by_name(name: &str) -> Option<RunConfig> {
    match optima().into_iter().find(|t| t.scenario.name == name) {
        Some(t) => Some(t.optimizer_config(1)),
        None => by_name(name).map(|s| s.config()),
    }
}
