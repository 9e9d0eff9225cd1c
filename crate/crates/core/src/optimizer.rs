//! Cycle-averaged form-factor cost and a seeded real-coded genetic algorithm.
//!
//! The GA evaluates whole generations through a caller-supplied batch
//! function, so the caller may fan evaluations out to threads. All random
//! numbers of a generation are drawn before its batch is dispatched, which
//! keeps runs reproducible for any worker count.

use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analysis::{self, Normalization, OutputSelector};
use crate::drives::{DriveKind, DriveSpec};
use crate::error::{invalid, Error, Result};
use crate::integrator::{integrate, IntegratorConfig, IntegratorSettings};
use crate::model::{MeanFieldState, OmParams};

/// Form factor above which a sinusoidal loop breaks the pinched-loop ceiling.
pub const PINCHED_CEILING: f64 = 0.52;

/// Bounds of one search variable.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ParamBound {
    /// Drive parameter name.
    pub name: String,
    /// Lower bound.
    pub lower: f64,
    /// Upper bound.
    pub upper: f64,
}

/// Box-shaped search domain over drive parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SearchSpace {
    /// One entry per dimension, in the drive's parameter order.
    pub bounds: Vec<ParamBound>,
}

impl SearchSpace {
    /// Builds a space from `(name, lower, upper)` triples.
    pub fn new(bounds: &[(&str, f64, f64)]) -> Result<Self> {
        let space = Self {
            bounds: bounds
                .iter()
                .map(|(n, l, u)| ParamBound {
                    name: String::from(*n),
                    lower: *l,
                    upper: *u,
                })
                .collect(),
        };
        space.validate()?;
        Ok(space)
    }

    /// The box `[f_lo * c, f_hi * c]` around a center point of a drive.
    pub fn around(kind: DriveKind, center: &[f64], f_lo: f64, f_hi: f64) -> Result<Self> {
        let names = kind.parameter_names();
        if names.len() != center.len() {
            return Err(Error::InvalidTheta(alloc::format!(
                "{kind} expects {} parameters, got {}",
                names.len(),
                center.len()
            )));
        }
        let b: Vec<(&str, f64, f64)> = names
            .iter()
            .zip(center)
            .map(|(n, c)| (*n, c * f_lo, c * f_hi))
            .collect();
        Self::new(&b)
    }

    /// Number of dimensions.
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Checks finiteness and `lower < upper`.
    pub fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(invalid("bounds", "search space is empty"));
        }
        for b in &self.bounds {
            if !(b.lower.is_finite() && b.upper.is_finite() && b.lower < b.upper) {
                return Err(invalid("bounds", alloc::format!("`{}` needs finite lower < upper", b.name)));
            }
        }
        Ok(())
    }

    /// Checks that the names match a drive's tunable parameters.
    pub fn validate_for(&self, kind: DriveKind) -> Result<()> {
        self.validate()?;
        let names = kind.parameter_names();
        if !(2..=3).contains(&names.len()) {
            return Err(invalid("drive", alloc::format!("{kind} drives cannot be optimized")));
        }
        if names.len() != self.dim() || names.iter().zip(&self.bounds).any(|(n, b)| *n != b.name) {
            return Err(invalid(
                "bounds",
                alloc::format!("{kind} drives need bounds for {names:?} in that order"),
            ));
        }
        Ok(())
    }

    /// True when every coordinate lies within its bounds.
    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(&self.bounds)
                .all(|(v, b)| *v >= b.lower && *v <= b.upper)
    }

    fn clamp(&self, theta: &mut [f64]) {
        for (v, b) in theta.iter_mut().zip(&self.bounds) {
            *v = v.clamp(b.lower, b.upper);
        }
    }
}

/// Genetic-algorithm settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GaConfig {
    /// Individuals per generation; `None` means `50 + 10 d`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub population: Option<usize>,
    /// Number of generations after the initial population.
    #[cfg_attr(feature = "serde", serde(default = "ga_defaults::generations"))]
    pub generations: usize,
    /// Mutation standard deviation as a fraction of each bound range.
    #[cfg_attr(feature = "serde", serde(default = "ga_defaults::mutation_sigma"))]
    pub mutation_sigma: f64,
    /// Fraction of the initial mutation scale removed linearly by the last
    /// generation (0 keeps it constant).
    #[cfg_attr(feature = "serde", serde(default = "ga_defaults::mutation_shrink"))]
    pub mutation_shrink: f64,
    /// Probability that a child is a blend of two parents.
    #[cfg_attr(feature = "serde", serde(default = "ga_defaults::crossover_rate"))]
    pub crossover_rate: f64,
    /// Blend-crossover extension factor.
    #[cfg_attr(feature = "serde", serde(default = "ga_defaults::blend_alpha"))]
    pub blend_alpha: f64,
    /// Tournament size for parent selection.
    #[cfg_attr(feature = "serde", serde(default = "ga_defaults::tournament_size"))]
    pub tournament_size: usize,
    /// Best individuals copied unchanged into the next generation.
    #[cfg_attr(feature = "serde", serde(default = "ga_defaults::elitism"))]
    pub elitism: usize,
    /// RNG seed.
    pub seed: u64,
    /// Cycles averaged in the cost.
    #[cfg_attr(feature = "serde", serde(default = "ga_defaults::cycles"))]
    pub cycles: usize,
    /// Leading cycles simulated but left out of the cost.
    #[cfg_attr(feature = "serde", serde(default))]
    pub skip_cycles: usize,
}

#[cfg(feature = "serde")]
mod ga_defaults {
    pub fn generations() -> usize {
        100
    }
    pub fn mutation_sigma() -> f64 {
        0.1
    }
    pub fn mutation_shrink() -> f64 {
        1.0
    }
    pub fn crossover_rate() -> f64 {
        0.8
    }
    pub fn blend_alpha() -> f64 {
        0.5
    }
    pub fn tournament_size() -> usize {
        3
    }
    pub fn elitism() -> usize {
        2
    }
    pub fn cycles() -> usize {
        5
    }
}

impl GaConfig {
    /// Defaults with the given seed.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            population: None,
            generations: 100,
            mutation_sigma: 0.1,
            mutation_shrink: 1.0,
            crossover_rate: 0.8,
            blend_alpha: 0.5,
            tournament_size: 3,
            elitism: 2,
            seed,
            cycles: 5,
            skip_cycles: 0,
        }
    }

    /// Population size for a `d`-dimensional search.
    pub fn population_for(&self, d: usize) -> usize {
        self.population.unwrap_or(50 + 10 * d)
    }

    /// Checks the GA invariants for a `d`-dimensional search.
    pub fn validate(&self, d: usize) -> Result<()> {
        let pop = self.population_for(d);
        if pop < 4 {
            return Err(invalid("population", "must be >= 4"));
        }
        if self.generations < 1 {
            return Err(invalid("generations", "must be >= 1"));
        }
        if !(self.mutation_sigma > 0.0 && self.mutation_sigma < 1.0) {
            return Err(invalid("mutation_sigma", "must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.mutation_shrink) {
            return Err(invalid("mutation_shrink", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(invalid("crossover_rate", "must lie in [0, 1]"));
        }
        if !(self.blend_alpha >= 0.0 && self.blend_alpha.is_finite()) {
            return Err(invalid("blend_alpha", "must be finite and >= 0"));
        }
        if self.tournament_size < 1 {
            return Err(invalid("tournament_size", "must be >= 1"));
        }
        if self.elitism >= pop {
            return Err(invalid("elitism", "must be smaller than the population"));
        }
        if self.cycles < 1 {
            return Err(invalid("cycles", "must be >= 1"));
        }
        Ok(())
    }
}

/// Result of a GA run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OptResult {
    /// Best parameter vector found.
    pub theta_star: Vec<f64>,
    /// Cost of `theta_star`.
    pub best_cost: f64,
    /// Best cost after the initial population and after each generation.
    pub history: Vec<f64>,
    /// Per-cycle form factors at `theta_star` (filled by
    /// [`FormFactorObjective::finish`]).
    pub per_cycle_f: Vec<f64>,
    /// Number of objective evaluations.
    pub evaluations: usize,
    /// Sinusoidal evaluations with a closed loop above [`PINCHED_CEILING`].
    pub ceiling_violations: usize,
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn sanitize(cost: f64) -> f64 {
    if cost.is_nan() {
        0.0
    } else {
        cost
    }
}

fn tournament(rng: &mut ChaCha8Rng, costs: &[f64], size: usize) -> usize {
    let mut best = rng.gen_range(0..costs.len());
    for _ in 1..size {
        let c = rng.gen_range(0..costs.len());
        if costs[c] < costs[best] {
            best = c;
        }
    }
    best
}

/// Minimizes a cost over `space`.
///
/// `batch` receives every new individual of a generation and returns their
/// costs in the same order. Lower is better; NaN costs count as 0.
pub fn ga_optimize<B>(space: &SearchSpace, cfg: &GaConfig, mut batch: B) -> Result<OptResult>
where
    B: FnMut(&[Vec<f64>]) -> Vec<f64>,
{
    space.validate()?;
    let d = space.dim();
    cfg.validate(d)?;
    let pop_size = cfg.population_for(d);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut pop: Vec<Vec<f64>> = (0..pop_size)
        .map(|_| space.bounds.iter().map(|b| uniform(&mut rng, b.lower, b.upper)).collect())
        .collect();
    let mut costs = evaluate(&mut batch, &pop)?;
    let mut evaluations = pop.len();

    let mut order: Vec<usize> = (0..pop_size).collect();
    let rank = |order: &mut Vec<usize>, costs: &[f64]| {
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    };
    rank(&mut order, &costs);
    let mut best = (pop[order[0]].clone(), costs[order[0]]);
    let mut history = alloc::vec![best.1];

    for gen in 1..=cfg.generations {
        let shrink = 1.0 - cfg.mutation_shrink * (gen - 1) as f64 / cfg.generations as f64;
        let mut next: Vec<Vec<f64>> = order[..cfg.elitism].iter().map(|&i| pop[i].clone()).collect();
        let mut next_costs: Vec<f64> = order[..cfg.elitism].iter().map(|&i| costs[i]).collect();
        let mut children = Vec::with_capacity(pop_size - cfg.elitism);
        while next.len() + children.len() < pop_size {
            let a = &pop[tournament(&mut rng, &costs, cfg.tournament_size)];
            let b = &pop[tournament(&mut rng, &costs, cfg.tournament_size)];
            let mut child: Vec<f64> = if rng.gen::<f64>() < cfg.crossover_rate {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let (lo, hi) = (x.min(*y), x.max(*y));
                        let ext = cfg.blend_alpha * (hi - lo);
                        uniform(&mut rng, lo - ext, hi + ext)
                    })
                    .collect()
            } else {
                a.clone()
            };
            for (v, bound) in child.iter_mut().zip(&space.bounds) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += z * cfg.mutation_sigma * shrink * (bound.upper - bound.lower);
            }
            space.clamp(&mut child);
            children.push(child);
        }
        let child_costs = evaluate(&mut batch, &children)?;
        evaluations += children.len();
        next.extend(children);
        next_costs.extend(child_costs);
        pop = next;
        costs = next_costs;
        rank(&mut order, &costs);
        if costs[order[0]] < best.1 {
            best = (pop[order[0]].clone(), costs[order[0]]);
        }
        history.push(best.1);
    }

    Ok(OptResult {
        theta_star: best.0,
        best_cost: best.1,
        history,
        per_cycle_f: Vec::new(),
        evaluations,
        ceiling_violations: 0,
    })
}

fn evaluate<B>(batch: &mut B, pop: &[Vec<f64>]) -> Result<Vec<f64>>
where
    B: FnMut(&[Vec<f64>]) -> Vec<f64>,
{
    let costs = batch(pop);
    if costs.len() != pop.len() {
        return Err(invalid("objective", "batch returned the wrong number of costs"));
    }
    Ok(costs.into_iter().map(sanitize).collect())
}

/// The cost `C = -(1/N) sum_n F_n` over `N` simulated cycles of a drive.
#[derive(Debug)]
pub struct FormFactorObjective {
    /// System parameters.
    pub params: OmParams,
    /// Drive family searched over.
    pub kind: DriveKind,
    /// Observable on the output axis.
    pub output: OutputSelector,
    /// Normalization scope.
    pub normalization: Normalization,
    /// Cycles averaged.
    pub cycles: usize,
    /// Leading cycles simulated but not averaged.
    pub skip_cycles: usize,
    /// Integrator overrides.
    pub integrator: IntegratorSettings,
    /// Initial state.
    pub initial: MeanFieldState,
    violations: AtomicUsize,
}

impl FormFactorObjective {
    /// Photon-number objective from vacuum with default integration settings.
    pub fn new(params: OmParams, kind: DriveKind, output: OutputSelector, cycles: usize) -> Self {
        Self {
            params,
            kind,
            output,
            normalization: Normalization::PerCycle,
            cycles,
            skip_cycles: 0,
            integrator: IntegratorSettings::default(),
            initial: MeanFieldState::VACUUM,
            violations: AtomicUsize::new(0),
        }
    }

    /// Form factor of each averaged cycle.
    pub fn per_cycle(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let spec = DriveSpec::from_theta(self.kind, theta)?;
        let period = spec.period()?;
        let total = self.cycles + self.skip_cycles;
        let cfg = IntegratorConfig::resolve(&self.params, &spec, &self.integrator)?;
        let traj = integrate(&self.params, &spec, self.initial, total as f64 * period, &cfg)?;
        let curves = analysis::normalize(&traj, self.output, &self.params, self.normalization)?;
        let kept: Vec<&analysis::LoopCurve> = curves.iter().skip(self.skip_cycles).take(self.cycles).collect();
        let f = kept
            .iter()
            .map(|c| analysis::form_factor(c))
            .collect::<Result<Vec<f64>>>()?;
        if self.kind == DriveKind::Sinusoidal {
            // transient loops that never close are not pinched periodic orbits
            let worst = kept
                .iter()
                .zip(&f)
                .filter(|(c, v)| c.closed && **v > PINCHED_CEILING)
                .map(|(_, v)| *v)
                .reduce(f64::max);
            if let Some(worst) = worst {
                self.violations.fetch_add(1, Ordering::Relaxed);
                log::warn!("closed sinusoidal loop with F = {worst:.4} above the pinched ceiling at {theta:?}");
            }
        }
        Ok(f)
    }

    /// `-mean F`, or 0 when the simulation or analysis fails.
    pub fn cost(&self, theta: &[f64]) -> f64 {
        match self.per_cycle(theta) {
            Ok(f) if !f.is_empty() => -f.iter().sum::<f64>() / f.len() as f64,
            Ok(_) => 0.0,
            Err(e) => {
                log::debug!("penalized theta {theta:?}: {e}");
                0.0
            }
        }
    }

    /// Number of evaluations so far that broke the pinched-loop ceiling.
    pub fn ceiling_violations(&self) -> usize {
        self.violations.load(Ordering::Relaxed)
    }

    /// Attaches per-cycle form factors and the violation count to a result.
    pub fn finish(&self, mut result: OptResult) -> OptResult {
        let before = self.ceiling_violations();
        result.per_cycle_f = self.per_cycle(&result.theta_star).unwrap_or_default();
        // the re-evaluation above is bookkeeping, not a search evaluation
        self.violations.store(before, Ordering::Relaxed);
        result.ceiling_violations = before;
        result
    }
}
