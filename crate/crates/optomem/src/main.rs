use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use optomem::commands::{self, Runtime};
use optomem::config::AnalysisSection;
use optomem::{scenarios, CliError, CliResult, RunConfig};
use optomem_core::OutputSelector;

#[derive(Parser)]
#[command(name = "optomem", version, about = "Memory loops of pulsed optomechanical systems")]
struct Cli {
    /// Worker threads for optimize and sweep (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Source {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name instead of a config file.
    #[arg(long)]
    scenario: Option<String>,
}

impl Source {
    fn load(&self) -> CliResult<RunConfig> {
        let cfg = match (&self.config, &self.scenario) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => scenarios::config_by_name(name).ok_or_else(|| {
                let names: Vec<&str> = scenarios::all().iter().map(|s| s.name).collect();
                CliError::Validation(format!("unknown scenario `{name}`; known: {}", names.join(", ")))
            })?,
            (None, None) => return Err(CliError::Validation("pass --config or --scenario".into())),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the drive and write the trajectory.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-cycle loop metrics of a trajectory CSV.
    Analyze {
        /// Trajectory written by `simulate`.
        #[arg(long)]
        trajectory: PathBuf,
        /// Drive period; otherwise taken from --config.
        #[arg(long, required_unless_present = "config")]
        period: Option<f64>,
        /// Config supplying the period, parameters and analysis options.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Observable on the loop's vertical axis (photon, phonon, cavity_energy, xc, pc, xm, pm).
        #[arg(long)]
        output: Option<String>,
        #[arg(long)]
        skip_cycles: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize the mean form factor with the genetic algorithm.
    Optimize {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate and analyze every point of a parameter grid.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Axis `name=v1,v2,...`; repeatable, added to the config's grid.
        #[arg(long)]
        grid: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the analytic checks; exits with status 3 if any fails.
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    Scenarios,
}

fn parse_output(name: &str) -> CliResult<OutputSelector> {
    const ALL: [OutputSelector; 7] = [
        OutputSelector::Photon,
        OutputSelector::Phonon,
        OutputSelector::CavityEnergy,
        OutputSelector::XC,
        OutputSelector::PC,
        OutputSelector::XM,
        OutputSelector::PM,
    ];
    ALL.into_iter()
        .find(|o| o.as_str() == name)
        .ok_or_else(|| CliError::Validation(format!("unknown output `{name}`")))
}

fn run(cli: Cli) -> CliResult<()> {
    let rt = Runtime {
        jobs: cli.jobs,
        command: std::env::args().collect::<Vec<_>>().join(" "),
    };
    match cli.command {
        Command::Simulate { source, out } => {
            let cfg = source.load()?;
            let dir = commands::output_dir(out.as_deref(), Some(&cfg), "out/simulate");
            commands::simulate(&cfg, &dir, &rt)?;
        }
        Command::Analyze {
            trajectory,
            period,
            config,
            output,
            skip_cycles,
            out,
        } => {
            let cfg = config.as_deref().map(RunConfig::load).transpose()?;
            let period = match (period, &cfg) {
                (Some(p), _) => p,
                (None, Some(c)) => c.drive.period()?,
                (None, None) => unreachable!("clap requires --period or --config"),
            };
            let params = cfg.as_ref().map(|c| c.params).unwrap_or_default();
            let mut section: AnalysisSection = cfg.as_ref().map(|c| c.analysis.clone()).unwrap_or_default();
            if let Some(o) = output {
                section.output = parse_output(&o)?;
            }
            if let Some(k) = skip_cycles {
                section.skip_cycles = k;
            }
            let dir = commands::output_dir(out.as_deref(), cfg.as_ref(), "out/analyze");
            let a = commands::analyze(&trajectory, period, &params, &section, &dir)?;
            println!(
                "mean form factor {:.6} over {} cycles, last cycle {}",
                a.mean_form_factor,
                a.averaged_cycles,
                a.storing.as_str()
            );
        }
        Command::Optimize { source, seed, out } => {
            let mut cfg = source.load()?;
            if let (Some(s), Some(opt)) = (seed, cfg.optimizer.as_mut()) {
                opt.ga.seed = s;
            }
            let dir = commands::output_dir(out.as_deref(), Some(&cfg), "out/optimize");
            let r = commands::optimize(&cfg, &dir, &rt)?;
            println!("best form factor {:.6} at {:?}", -r.best_cost, r.theta_star);
        }
        Command::Sweep { source, grid, out } => {
            let cfg = source.load()?;
            let mut axes: Vec<(String, Vec<f64>)> = cfg
                .sweep
                .as_ref()
                .map(|s| s.grid.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
                .unwrap_or_default();
            for g in &grid {
                let (name, values) = commands::parse_axis(g)?;
                axes.retain(|(n, _)| *n != name);
                axes.push((name, values));
            }
            if axes.is_empty() {
                return Err(CliError::Validation("sweep needs at least one --grid axis".into()));
            }
            let dir = commands::output_dir(out.as_deref(), Some(&cfg), "out/sweep");
            let rows = commands::sweep(&cfg, &axes, &dir, &rt)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            println!("{} grid points, {failed} failed; see {}", rows.len(), dir.join("sweep.csv").display());
        }
        Command::Verify { out } => {
            commands::verify(out.as_deref().map(Path::new))?;
        }
        Command::Scenarios => {
            for s in scenarios::all() {
                println!("{:<12} {:?}", s.name, s.drive);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
