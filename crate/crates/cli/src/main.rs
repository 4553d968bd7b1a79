//! `filament`: batch runs of the standing-wave solver, spectra, simulations and
//! relative equilibria. Each run writes CSV/JSON artifacts and a manifest.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use filament_core::Error;

use crate::commands::Status;
use crate::config::{ConfigError, RunConfig, ScenarioKind};
use crate::output::RunDir;

const EXIT_EXCISED: u8 = 2;
const EXIT_NO_CONTRACTION: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                Error::Excised { .. } => EXIT_EXCISED,
                Error::NoContraction(_)
                | Error::DefectTooLarge(_)
                | Error::SpectrumTooClose { .. }
                | Error::NewtonFailure(_)
                | Error::InitialWindow { .. }
                | Error::StateTooLarge(_) => EXIT_NO_CONTRACTION,
                Error::InvalidParameter(_) | Error::ThresholdTooLarge(_) | Error::NoEquilibria(_) => EXIT_CONFIG,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    TwoFilamentStanding,
    PolygonRotation,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues and eigenvectors of every site in the ball.
    Spectrum,
    /// Regular/singular partition and clusters.
    Classify,
    /// Solve the branch on the amplitude grid, fit the curvature, measure the surviving set.
    Branch,
    /// Closed-form curvature against the perturbation series.
    Omega2,
    /// Trace excision bands of every stage along the branch.
    Excisions,
    /// Integrate the filament system for a scenario.
    Simulate,
    /// Relative equilibria and radial orbits of the helix quadrature.
    Orbits,
    /// Traveling-wave branch on the line lattice.
    Traveling,
}

/// Every flag overrides the matching field of the configuration file.
#[derive(Debug, Parser)]
#[command(name = "filament", version, about = "Standing waves of near-parallel vortex filaments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $FILAMENT_OUT/<command>-<hash>).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Model parameter ω, the angular velocity of the rotating configuration.
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Temporal frequency for spectrum/classify (default √(1+2ω)).
    #[arg(long, global = true, allow_negative_numbers = true)]
    big_omega: Option<f64>,
    /// Ball radius for spectrum/classify.
    #[arg(long, global = true, allow_negative_numbers = true)]
    radius: Option<usize>,
    /// Singular-site threshold d₀.
    #[arg(long, global = true, allow_negative_numbers = true)]
    d0: Option<f64>,
    /// Radius of the initial Fourier ball.
    #[arg(long, global = true, allow_negative_numbers = true)]
    l0: Option<usize>,
    /// Number of ball doublings after the initial solve.
    #[arg(long, global = true, allow_negative_numbers = true)]
    n_max: Option<usize>,
    /// Exponent β of the excision bands.
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Width constant of the excision bands.
    #[arg(long, global = true, allow_negative_numbers = true)]
    band_constant: Option<f64>,
    /// Residual tolerance of the solver.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// Smallest amplitude of the grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    rmin: Option<f64>,
    /// Largest amplitude of the grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    rmax: Option<f64>,
    /// Number of amplitudes in the grid.
    #[arg(long, global = true, allow_negative_numbers = true)]
    points: Option<usize>,
    /// Amplitude window for the measure of surviving amplitudes.
    #[arg(long, global = true, allow_negative_numbers = true)]
    r0: Option<f64>,
    /// Analyticity weight σ of the norm.
    #[arg(long, global = true, allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Comma-separated ω values for `omega2`.
    #[arg(long, global = true, allow_negative_numbers = true, value_delimiter = ',')]
    omegas: Option<Vec<f64>>,
    /// Starting configuration for `simulate`.
    #[arg(long, global = true, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Standing-wave amplitude for `simulate`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Number of filaments in the polygon scenario.
    #[arg(long, global = true, allow_negative_numbers = true)]
    filaments: Option<usize>,
    /// Fourier modes per filament.
    #[arg(long, global = true, allow_negative_numbers = true)]
    modes: Option<usize>,
    /// Time steps per period.
    #[arg(long, global = true, allow_negative_numbers = true)]
    steps: Option<usize>,
    /// Integration length in periods.
    #[arg(long, global = true, allow_negative_numbers = true)]
    periods: Option<f64>,
    /// Helix pitch parameter for `orbits`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Rotation rate for `orbits`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    rate: Option<f64>,
    /// Energy above the stable equilibrium for `orbits`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    energy_offset: Option<f64>,
    /// Wavenumber for `traveling`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    k: Option<usize>,
    /// Largest amplitude of the traveling branch.
    #[arg(long, global = true, allow_negative_numbers = true)]
    amplitude_max: Option<f64>,
    /// Fourier truncation of the traveling branch.
    #[arg(long, global = true, allow_negative_numbers = true)]
    truncation: Option<usize>,
    /// Random seed recorded in the manifest.
    #[arg(long, global = true, allow_negative_numbers = true)]
    seed: Option<u64>,
}

impl Cli {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:expr => $($field:tt)+) => {
                if let Some(v) = $flag.clone() {
                    c.$($field)+ = v;
                }
            };
        }
        set!(self.omega => omega);
        set!(self.radius => radius);
        set!(self.d0 => schedule.d0);
        set!(self.l0 => schedule.l0);
        set!(self.n_max => schedule.n_max);
        set!(self.beta => schedule.beta);
        set!(self.band_constant => schedule.band_constant);
        set!(self.tol => schedule.tol);
        set!(self.rmin => r_grid.r_min);
        set!(self.rmax => r_grid.r_max);
        set!(self.points => r_grid.points);
        set!(self.r0 => r0);
        set!(self.sigma => norm.sigma);
        set!(self.omegas => omega_table);
        set!(self.r => scenario.r);
        set!(self.filaments => scenario.filaments);
        set!(self.modes => scenario.modes);
        set!(self.steps => scenario.steps);
        set!(self.periods => scenario.periods);
        set!(self.c => orbits.c);
        set!(self.rate => orbits.rate);
        set!(self.energy_offset => orbits.energy_offset);
        set!(self.k => traveling.k);
        set!(self.amplitude_max => traveling.amplitude_max);
        set!(self.truncation => traveling.truncation);
        set!(self.seed => seed);
        if self.big_omega.is_some() {
            c.big_omega = self.big_omega;
        }
        if self.output.is_some() {
            c.output = self.output.clone();
        }
        if let Some(s) = self.scenario {
            c.scenario.kind = match s {
                ScenarioArg::TwoFilamentStanding => ScenarioKind::TwoFilamentStanding,
                ScenarioArg::PolygonRotation => ScenarioKind::PolygonRotation,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: &Cli) -> Result<(Status, PathBuf), CliError> {
    let config = cli.resolve().map_err(CliError::Config)?;
    let (name, f): (&str, fn(&RunConfig, &mut RunDir) -> Result<Status, CliError>) = match cli.command {
        Command::Spectrum => ("spectrum", commands::spectrum),
        Command::Classify => ("classify", commands::classify),
        Command::Branch => ("branch", commands::branch),
        Command::Omega2 => ("omega2", commands::omega2),
        Command::Excisions => ("excisions", commands::excisions),
        Command::Simulate => ("simulate", commands::simulate),
        Command::Orbits => ("orbits", commands::orbits),
        Command::Traveling => ("traveling", commands::traveling),
    };
    let mut out = RunDir::create(name, &config)?;
    match f(&config, &mut out) {
        Ok(status) => {
            let dir = out.finish(&config, status.label())?;
            Ok((status, dir))
        }
        Err(e) => {
            let label = format!("failed: {e}");
            out.finish(&config, &label)?;
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // argument errors are configuration errors; help and version are not errors
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok((status, dir)) => {
            println!("{}: {}", status.label(), dir.display());
            match status {
                Status::Ok => ExitCode::SUCCESS,
                Status::Excised => ExitCode::from(EXIT_EXCISED),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
