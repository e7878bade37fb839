use std::path::PathBuf;

use clap::{Args, Parser};
use wgqed::{Method, Normalization};

use crate::config::{parse_kd, parse_values, ConfigFile, RunConfig, Subcommand, SweepParameter, SweepSpec};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wgqed", version, about = "Decay of a single excitation in a qubit chain coupled to a waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Amplitudes, probabilities and emitted-photon probability over time
    Evolve(ChainArgs),
    /// Roots of the effective matrix: energies, decay rates and classes
    Eigen(ChainArgs),
    /// Emission spectrum at the observation time
    Spectrum(ChainArgs),
    /// Summary metrics over a range of n, kd or excited qubit
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChainArgs {
    /// JSON config file; flags override its values
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Number of qubits
    #[arg(long, short = 'n')]
    pub n: Option<usize>,
    /// Spacing phase kd, as a multiple of π (`0.5pi`) or in radians
    #[arg(long, value_parser = parse_kd, allow_hyphen_values = true, conflicts_with = "kd_pi")]
    pub kd: Option<f64>,
    /// Spacing phase kd in units of π
    #[arg(long, allow_hyphen_values = true)]
    pub kd_pi: Option<f64>,
    /// Single-qubit decay rate Γ
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Initially excited qubit (1-based)
    #[arg(long, short = 'e', conflicts_with = "initial_vector")]
    pub excited: Option<usize>,
    /// JSON file with initial amplitudes `[[re, im], ...]`
    #[arg(long)]
    pub initial_vector: Option<PathBuf>,
    /// Explicit phases k·x_n in units of π, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub positions_pi: Option<Vec<f64>>,
    /// End of the time grid, in 1/Γ
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of time samples including both ends
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub detuning_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub detuning_max: Option<f64>,
    #[arg(long)]
    pub detuning_points: Option<usize>,
    /// Time at which the spectrum is taken, in 1/Γ
    #[arg(long, short = 't')]
    pub observation_time: Option<f64>,
    /// modal, adaptive-ode or modal-with-ode-fallback
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Scaling of the s_norm column: peak or raw
    #[arg(long, value_parser = parse_normalization)]
    pub normalization: Option<Normalization>,
    #[arg(long)]
    pub plateau_eps: Option<f64>,
    #[arg(long)]
    pub plateau_min_width: Option<f64>,
    /// Output file; standard output if absent
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Parameter to vary: n, kd or excited
    #[arg(long, value_parser = parse_parameter)]
    pub param: Option<SweepParameter>,
    /// Values: `4..24`, `2..2.4:0.1`, `1,3,5` (kd in units of π)
    #[arg(long, value_parser = parse_value_list, allow_hyphen_values = true)]
    pub values: Option<ValueList>,
    /// Worker threads
    #[arg(long, short = 'j')]
    pub jobs: Option<usize>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: wgqed::Error| e.to_string())
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    s.parse().map_err(|e: wgqed::Error| e.to_string())
}

/// Parsed `--values` argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueList(pub Vec<f64>);

fn parse_value_list(s: &str) -> Result<ValueList, String> {
    parse_values(s).map(ValueList)
}

fn parse_parameter(s: &str) -> Result<SweepParameter, String> {
    s.parse()
}

/// What the binary should do once the arguments are resolved.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: RunConfig,
    pub jobs: Option<usize>,
    pub print_config: bool,
}

impl ChainArgs {
    fn overrides(&self, subcommand: Subcommand) -> ConfigFile {
        ConfigFile {
            subcommand: Some(subcommand),
            n: self.n,
            kd_pi: self.kd.or(self.kd_pi),
            gamma: self.gamma,
            excited: self.excited,
            initial_vector_file: self.initial_vector.clone(),
            initial_amplitudes: None,
            positions_pi: self.positions_pi.clone(),
            t_max: self.t_max,
            samples: self.samples,
            detuning_min: self.detuning_min,
            detuning_max: self.detuning_max,
            detuning_points: self.detuning_points,
            observation_time: self.observation_time,
            method: self.method,
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            normalization: self.normalization,
            plateau_eps: self.plateau_eps,
            plateau_min_width: self.plateau_min_width,
            sweep: None,
            output: self.output.clone(),
        }
    }

    fn base(&self) -> Result<ConfigFile, CliError> {
        match &self.config {
            Some(path) => ConfigFile::load(path),
            None => Ok(ConfigFile::default()),
        }
    }
}

impl Cli {
    pub fn resolve(&self) -> Result<Invocation, CliError> {
        let (chain, subcommand, jobs) = match &self.command {
            Command::Evolve(a) => (a, Subcommand::Evolve, None),
            Command::Eigen(a) => (a, Subcommand::Eigen, None),
            Command::Spectrum(a) => (a, Subcommand::Spectrum, None),
            Command::Sweep(a) => (&a.chain, Subcommand::Sweep, a.jobs),
        };
        let mut overrides = chain.overrides(subcommand);
        let base = chain.base()?;
        if let Command::Sweep(a) = &self.command {
            let parameter = a.param.or(base.sweep.as_ref().map(|s| s.parameter));
            let values = a.values.clone().map(|v| v.0).or(base.sweep.as_ref().map(|s| s.values.clone()));
            overrides.sweep = match (parameter, values) {
                (Some(parameter), Some(values)) => Some(SweepSpec { parameter, values }),
                (None, None) => None,
                _ => return Err(CliError::config("sweep needs both --param and --values")),
            };
        }
        Ok(Invocation {
            config: base.merged(overrides).resolve()?,
            jobs,
            print_config: chain.print_config,
        })
    }
}
