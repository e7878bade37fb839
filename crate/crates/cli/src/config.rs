//! Run configuration: a JSON document, command-line overrides and the fully
//! resolved form that is echoed into every output file.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use wgqed::dynamics::{
    uniform_grid, DEFAULT_PLATEAU_EPS, DEFAULT_PLATEAU_MIN_WIDTH, DEFAULT_SAMPLES, DEFAULT_T_MAX,
};
use wgqed::emission::{
    detuning_grid, DEFAULT_DETUNING_POINTS, DEFAULT_DETUNING_RANGE, DEFAULT_OBSERVATION_TIME,
};
use wgqed::{ChainConfig, Method, Normalization, Tolerances};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Evolve,
    Eigen,
    Spectrum,
    Sweep,
}

impl Subcommand {
    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Evolve => "evolve",
            Subcommand::Eigen => "eigen",
            Subcommand::Spectrum => "spectrum",
            Subcommand::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    N,
    Kd,
    Excited,
}

impl std::str::FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "n" => Ok(SweepParameter::N),
            "kd" => Ok(SweepParameter::Kd),
            "excited" => Ok(SweepParameter::Excited),
            other => Err(format!("unknown sweep parameter {other:?} (expected n, kd or excited)")),
        }
    }
}

/// Sweep over one parameter. `kd` values are in units of π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Partially specified configuration, as read from a file or collected from
/// flags. Every field is optional; see [`ConfigFile::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub subcommand: Option<Subcommand>,
    pub n: Option<usize>,
    pub kd_pi: Option<f64>,
    pub gamma: Option<f64>,
    pub excited: Option<usize>,
    /// JSON file holding `[[re, im], ...]`.
    pub initial_vector_file: Option<PathBuf>,
    pub initial_amplitudes: Option<Vec<[f64; 2]>>,
    pub positions_pi: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub detuning_min: Option<f64>,
    pub detuning_max: Option<f64>,
    pub detuning_points: Option<usize>,
    pub observation_time: Option<f64>,
    pub method: Option<Method>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_steps: Option<usize>,
    pub normalization: Option<Normalization>,
    pub plateau_eps: Option<f64>,
    pub plateau_min_width: Option<f64>,
    pub sweep: Option<SweepSpec>,
    pub output: Option<PathBuf>,
}

/// Fully resolved configuration. Serialises to a document that
/// [`ConfigFile`] reads back into the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub n: usize,
    pub kd_pi: f64,
    pub gamma: f64,
    pub excited: Option<usize>,
    pub initial_amplitudes: Option<Vec<[f64; 2]>>,
    pub positions_pi: Option<Vec<f64>>,
    pub t_max: f64,
    pub samples: usize,
    pub detuning_min: f64,
    pub detuning_max: f64,
    pub detuning_points: usize,
    pub observation_time: f64,
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub normalization: Normalization,
    pub plateau_eps: f64,
    pub plateau_min_width: f64,
    pub sweep: Option<SweepSpec>,
    pub output: Option<PathBuf>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Layers `overrides` on top of `self`. Choosing an initial state in the
    /// overrides discards whichever initial state the base named.
    pub fn merged(self, overrides: ConfigFile) -> ConfigFile {
        let mut base = self;
        if overrides.excited.is_some()
            || overrides.initial_vector_file.is_some()
            || overrides.initial_amplitudes.is_some()
        {
            base.excited = None;
            base.initial_vector_file = None;
            base.initial_amplitudes = None;
        }
        macro_rules! take {
            ($($f:ident),*) => { ConfigFile { $($f: overrides.$f.or(base.$f)),* } };
        }
        take!(
            subcommand, n, kd_pi, gamma, excited, initial_vector_file, initial_amplitudes,
            positions_pi, t_max, samples, detuning_min, detuning_max, detuning_points,
            observation_time, method, rtol, atol, max_steps, normalization, plateau_eps,
            plateau_min_width, sweep, output
        )
    }

    /// Applies defaults and checks consistency. Relative paths in the
    /// document are taken relative to the working directory.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let defaults = Tolerances::default();
        let initial_amplitudes = match (self.initial_amplitudes, &self.initial_vector_file) {
            (Some(_), Some(_)) => {
                return Err(CliError::config(
                    "give either initial_amplitudes or initial_vector_file, not both",
                ))
            }
            (Some(a), None) => Some(a),
            (None, Some(path)) => Some(read_initial_vector(path)?),
            (None, None) => None,
        };
        if initial_amplitudes.is_some() && self.excited.is_some() {
            return Err(CliError::config("give either an excited qubit or an initial vector, not both"));
        }
        let excited = match (&initial_amplitudes, self.excited) {
            (None, None) => Some(1),
            (_, e) => e,
        };

        let implied = self
            .positions_pi
            .as_ref()
            .map(Vec::len)
            .or(initial_amplitudes.as_ref().map(Vec::len));
        let swept_n = self
            .sweep
            .as_ref()
            .filter(|s| s.parameter == SweepParameter::N)
            .and_then(|s| s.values.first())
            .map(|v| *v as usize);
        let n = match (self.n.or(swept_n), implied) {
            (Some(n), _) => n,
            (None, Some(m)) => m,
            (None, None) => return Err(CliError::config("number of qubits `n` is required")),
        };
        if let Some(p) = &self.positions_pi {
            if p.len() != n {
                return Err(CliError::config(format!("{} positions given for n = {n}", p.len())));
            }
        }
        let swept_kd = self
            .sweep
            .as_ref()
            .filter(|s| s.parameter == SweepParameter::Kd)
            .and_then(|s| s.values.first().copied());
        let kd_pi = match self.kd_pi.or(swept_kd) {
            Some(kd) => kd,
            None if self.positions_pi.is_some() || (n == 1 && swept_n.is_none()) => 0.0,
            None => return Err(CliError::config("spacing `kd` is required unless positions are given")),
        };

        let config = RunConfig {
            subcommand: self.subcommand.unwrap_or(Subcommand::Evolve),
            n,
            kd_pi,
            gamma: self.gamma.unwrap_or(1.0),
            excited,
            initial_amplitudes,
            positions_pi: self.positions_pi,
            t_max: self.t_max.unwrap_or(DEFAULT_T_MAX),
            samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
            detuning_min: self.detuning_min.unwrap_or(DEFAULT_DETUNING_RANGE.0),
            detuning_max: self.detuning_max.unwrap_or(DEFAULT_DETUNING_RANGE.1),
            detuning_points: self.detuning_points.unwrap_or(DEFAULT_DETUNING_POINTS),
            observation_time: self.observation_time.unwrap_or(DEFAULT_OBSERVATION_TIME),
            method: self.method.unwrap_or(Method::ModalWithOdeFallback),
            rtol: self.rtol.unwrap_or(defaults.rtol),
            atol: self.atol.unwrap_or(defaults.atol),
            max_steps: self.max_steps.unwrap_or(defaults.max_steps),
            normalization: self.normalization.unwrap_or(Normalization::Peak),
            plateau_eps: self.plateau_eps.unwrap_or(DEFAULT_PLATEAU_EPS),
            plateau_min_width: self.plateau_min_width.unwrap_or(DEFAULT_PLATEAU_MIN_WIDTH),
            sweep: self.sweep,
            output: self.output,
        };
        config.validate()?;
        Ok(config)
    }
}

fn read_initial_vector(path: &Path) -> Result<Vec<[f64; 2]>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!("{}: expected [[re, im], ...]: {e}", path.display()))
    })
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("t_max", self.t_max)?;
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("plateau_eps", self.plateau_eps)?;
        positive("plateau_min_width", self.plateau_min_width)?;
        if self.samples < 2 {
            return Err(CliError::config("samples must be at least 2"));
        }
        if self.detuning_points == 0 {
            return Err(CliError::config("detuning_points must be at least 1"));
        }
        if !(self.detuning_min.is_finite()
            && self.detuning_max.is_finite()
            && self.detuning_min <= self.detuning_max)
        {
            return Err(CliError::config(format!(
                "detuning range [{}, {}] is not valid",
                self.detuning_min, self.detuning_max
            )));
        }
        if !(self.observation_time >= 0.0 && self.observation_time.is_finite()) {
            return Err(CliError::config("observation_time must be non-negative"));
        }
        if !self.kd_pi.is_finite() {
            return Err(CliError::config("kd must be finite"));
        }
        match (&self.sweep, self.subcommand) {
            (None, Subcommand::Sweep) => {
                return Err(CliError::config("sweep needs a parameter and a list of values"))
            }
            (Some(spec), _) => {
                if spec.values.is_empty() {
                    return Err(CliError::config("sweep has no values"));
                }
                if spec.parameter != SweepParameter::Kd {
                    if let Some(v) = spec.values.iter().find(|v| v.fract() != 0.0 || **v < 1.0) {
                        return Err(CliError::config(format!(
                            "sweep over {:?} needs positive integers, got {v}",
                            spec.parameter
                        )));
                    }
                }
            }
            _ => {}
        }
        // sweeps change the chain per point; a single run checks it now
        if self.subcommand != Subcommand::Sweep {
            self.chain()?.validate()?;
        }
        Ok(())
    }

    pub fn kd(&self) -> f64 {
        self.kd_pi * PI
    }

    pub fn chain(&self) -> Result<ChainConfig, CliError> {
        let mut chain = ChainConfig::equidistant(self.n, self.kd()).with_gamma(self.gamma);
        if let Some(p) = &self.positions_pi {
            chain = chain.with_positions(p.iter().map(|x| x * PI).collect());
        }
        chain = match (&self.initial_amplitudes, self.excited) {
            (Some(a), _) => chain.with_initial_amplitudes(a.iter().map(|[re, im]| C64::new(*re, *im)).collect()),
            (None, Some(k)) => chain.with_excited(k),
            (None, None) => chain,
        };
        Ok(chain)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.t_max, self.samples)
    }

    pub fn detunings(&self) -> Vec<f64> {
        detuning_grid(self.detuning_min, self.detuning_max, self.detuning_points)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// The copy embedded in output files; the output path is left out so
    /// that the bytes depend only on what was computed.
    pub fn echo(&self) -> RunConfig {
        RunConfig {
            output: None,
            ..self.clone()
        }
    }
}

/// Parses `kd` given as a multiple of π (`0.5pi`, `pi`, `2π`, `0.5*pi`) or,
/// without the suffix, in radians. Returns the multiple of π.
pub fn parse_kd(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let stripped = t
        .strip_suffix("pi")
        .or_else(|| t.strip_suffix('π'))
        .map(|r| r.trim_end_matches('*').trim());
    match stripped {
        Some("") => Ok(1.0),
        Some("-") => Ok(-1.0),
        Some(m) => m.parse::<f64>().map_err(|_| format!("cannot read {s:?} as a multiple of π")),
        None => t
            .parse::<f64>()
            .map(|rad| rad / PI)
            .map_err(|_| format!("cannot read {s:?} as kd (try 0.5pi)")),
    }
}

/// Parses a value list: comma-separated numbers or inclusive ranges
/// `a..b` (step 1) and `a..b:step`.
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let Some((lo, rest)) = item.split_once("..") else {
            out.push(item.parse::<f64>().map_err(|_| format!("bad value {item:?}"))?);
            continue;
        };
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, step),
            None => (rest, "1"),
        };
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad range {item:?}"));
        let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
        if !(step > 0.0) || hi < lo {
            return Err(format!("range {item:?} needs lo ≤ hi and a positive step"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        out.extend((0..=count).map(|k| lo + k as f64 * step));
    }
    if out.is_empty() {
        return Err("empty value list".into());
    }
    Ok(out)
}
