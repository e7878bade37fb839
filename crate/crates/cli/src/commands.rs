use num_complex::Complex64 as C64;
use rayon::prelude::*;
use wgqed::emission::compute_spectrum;
use wgqed::{build_effective_matrix, characteristic_roots, evolve, find_plateaus, ChainConfig};

use crate::config::{RunConfig, Subcommand, SweepParameter};
use crate::error::CliError;
use crate::table::{config_comment, fmt_num, Table};

/// Result of a run: the CSV text and any notes meant for stderr.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub messages: Vec<String>,
    /// Set by sweeps in which every point failed.
    pub failure: Option<CliError>,
}

impl RunOutput {
    fn ok(table: Table) -> Self {
        RunOutput {
            csv: table.to_csv(),
            messages: Vec::new(),
            failure: None,
        }
    }
}

fn preamble(config: &RunConfig, table: &mut Table) {
    table.comment(format!("wgqed {} {}", env!("CARGO_PKG_VERSION"), config.subcommand.as_str()));
    table.comment(config_comment(config));
}

/// Dispatches on `config.subcommand`. `jobs` bounds sweep parallelism.
pub fn run(config: &RunConfig, jobs: Option<usize>) -> Result<RunOutput, CliError> {
    match config.subcommand {
        Subcommand::Evolve => run_evolve(config),
        Subcommand::Eigen => run_eigen(config),
        Subcommand::Spectrum => run_spectrum(config),
        Subcommand::Sweep => run_sweep(config, jobs),
    }
}

pub fn run_evolve(config: &RunConfig) -> Result<RunOutput, CliError> {
    let chain = config.chain()?;
    let matrix = build_effective_matrix(&chain)?;
    let initial = chain.initial_vector()?.to_vec();
    let times = config.times();
    let traj = evolve(&matrix, &initial, &times, config.method, &config.tolerances())?;
    let n = config.n;

    let mut header = vec!["t".to_string()];
    for q in 1..=n {
        header.push(format!("re_beta_{q}"));
        header.push(format!("im_beta_{q}"));
    }
    header.extend((1..=n).map(|q| format!("prob_{q}")));
    header.push("p_ph".into());
    let mut table = Table {
        header,
        ..Default::default()
    };
    preamble(config, &mut table);
    table.comment(format!("method {}", traj.method().as_str()));
    match find_plateaus(traj.p_photon(), &times, config.plateau_eps, config.plateau_min_width) {
        Ok(report) => {
            for p in &report.interior {
                table.comment(format!("plateau {} {}", fmt_num(p.start), fmt_num(p.end)));
            }
            if let Some(p) = report.saturation {
                table.comment(format!("saturation {} {}", fmt_num(p.start), fmt_num(p.end)));
            }
        }
        Err(e) => table.comment(format!("plateaus not detected: {e}")),
    }

    for (k, &t) in times.iter().enumerate() {
        let mut row = Vec::with_capacity(3 * n + 2);
        row.push(fmt_num(t));
        for b in traj.amplitudes().row(k) {
            row.push(fmt_num(b.re));
            row.push(fmt_num(b.im));
        }
        row.extend(traj.probabilities().row(k).iter().map(|p| fmt_num(*p)));
        row.push(fmt_num(traj.p_photon()[k]));
        table.push(row);
    }
    Ok(RunOutput::ok(table))
}

pub fn run_eigen(config: &RunConfig) -> Result<RunOutput, CliError> {
    let chain = config.chain()?;
    let modes = characteristic_roots(&build_effective_matrix(&chain)?)?;
    let mut table = Table::new(&["index", "re_lambda", "im_lambda", "E_i", "Gamma_i", "class"]);
    preamble(config, &mut table);
    let rates = modes.decay_rates();
    table.comment(format!("sum_gamma {}", fmt_num(rates.iter().sum())));
    table.comment(format!("dark_count {}", modes.dark_count()));
    let energies = modes.energies();
    for (j, root) in modes.roots().iter().enumerate() {
        table.push(vec![
            (j + 1).to_string(),
            fmt_num(root.re),
            fmt_num(root.im),
            fmt_num(energies[j]),
            fmt_num(rates[j]),
            modes.classification()[j].as_str().to_string(),
        ]);
    }
    Ok(RunOutput::ok(table))
}

pub fn run_spectrum(config: &RunConfig) -> Result<RunOutput, CliError> {
    let chain = config.chain()?;
    let detunings = config.detunings();
    let raw = compute_spectrum(
        &chain,
        &detunings,
        config.observation_time,
        config.method,
        &config.tolerances(),
    )?;
    let norm = raw.normalized(config.normalization);
    let mut table = Table::new(&["delta", "s_raw", "s_norm"]);
    preamble(config, &mut table);
    for p in raw.peaks(0.5) {
        let hwhm = p.hwhm.map(fmt_num).unwrap_or_else(|| "none".into());
        table.comment(format!("peak {} height {} hwhm {hwhm}", fmt_num(p.position), fmt_num(p.height)));
    }
    for (k, d) in detunings.iter().enumerate() {
        table.push(vec![fmt_num(*d), fmt_num(raw.s_values[k]), fmt_num(norm.s_values[k])]);
    }
    Ok(RunOutput::ok(table))
}

/// Summary metrics for one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub min_gamma: f64,
    pub dark_count: usize,
    pub p_ph_final: f64,
    pub peak_hwhm: Option<f64>,
}

fn sweep_chain(config: &RunConfig, parameter: SweepParameter, value: f64) -> Result<ChainConfig, CliError> {
    let mut point = config.clone();
    match parameter {
        SweepParameter::N => {
            if point.positions_pi.is_some() {
                return Err(CliError::config("explicit positions fix the chain length; cannot sweep n"));
            }
            point.n = value as usize;
        }
        SweepParameter::Kd => point.kd_pi = value,
        SweepParameter::Excited => {
            point.excited = Some(value as usize);
            point.initial_amplitudes = None;
        }
    }
    let chain = point.chain()?;
    chain.validate()?;
    Ok(chain)
}

fn sweep_point(config: &RunConfig, parameter: SweepParameter, value: f64) -> Result<SweepRow, CliError> {
    let chain = sweep_chain(config, parameter, value)?;
    let matrix = build_effective_matrix(&chain)?;
    let modes = characteristic_roots(&matrix)?;
    let initial: Vec<C64> = chain.initial_vector()?.to_vec();
    let traj = evolve(&matrix, &initial, &config.times(), config.method, &config.tolerances())?;
    let spectrum = compute_spectrum(
        &chain,
        &config.detunings(),
        config.observation_time,
        config.method,
        &config.tolerances(),
    )?;
    Ok(SweepRow {
        min_gamma: modes.min_decay_rate(),
        dark_count: modes.dark_count(),
        p_ph_final: *traj.p_photon().last().expect("at least two samples"),
        peak_hwhm: spectrum.dominant_peak().and_then(|p| p.hwhm),
    })
}

/// Least-squares line through (x, y): (slope, intercept, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (slope, intercept, 1.0 - ss_res / ss_tot)
}

pub fn run_sweep(config: &RunConfig, jobs: Option<usize>) -> Result<RunOutput, CliError> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("sweep needs a parameter and a list of values"))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Solver(format!("worker pool: {e}")))?;
    let results: Vec<Result<SweepRow, CliError>> = pool.install(|| {
        spec.values
            .par_iter()
            .map(|&v| sweep_point(config, spec.parameter, v))
            .collect()
    });

    let mut table = Table::new(&["sweep_value", "min_gamma_i", "dark_count", "p_ph_final", "peak_hwhm"]);
    preamble(config, &mut table);
    let mut messages = Vec::new();
    for (v, r) in spec.values.iter().zip(&results) {
        if let Err(e) = r {
            table.comment(format!("failed {} {}", fmt_num(*v), e.to_json()));
            messages.push(format!("sweep point {v}: {e}"));
        }
    }
    if spec.parameter == SweepParameter::N {
        let (x, y): (Vec<f64>, Vec<f64>) = spec
            .values
            .iter()
            .zip(&results)
            .filter_map(|(v, r)| match r {
                Ok(row) if row.min_gamma > 0.0 => Some((v.ln(), row.min_gamma.ln())),
                _ => None,
            })
            .unzip();
        if x.len() >= 2 {
            let (slope, intercept, r2) = linear_fit(&x, &y);
            let line = format!(
                "fit log(min_gamma_i) = slope*log(n) + intercept: slope {} intercept {} r2 {}",
                fmt_num(slope),
                fmt_num(intercept),
                fmt_num(r2)
            );
            messages.push(line.clone());
            table.comment(line);
        }
    }
    let nan = || "NaN".to_string();
    for (v, r) in spec.values.iter().zip(&results) {
        let row = match r {
            Ok(row) => vec![
                fmt_num(*v),
                fmt_num(row.min_gamma),
                row.dark_count.to_string(),
                fmt_num(row.p_ph_final),
                row.peak_hwhm.map(fmt_num).unwrap_or_else(nan),
            ],
            Err(_) => vec![fmt_num(*v), nan(), nan(), nan(), nan()],
        };
        table.push(row);
    }
    let failure = if results.iter().all(Result::is_err) {
        results.into_iter().find_map(Result::err)
    } else {
        None
    };
    Ok(RunOutput {
        csv: table.to_csv(),
        messages,
        failure,
    })
}
