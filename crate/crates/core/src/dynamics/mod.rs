//! Time evolution of the qubit amplitudes and the emitted-photon probability.

mod ode;

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::chain::{check_initial_vector, EffectiveMatrix};
use crate::error::{Error, Result};
use crate::modes::{characteristic_roots, modal_expansion};

pub const DEFAULT_T_MAX: f64 = 40.0;
pub const DEFAULT_SAMPLES: usize = 2000;
/// Plateau threshold on `|dP_ph/dt|`, in units of Γ.
pub const DEFAULT_PLATEAU_EPS: f64 = 1e-3;
/// Minimum plateau duration, in units of τ.
pub const DEFAULT_PLATEAU_MIN_WIDTH: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Eigendecomposition of `M`.
    Modal,
    /// Embedded Runge-Kutta pair with adaptive steps.
    AdaptiveOde,
    /// Modal, falling back to the ODE path on a defective eigenbasis.
    ModalWithOdeFallback,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Modal => "modal",
            Method::AdaptiveOde => "adaptive-ode",
            Method::ModalWithOdeFallback => "modal-with-ode-fallback",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modal" => Ok(Method::Modal),
            "adaptive-ode" | "ode" => Ok(Method::AdaptiveOde),
            "modal-with-ode-fallback" | "auto" => Ok(Method::ModalWithOdeFallback),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

/// Sampled amplitudes β_n(t) with `|β_n|²` and `P_ph = 1 - Σ|β_n|²`.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    times: Vec<f64>,
    /// `[[time, qubit]]`
    amplitudes: Array2<C64>,
    probabilities: Array2<f64>,
    p_photon: Vec<f64>,
    method: Method,
}

impl AmplitudeTrajectory {
    fn from_states(times: Vec<f64>, states: Vec<Vec<C64>>, method: Method) -> Self {
        let n = states.first().map_or(0, Vec::len);
        let amplitudes = Array2::from_shape_fn((times.len(), n), |(k, q)| states[k][q]);
        let probabilities = amplitudes.mapv(|b| b.norm_sqr());
        let p_photon = probabilities
            .rows()
            .into_iter()
            .map(|r| (1.0 - r.sum()).clamp(0.0, 1.0))
            .collect();
        Self {
            times,
            amplitudes,
            probabilities,
            p_photon,
            method,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn amplitudes(&self) -> &Array2<C64> {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> &Array2<f64> {
        &self.probabilities
    }

    pub fn p_photon(&self) -> &[f64] {
        &self.p_photon
    }

    pub fn n_qubits(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The propagator that actually produced the samples.
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn amplitudes_at_sample(&self, k: usize) -> Array1<C64> {
        self.amplitudes.row(k).to_owned()
    }
}

/// `n` uniform samples over `[0, t_max]`, both ends included.
pub fn uniform_grid(t_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let step = t_max / (samples - 1) as f64;
            (0..samples)
                .map(|k| if k + 1 == samples { t_max } else { k as f64 * step })
                .collect()
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::invalid("time grid is empty")),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::invalid(format!("time grid must start at 0, got {t0}")))
        }
        _ => {}
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("time grid contains non-finite values"));
    }
    if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "time grid must be strictly increasing (samples {k} and {})",
            k + 1
        )));
    }
    Ok(())
}

/// Solves `dβ/dt = M β` from `initial` on the given grid.
pub fn evolve(
    matrix: &EffectiveMatrix,
    initial: &[C64],
    times: &[f64],
    method: Method,
    tolerances: &Tolerances,
) -> Result<AmplitudeTrajectory> {
    check_initial_vector(initial, matrix.order())?;
    check_times(times)?;
    match method {
        Method::Modal => evolve_modal(matrix, initial, times),
        Method::AdaptiveOde => evolve_ode(matrix, initial, times, tolerances),
        Method::ModalWithOdeFallback => match evolve_modal(matrix, initial, times) {
            Ok(traj) => Ok(traj),
            Err(Error::DefectiveEigenbasis { .. }) | Err(Error::Eigensolver(_)) => {
                evolve_ode(matrix, initial, times, tolerances)
            }
            Err(e) => Err(e),
        },
    }
}

fn evolve_modal(
    matrix: &EffectiveMatrix,
    initial: &[C64],
    times: &[f64],
) -> Result<AmplitudeTrajectory> {
    let modes = characteristic_roots(matrix)?;
    let expansion = modal_expansion(&modes, initial)?;
    let states = times
        .iter()
        .map(|&t| expansion.amplitudes_at(t).to_vec())
        .collect();
    Ok(AmplitudeTrajectory::from_states(
        times.to_vec(),
        states,
        Method::Modal,
    ))
}

fn evolve_ode(
    matrix: &EffectiveMatrix,
    initial: &[C64],
    times: &[f64],
    tolerances: &Tolerances,
) -> Result<AmplitudeTrajectory> {
    if !(tolerances.rtol > 0.0 && tolerances.atol > 0.0) {
        return Err(Error::invalid("ODE tolerances must be positive"));
    }
    let control = ode::StepControl {
        rtol: tolerances.rtol,
        atol: tolerances.atol,
        max_steps: tolerances.max_steps,
    };
    let states = ode::integrate(matrix, initial, times, control)?;
    Ok(AmplitudeTrajectory::from_states(
        times.to_vec(),
        states,
        Method::AdaptiveOde,
    ))
}

/// `P_ph(t) = 1 - Σ_n |β_n(t)|²`, clipped to `[0, 1]`.
pub fn photon_emission_probability(traj: &AmplitudeTrajectory) -> Vec<f64> {
    traj.p_photon.clone()
}

/// Resonant spacings with closed-form dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// `kd = 2πn`
    Even,
    /// `kd = (2n+1)π`
    Odd,
}

impl Parity {
    /// Classifies `kd` if it is an integer multiple of π within `tol`.
    pub fn of_kd(kd: f64, tol: f64) -> Option<Parity> {
        let m = kd / PI;
        let r = m.round();
        if (m - r).abs() > tol {
            return None;
        }
        Some(if r.rem_euclid(2.0) == 0.0 {
            Parity::Even
        } else {
            Parity::Odd
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonantSolution {
    pub amplitudes: Array1<C64>,
    pub p_photon: f64,
}

/// Closed-form amplitudes for `kd = nπ` with qubit `n0` (1-based) excited.
///
/// The excited qubit follows `(N-1)/N + e^{-NΓt/2}/N`. For even parity every
/// other qubit follows `-1/N + e^{-NΓt/2}/N`; for odd parity the qubits an odd
/// number of spacings away take the opposite sign. `P_ph = (1 - e^{-NΓt})/N`.
pub fn analytic_amplitudes_resonant(
    n: usize,
    n0: usize,
    parity: Parity,
    t: f64,
    gamma: f64,
) -> Result<ResonantSolution> {
    if n == 0 {
        return Err(Error::invalid("chain must contain at least one qubit"));
    }
    if n0 == 0 || n0 > n {
        return Err(Error::invalid(format!("excited qubit {n0} outside 1..={n}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time must be non-negative, got {t}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("decay rate must be positive, got {gamma}")));
    }
    let nf = n as f64;
    let decay = (-0.5 * gamma * nf * t).exp();
    let excited = (nf - 1.0) / nf + decay / nf;
    let even_group = -1.0 / nf + decay / nf;
    let amplitudes = (1..=n)
        .map(|q| {
            let value = if q == n0 {
                excited
            } else {
                let odd_distance = q.abs_diff(n0) % 2 == 1;
                match parity {
                    Parity::Odd if odd_distance => -even_group,
                    _ => even_group,
                }
            };
            C64::new(value, 0.0)
        })
        .collect();
    let p_photon = -(-gamma * nf * t).exp_m1() / nf;
    Ok(ResonantSolution {
        amplitudes,
        p_photon,
    })
}

/// Closed interval of the time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub start: f64,
    pub end: f64,
}

impl Plateau {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlateauReport {
    /// Steps of `P_ph(t)` before the final saturation.
    pub interior: Vec<Plateau>,
    /// Flat stretch that runs to the last sample, if any.
    pub saturation: Option<Plateau>,
}

/// Maximal intervals of at least `min_width` on which the centred finite
/// difference of `P_ph` stays below `eps` in magnitude.
pub fn find_plateaus(
    p_photon: &[f64],
    times: &[f64],
    eps: f64,
    min_width: f64,
) -> Result<PlateauReport> {
    if p_photon.len() != times.len() {
        return Err(Error::invalid(format!(
            "{} values for {} sample times",
            p_photon.len(),
            times.len()
        )));
    }
    if times.len() < 3 {
        return Err(Error::GridTooCoarse(
            "plateau detection needs at least 3 samples".into(),
        ));
    }
    if !(eps > 0.0 && min_width > 0.0) {
        return Err(Error::invalid("eps and min_width must be positive"));
    }
    if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "sample times must be strictly increasing (samples {k} and {})",
            k + 1
        )));
    }
    let max_spacing = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if 3.0 * max_spacing > min_width * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse(format!(
            "spacing {max_spacing} gives fewer than 3 points per min_width {min_width}"
        )));
    }

    let last = times.len() - 1;
    let slope = |k: usize| -> f64 {
        let (a, b) = match k {
            0 => (0, 1),
            k if k == last => (last - 1, last),
            k => (k - 1, k + 1),
        };
        (p_photon[b] - p_photon[a]) / (times[b] - times[a])
    };

    let mut report = PlateauReport::default();
    let mut run_start: Option<usize> = None;
    for k in 0..=last {
        let flat = slope(k).abs() < eps;
        if flat && run_start.is_none() {
            run_start = Some(k);
        }
        let closes = run_start.is_some() && (!flat || k == last);
        if closes {
            let a = run_start.take().unwrap();
            let b = if flat { k } else { k - 1 };
            let interval = Plateau {
                start: times[a],
                end: times[b],
            };
            if b == last {
                report.saturation = Some(interval);
            } else if interval.width() >= min_width {
                report.interior.push(interval);
            }
        }
    }
    Ok(report)
}
