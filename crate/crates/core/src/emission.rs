//! Single-photon amplitude γ(δ, t) and spectral density `S = |γ|²`.
//!
//! With the coupling constant set to 1 and the near-resonance phase factors
//! `e^{-ikx_n}` evaluated at the configured `k`,
//!
//! ```text
//! γ(δ, t) = -i Σ_n e^{-iφ_n} ∫₀ᵗ β_n(t') e^{iδt'} dt'
//!         = Σ_n Σ_j b_j^{(n)} e^{-iφ_n} (1 - e^{i(δ - iλ_j)t}) / (δ - iλ_j).
//! ```
//!
//! The first form is evaluated by quadrature over a sampled trajectory, the
//! second from a modal expansion; they serve as checks on each other.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::chain::{build_effective_matrix, ChainConfig, EffectiveMatrix};
use crate::dynamics::{evolve, uniform_grid, AmplitudeTrajectory, Method, Tolerances};
use crate::error::{Error, Result};
use crate::modes::{characteristic_roots, modal_expansion, ModalExpansion};

/// Default observation time, in τ.
pub const DEFAULT_OBSERVATION_TIME: f64 = 100.0;
pub const DEFAULT_DETUNING_RANGE: (f64, f64) = (-3.0, 3.0);
pub const DEFAULT_DETUNING_POINTS: usize = 2001;
/// Quadrature step is at most this over `max(|δ|_max, NΓ)`.
pub const QUADRATURE_STEP_FACTOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Raw,
    Peak,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::Peak => "peak",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "peak" => Ok(Normalization::Peak),
            other => Err(Error::invalid(format!("unknown normalization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub detunings: Vec<f64>,
    pub observation_time: f64,
    pub gamma_values: Vec<C64>,
    pub s_values: Vec<f64>,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub index: usize,
    /// Vertex of the parabola through the three samples around the maximum.
    pub position: f64,
    pub height: f64,
    /// Half width at half maximum from linearly interpolated crossings.
    pub hwhm: Option<f64>,
}

impl SpectrumResult {
    pub fn from_amplitudes(detunings: Vec<f64>, observation_time: f64, gamma_values: Vec<C64>) -> Self {
        let s_values = gamma_values.iter().map(|g| g.norm_sqr()).collect();
        Self {
            detunings,
            observation_time,
            gamma_values,
            s_values,
            normalization: Normalization::Raw,
        }
    }

    pub fn max_value(&self) -> f64 {
        self.s_values.iter().copied().fold(0.0, f64::max)
    }

    /// Rescales to the requested normalisation; an all-zero spectrum stays zero.
    pub fn normalized(&self, normalization: Normalization) -> SpectrumResult {
        let mut out = self.clone();
        out.normalization = normalization;
        if normalization == Normalization::Peak {
            let peak = self.max_value();
            if peak > 0.0 {
                let amp = peak.sqrt();
                out.gamma_values = self.gamma_values.iter().map(|g| g / amp).collect();
                out.s_values = self.s_values.iter().map(|s| s / peak).collect();
            }
        }
        out
    }

    /// Local maxima at least `rel_height` times the global maximum.
    pub fn peaks(&self, rel_height: f64) -> Vec<SpectralPeak> {
        find_peaks(&self.detunings, &self.s_values, rel_height)
    }

    pub fn dominant_peak(&self) -> Option<SpectralPeak> {
        self.peaks(0.0)
            .into_iter()
            .max_by(|a, b| a.height.total_cmp(&b.height))
    }
}

/// Local maxima of a sampled curve with parabolic position refinement.
pub fn find_peaks(x: &[f64], y: &[f64], rel_height: f64) -> Vec<SpectralPeak> {
    let n = y.len().min(x.len());
    if n < 3 {
        return Vec::new();
    }
    let top = y.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for k in 1..n - 1 {
        if !(y[k] > y[k - 1] && y[k] >= y[k + 1] && y[k] >= rel_height * top) {
            continue;
        }
        let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
        let curvature = y0 - 2.0 * y1 + y2;
        let offset = if curvature < 0.0 {
            0.5 * (y0 - y2) / curvature
        } else {
            0.0
        };
        let h = 0.5 * (x[k + 1] - x[k - 1]);
        peaks.push(SpectralPeak {
            index: k,
            position: x[k] + offset * h,
            height: y1,
            hwhm: half_width(x, y, k),
        });
    }
    peaks
}

fn half_width(x: &[f64], y: &[f64], k: usize) -> Option<f64> {
    let half = 0.5 * y[k];
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    let left = (1..=k).rev().find(|&i| y[i - 1] < half).map(|i| cross(i - 1, i))?;
    let right = (k..y.len() - 1).find(|&i| y[i + 1] < half).map(|i| cross(i, i + 1))?;
    Some(0.5 * (right - left))
}

/// Largest quadrature step for the requested detunings.
pub fn quadrature_step(max_detuning: f64, n_qubits: usize, gamma: f64) -> f64 {
    QUADRATURE_STEP_FACTOR / max_detuning.abs().max(n_qubits as f64 * gamma)
}

/// Uniform time grid over `[0, t]` fine enough for [`photon_amplitude_numeric`].
pub fn quadrature_grid(t: f64, detunings: &[f64], n_qubits: usize, gamma: f64) -> Vec<f64> {
    if t <= 0.0 {
        return vec![0.0];
    }
    let max_detuning = detunings.iter().fold(0.0, |m: f64, d| m.max(d.abs()));
    let step = quadrature_step(max_detuning, n_qubits, gamma);
    let intervals = (t / step).ceil().max(1.0) as usize;
    uniform_grid(t, intervals + 1)
}

/// `μ_j(θ) = ∫₀¹ u^j e^{iθu} du` for j = 0..3.
fn oscillatory_moments(theta: f64) -> [C64; 4] {
    let mut mu = [C64::new(0.0, 0.0); 4];
    if theta.abs() < 0.5 {
        let it = C64::new(0.0, theta);
        let mut term = C64::new(1.0, 0.0); // (iθ)^m / m!
        for m in 0..24 {
            for (j, slot) in mu.iter_mut().enumerate() {
                *slot += term / (m + j + 1) as f64;
            }
            term = term * it / (m + 1) as f64;
        }
    } else {
        let e = C64::from_polar(1.0, theta);
        let it = C64::new(0.0, theta);
        mu[0] = (e - 1.0) / it;
        for j in 1..4 {
            mu[j] = (e - j as f64 * mu[j - 1]) / it;
        }
    }
    mu
}

/// Weights of the cubic Hermite interpolant `(f0, f1, h f0', h f1')`
/// integrated against `e^{iθu}` over the unit interval.
fn hermite_weights(theta: f64) -> [C64; 4] {
    let [m0, m1, m2, m3] = oscillatory_moments(theta);
    [
        2.0 * m3 - 3.0 * m2 + m0,
        -2.0 * m3 + 3.0 * m2,
        m3 - 2.0 * m2 + m1,
        m3 - m2,
    ]
}

fn projected(phase_factors: &[C64], v: &[C64]) -> C64 {
    phase_factors.iter().zip(v).map(|(p, b)| p * b).sum()
}

/// γ(δ, t) by quadrature over a sampled trajectory.
///
/// The projection `f(t) = Σ_n e^{-iφ_n} β_n(t)` is interpolated by cubic
/// Hermite polynomials (derivatives from `M β`) and each piece is integrated
/// exactly against `e^{iδt}`. `t` must be one of the sample times.
pub fn photon_amplitude_numeric(
    traj: &AmplitudeTrajectory,
    matrix: &EffectiveMatrix,
    phases: &[f64],
    detunings: &[f64],
    t: f64,
) -> Result<Vec<C64>> {
    let n = traj.n_qubits();
    if phases.len() != n || matrix.order() != n {
        return Err(Error::invalid(format!(
            "trajectory has {n} qubits, {} phases, matrix order {}",
            phases.len(),
            matrix.order()
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("observation time must be non-negative, got {t}")));
    }
    let times = traj.times();
    let end = times
        .iter()
        .position(|&s| (s - t).abs() <= 1e-9 * t.max(1.0))
        .ok_or_else(|| {
            Error::invalid(format!("observation time {t} is not a trajectory sample"))
        })?;
    if end == 0 {
        return Ok(vec![C64::new(0.0, 0.0); detunings.len()]);
    }

    let max_detuning = detunings.iter().fold(0.0, |m: f64, d| m.max(d.abs()));
    let limit = quadrature_step(max_detuning, n, matrix.gamma());
    let coarsest = times[..=end].windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if coarsest > limit * (1.0 + 1e-9) {
        return Err(Error::GridTooCoarse(format!(
            "sample spacing {coarsest:.3e} exceeds {limit:.3e} required for |δ| ≤ {max_detuning}"
        )));
    }

    let phase_factors: Vec<C64> = phases.iter().map(|p| C64::from_polar(1.0, -p)).collect();
    let mut f = Vec::with_capacity(end + 1);
    let mut df = Vec::with_capacity(end + 1);
    for k in 0..=end {
        let beta = traj.amplitudes_at_sample(k).to_vec();
        f.push(projected(&phase_factors, &beta));
        df.push(projected(&phase_factors, &matrix.apply(&beta)));
    }

    let values = detunings
        .iter()
        .map(|&delta| {
            let mut acc = C64::new(0.0, 0.0);
            let mut cached_h = f64::NAN;
            let mut w = [C64::new(0.0, 0.0); 4];
            let mut phase = C64::new(1.0, 0.0);
            let mut rotation = C64::new(1.0, 0.0);
            for k in 0..end {
                let h = times[k + 1] - times[k];
                // uniform grids differ in the last few bits from step to step
                let fresh = cached_h.is_nan() || (h - cached_h).abs() > 1e-8 * h;
                // advance e^{iδt} by rotation, resynchronising now and then
                if fresh || k % 256 == 0 {
                    phase = C64::from_polar(1.0, delta * times[k]);
                } else {
                    phase *= rotation;
                }
                if fresh {
                    w = hermite_weights(delta * h);
                    rotation = C64::from_polar(1.0, delta * h);
                    cached_h = h;
                }
                let piece = w[0] * f[k] + w[1] * f[k + 1] + h * (w[2] * df[k] + w[3] * df[k + 1]);
                acc += h * phase * piece;
            }
            -C64::i() * acc
        })
        .collect();
    Ok(values)
}

/// `(1 - e^{izt}) / z`, with its series near the removable singularity z = 0.
fn pole_kernel(z: C64, t: f64) -> C64 {
    if z.norm() * t < 1e-3 {
        let w = C64::i() * z * t;
        let mut term = C64::new(1.0, 0.0);
        let mut sum = C64::new(0.0, 0.0);
        for m in 1..=8 {
            term /= m as f64;
            sum += term;
            term *= w;
        }
        -C64::i() * t * sum
    } else {
        (1.0 - (C64::i() * z * t).exp()) / z
    }
}

/// Per-mode projections `Σ_n b_j^{(n)} e^{-iφ_n}`.
pub fn modal_photon_weights(expansion: &ModalExpansion, phases: &[f64]) -> Vec<C64> {
    let phase_factors: Vec<C64> = phases.iter().map(|p| C64::from_polar(1.0, -p)).collect();
    expansion
        .coefficients()
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(&phase_factors).map(|(b, p)| b * p).sum())
        .collect()
}

/// γ(δ, t) from the closed-form modal sum over all modes.
pub fn photon_amplitude_modal(
    expansion: &ModalExpansion,
    phases: &[f64],
    detunings: &[f64],
    t: f64,
) -> Vec<C64> {
    let all: Vec<usize> = (0..expansion.roots().len()).collect();
    photon_amplitude_modal_subset(expansion, phases, detunings, t, &all)
}

/// γ(δ, t) restricted to the listed modes.
pub fn photon_amplitude_modal_subset(
    expansion: &ModalExpansion,
    phases: &[f64],
    detunings: &[f64],
    t: f64,
    modes: &[usize],
) -> Vec<C64> {
    let weights = modal_photon_weights(expansion, phases);
    let roots = expansion.roots();
    detunings
        .iter()
        .map(|&delta| {
            modes
                .iter()
                .map(|&j| weights[j] * pole_kernel(delta - C64::i() * roots[j], t))
                .sum()
        })
        .collect()
}

/// Lorentzian `1 / (δ² + (NΓ/2)²)` of full width NΓ.
pub fn lorentzian_reference(n_qubits: usize, gamma: f64, detunings: &[f64]) -> Vec<f64> {
    let half = 0.5 * n_qubits as f64 * gamma;
    detunings.iter().map(|d| 1.0 / (d * d + half * half)).collect()
}

/// `points` evenly spaced detunings over `[lo, hi]`.
pub fn detuning_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|k| if k + 1 == points { hi } else { lo + k as f64 * step })
                .collect()
        }
    }
}

/// Spectrum of a configured chain at time `t`.
///
/// `Modal` uses the closed form, `AdaptiveOde` integrates the ODE on the
/// quadrature grid and uses the numeric path, and the fallback mode tries the
/// modal route first.
pub fn compute_spectrum(
    config: &ChainConfig,
    detunings: &[f64],
    t: f64,
    method: Method,
    tolerances: &Tolerances,
) -> Result<SpectrumResult> {
    let matrix = build_effective_matrix(config)?;
    let phases = config.phases();
    let initial = config.initial_vector()?.to_vec();
    let modal = || -> Result<Vec<C64>> {
        let modes = characteristic_roots(&matrix)?;
        let expansion = modal_expansion(&modes, &initial)?;
        Ok(photon_amplitude_modal(&expansion, &phases, detunings, t))
    };
    let numeric = || -> Result<Vec<C64>> {
        let times = quadrature_grid(t, detunings, config.n_qubits, config.gamma);
        let traj = evolve(&matrix, &initial, &times, Method::AdaptiveOde, tolerances)?;
        photon_amplitude_numeric(&traj, &matrix, &phases, detunings, *times.last().unwrap())
    };
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("observation time must be non-negative, got {t}")));
    }
    let gamma_values = match method {
        Method::Modal => modal()?,
        Method::AdaptiveOde => numeric()?,
        Method::ModalWithOdeFallback => match modal() {
            Ok(v) => v,
            Err(Error::DefectiveEigenbasis { .. }) | Err(Error::Eigensolver(_)) => numeric()?,
            Err(e) => return Err(e),
        },
    };
    Ok(SpectrumResult::from_amplitudes(
        detunings.to_vec(),
        t,
        gamma_values,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Tolerances;
    use std::f64::consts::PI;

    #[test]
    fn moments_match_across_branches() {
        for theta in [0.4999, 0.5, 0.5001] {
            let a = oscillatory_moments(theta);
            // crude midpoint-rule reference
            let n = 20000;
            for (j, m) in a.iter().enumerate() {
                let r: C64 = (0..n)
                    .map(|k| {
                        let u = (k as f64 + 0.5) / n as f64;
                        u.powi(j as i32) * C64::from_polar(1.0, theta * u)
                    })
                    .sum::<C64>()
                    / n as f64;
                assert!((m - r).norm() < 1e-8, "theta={theta} j={j}");
            }
        }
    }

    #[test]
    fn kernel_is_continuous_at_threshold() {
        let t = 10.0;
        let z1 = C64::new(0.99999e-4, 0.0);
        let z2 = C64::new(1.00001e-4, 0.0);
        assert!((pole_kernel(z1, t) - pole_kernel(z2, t)).norm() < 1e-6);
        assert!((pole_kernel(C64::new(0.0, 0.0), t) - C64::new(0.0, -t)).norm() < 1e-15);
        assert_eq!(pole_kernel(C64::new(0.3, 0.1), 0.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn lorentzian_fixture() {
        let s = lorentzian_reference(2, 1.0, &[0.0, 1.0]);
        assert!((s[0] - 1.0).abs() < 1e-15);
        assert!((s[1] - 0.5).abs() < 1e-15);
        for n in [1, 3, 7] {
            let half = n as f64 / 2.0;
            let s = lorentzian_reference(n, 1.0, &[0.0, half]);
            assert_eq!(s[1] / s[0], 0.5);
        }
    }

    #[test]
    fn zero_time_gives_zero_amplitude() {
        let cfg = ChainConfig::equidistant(3, PI / 2.0).with_excited(2);
        let d = detuning_grid(-3.0, 3.0, 11);
        for method in [Method::Modal, Method::AdaptiveOde] {
            let s = compute_spectrum(&cfg, &d, 0.0, method, &Tolerances::default()).unwrap();
            assert!(s.s_values.iter().all(|&v| v == 0.0));
            let norm = s.normalized(Normalization::Peak);
            assert!(norm.s_values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn coarse_trajectory_is_rejected() {
        let cfg = ChainConfig::equidistant(2, 1.0);
        let m = build_effective_matrix(&cfg).unwrap();
        let init = cfg.initial_vector().unwrap().to_vec();
        let times = uniform_grid(10.0, 101);
        let traj = evolve(&m, &init, &times, Method::Modal, &Tolerances::default()).unwrap();
        let err = photon_amplitude_numeric(&traj, &m, &cfg.phases(), &[-3.0, 3.0], 10.0)
            .unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse(_)));
        let err = photon_amplitude_numeric(&traj, &m, &cfg.phases(), &[0.0], 3.33).unwrap_err();
        assert!(err.is_invalid_input());
    }

    #[test]
    fn single_qubit_late_time_is_single_pole() {
        let cfg = ChainConfig::equidistant(1, 0.0);
        let d = detuning_grid(-3.0, 3.0, 61);
        let s = compute_spectrum(&cfg, &d, 60.0, Method::AdaptiveOde, &Tolerances::default())
            .unwrap();
        for (delta, g) in d.iter().zip(&s.gamma_values) {
            let want = 1.0 / C64::new(*delta, 0.5);
            // equal up to a global phase
            assert!((g.norm() - want.norm()).abs() < 1e-8 * want.norm());
        }
        let peak = s.dominant_peak().unwrap();
        assert!((2.0 * peak.hwhm.unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn peak_normalisation() {
        let cfg = ChainConfig::equidistant(2, 0.7).with_excited(1);
        let d = detuning_grid(-3.0, 3.0, 301);
        let s = compute_spectrum(&cfg, &d, 30.0, Method::Modal, &Tolerances::default())
            .unwrap()
            .normalized(Normalization::Peak);
        assert!((s.max_value() - 1.0).abs() < 1e-15);
        for (g, v) in s.gamma_values.iter().zip(&s.s_values) {
            assert!((g.norm_sqr() - v).abs() < 1e-14);
        }
    }
}
