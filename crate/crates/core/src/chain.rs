//! Chain geometry and the effective coupling matrix.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the Euclidean norm of an explicit initial amplitude vector.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Initial condition of the qubit amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Only qubit `n₀` (1-based, counted from the left) is excited.
    Excited(usize),
    /// An explicit normalised amplitude vector.
    Amplitudes(Vec<C64>),
}

/// Parameters of an equidistant or explicitly positioned chain.
///
/// Positions are stored as phases `k·x_n` so the group velocity and the bare
/// qubit frequency never appear; in the equidistant case `kd` is the only
/// geometry parameter and `φ_n = (n-1)·kd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_qubits: usize,
    /// Single-qubit decay rate Γ.
    pub gamma: f64,
    /// Phase per spacing `k·d` in radians.
    pub kd: f64,
    /// Explicit phases `k·x_n`; overrides `kd` when present.
    pub positions: Option<Vec<f64>>,
    pub initial: InitialState,
}

impl ChainConfig {
    /// Equidistant chain with Γ = 1 and the first qubit excited.
    pub fn equidistant(n_qubits: usize, kd: f64) -> Self {
        Self {
            n_qubits,
            gamma: 1.0,
            kd,
            positions: None,
            initial: InitialState::Excited(1),
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_excited(mut self, index: usize) -> Self {
        self.initial = InitialState::Excited(index);
        self
    }

    pub fn with_initial_amplitudes(mut self, amplitudes: Vec<C64>) -> Self {
        self.initial = InitialState::Amplitudes(amplitudes);
        self
    }

    /// Explicit phases `k·x_n`; `n_qubits` is set to their count.
    pub fn with_positions(mut self, phases: Vec<f64>) -> Self {
        self.n_qubits = phases.len();
        self.positions = Some(phases);
        self
    }

    /// Index of the centre qubit for odd chains.
    pub fn central_index(&self) -> Option<usize> {
        (self.n_qubits % 2 == 1).then_some(self.n_qubits / 2 + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::invalid("chain must contain at least one qubit"));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid(format!(
                "decay rate must be positive and finite, got {}",
                self.gamma
            )));
        }
        match &self.positions {
            Some(phases) => {
                if phases.len() != self.n_qubits {
                    return Err(Error::invalid(format!(
                        "{} positions given for {} qubits",
                        phases.len(),
                        self.n_qubits
                    )));
                }
                if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
                    return Err(Error::invalid(format!("non-finite position {bad}")));
                }
                if let Some(w) = phases.windows(2).position(|w| w[1] <= w[0]) {
                    return Err(Error::invalid(format!(
                        "positions must be strictly increasing (qubits {} and {})",
                        w + 1,
                        w + 2
                    )));
                }
            }
            None => {
                if !self.kd.is_finite() {
                    return Err(Error::invalid(format!("non-finite kd {}", self.kd)));
                }
            }
        }
        match &self.initial {
            InitialState::Excited(index) => {
                if *index == 0 || *index > self.n_qubits {
                    return Err(Error::invalid(format!(
                        "excited qubit {index} outside 1..={}",
                        self.n_qubits
                    )));
                }
            }
            InitialState::Amplitudes(amps) => check_initial_vector(amps, self.n_qubits)?,
        }
        Ok(())
    }

    /// Phases `φ_n = k·x_n`, equidistant unless explicit positions were given.
    pub fn phases(&self) -> Vec<f64> {
        match &self.positions {
            Some(p) => p.clone(),
            None => (0..self.n_qubits).map(|n| n as f64 * self.kd).collect(),
        }
    }

    pub fn initial_vector(&self) -> Result<Array1<C64>> {
        self.validate()?;
        Ok(match &self.initial {
            InitialState::Excited(index) => {
                let mut v = Array1::zeros(self.n_qubits);
                v[*index - 1] = C64::new(1.0, 0.0);
                v
            }
            InitialState::Amplitudes(amps) => Array1::from(amps.clone()),
        })
    }
}

pub(crate) fn check_initial_vector(amps: &[C64], n: usize) -> Result<()> {
    if amps.len() != n {
        return Err(Error::invalid(format!(
            "initial vector has length {}, chain has {n} qubits",
            amps.len()
        )));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::invalid(format!(
            "initial vector must have unit norm, got {norm}"
        )));
    }
    Ok(())
}

/// The N×N matrix `M` of `dβ/dt = M β`. Complex symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMatrix {
    gamma: f64,
    entries: Array2<C64>,
}

impl EffectiveMatrix {
    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    /// `M β`.
    pub fn apply(&self, beta: &[C64]) -> Vec<C64> {
        let n = self.order();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (row, o) in self.entries.rows().into_iter().zip(out.iter_mut()) {
            *o = row.iter().zip(beta).map(|(m, b)| m * b).sum();
        }
        out
    }
}

/// Builds `M` with `M_nn = -Γ/2` and `M_nm = -(Γ/2)·exp(i|φ_m - φ_n|)`.
pub fn build_effective_matrix(config: &ChainConfig) -> Result<EffectiveMatrix> {
    config.validate()?;
    let phases = config.phases();
    let n = phases.len();
    let half = 0.5 * config.gamma;
    let mut entries = Array2::zeros((n, n));
    for i in 0..n {
        entries[[i, i]] = C64::new(-half, 0.0);
        for j in (i + 1)..n {
            let phase = (phases[j] - phases[i]).abs();
            let value = -half * C64::from_polar(1.0, phase);
            entries[[i, j]] = value;
            entries[[j, i]] = value;
        }
    }
    Ok(EffectiveMatrix {
        gamma: config.gamma,
        entries,
    })
}

/// Coherent exchange `J_mn = Γ sin(|φ_m-φ_n|)/2` and dissipative coupling
/// `Γ_mn = Γ cos(|φ_m-φ_n|)`; `J_nn = 0`, `Γ_nn = Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingRates {
    pub coherent: Array2<f64>,
    pub dissipative: Array2<f64>,
}

/// Rates tied to the effective matrix by `M_nm = -(Γ_nm/2 + i J_nm)` for n ≠ m.
pub fn coherent_dissipative_rates(config: &ChainConfig) -> Result<CouplingRates> {
    config.validate()?;
    let phases = config.phases();
    let n = phases.len();
    let g = config.gamma;
    let mut coherent = Array2::zeros((n, n));
    let mut dissipative = Array2::zeros((n, n));
    for i in 0..n {
        dissipative[[i, i]] = g;
        for j in (i + 1)..n {
            let (s, c) = (phases[j] - phases[i]).abs().sin_cos();
            coherent[[i, j]] = 0.5 * g * s;
            coherent[[j, i]] = 0.5 * g * s;
            dissipative[[i, j]] = g * c;
            dissipative[[j, i]] = g * c;
        }
    }
    Ok(CouplingRates {
        coherent,
        dissipative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn five_qubit_quarter_wave_first_row() {
        let m = build_effective_matrix(&ChainConfig::equidistant(5, PI / 2.0)).unwrap();
        let expected = [c(-0.5, 0.0), c(0.0, -0.5), c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0)];
        for (got, want) in m.entries().row(0).iter().zip(expected) {
            assert!((got - want).norm() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn single_qubit_matrix() {
        for kd in [0.3, PI, 7.0] {
            let m = build_effective_matrix(&ChainConfig::equidistant(1, kd).with_gamma(2.5))
                .unwrap();
            assert_eq!(m.entries().shape(), &[1, 1]);
            assert_eq!(m.entries()[[0, 0]], c(-1.25, 0.0));
        }
    }

    #[test]
    fn two_qubits_full_wave_is_all_ones() {
        let m = build_effective_matrix(&ChainConfig::equidistant(2, 2.0 * PI)).unwrap();
        for v in m.entries().iter() {
            assert!((v - c(-0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn rates_at_quarter_wave() {
        let r = coherent_dissipative_rates(&ChainConfig::equidistant(3, PI / 2.0)).unwrap();
        assert!((r.coherent[[0, 1]] - 0.5).abs() < 1e-15);
        assert!(r.dissipative[[0, 1]].abs() < 1e-15);
        assert!(r.coherent[[0, 2]].abs() < 1e-15);
        assert!((r.dissipative[[0, 2]] + 1.0).abs() < 1e-15);
        assert_eq!(r.dissipative[[1, 1]], 1.0);
        assert_eq!(r.coherent[[1, 1]], 0.0);
    }

    #[test]
    fn rates_at_full_wave() {
        let r = coherent_dissipative_rates(&ChainConfig::equidistant(2, 2.0 * PI)).unwrap();
        assert!(r.coherent[[0, 1]].abs() < 1e-15);
        assert!((r.dissipative[[0, 1]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sign_convention_links_rates_and_matrix() {
        let cfg = ChainConfig::equidistant(6, 0.37 * PI).with_gamma(1.7);
        let m = build_effective_matrix(&cfg).unwrap();
        let r = coherent_dissipative_rates(&cfg).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                let want = -c(0.5 * r.dissipative[[i, j]], r.coherent[[i, j]]);
                assert!((m.entries()[[i, j]] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(build_effective_matrix(&ChainConfig::equidistant(0, 1.0)).is_err());
        assert!(build_effective_matrix(&ChainConfig::equidistant(3, 1.0).with_gamma(0.0)).is_err());
        assert!(build_effective_matrix(&ChainConfig::equidistant(3, 1.0).with_gamma(-1.0)).is_err());
        let unordered = ChainConfig::equidistant(3, 1.0).with_positions(vec![0.0, 2.0, 2.0]);
        assert!(matches!(
            build_effective_matrix(&unordered),
            Err(Error::InvalidInput(_))
        ));
        assert!(ChainConfig::equidistant(3, 1.0).with_excited(4).validate().is_err());
        assert!(ChainConfig::equidistant(3, 1.0).with_excited(0).validate().is_err());
        let unnormalised = ChainConfig::equidistant(2, 1.0)
            .with_initial_amplitudes(vec![c(1.0, 0.0), c(0.1, 0.0)]);
        assert!(unnormalised.validate().is_err());
    }

    #[test]
    fn explicit_equidistant_positions_are_bit_identical() {
        let kd = 0.731;
        let eq = build_effective_matrix(&ChainConfig::equidistant(7, kd)).unwrap();
        let phases = (0..7).map(|n| n as f64 * kd).collect();
        let ex = build_effective_matrix(&ChainConfig::equidistant(7, kd).with_positions(phases))
            .unwrap();
        assert_eq!(eq, ex);
    }
}
