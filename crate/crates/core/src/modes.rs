//! Characteristic roots and collective states of the effective matrix.
//!
//! A root λ_i of `det(M - λI) = 0` is a collective mode with complex energy
//! `Ē_i = iλ_i`, i.e. detuning `E_i = -Im λ_i` and decay rate
//! `Γ_i = -2 Re λ_i`. The rates obey `Σ Γ_i = NΓ` because `tr M = -NΓ/2`.

use std::cmp::Ordering;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::chain::{check_initial_vector, EffectiveMatrix};
use crate::error::{Error, Result};
use crate::linalg;

/// Modes with `Γ_i` below this multiple of Γ are dark.
pub const DARK_TOLERANCE: f64 = 1e-8;
/// Largest accepted `‖Mv - λv‖ / ‖v‖`, in units of Γ.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Largest accepted 1-norm condition estimate of the eigenvector matrix.
pub const CONDITION_LIMIT: f64 = 1e10;
/// Smallest root separation, in units of Γ, for the bi-orthogonal decomposition.
pub const SIMPLE_ROOT_SEPARATION: f64 = 1e-8;

const SELF_ORTHOGONAL_TOLERANCE: f64 = 1e-10;
const ORDER_TIE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeClass {
    Dark,
    Subradiant,
    Superradiant,
}

impl ModeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::Dark => "dark",
            ModeClass::Subradiant => "subradiant",
            ModeClass::Superradiant => "superradiant",
        }
    }

    /// `Γ_i = Γ` (a lone qubit) counts as superradiant.
    pub fn classify(decay_rate: f64, gamma: f64) -> Self {
        if decay_rate < DARK_TOLERANCE * gamma {
            ModeClass::Dark
        } else if decay_rate < gamma * (1.0 - 1e-10) {
            ModeClass::Subradiant
        } else {
            ModeClass::Superradiant
        }
    }
}

impl std::str::FromStr for ModeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dark" => Ok(ModeClass::Dark),
            "subradiant" => Ok(ModeClass::Subradiant),
            "superradiant" => Ok(ModeClass::Superradiant),
            other => Err(Error::invalid(format!("unknown mode class {other:?}"))),
        }
    }
}

/// Roots sorted by ascending real part (ties by ascending imaginary part),
/// with unit-norm right eigenvectors stored as matrix columns.
#[derive(Debug, Clone)]
pub struct ModeSet {
    gamma: f64,
    roots: Vec<C64>,
    eigenvectors: Array2<C64>,
    classes: Vec<ModeClass>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    /// `Ē_i = iλ_i`.
    pub fn complex_energies(&self) -> Vec<C64> {
        self.roots.iter().map(|l| C64::i() * l).collect()
    }

    /// Detunings `E_i = -Im λ_i`.
    pub fn energies(&self) -> Vec<f64> {
        self.roots.iter().map(|l| -l.im).collect()
    }

    /// Decay rates `Γ_i = -2 Re λ_i`.
    pub fn decay_rates(&self) -> Vec<f64> {
        self.roots.iter().map(|l| -2.0 * l.re).collect()
    }

    pub fn min_decay_rate(&self) -> f64 {
        self.decay_rates().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn eigenvectors(&self) -> &Array2<C64> {
        &self.eigenvectors
    }

    pub fn classification(&self) -> &[ModeClass] {
        &self.classes
    }

    /// Mode indices from the most subradiant to the most superradiant.
    pub fn radiance_order(&self) -> Vec<usize> {
        let rates = self.decay_rates();
        let mut idx: Vec<usize> = (0..rates.len()).collect();
        idx.sort_by(|&a, &b| rates[a].total_cmp(&rates[b]));
        idx
    }

    /// `‖Mv_i - λ_i v_i‖ / ‖v_i‖` for every mode.
    pub fn residuals(&self, matrix: &EffectiveMatrix) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let v: Vec<C64> = self.eigenvectors.column(i).to_vec();
                let mv = matrix.apply(&v);
                let res = mv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - self.roots[i] * b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                res / norm
            })
            .collect()
    }

    pub fn dark_count(&self) -> usize {
        dark_state_count(self, DARK_TOLERANCE * self.gamma)
    }
}

/// Sorts ascending by real part; runs of equal real part (within a small
/// tolerance) are ordered by imaginary part.
fn sort_roots(roots: &[C64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by(|&a, &b| roots[a].re.total_cmp(&roots[b].re));
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && roots[order[end]].re - roots[order[end - 1]].re <= ORDER_TIE * scale
        {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| {
            roots[a]
                .im
                .partial_cmp(&roots[b].im)
                .unwrap_or(Ordering::Equal)
        });
        start = end;
    }
    order
}

/// Unit 2-norm, largest component real and positive.
fn normalise_column(v: &mut [C64]) {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .fold(C64::new(0.0, 0.0), |best, x| if x.norm() > best.norm() { x } else { best });
    if norm == 0.0 || pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot.conj() / pivot.norm();
    for x in v.iter_mut() {
        *x = *x * phase / norm;
    }
}

/// Solves `det(M - λI) = 0` with a dense general eigensolver.
pub fn characteristic_roots(matrix: &EffectiveMatrix) -> Result<ModeSet> {
    let n = matrix.order();
    let gamma = matrix.gamma();
    let (values, vectors) = linalg::eigen(matrix.entries())?;
    if values.len() != n || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalues".into()));
    }

    let order = sort_roots(&values);
    let roots: Vec<C64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).to_vec();
        normalise_column(&mut col);
        eigenvectors.column_mut(dst).assign(&Array1::from(col));
    }
    let classes = roots
        .iter()
        .map(|l| ModeClass::classify(-2.0 * l.re, gamma))
        .collect();
    let modes = ModeSet {
        gamma,
        roots,
        eigenvectors,
        classes,
    };

    let limit = RESIDUAL_TOLERANCE * gamma.max(1.0);
    if let Some((i, r)) = modes
        .residuals(matrix)
        .into_iter()
        .enumerate()
        .find(|(_, r)| !(*r <= limit))
    {
        return Err(Error::Eigensolver(format!(
            "mode {} has residual {r:.3e}",
            i + 1
        )));
    }
    Ok(modes)
}

/// Number of modes with `Γ_i < tol`.
pub fn dark_state_count(modes: &ModeSet, tol: f64) -> usize {
    modes.decay_rates().iter().filter(|&&g| g < tol).count()
}

/// `β_n(t) = Σ_j b_j^{(n)} exp(λ_j t)`.
#[derive(Debug, Clone)]
pub struct ModalExpansion {
    roots: Vec<C64>,
    /// `b_j^{(n)}` at `[[j, n]]`.
    coefficients: Array2<C64>,
    condition: f64,
}

impl ModalExpansion {
    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    pub fn coefficients(&self) -> &Array2<C64> {
        &self.coefficients
    }

    /// 1-norm condition estimate of the eigenvector matrix used.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn order(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn amplitudes_at(&self, t: f64) -> Array1<C64> {
        let n = self.order();
        let mut out = Array1::zeros(n);
        for (j, root) in self.roots.iter().enumerate() {
            let e = (root * t).exp();
            for q in 0..n {
                out[q] += self.coefficients[[j, q]] * e;
            }
        }
        out
    }

    /// `max_n |b_j^{(n)}|` per mode.
    pub fn mode_weights(&self) -> Vec<f64> {
        self.coefficients
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|b| b.norm()).fold(0.0, f64::max))
            .collect()
    }
}

/// Expands an initial vector over the right eigenvectors.
pub fn modal_expansion(modes: &ModeSet, initial: &[C64]) -> Result<ModalExpansion> {
    let n = modes.len();
    check_initial_vector(initial, n)?;
    let v = modes.eigenvectors();
    let inv = linalg::inverse(v).ok_or(Error::DefectiveEigenbasis {
        condition: f64::INFINITY,
    })?;
    let condition = linalg::norm_1(v) * linalg::norm_1(&inv);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::DefectiveEigenbasis { condition });
    }
    let weights = linalg::mat_vec(&inv, initial);
    let coefficients = Array2::from_shape_fn((n, n), |(j, q)| v[[q, j]] * weights[j]);
    Ok(ModalExpansion {
        roots: modes.roots().to_vec(),
        coefficients,
        condition,
    })
}

/// Collective states `α^{(i)}` normalised by `Σ_n (α_n^{(i)})² = 1` and the
/// amplitudes `A_i` of an initial vector over them.
#[derive(Debug, Clone)]
pub struct CollectiveStateSet {
    roots: Vec<C64>,
    /// `α_n^{(i)}` at `[[i, n]]`.
    alphas: Array2<C64>,
    amplitudes: Vec<C64>,
}

impl CollectiveStateSet {
    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    pub fn alphas(&self) -> &Array2<C64> {
        &self.alphas
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `|A_i| · max_n |α_n^{(i)}|`.
    pub fn weights(&self) -> Vec<f64> {
        self.alphas
            .rows()
            .into_iter()
            .zip(&self.amplitudes)
            .map(|(row, a)| a.norm() * row.iter().map(|x| x.norm()).fold(0.0, f64::max))
            .collect()
    }

    /// `β_n(t) = Σ_i exp(-iĒ_i t) A_i α_n^{(i)}` with `Ē_i = iλ_i`.
    pub fn amplitudes_at(&self, t: f64) -> Array1<C64> {
        let n = self.alphas.ncols();
        let mut out = Array1::zeros(n);
        for (i, root) in self.roots.iter().enumerate() {
            let energy = C64::i() * root;
            let factor = (-C64::i() * energy * t).exp() * self.amplitudes[i];
            for q in 0..n {
                out[q] += factor * self.alphas[[i, q]];
            }
        }
        out
    }

    /// `max_i |Σ_n (α_n^{(i)})² - 1|`.
    pub fn normalisation_defect(&self) -> f64 {
        self.alphas
            .rows()
            .into_iter()
            .map(|r| (r.iter().map(|a| a * a).sum::<C64>() - 1.0).norm())
            .fold(0.0, f64::max)
    }

    /// `max_{i≠j} |Σ_n α_n^{(i)} α_n^{(j)}|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let m = self.alphas.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                let s: C64 = self
                    .alphas
                    .row(i)
                    .iter()
                    .zip(self.alphas.row(j).iter())
                    .map(|(a, b)| a * b)
                    .sum();
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

/// Bi-orthogonal collective-state decomposition; requires a simple spectrum.
pub fn collective_state_decomposition(
    modes: &ModeSet,
    initial: &[C64],
) -> Result<CollectiveStateSet> {
    let n = modes.len();
    check_initial_vector(initial, n)?;
    let roots = modes.roots();
    let min_sep = SIMPLE_ROOT_SEPARATION * modes.gamma();
    for i in 0..n {
        for j in (i + 1)..n {
            let separation = (roots[i] - roots[j]).norm();
            if separation <= min_sep {
                return Err(Error::DegenerateSpectrum {
                    first: i + 1,
                    second: j + 1,
                    separation,
                });
            }
        }
    }

    let v = modes.eigenvectors();
    let mut alphas = Array2::zeros((n, n));
    for i in 0..n {
        let col = v.column(i);
        let square: C64 = col.iter().map(|x| x * x).sum();
        if square.norm() < SELF_ORTHOGONAL_TOLERANCE {
            return Err(Error::SelfOrthogonalMode {
                mode: i + 1,
                norm: square.norm(),
            });
        }
        let scale = square.sqrt();
        for q in 0..n {
            alphas[[i, q]] = col[q] / scale;
        }
    }

    // β_n(0) = Σ_i A_i α_n^{(i)}
    let system = alphas.t().to_owned();
    let amplitudes = linalg::solve(&system, &Array1::from(initial.to_vec())).ok_or(
        Error::DefectiveEigenbasis {
            condition: f64::INFINITY,
        },
    )?;
    Ok(CollectiveStateSet {
        roots: roots.to_vec(),
        alphas,
        amplitudes: amplitudes.to_vec(),
    })
}

/// Roots of the monic cubic `λ³ + a λ² + b λ + c`, Newton-polished.
pub(crate) fn cubic_roots(a: C64, b: C64, c: C64) -> [C64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powu(2) + (p / 3.0).powu(3);
    let sq = disc.sqrt();
    let mut u3 = -q / 2.0 + sq;
    if u3.norm() < (-q / 2.0 - sq).norm() {
        u3 = -q / 2.0 - sq;
    }
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [C64::new(0.0, 0.0); 3];
    if u3.norm() == 0.0 {
        roots = [-shift; 3];
    } else {
        let u = u3.powf(1.0 / 3.0);
        let mut w = C64::new(1.0, 0.0);
        for r in roots.iter_mut() {
            let uk = u * w;
            *r = uk - p / (3.0 * uk) - shift;
            w *= omega;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*r + a) * *r + b) * *r + c;
            let df = (3.0 * *r + 2.0 * a) * *r + b;
            if df.norm() == 0.0 {
                break;
            }
            *r -= f / df;
        }
    }
    roots
}

/// Roots of `λ(λ+1)(λ+1/2) + 1/2 = 0` (units of Γ): the three modes excited
/// by the centre qubit of a five-qubit chain at `kd = π/2`.
pub fn reduced_central_cubic_roots() -> [C64; 3] {
    let roots = cubic_roots(C64::new(1.5, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0));
    let order = sort_roots(&roots);
    [roots[order[0]], roots[order[1]], roots[order[2]]]
}
