//! Independent oracles shared by the integration tests. Nothing here calls
//! into the eigensolver or propagators under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Entries of `M` straight from the coupling formula.
pub fn coupling_matrix(n: usize, kd: f64, gamma: f64) -> Vec<Vec<C64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        C64::new(-0.5 * gamma, 0.0)
                    } else {
                        -0.5 * gamma * C64::from_polar(1.0, kd * i.abs_diff(j) as f64)
                    }
                })
                .collect()
        })
        .collect()
}

fn mat_mul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Coefficients `c[0..=n]` of `det(λI - A) = Σ c_k λ^{n-k}` (c[0] = 1) via
/// the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(a: &[Vec<C64>]) -> Vec<C64> {
    let n = a.len();
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    let mut m: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; n];
    let mut c_prev = C64::new(1.0, 0.0);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = mat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c_prev;
        }
        m = next;
        let am = mat_mul(a, &m);
        let trace: C64 = (0..n).map(|i| am[i][i]).sum();
        let c = -trace / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}

fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of a monic polynomial by Aberth-Ehrlich simultaneous iteration.
pub fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let radius = 1.0 + coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius * 0.7, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = horner(coeffs, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| 1.0 / (z[k] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            z[k] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    // Newton polish
    for r in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(coeffs, *r);
            if dp.norm() > 0.0 {
                *r -= p / dp;
            }
        }
    }
    z
}

/// Smallest achievable max-distance between two equally long root lists
/// (exhaustive over permutations; intended for n ≤ 8).
pub fn optimal_matching_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    fn go(a: &[C64], b: &[C64], used: &mut Vec<bool>, i: usize, current: f64, best: &mut f64) {
        if current >= *best {
            return;
        }
        if i == a.len() {
            *best = current;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(a, b, used, i + 1, current.max((a[i] - b[j]).norm()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

/// Random `kd` in (0, 2π) at least `margin` away from multiples of π.
pub fn random_generic_kd(rng: &mut ChaCha8Rng, margin: f64) -> f64 {
    loop {
        let kd: f64 = rng.gen_range(0.0..2.0 * PI);
        let m = kd / PI;
        if (m - m.round()).abs() * PI > margin {
            return kd;
        }
    }
}

pub fn basis(n: usize, k: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[k - 1] = C64::new(1.0, 0.0);
    v
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
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
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (slope, intercept, 1.0 - ss_res / ss_tot)
}

fn inverse(a: &[Vec<C64>]) -> Option<Vec<Vec<C64>>> {
    let n = a.len();
    let mut m: Vec<Vec<C64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm()))?;
        m.swap(c, p);
        let pivot = m[c][c];
        if pivot.norm() == 0.0 {
            return None;
        }
        for k in 0..2 * n {
            m[c][k] /= pivot;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                for k in 0..2 * n {
                    let v = m[c][k];
                    m[r][k] -= f * v;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Newton refinement of approximate roots of det(A - λI), using
/// d/dλ ln det(A - λI) = -tr((A - λI)^{-1}).
pub fn refine_on_determinant(a: &[Vec<C64>], roots: &[C64]) -> Vec<C64> {
    roots
        .iter()
        .map(|&r0| {
            let mut r = r0;
            for _ in 0..4 {
                let shifted: Vec<Vec<C64>> = a
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let mut row = row.clone();
                        row[i] -= r;
                        row
                    })
                    .collect();
                let Some(inv) = inverse(&shifted) else { break };
                let trace: C64 = (0..a.len()).map(|i| inv[i][i]).sum();
                if trace.norm() == 0.0 || !trace.is_finite() {
                    break;
                }
                let step = 1.0 / trace;
                r += step;
                if step.norm() < 1e-15 {
                    break;
                }
            }
            r
        })
        .collect()
}
