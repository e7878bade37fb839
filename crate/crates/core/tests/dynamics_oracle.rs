mod common;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgqed::dynamics::{uniform_grid, DEFAULT_PLATEAU_EPS, DEFAULT_PLATEAU_MIN_WIDTH};
use wgqed::{
    analytic_amplitudes_resonant, build_effective_matrix, characteristic_roots, evolve,
    find_plateaus, modal_expansion, reduced_central_cubic_roots, AmplitudeTrajectory,
    ChainConfig, Method, Parity, Tolerances,
};

fn run(cfg: &ChainConfig, times: &[f64], method: Method) -> AmplitudeTrajectory {
    let m = build_effective_matrix(cfg).unwrap();
    let init = cfg.initial_vector().unwrap().to_vec();
    evolve(&m, &init, times, method, &Tolerances::default()).unwrap()
}

fn max_trajectory_diff(a: &AmplitudeTrajectory, b: &AmplitudeTrajectory) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn modal_and_ode_agree_on_random_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let times = uniform_grid(40.0, 2000);
    for _ in 0..20 {
        let n = rng.gen_range(1..=12);
        let kd = common::random_generic_kd(&mut rng, 0.05);
        let cfg = ChainConfig::equidistant(n, kd).with_excited(rng.gen_range(1..=n));
        let modal = run(&cfg, &times, Method::Modal);
        let ode = run(&cfg, &times, Method::AdaptiveOde);
        let d = max_trajectory_diff(&modal, &ode);
        assert!(d < 1e-8, "n={n} kd={kd}: {d:.3e}");
    }
}

#[test]
fn superposition_initial_states_are_accepted() {
    let amp = 0.5f64.sqrt();
    let cfg = ChainConfig::equidistant(3, 0.4 * PI)
        .with_initial_amplitudes(vec![C64::new(amp, 0.0), C64::new(0.0, amp), C64::new(0.0, 0.0)]);
    let times = uniform_grid(10.0, 101);
    let modal = run(&cfg, &times, Method::Modal);
    let ode = run(&cfg, &times, Method::AdaptiveOde);
    assert!(max_trajectory_diff(&modal, &ode) < 1e-8);
    assert!(modal.p_photon()[0].abs() < 1e-12);
}

#[test]
fn resonant_spacings_match_closed_form() {
    let times = uniform_grid(40.0, 400);
    for (kd, parity) in [(2.0 * PI, Parity::Even), (PI, Parity::Odd), (4.0 * PI, Parity::Even)] {
        for n in 1..=12 {
            for n0 in 1..=n {
                let cfg = ChainConfig::equidistant(n, kd).with_excited(n0);
                let traj = run(&cfg, &times, Method::ModalWithOdeFallback);
                for (k, &t) in times.iter().enumerate() {
                    let sol = analytic_amplitudes_resonant(n, n0, parity, t, 1.0).unwrap();
                    let got = traj.amplitudes_at_sample(k).to_vec();
                    let d = common::max_abs_diff(&got, sol.amplitudes.as_slice().unwrap());
                    assert!(d < 1e-8, "kd={kd} n={n} n0={n0} t={t}: {d:.3e}");
                    assert!((traj.p_photon()[k] - sol.p_photon).abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn odd_parity_closed_form_checked_by_integration() {
    let cfg = ChainConfig::equidistant(5, PI).with_excited(2);
    let traj = run(&cfg, &[0.0, 3.0], Method::AdaptiveOde);
    let sol = analytic_amplitudes_resonant(5, 2, Parity::Odd, 3.0, 1.0).unwrap();
    let got = traj.amplitudes_at_sample(1).to_vec();
    assert!(common::max_abs_diff(&got, sol.amplitudes.as_slice().unwrap()) < 1e-8);
}

#[test]
fn amplitudes_freeze_at_one_over_n() {
    for kd in [PI, 2.0 * PI] {
        for n in [2usize, 3, 5, 9] {
            let n0 = (n + 1) / 2;
            let t_frozen = 30.0 / n as f64;
            let times = uniform_grid(40.0, 2000);
            let traj = run(&ChainConfig::equidistant(n, kd).with_excited(n0), &times, Method::AdaptiveOde);
            let nf = n as f64;
            for (k, &t) in times.iter().enumerate().filter(|(_, &t)| t >= t_frozen) {
                for q in 0..n {
                    let limit = if q + 1 == n0 { (nf - 1.0) / nf } else { 1.0 / nf };
                    let d = (traj.amplitudes()[[k, q]].norm() - limit).abs();
                    assert!(d < 1e-6, "kd={kd} n={n} t={t} q={q}: {d:.3e}");
                }
            }
        }
    }
}

#[test]
fn odd_parity_groups_cancel() {
    for n in [4usize, 5, 8, 9] {
        for n0 in 1..=n {
            let times = uniform_grid(10.0, 101);
            let traj = run(&ChainConfig::equidistant(n, 3.0 * PI).with_excited(n0), &times, Method::AdaptiveOde);
            let odd = (1..=n).find(|q| q.abs_diff(n0) % 2 == 1);
            let even = (1..=n).find(|&q| q != n0 && q.abs_diff(n0) % 2 == 0);
            if let (Some(a), Some(b)) = (odd, even) {
                for k in 0..times.len() {
                    let s = traj.amplitudes()[[k, a - 1]] + traj.amplitudes()[[k, b - 1]];
                    assert!(s.norm() < 1e-10, "n={n} n0={n0}");
                }
            }
        }
    }
}

#[test]
fn central_excitation_is_mirror_symmetric() {
    for n in [3usize, 5, 7, 9, 11] {
        let kd = 0.37 * PI + n as f64 * 0.1;
        let times = uniform_grid(40.0, 2000);
        let traj = run(&ChainConfig::equidistant(n, kd).with_excited(n / 2 + 1), &times, Method::Modal);
        for k in 0..times.len() {
            for q in 0..n / 2 {
                let d = (traj.amplitudes()[[k, q]] - traj.amplitudes()[[k, n - 1 - q]]).norm();
                assert!(d < 1e-10, "n={n} q={q}: {d:.3e}");
            }
        }
    }
}

#[test]
fn five_qubit_centre_uses_only_cubic_roots() {
    let cfg = ChainConfig::equidistant(5, PI / 2.0).with_excited(3);
    let times = uniform_grid(40.0, 2000);
    let ode = run(&cfg, &times, Method::AdaptiveOde);

    // rebuild β from the three cubic roots alone: solve for the weights of
    // e^{λt} per qubit from three early samples, then predict the rest
    let roots = reduced_central_cubic_roots();
    let fit_at = [0usize, 100, 200];
    for q in 0..5 {
        let rows: Vec<Vec<C64>> = fit_at
            .iter()
            .map(|&k| roots.iter().map(|l| (l * times[k]).exp()).collect())
            .collect();
        let rhs: Vec<C64> = fit_at.iter().map(|&k| ode.amplitudes()[[k, q]]).collect();
        let w = solve3(&rows, &rhs);
        for (k, &t) in times.iter().enumerate() {
            let pred: C64 = roots.iter().zip(&w).map(|(l, c)| c * (l * t).exp()).sum();
            assert!((pred - ode.amplitudes()[[k, q]]).norm() < 1e-8, "q={q} t={t}");
        }
    }
    for k in 0..times.len() {
        let b = ode.amplitudes_at_sample(k);
        assert!((b[0] - b[4]).norm() < 1e-10);
        assert!((b[1] - b[3]).norm() < 1e-10);
    }

    let modes = characteristic_roots(&build_effective_matrix(&cfg).unwrap()).unwrap();
    let exp = modal_expansion(&modes, &common::basis(5, 3)).unwrap();
    let bright: Vec<C64> = exp
        .mode_weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 1e-10)
        .map(|(j, _)| modes.roots()[j])
        .collect();
    assert_eq!(bright.len(), 3);
    assert!(common::optimal_matching_distance(&bright, &roots) < 1e-8);
}

fn solve3(a: &[Vec<C64>], b: &[C64]) -> Vec<C64> {
    let mut m: Vec<Vec<C64>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    let n = 3;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm()))
            .unwrap();
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    let v = m[c][k];
                    m[r][k] -= f * v;
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

#[test]
fn probability_bookkeeping() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let times = uniform_grid(40.0, 2000);
    for _ in 0..10 {
        let n = rng.gen_range(1..=10);
        let kd = rng.gen_range(0.0..2.0 * PI);
        let cfg = ChainConfig::equidistant(n, kd).with_excited(rng.gen_range(1..=n));
        let traj = run(&cfg, &times, Method::ModalWithOdeFallback);
        let mut previous_norm = f64::INFINITY;
        let mut previous_p = -1.0;
        for k in 0..times.len() {
            let norm: f64 = traj.probabilities().row(k).sum();
            assert!((norm + traj.p_photon()[k] - 1.0).abs() < 1e-12);
            assert!(norm <= previous_norm + 1e-9);
            assert!(traj.p_photon()[k] >= previous_p - 1e-9);
            assert!((0.0..=1.0).contains(&traj.p_photon()[k]));
            previous_norm = norm;
            previous_p = traj.p_photon()[k];
        }
        assert!(traj.p_photon()[0] < 1e-12);
    }
}

#[test]
fn plateaus_three_and_five_qubits() {
    let times = uniform_grid(40.0, 2000);
    let p3 = run(&ChainConfig::equidistant(3, PI / 2.0).with_excited(2), &times, Method::Modal);
    let r3 = find_plateaus(p3.p_photon(), &times, DEFAULT_PLATEAU_EPS, DEFAULT_PLATEAU_MIN_WIDTH)
        .unwrap();
    assert!(!r3.interior.is_empty());
    assert!(r3.saturation.is_some());

    // the first step sits near an extremum of the edge qubits' probability
    let first = r3.interior[0];
    let edge: Vec<f64> = (0..times.len()).map(|k| p3.probabilities()[[k, 0]]).collect();
    let extremum = (1..times.len() - 1)
        .find(|&k| (edge[k] - edge[k - 1]) * (edge[k + 1] - edge[k]) <= 0.0 && times[k] > 1.0)
        .map(|k| times[k])
        .unwrap();
    let nearest_gap = (1..times.len() - 1)
        .filter(|&k| {
            let d1 = edge[k] - edge[k - 1];
            let d2 = edge[k + 1] - edge[k];
            d1 * d2 <= 0.0
        })
        .map(|k| {
            let t = times[k];
            if t < first.start {
                first.start - t
            } else if t > first.end {
                t - first.end
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min);
    assert!(extremum > 0.0);
    assert!(nearest_gap < 1.0, "nearest extremum {nearest_gap} from {first:?}");

    let p5 = run(&ChainConfig::equidistant(5, PI / 2.0).with_excited(3), &times, Method::Modal);
    let r5 = find_plateaus(p5.p_photon(), &times, DEFAULT_PLATEAU_EPS, DEFAULT_PLATEAU_MIN_WIDTH)
        .unwrap();
    assert!(r5.interior.len() >= 2);
    for w in r5.interior.windows(2) {
        assert!(w[0].end < w[1].start);
    }
}
