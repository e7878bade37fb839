//! Dormand-Prince 5(4) integrator for the autonomous linear system `y' = M y`.

use num_complex::Complex64 as C64;

use crate::chain::EffectiveMatrix;
use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

/// Integrates from `times[0]` and returns the state at every requested time.
pub(crate) fn integrate(
    matrix: &EffectiveMatrix,
    initial: &[C64],
    times: &[f64],
    control: StepControl,
) -> Result<Vec<Vec<C64>>> {
    let n = initial.len();
    let mut y = initial.to_vec();
    let mut out = Vec::with_capacity(times.len());
    out.push(y.clone());
    if times.len() < 2 {
        return Ok(out);
    }

    let scale = matrix
        .entries()
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut h = 0.01 / scale;
    let mut t = times[0];
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    k[0] = matrix.apply(&y);
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut steps = 0usize;

    for &target in &times[1..] {
        while t < target {
            steps += 1;
            if steps > control.max_steps {
                return Err(Error::StepControl {
                    t,
                    reason: format!("exceeded {} steps", control.max_steps),
                });
            }
            let remaining = target - t;
            let clamped = h >= remaining;
            let step = if clamped { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) && !clamped {
                return Err(Error::StepControl {
                    t,
                    reason: format!("step size {step:.3e} underflow"),
                });
            }

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (r, a) in A[s][..s].iter().enumerate() {
                        if *a != 0.0 {
                            acc += k[r][i] * (step * a);
                        }
                    }
                    stage[i] = acc;
                }
                k[s] = matrix.apply(&stage);
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }

            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = C64::new(0.0, 0.0);
                for (s, w) in E.iter().enumerate() {
                    if *w != 0.0 {
                        e += k[s][i] * (step * w);
                    }
                }
                let sc = control.atol + control.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();

            if err <= 1.0 {
                t = if clamped { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a step shortened to land on an output time does not shrink h
                h = if clamped { h.max(step * factor) } else { step * factor };
            } else {
                let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                h = step * factor;
                if !h.is_finite() || h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::StepControl {
                        t,
                        reason: format!("cannot meet tolerance (error norm {err:.3e})"),
                    });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
