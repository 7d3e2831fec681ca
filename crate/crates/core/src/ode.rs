//! Adaptive Dormand–Prince 5(4) integrator for small first-order systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
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
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// What the step observer asks the integrator to do next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Integrates `y' = f(x, y)` from `x0` through the monotone sequence `targets`,
/// returning the state at every target reached. `observe` sees each accepted
/// step and may stop the integration early, in which case the returned vector
/// is shorter than `targets`.
pub fn integrate<const D: usize, F, O>(
    mut f: F,
    x0: f64,
    y0: [f64; D],
    targets: &[f64],
    opts: OdeOptions,
    mut observe: O,
) -> Result<Vec<[f64; D]>>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
    O: FnMut(f64, &[f64; D]) -> Flow,
{
    let mut out = Vec::with_capacity(targets.len());
    if targets.is_empty() {
        return Ok(out);
    }
    let dir = if targets[targets.len() - 1] >= x0 {
        1.0
    } else {
        -1.0
    };
    let mut x = x0;
    let mut y = y0;
    let span = (targets[targets.len() - 1] - x0).abs().max(1e-300);
    let mut h = (span * 1e-3).max(1e-12) * dir;
    let mut k = [[0.0; D]; 7];
    k[0] = f(x, &y);
    let mut steps = 0usize;
    for &target in targets {
        while (target - x) * dir > 0.0 {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::NoConvergence(format!(
                    "ode step budget exhausted at x={x}"
                )));
            }
            let mut last = false;
            let h_try = h;
            if (x + h - target) * dir >= 0.0 {
                h = target - x;
                last = true;
            }
            for s in 1..7 {
                let mut ys = y;
                for (d, v) in ys.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][d];
                    }
                    *v += h * acc;
                }
                k[s] = f(x + C[s] * h, &ys);
            }
            let mut ynew = y;
            for (d, v) in ynew.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..6 {
                    acc += A[6][j] * k[j][d];
                }
                *v += h * acc;
            }
            let mut err = 0.0;
            for d in 0..D {
                let mut e = 0.0;
                for j in 0..7 {
                    e += E[j] * k[j][d];
                }
                let sc = opts.atol + opts.rtol * y[d].abs().max(ynew[d].abs());
                err += (h * e / sc).powi(2);
            }
            let err = (err / D as f64).sqrt();
            if !err.is_finite() {
                h *= 0.1;
                if h.abs() < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::NoConvergence(format!(
                        "non-finite ode state at x={x}"
                    )));
                }
                continue;
            }
            if err <= 1.0 {
                x = if last { target } else { x + h };
                y = ynew;
                k[0] = k[6];
                if observe(x, &y) == Flow::Stop {
                    return Ok(out);
                }
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if last && err <= 1.0 {
                h = h_try;
            } else {
                h *= fac;
            }
            if h.abs() < 1e-14 * (1.0 + x.abs()) {
                return Err(Error::NoConvergence(format!("ode step underflow at x={x}")));
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let ys = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            &[std::f64::consts::PI, 2.0 * std::f64::consts::PI],
            OdeOptions::default(),
            |_, _| Flow::Continue,
        )
        .unwrap();
        assert!(ys[0][0].abs() < 1e-9);
        assert!((ys[1][1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn backward_exponential() {
        let ys = integrate(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            &[-2.0],
            OdeOptions::default(),
            |_, _| Flow::Continue,
        )
        .unwrap();
        assert!((ys[0][0] - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn observer_stops_early() {
        let ys = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            &[1.0, 10.0],
            OdeOptions::default(),
            |_, y| {
                if y[0] < 0.0 {
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            },
        )
        .unwrap();
        assert_eq!(ys.len(), 1);
    }
}
