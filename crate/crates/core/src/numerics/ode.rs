//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{contract, Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: T,
    pub max_steps: usize,
}

/// What the step observer wants to happen next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` toward `t1` (either direction).
/// `observe` sees every accepted step and may stop the integration early.
/// Returns the final `(t, y)`.
pub fn integrate<T: Real, const N: usize>(
    f: impl Fn(T, &[T; N]) -> [T; N],
    t0: T,
    y0: [T; N],
    t1: T,
    opts: &OdeOptions<T>,
    mut observe: impl FnMut(T, &[T; N]) -> Control,
) -> Result<(T, [T; N])> {
    if !(opts.h_init > T::zero()) {
        return Err(contract("initial step must be positive"));
    }
    let dir = if t1 >= t0 { T::one() } else { -T::one() };
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_init.min(Float::abs(t1 - t0)) * dir;
    let mut k = [[T::zero(); N]; 7];
    k[0] = f(t, &y);
    let mut steps = 0;
    while (t1 - t) * dir > T::zero() {
        if steps >= opts.max_steps {
            return Err(Error::NoConvergence {
                solver: "dopri5",
                iterations: steps,
                residual: (t1 - t).f64(),
                history: Vec::new(),
            });
        }
        if (t + h - t1) * dir > T::zero() {
            h = t1 - t;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = T::lit(A[s][j]);
                if a != T::zero() {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + T::lit(C[s]) * h, &ys);
        }
        let mut y5 = y;
        let mut err = T::zero();
        for i in 0..N {
            let mut d5 = T::zero();
            let mut d4 = T::zero();
            for s in 0..7 {
                d5 += T::lit(B5[s]) * k[s][i];
                d4 += T::lit(B4[s]) * k[s][i];
            }
            y5[i] += h * d5;
            let sc = opts.atol + opts.rtol * Float::abs(y[i]).max(Float::abs(y5[i]));
            let e = h * (d5 - d4) / sc;
            err += e * e;
        }
        err = (err / T::from_usize_lossy(N)).sqrt();
        steps += 1;
        if !err.is_finite() {
            h *= T::lit(0.25);
            continue;
        }
        if err <= T::one() {
            t += h;
            y = y5;
            k[0] = k[6];
            if observe(t, &y) == Control::Stop {
                return Ok((t, y));
            }
        }
        let fac = if err > T::zero() {
            T::lit(0.9) * err.powf(T::lit(-0.2))
        } else {
            T::lit(5.0)
        };
        h *= fac.max(T::lit(0.2)).min(T::lit(5.0));
    }
    Ok((t, y))
}

use num_traits::Float;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let opts = OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            h_init: 1e-3,
            max_steps: 100_000,
        };
        let (t, y) = integrate(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &opts,
            |_, _| Control::Continue,
        )
        .unwrap();
        assert_eq!(t, 10.0);
        assert!((y[0] - 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn backward_and_stop() {
        let opts = OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-2,
            max_steps: 100_000,
        };
        let (t, y) = integrate(
            |_t, y: &[f64; 1]| [y[0]],
            1.0,
            [1f64.exp()],
            0.0,
            &opts,
            |_, _| Control::Continue,
        )
        .unwrap();
        assert_eq!(t, 0.0);
        assert!((y[0] - 1.0).abs() < 1e-9);
        let (t, _) = integrate(
            |_t, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            5.0,
            &opts,
            |_, y| if y[0] > 2.0 { Control::Stop } else { Control::Continue },
        )
        .unwrap();
        assert!(t < 1.0);
    }
}
