//! The universal Thomas–Fermi function: `y'' = y^{3/2}/√x`, `y(0) = 1`,
//! `y(∞) = 0`.

use num_traits::Float;

use crate::constants::xi;
use crate::error::{contract, Error, Result};
use crate::numerics::ode::{integrate, Control, OdeOptions};
use crate::real::Real;

/// First knot of the tabulated profile; below it the series is used.
const X_FIRST: f64 = 1e-3;
/// Knot spacing in `ln x`.
const DLNX: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct UniversalTF<T: Real> {
    slope_b: T,
    x_max: T,
    x_match: T,
    ys: Vec<T>,
    dys: Vec<T>,
    tail_c: T,
    match_gap: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `y` reached zero: the trial slope is too steep.
    Crossed,
    /// `y'` turned positive: the trial slope is too shallow.
    TurnedUp,
    /// Neither happened before `x_max`.
    Undecided,
}

/// Series about the origin; returns `(y, y')`.
fn series<T: Real>(b: T, x: T) -> (T, T) {
    let s = x.sqrt();
    let x32 = x * s;
    let y = T::one() + b * x + T::lit(4.0 / 3.0) * x32 + T::lit(0.4) * b * x * x32
        + x * x * x / T::lit(3.0)
        + T::lit(3.0 / 70.0) * b * b * x * x * x32
        + T::lit(2.0 / 15.0) * b * x * x * x * x;
    let dy = b + T::lit(2.0) * s + b * x32 + x * x + T::lit(0.15) * b * b * x * x * s
        + T::lit(8.0 / 15.0) * b * x * x * x;
    (y, dy)
}

/// Right-hand side in `s = √x`: `dy/ds = 2 s y'`, `dy'/ds = 2 y^{3/2}`.
fn rhs_s<T: Real>(s: T, u: &[T; 2]) -> [T; 2] {
    let y = u[0].max(T::zero());
    [T::lit(2.0) * s * u[1], T::lit(2.0) * y * y.sqrt()]
}

/// Right-hand side in `t = ln x` for `Y = x³y/144`, `P = x⁴y'/144`.
fn rhs_tail<T: Real>(_t: T, u: &[T; 2]) -> [T; 2] {
    let y = u[0].max(T::zero());
    [T::lit(3.0) * u[0] + u[1], T::lit(4.0) * u[1] + T::lit(12.0) * y * y.sqrt()]
}

fn opts<T: Real>(h: T) -> OdeOptions<T> {
    OdeOptions {
        rtol: T::lit(1e-13).max(T::epsilon() * T::lit(64.0)),
        atol: T::lit(1e-16).max(T::epsilon() * T::lit(1e-2)),
        h_init: h,
        max_steps: 1_000_000,
    }
}

/// Integrates from the series start with slope `b` up to `x_max`, returning
/// the outcome and the abscissa where it was decided.
fn shoot<T: Real>(b: T, x_max: T) -> Result<(Shot, T)> {
    let x0 = T::lit(X_FIRST);
    let (y0, p0) = series(b, x0);
    let mut out = Shot::Undecided;
    let mut at = x_max;
    integrate(
        rhs_s,
        x0.sqrt(),
        [y0, p0],
        x_max.sqrt(),
        &opts(T::lit(1e-3)),
        |s, u| {
            if u[0] < T::zero() {
                out = Shot::Crossed;
            } else if u[1] > T::zero() {
                out = Shot::TurnedUp;
            } else {
                return Control::Continue;
            }
            at = s * s;
            Control::Stop
        },
    )?;
    Ok((out, at))
}

fn knot_x<T: Real>(i: usize) -> T {
    (T::lit(X_FIRST).ln() + T::lit(DLNX) * T::from_usize_lossy(i)).exp()
}

/// Backward tail from far out to `x_m` with correction amplitude `c`;
/// returns `(Y, P)` at `x_m` and optionally records knot values.
fn tail<T: Real>(c: T, x_far: T, knots: &[T], mut record: Option<(&mut [T], &mut [T])>) -> Result<[T; 2]> {
    let xi = xi::<T>();
    let w = c * x_far.powf(-xi);
    let mut u = [T::one() - w, -T::lit(3.0) + (T::lit(3.0) + xi) * w];
    let mut t = x_far.ln();
    for (k, &xk) in knots.iter().enumerate().rev() {
        let tk = xk.ln();
        if tk < t {
            let (_, v) = integrate(rhs_tail, t, u, tk, &opts(T::lit(0.05)), |_, _| Control::Continue)?;
            u = v;
            t = tk;
        }
        if let Some((ys, dys)) = record.as_mut() {
            let x3 = xk * xk * xk;
            ys[k] = T::lit(144.0) * u[0] / x3;
            dys[k] = T::lit(144.0) * u[1] / (x3 * xk);
        }
    }
    Ok(u)
}

impl<T: Real> UniversalTF<T> {
    /// Solves by shooting and bisection on the initial slope, then builds a
    /// tabulated profile on `(0, x_max]`: forward from the origin up to a
    /// matching point, and backward from the Sommerfeld regime beyond it.
    pub fn solve(x_max: T, tol: T) -> Result<Self> {
        if !(x_max >= T::lit(50.0)) {
            return Err(contract(format!("x_max must be at least 50, got {x_max}")));
        }
        if !(tol > T::zero()) {
            return Err(contract("bisection tolerance must be positive"));
        }
        let mut lo = -T::lit(2.0);
        let mut hi = -T::one();
        let (slo, _) = shoot(lo, x_max)?;
        let (shi, _) = shoot(hi, x_max)?;
        if slo != Shot::Crossed || shi != Shot::TurnedUp {
            return Err(Error::Bracket(format!(
                "universal TF slope not bracketed by [{lo}, {hi}] ({slo:?}, {shi:?})"
            )));
        }
        let mut x_lo = T::zero();
        let mut x_hi = T::zero();
        while hi - lo > tol {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match shoot(mid, x_max)? {
                (Shot::Crossed, x) => {
                    lo = mid;
                    x_lo = x;
                }
                (Shot::TurnedUp, x) => {
                    hi = mid;
                    x_hi = x;
                }
                (Shot::Undecided, _) => {
                    lo = mid;
                    hi = mid;
                    x_lo = x_max;
                    x_hi = x_max;
                }
            }
        }
        let b = T::lit(0.5) * (lo + hi);

        // Forward data is trusted to half the smaller divergence point.
        let x_div = [x_lo, x_hi]
            .into_iter()
            .filter(|&x| x > T::zero())
            .fold(x_max, T::min);
        let x_match_target = T::lit(10.0).min(T::lit(0.5) * x_div);
        let n_knots = ((x_max.ln() - T::lit(X_FIRST).ln()) / T::lit(DLNX)).ceil().to_usize().unwrap_or(0) + 1;
        let knots: Vec<T> = (0..n_knots).map(knot_x).collect();
        let i_match = knots
            .iter()
            .rposition(|&x| x <= x_match_target)
            .ok_or_else(|| Error::Bracket("matching point below first knot".into()))?;
        let x_match = knots[i_match];

        let mut ys = vec![T::zero(); n_knots];
        let mut dys = vec![T::zero(); n_knots];
        let (y0, p0) = series(b, knots[0]);
        ys[0] = y0;
        dys[0] = p0;
        let mut u = [y0, p0];
        for k in 1..=i_match {
            let (_, v) = integrate(
                rhs_s,
                knots[k - 1].sqrt(),
                u,
                knots[k].sqrt(),
                &opts(T::lit(1e-3)),
                |_, _| Control::Continue,
            )?;
            u = v;
            ys[k] = u[0];
            dys[k] = u[1];
        }
        let target = x_match * x_match * x_match * ys[i_match] / T::lit(144.0);

        let x_far = T::lit(1e8).max(T::lit(100.0) * x_max);
        let tail_knots = &knots[i_match..];
        let f = |c: T| -> Result<T> { Ok(tail(c, x_far, &knots[i_match..=i_match], None)?[0] - target) };
        let mut c0 = T::lit(10.0);
        let mut c1 = T::lit(16.0);
        let mut f0 = f(c0)?;
        let mut f1 = f(c1)?;
        for _ in 0..60 {
            if Float::abs(f1) <= T::epsilon() * T::lit(4.0) || f1 == f0 {
                break;
            }
            let c2 = c1 - f1 * (c1 - c0) / (f1 - f0);
            c0 = c1;
            f0 = f1;
            c1 = c2;
            f1 = f(c1)?;
        }
        let tail_c = c1;
        let mut ty = vec![T::zero(); tail_knots.len()];
        let mut tdy = vec![T::zero(); tail_knots.len()];
        tail(tail_c, x_far, tail_knots, Some((&mut ty, &mut tdy)))?;
        let match_gap = Float::abs(tdy[0] - dys[i_match]) / Float::abs(dys[i_match]);
        ys[i_match..].copy_from_slice(&ty);
        dys[i_match..].copy_from_slice(&tdy);

        Ok(Self {
            slope_b: b,
            x_max: knots[n_knots - 1],
            x_match,
            ys,
            dys,
            tail_c,
            match_gap,
        })
    }

    /// Initial slope `y'(0)`.
    pub fn slope_b(&self) -> T {
        self.slope_b
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    /// Abscissa where the forward and backward branches are joined.
    pub fn x_match(&self) -> T {
        self.x_match
    }

    /// Amplitude `C` in `x³y/144 ≈ 1 − C x^{-ξ}`.
    pub fn tail_amplitude(&self) -> T {
        self.tail_c
    }

    /// Relative jump of `y'` at the matching point.
    pub fn match_gap(&self) -> T {
        self.match_gap
    }

    /// `(y(x), y'(x))` for `x ≥ 0`.
    pub fn eval(&self, x: T) -> (T, T) {
        let x0 = T::lit(X_FIRST);
        if x < x0 {
            return series(self.slope_b, x.max(T::zero()));
        }
        if x >= self.x_max {
            let xi = xi::<T>();
            let w = self.tail_c * x.powf(-xi);
            let x3 = x * x * x;
            return (
                T::lit(144.0) * (T::one() - w) / x3,
                T::lit(144.0) * (-T::lit(3.0) + (T::lit(3.0) + xi) * w) / (x3 * x),
            );
        }
        let s = (x.ln() - x0.ln()) / T::lit(DLNX);
        let i = s.floor().to_usize().unwrap_or(0).min(self.ys.len() - 2);
        let xa = knot_x::<T>(i);
        let xb = knot_x::<T>(i + 1);
        let hx = xb - xa;
        let t = (x - xa) / hx;
        let (ya, yb, da, db) = (self.ys[i], self.ys[i + 1], self.dys[i] * hx, self.dys[i + 1] * hx);
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let y = h00 * ya + h10 * da + h01 * yb + h11 * db;
        let dh00 = T::lit(6.0) * (t2 - t);
        let dh10 = three * t2 - T::lit(4.0) * t + T::one();
        let dh01 = -dh00;
        let dh11 = three * t2 - two * t;
        let dy = (dh00 * ya + dh10 * da + dh01 * yb + dh11 * db) / hx;
        (y, dy)
    }

    pub fn y(&self, x: T) -> T {
        self.eval(x).0
    }

    /// Fraction of the atomic charge inside scaled radius `x`:
    /// `1 − y + x y'`.
    pub fn charge_fraction(&self, x: T) -> T {
        let (y, dy) = self.eval(x);
        T::one() - y + x * dy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_satisfies_ode_near_origin() {
        let b = -1.588_071_022_611_375_f64;
        let x = 1e-3;
        let dx = 1e-7;
        let (_, d1) = series(b, x + dx);
        let (_, d0) = series(b, x - dx);
        let (y, _) = series(b, x);
        let y2 = (d1 - d0) / (2.0 * dx);
        assert!((y2 - y.powf(1.5) / x.sqrt()).abs() < 1e-6 * y2.abs());
    }

    #[test]
    fn tail_fixed_point_is_exact_solution() {
        let (_, u) = integrate(
            rhs_tail,
            5f64.ln(),
            [1.0, -3.0],
            1e4f64.ln(),
            &opts(0.05),
            |_, _| Control::Continue,
        )
        .unwrap();
        assert!((u[0] - 1.0).abs() < 1e-12 && (u[1] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_range() {
        assert!(UniversalTF::<f64>::solve(10.0, 1e-8).is_err());
    }
}
