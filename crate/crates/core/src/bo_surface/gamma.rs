//! Scaling limit `Γ(R) = lim_{l→∞} l⁷ D^TF(Z, lR)`.

use std::sync::Arc;

use super::curve::{bo_tf, BoPoint};
use crate::error::{contract, Error, Result};
use crate::real::Real;
use crate::tf_atom::UniversalTF;
use crate::tf_molecule::{GridPolicy, NuclearConfiguration, TfOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate<T> {
    pub gamma: T,
    /// Spread between the full fit and the fit without the smallest `l`.
    pub error: T,
    /// Fitted rate `γ₁` in `D(l) = Γ + c l^{−γ₁}`.
    pub rate: T,
    pub l_values: Vec<T>,
    /// `l⁷ D^TF(Z, lR)`, equal to `D^TF(l³Z, R)`.
    pub scaled: Vec<T>,
    pub points: Vec<BoPoint<T>>,
}

impl<T: Real> GammaEstimate<T> {
    /// Whether two estimates agree within their combined error bars.
    pub fn agrees_with(&self, other: &Self) -> bool {
        (self.gamma - other.gamma).mag() <= self.error + other.error
    }
}

/// Relative tolerance on reversals of the sequence before it is rejected.
const MONOTONE_TOL: f64 = 1e-6;

/// Estimates `Γ(R)` for `unit_config` from `D^TF(l³Z, R)` at each `l`.
/// Each value is obtained by TF scaling covariance as `l⁷ D^TF(Z, lR)`.
pub fn gamma_limit<T: Real>(
    unit_config: &NuclearConfiguration<T>,
    l_values: &[T],
    policy: &GridPolicy<T>,
    universal: Arc<UniversalTF<T>>,
    opts: &TfOptions<T>,
) -> Result<GammaEstimate<T>> {
    if l_values.len() < 3 {
        return Err(contract("gamma_limit needs at least three l values"));
    }
    if l_values.windows(2).any(|w| !(w[1] > w[0])) || !(l_values[0] > T::zero()) {
        return Err(contract("l values must be positive and increasing"));
    }
    let points = l_values
        .iter()
        .map(|&l| bo_tf(&unit_config.stretched(l)?, policy, universal.clone(), opts))
        .collect::<Result<Vec<_>>>()?;
    gamma_from_points(l_values, points)
}

/// Combines `D^TF(Z, lR)` samples into a Γ estimate.
pub fn gamma_from_points<T: Real>(l_values: &[T], points: Vec<BoPoint<T>>) -> Result<GammaEstimate<T>> {
    if l_values.len() < 3 || points.len() != l_values.len() {
        return Err(contract("one binding sample per l value, at least three, is required"));
    }
    let scaled: Vec<T> = l_values.iter().zip(&points).map(|(&l, p)| l.powi(7) * p.d).collect();
    check_monotone(&scaled)?;
    let (gamma, _, rate) = extrapolate(l_values, &scaled)?;
    let error = if l_values.len() > 3 {
        let (g2, _, _) = extrapolate(&l_values[1..], &scaled[1..])?;
        (gamma - g2).mag()
    } else {
        (gamma - *scaled.last().unwrap()).mag()
    };
    Ok(GammaEstimate {
        gamma,
        error,
        rate,
        l_values: l_values.to_vec(),
        scaled,
        points,
    })
}

fn check_monotone<T: Real>(y: &[T]) -> Result<()> {
    let scale = y.iter().fold(T::zero(), |m, v| m.max(v.mag()));
    let tol = T::lit(MONOTONE_TOL) * scale;
    let steps: Vec<T> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let up = steps.iter().any(|&s| s > tol);
    let down = steps.iter().any(|&s| s < -tol);
    if up && down {
        return Err(Error::Diagnostic(format!(
            "scaled binding sequence is not monotone: {:?}",
            y.iter().map(|v| v.f64()).collect::<Vec<_>>()
        )));
    }
    Ok(())
}

/// Least-squares fit of `y = Γ + c l^{−γ}` with `γ` by golden section.
/// Returns `(Γ, c, γ)`.
pub fn extrapolate<T: Real>(l: &[T], y: &[T]) -> Result<(T, T, T)> {
    if l.len() < 3 || l.len() != y.len() {
        return Err(contract("extrapolation needs at least three matched samples"));
    }
    let linear = |g: T| -> (T, T, T) {
        let x: Vec<T> = l.iter().map(|&v| v.powf(-g)).collect();
        let n = T::from_usize_lossy(x.len());
        let sx: T = x.iter().copied().sum();
        let sy: T = y.iter().copied().sum();
        let sxx: T = x.iter().map(|&v| v * v).sum();
        let sxy: T = x.iter().zip(y).map(|(&a, &b)| a * b).sum();
        let det = n * sxx - sx * sx;
        let c = (n * sxy - sx * sy) / det;
        let g0 = (sy - c * sx) / n;
        let res: T = x.iter().zip(y).map(|(&a, &b)| (g0 + c * a - b).powi(2)).sum();
        (g0, c, res)
    };
    let (mut a, mut b) = (T::lit(0.01), T::lit(20.0));
    let phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut c1 = b - phi * (b - a);
    let mut c2 = a + phi * (b - a);
    let mut f1 = linear(c1).2;
    let mut f2 = linear(c2).2;
    for _ in 0..200 {
        if f1 < f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - phi * (b - a);
            f1 = linear(c1).2;
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + phi * (b - a);
            f2 = linear(c2).2;
        }
        if b - a < T::lit(1e-12) {
            break;
        }
    }
    let rate = T::lit(0.5) * (a + b);
    let (g0, c, _) = linear(rate);
    Ok((g0, c, rate))
}
