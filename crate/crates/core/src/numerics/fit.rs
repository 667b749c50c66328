//! Least-squares fits in log–log coordinates.

use crate::error::{contract, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub slope_stderr: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit<T> {
    /// `y ≈ prefactor · x^exponent`.
    pub exponent: T,
    pub prefactor: T,
    pub r_squared: T,
    pub exponent_stderr: T,
    pub points: usize,
}

pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() {
        return Err(contract("fit needs equally many abscissae and ordinates"));
    }
    let n = xs.len();
    if n < 2 {
        return Err(contract("fit needs at least two points"));
    }
    let nt = T::from_usize_lossy(n);
    let mx = xs.iter().copied().sum::<T>() / nt;
    let my = ys.iter().copied().sum::<T>() / nt;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if !(sxx > T::zero()) {
        return Err(contract("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r_squared = if syy > T::zero() {
        T::one() - ss_res / syy
    } else {
        T::one()
    };
    let slope_stderr = if n > 2 {
        (ss_res / (T::from_usize_lossy(n - 2) * sxx)).sqrt()
    } else {
        T::zero()
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
    })
}

/// Fits `y = A x^p` through the points whose abscissa lies in `[lo, hi]`.
/// Requires at least four such points, all with positive coordinates.
pub fn powerlaw_fit<T: Real>(xs: &[T], ys: &[T], lo: T, hi: T) -> Result<PowerLawFit<T>> {
    if xs.len() != ys.len() {
        return Err(contract("fit needs equally many abscissae and ordinates"));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x < lo || x > hi {
            continue;
        }
        if !(x > T::zero() && y > T::zero()) || !x.is_finite() || !y.is_finite() {
            return Err(contract(format!(
                "power-law fit needs positive finite data, got ({x}, {y})"
            )));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    if lx.len() < 4 {
        return Err(contract(format!(
            "power-law fit needs at least 4 points in the window, got {}",
            lx.len()
        )));
    }
    let lf = linear_fit(&lx, &ly)?;
    Ok(PowerLawFit {
        exponent: lf.slope,
        prefactor: lf.intercept.exp(),
        r_squared: lf.r_squared,
        exponent_stderr: lf.slope_stderr,
        points: lx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_short_or_nonpositive_data() {
        let x = [1.0, 2.0, 3.0];
        assert!(powerlaw_fit(&x, &[1.0, 2.0, 3.0], 0.0, 10.0).is_err());
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!(powerlaw_fit(&x, &[1.0, -2.0, 3.0, 4.0], 0.0, 10.0).is_err());
    }

    proptest! {
        #[test]
        fn exact_power_law_is_recovered(p in -8.0f64..8.0, a in 0.01f64..100.0) {
            let xs: Vec<f64> = (1..9).map(|i| 0.2 * i as f64).collect();
            let ys: Vec<f64> = xs.iter().map(|x| a * x.powf(p)).collect();
            let f = powerlaw_fit(&xs, &ys, 0.0, 10.0).unwrap();
            prop_assert!((f.exponent - p).abs() < 1e-9);
            prop_assert!((f.prefactor / a - 1.0).abs() < 1e-9);
            prop_assert!(f.r_squared > 1.0 - 1e-12);
        }
    }
}
