//! Named constants and exponents used by the surface diagnostics.

use crate::constants::{eta, sommerfeld, xi};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents<T> {
    /// Leading energy scale `7/3`.
    pub leading: T,
    /// KS–TF remainder `25/11`.
    pub remainder: T,
    pub intermediate: T,
    pub gain: T,
    /// Short-range binding law `−7`.
    pub binding: T,
    /// Screened-potential bound `−4`.
    pub screening: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants<T> {
    /// `3⁴ 2⁻³ π²`.
    pub c_s: T,
    /// `(√73 − 7)/2`.
    pub xi: T,
    /// `(7 + √73)/2`.
    pub eta: T,
    /// `1/198`.
    pub a: T,
    pub exponents: Exponents<T>,
}

impl<T: Real> Constants<T> {
    pub fn new() -> Self {
        Self {
            c_s: sommerfeld(),
            xi: xi(),
            eta: eta(),
            a: T::one() / T::lit(198.0),
            exponents: Exponents {
                leading: T::lit(7.0) / T::lit(3.0),
                remainder: T::lit(25.0) / T::lit(11.0),
                intermediate: T::lit(49.0) / T::lit(36.0),
                gain: T::one() / T::lit(12.0),
                binding: T::lit(-7.0),
                screening: T::lit(-4.0),
            },
        }
    }
}

impl<T: Real> Default for Constants<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_roots() {
        let c = Constants::<f64>::new();
        assert!((c.xi * c.eta - 6.0).abs() < 1e-14);
        assert!((c.eta - c.xi - 7.0).abs() < 1e-14);
        assert!((c.eta * c.eta - 7.0 * c.eta - 6.0).abs() < 1e-12);
        assert!((c.xi * c.xi + 7.0 * c.xi - 6.0).abs() < 1e-13);
        assert_eq!(c.a * 198.0, 1.0);
        assert!((c.exponents.remainder - 25.0 / 11.0).abs() < 1e-15);
    }
}
