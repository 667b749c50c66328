//! Local exchange–correlation energies `E_xc(ρ) = ∫ g(ρ)` with
//! `g(t) = c t^{1+β}`.

use crate::error::{contract, Error, Result};
use crate::numerics::Mesh;
use crate::real::Real;

/// Shipped families of `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XcKind {
    /// `(3/4)(3/π)^{1/3} t^{4/3}`.
    LdaExchange,
    /// `1.45 t^{4/3}`.
    LiebOxford,
    /// `c t^{1+β}`.
    Power { c: f64, beta: f64 },
    /// `g = 0`: reduced Hartree–Fock.
    Zero,
}

impl XcKind {
    pub fn name(&self) -> String {
        match self {
            XcKind::LdaExchange => "lda_exchange".into(),
            XcKind::LiebOxford => "lieb_oxford".into(),
            XcKind::Power { c, beta } => format!("power({c},{beta})"),
            XcKind::Zero => "zero".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XcFunctional<T> {
    kind: XcKind,
    coefficient: T,
    beta: T,
    beta_minus: T,
    beta_plus: T,
    alpha: T,
    strict: bool,
}

/// Sample points `t ∈ [1e-12, 1e12]` used by the validation.
fn samples<T: Real>() -> impl Iterator<Item = T> {
    (0..=240).map(|i| T::lit(10f64.powf(-12.0 + 0.1 * i as f64)))
}

/// Builds and validates `g`. With `strict` set the conditions
/// `β₊ ≤ 2/5` and `limsup g(t)/t^α > 0` for some `1 ≤ α < 3/2` are enforced
/// as well.
pub fn make_functional<T: Real>(kind: XcKind, strict: bool) -> Result<XcFunctional<T>> {
    let (c, beta) = match kind {
        XcKind::LdaExchange => (0.75 * (3.0 / std::f64::consts::PI).cbrt(), 1.0 / 3.0),
        XcKind::LiebOxford => (1.45, 1.0 / 3.0),
        XcKind::Power { c, beta } => (c, beta),
        XcKind::Zero => (0.0, 1.0 / 3.0),
    };
    if !(c >= 0.0) || !c.is_finite() {
        return Err(contract(format!("xc coefficient must be finite and nonnegative, got {c}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::XcCondition(format!(
            "sup g'(t)/(t^b- + t^b+) < inf needs an exponent b > 0, got {beta}"
        )));
    }
    let f = XcFunctional {
        kind,
        coefficient: T::lit(c),
        beta: T::lit(beta),
        beta_minus: T::lit(beta),
        beta_plus: T::lit(beta),
        alpha: T::lit(1.0 + beta),
        strict,
    };
    if f.g(T::zero()) != T::zero() {
        return Err(Error::XcCondition("g(0) = 0".into()));
    }
    if samples::<T>().any(|t| f.dg(t) < T::zero()) {
        return Err(Error::XcCondition("g' >= 0".into()));
    }
    if !f.normalization().is_finite() {
        return Err(Error::XcCondition("sup g'(t)/(t^b- + t^b+) < inf".into()));
    }
    if strict {
        if beta > 0.4 {
            return Err(Error::XcCondition(format!("0 < b- <= b+ <= 2/5 (b+ = {beta})")));
        }
        let a = 1.0 + beta;
        if c == 0.0 || !(1.0..1.5).contains(&a) {
            return Err(Error::XcCondition(
                "limsup g(t)/t^a > 0 for some 1 <= a < 3/2".into(),
            ));
        }
    }
    Ok(f)
}

impl<T: Real> XcFunctional<T> {
    pub fn kind(&self) -> XcKind {
        self.kind
    }

    pub fn coefficient(&self) -> T {
        self.coefficient
    }

    pub fn beta_minus(&self) -> T {
        self.beta_minus
    }

    pub fn beta_plus(&self) -> T {
        self.beta_plus
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient == T::zero()
    }

    pub fn g(&self, t: T) -> T {
        if t <= T::zero() {
            T::zero()
        } else {
            self.coefficient * t.powf(T::one() + self.beta)
        }
    }

    pub fn dg(&self, t: T) -> T {
        if t <= T::zero() {
            T::zero()
        } else {
            self.coefficient * (T::one() + self.beta) * t.powf(self.beta)
        }
    }

    /// `sup_t g'(t)/(t^{β₋} + t^{β₊})` over the validation samples.
    pub fn normalization(&self) -> T {
        samples::<T>()
            .map(|t| self.dg(t) / (t.powf(self.beta_minus) + t.powf(self.beta_plus)))
            .fold(T::zero(), T::max)
    }
}

/// `∫ g(ρ)` on any mesh.
pub fn exchange_energy<T: Real, G: Mesh<T>>(mesh: &G, rho: &[T], xc: &XcFunctional<T>) -> Result<T> {
    if rho.len() != mesh.len() {
        return Err(contract("density does not match its mesh"));
    }
    if rho.iter().any(|&r| r < T::zero()) {
        return Err(contract("density must be nonnegative"));
    }
    let g: Vec<T> = rho.iter().map(|&r| xc.g(r)).collect();
    Ok(mesh.integrate(&g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_coefficients() {
        let lda = make_functional::<f64>(XcKind::LdaExchange, true).unwrap();
        assert!((lda.coefficient() - 0.738_558_766).abs() < 1e-8);
        assert!((lda.beta_plus() - 1.0 / 3.0).abs() < 1e-15);
        let lo = make_functional::<f64>(XcKind::LiebOxford, true).unwrap();
        assert_eq!(lo.g(1.0), 1.45);
        assert!((lo.g(8.0) - 1.45 * 16.0).abs() < 1e-12);
    }

    #[test]
    fn strict_mode_rejects_steep_power() {
        let err = make_functional::<f64>(XcKind::Power { c: 1.0, beta: 1.0 }, true).unwrap_err();
        assert!(matches!(err, Error::XcCondition(ref m) if m.contains("2/5")));
        assert!(make_functional::<f64>(XcKind::Power { c: 1.0, beta: 1.0 }, false).is_ok());
    }

    #[test]
    fn zero_functional_needs_relaxed_mode() {
        assert!(make_functional::<f64>(XcKind::Zero, true).is_err());
        let z = make_functional::<f64>(XcKind::Zero, false).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.g(3.0), 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = make_functional::<f64>(XcKind::LdaExchange, true).unwrap();
        for t in [1e-3, 0.1, 2.0, 50.0] {
            let d = 1e-6 * t;
            let fd = (f.g(t + d) - f.g(t - d)) / (2.0 * d);
            assert!((fd - f.dg(t)).abs() < 1e-7 * f.dg(t));
        }
    }

    #[test]
    fn normalization_of_lda() {
        let f = make_functional::<f64>(XcKind::LdaExchange, true).unwrap();
        let expected = 0.5 * (3.0 / std::f64::consts::PI).cbrt();
        assert!((f.normalization() - expected).abs() < 1e-12);
    }
}
