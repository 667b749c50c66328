//! Physical and asymptotic constants.

use crate::real::Real;

/// Sommerfeld constant `3⁴ 2⁻³ π²` of the neutral TF far field.
pub fn sommerfeld<T: Real>() -> T {
    T::lit(81.0 / 8.0) * T::PI() * T::PI()
}

/// Decaying correction exponent `(√73 − 7)/2`.
pub fn xi<T: Real>() -> T {
    (T::lit(73.0).sqrt() - T::lit(7.0)) * T::lit(0.5)
}

/// Growing perturbation exponent `(7 + √73)/2`.
pub fn eta<T: Real>() -> T {
    (T::lit(73.0).sqrt() + T::lit(7.0)) * T::lit(0.5)
}

/// `(3/10)(6π²/q)^{2/3}`; `q = 2` gives `(3/10)(3π²)^{2/3}`.
pub fn tf_kinetic<T: Real>(q: T) -> T {
    T::lit(0.3) * (T::lit(6.0) * T::PI() * T::PI() / q).powf(T::lit(2.0 / 3.0))
}

/// Density from the local Fermi level: inverse of `(5/3) c_TF ρ^{2/3} = v`.
pub fn tf_density<T: Real>(v: T, q: T) -> T {
    if v <= T::zero() {
        return T::zero();
    }
    let c = T::lit(5.0 / 3.0) * tf_kinetic(q);
    (v / c).powf(T::lit(1.5))
}

/// Atomic TF length `½ (3π/4)^{2/3}` at unit charge.
pub fn tf_length<T: Real>() -> T {
    T::lit(0.5) * (T::lit(0.75) * T::PI()).powf(T::lit(2.0 / 3.0))
}
