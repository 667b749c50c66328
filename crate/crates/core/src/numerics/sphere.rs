//! Quasi-uniform point sets on the unit sphere.

use crate::real::Real;

/// `n` Fibonacci-lattice directions.
pub fn fibonacci_sphere<T: Real>(n: usize) -> Vec<[T; 3]> {
    let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    let nt = T::from_usize_lossy(n);
    (0..n)
        .map(|i| {
            let it = T::from_usize_lossy(i);
            let z = T::one() - (T::lit(2.0) * it + T::one()) / nt;
            let rho = (T::one() - z * z).max(T::zero()).sqrt();
            let phi = golden * it;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Largest `|f|` over `n` points of the sphere `|x - center| = radius`.
pub fn sphere_sup<T: Real>(center: [T; 3], radius: T, n: usize, f: impl Fn([T; 3]) -> T) -> T {
    fibonacci_sphere::<T>(n)
        .into_iter()
        .map(|d| {
            let x = [
                center[0] + radius * d[0],
                center[1] + radius * d[1],
                center[2] + radius * d[2],
            ];
            num_traits::Float::abs(f(x))
        })
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_unit_and_balanced() {
        let pts = fibonacci_sphere::<f64>(400);
        let mut c = [0.0; 3];
        for p in &pts {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
            for a in 0..3 {
                c[a] += p[a] / 400.0;
            }
        }
        assert!(c.iter().all(|x| x.abs() < 1e-2));
    }
}
