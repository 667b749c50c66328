//! Logarithmic radial mesh for spherically symmetric quantities.
//!
//! Nodes are `r_i = r_min * exp(i * dt)`. Quadrature is carried out in the
//! log variable `t = ln r`, where the integrands of atomic problems are
//! smooth even when the density has an `r^{-3/2}` cusp.

use crate::error::{contract, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    t0: T,
    dt: T,
}

impl<T: Real> RadialGrid<T> {
    /// Builds a log mesh with step `dt` covering `[r_min, r_max]`.
    ///
    /// The point count is rounded up to an odd number so the composite
    /// Simpson weights apply; the last node therefore lands at or beyond
    /// `r_max`.
    pub fn logarithmic(r_min: T, r_max: T, dt: T) -> Result<Self> {
        if !(r_min > T::zero()) || !(r_max > r_min) || !(dt > T::zero()) {
            return Err(contract(format!(
                "radial grid needs 0 < r_min < r_max and dt > 0 (got {r_min}, {r_max}, {dt})"
            )));
        }
        let span = (r_max / r_min).ln();
        let mut n = (span / dt).ceil().to_usize().unwrap_or(0) + 1;
        if n < 5 {
            n = 5;
        }
        if n % 2 == 0 {
            n += 1;
        }
        let t0 = r_min.ln();
        let nodes: Vec<T> = (0..n)
            .map(|i| (t0 + dt * T::from_usize_lossy(i)).exp())
            .collect();
        let four_pi = T::lit(4.0) * T::PI();
        let third = T::lit(1.0 / 3.0);
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let s = if i == 0 || i == n - 1 {
                    T::one()
                } else if i % 2 == 1 {
                    T::lit(4.0)
                } else {
                    T::lit(2.0)
                };
                let mut w = s * dt * third * four_pi * r * r * r;
                if i == 0 {
                    // ball [0, r_min] with the integrand frozen at its first value;
                    // `integrate` refines this with a power-law estimate
                    w += four_pi * r * r * r * third;
                }
                w
            })
            .collect();
        Ok(Self {
            nodes,
            weights,
            t0,
            dt,
        })
    }

    /// Mesh whose nodes are those of `self` multiplied by `scale`.
    pub fn scaled(&self, scale: T) -> Self {
        let s3 = scale * scale * scale;
        Self {
            nodes: self.nodes.iter().map(|&r| r * scale).collect(),
            weights: self.weights.iter().map(|&w| w * s3).collect(),
            t0: self.t0 + scale.ln(),
            dt: self.dt,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Weights for `∫ 4π r² f(r) dr`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn r_min(&self) -> T {
        self.nodes[0]
    }

    pub fn r_max(&self) -> T {
        *self.nodes.last().unwrap()
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// `∫ 4π r² f dr` over the mesh.
    pub fn integrate(&self, f: &[T]) -> T {
        debug_assert_eq!(f.len(), self.len());
        let r0 = self.nodes[0];
        let frozen = T::lit(4.0) * T::PI() * r0 * r0 * r0 / T::lit(3.0) * f[0];
        let body: T = f.iter().zip(&self.weights).map(|(&a, &w)| a * w).sum();
        body - frozen + self.core(f)
    }

    /// `∫_0^{r_0} 4π s² f ds` assuming `f ∝ s^p` below the first node, with
    /// `p` read off the first two samples.
    fn core(&self, f: &[T]) -> T {
        let r0 = self.nodes[0];
        let mut p = T::zero();
        if f[0] != T::zero() && f[1] / f[0] > T::zero() {
            p = (f[1] / f[0]).ln() / self.dt;
            p = p.max(-T::lit(2.5)).min(T::lit(6.0));
        }
        T::lit(4.0) * T::PI() * r0 * r0 * r0 * f[0] / (T::lit(3.0) + p)
    }

    /// Running integral `G_i = ∫_{t_0}^{t_i} g(t) dt` of samples on the
    /// uniform log mesh, fourth order in the interior.
    pub fn cumulative_t(&self, g: &[T]) -> Vec<T> {
        let n = g.len();
        let dt = self.dt;
        let mut out = vec![T::zero(); n];
        for i in 0..n - 1 {
            let piece = if i == 0 {
                dt / T::lit(12.0) * (T::lit(5.0) * g[0] + T::lit(8.0) * g[1] - g[2])
            } else if i == n - 2 {
                dt / T::lit(12.0) * (-g[n - 3] + T::lit(8.0) * g[n - 2] + T::lit(5.0) * g[n - 1])
            } else {
                dt / T::lit(24.0)
                    * (-g[i - 1] + T::lit(13.0) * g[i] + T::lit(13.0) * g[i + 1] - g[i + 2])
            };
            out[i + 1] = out[i] + piece;
        }
        out
    }

    /// Charge inside each node: `Q(r_i) = ∫_0^{r_i} 4π s² f(s) ds`.
    pub fn enclosed(&self, f: &[T]) -> Vec<T> {
        let four_pi = T::lit(4.0) * T::PI();
        let g: Vec<T> = f
            .iter()
            .zip(&self.nodes)
            .map(|(&v, &r)| four_pi * v * r * r * r)
            .collect();
        let core = self.core(f);
        self.cumulative_t(&g).into_iter().map(|q| q + core).collect()
    }

    /// Outer moment `∫_{r_i}^∞ 4π s f(s) ds`, truncated at the last node.
    pub fn outer_moment(&self, f: &[T]) -> Vec<T> {
        let four_pi = T::lit(4.0) * T::PI();
        let g: Vec<T> = f
            .iter()
            .zip(&self.nodes)
            .map(|(&v, &r)| four_pi * v * r * r)
            .collect();
        let c = self.cumulative_t(&g);
        let total = *c.last().unwrap();
        c.into_iter().map(|v| total - v).collect()
    }

    /// Electrostatic potential of a spherical charge density (Newton's theorem).
    pub fn newton_potential(&self, f: &[T]) -> Vec<T> {
        let q = self.enclosed(f);
        let o = self.outer_moment(f);
        self.nodes
            .iter()
            .zip(q.iter().zip(&o))
            .map(|(&r, (&qi, &oi))| qi / r + oi)
            .collect()
    }

    /// Four-point Lagrange interpolation in `t = ln r`. Outside the mesh the
    /// end values are returned.
    pub fn interpolate(&self, f: &[T], r: T) -> T {
        let n = self.len();
        if r <= self.nodes[0] {
            return f[0];
        }
        if r >= self.nodes[n - 1] {
            return f[n - 1];
        }
        let s = (r.ln() - self.t0) / self.dt;
        let i = s.floor().to_usize().unwrap_or(0).min(n - 2);
        let base = i.saturating_sub(1).min(n - 4);
        let x = s - T::from_usize_lossy(base);
        let mut acc = T::zero();
        for a in 0..4 {
            let mut l = T::one();
            for b in 0..4 {
                if a != b {
                    l *= (x - T::from_usize_lossy(b)) / (T::from_usize_lossy(a) - T::from_usize_lossy(b));
                }
            }
            acc += l * f[base + a];
        }
        acc
    }

    /// Index of the first node with `r_i >= r`.
    pub fn locate(&self, r: T) -> usize {
        self.nodes.partition_point(|&x| x < r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_bounds() {
        assert!(RadialGrid::<f64>::logarithmic(0.0, 1.0, 0.01).is_err());
        assert!(RadialGrid::<f64>::logarithmic(1.0, 0.5, 0.01).is_err());
    }

    #[test]
    fn nodes_increase_and_cover() {
        let g = RadialGrid::<f64>::logarithmic(1e-5, 40.0, 0.02).unwrap();
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.r_max() >= 40.0 * (1.0 - 1e-12));
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert_eq!(g.len() % 2, 1);
    }

    #[test]
    fn hydrogenic_density_normalized() {
        let g = RadialGrid::<f64>::logarithmic(1e-6, 60.0, 0.01).unwrap();
        let rho: Vec<f64> = g.nodes().iter().map(|r| (-2.0 * r).exp() / std::f64::consts::PI).collect();
        assert_relative_eq!(g.integrate(&rho), 1.0, epsilon = 1e-9);
        let q = g.enclosed(&rho);
        assert_relative_eq!(*q.last().unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn newton_potential_matches_hydrogen_hartree() {
        let g = RadialGrid::<f64>::logarithmic(1e-6, 60.0, 0.01).unwrap();
        let rho: Vec<f64> = g.nodes().iter().map(|r| (-2.0 * r).exp() / std::f64::consts::PI).collect();
        let v = g.newton_potential(&rho);
        for (i, &r) in g.nodes().iter().enumerate().step_by(97) {
            let exact = 1.0 / r - (1.0 + 1.0 / r) * (-2.0 * r).exp();
            assert!((v[i] - exact).abs() < 1e-8 * (1.0 + exact.abs()), "r={r}");
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_function() {
        let g = RadialGrid::<f64>::logarithmic(1e-3, 10.0, 0.05).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
        for &r in &[0.0123, 0.5, 1.7, 9.1] {
            assert!((g.interpolate(&f, r) - (-r as f64).exp()).abs() < 1e-6);
        }
    }
}
