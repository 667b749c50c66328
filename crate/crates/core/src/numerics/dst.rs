//! Diagonalisation of the 7-point Dirichlet Laplacian by sine transforms.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::real::Real;

/// Spectral form of `-Δ_h` on an `m[0] × m[1] × m[2]` block of interior
/// nodes with homogeneous Dirichlet data.
pub struct DirichletLaplacian<T: Real> {
    m: [usize; 3],
    plans: [Arc<dyn Fft<T>>; 3],
    eig: [Vec<T>; 3],
}

impl<T: Real> DirichletLaplacian<T> {
    pub fn new(m: [usize; 3], h: T) -> Self {
        let mut planner = FftPlanner::new();
        let plans = m.map(|n| planner.plan_fft_forward(2 * (n + 1)));
        let eig = m.map(|n| {
            let np1 = T::from_usize_lossy(n + 1);
            (1..=n)
                .map(|k| {
                    let th = T::PI() * T::from_usize_lossy(k) / np1;
                    (T::lit(2.0) - T::lit(2.0) * th.cos()) / (h * h)
                })
                .collect()
        });
        Self { m, plans, eig }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m[0] * self.m[1] * self.m[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest eigenvalue of `-Δ_h`.
    pub fn lowest_eigenvalue(&self) -> T {
        self.eig[0][0] + self.eig[1][0] + self.eig[2][0]
    }

    /// Solves `(a (-Δ_h) + σ) u = f` in place.
    pub fn solve_shifted(&self, f: &mut [T], a: T, sigma: T) {
        assert_eq!(f.len(), self.len());
        self.transform(f);
        let [mx, my, _] = self.m;
        for (idx, v) in f.iter_mut().enumerate() {
            let i = idx % mx;
            let j = (idx / mx) % my;
            let k = idx / (mx * my);
            let lam = self.eig[0][i] + self.eig[1][j] + self.eig[2][k];
            *v /= a * lam + sigma;
        }
        self.transform(f);
        let scale = self
            .m
            .iter()
            .fold(T::one(), |s, &n| s * T::lit(2.0) / T::from_usize_lossy(n + 1));
        for v in f.iter_mut() {
            *v *= scale;
        }
    }

    /// Solves `-Δ_h u = f` in place.
    pub fn solve(&self, f: &mut [T]) {
        self.solve_shifted(f, T::one(), T::zero());
    }

    /// Unnormalised separable DST-I along all three axes.
    fn transform(&self, f: &mut [T]) {
        let [mx, my, mz] = self.m;
        for axis in 0..3 {
            let n = self.m[axis];
            let plan = &self.plans[axis];
            let big = 2 * (n + 1);
            let mut buf = vec![Complex::new(T::zero(), T::zero()); big];
            let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
            let (stride, lines): (usize, Vec<usize>) = match axis {
                0 => (1, (0..my * mz).map(|l| l * mx).collect()),
                1 => (
                    mx,
                    (0..mz)
                        .flat_map(|k| (0..mx).map(move |i| i + k * mx * my))
                        .collect(),
                ),
                _ => (mx * my, (0..mx * my).collect()),
            };
            for start in lines {
                for c in buf.iter_mut() {
                    *c = Complex::new(T::zero(), T::zero());
                }
                for q in 0..n {
                    let x = f[start + q * stride];
                    buf[q + 1].re = x;
                    buf[big - 1 - q].re = -x;
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for q in 0..n {
                    f[start + q * stride] = -buf[q + 1].im * T::lit(0.5);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neg_lap(m: [usize; 3], h: f64, u: &[f64]) -> Vec<f64> {
        let at = |i: isize, j: isize, k: isize| -> f64 {
            if i < 0 || j < 0 || k < 0 || i >= m[0] as isize || j >= m[1] as isize || k >= m[2] as isize {
                0.0
            } else {
                u[i as usize + m[0] * (j as usize + m[1] * k as usize)]
            }
        };
        let mut out = vec![0.0; u.len()];
        for k in 0..m[2] as isize {
            for j in 0..m[1] as isize {
                for i in 0..m[0] as isize {
                    let c = at(i, j, k);
                    let s = at(i - 1, j, k) + at(i + 1, j, k) + at(i, j - 1, k) + at(i, j + 1, k)
                        + at(i, j, k - 1)
                        + at(i, j, k + 1);
                    out[i as usize + m[0] * (j as usize + m[1] * k as usize)] = (6.0 * c - s) / (h * h);
                }
            }
        }
        out
    }

    #[test]
    fn inverts_the_stencil() {
        let m = [5, 7, 4];
        let h = 0.3;
        let lap = DirichletLaplacian::new(m, h);
        let u: Vec<f64> = (0..lap.len()).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.1).collect();
        let mut f = neg_lap(m, h, &u);
        lap.solve(&mut f);
        for (a, b) in f.iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_solve() {
        let m = [6, 6, 6];
        let h = 0.5;
        let lap = DirichletLaplacian::new(m, h);
        let u: Vec<f64> = (0..lap.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut f: Vec<f64> = neg_lap(m, h, &u)
            .iter()
            .zip(&u)
            .map(|(l, x)| 0.5 * l + 2.0 * x)
            .collect();
        lap.solve_shifted(&mut f, 0.5, 2.0);
        for (a, b) in f.iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
