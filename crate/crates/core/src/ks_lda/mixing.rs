//! Anderson density mixing with a simple-mixing fallback.

use std::collections::VecDeque;

use crate::numerics::eigen::symmetric_eigen;
use crate::real::Real;

pub(crate) struct Anderson<T> {
    depth: usize,
    beta: T,
    weights: Vec<T>,
    history: VecDeque<(Vec<T>, Vec<T>)>,
    last_norm: Option<T>,
}

impl<T: Real> Anderson<T> {
    /// `weights` define the inner product, e.g. quadrature weights.
    pub fn new(depth: usize, beta: T, weights: Vec<T>) -> Self {
        Self {
            depth,
            beta,
            weights,
            history: VecDeque::new(),
            last_norm: None,
        }
    }

    fn dot(&self, a: &[T], b: &[T]) -> T {
        a.iter().zip(b).zip(&self.weights).map(|((&x, &y), &w)| w * x * y).sum()
    }

    /// Next input from the current input `x` and output `y`.
    pub fn next(&mut self, x: &[T], y: &[T]) -> Vec<T> {
        let f: Vec<T> = y.iter().zip(x).map(|(&a, &b)| a - b).collect();
        let norm = self.dot(&f, &f).sqrt();
        if let Some(prev) = self.last_norm {
            if norm > prev {
                self.history.clear();
            }
        }
        self.last_norm = Some(norm);
        self.history.push_back((x.to_vec(), f.clone()));
        if self.history.len() > self.depth + 1 {
            self.history.pop_front();
        }
        let mut out: Vec<T> = x.iter().zip(&f).map(|(&a, &b)| a + self.beta * b).collect();
        let m = self.history.len() - 1;
        if m > 0 {
            let dx: Vec<Vec<T>> = (0..m)
                .map(|i| diff(&self.history[i + 1].0, &self.history[i].0))
                .collect();
            let df: Vec<Vec<T>> = (0..m)
                .map(|i| diff(&self.history[i + 1].1, &self.history[i].1))
                .collect();
            let mut a = vec![T::zero(); m * m];
            let mut b = vec![T::zero(); m];
            for i in 0..m {
                for j in 0..m {
                    a[i * m + j] = self.dot(&df[i], &df[j]);
                }
                b[i] = self.dot(&df[i], &f);
            }
            if let Some(gamma) = solve_regularised(&a, &b, m) {
                for (k, &g) in gamma.iter().enumerate() {
                    for (o, (&ddx, &ddf)) in out.iter_mut().zip(dx[k].iter().zip(&df[k])) {
                        *o -= g * (ddx + self.beta * ddf);
                    }
                }
            }
        }
        for o in out.iter_mut() {
            *o = o.max(T::zero());
        }
        out
    }
}

fn diff<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// Least-squares solve of the small normal equations through their
/// eigendecomposition, discarding near-null directions.
fn solve_regularised<T: Real>(a: &[T], b: &[T], m: usize) -> Option<Vec<T>> {
    let (vals, vecs) = symmetric_eigen(a, m);
    let top = vals.iter().copied().fold(T::zero(), T::max);
    if !(top > T::zero()) {
        return None;
    }
    let mut x = vec![T::zero(); m];
    for (lam, v) in vals.iter().zip(&vecs) {
        if *lam > top * T::lit(1e-10) {
            let c: T = v.iter().zip(b).map(|(&p, &q)| p * q).sum::<T>() / *lam;
            for (xi, &vi) in x.iter_mut().zip(v) {
                *xi += c * vi;
            }
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_linear_fixed_point_quickly() {
        // x = A x + c with a contraction A.
        let a = [[0.6, 0.2, 0.0], [0.1, 0.5, 0.2], [0.0, 0.3, 0.4]];
        let c = [1.0, 2.0, 0.5];
        let map = |x: &[f64]| -> Vec<f64> {
            (0..3).map(|i| c[i] + (0..3).map(|j| a[i][j] * x[j]).sum::<f64>()).collect()
        };
        let mut mix = Anderson::new(5, 0.5, vec![1.0; 3]);
        let mut x = vec![0.0; 3];
        let mut it = 0;
        loop {
            let y = map(&x);
            let r: f64 = y.iter().zip(&x).map(|(p, q)| (p - q).abs()).sum();
            if r < 1e-12 {
                break;
            }
            x = mix.next(&x, &y);
            it += 1;
            assert!(it < 20, "no convergence");
        }
    }
}
