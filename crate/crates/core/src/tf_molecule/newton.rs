//! Newton–Krylov solver for grid TF equations of the form
//!
//! `-Δ_h u = 4π (m · ρ_TF(a − u − μ) − s)`,
//!
//! where `a` is a fixed potential, `s` a fixed reference density and `m`
//! cell weights in `[0, 1]`. Boundary values of `u` are prescribed.

use crate::constants::tf_density;
use crate::error::{Error, Result};
use crate::numerics::grid3d::Grid3D;
use crate::numerics::poisson::{neg_laplacian, neg_laplacian_interior, pcg};
use crate::real::Real;

#[derive(Debug, Clone, Copy)]
pub struct TfOptions<T> {
    /// Stop once the L² residual of the grid equation, in density units,
    /// falls below `tol` times the total charge scale.
    pub tol: T,
    pub max_newton: usize,
    pub cg_rtol: T,
    pub max_cg: usize,
    /// Relative tolerance on the particle number when bisecting `μ`.
    pub mu_tol: T,
}

impl<T: Real> Default for TfOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_newton: 40,
            cg_rtol: T::lit(1e-3),
            max_cg: 400,
            mu_tol: T::lit(1e-8),
        }
    }
}

pub(crate) struct Problem<'a, T: Real> {
    pub grid: &'a Grid3D<T>,
    pub base: &'a [T],
    pub subtract: Option<&'a [T]>,
    pub mask: Option<&'a [T]>,
    /// Charge scale used to make the stopping test relative.
    pub scale: T,
}

pub(crate) struct Outcome<T> {
    pub u: Vec<T>,
    /// `m · ρ_TF(a − u − μ)` at every node.
    pub rho: Vec<T>,
    pub iterations: usize,
    pub residual: T,
    pub history: Vec<f64>,
}

fn drho<T: Real>(v: T) -> T {
    if v <= T::zero() {
        T::zero()
    } else {
        T::lit(1.5) * tf_density(v, T::lit(2.0)) / v
    }
}

impl<T: Real> Problem<'_, T> {
    fn density(&self, u: &[T], mu: T) -> Vec<T> {
        let two = T::lit(2.0);
        (0..u.len())
            .map(|i| {
                let m = self.mask.map_or(T::one(), |m| m[i]);
                if m == T::zero() {
                    T::zero()
                } else {
                    m * tf_density(self.base[i] - u[i] - mu, two)
                }
            })
            .collect()
    }

    fn source(&self, rho: &[T]) -> Vec<T> {
        match self.subtract {
            Some(s) => rho.iter().zip(s).map(|(&a, &b)| a - b).collect(),
            None => rho.to_vec(),
        }
    }

    /// Returns `(F_interior, ρ, ‖F‖)`.
    fn residual(&self, u: &[T], mu: T) -> (Vec<T>, Vec<T>, T) {
        let g = self.grid;
        let rho = self.density(u, mu);
        let src = self.source(&rho);
        let lap = neg_laplacian(g, u);
        let four_pi = T::lit(4.0) * T::PI();
        let f_full: Vec<T> = lap.iter().zip(&src).map(|(&l, &s)| l - four_pi * s).collect();
        let f = g.gather_interior(&f_full);
        let norm = (f.iter().map(|&v| v * v).sum::<T>() * g.cell_volume()).sqrt() / four_pi;
        (f, rho, norm)
    }

    /// Damped Newton from `u0`, whose boundary layer is kept fixed.
    pub fn solve(&self, mu: T, u0: &[T], opts: &TfOptions<T>) -> Result<Outcome<T>> {
        let g = self.grid;
        let mut u = u0.to_vec();
        let (mut f, mut rho, mut norm) = self.residual(&u, mu);
        let mut history = vec![norm.f64()];
        let target = opts.tol * self.scale.max(T::one());
        let lap = g.laplacian();
        let m = g.interior_dims();
        let h = g.h();
        let four_pi = T::lit(4.0) * T::PI();
        let mut it = 0;
        while norm > target {
            if it >= opts.max_newton {
                return Err(Error::NoConvergence {
                    solver: "tf-newton",
                    iterations: it,
                    residual: norm.f64(),
                    history,
                });
            }
            it += 1;
            let full_d: Vec<T> = (0..g.len())
                .map(|i| {
                    let mk = self.mask.map_or(T::one(), |m| m[i]);
                    four_pi * mk * drho(self.base[i] - u[i] - mu)
                })
                .collect();
            let diag = g.gather_interior(&full_d);
            let rhs: Vec<T> = f.iter().map(|&v| -v).collect();
            let mut delta = vec![T::zero(); rhs.len()];
            pcg(
                |x, out| {
                    neg_laplacian_interior(m, h, x, out);
                    for ((o, &d), &xi) in out.iter_mut().zip(&diag).zip(x) {
                        *o += d * xi;
                    }
                },
                |r, z| {
                    z.copy_from_slice(r);
                    lap.solve(z);
                },
                &rhs,
                &mut delta,
                opts.cg_rtol,
                opts.max_cg,
            );
            let interior = g.gather_interior(&u);
            let mut lambda = T::one();
            let mut accepted = false;
            for _ in 0..20 {
                let trial: Vec<T> = interior
                    .iter()
                    .zip(&delta)
                    .map(|(&a, &d)| a + lambda * d)
                    .collect();
                let mut ut = u.clone();
                g.scatter_interior(&trial, &mut ut);
                let (ft, rt, nt) = self.residual(&ut, mu);
                if nt < norm {
                    u = ut;
                    f = ft;
                    rho = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
                lambda *= T::lit(0.5);
            }
            history.push(norm.f64());
            if !accepted {
                // Stalled at rounding level.
                if norm <= target * T::lit(100.0) {
                    break;
                }
                return Err(Error::NoConvergence {
                    solver: "tf-newton",
                    iterations: it,
                    residual: norm.f64(),
                    history,
                });
            }
        }
        Ok(Outcome {
            u,
            rho,
            iterations: it,
            residual: norm,
            history,
        })
    }
}

impl<T: Real> Problem<'_, T> {
    /// Solves with `μ = 0` if the resulting charge `count(ρ)` stays within
    /// `bound`, otherwise bisects `μ ∈ [0, mu_hi]` until `count(ρ) = bound`.
    pub fn solve_bounded(
        &self,
        u0: &[T],
        bound: T,
        mu_hi: T,
        count: impl Fn(&[T]) -> T,
        opts: &TfOptions<T>,
    ) -> Result<(Outcome<T>, T)> {
        let first = self.solve(T::zero(), u0, opts)?;
        if count(&first.rho) <= bound * (T::one() + opts.mu_tol) {
            return Ok((first, T::zero()));
        }
        let mut lo = T::zero();
        let mut hi = mu_hi;
        let mut warm = first.u.clone();
        let mut best = first;
        let mut mu = T::zero();
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            let o = self.solve(mid, &warm, opts)?;
            let q = count(&o.rho);
            warm.clone_from(&o.u);
            if q > bound {
                lo = mid;
            } else {
                hi = mid;
            }
            best = o;
            mu = mid;
            if num_traits::Float::abs(q - bound) <= opts.mu_tol * bound || hi - lo <= T::epsilon() * hi {
                break;
            }
        }
        let q = count(&best.rho);
        if num_traits::Float::abs(q - bound) > T::lit(1e-4) * bound {
            return Err(Error::Bracket(format!(
                "chemical potential bisection ended with charge {q} for bound {bound}"
            )));
        }
        Ok((best, mu))
    }
}
