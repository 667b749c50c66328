//! Poisson problems and Krylov solvers on a [`Grid3D`].

use super::grid3d::{dist, Grid3D};
use crate::real::Real;

/// Multipole moments (through quadrupole) of a grid charge about `center`.
#[derive(Debug, Clone, Copy)]
pub struct Multipole<T> {
    pub center: [T; 3],
    pub charge: T,
    pub dipole: [T; 3],
    pub quadrupole: [[T; 3]; 3],
}

impl<T: Real> Multipole<T> {
    pub fn of(grid: &Grid3D<T>, rho: &[T], center: [T; 3]) -> Self {
        let mut q = T::zero();
        let mut p = [T::zero(); 3];
        let mut m2 = [[T::zero(); 3]; 3];
        for (idx, &v) in rho.iter().enumerate() {
            if v == T::zero() {
                continue;
            }
            let x = grid.point_of(idx);
            let d = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
            let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            q += v;
            for a in 0..3 {
                p[a] += v * d[a];
                for b in 0..3 {
                    let delta = if a == b { r2 } else { T::zero() };
                    m2[a][b] += v * (T::lit(3.0) * d[a] * d[b] - delta);
                }
            }
        }
        let dv = grid.cell_volume();
        Self {
            center,
            charge: q * dv,
            dipole: p.map(|x| x * dv),
            quadrupole: m2.map(|row| row.map(|x| x * dv)),
        }
    }

    /// Potential of the truncated expansion at `x`.
    pub fn potential(&self, x: [T; 3]) -> T {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        let r = dist(x, self.center);
        let r3 = r * r * r;
        let mut v = self.charge / r;
        for a in 0..3 {
            v += self.dipole[a] * d[a] / r3;
        }
        let mut quad = T::zero();
        for a in 0..3 {
            for b in 0..3 {
                quad += self.quadrupole[a][b] * d[a] * d[b];
            }
        }
        v + T::lit(0.5) * quad / (r3 * r * r)
    }
}

/// `-Δ_h u` at interior nodes of a full-grid array; boundary entries are zero.
pub fn neg_laplacian<T: Real>(grid: &Grid3D<T>, u: &[T]) -> Vec<T> {
    let [nx, ny, nz] = grid.dims();
    let inv_h2 = T::one() / (grid.h() * grid.h());
    let sx = 1;
    let sy = nx;
    let sz = nx * ny;
    let mut out = vec![T::zero(); u.len()];
    for k in 1..nz - 1 {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let c = grid.index(i, j, k);
                let s = u[c - sx] + u[c + sx] + u[c - sy] + u[c + sy] + u[c - sz] + u[c + sz];
                out[c] = (T::lit(6.0) * u[c] - s) * inv_h2;
            }
        }
    }
    out
}

/// `-Δ_h` on interior vectors with zero Dirichlet data.
pub fn neg_laplacian_interior<T: Real>(m: [usize; 3], h: T, u: &[T], out: &mut [T]) {
    let [mx, my, mz] = m;
    let inv_h2 = T::one() / (h * h);
    for k in 0..mz {
        for j in 0..my {
            for i in 0..mx {
                let c = i + mx * (j + my * k);
                let mut s = T::zero();
                if i > 0 {
                    s += u[c - 1];
                }
                if i + 1 < mx {
                    s += u[c + 1];
                }
                if j > 0 {
                    s += u[c - mx];
                }
                if j + 1 < my {
                    s += u[c + mx];
                }
                if k > 0 {
                    s += u[c - mx * my];
                }
                if k + 1 < mz {
                    s += u[c + mx * my];
                }
                out[c] = (T::lit(6.0) * u[c] - s) * inv_h2;
            }
        }
    }
}

/// Contribution of the boundary layer of `u` to `-Δ_h` at the adjacent
/// interior nodes, in interior ordering, with the sign convention
/// `-Δ_h u = A u_int - boundary_source`.
pub fn boundary_source<T: Real>(grid: &Grid3D<T>, u: &[T]) -> Vec<T> {
    let [nx, ny, nz] = grid.dims();
    let inv_h2 = T::one() / (grid.h() * grid.h());
    let mut out = Vec::with_capacity(grid.interior_len());
    for k in 1..nz - 1 {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let mut s = T::zero();
                if i == 1 {
                    s += u[grid.index(0, j, k)];
                }
                if i == nx - 2 {
                    s += u[grid.index(nx - 1, j, k)];
                }
                if j == 1 {
                    s += u[grid.index(i, 0, k)];
                }
                if j == ny - 2 {
                    s += u[grid.index(i, ny - 1, k)];
                }
                if k == 1 {
                    s += u[grid.index(i, j, 0)];
                }
                if k == nz - 2 {
                    s += u[grid.index(i, j, nz - 1)];
                }
                out.push(s * inv_h2);
            }
        }
    }
    out
}

/// Fills the boundary layer of `u` with `f(x)`.
pub fn set_boundary<T: Real>(grid: &Grid3D<T>, u: &mut [T], f: impl Fn([T; 3]) -> T) {
    let [nx, ny, nz] = grid.dims();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if grid.is_boundary(i, j, k) {
                    u[grid.index(i, j, k)] = f(grid.point(i, j, k));
                }
            }
        }
    }
}

/// Solves `-Δ_h u = 4π ρ` with boundary data supplied by `boundary`.
pub fn poisson_solve_with<T: Real>(
    grid: &Grid3D<T>,
    rho: &[T],
    boundary: impl Fn([T; 3]) -> T,
) -> Vec<T> {
    let mut u = vec![T::zero(); grid.len()];
    set_boundary(grid, &mut u, boundary);
    let bs = boundary_source(grid, &u);
    let mut rhs = grid.gather_interior(rho);
    let four_pi = T::lit(4.0) * T::PI();
    for (r, b) in rhs.iter_mut().zip(&bs) {
        *r = four_pi * *r + *b;
    }
    grid.laplacian().solve(&mut rhs);
    grid.scatter_interior(&rhs, &mut u);
    u
}

/// Coulomb potential of a grid charge, with boundary values from its
/// multipole expansion about the box center.
pub fn poisson_solve<T: Real>(grid: &Grid3D<T>, rho: &[T]) -> Vec<T> {
    let mp = Multipole::of(grid, rho, grid.center());
    poisson_solve_with(grid, rho, |x| mp.potential(x))
}

/// `½ ∫ ρ φ`.
pub fn coulomb_energy<T: Real>(grid: &Grid3D<T>, rho: &[T], phi: &[T]) -> T {
    let s: T = rho.iter().zip(phi).map(|(&a, &b)| a * b).sum();
    T::lit(0.5) * s * grid.cell_volume()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct CgOutcome<T> {
    pub iterations: usize,
    pub residual: T,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for a symmetric positive definite
/// operator. Stops once `‖r‖ ≤ rtol ‖b‖`.
pub fn pcg<T: Real>(
    apply: impl Fn(&[T], &mut [T]),
    precond: impl Fn(&[T], &mut [T]),
    b: &[T],
    x: &mut [T],
    rtol: T,
    max_iter: usize,
) -> CgOutcome<T> {
    let n = b.len();
    let mut ax = vec![T::zero(); n];
    apply(x, &mut ax);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let bnorm = norm2(b).max(T::min_positive_value());
    let mut z = vec![T::zero(); n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = norm2(&r) / bnorm;
    let mut it = 0;
    while res > rtol && it < max_iter {
        apply(&p, &mut ax);
        let pap = dot(&p, &ax);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ax[i];
        }
        it += 1;
        res = norm2(&r) / bnorm;
        if res <= rtol {
            break;
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        iterations: it,
        residual: res,
        converged: res <= rtol,
    }
}
