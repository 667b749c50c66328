//! Spherically averaged Kohn–Sham atoms on a logarithmic radial mesh.
//!
//! With `r = eᵗ` and `u(r) = r R(r) = e^{t/2} v(t)` the radial equation
//! becomes `[−½ ∂ₜ² + (ℓ+½)²/2 + r² V] v = ε r² v`; scaling `w = r v` turns
//! the three-point discretisation into a symmetric tridiagonal eigenproblem
//! whose eigenvectors are orthonormal in `Σ wᵢ² = ∫ R² r² dr`.

use std::sync::Arc;

use super::mixing::Anderson;
use super::options::ScfOptions;
use super::state::{aufbau, EnergyTerms, KSState, Orbital};
use super::xc::XcFunctional;
use crate::error::{contract, Error, Result};
use crate::numerics::eigen::{sturm_count, tridiagonal_eigenvector};
use crate::numerics::{FieldKind, RadialField, RadialGrid};
use crate::real::Real;

/// Default mesh for charge `z`: `r ∈ [10⁻⁵/z, 60]`, `Δt = 0.01`.
pub fn atom_grid<T: Real>(z: T) -> Result<RadialGrid<T>> {
    RadialGrid::logarithmic(T::lit(1e-5) / z, T::lit(60.0), T::lit(0.01))
}

struct Radial<'a, T: Real> {
    grid: &'a RadialGrid<T>,
    /// `4π r³ Δt`: the solver's quadrature weights.
    w: Vec<T>,
}

impl<T: Real> Radial<'_, T> {
    fn integrate(&self, f: &[T]) -> T {
        f.iter().zip(&self.w).map(|(&a, &b)| a * b).sum()
    }

    fn tridiagonal(&self, v: &[T], l: usize) -> (Vec<T>, Vec<T>) {
        let r = self.grid.nodes();
        let dt = self.grid.dt();
        let inv = T::one() / (dt * dt);
        let lh = T::from_usize_lossy(l) + T::lit(0.5);
        let cent = T::lit(0.5) * lh * lh;
        let d = r
            .iter()
            .zip(v)
            .map(|(&ri, &vi)| (inv + cent) / (ri * ri) + vi)
            .collect();
        let e = r
            .windows(2)
            .map(|p| -T::lit(0.5) * inv / (p[0] * p[1]))
            .collect();
        (d, e)
    }
}

/// Eigenvalue `k` (0-based) inside `[lo, hi]` by Sturm bisection.
fn bisect<T: Real>(d: &[T], e: &[T], k: usize, mut lo: T, mut hi: T) -> T {
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid == lo || mid == hi || hi - lo < T::lit(1e-13) {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}

struct Level<T> {
    l: usize,
    eps: T,
    w: Vec<T>,
    residual: T,
}

fn bound_levels<T: Real>(rad: &Radial<'_, T>, v: &[T], opts: &ScfOptions<T>) -> Vec<Level<T>> {
    let lo = v.iter().copied().fold(T::zero(), T::min) - T::one();
    let mut out = Vec::new();
    for l in 0..=opts.l_max {
        let (d, e) = rad.tridiagonal(v, l);
        let count = sturm_count(&d, &e, T::zero()).min(opts.states_per_l);
        for k in 0..count {
            let eps = bisect(&d, &e, k, lo, T::zero());
            let w = tridiagonal_eigenvector(&d, &e, eps);
            let n = d.len();
            let mut res = T::zero();
            for i in 0..n {
                let mut hw = d[i] * w[i] - eps * w[i];
                if i > 0 {
                    hw += e[i - 1] * w[i - 1];
                }
                if i + 1 < n {
                    hw += e[i] * w[i + 1];
                }
                res += hw * hw;
            }
            out.push(Level {
                l,
                eps,
                w,
                residual: res.sqrt(),
            });
        }
    }
    out
}

/// Self-consistent spherically averaged KS ground state of `n` electrons
/// around a bare nucleus of charge `z`.
pub fn scf_atom<T: Real>(
    z: T,
    n: T,
    xc: &XcFunctional<T>,
    grid: Arc<RadialGrid<T>>,
    q: T,
    opts: &ScfOptions<T>,
) -> Result<KSState<T, RadialGrid<T>>> {
    if !(z > T::zero()) {
        return Err(contract(format!("nuclear charge must be positive, got {z}")));
    }
    if n < T::zero() || n > z {
        return Err(contract(format!("electron number {n} outside [0, {z}]")));
    }
    if !(q > T::zero()) {
        return Err(contract("spin degeneracy must be positive"));
    }
    let r = grid.nodes().to_vec();
    let dt = grid.dt();
    let four_pi = T::lit(4.0) * T::PI();
    let rad = Radial {
        grid: &grid,
        w: r.iter().map(|&x| four_pi * x * x * x * dt).collect(),
    };
    if n == T::zero() {
        return Ok(KSState {
            q,
            electrons: n,
            orbitals: Vec::new(),
            rho: RadialField::zeros(grid.clone(), FieldKind::Density),
            energy: EnergyTerms::zero(),
            history: Vec::new(),
            orthonormality: T::zero(),
            max_eigen_residual: T::zero(),
        });
    }
    let v_nuc: Vec<T> = r.iter().map(|&x| -z / x).collect();
    let mut mixer = Anderson::new(opts.depth, opts.mixing, rad.w.clone());
    let mut rho_in = vec![T::zero(); r.len()];
    let mut history = Vec::new();
    for _ in 0..opts.max_iter {
        let vh = grid.newton_potential(&rho_in);
        let v_eff: Vec<T> = (0..r.len())
            .map(|i| v_nuc[i] + vh[i] - xc.dg(rho_in[i]))
            .collect();
        let levels = bound_levels(&rad, &v_eff, opts);
        let spec: Vec<(T, usize)> = levels.iter().map(|lv| (lv.eps, 2 * lv.l + 1)).collect();
        let occ = aufbau(&spec, n, q)?;
        let mut rho_out = vec![T::zero(); r.len()];
        let mut orbitals = Vec::new();
        let mut kinetic = T::zero();
        let mut max_res = T::zero();
        for (lv, &o) in levels.iter().zip(&occ) {
            let scale = T::one() / (four_pi * dt).sqrt();
            let f: Vec<T> = lv
                .w
                .iter()
                .zip(&r)
                .map(|(&wi, &ri)| wi * scale / (ri * ri.sqrt()))
                .collect();
            let mult = T::from_usize_lossy(2 * lv.l + 1);
            if o > T::zero() {
                for (ro, &fi) in rho_out.iter_mut().zip(&f) {
                    *ro += o * mult * fi * fi;
                }
                let pot: Vec<T> = f.iter().zip(&v_eff).map(|(&a, &b)| a * a * b).collect();
                kinetic += o * mult * (lv.eps - rad.integrate(&pot));
                max_res = max_res.max(lv.residual);
            }
            orbitals.push(Orbital {
                eigenvalue: lv.eps,
                occupation: o,
                angular: Some(lv.l),
                values: f,
            });
        }
        let diff: Vec<T> = rho_out.iter().zip(&rho_in).map(|(&a, &b)| (a - b).mag()).collect();
        let res = rad.integrate(&diff) / n;
        history.push(res.f64());
        if res <= opts.density_tol {
            let external = -rad.integrate(&rho_out.iter().zip(&r).map(|(&p, &x)| z * p / x).collect::<Vec<_>>());
            let vh_out = grid.newton_potential(&rho_out);
            let hartree = T::lit(0.5) * rad.integrate(&rho_out.iter().zip(&vh_out).map(|(&a, &b)| a * b).collect::<Vec<_>>());
            let xc_e = rad.integrate(&rho_out.iter().map(|&p| xc.g(p)).collect::<Vec<_>>());
            let ortho = orthonormality(&rad, &orbitals);
            return Ok(KSState {
                q,
                electrons: n,
                orbitals,
                rho: RadialField::new(grid.clone(), rho_out, FieldKind::Density)?,
                energy: EnergyTerms::new(kinetic, external, hartree, xc_e),
                history,
                orthonormality: ortho,
                max_eigen_residual: max_res,
            });
        }
        rho_in = mixer.next(&rho_in, &rho_out);
        let charge = grid.integrate(&rho_in);
        if charge > n {
            let s = n / charge;
            rho_in.iter_mut().for_each(|r| *r *= s);
        }
    }
    let last = history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NoConvergence {
        solver: "ks-atom",
        iterations: opts.max_iter,
        residual: last,
        history,
    })
}

fn orthonormality<T: Real>(rad: &Radial<'_, T>, orbitals: &[Orbital<T>]) -> T {
    let mut worst = T::zero();
    for (i, a) in orbitals.iter().enumerate() {
        for b in &orbitals[i..] {
            if a.angular != b.angular {
                continue;
            }
            let p: Vec<T> = a.values.iter().zip(&b.values).map(|(&x, &y)| x * y).collect();
            let s = rad.integrate(&p);
            let target = if std::ptr::eq(a, b) { T::one() } else { T::zero() };
            worst = worst.max((s - target).mag());
        }
    }
    worst
}
