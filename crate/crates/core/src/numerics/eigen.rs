//! Symmetric eigenvalue problems: dense (cyclic Jacobi), tridiagonal
//! (Sturm bisection plus inverse iteration) and large sparse (LOBPCG).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poisson::dot;
use crate::error::{contract, Error, Result};
use crate::real::Real;

/// Eigen-decomposition of a dense symmetric `n × n` matrix stored row-major.
/// Returns ascending eigenvalues and the matching eigenvectors (each a
/// column, returned as its own `Vec`).
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<Vec<T>>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += m[i * n + i] * m[i * n + i];
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= eps * eps * diag.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (Float::abs(theta) + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| m[i * n + i]).collect();
    let vecs = order
        .iter()
        .map(|&c| (0..n).map(|r| v[r * n + c]).collect())
        .collect();
    (vals, vecs)
}

use num_traits::Float;

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)` that
/// are strictly below `x`.
pub fn sturm_count<T: Real>(d: &[T], e: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < T::zero() {
        count += 1;
    }
    for i in 1..d.len() {
        let qq = if Float::abs(q) < tiny { tiny } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / qq;
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest (0-based) eigenvalue of a symmetric tridiagonal
/// matrix by bisection.
pub fn tridiagonal_eigenvalue<T: Real>(d: &[T], e: &[T], k: usize, tol: T) -> T {
    let n = d.len();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = (if i > 0 { Float::abs(e[i - 1]) } else { T::zero() })
            + (if i + 1 < n { Float::abs(e[i]) } else { T::zero() });
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = Float::abs(lo).max(Float::abs(hi)).max(T::one());
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if hi - lo <= tol * scale || mid == lo || mid == hi {
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

/// Solves `(T - λ I) x = b` for tridiagonal `T` with partial pivoting.
fn tridiagonal_shifted_solve<T: Real>(d: &[T], e: &[T], lambda: T, b: &mut [T]) {
    let n = d.len();
    let tiny = T::min_positive_value().sqrt();
    // Row i of the factor holds up to three entries u0 (diag), u1, u2.
    let mut u0 = vec![T::zero(); n];
    let mut u1 = vec![T::zero(); n];
    let mut u2 = vec![T::zero(); n];
    let mut cur_diag = d[0] - lambda;
    let mut cur_sup = if n > 1 { e[0] } else { T::zero() };
    let mut cur_sup2 = T::zero();
    for i in 0..n {
        if i + 1 == n {
            u0[i] = if Float::abs(cur_diag) < tiny { tiny } else { cur_diag };
            u1[i] = T::zero();
            u2[i] = T::zero();
            break;
        }
        let sub = e[i];
        let next_diag = d[i + 1] - lambda;
        let next_sup = if i + 2 < n { e[i + 1] } else { T::zero() };
        if Float::abs(cur_diag) >= Float::abs(sub) {
            let piv = if Float::abs(cur_diag) < tiny { tiny } else { cur_diag };
            let l = sub / piv;
            u0[i] = piv;
            u1[i] = cur_sup;
            u2[i] = cur_sup2;
            b[i + 1] -= l * b[i];
            cur_diag = next_diag - l * cur_sup;
            cur_sup = next_sup - l * cur_sup2;
            cur_sup2 = T::zero();
        } else {
            let l = cur_diag / sub;
            u0[i] = sub;
            u1[i] = next_diag;
            u2[i] = next_sup;
            b.swap(i, i + 1);
            b[i + 1] -= l * b[i];
            cur_diag = cur_sup - l * next_diag;
            cur_sup = cur_sup2 - l * next_sup;
            cur_sup2 = T::zero();
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * b[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * b[i + 2];
        }
        b[i] = s / u0[i];
    }
}

/// Unit eigenvector of a symmetric tridiagonal matrix for eigenvalue
/// `lambda` by inverse iteration.
pub fn tridiagonal_eigenvector<T: Real>(d: &[T], e: &[T], lambda: T) -> Vec<T> {
    let n = d.len();
    let mut x: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.01) * T::from_usize_lossy(i % 7))
        .collect();
    for _ in 0..4 {
        tridiagonal_shifted_solve(d, e, lambda, &mut x);
        let nrm = dot(&x, &x).sqrt();
        for v in x.iter_mut() {
            *v /= nrm;
        }
    }
    x
}

#[derive(Debug, Clone)]
pub struct EigenOptions<T> {
    /// Residual tolerance `‖H x - λ x‖` for unit `x`.
    pub tol: T,
    pub max_iter: usize,
    /// Extra block vectors carried along but not required to converge.
    pub guard: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Eigenpairs<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub residuals: Vec<T>,
    pub iterations: usize,
}

/// Orthonormalises the columns in place via the Gram matrix (SVQB),
/// dropping directions that are numerically dependent. Returns the
/// transformation applied, as coefficient vectors over the input basis.
fn svqb<T: Real>(basis: &[Vec<T>]) -> Vec<Vec<T>> {
    let m = basis.len();
    let mut g = vec![T::zero(); m * m];
    for i in 0..m {
        for j in i..m {
            let v = dot(&basis[i], &basis[j]);
            g[i * m + j] = v;
            g[j * m + i] = v;
        }
    }
    let dscale: Vec<T> = (0..m)
        .map(|i| {
            let d = g[i * m + i];
            if d > T::zero() {
                T::one() / d.sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    for i in 0..m {
        for j in 0..m {
            g[i * m + j] *= dscale[i] * dscale[j];
        }
    }
    let (vals, vecs) = symmetric_eigen(&g, m);
    let vmax = vals.iter().copied().fold(T::zero(), T::max);
    let cut = vmax * T::epsilon() * T::lit(1e3);
    let mut out = Vec::new();
    for (lam, v) in vals.iter().zip(&vecs) {
        if *lam > cut {
            let s = T::one() / lam.sqrt();
            out.push((0..m).map(|r| dscale[r] * v[r] * s).collect());
        }
    }
    out
}

fn combine<T: Real>(basis: &[Vec<T>], coeffs: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = basis.first().map_or(0, |b| b.len());
    coeffs
        .iter()
        .map(|c| {
            let mut out = vec![T::zero(); n];
            for (b, &w) in basis.iter().zip(c) {
                if w != T::zero() {
                    for (o, &x) in out.iter_mut().zip(b) {
                        *o += w * x;
                    }
                }
            }
            out
        })
        .collect()
}

/// Two SVQB passes for robustness; returns the overall coefficients.
fn orthonormalize<T: Real>(basis: &[Vec<T>]) -> Vec<Vec<T>> {
    let c1 = svqb(basis);
    let b1 = combine(basis, &c1);
    let c2 = svqb(&b1);
    c2.iter()
        .map(|c| {
            let mut out = vec![T::zero(); basis.len()];
            for (w, cc) in c.iter().zip(&c1) {
                for (o, &x) in out.iter_mut().zip(cc) {
                    *o += *w * x;
                }
            }
            out
        })
        .collect()
}

/// Lowest `k` eigenpairs of a symmetric operator of dimension `n` by
/// locally optimal block preconditioned conjugate gradients.
pub fn lowest_eigenpairs<T: Real>(
    n: usize,
    k: usize,
    apply: impl Fn(&[T], &mut [T]),
    precond: impl Fn(&[T], &mut [T]),
    start: Option<&[Vec<T>]>,
    opts: &EigenOptions<T>,
) -> Result<Eigenpairs<T>> {
    if k == 0 || k > n {
        return Err(contract(format!("cannot request {k} eigenpairs of a dimension-{n} operator")));
    }
    let bs = (k + opts.guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<T>> = Vec::with_capacity(bs);
    if let Some(s) = start {
        for v in s.iter().take(bs) {
            if v.len() != n {
                return Err(contract("starting vector has the wrong length"));
            }
            x.push(v.clone());
        }
    }
    while x.len() < bs {
        x.push((0..n).map(|_| T::lit(rng.gen::<f64>() - 0.5)).collect());
    }
    let apply_block = |vs: &[Vec<T>]| -> Vec<Vec<T>> {
        vs.iter()
            .map(|v| {
                let mut o = vec![T::zero(); n];
                apply(v, &mut o);
                o
            })
            .collect()
    };

    let c = orthonormalize(&x);
    x = combine(&x, &c);
    if x.len() < bs {
        // Replace lost directions with fresh random vectors.
        while x.len() < bs {
            x.push((0..n).map(|_| T::lit(rng.gen::<f64>() - 0.5)).collect());
        }
        let c = orthonormalize(&x);
        x = combine(&x, &c);
    }
    let mut hx = apply_block(&x);
    let (mut lambda, rot) = rayleigh_ritz(&x, &hx, bs);
    x = combine(&x, &rot);
    hx = combine(&hx, &rot);
    let mut p: Vec<Vec<T>> = Vec::new();
    let mut hp: Vec<Vec<T>> = Vec::new();
    let mut residuals = vec![T::infinity(); bs];
    let mut history = Vec::new();

    for iter in 0..opts.max_iter {
        let r: Vec<Vec<T>> = (0..bs)
            .map(|i| hx[i].iter().zip(&x[i]).map(|(&a, &b)| a - lambda[i] * b).collect())
            .collect();
        for i in 0..bs {
            residuals[i] = dot(&r[i], &r[i]).sqrt();
        }
        let worst = residuals[..k].iter().copied().fold(T::zero(), T::max);
        history.push(worst.f64());
        if worst <= opts.tol {
            return Ok(Eigenpairs {
                values: lambda[..k].to_vec(),
                vectors: x[..k].to_vec(),
                residuals: residuals[..k].to_vec(),
                iterations: iter,
            });
        }
        let w: Vec<Vec<T>> = r
            .iter()
            .map(|ri| {
                let mut o = vec![T::zero(); n];
                precond(ri, &mut o);
                o
            })
            .collect();
        let hw = apply_block(&w);
        let mut s: Vec<Vec<T>> = x.clone();
        s.extend(w);
        s.extend(p.iter().cloned());
        let mut hs: Vec<Vec<T>> = hx.clone();
        hs.extend(hw);
        hs.extend(hp.iter().cloned());
        let c = orthonormalize(&s);
        let s2 = combine(&s, &c);
        let hs2 = combine(&hs, &c);
        let (vals, rot) = rayleigh_ritz(&s2, &hs2, bs);
        // Full coefficients over the raw basis s.
        let full: Vec<Vec<T>> = rot
            .iter()
            .map(|rv| {
                let mut out = vec![T::zero(); s.len()];
                for (w, cc) in rv.iter().zip(&c) {
                    for (o, &x) in out.iter_mut().zip(cc) {
                        *o += *w * x;
                    }
                }
                out
            })
            .collect();
        x = combine(&s2, &rot);
        hx = combine(&hs2, &rot);
        let pc: Vec<Vec<T>> = full
            .iter()
            .map(|f| {
                let mut g = f.clone();
                for v in g.iter_mut().take(bs) {
                    *v = T::zero();
                }
                g
            })
            .collect();
        p = combine(&s, &pc);
        hp = combine(&hs, &pc);
        lambda = vals;
        if (iter + 1) % 10 == 0 {
            // Refresh against drift in the implicitly updated products.
            let c = orthonormalize(&x);
            x = combine(&x, &c);
            hx = apply_block(&x);
            let (l2, rot) = rayleigh_ritz(&x, &hx, bs);
            x = combine(&x, &rot);
            hx = combine(&hx, &rot);
            lambda = l2;
            p.clear();
            hp.clear();
        }
    }
    let worst = residuals[..k].iter().copied().fold(T::zero(), T::max);
    Err(Error::NoConvergence {
        solver: "lobpcg",
        iterations: opts.max_iter,
        residual: worst.f64(),
        history,
    })
}

/// Rayleigh–Ritz on an orthonormal basis; returns the lowest `count` Ritz
/// values and their coefficient vectors.
fn rayleigh_ritz<T: Real>(s: &[Vec<T>], hs: &[Vec<T>], count: usize) -> (Vec<T>, Vec<Vec<T>>) {
    let m = s.len();
    let mut a = vec![T::zero(); m * m];
    for i in 0..m {
        for j in i..m {
            let v = T::lit(0.5) * (dot(&s[i], &hs[j]) + dot(&s[j], &hs[i]));
            a[i * m + j] = v;
            a[j * m + i] = v;
        }
    }
    let (vals, vecs) = symmetric_eigen(&a, m);
    let c = count.min(m);
    (vals[..c].to_vec(), vecs[..c].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_spectrum() {
        let n = 5;
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (i + j + 1) as f64 + if i == j { i as f64 } else { 0.0 };
            }
        }
        let (vals, vecs) = symmetric_eigen(&a, n);
        for (l, v) in vals.iter().zip(&vecs) {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                assert!((av - l * v[i]).abs() < 1e-12);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tridiagonal_matches_closed_form() {
        let n = 50;
        let d = vec![2.0f64; n];
        let e = vec![-1.0f64; n - 1];
        for k in 0..5 {
            let lam = tridiagonal_eigenvalue(&d, &e, k, 1e-15);
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((lam - exact).abs() < 1e-12);
            let v = tridiagonal_eigenvector(&d, &e, lam);
            for i in 0..n {
                let mut tv = d[i] * v[i];
                if i > 0 {
                    tv += e[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    tv += e[i] * v[i + 1];
                }
                assert!((tv - lam * v[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lobpcg_on_diagonal_operator() {
        let n = 400;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.5 + ((i * 7) % 3) as f64 * 0.01).collect();
        let mut sorted = diag.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let opts = EigenOptions {
            tol: 1e-9,
            max_iter: 300,
            guard: 2,
            seed: 7,
        };
        let res = lowest_eigenpairs(
            n,
            4,
            |x, y| {
                for i in 0..n {
                    y[i] = diag[i] * x[i];
                }
            },
            |r, z| {
                for i in 0..n {
                    z[i] = r[i] / diag[i];
                }
            },
            None,
            &opts,
        )
        .unwrap();
        for i in 0..4 {
            assert!((res.values[i] - sorted[i]).abs() < 1e-10);
        }
    }
}
