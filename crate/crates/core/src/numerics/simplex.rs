//! Nelder–Mead minimization.

use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evaluations: usize,
    /// Simplex collapsed below the tolerance before the budget ran out.
    pub converged: bool,
}

/// Minimizes `f` from the simplex `x0, x0 + step·e_k`, stopping when the
/// spread of simplex values and vertex distances both fall below `tol`.
pub fn nelder_mead<T: Real>(
    mut f: impl FnMut(&[T]) -> T,
    x0: &[T],
    step: &[T],
    tol: T,
    max_evals: usize,
) -> SimplexResult<T> {
    let n = x0.len();
    let mut pts: Vec<Vec<T>> = vec![x0.to_vec()];
    for k in 0..n {
        let mut p = x0.to_vec();
        p[k] += step[k];
        pts.push(p);
    }
    let mut vals: Vec<T> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let (alpha, gamma, rho, sigma) = (T::one(), T::lit(2.0), T::lit(0.5), T::lit(0.5));
    let mut converged = false;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = vals[n] - vals[0];
        let size = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(&a, &b)| (a - b).mag()).fold(T::zero(), T::max))
            .fold(T::zero(), T::max);
        if spread <= tol && size <= tol {
            converged = true;
            break;
        }
        let centroid: Vec<T> = (0..n)
            .map(|k| pts[..n].iter().map(|p| p[k]).sum::<T>() / T::from_usize_lossy(n))
            .collect();
        let along = |t: T| -> Vec<T> {
            centroid.iter().zip(&pts[n]).map(|(&c, &w)| c + t * (c - w)).collect()
        };
        let xr = along(alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(gamma);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(rho * alpha);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let p: Vec<T> = pts[i].iter().zip(&pts[0]).map(|(&a, &b)| b + sigma * (a - b)).collect();
            vals[i] = f(&p);
            pts[i] = p;
            evals += 1;
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    SimplexResult {
        x: pts[best].clone(),
        value: vals[best],
        evaluations: evals,
        converged,
    }
}
