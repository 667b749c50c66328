//! Outside-model cross terms `Q_ij` and the outside decomposition of `D^TF`.

use std::sync::Arc;

use crate::error::{contract, Result};
use crate::numerics::grid3d::dist;
use crate::numerics::quad::gauss_legendre;
use crate::numerics::{FieldKind, GridField};
use crate::real::Real;
use crate::tf_atom::UniversalTF;
use crate::tf_molecule::{
    exterior_tf, screened_tf, solve_tf, tf_grid, AtomSet, GridPolicy, NuclearConfiguration, RegionMask, TfOptions,
};

/// Charge `∫_{|x|<r} ρ` of a radial profile by Gauss–Legendre in `ln s`.
fn ball_charge<T: Real>(rho: &dyn Fn(T) -> T, r: T) -> T {
    let four_pi = T::lit(4.0) * T::PI();
    let lo = (r * T::lit(1e-10)).ln();
    let hi = r.ln();
    gauss_legendre(lo, hi, 64, |t| {
        let s = t.exp();
        four_pi * s * s * s * rho(s)
    })
}

/// `∫_{|y−R_j|<r} ρ_j(y) m_i(y) dy` where `m_i` is the mean over the
/// sphere through `y` centered at `R_j` of the potential of ball `i`,
/// whose charge `q_i` lies entirely within distance `r < d` of `R_i`.
fn cloud_cloud<T: Real>(rho_j: &dyn Fn(T) -> T, q_i: T, d: T, r: T) -> T {
    let four_pi = T::lit(4.0) * T::PI();
    let lo = (r * T::lit(1e-10)).ln();
    let hi = r.ln();
    gauss_legendre(lo, hi, 64, |t| {
        let s = t.exp();
        four_pi * s * s * s * rho_j(s) * q_i / d.max(s)
    })
}

/// `Q_ij` for point charges `z_j` at `R_j` screened by the part of the
/// radial densities `ρ_j` inside `B(R_j, r)`:
/// `z_i z_j/d − z_j ∫_{B_i} ρ_i/|x−R_j| − z_i ∫_{B_j} ρ_j/|x−R_i| + ∫_{B_i}∫_{B_j} ρ_iρ_j/|x−y|`.
/// The diagonal is zero.
pub fn qij_profiles<T: Real>(
    config: &NuclearConfiguration<T>,
    densities: &[&dyn Fn(T) -> T],
    r: T,
) -> Result<Vec<Vec<T>>> {
    let k = config.len();
    if densities.len() != k {
        return Err(contract("one density profile per nucleus is required"));
    }
    if !(r > T::zero()) || (k > 1 && r > T::lit(0.5) * config.r_min()) {
        return Err(contract("ball radius must lie in (0, R_min/2]"));
    }
    let z = config.charges();
    let pos = config.positions();
    let q: Vec<T> = densities.iter().map(|rho| ball_charge(*rho, r)).collect();
    let mut out = vec![vec![T::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = dist(pos[i], pos[j]);
            let point_point = z[i] * z[j] / d;
            // Newton's theorem: a spherical cloud acts as its charge at its center.
            let point_cloud_i = z[j] * q[i] / d;
            let point_cloud_j = z[i] * q[j] / d;
            let cc = if i < j {
                cloud_cloud(densities[j], q[i], d, r)
            } else {
                cloud_cloud(densities[i], q[j], d, r)
            };
            out[i][j] = point_point - (point_cloud_i + point_cloud_j) + cc;
        }
    }
    Ok(out)
}

/// `Q^TF_ij` with the neutral atomic TF densities.
pub fn qij_tf<T: Real>(atoms: &AtomSet<T>, config: &NuclearConfiguration<T>, r: T) -> Result<Vec<Vec<T>>> {
    if atoms.len() != config.len() {
        return Err(contract("atom set does not match the configuration"));
    }
    let profiles: Vec<Box<dyn Fn(T) -> T + '_>> = (0..atoms.len())
        .map(|j| {
            let a = atoms.atom(j).clone();
            Box::new(move |s: T| a.rho_at(s)) as Box<dyn Fn(T) -> T>
        })
        .collect();
    let refs: Vec<&dyn Fn(T) -> T> = profiles.iter().map(|b| b.as_ref()).collect();
    qij_profiles(config, &refs, r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutsideReport<T> {
    pub r: T,
    /// `D^TF` from the full molecular solve.
    pub d_tf: T,
    /// `𝓔^TF_r(ρ^TF_r)` of the molecular exterior problem.
    pub e_outside: T,
    /// Exterior energies of the atomic problems with bounds `N_j`.
    pub e_atoms: Vec<T>,
    /// `D^TF − (𝓔^TF_r − Σ_j E_j)`.
    pub gap: T,
    pub gap_r7: T,
    pub mu: T,
    pub residual: T,
    pub grid_h: T,
}

/// Compares `D^TF` with the outside-model difference at ball radius `r`.
/// Atomic exterior problems use the molecular grid so that discretization
/// errors cancel. A single nucleus gives a zero gap without solving.
pub fn outside_decomposition_check<T: Real>(
    config: &NuclearConfiguration<T>,
    r: T,
    policy: &GridPolicy<T>,
    universal: Arc<UniversalTF<T>>,
    opts: &TfOptions<T>,
    samples: usize,
) -> Result<OutsideReport<T>> {
    if config.len() == 1 {
        return Ok(OutsideReport {
            r,
            d_tf: T::zero(),
            e_outside: T::zero(),
            e_atoms: vec![T::zero()],
            gap: T::zero(),
            gap_r7: T::zero(),
            mu: T::zero(),
            residual: T::zero(),
            grid_h: policy.h,
        });
    }
    let grid = Arc::new(tf_grid(config, policy)?);
    let sol = solve_tf(config, config.total_charge(), grid.clone(), universal, opts)?;
    let mask = RegionMask::new(config, r, samples)?;
    let v_r = screened_tf(&sol, &mask)?.field()?;
    let weights = mask.outside_weights(&grid);
    let dv = grid.cell_volume();
    let bound = sol.rho().values().iter().zip(&weights).map(|(&a, &w)| a * w).sum::<T>() * dv;
    let phi = sol.phi().values();
    let ext = exterior_tf(&v_r, &mask, bound, |x| grid.trilinear(phi, x).unwrap_or(T::zero()), opts)?;
    let mut e_atoms = Vec::with_capacity(config.len());
    let mut residual = sol.residual().max(ext.residual());
    let floor = grid.h() * T::lit(1e-9);
    for (j, (&p, &z)) in config.positions().iter().zip(config.charges()).enumerate() {
        let single = NuclearConfiguration::new(vec![p], vec![z])?;
        let m = RegionMask::new(&single, r, samples)?;
        let a = sol.atoms().atom(j).clone();
        let vals: Vec<T> = (0..grid.len())
            .map(|i| a.screened_at(dist(grid.point_of(i), p).max(floor), r))
            .collect();
        let v = GridField::new(grid.clone(), vals, FieldKind::Potential)?;
        let n_j = z - a.charge_within(r);
        let e = exterior_tf(&v, &m, n_j, |x| a.phi_at(dist(x, p).max(floor)), opts)?;
        residual = residual.max(e.residual());
        e_atoms.push(e.energy());
    }
    let gap = sol.binding() - (ext.energy() - e_atoms.iter().copied().sum::<T>());
    Ok(OutsideReport {
        r,
        d_tf: sol.binding(),
        e_outside: ext.energy(),
        e_atoms,
        gap,
        gap_r7: gap * r.powi(7),
        mu: ext.mu(),
        residual,
        grid_h: grid.h(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_balls_screen_perfectly() {
        let r = 0.4;
        let config = NuclearConfiguration::diatomic(3.0, 5.0, 2.0).unwrap();
        let b1 = move |s: f64| if s < r { 3.0 / (4.0 / 3.0 * PI * r * r * r) } else { 0.0 };
        let b2 = move |s: f64| if s < r { 5.0 / (4.0 / 3.0 * PI * r * r * r) } else { 0.0 };
        let q = qij_profiles(&config, &[&b1, &b2], r).unwrap();
        assert!(q[0][1].abs() < 1e-10, "{}", q[0][1]);
        assert_eq!(q[0][0], 0.0);
    }

    #[test]
    fn empty_balls_leave_point_charges() {
        let config = NuclearConfiguration::diatomic(2.0, 3.0, 1.5).unwrap();
        let zero = |_: f64| 0.0;
        let q = qij_profiles(&config, &[&zero, &zero], 0.1).unwrap();
        assert!((q[0][1] - 4.0).abs() < 1e-14);
    }
}
