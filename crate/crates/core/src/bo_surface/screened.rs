//! Comparison of KS and TF screened nuclear potentials on `∂A_r`.

use crate::error::{contract, Result};
use crate::ks_lda::KSState;
use crate::numerics::fit::{powerlaw_fit, PowerLawFit};
use crate::numerics::Grid3D;
use crate::real::Real;
use crate::tf_molecule::{screened_density, screened_tf, RegionMask, ScreenedPotential, TFSolution};

/// `(r, β, ε)` with `sup_{∂A_r} |Φ^TF_r − Φ_r| = β r^{−4+ε}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership<T> {
    pub r: T,
    pub beta: T,
    pub eps: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenedProfile<T> {
    pub r: Vec<T>,
    /// `sup_{∂A_r} |Φ^TF_r − Φ_r|`.
    pub diff_sup: Vec<T>,
    /// `sup_{∂A_r} |Φ_r|`.
    pub phi_sup: Vec<T>,
    /// `sup_{∂B(R_j, r)} |Φ_r|` per nucleus, one row per `r`.
    pub per_nucleus: Vec<Vec<T>>,
    /// Power law of `diff_sup` against `r`, when defined.
    pub fit: Option<PowerLawFit<T>>,
    /// One record per `r`, using the fitted `ε`.
    pub membership: Vec<Membership<T>>,
}

impl<T: Real> ScreenedProfile<T> {
    /// `max_r r⁴ sup|Φ_r|`.
    pub fn phi_r4_max(&self) -> T {
        self.r
            .iter()
            .zip(&self.phi_sup)
            .map(|(&r, &p)| p * r.powi(4))
            .fold(T::zero(), T::max)
    }
}

/// Profile from paired screened potentials `(Φ_r, Φ^TF_r)`, one pair per `r`.
pub fn profile_from_pairs<T: Real>(pairs: &[(ScreenedPotential<T>, ScreenedPotential<T>)]) -> ScreenedProfile<T> {
    let mut r = Vec::new();
    let mut diff_sup = Vec::new();
    let mut phi_sup = Vec::new();
    let mut per_nucleus = Vec::new();
    for (ks, tf) in pairs {
        r.push(ks.radius());
        diff_sup.push(tf.sup_difference(ks));
        let sups = ks.sphere_sups();
        phi_sup.push(sups.iter().copied().fold(T::zero(), T::max));
        per_nucleus.push(sups);
    }
    let fit = powerlaw_fit(&r, &diff_sup, T::zero(), T::infinity()).ok();
    let membership = match &fit {
        Some(f) => {
            let eps = f.exponent + T::lit(4.0);
            r.iter()
                .zip(&diff_sup)
                .map(|(&r, &d)| Membership {
                    r,
                    beta: d * r.powf(T::lit(4.0) - eps),
                    eps,
                })
                .collect()
        }
        None => Vec::new(),
    };
    ScreenedProfile {
        r,
        diff_sup,
        phi_sup,
        per_nucleus,
        fit,
        membership,
    }
}

/// `Φ_r` from the KS density and `Φ^TF_r` from the TF solution of the same
/// configuration at every `r ∈ r_list ⊂ (0, R_min/4]`.
pub fn screened_compare<T: Real>(
    ks: &KSState<T, Grid3D<T>>,
    tf: &TFSolution<T>,
    r_list: &[T],
    samples: usize,
) -> Result<ScreenedProfile<T>> {
    let config = tf.config();
    let limit = T::lit(0.25) * config.r_min();
    if r_list.iter().any(|&r| !(r > T::zero()) || r > limit * (T::one() + T::lit(1e-12))) {
        return Err(contract("screening radii must lie in (0, R_min/4]"));
    }
    let pairs = r_list
        .iter()
        .map(|&r| {
            let mask = RegionMask::new(config, r, samples)?;
            Ok((screened_density(config, ks.rho(), &mask)?, screened_tf(tf, &mask)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(profile_from_pairs(&pairs))
}
