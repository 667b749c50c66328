//! Born–Oppenheimer binding energies `D` and `D^TF` and their sweeps.

use std::sync::Arc;

use crate::error::{contract, Result};
use crate::ks_lda::{ks_grid, scf_molecule, KsGridPolicy, ScfOptions, XcFunctional};
use crate::numerics::fit::{powerlaw_fit, PowerLawFit};
use crate::real::Real;
use crate::tf_atom::UniversalTF;
use crate::tf_molecule::{solve_tf, tf_grid, GridPolicy, NuclearConfiguration, TfOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    Tf,
    Ks,
}

impl Theory {
    pub fn name(&self) -> &'static str {
        match self {
            Theory::Tf => "TF",
            Theory::Ks => "KS",
        }
    }
}

/// One evaluation of `D = E_mol − Σ E_atom + U_R` with its grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoPoint<T> {
    pub r_min: T,
    pub d: T,
    pub e_mol: T,
    pub e_atoms: T,
    pub u_r: T,
    pub grid_h: T,
    pub dims: [usize; 3],
    pub residual: T,
}

#[derive(Debug, Clone)]
pub struct BOCurve<T: Real> {
    /// Configuration at unit smallest distance.
    pub shape: NuclearConfiguration<T>,
    pub theory: Theory,
    pub samples: Vec<BoPoint<T>>,
    /// Power law of `D` against `R_min` over all samples, when defined.
    pub fit: Option<PowerLawFit<T>>,
}

impl<T: Real> BOCurve<T> {
    pub fn new(shape: NuclearConfiguration<T>, theory: Theory, mut samples: Vec<BoPoint<T>>) -> Self {
        samples.sort_by(|a, b| a.r_min.partial_cmp(&b.r_min).unwrap_or(std::cmp::Ordering::Equal));
        let xs: Vec<T> = samples.iter().map(|s| s.r_min).collect();
        let ys: Vec<T> = samples.iter().map(|s| s.d).collect();
        let fit = powerlaw_fit(&xs, &ys, T::zero(), T::infinity()).ok();
        Self {
            shape,
            theory,
            samples,
            fit,
        }
    }
}

fn require_nuclei<T: Real>(config: &NuclearConfiguration<T>) -> Result<()> {
    if config.is_empty() {
        return Err(contract("configuration has no nuclei"));
    }
    Ok(())
}

fn single_atom_point<T: Real>(e: T, h: T, dims: [usize; 3], residual: T) -> BoPoint<T> {
    BoPoint {
        r_min: T::infinity(),
        d: T::zero(),
        e_mol: e,
        e_atoms: e,
        u_r: T::zero(),
        grid_h: h,
        dims,
        residual,
    }
}

/// `D^TF` of the neutral molecule. A single nucleus gives `D^TF = 0`
/// without solving.
pub fn bo_tf<T: Real>(
    config: &NuclearConfiguration<T>,
    policy: &GridPolicy<T>,
    universal: Arc<UniversalTF<T>>,
    opts: &TfOptions<T>,
) -> Result<BoPoint<T>> {
    require_nuclei(config)?;
    let grid = Arc::new(tf_grid(config, policy)?);
    if config.len() == 1 {
        let atoms = crate::tf_molecule::AtomSet::new(config, universal)?;
        return Ok(single_atom_point(atoms.total_energy(), grid.h(), grid.dims(), T::zero()));
    }
    let sol = solve_tf(config, config.total_charge(), grid.clone(), universal, opts)?;
    Ok(BoPoint {
        r_min: config.r_min(),
        d: sol.binding(),
        e_mol: sol.energy(),
        e_atoms: sol.atom_energy(),
        u_r: config.nuclear_repulsion(),
        grid_h: grid.h(),
        dims: grid.dims(),
        residual: sol.residual(),
    })
}

/// `shape` rescaled to smallest distance `r`.
pub fn at_distance<T: Real>(shape: &NuclearConfiguration<T>, r: T) -> Result<NuclearConfiguration<T>> {
    let r0 = shape.r_min();
    if !(r0.is_finite() && r0 > T::zero()) {
        return Err(contract("a sweep needs at least two separated nuclei"));
    }
    shape.stretched(r / r0)
}

/// `D^TF` along `R_min ∈ r_values` for a fixed shape.
pub fn tf_sweep<T: Real>(
    shape: &NuclearConfiguration<T>,
    r_values: &[T],
    policy: &GridPolicy<T>,
    universal: Arc<UniversalTF<T>>,
    opts: &TfOptions<T>,
) -> Result<BOCurve<T>> {
    let unit = at_distance(shape, T::one())?;
    let samples = r_values
        .iter()
        .map(|&r| bo_tf(&at_distance(shape, r)?, policy, universal.clone(), opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(BOCurve::new(unit, Theory::Tf, samples))
}

/// KS ground-state energy of one neutral atom on a grid of spacing `h`
/// with the nucleus on a node, as the reference for `D`.
pub fn ks_atom_energy<T: Real>(
    z: T,
    xc: &XcFunctional<T>,
    h: T,
    margin: T,
    max_points: usize,
    q: T,
    opts: &ScfOptions<T>,
) -> Result<(T, T)> {
    let config = NuclearConfiguration::atom(z)?;
    let policy = KsGridPolicy { h, margin, max_points };
    let grid = Arc::new(ks_grid(&config, &policy)?);
    let s = scf_molecule(&config, z, xc, grid, q, opts)?;
    let residual = T::lit(s.scf_history().last().copied().unwrap_or(0.0));
    Ok((s.total_energy(), residual))
}

/// `D` of the neutral molecule in extended KS-LDA. The atomic references are
/// solved on grids of the same spacing with the same margin. A single
/// nucleus gives `D = 0` without solving.
pub fn bo_ks<T: Real>(
    config: &NuclearConfiguration<T>,
    xc: &XcFunctional<T>,
    policy: &KsGridPolicy<T>,
    q: T,
    opts: &ScfOptions<T>,
) -> Result<BoPoint<T>> {
    require_nuclei(config)?;
    let grid = Arc::new(ks_grid(config, policy)?);
    if config.len() == 1 {
        return Ok(single_atom_point(T::zero(), grid.h(), grid.dims(), T::zero()));
    }
    let mol = scf_molecule(config, config.total_charge(), xc, grid.clone(), q, opts)?;
    let mut residual = T::lit(mol.scf_history().last().copied().unwrap_or(0.0));
    let mut cache: Vec<(T, T)> = Vec::new();
    let mut e_atoms = T::zero();
    for &z in config.charges() {
        let e = match cache.iter().find(|(zc, _)| *zc == z) {
            Some(&(_, e)) => e,
            None => {
                let (e, r) = ks_atom_energy(z, xc, grid.h(), policy.margin, policy.max_points, q, opts)?;
                residual = residual.max(r);
                cache.push((z, e));
                e
            }
        };
        e_atoms += e;
    }
    let u_r = config.nuclear_repulsion();
    Ok(BoPoint {
        r_min: config.r_min(),
        d: mol.total_energy() - e_atoms + u_r,
        e_mol: mol.total_energy(),
        e_atoms,
        u_r,
        grid_h: grid.h(),
        dims: grid.dims(),
        residual,
    })
}

/// `D` along `R_min ∈ r_values` for a fixed shape.
pub fn ks_sweep<T: Real>(
    shape: &NuclearConfiguration<T>,
    r_values: &[T],
    xc: &XcFunctional<T>,
    policy: &KsGridPolicy<T>,
    q: T,
    opts: &ScfOptions<T>,
) -> Result<BOCurve<T>> {
    let unit = at_distance(shape, T::one())?;
    let samples = r_values
        .iter()
        .map(|&r| bo_ks(&at_distance(shape, r)?, xc, policy, q, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(BOCurve::new(unit, Theory::Ks, samples))
}
