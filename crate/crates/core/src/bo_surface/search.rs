//! Minimization of `E_{V_R}(Z) + U_R` over nuclear configurations.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::curve::ks_atom_energy;
use crate::error::{contract, Error, Result};
use crate::ks_lda::{ks_grid, scf_molecule, KsGridPolicy, ScfOptions, XcFunctional};
use crate::numerics::simplex::nelder_mead;
use crate::real::Real;
use crate::tf_molecule::NuclearConfiguration;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions<T> {
    /// Starting smallest distance.
    pub r_init: T,
    /// Upper limit on the diatomic distance.
    pub r_max: T,
    /// Initial simplex edge.
    pub step: T,
    pub restarts: usize,
    pub max_evals: usize,
    pub seed: u64,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        Self {
            r_init: T::lit(1.5),
            r_max: T::lit(8.0),
            step: T::lit(0.5),
            restarts: 3,
            max_evals: 60,
            seed: 11,
        }
    }
}

/// `E_mol(Z) ≤ Σ_k E_mol(Z_k)` for one split of the nuclei.
#[derive(Debug, Clone, PartialEq)]
pub struct Subadditivity<T> {
    pub e_whole: T,
    pub e_parts: Vec<T>,
    /// `Σ_k E_mol(Z_k) − E_mol(Z)`; nonnegative when the inequality holds.
    pub margin: T,
}

impl<T: Real> Subadditivity<T> {
    pub fn holds(&self, tol: T) -> bool {
        self.margin >= -tol
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult<T: Real> {
    pub config: NuclearConfiguration<T>,
    pub r_m: T,
    pub energy: T,
    pub grid_h: T,
    /// SCF residual of the returned configuration.
    pub residual: T,
    pub evaluations: usize,
    /// The budget ran out before the search settled.
    pub stagnated: bool,
    /// `(R_min, E)` for every evaluated configuration.
    pub history: Vec<(T, T)>,
    pub split: Option<Subadditivity<T>>,
}

struct Objective<'a, T: Real> {
    charges: &'a [T],
    xc: &'a XcFunctional<T>,
    policy: &'a KsGridPolicy<T>,
    q: T,
    scf: &'a ScfOptions<T>,
    history: Vec<(T, T)>,
    evaluations: usize,
    /// Energy and SCF residual of the lowest evaluation so far.
    lowest: Option<(T, T)>,
}

impl<T: Real> Objective<'_, T> {
    fn energy(&mut self, config: &NuclearConfiguration<T>) -> Result<T> {
        let grid = Arc::new(ks_grid(config, self.policy)?);
        let s = scf_molecule(config, config.total_charge(), self.xc, grid, self.q, self.scf)?;
        let e = s.total_energy() + config.nuclear_repulsion();
        let residual = T::lit(s.scf_history().last().copied().unwrap_or(0.0));
        if self.lowest.is_none_or(|(lo, _)| e < lo) {
            self.lowest = Some((e, residual));
        }
        self.evaluations += 1;
        self.history.push((config.r_min(), e));
        Ok(e)
    }
}

/// Configuration from internal coordinates: nucleus 1 at the origin,
/// nucleus 2 on the x axis, nucleus 3 in the xy plane.
fn place<T: Real>(charges: &[T], x: &[T]) -> Result<NuclearConfiguration<T>> {
    let mut pos = vec![[T::zero(); 3]];
    let mut it = x.iter().copied();
    for k in 1..charges.len() {
        let mut p = [T::zero(); 3];
        for c in p.iter_mut().take(k.min(3)) {
            *c = it.next().unwrap_or(T::zero());
        }
        pos.push(p);
    }
    NuclearConfiguration::new(pos, charges.to_vec())
}

/// Searches for the configuration minimizing `E_{V_R}(Z) + U_R` in
/// extended KS-LDA. Diatomics are scanned on the lattice `R = k h` so that
/// both nuclei stay on grid nodes; larger molecules use Nelder–Mead over
/// internal coordinates with restarts from perturbed simplices. If `split`
/// lists the nuclei of one fragment, the subadditivity inequality for that
/// split and its complement is evaluated as well.
pub fn min_distance_search<T: Real>(
    charges: &[T],
    xc: &XcFunctional<T>,
    policy: &KsGridPolicy<T>,
    q: T,
    scf: &ScfOptions<T>,
    opts: &SearchOptions<T>,
    split: Option<&[usize]>,
) -> Result<SearchResult<T>> {
    let k = charges.len();
    if k < 2 {
        return Err(contract("configuration search needs at least two nuclei"));
    }
    if !(opts.r_init > T::zero()) || !(opts.r_max > opts.r_init) {
        return Err(contract("search needs 0 < r_init < r_max"));
    }
    let mut obj = Objective {
        charges,
        xc,
        policy,
        q,
        scf,
        history: Vec::new(),
        evaluations: 0,
        lowest: None,
    };
    let (config, energy, stagnated) = if k == 2 {
        lattice_scan(&mut obj, opts)?
    } else {
        simplex_search(&mut obj, opts)?
    };
    let grid_h = ks_grid(&config, policy)?.h();
    let split = match split {
        Some(part) => Some(subadditivity(charges, part, energy, grid_h, xc, policy, q, scf, opts)?),
        None => None,
    };
    Ok(SearchResult {
        r_m: config.r_min(),
        config,
        energy,
        grid_h,
        residual: obj.lowest.map_or(T::zero(), |(_, r)| r),
        evaluations: obj.evaluations,
        stagnated,
        history: obj.history,
        split,
    })
}

fn lattice_scan<T: Real>(
    obj: &mut Objective<'_, T>,
    opts: &SearchOptions<T>,
) -> Result<(NuclearConfiguration<T>, T, bool)> {
    let h = obj.policy.h;
    let k_max = (opts.r_max / h).floor().to_usize().unwrap_or(1).max(2);
    let k0 = (opts.r_init / h).round().to_usize().unwrap_or(1).clamp(1, k_max);
    let mut seen: Vec<(usize, T)> = Vec::new();
    let mut eval = |obj: &mut Objective<'_, T>, k: usize| -> Result<T> {
        if let Some(&(_, e)) = seen.iter().find(|(kk, _)| *kk == k) {
            return Ok(e);
        }
        let c = NuclearConfiguration::diatomic(obj.charges[0], obj.charges[1], h * T::from_usize_lossy(k))?;
        let e = match obj.energy(&c) {
            Err(Error::Unbound(_)) => T::infinity(),
            other => other?,
        };
        seen.push((k, e));
        Ok(e)
    };
    // Stretch until the molecule holds all its electrons.
    let mut best = k0;
    let mut e_best = eval(obj, k0)?;
    while !e_best.is_finite() && best < k_max {
        best += 1;
        e_best = eval(obj, best)?;
    }
    if !e_best.is_finite() {
        return Err(Error::Unbound(format!(
            "no distance up to {} binds all electrons",
            opts.r_max
        )));
    }
    let k0 = best;
    let mut stagnated = false;
    let up = if k0 < k_max { eval(obj, k0 + 1)? } else { T::infinity() };
    let down = if k0 > 1 { eval(obj, k0 - 1)? } else { T::infinity() };
    let dir: isize = if down < e_best && down <= up {
        -1
    } else if up < e_best {
        1
    } else {
        0
    };
    if dir != 0 {
        loop {
            let next = best as isize + dir;
            if next < 1 || next as usize > k_max {
                break;
            }
            if obj.evaluations >= opts.max_evals {
                stagnated = true;
                break;
            }
            let e = eval(obj, next as usize)?;
            if e < e_best {
                best = next as usize;
                e_best = e;
            } else {
                break;
            }
        }
    }
    let c = NuclearConfiguration::diatomic(obj.charges[0], obj.charges[1], h * T::from_usize_lossy(best))?;
    Ok((c, e_best, stagnated))
}

fn simplex_search<T: Real>(
    obj: &mut Objective<'_, T>,
    opts: &SearchOptions<T>,
) -> Result<(NuclearConfiguration<T>, T, bool)> {
    let k = obj.charges.len();
    let dim = 3 * k - 6;
    // Regular start: nuclei spaced r_init apart on a zigzag.
    let mut x0 = Vec::with_capacity(dim);
    for n in 1..k {
        let base = [opts.r_init * T::from_usize_lossy(n), opts.r_init * T::lit(0.5), opts.r_init * T::lit(0.25)];
        let take = n.min(3);
        x0.extend_from_slice(&base[..take]);
    }
    let h = obj.policy.h;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_x = x0.clone();
    let mut best_e = T::infinity();
    let mut stagnated = false;
    let mut failure = None;
    for restart in 0..opts.restarts.max(1) {
        let start: Vec<T> = if restart == 0 {
            x0.clone()
        } else {
            best_x
                .iter()
                .map(|&v| v + opts.step * T::lit(rng.gen_range(-0.5..0.5)))
                .collect()
        };
        let step = vec![opts.step; dim];
        let budget = opts.max_evals.saturating_sub(obj.evaluations).max(dim + 2);
        let r = nelder_mead(
            |x| match place(obj.charges, x).and_then(|c| {
                if c.r_min() < h {
                    Ok(T::infinity())
                } else {
                    obj.energy(&c)
                }
            }) {
                Ok(e) => e,
                Err(Error::Unbound(_)) => T::infinity(),
                Err(e) => {
                    failure.get_or_insert(e);
                    T::infinity()
                }
            },
            &start,
            &step,
            h * T::lit(0.1),
            budget,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        stagnated = !r.converged;
        if r.value < best_e {
            best_e = r.value;
            best_x = r.x;
        }
    }
    Ok((place(obj.charges, &best_x)?, best_e, stagnated))
}

#[allow(clippy::too_many_arguments)]
fn subadditivity<T: Real>(
    charges: &[T],
    part: &[usize],
    e_whole: T,
    h: T,
    xc: &XcFunctional<T>,
    policy: &KsGridPolicy<T>,
    q: T,
    scf: &ScfOptions<T>,
    opts: &SearchOptions<T>,
) -> Result<Subadditivity<T>> {
    if part.is_empty() || part.len() >= charges.len() || part.iter().any(|&i| i >= charges.len()) {
        return Err(contract("split must be a proper nonempty subset of the nuclei"));
    }
    let first: Vec<T> = part.iter().map(|&i| charges[i]).collect();
    let rest: Vec<T> = (0..charges.len())
        .filter(|i| !part.contains(i))
        .map(|i| charges[i])
        .collect();
    let sub_policy = KsGridPolicy { h, ..*policy };
    let mut e_parts = Vec::with_capacity(2);
    for frag in [first, rest] {
        let e = if frag.len() == 1 {
            ks_atom_energy(frag[0], xc, h, policy.margin, policy.max_points, q, scf)?.0
        } else {
            min_distance_search(&frag, xc, &sub_policy, q, scf, opts, None)?.energy
        };
        e_parts.push(e);
    }
    let margin = e_parts.iter().copied().sum::<T>() - e_whole;
    Ok(Subadditivity { e_whole, e_parts, margin })
}
