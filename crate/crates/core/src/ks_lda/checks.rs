//! Diagnostic inequalities evaluated on converged KS states.

use super::state::KSState;
use super::xc::XcFunctional;
use crate::numerics::Mesh;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExchangeBoundRow<T> {
    pub eps: T,
    /// `∫ g(ρ)/κ` with the normalization factor `κ`.
    pub lhs: T,
    /// `ε ∫ρ^{5/3} + 2 max(1, ε^{-3/2}) N`.
    pub rhs: T,
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExchangeBoundReport<T> {
    /// `κ = sup g'(t)/(t^{β₋} + t^{β₊})`, divided out of `g`.
    pub scale: T,
    pub rows: Vec<ExchangeBoundRow<T>>,
}

impl<T: Real> ExchangeBoundReport<T> {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.margin >= T::zero())
    }

    pub fn min_margin(&self) -> T {
        self.rows.iter().map(|r| r.margin).fold(T::infinity(), T::min)
    }
}

/// Evaluates `∫g(ρ) ≤ ε∫ρ^{5/3} + 2c_ε N` on the state's density for each
/// `ε`, after rescaling `g` to unit normalization.
pub fn check_exchange_bound<T: Real, G: Mesh<T>>(
    state: &KSState<T, G>,
    xc: &XcFunctional<T>,
    eps: &[T],
) -> ExchangeBoundReport<T> {
    let grid = state.grid();
    let rho = state.rho().values();
    let kappa = xc.normalization();
    let g: Vec<T> = rho.iter().map(|&r| xc.g(r)).collect();
    let raw = grid.integrate(&g);
    let lhs = if kappa > T::zero() { raw / kappa } else { T::zero() };
    let p53: Vec<T> = rho.iter().map(|&r| r.max(T::zero()).powf(T::lit(5.0 / 3.0))).collect();
    let i53 = grid.integrate(&p53);
    let n = state.electrons();
    let rows = eps
        .iter()
        .map(|&e| {
            let c = T::one().max(e.powf(T::lit(-1.5)));
            let rhs = e * i53 + T::lit(2.0) * c * n;
            ExchangeBoundRow { eps: e, lhs, rhs, margin: rhs - lhs }
        })
        .collect();
    ExchangeBoundReport { scale: kappa, rows }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow<T> {
    pub z: T,
    pub total: T,
    pub kinetic: T,
    /// `T/z^{7/3}`.
    pub kinetic_ratio: T,
    /// `|E/z^{7/3} − E_TF(1)|`.
    pub tf_gap: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport<T> {
    pub rows: Vec<ScalingRow<T>>,
    pub energies_nonpositive: bool,
    /// `max/min − 1` of the kinetic ratios.
    pub kinetic_spread: T,
    pub gap_decreasing: bool,
}

/// Atomic energies against `z^{7/3}` scaling. `states` pairs each nuclear
/// charge with its converged state, in increasing `z`; `tf_unit` is the TF
/// energy of the `z = 1` atom.
pub fn kinetic_scaling_check<T: Real, G: Mesh<T>>(
    states: &[(T, &KSState<T, G>)],
    tf_unit: T,
) -> ScalingReport<T> {
    let rows: Vec<ScalingRow<T>> = states
        .iter()
        .map(|&(z, s)| {
            let z73 = z.powf(T::lit(7.0 / 3.0));
            let e = s.energy();
            ScalingRow {
                z,
                total: e.total,
                kinetic: e.kinetic,
                kinetic_ratio: e.kinetic / z73,
                tf_gap: (e.total / z73 - tf_unit).mag(),
            }
        })
        .collect();
    let hi = rows.iter().map(|r| r.kinetic_ratio).fold(T::neg_infinity(), T::max);
    let lo = rows.iter().map(|r| r.kinetic_ratio).fold(T::infinity(), T::min);
    ScalingReport {
        energies_nonpositive: rows.iter().all(|r| r.total <= T::zero()),
        kinetic_spread: if lo > T::zero() { hi / lo - T::one() } else { T::infinity() },
        gap_decreasing: rows.windows(2).all(|w| w[1].tf_gap < w[0].tf_gap),
        rows,
    }
}
