//! Nuclear geometry and the exterior region `A_r`.

use crate::error::{contract, Result};
use crate::numerics::grid3d::{dist, Grid3D};
use crate::numerics::sphere::fibonacci_sphere;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct NuclearConfiguration<T: Real> {
    positions: Vec<[T; 3]>,
    charges: Vec<T>,
}

impl<T: Real> NuclearConfiguration<T> {
    pub fn new(positions: Vec<[T; 3]>, charges: Vec<T>) -> Result<Self> {
        if positions.is_empty() {
            return Err(contract("configuration needs at least one nucleus"));
        }
        if positions.len() != charges.len() {
            return Err(contract("positions and charges differ in length"));
        }
        if let Some(z) = charges.iter().find(|&&z| !(z > T::zero()) || !z.is_finite()) {
            return Err(contract(format!("nuclear charges must be positive, got {z}")));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(contract("nuclear positions must be finite"));
        }
        let cfg = Self { positions, charges };
        if cfg.len() > 1 && !(cfg.r_min() > T::zero()) {
            return Err(contract("nuclei must be at distinct positions"));
        }
        Ok(cfg)
    }

    /// Two nuclei on the z axis, the first at the origin.
    pub fn diatomic(z1: T, z2: T, r: T) -> Result<Self> {
        Self::new(vec![[T::zero(); 3], [T::zero(), T::zero(), r]], vec![z1, z2])
    }

    pub fn atom(z: T) -> Result<Self> {
        Self::new(vec![[T::zero(); 3]], vec![z])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[T; 3]] {
        &self.positions
    }

    pub fn charges(&self) -> &[T] {
        &self.charges
    }

    pub fn total_charge(&self) -> T {
        self.charges.iter().copied().sum()
    }

    pub fn z_min(&self) -> T {
        self.charges.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn z_max(&self) -> T {
        self.charges.iter().copied().fold(T::zero(), T::max)
    }

    fn pair_distances(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let k = self.len();
        (0..k).flat_map(move |i| {
            (i + 1..k).map(move |j| (i, j, dist(self.positions[i], self.positions[j])))
        })
    }

    /// Smallest internuclear distance; infinite for a single nucleus.
    pub fn r_min(&self) -> T {
        self.pair_distances().map(|(_, _, d)| d).fold(T::infinity(), T::min)
    }

    /// Largest internuclear distance; zero for a single nucleus.
    pub fn r_max(&self) -> T {
        self.pair_distances().map(|(_, _, d)| d).fold(T::zero(), T::max)
    }

    /// `U_R = Σ_{i<j} z_i z_j / |R_i − R_j|`.
    /// `Σ z_j R_j / Z`.
    pub fn charge_center(&self) -> [T; 3] {
        let z = self.total_charge();
        let mut c = [T::zero(); 3];
        for (p, &q) in self.positions.iter().zip(&self.charges) {
            for a in 0..3 {
                c[a] += q * p[a] / z;
            }
        }
        c
    }

    pub fn nuclear_repulsion(&self) -> T {
        self.pair_distances()
            .map(|(i, j, d)| self.charges[i] * self.charges[j] / d)
            .sum()
    }

    /// `V_R(x) = Σ z_j / |x − R_j|`.
    pub fn external_potential(&self, x: [T; 3]) -> T {
        self.positions
            .iter()
            .zip(&self.charges)
            .map(|(&p, &z)| z / dist(x, p))
            .sum()
    }

    /// Charges `l z_j` at positions `l^{-1/3} R_j`.
    pub fn tf_scaled(&self, l: T) -> Result<Self> {
        let s = l.powf(-T::lit(1.0 / 3.0));
        Self::new(
            self.positions.iter().map(|p| p.map(|c| c * s)).collect(),
            self.charges.iter().map(|&z| z * l).collect(),
        )
    }

    /// Same charges with positions multiplied by `l`.
    pub fn stretched(&self, l: T) -> Result<Self> {
        Self::new(
            self.positions.iter().map(|p| p.map(|c| c * l)).collect(),
            self.charges.clone(),
        )
    }
}

/// `A_r`: points farther than `r` from every nucleus.
#[derive(Debug, Clone)]
pub struct RegionMask<T: Real> {
    radius: T,
    centers: Vec<[T; 3]>,
    samples: usize,
}

pub const MIN_SPHERE_SAMPLES: usize = 200;

const BALL_SUBSAMPLES: usize = 8;

impl<T: Real> RegionMask<T> {
    /// Requires `r ≤ R_min/2` so the excluded balls are disjoint.
    pub fn new(config: &NuclearConfiguration<T>, radius: T, samples: usize) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(contract("exclusion radius must be positive"));
        }
        if radius > T::lit(0.5) * config.r_min() {
            return Err(contract(format!(
                "exclusion radius {radius} exceeds half the smallest internuclear distance"
            )));
        }
        if samples < MIN_SPHERE_SAMPLES {
            return Err(contract(format!(
                "sphere sampling needs at least {MIN_SPHERE_SAMPLES} points, got {samples}"
            )));
        }
        Ok(Self {
            radius,
            centers: config.positions().to_vec(),
            samples,
        })
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn centers(&self) -> &[[T; 3]] {
        &self.centers
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn contains(&self, x: [T; 3]) -> bool {
        self.centers.iter().all(|&c| dist(x, c) > self.radius)
    }

    /// Fraction of each node's cell lying in `A_r`.
    pub fn outside_weights(&self, grid: &Grid3D<T>) -> Vec<T> {
        let mut w = vec![T::one(); grid.len()];
        for &c in &self.centers {
            for (i, f) in grid.ball_fractions(c, self.radius, BALL_SUBSAMPLES) {
                w[i] = (w[i] - f).max(T::zero());
            }
        }
        w
    }

    /// Fraction of each node's cell lying in `B(R_j, r)`, sparse.
    pub fn ball_weights(&self, grid: &Grid3D<T>, j: usize) -> Vec<(usize, T)> {
        grid.ball_fractions(self.centers[j], self.radius, BALL_SUBSAMPLES)
    }

    /// Quasi-uniform points on `∂B(R_j, r)`.
    pub fn sphere(&self, j: usize) -> Vec<[T; 3]> {
        let c = self.centers[j];
        fibonacci_sphere::<T>(self.samples)
            .into_iter()
            .map(|d| {
                [
                    c[0] + self.radius * d[0],
                    c[1] + self.radius * d[1],
                    c[2] + self.radius * d[2],
                ]
            })
            .collect()
    }
}
