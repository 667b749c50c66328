//! Scalar fields tied to the mesh they were sampled on.

use std::sync::Arc;

use super::grid3d::Grid3D;
use super::poisson::poisson_solve;
use super::radial::RadialGrid;
use crate::error::{contract, Result};
use crate::real::Real;

/// Physical meaning of a field's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Density,
    Potential,
    Charge,
}

/// Operations shared by radial and Cartesian meshes.
pub trait Mesh<T: Real>: PartialEq {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn integrate(&self, f: &[T]) -> T;
    /// Coulomb potential `∫ f(y)/|x-y| dy` sampled on the mesh.
    fn coulomb_potential(&self, f: &[T]) -> Vec<T>;
}

impl<T: Real> Mesh<T> for RadialGrid<T> {
    fn len(&self) -> usize {
        RadialGrid::len(self)
    }
    fn integrate(&self, f: &[T]) -> T {
        RadialGrid::integrate(self, f)
    }
    fn coulomb_potential(&self, f: &[T]) -> Vec<T> {
        self.newton_potential(f)
    }
}

impl<T: Real> Mesh<T> for Grid3D<T> {
    fn len(&self) -> usize {
        Grid3D::len(self)
    }
    fn integrate(&self, f: &[T]) -> T {
        Grid3D::integrate(self, f)
    }
    fn coulomb_potential(&self, f: &[T]) -> Vec<T> {
        poisson_solve(self, f)
    }
}

#[derive(Debug, Clone)]
pub struct ScalarField<T: Real, G: Mesh<T>> {
    grid: Arc<G>,
    values: Vec<T>,
    kind: FieldKind,
}

impl<T: Real, G: Mesh<T>> ScalarField<T, G> {
    pub fn new(grid: Arc<G>, values: Vec<T>, kind: FieldKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(contract(format!(
                "field has {} values for a mesh of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, kind })
    }

    pub fn zeros(grid: Arc<G>, kind: FieldKind) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![T::zero(); n],
            kind,
        }
    }

    pub fn grid(&self) -> &Arc<G> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn integral(&self) -> T {
        self.grid.integrate(&self.values)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(contract("fields live on different meshes"))
        }
    }

    /// `∫ f g`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_same(other)?;
        let prod: Vec<T> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(self.grid.integrate(&prod))
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: T, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + s * b)
                .collect(),
            kind: self.kind,
        })
    }

    /// Coulomb potential generated by a density or charge field.
    pub fn potential(&self) -> Result<Self> {
        if self.kind == FieldKind::Potential {
            return Err(contract("cannot take the Coulomb potential of a potential"));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.grid.coulomb_potential(&self.values),
            kind: FieldKind::Potential,
        })
    }
}

pub type RadialField<T> = ScalarField<T, RadialGrid<T>>;
pub type GridField<T> = ScalarField<T, Grid3D<T>>;
