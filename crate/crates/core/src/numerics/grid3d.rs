//! Uniform Cartesian mesh. Node `(i, j, k)` sits at `origin + h * (i, j, k)`;
//! the outermost layer of nodes carries Dirichlet data for the Poisson and
//! eigenvalue problems.

use std::fmt;
use std::sync::{Arc, OnceLock};

use super::dst::DirichletLaplacian;
use crate::error::{contract, Result};
use crate::real::Real;

/// Where the first reference point sits relative to the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Node,
    CellCenter,
}

pub struct Grid3D<T: Real> {
    origin: [T; 3],
    h: T,
    dims: [usize; 3],
    laplacian: OnceLock<Arc<DirichletLaplacian<T>>>,
}

impl<T: Real> Clone for Grid3D<T> {
    fn clone(&self) -> Self {
        Self {
            origin: self.origin,
            h: self.h,
            dims: self.dims,
            laplacian: self.laplacian.clone(),
        }
    }
}

impl<T: Real> PartialEq for Grid3D<T> {
    fn eq(&self, other: &Self) -> bool {
        self.origin == other.origin && self.h == other.h && self.dims == other.dims
    }
}

impl<T: Real> fmt::Debug for Grid3D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid3D")
            .field("origin", &self.origin)
            .field("h", &self.h)
            .field("dims", &self.dims)
            .finish()
    }
}

impl<T: Real> Grid3D<T> {
    pub fn new(origin: [T; 3], h: T, dims: [usize; 3]) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(contract(format!("grid spacing must be positive, got {h}")));
        }
        if dims.iter().any(|&d| d < 3) {
            return Err(contract(format!("grid needs at least 3 nodes per axis, got {dims:?}")));
        }
        Ok(Self {
            origin,
            h,
            dims,
            laplacian: OnceLock::new(),
        })
    }

    /// Smallest lattice with spacing `h` that contains every point of
    /// `centers` with at least `margin` to spare on each side, with
    /// `centers[0]` placed according to `anchor`.
    pub fn enclosing(
        centers: &[[T; 3]],
        margin: T,
        h: T,
        anchor: Anchor,
        max_points: usize,
    ) -> Result<Self> {
        if centers.is_empty() {
            return Err(contract("grid needs at least one center"));
        }
        let off = match anchor {
            Anchor::Node => T::zero(),
            Anchor::CellCenter => T::lit(0.5),
        };
        let c0 = centers[0];
        let mut origin = [T::zero(); 3];
        let mut dims = [0usize; 3];
        for a in 0..3 {
            let lo = centers.iter().map(|c| c[a]).fold(T::infinity(), T::min) - margin;
            let hi = centers.iter().map(|c| c[a]).fold(T::neg_infinity(), T::max) + margin;
            let k = ((c0[a] - lo) / h - off).ceil().max(T::zero());
            origin[a] = c0[a] - (k + off) * h;
            let n = ((hi - origin[a]) / h).ceil().to_usize().unwrap_or(0) + 1;
            dims[a] = n.max(3);
        }
        let total = dims[0] * dims[1] * dims[2];
        if total > max_points {
            return Err(contract(format!(
                "grid {dims:?} has {total} points, over the budget of {max_points}"
            )));
        }
        Self::new(origin, h, dims)
    }

    pub fn origin(&self) -> [T; 3] {
        self.origin
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> T {
        self.h * self.h * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.dims[0];
        let r = idx / self.dims[0];
        (i, r % self.dims[1], r / self.dims[1])
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize, k: usize) -> [T; 3] {
        [
            self.origin[0] + self.h * T::from_usize_lossy(i),
            self.origin[1] + self.h * T::from_usize_lossy(j),
            self.origin[2] + self.h * T::from_usize_lossy(k),
        ]
    }

    #[inline]
    pub fn point_of(&self, idx: usize) -> [T; 3] {
        let (i, j, k) = self.coords(idx);
        self.point(i, j, k)
    }

    pub fn center(&self) -> [T; 3] {
        let mut c = self.origin;
        for (a, ca) in c.iter_mut().enumerate() {
            *ca += self.h * T::from_usize_lossy(self.dims[a] - 1) * T::lit(0.5);
        }
        c
    }

    /// Upper corner of the box.
    pub fn upper(&self) -> [T; 3] {
        let mut c = self.origin;
        for (a, ca) in c.iter_mut().enumerate() {
            *ca += self.h * T::from_usize_lossy(self.dims[a] - 1);
        }
        c
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize, k: usize) -> bool {
        i == 0
            || j == 0
            || k == 0
            || i == self.dims[0] - 1
            || j == self.dims[1] - 1
            || k == self.dims[2] - 1
    }

    pub fn interior_dims(&self) -> [usize; 3] {
        [self.dims[0] - 2, self.dims[1] - 2, self.dims[2] - 2]
    }

    pub fn interior_len(&self) -> usize {
        let m = self.interior_dims();
        m[0] * m[1] * m[2]
    }

    /// `h³ Σ f`.
    pub fn integrate(&self, f: &[T]) -> T {
        debug_assert_eq!(f.len(), self.len());
        f.iter().copied().sum::<T>() * self.cell_volume()
    }

    /// Interior values in interior ordering.
    pub fn gather_interior(&self, full: &[T]) -> Vec<T> {
        let [nx, ny, nz] = self.dims;
        let mut out = Vec::with_capacity(self.interior_len());
        for k in 1..nz - 1 {
            for j in 1..ny - 1 {
                let base = self.index(0, j, k);
                out.extend_from_slice(&full[base + 1..base + nx - 1]);
            }
        }
        out
    }

    /// Writes interior values back into a full-grid array; boundary entries
    /// are left untouched.
    pub fn scatter_interior(&self, interior: &[T], full: &mut [T]) {
        let [nx, ny, nz] = self.dims;
        let mx = nx - 2;
        let mut src = 0;
        for k in 1..nz - 1 {
            for j in 1..ny - 1 {
                let base = self.index(0, j, k);
                full[base + 1..base + nx - 1].copy_from_slice(&interior[src..src + mx]);
                src += mx;
            }
        }
    }

    /// Trilinear interpolation; `None` outside the box.
    pub fn trilinear(&self, f: &[T], x: [T; 3]) -> Option<T> {
        let mut base = [0usize; 3];
        let mut frac = [T::zero(); 3];
        for a in 0..3 {
            let s = (x[a] - self.origin[a]) / self.h;
            let top = T::from_usize_lossy(self.dims[a] - 1);
            if s < T::zero() || s > top {
                return None;
            }
            let i = s.floor().to_usize()?.min(self.dims[a] - 2);
            base[a] = i;
            frac[a] = s - T::from_usize_lossy(i);
        }
        let mut acc = T::zero();
        for dk in 0..2 {
            for dj in 0..2 {
                for di in 0..2 {
                    let w = (if di == 1 { frac[0] } else { T::one() - frac[0] })
                        * (if dj == 1 { frac[1] } else { T::one() - frac[1] })
                        * (if dk == 1 { frac[2] } else { T::one() - frac[2] });
                    acc += w * f[self.index(base[0] + di, base[1] + dj, base[2] + dk)];
                }
            }
        }
        Some(acc)
    }

    /// Fraction of each node's cell (the cube of side `h` centred on the
    /// node) lying inside the ball `|x - center| < radius`. Only nodes with a
    /// nonzero fraction are listed. Cut cells are resolved with `sub³`
    /// midpoint samples.
    pub fn ball_fractions(&self, center: [T; 3], radius: T, sub: usize) -> Vec<(usize, T)> {
        let h = self.h;
        let half_diag = h * T::lit(3f64.sqrt() * 0.5);
        let mut out = Vec::new();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..3 {
            let l = ((center[a] - radius - self.origin[a]) / h).floor() - T::one();
            let u = ((center[a] + radius - self.origin[a]) / h).ceil() + T::one();
            lo[a] = l.max(T::zero()).to_usize().unwrap_or(0);
            hi[a] = u
                .max(T::zero())
                .to_usize()
                .unwrap_or(0)
                .min(self.dims[a] - 1);
        }
        let sub_t = T::from_usize_lossy(sub);
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let p = self.point(i, j, k);
                    let d = dist(p, center);
                    if d + half_diag <= radius {
                        out.push((self.index(i, j, k), T::one()));
                    } else if d - half_diag < radius {
                        let mut inside = 0usize;
                        for c in 0..sub {
                            for b in 0..sub {
                                for a in 0..sub {
                                    let q = [
                                        p[0] + h * ((T::from_usize_lossy(a) + T::lit(0.5)) / sub_t - T::lit(0.5)),
                                        p[1] + h * ((T::from_usize_lossy(b) + T::lit(0.5)) / sub_t - T::lit(0.5)),
                                        p[2] + h * ((T::from_usize_lossy(c) + T::lit(0.5)) / sub_t - T::lit(0.5)),
                                    ];
                                    if dist(q, center) < radius {
                                        inside += 1;
                                    }
                                }
                            }
                        }
                        if inside > 0 {
                            out.push((
                                self.index(i, j, k),
                                T::from_usize_lossy(inside) / (sub_t * sub_t * sub_t),
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    /// Fast Dirichlet Laplacian for this lattice, built on first use.
    pub fn laplacian(&self) -> Arc<DirichletLaplacian<T>> {
        self.laplacian
            .get_or_init(|| Arc::new(DirichletLaplacian::new(self.interior_dims(), self.h)))
            .clone()
    }
}

#[inline]
pub fn dist<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enclosing_places_anchor_at_cell_center() {
        let g = Grid3D::<f64>::enclosing(&[[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]], 2.0, 0.25, Anchor::CellCenter, 1 << 20)
            .unwrap();
        let s = (0.0 - g.origin()[2]) / g.h();
        assert!((s - s.floor() - 0.5).abs() < 1e-12);
        let up = g.upper();
        assert!(up[2] >= 3.0 && g.origin()[2] <= -2.0);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(Grid3D::<f64>::enclosing(&[[0.0f64; 3]], 5.0, 0.05, Anchor::Node, 1000).is_err());
    }

    #[test]
    fn interior_roundtrip() {
        let g = Grid3D::new([0.0; 3], 1.0, [4, 5, 6]).unwrap();
        let full: Vec<f64> = (0..g.len()).map(|i| i as f64).collect();
        let int = g.gather_interior(&full);
        assert_eq!(int.len(), 2 * 3 * 4);
        let mut back = vec![-1.0; g.len()];
        g.scatter_interior(&int, &mut back);
        for idx in 0..g.len() {
            let (i, j, k) = g.coords(idx);
            if !g.is_boundary(i, j, k) {
                assert_eq!(back[idx], full[idx]);
            }
        }
    }

    #[test]
    fn trilinear_exact_for_linear_fields() {
        let g = Grid3D::new([-1.0, -1.0, -1.0], 0.5, [5, 5, 5]).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let p = g.point_of(i);
                1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2]
            })
            .collect();
        let x = [0.13, -0.71, 0.44];
        let v = g.trilinear(&f, x).unwrap();
        assert!((v - (1.0 + 0.26 + 0.71 + 0.22)).abs() < 1e-12);
        assert!(g.trilinear(&f, [2.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn ball_fraction_volume() {
        let g = Grid3D::new([-2.0, -2.0, -2.0], 0.1, [41, 41, 41]).unwrap();
        let frac = g.ball_fractions([0.03, -0.02, 0.01], 1.0, 6);
        let vol: f64 = frac.iter().map(|&(_, f)| f).sum::<f64>() * g.cell_volume();
        assert!((vol - 4.0 / 3.0 * std::f64::consts::PI).abs() < 2e-3);
    }
}
