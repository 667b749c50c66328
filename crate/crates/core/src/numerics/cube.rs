//! Exact average of `1/|x|` over an axis-aligned cube.

use crate::real::Real;

/// Antiderivative of `1/r` over `[0,x]×[0,y]×[0,z]` for non-negative
/// arguments.
fn prim<T: Real>(x: T, y: T, z: T) -> T {
    let r = (x * x + y * y + z * z).sqrt();
    if r == T::zero() {
        return T::zero();
    }
    let half = T::lit(0.5);
    let mut s = T::zero();
    if y > T::zero() && z > T::zero() {
        s += y * z * (x + r).ln();
        if x > T::zero() {
            s -= half * x * x * (y * z / (x * r)).atan();
        }
    }
    if x > T::zero() && z > T::zero() {
        s += x * z * (y + r).ln();
        if y > T::zero() {
            s -= half * y * y * (x * z / (y * r)).atan();
        }
    }
    if x > T::zero() && y > T::zero() {
        s += x * y * (z + r).ln();
        if z > T::zero() {
            s -= half * z * z * (x * y / (z * r)).atan();
        }
    }
    s
}

/// Splits `[a, b]` into pieces `[lo, hi]` with `0 ≤ lo < hi` by reflection.
fn fold(a: f64, b: f64) -> Vec<(f64, f64)> {
    if a >= 0.0 {
        vec![(a, b)]
    } else if b <= 0.0 {
        vec![(-b, -a)]
    } else {
        vec![(0.0, -a), (0.0, b)]
    }
}

/// `∫ 1/|x - c| dx` over the box `[lo, hi]` (componentwise).
pub fn box_integral_inv_r<T: Real>(lo: [T; 3], hi: [T; 3], c: [T; 3]) -> T {
    let px = fold((lo[0] - c[0]).f64(), (hi[0] - c[0]).f64());
    let py = fold((lo[1] - c[1]).f64(), (hi[1] - c[1]).f64());
    let pz = fold((lo[2] - c[2]).f64(), (hi[2] - c[2]).f64());
    let mut total = T::zero();
    for &(x0, x1) in &px {
        for &(y0, y1) in &py {
            for &(z0, z1) in &pz {
                let (x0, x1, y0, y1, z0, z1) = (
                    T::lit(x0),
                    T::lit(x1),
                    T::lit(y0),
                    T::lit(y1),
                    T::lit(z0),
                    T::lit(z1),
                );
                total += prim(x1, y1, z1) - prim(x0, y1, z1) - prim(x1, y0, z1) - prim(x1, y1, z0)
                    + prim(x0, y0, z1)
                    + prim(x0, y1, z0)
                    + prim(x1, y0, z0)
                    - prim(x0, y0, z0);
            }
        }
    }
    total
}

/// Mean of `1/|x - c|` over the cube of side `h` centred on `p`.
pub fn cell_average_inv_r<T: Real>(p: [T; 3], h: T, c: [T; 3]) -> T {
    let half = T::lit(0.5) * h;
    let lo = [p[0] - half, p[1] - half, p[2] - half];
    let hi = [p[0] + half, p[1] + half, p[2] + half];
    box_integral_inv_r(lo, hi, c) / (h * h * h)
}
