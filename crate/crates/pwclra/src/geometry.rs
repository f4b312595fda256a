//! Array geometry: element placement, apertures, and beam alignment.
//!
//! Linear arrays run along the y-axis; planar arrays span the y–z plane.
//! Planar elements are ordered y-major (all z rows of the first y position,
//! then the next y position, …) so that a contiguous index range is a spatial
//! slab — the property the piecewise estimator relies on.

use crate::error::{Error, Result};

/// Cartesian point/vector in meters.
pub type Point3 = [f64; 3];

#[inline]
fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm(v: Point3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Euclidean distance between two points.
#[inline]
pub fn dist(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

#[inline]
fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Array layout kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    /// Uniform linear array along the y-axis.
    Ula,
    /// Uniform planar array in the y–z plane, y-major element order.
    Upa,
}

/// A physical antenna/element array.
#[derive(Debug, Clone)]
pub struct ArrayGeometry {
    /// Element positions in meters, in the canonical index order.
    pub positions: Vec<Point3>,
    pub kind: ArrayKind,
    /// Inter-element spacing in meters.
    pub spacing_m: f64,
    /// Reference point (array center).
    pub reference: Point3,
}

impl ArrayGeometry {
    /// Uniform linear array of `n` elements along y, centered at `center`.
    pub fn ula(center: Point3, n: usize, spacing_m: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("ula: zero elements".into()));
        }
        if spacing_m <= 0.0 {
            return Err(Error::Argument(format!("ula: spacing {spacing_m} must be > 0")));
        }
        let mid = (n as f64 - 1.0) / 2.0;
        let positions = (0..n)
            .map(|i| [center[0], center[1] + (i as f64 - mid) * spacing_m, center[2]])
            .collect();
        Ok(Self { positions, kind: ArrayKind::Ula, spacing_m, reference: center })
    }

    /// Uniform planar array of `n_y`×`n_z` elements in the y–z plane,
    /// centered at `center`, y-major element order.
    pub fn upa(center: Point3, n_y: usize, n_z: usize, spacing_m: f64) -> Result<Self> {
        if n_y == 0 || n_z == 0 {
            return Err(Error::Argument("upa: zero elements along an axis".into()));
        }
        if spacing_m <= 0.0 {
            return Err(Error::Argument(format!("upa: spacing {spacing_m} must be > 0")));
        }
        let mid_y = (n_y as f64 - 1.0) / 2.0;
        let mid_z = (n_z as f64 - 1.0) / 2.0;
        let mut positions = Vec::with_capacity(n_y * n_z);
        for iy in 0..n_y {
            for iz in 0..n_z {
                positions.push([
                    center[0],
                    center[1] + (iy as f64 - mid_y) * spacing_m,
                    center[2] + (iz as f64 - mid_z) * spacing_m,
                ]);
            }
        }
        Ok(Self { positions, kind: ArrayKind::Upa, spacing_m, reference: center })
    }

    /// Number of elements.
    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Unit vector along the array (linear arrays only).
    pub fn axis(&self) -> Result<Point3> {
        if self.kind != ArrayKind::Ula {
            return Err(Error::Argument("axis: defined for linear arrays only".into()));
        }
        if self.len() < 2 {
            // A single element has no orientation; fall back to the layout axis.
            return Ok([0.0, 1.0, 0.0]);
        }
        let d = sub(self.positions[self.len() - 1], self.positions[0]);
        let n = norm(d);
        Ok([d[0] / n, d[1] / n, d[2] / n])
    }
}

/// Aperture-driven boundary (in meters) below which a link of an `n`-element
/// and an `m`-element half-wavelength array must be modeled with spherical
/// wavefronts: `lambda * n * m`.
pub fn mimo_ard(lambda_m: f64, n: usize, m: usize) -> f64 {
    lambda_m * (n as f64) * (m as f64)
}

/// Fractional DFT bin (0 ≤ bin < n) at which an `n`-column unitary DFT
/// codebook over the half-wavelength array `arr` points toward `target`.
///
/// Used to center the second-phase observation block on the fixed
/// array-to-array direction instead of an arbitrary corner of the codebook.
pub fn beam_center_bin(arr: &ArrayGeometry, target: Point3) -> Result<f64> {
    let d = sub(target, arr.reference);
    let r = norm(d);
    if r == 0.0 {
        return Err(Error::DegenerateGeometry(
            "beam_center_bin: target coincides with array reference".into(),
        ));
    }
    let axis = arr.axis()?;
    let u = dot(axis, [d[0] / r, d[1] / r, d[2] / r]);
    let n = arr.len() as f64;
    Ok((-n * u / 2.0).rem_euclid(n))
}
