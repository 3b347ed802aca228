use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::source::{sum_dipoles, MagnetSource};
use super::MagneticsError;
use crate::geom::Vec3;

/// Horizontal sampling rectangle, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    pub z: f64,
    /// Center of the rectangle in x and y.
    pub center: [f64; 2],
    /// Full width and height.
    pub extent: [f64; 2],
    /// Sample counts along x and y, both at least 2.
    pub resolution: [usize; 2],
}

impl PlaneSpec {
    pub fn origin(&self) -> [f64; 2] {
        [
            self.center[0] - self.extent[0] / 2.0,
            self.center[1] - self.extent[1] / 2.0,
        ]
    }

    pub fn step(&self) -> [f64; 2] {
        [
            self.extent[0] / (self.resolution[0] - 1) as f64,
            self.extent[1] / (self.resolution[1] - 1) as f64,
        ]
    }

    /// Sample position of column `i`, row `j`.
    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        let (o, h) = (self.origin(), self.step());
        Vec3::new(o[0] + i as f64 * h[0], o[1] + j as f64 * h[1], self.z)
    }

    fn validate(&self) -> Result<(), MagneticsError> {
        if self.resolution[0] < 2 || self.resolution[1] < 2 {
            return Err(MagneticsError::InvalidPlane(format!(
                "resolution {}x{} must be at least 2x2",
                self.resolution[0], self.resolution[1]
            )));
        }
        let finite = self.z.is_finite() && self.center.iter().chain(&self.extent).all(|v| v.is_finite());
        if !finite || self.extent.iter().any(|e| *e <= 0.0) {
            return Err(MagneticsError::InvalidPlane("extent must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Sampled flux density on a plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub plane: PlaneSpec,
    /// Row-major, row `j` (y) outer, column `i` (x) inner; tesla.
    pub values: Vec<[f64; 3]>,
}

impl FieldMap {
    pub fn nx(&self) -> usize {
        self.plane.resolution[0]
    }

    pub fn ny(&self) -> usize {
        self.plane.resolution[1]
    }

    pub fn at(&self, i: usize, j: usize) -> Vec3 {
        Vec3::from(self.values[j * self.nx() + i])
    }

    pub fn bz(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v[2])
    }

    pub fn max_abs_bz(&self) -> f64 {
        self.bz().map(f64::abs).fold(0.0, f64::max)
    }

    pub fn mean_abs_bz(&self) -> f64 {
        self.bz().map(f64::abs).sum::<f64>() / self.values.len() as f64
    }
}

/// Superposed field of `sources` on `plane`.
///
/// Each sample sums sources in list order and dipoles in slice order, so
/// the result is identical however the work is split across threads.
pub fn field_map(sources: &[MagnetSource], plane: &PlaneSpec) -> Result<FieldMap, MagneticsError> {
    plane.validate()?;
    let (o, e) = (plane.origin(), plane.extent);
    for (index, s) in sources.iter().enumerate() {
        s.validate()?;
        let (lo, hi) = s.z_range();
        let r = s.radius().max(s.length());
        let overlaps_xy = s.center.x + r > o[0]
            && s.center.x - r < o[0] + e[0]
            && s.center.y + r > o[1]
            && s.center.y - r < o[1] + e[1];
        if plane.z >= lo && plane.z <= hi && overlaps_xy {
            return Err(MagneticsError::PlaneIntersectsMagnet { index, z: plane.z });
        }
    }
    let dipoles: Vec<Vec<_>> = sources.iter().map(|s| s.dipoles()).collect();
    let [nx, ny] = plane.resolution;
    let values = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let p = plane.point(k % nx, k / nx);
            let mut b = Vec3::zeros();
            for (index, (s, ds)) in sources.iter().zip(&dipoles).enumerate() {
                if s.contains(&p) {
                    return Err(MagneticsError::PointInsideMagnet {
                        index,
                        x: p.x,
                        y: p.y,
                        z: p.z,
                    });
                }
                b += sum_dipoles(ds, &p)?;
            }
            Ok([b.x, b.y, b.z])
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FieldMap { plane: *plane, values })
}
