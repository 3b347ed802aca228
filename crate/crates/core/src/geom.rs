use serde::{Deserialize, Serialize};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Axis-aligned box in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self {
            min: [min.x, min.y, min.z],
            max: [max.x, max.y, max.z],
        }
    }

    /// Smallest box containing every point, or `None` for an empty iterator.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Self::new(*first, *first);
        for p in it {
            b.include(p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: &Vec3) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(p[a]);
            self.max[a] = self.max[a].max(p[a]);
        }
    }

    pub fn min_v(&self) -> Vec3 {
        Vec3::from(self.min)
    }

    pub fn max_v(&self) -> Vec3 {
        Vec3::from(self.max)
    }

    pub fn extent(&self) -> Vec3 {
        self.max_v() - self.min_v()
    }

    pub fn center(&self) -> Vec3 {
        (self.min_v() + self.max_v()) * 0.5
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn inflate(&self, d: f64) -> Self {
        Self {
            min: self.min.map(|v| v - d),
            max: self.max.map(|v| v + d),
        }
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] - tol && p[a] <= self.max[a] + tol)
    }

    /// True when the interiors overlap (touching faces do not count).
    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|a| self.min[a] < other.max[a] && other.min[a] < self.max[a])
    }

    pub fn intersection(&self, other: &Aabb) -> Option<Aabb> {
        let mut out = *self;
        for a in 0..3 {
            out.min[a] = self.min[a].max(other.min[a]);
            out.max[a] = self.max[a].min(other.max[a]);
            if out.min[a] >= out.max[a] {
                return None;
            }
        }
        Some(out)
    }

    /// Largest per-axis separation between the boxes; negative when they overlap.
    pub fn gap(&self, other: &Aabb) -> f64 {
        (0..3)
            .map(|a| (other.min[a] - self.max[a]).max(self.min[a] - other.max[a]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (lo, hi) = (self.min, self.max);
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            *c = Vec3::new(
                if i & 1 == 0 { lo[0] } else { hi[0] },
                if i & 2 == 0 { lo[1] } else { hi[1] },
                if i & 4 == 0 { lo[2] } else { hi[2] },
            );
        }
        out
    }
}

/// Oriented plane `normal · p <= offset` describing a closed half-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl HalfSpace {
    /// Normalises `normal`; returns `None` for a zero vector.
    pub fn new(normal: Vec3, offset: f64) -> Option<Self> {
        let len = normal.norm();
        if !(len > 0.0) || !len.is_finite() {
            return None;
        }
        let n = normal / len;
        Some(Self {
            normal: [n.x, n.y, n.z],
            offset: offset / len,
        })
    }

    pub fn through(normal: Vec3, point: &Vec3) -> Option<Self> {
        Self::new(normal, normal.dot(point))
    }

    pub fn n(&self) -> Vec3 {
        Vec3::from(self.normal)
    }

    /// Positive outside, negative inside.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.n().dot(p) - self.offset
    }
}

pub(crate) fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}
