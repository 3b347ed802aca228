use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::dipole::{field_unchecked, Dipole, MU0, SINGULAR_RADIUS};
use super::MagneticsError;
use crate::fabrication::{MagnetSpec, PouchSpec};
use crate::geom::Vec3;

pub const DEFAULT_SLICES: usize = 8;

// Gauss-Legendre nodes and weights on [0, 1].
const GL: [&[(f64, f64)]; 5] = [
    &[(0.5, 1.0)],
    &[(0.211_324_865_405_187_1, 0.5), (0.788_675_134_594_812_9, 0.5)],
    &[
        (0.112_701_665_379_258_3, 0.277_777_777_777_777_8),
        (0.5, 0.444_444_444_444_444_4),
        (0.887_298_334_620_741_7, 0.277_777_777_777_777_8),
    ],
    &[
        (0.069_431_844_202_973_7, 0.173_927_422_568_726_9),
        (0.330_009_478_207_571_9, 0.326_072_577_431_273_1),
        (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
        (0.930_568_155_797_026_3, 0.173_927_422_568_726_9),
    ],
    &[
        (0.046_910_077_030_668_0, 0.118_463_442_528_094_5),
        (0.230_765_344_947_158_5, 0.239_314_335_249_683_2),
        (0.5, 0.284_444_444_444_444_4),
        (0.769_234_655_052_841_5, 0.239_314_335_249_683_2),
        (0.953_089_922_969_332_0, 0.118_463_442_528_094_5),
    ],
];

/// Polar sampling of each slice's cross-section.
///
/// Rings sit at Gauss-Legendre nodes in squared radius so each carries an
/// equal-area weight; spokes are equally spaced. `rings = 0` collapses each
/// slice to one dipole on the axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscQuadrature {
    pub rings: usize,
    pub spokes: usize,
}

impl DiscQuadrature {
    pub const AXIAL: DiscQuadrature = DiscQuadrature { rings: 0, spokes: 1 };

    fn points(&self) -> Vec<(f64, f64, f64)> {
        if self.rings == 0 {
            return vec![(0.0, 0.0, 1.0)];
        }
        let mut out = Vec::with_capacity(self.rings * self.spokes);
        for &(s, w) in GL[self.rings - 1] {
            let r = s.sqrt();
            for k in 0..self.spokes {
                let t = TAU * k as f64 / self.spokes as f64;
                out.push((r * t.cos(), r * t.sin(), w / self.spokes as f64));
            }
        }
        out
    }
}

impl Default for DiscQuadrature {
    fn default() -> Self {
        Self { rings: 3, spokes: 8 }
    }
}

/// Cylindrical permanent magnet. `center` is in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetSource {
    pub spec: MagnetSpec,
    pub center: Vec3,
    /// Unit vector; the moment points along `polarity · axis`.
    pub axis: Vec3,
    pub n_slices: usize,
    #[serde(default)]
    pub quadrature: DiscQuadrature,
}

impl MagnetSource {
    /// Vertical magnet with default discretisation; `center` in metres.
    pub fn new(spec: MagnetSpec, center: Vec3) -> Self {
        Self {
            spec,
            center,
            axis: Vec3::z(),
            n_slices: DEFAULT_SLICES,
            quadrature: DiscQuadrature::default(),
        }
    }

    pub fn from_pouch(p: &PouchSpec) -> Self {
        Self::new(p.magnet, Vec3::from(p.center) * 1e-3)
    }

    pub fn with_slices(mut self, n: usize) -> Self {
        self.n_slices = n;
        self
    }

    pub fn with_quadrature(mut self, q: DiscQuadrature) -> Self {
        self.quadrature = q;
        self
    }

    pub fn with_polarity(mut self, polarity: i8) -> Self {
        self.spec.polarity = polarity;
        self
    }

    pub fn radius(&self) -> f64 {
        self.spec.diameter * 0.5e-3
    }

    pub fn length(&self) -> f64 {
        self.spec.thickness * 1e-3
    }

    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.radius().powi(2) * self.length()
    }

    /// Total moment magnitude, A·m².
    pub fn moment(&self) -> f64 {
        self.spec.remanence * self.volume() / MU0
    }

    pub fn validate(&self) -> Result<(), MagneticsError> {
        let bad = |m: String| Err(MagneticsError::InvalidSource(m));
        self.spec.validate().map_err(|e| MagneticsError::InvalidSource(e.to_string()))?;
        if self.n_slices == 0 {
            return bad("n_slices must be at least 1".into());
        }
        if (self.axis.norm() - 1.0).abs() > 1e-9 {
            return bad(format!("axis length {} is not 1", self.axis.norm()));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return bad("center must be finite".into());
        }
        let q = self.quadrature;
        if q.rings > GL.len() || (q.rings > 0 && q.spokes == 0) {
            return bad(format!("quadrature needs 0..={} rings and at least one spoke", GL.len()));
        }
        Ok(())
    }

    /// Point dipoles whose moments sum to the magnet's moment.
    pub fn dipoles(&self) -> Vec<Dipole> {
        let axis = self.axis;
        let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = axis.cross(&helper).normalize();
        let v = axis.cross(&u);
        let (len, rad) = (self.length(), self.radius());
        let total = axis * (self.moment() * self.spec.polarity as f64);
        let slice = total / self.n_slices as f64;
        let pts = self.quadrature.points();
        let mut out = Vec::with_capacity(self.n_slices * pts.len());
        for k in 0..self.n_slices {
            let t = -len / 2.0 + (k as f64 + 0.5) * len / self.n_slices as f64;
            let c = self.center + axis * t;
            for &(a, b, w) in &pts {
                out.push(Dipole {
                    position: c + u * (a * rad) + v * (b * rad),
                    moment: slice * w,
                });
            }
        }
        out
    }

    /// True when `p` is strictly inside the cylinder.
    pub fn contains(&self, p: &Vec3) -> bool {
        let d = p - self.center;
        let t = d.dot(&self.axis);
        let radial = (d - self.axis * t).norm();
        t.abs() < self.length() / 2.0 && radial < self.radius()
    }

    /// Lowest and highest z reached by the magnet body.
    pub fn z_range(&self) -> (f64, f64) {
        let a = self.axis;
        let half = (a.z.abs() * self.length() + (1.0 - a.z * a.z).max(0.0).sqrt() * 2.0 * self.radius()) / 2.0;
        (self.center.z - half, self.center.z + half)
    }
}

/// Field of one magnet at `p` (metres), tesla.
pub fn magnet_field(src: &MagnetSource, p: &Vec3) -> Result<Vec3, MagneticsError> {
    total_field(std::slice::from_ref(src), p)
}

/// Superposed field of several magnets, summed in list order.
pub fn total_field(sources: &[MagnetSource], p: &Vec3) -> Result<Vec3, MagneticsError> {
    let mut b = Vec3::zeros();
    for (index, s) in sources.iter().enumerate() {
        s.validate()?;
        if s.contains(p) {
            return Err(MagneticsError::PointInsideMagnet {
                index,
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
        b += sum_dipoles(&s.dipoles(), p)?;
    }
    Ok(b)
}

pub(crate) fn sum_dipoles(dipoles: &[Dipole], p: &Vec3) -> Result<Vec3, MagneticsError> {
    let mut b = Vec3::zeros();
    for d in dipoles {
        let r = p - d.position;
        let r2 = r.norm_squared();
        if r2 < SINGULAR_RADIUS * SINGULAR_RADIUS {
            return Err(MagneticsError::SingularPoint { distance: r2.sqrt() });
        }
        b += field_unchecked(&d.moment, &r, r2);
    }
    Ok(b)
}

/// Closed-form on-axis `B_z` of a uniformly magnetised cylinder at height
/// `z` above its top face. Lengths in metres.
pub fn cylinder_on_axis_bz(remanence: f64, radius: f64, length: f64, z: f64) -> f64 {
    let r2 = radius * radius;
    remanence / 2.0 * ((z + length) / ((z + length).powi(2) + r2).sqrt() - z / (z * z + r2).sqrt())
}
