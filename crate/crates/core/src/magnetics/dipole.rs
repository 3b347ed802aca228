use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::MagneticsError;
use crate::geom::Vec3;

/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;
/// Evaluations closer than this to a dipole are rejected, metres.
pub const SINGULAR_RADIUS: f64 = 1e-6;

const K: f64 = MU0 / (4.0 * std::f64::consts::PI);

/// Point dipole: position in metres, moment in A·m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dipole {
    pub position: Vec3,
    pub moment: Vec3,
}

pub fn dipole_field(d: &Dipole, p: &Vec3) -> Result<Vec3, MagneticsError> {
    let r = p - d.position;
    let r2 = r.norm_squared();
    if r2 < SINGULAR_RADIUS * SINGULAR_RADIUS {
        return Err(MagneticsError::SingularPoint { distance: r2.sqrt() });
    }
    Ok(field_unchecked(&d.moment, &r, r2))
}

#[inline]
pub(crate) fn field_unchecked(m: &Vec3, r: &Vec3, r2: f64) -> Vec3 {
    let inv = 1.0 / r2.sqrt();
    let inv3 = inv * inv * inv;
    let mr = m.dot(r) * inv * inv;
    (r * (3.0 * mr) - m) * (K * inv3)
}

/// Spatial Jacobian `∂B_i/∂p_j` of the dipole field at `p`.
pub fn dipole_field_gradient(d: &Dipole, p: &Vec3) -> Result<Matrix3<f64>, MagneticsError> {
    let r = p - d.position;
    let r2 = r.norm_squared();
    if r2 < SINGULAR_RADIUS * SINGULAR_RADIUS {
        return Err(MagneticsError::SingularPoint { distance: r2.sqrt() });
    }
    Ok(gradient_unchecked(&d.moment, &r, r2))
}

#[inline]
pub(crate) fn gradient_unchecked(m: &Vec3, r: &Vec3, r2: f64) -> Matrix3<f64> {
    let inv2 = 1.0 / r2;
    let inv5 = inv2 * inv2 * inv2.sqrt();
    let mr = m.dot(r);
    let mut g = (m * r.transpose() + r * m.transpose()) * 3.0;
    g += Matrix3::identity() * (3.0 * mr);
    g -= r * r.transpose() * (15.0 * mr * inv2);
    g * (K * inv5)
}
