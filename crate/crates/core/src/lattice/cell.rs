//! Beam-frame unit cell and its stiffness-to-geometry map.
//!
//! Each cell is a cubic frame of twelve square-section beams along the cube
//! edges. The effective modulus of such a bending-dominated frame scales as
//! `E/E_f = rho^2` with relative density `rho = 3 (t/c)^2`, where `t` is the
//! beam width and `c` the cell size; [`modulus_to_beam`] inverts that.

use serde::{Deserialize, Serialize};

use super::solid::ConvexSolid;
use super::LatticeError;
use crate::geom::{Aabb, Vec3};

pub const DEFAULT_MIN_BEAM: f64 = 0.4;

/// Beam width (mm) for a target modulus ratio, clamped up to `min_beam`.
pub fn modulus_to_beam(modulus_ratio: f64, cell_size: f64, min_beam: f64) -> Result<f64, LatticeError> {
    if !(modulus_ratio > 0.0 && modulus_ratio < 1.0) {
        return Err(LatticeError::InvalidCellSpec(format!(
            "modulus ratio {modulus_ratio} must lie in (0, 1)"
        )));
    }
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(LatticeError::InvalidCellSpec(format!("cell size {cell_size} must be positive")));
    }
    if !(min_beam >= 0.0 && min_beam.is_finite()) {
        return Err(LatticeError::InvalidCellSpec(format!("minimum beam {min_beam} must be non-negative")));
    }
    let density = modulus_ratio.sqrt();
    let width = (cell_size * (density / 3.0).sqrt()).max(min_beam);
    if width >= cell_size / 2.0 {
        return Err(LatticeError::OutOfRange {
            modulus_ratio,
            cell_size,
            beam_width: width,
        });
    }
    Ok(width)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub cell_size: f64,
    pub modulus_ratio: f64,
    pub beam_width: f64,
    pub min_beam: f64,
}

impl CellSpec {
    pub fn new(modulus_ratio: f64, cell_size: f64, min_beam: f64) -> Result<Self, LatticeError> {
        let beam_width = modulus_to_beam(modulus_ratio, cell_size, min_beam)?;
        Ok(Self {
            cell_size,
            modulus_ratio,
            beam_width,
            min_beam,
        })
    }
}

/// Per-layer modulus ratios, bottom layer first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerGrading {
    pub layer_moduli: Vec<f64>,
}

impl LayerGrading {
    pub fn new(layer_moduli: Vec<f64>) -> Result<Self, LatticeError> {
        if layer_moduli.is_empty() {
            return Err(LatticeError::InvalidCellSpec("grading needs at least one layer".into()));
        }
        if let Some(bad) = layer_moduli.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(LatticeError::InvalidCellSpec(format!(
                "modulus ratio {bad} must lie in (0, 1)"
            )));
        }
        Ok(Self { layer_moduli })
    }

    pub fn uniform(ratio: f64) -> Result<Self, LatticeError> {
        Self::new(vec![ratio])
    }

    /// Ratio for layer `k`; layers above the list reuse the last entry.
    pub fn ratio_for_layer(&self, k: usize) -> f64 {
        self.layer_moduli[k.min(self.layer_moduli.len() - 1)]
    }
}

/// The twelve edge beams of one cell with minimum corner `origin`.
///
/// Beams are inset so the frame stays within the cell cube; ordering is by
/// beam axis (x, y, z), then by which side of the other two axes it sits on.
pub fn generate_cell(spec: &CellSpec, origin: &Vec3) -> Vec<ConvexSolid> {
    let c = spec.cell_size;
    let w = spec.beam_width;
    let mut beams = Vec::with_capacity(12);
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for corner in 0..4 {
            let mut lo = [0.0; 3];
            let mut hi = [0.0; 3];
            lo[axis] = 0.0;
            hi[axis] = c;
            for (bit, other) in [(1, u), (2, v)] {
                if corner & bit == 0 {
                    lo[other] = 0.0;
                    hi[other] = w;
                } else {
                    lo[other] = c - w;
                    hi[other] = c;
                }
            }
            let b = Aabb::new(Vec3::from(lo) + origin, Vec3::from(hi) + origin);
            beams.push(ConvexSolid::from_aabb(&b));
        }
    }
    beams
}
