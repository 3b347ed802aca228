//! Magnet pouches, magnetometer slot and the pause-layer print plan.
//!
//! Housings and the slot plate are built analytically as closed shells and
//! added to the lattice's shell soup; lattice beams that would collide with
//! them are removed.

mod layout;
mod plan;
mod pouch;
mod slot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use layout::{Clearances, PlacedMagnet, PouchLayout, LAYOUT_SCHEMA_VERSION};
pub use plan::{layer_index_at_or_above, pause_layer, PrintPlan, DEFAULT_LAYER_HEIGHT};
pub use pouch::{default_pouch_centers, housing_shell, place_pouches, DEFAULT_SEGMENTS};
pub use slot::{place_slot, slot_plate_shell, SlotFace, SlotSpec};

/// N52 remanence used when none is given, in tesla.
pub const N52_REMANENCE: f64 = 1.45;

#[derive(Debug, Error)]
pub enum FabricationError {
    #[error("invalid magnet: {0}")]
    InvalidMagnet(String),
    #[error("invalid pouch {index}: {msg}")]
    InvalidPouch { index: usize, msg: String },
    #[error("pouches {a} and {b} are {gap:.3} mm apart, need at least one wall ({wall} mm)")]
    PouchOverlap { a: usize, b: usize, gap: f64, wall: f64 },
    #[error("pouch {index} housing extends outside the body")]
    PouchOutsideBody { index: usize },
    #[error("pouch {index} cavity is {cavity_height:.3} mm tall, more than one {layer_height} mm grading layer")]
    PouchTooTallForLayer {
        index: usize,
        cavity_height: f64,
        layer_height: f64,
    },
    #[error("invalid slot: {0}")]
    InvalidSlot(String),
    #[error("slot intersects the cavity of pouch {index}")]
    SlotIntersectsPouch { index: usize },
    #[error("slot outside body: {0}")]
    SlotOutsideBody(String),
    #[error("invalid layer height {0} mm")]
    InvalidLayerHeight(f64),
    #[error("no pouches to plan a pause for")]
    NoPouches,
    #[error("cavity tops need separate pauses after layers {indices:?}")]
    MultiplePauseLevels { indices: Vec<u32> },
}

/// Cylindrical magnet, dimensions in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetSpec {
    pub diameter: f64,
    pub thickness: f64,
    /// Remanent flux density, tesla.
    #[serde(default = "default_remanence")]
    pub remanence: f64,
    /// +1 north up, -1 north down.
    #[serde(default = "default_polarity")]
    pub polarity: i8,
}

fn default_remanence() -> f64 {
    N52_REMANENCE
}

fn default_polarity() -> i8 {
    1
}

impl MagnetSpec {
    pub fn new(diameter: f64, thickness: f64) -> Self {
        Self {
            diameter,
            thickness,
            remanence: N52_REMANENCE,
            polarity: 1,
        }
    }

    pub fn validate(&self) -> Result<(), FabricationError> {
        let bad = |m: String| Err(FabricationError::InvalidMagnet(m));
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return bad(format!("diameter {} must be positive", self.diameter));
        }
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return bad(format!("thickness {} must be positive", self.thickness));
        }
        if !(self.remanence > 0.0 && self.remanence <= 1.6) {
            return bad(format!("remanence {} T must lie in (0, 1.6]", self.remanence));
        }
        if self.polarity != 1 && self.polarity != -1 {
            return bad(format!("polarity {} must be +1 or -1", self.polarity));
        }
        Ok(())
    }
}

/// Press-fit pouch for one magnet. All lengths in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PouchSpec {
    /// Cavity centroid.
    pub center: [f64; 3],
    pub magnet: MagnetSpec,
    pub radial_clearance: f64,
    pub axial_clearance: f64,
    pub wall: f64,
    pub lip: f64,
}

impl PouchSpec {
    pub fn new(center: [f64; 3], magnet: MagnetSpec) -> Self {
        let c = Clearances::default();
        Self {
            center,
            magnet,
            radial_clearance: c.radial,
            axial_clearance: c.axial,
            wall: c.wall,
            lip: c.lip,
        }
    }

    pub fn with_clearances(center: [f64; 3], magnet: MagnetSpec, c: &Clearances) -> Self {
        Self {
            center,
            magnet,
            radial_clearance: c.radial,
            axial_clearance: c.axial,
            wall: c.wall,
            lip: c.lip,
        }
    }

    pub fn cavity_radius(&self) -> f64 {
        self.magnet.diameter / 2.0 + self.radial_clearance
    }

    pub fn cavity_height(&self) -> f64 {
        self.magnet.thickness + self.axial_clearance
    }

    pub fn cavity_bottom(&self) -> f64 {
        self.center[2] - self.cavity_height() / 2.0
    }

    pub fn cavity_top(&self) -> f64 {
        self.center[2] + self.cavity_height() / 2.0
    }

    /// Radius of the openings left by the retaining lips.
    pub fn opening_radius(&self) -> f64 {
        self.cavity_radius() - self.lip
    }

    /// Side length of the square housing footprint.
    pub fn housing_side(&self) -> f64 {
        2.0 * (self.cavity_radius() + self.wall)
    }

    /// Box height, `t + 2·axial + 2·wall`; the cavity sits centered in it.
    pub fn housing_height(&self) -> f64 {
        self.magnet.thickness + 2.0 * self.axial_clearance + 2.0 * self.wall
    }

    pub fn housing_bbox(&self) -> crate::Aabb {
        let h = crate::Vec3::new(
            self.housing_side() / 2.0,
            self.housing_side() / 2.0,
            self.housing_height() / 2.0,
        );
        let c = crate::Vec3::from(self.center);
        crate::Aabb::new(c - h, c + h)
    }

    pub fn cavity_bbox(&self) -> crate::Aabb {
        let r = self.cavity_radius();
        let h = crate::Vec3::new(r, r, self.cavity_height() / 2.0);
        let c = crate::Vec3::from(self.center);
        crate::Aabb::new(c - h, c + h)
    }

    /// True when `p` lies inside the cavity cylinder (boundary excluded).
    pub fn cavity_contains(&self, p: &crate::Vec3) -> bool {
        let dx = p.x - self.center[0];
        let dy = p.y - self.center[1];
        dx * dx + dy * dy < self.cavity_radius().powi(2)
            && p.z > self.cavity_bottom()
            && p.z < self.cavity_top()
    }

    pub(crate) fn validate(&self, index: usize, min_beam: f64) -> Result<(), FabricationError> {
        self.magnet.validate()?;
        let bad = |msg: String| Err(FabricationError::InvalidPouch { index, msg });
        if !self.center.iter().all(|c| c.is_finite()) {
            return bad("center must be finite".into());
        }
        if !(self.radial_clearance >= 0.0 && self.axial_clearance >= 0.0) {
            return bad("clearances must be non-negative".into());
        }
        if !(self.wall >= min_beam && self.wall > 0.0) {
            return bad(format!("wall {} mm is below the minimum beam {} mm", self.wall, min_beam));
        }
        if !(self.lip >= 0.0 && self.lip < self.cavity_radius()) {
            return bad(format!("lip {} mm must be in [0, cavity radius)", self.lip));
        }
        Ok(())
    }
}
