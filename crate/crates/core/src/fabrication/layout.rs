use serde::{Deserialize, Serialize};

use super::{MagnetSpec, PouchSpec, SlotSpec};
use crate::Error;

pub const LAYOUT_SCHEMA_VERSION: u32 = 1;

/// Press-fit allowances shared by every pouch, in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Clearances {
    pub radial: f64,
    pub axial: f64,
    pub wall: f64,
    pub lip: f64,
}

impl Default for Clearances {
    fn default() -> Self {
        Self {
            radial: 0.10,
            axial: 0.15,
            wall: 1.2,
            lip: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedMagnet {
    pub center: [f64; 3],
    pub polarity: i8,
}

/// JSON sidecar describing pouch and slot placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PouchLayout {
    pub schema_version: u32,
    pub magnet: MagnetSpec,
    pub pouches: Vec<PlacedMagnet>,
    #[serde(default)]
    pub clearances: Clearances,
    #[serde(default)]
    pub slot: Option<SlotSpec>,
}

impl PouchLayout {
    /// Layout of `pouches`, which must share a magnet geometry and clearances.
    pub fn from_pouches(pouches: &[PouchSpec], slot: Option<SlotSpec>) -> Option<Self> {
        let first = pouches.first()?;
        let clearances = Clearances {
            radial: first.radial_clearance,
            axial: first.axial_clearance,
            wall: first.wall,
            lip: first.lip,
        };
        Some(Self {
            schema_version: LAYOUT_SCHEMA_VERSION,
            magnet: MagnetSpec {
                polarity: 1,
                ..first.magnet
            },
            pouches: pouches
                .iter()
                .map(|p| PlacedMagnet {
                    center: p.center,
                    polarity: p.magnet.polarity,
                })
                .collect(),
            clearances,
            slot,
        })
    }

    pub fn to_pouches(&self) -> Vec<PouchSpec> {
        self.pouches
            .iter()
            .map(|m| {
                let magnet = MagnetSpec {
                    polarity: m.polarity,
                    ..self.magnet
                };
                PouchSpec::with_clearances(m.center, magnet, &self.clearances)
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let layout: Self =
            serde_json::from_str(text).map_err(|e| Error::io("parsing pouch layout", e.into()))?;
        if layout.schema_version != LAYOUT_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported layout schema_version {}, expected {LAYOUT_SCHEMA_VERSION}",
                layout.schema_version
            )));
        }
        Ok(layout)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}
