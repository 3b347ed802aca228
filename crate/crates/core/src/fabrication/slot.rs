use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FabricationError;
use crate::geom::{Aabb, Vec3};
use crate::lattice::{LatticeModel, Part, PartKind};
use crate::mesh::{MeshBuilder, Shell};

/// Body face through which the magnetometer board is inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotFace {
    #[serde(rename = "+x")]
    PosX,
    #[serde(rename = "-x")]
    NegX,
    #[serde(rename = "+y")]
    PosY,
    #[serde(rename = "-y")]
    NegY,
    #[serde(rename = "+z")]
    PosZ,
    #[serde(rename = "-z")]
    NegZ,
}

impl SlotFace {
    pub fn axis(self) -> usize {
        match self {
            SlotFace::PosX | SlotFace::NegX => 0,
            SlotFace::PosY | SlotFace::NegY => 1,
            SlotFace::PosZ | SlotFace::NegZ => 2,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, SlotFace::PosX | SlotFace::PosY | SlotFace::PosZ)
    }

    pub fn normal(self) -> Vec3 {
        let mut n = Vec3::zeros();
        n[self.axis()] = if self.is_positive() { 1.0 } else { -1.0 };
        n
    }
}

impl fmt::Display for SlotFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SlotFace::PosX => "+x",
            SlotFace::NegX => "-x",
            SlotFace::PosY => "+y",
            SlotFace::NegY => "-y",
            SlotFace::PosZ => "+z",
            SlotFace::NegZ => "-z",
        };
        f.write_str(s)
    }
}

impl FromStr for SlotFace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "+x" | "x" => SlotFace::PosX,
            "-x" => SlotFace::NegX,
            "+y" | "y" => SlotFace::PosY,
            "-y" => SlotFace::NegY,
            "+z" | "z" => SlotFace::PosZ,
            "-z" => SlotFace::NegZ,
            other => return Err(format!("unknown face '{other}', expected one of +x -x +y -y +z -z")),
        })
    }
}

/// Rectangular pocket for the magnetometer board, in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub dims: [f64; 3],
    /// Center of the pocket.
    pub position: [f64; 3],
    pub open_face: SlotFace,
    /// Plate thickness around the pocket on the closed sides.
    #[serde(default = "default_wall")]
    pub wall: f64,
}

fn default_wall() -> f64 {
    1.2
}

impl SlotSpec {
    pub fn new(dims: [f64; 3], position: [f64; 3], open_face: SlotFace) -> Self {
        Self {
            dims,
            position,
            open_face,
            wall: default_wall(),
        }
    }

    /// Slot of `dims` centered on `open_face` of `bbox`, pocket flush with it.
    pub fn on_face(bbox: &Aabb, dims: [f64; 3], open_face: SlotFace) -> Self {
        let mut position: [f64; 3] = bbox.center().into();
        let a = open_face.axis();
        position[a] = if open_face.is_positive() {
            bbox.max[a] - dims[a] / 2.0
        } else {
            bbox.min[a] + dims[a] / 2.0
        };
        Self::new(dims, position, open_face)
    }

    pub fn region(&self) -> Aabb {
        let c = Vec3::from(self.position);
        let h = Vec3::from(self.dims) / 2.0;
        Aabb::new(c - h, c + h)
    }

    /// Pocket plus the surrounding wall, open side flush with the pocket.
    pub fn plate_bbox(&self) -> Aabb {
        let mut b = self.region().inflate(self.wall);
        let a = self.open_face.axis();
        if self.open_face.is_positive() {
            b.max[a] = self.region().max[a];
        } else {
            b.min[a] = self.region().min[a];
        }
        b
    }

    /// Center of the opening on the open face.
    pub fn opening_center(&self) -> Vec3 {
        let mut p = Vec3::from(self.position);
        let a = self.open_face.axis();
        p[a] += self.open_face.normal()[a] * self.dims[a] / 2.0;
        p
    }

    fn validate(&self) -> Result<(), FabricationError> {
        if !self.dims.iter().all(|d| *d > 0.0 && d.is_finite()) {
            return Err(FabricationError::InvalidSlot(format!("dims {:?} must be positive", self.dims)));
        }
        if !self.position.iter().all(|p| p.is_finite()) {
            return Err(FabricationError::InvalidSlot("position must be finite".into()));
        }
        if !(self.wall > 0.0 && self.wall.is_finite()) {
            return Err(FabricationError::InvalidSlot(format!("wall {} must be positive", self.wall)));
        }
        Ok(())
    }
}

/// Closed plate with a rectangular pocket that opens only on `open_face`.
pub fn slot_plate_shell(slot: &SlotSpec) -> Shell {
    let a = slot.open_face.axis();
    let (u, v) = ((a + 1) % 3, (a + 2) % 3);
    // Local w runs inward from the open face.
    let sign = if slot.open_face.is_positive() { -1.0 } else { 1.0 };
    let outer = slot.plate_bbox();
    let inner = slot.region();
    let to_w = |x: f64| sign * x;
    let (w_open, w_back) = {
        let (p, q) = (to_w(outer.min[a]), to_w(outer.max[a]));
        (p.min(q), p.max(q))
    };
    let w_floor = {
        let (p, q) = (to_w(inner.min[a]), to_w(inner.max[a]));
        p.max(q)
    };
    let world = |pu: f64, pv: f64, pw: f64| {
        let mut p = Vec3::zeros();
        p[u] = pu;
        p[v] = pv;
        p[a] = sign * pw;
        p
    };
    let dir = |du: f64, dv: f64, dw: f64| world(du, dv, dw);

    let mut b = MeshBuilder::default();
    let rect = |b: &mut MeshBuilder, bx: &Aabb, w: f64| -> [u32; 4] {
        [
            b.vertex(world(bx.min[u], bx.min[v], w)),
            b.vertex(world(bx.max[u], bx.min[v], w)),
            b.vertex(world(bx.max[u], bx.max[v], w)),
            b.vertex(world(bx.min[u], bx.max[v], w)),
        ]
    };
    let oo = rect(&mut b, &outer, w_open);
    let ob = rect(&mut b, &outer, w_back);
    let io = rect(&mut b, &inner, w_open);
    let ifl = rect(&mut b, &inner, w_floor);
    let sides = [dir(0.0, -1.0, 0.0), dir(1.0, 0.0, 0.0), dir(0.0, 1.0, 0.0), dir(-1.0, 0.0, 0.0)];
    let open_n = dir(0.0, 0.0, -1.0);
    b.quad(ob, &-open_n);
    b.quad(ifl, &open_n);
    for k in 0..4 {
        let l = (k + 1) % 4;
        b.quad([oo[k], oo[l], ob[l], ob[k]], &sides[k]);
        b.quad([oo[k], oo[l], io[l], io[k]], &open_n);
        b.quad([io[k], io[l], ifl[l], ifl[k]], &-sides[k]);
    }
    Shell::new(b.finish())
}

/// Adds the slot plate and clears beams around it.
pub fn place_slot(lattice: &LatticeModel, slot: &SlotSpec) -> Result<LatticeModel, FabricationError> {
    slot.validate()?;
    let body = lattice.body();
    let plate = slot.plate_bbox();
    const TOL: f64 = 1e-6;
    if !plate.corners().iter().all(|c| lattice.bbox.contains(c, TOL) && body.contains(c, TOL)) {
        return Err(FabricationError::SlotOutsideBody(format!(
            "plate {:?}..{:?} leaves the body",
            plate.min, plate.max
        )));
    }
    if body.max_violation(&slot.opening_center()).abs() > TOL {
        return Err(FabricationError::SlotOutsideBody(format!(
            "open face {} is not on the body boundary",
            slot.open_face
        )));
    }
    if let Some(index) = lattice.pouches.iter().position(|p| plate.overlaps(&p.cavity_bbox())) {
        return Err(FabricationError::SlotIntersectsPouch { index });
    }
    let clear = slot.region().inflate(slot.wall);
    let mut out = lattice.clone();
    out.beams.retain(|beam| !beam.solid.bbox().overlaps(&clear));
    out.parts.push(Part {
        kind: PartKind::SlotPlate,
        shell: slot_plate_shell(slot),
    });
    out.slot = Some(*slot);
    out.refresh_occupancy();
    Ok(out)
}
