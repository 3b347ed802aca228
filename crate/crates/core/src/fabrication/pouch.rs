use std::f64::consts::TAU;

use rayon::prelude::*;

use super::{FabricationError, PouchSpec};
use crate::geom::{Aabb, Vec3};
use crate::lattice::{LatticeModel, Part, PartKind};
use crate::mesh::{MeshBuilder, Shell};

/// Cylinder tessellation used for housings unless overridden.
pub const DEFAULT_SEGMENTS: usize = 64;

/// `count` cavity centers on the mid-plane of `bbox`, one per cell of a
/// near-square grid of equal sub-rectangles. A short last row is centered.
pub fn default_pouch_centers(bbox: &Aabb, count: usize) -> Vec<[f64; 3]> {
    if count == 0 {
        return Vec::new();
    }
    let cols = (count as f64).sqrt().ceil() as usize;
    let rows = count.div_ceil(cols);
    let ext = bbox.extent();
    let (dx, dy) = (ext.x / cols as f64, ext.y / rows as f64);
    let z = bbox.center().z;
    let mut out = Vec::with_capacity(count);
    for r in 0..rows {
        let in_row = cols.min(count - r * cols);
        let shift = (cols - in_row) as f64 * dx / 2.0;
        for c in 0..in_row {
            out.push([
                bbox.min[0] + shift + (c as f64 + 0.5) * dx,
                bbox.min[1] + (r as f64 + 0.5) * dy,
                z,
            ]);
        }
    }
    out
}

/// Closed genus-1 housing: a square box pierced by a vertical stepped bore.
///
/// From the bottom the bore has the lip opening radius, widens to the
/// cavity radius between the cavity floor and ceiling, then narrows again.
/// The two lip rings retain the magnet. `segments` must be a multiple of 8
/// so the square's corners appear in the ring sampling.
pub fn housing_shell(pouch: &PouchSpec, segments: usize) -> Shell {
    assert!(segments >= 8 && segments % 8 == 0, "segments must be a positive multiple of 8");
    let c = Vec3::from(pouch.center);
    let half = pouch.housing_side() / 2.0;
    let z0 = c.z - pouch.housing_height() / 2.0;
    let z1 = c.z + pouch.housing_height() / 2.0;
    let (zb, zt) = (pouch.cavity_bottom(), pouch.cavity_top());
    let (rc, ro) = (pouch.cavity_radius(), pouch.opening_radius());

    let dirs: Vec<Vec3> = (0..segments)
        .map(|i| {
            let t = TAU * i as f64 / segments as f64;
            Vec3::new(t.cos(), t.sin(), 0.0)
        })
        .collect();
    // Ray from the axis hits the square where the larger component reaches `half`.
    let square: Vec<Vec3> = dirs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            if i % (segments / 8) == 0 && (i / (segments / 8)) % 2 == 1 {
                let s = |v: f64| if v > 0.0 { half } else { -half };
                Vec3::new(s(d.x), s(d.y), 0.0)
            } else {
                d * (half / d.x.abs().max(d.y.abs()))
            }
        })
        .collect();

    let mut b = MeshBuilder::default();
    let ring = |pts: &[Vec3], r: f64, z: f64, b: &mut MeshBuilder| -> Vec<u32> {
        pts.iter()
            .map(|p| b.vertex(Vec3::new(c.x + p.x * r, c.y + p.y * r, z)))
            .collect()
    };
    let sq0 = ring(&square, 1.0, z0, &mut b);
    let sq1 = ring(&square, 1.0, z1, &mut b);
    let o0 = ring(&dirs, ro, z0, &mut b);
    let o1 = ring(&dirs, ro, z1, &mut b);
    let ob = ring(&dirs, ro, zb, &mut b);
    let ot = ring(&dirs, ro, zt, &mut b);
    let cb = ring(&dirs, rc, zb, &mut b);
    let ct = ring(&dirs, rc, zt, &mut b);

    let n = segments;
    let up = Vec3::z();
    for i in 0..n {
        let j = (i + 1) % n;
        let mid = (dirs[i] + dirs[j]) / 2.0;
        // Outer walls follow the square's side normal.
        let side = {
            let m = (square[i] + square[j]) / 2.0;
            if m.x.abs() >= m.y.abs() {
                Vec3::new(m.x.signum(), 0.0, 0.0)
            } else {
                Vec3::new(0.0, m.y.signum(), 0.0)
            }
        };
        b.quad([sq0[i], sq0[j], sq1[j], sq1[i]], &side);
        b.quad([sq0[i], sq0[j], o0[j], o0[i]], &-up);
        b.quad([sq1[i], sq1[j], o1[j], o1[i]], &up);
        b.quad([o0[i], o0[j], ob[j], ob[i]], &-mid);
        b.quad([cb[i], cb[j], ct[j], ct[i]], &-mid);
        b.quad([ot[i], ot[j], o1[j], o1[i]], &-mid);
        if pouch.lip > 0.0 {
            b.quad([ob[i], ob[j], cb[j], cb[i]], &up);
            b.quad([ot[i], ot[j], ct[j], ct[i]], &-up);
        }
    }
    Shell::new(b.finish())
}

/// Adds a housing per pouch and removes beams whose bounds reach into any
/// housing. Pouches already present on `lattice` are kept and checked.
///
/// Pouches are stored and emitted in (z, y, x) order of their centers, so
/// the result does not depend on the order of `pouches`.
pub fn place_pouches(lattice: &LatticeModel, pouches: &[PouchSpec]) -> Result<LatticeModel, FabricationError> {
    place_pouches_with(lattice, pouches, DEFAULT_SEGMENTS)
}

pub(crate) fn place_pouches_with(
    lattice: &LatticeModel,
    pouches: &[PouchSpec],
    segments: usize,
) -> Result<LatticeModel, FabricationError> {
    if pouches.is_empty() {
        return Ok(lattice.clone());
    }
    let body = lattice.body();
    let offset = lattice.pouches.len();
    for (i, p) in pouches.iter().enumerate() {
        let index = offset + i;
        p.validate(index, lattice.min_beam())?;
        if p.cavity_height() > lattice.cell_size {
            return Err(FabricationError::PouchTooTallForLayer {
                index,
                cavity_height: p.cavity_height(),
                layer_height: lattice.cell_size,
            });
        }
        let hb = p.housing_bbox();
        let inside = hb
            .corners()
            .iter()
            .all(|q| lattice.bbox.contains(q, 1e-9) && body.contains(q, 1e-9));
        if !inside {
            return Err(FabricationError::PouchOutsideBody { index });
        }
    }
    let all: Vec<PouchSpec> = lattice.pouches.iter().chain(pouches).copied().collect();
    for a in 0..all.len() {
        for b in offset.max(a + 1)..all.len() {
            let gap = all[a].housing_bbox().gap(&all[b].housing_bbox());
            let wall = all[a].wall.max(all[b].wall);
            if gap < wall {
                return Err(FabricationError::PouchOverlap { a, b, gap, wall });
            }
        }
    }

    let mut sorted = pouches.to_vec();
    sorted.sort_by(|a, b| {
        let key = |p: &PouchSpec| [p.center[2], p.center[1], p.center[0]];
        let (ka, kb) = (key(a), key(b));
        ka.iter()
            .zip(&kb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let boxes: Vec<Aabb> = sorted.iter().map(|p| p.housing_bbox()).collect();
    let shells: Vec<Shell> = sorted.par_iter().map(|p| housing_shell(p, segments)).collect();

    let mut out = lattice.clone();
    out.beams
        .retain(|beam| !boxes.iter().any(|hb| beam.solid.bbox().overlaps(hb)));
    out.parts.extend(shells.into_iter().map(|shell| Part {
        kind: PartKind::PouchHousing,
        shell,
    }));
    out.pouches.extend(sorted);
    out.refresh_occupancy();
    Ok(out)
}
