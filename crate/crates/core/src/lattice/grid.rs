use rayon::prelude::*;
use serde::Serialize;

use super::cell::{generate_cell, CellSpec, LayerGrading};
use super::hull::ConvexPolytope;
use super::solid::ConvexSolid;
use super::LatticeError;
use crate::fabrication::{PouchSpec, SlotSpec};
use crate::geom::{Aabb, Vec3};
use crate::mesh::Shell;

/// Clipped beams below this volume (mm³) are discarded as unprintable slivers.
pub const SLIVER_VOLUME: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub index: [usize; 3],
    pub spec: CellSpec,
    pub occupied: bool,
}

#[derive(Debug, Clone)]
pub struct Beam {
    pub cell: [usize; 3],
    /// Position of the beam within its cell, 0..12.
    pub edge: u8,
    pub solid: ConvexSolid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartKind {
    PouchHousing,
    SlotPlate,
}

/// A non-lattice solid added by the fabrication stages.
#[derive(Debug, Clone)]
pub struct Part {
    pub kind: PartKind,
    pub shell: Shell,
}

/// Tiled, optionally trimmed, beam lattice plus any inserted parts.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    pub bbox: Aabb,
    pub cell_size: f64,
    pub grid_dims: [usize; 3],
    /// Row-major by (z, y, x) grid index.
    pub cells: Vec<Cell>,
    /// Sorted by cell grid index, then edge.
    pub beams: Vec<Beam>,
    pub parts: Vec<Part>,
    pub pouches: Vec<PouchSpec>,
    pub slot: Option<SlotSpec>,
    /// Trimming shape, once [`trim_to_hull`] has run.
    pub hull: Option<ConvexPolytope>,
}

impl LatticeModel {
    pub fn cell_count(&self) -> usize {
        self.grid_dims.iter().product()
    }

    pub fn beam_volume(&self) -> f64 {
        self.beams.iter().map(|b| b.solid.volume()).sum()
    }

    /// Every emitted solid: beams first, then parts in insertion order.
    pub fn shells(&self) -> Vec<Shell> {
        let mut out: Vec<Shell> = self.beams.par_iter().map(|b| b.solid.to_shell()).collect();
        out.extend(self.parts.iter().map(|p| p.shell.clone()));
        out
    }

    /// Body used for containment checks: the trimming hull, else the box.
    pub fn body(&self) -> ConvexPolytope {
        self.hull.clone().unwrap_or_else(|| ConvexPolytope::from_aabb(&self.bbox))
    }

    /// Lattice minimum beam size, taken from the first cell.
    pub fn min_beam(&self) -> f64 {
        self.cells.first().map(|c| c.spec.min_beam).unwrap_or(0.0)
    }

    pub fn refresh_occupancy(&mut self) {
        for c in &mut self.cells {
            c.occupied = false;
        }
        let [nx, ny, _] = self.grid_dims;
        for b in &self.beams {
            let [i, j, k] = b.cell;
            self.cells[i + nx * (j + ny * k)].occupied = true;
        }
    }
}

/// Fills `bbox` with cells anchored at its minimum corner.
///
/// Cell counts use ceiling division; beams of cells that overhang the box
/// are clipped to it. Layer `k` (counted from the bottom) takes its modulus
/// from `grading`.
pub fn tile_lattice(
    bbox: &Aabb,
    cell_size: f64,
    grading: &LayerGrading,
    min_beam: f64,
) -> Result<LatticeModel, LatticeError> {
    let ext = bbox.extent();
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(LatticeError::InvalidCellSpec(format!("cell size {cell_size} must be positive")));
    }
    for (axis, name) in ["x", "y", "z"].iter().enumerate() {
        if ext[axis] < cell_size {
            return Err(LatticeError::BoxTooSmall {
                axis: name.to_string(),
                extent: ext[axis],
                cell_size,
            });
        }
    }
    let dims = [0, 1, 2].map(|a| (ext[a] / cell_size - 1e-9).ceil().max(1.0) as usize);
    let layer_specs: Vec<CellSpec> = (0..dims[2])
        .map(|k| CellSpec::new(grading.ratio_for_layer(k), cell_size, min_beam))
        .collect::<Result<_, _>>()?;
    let bounds = ConvexPolytope::from_aabb(bbox);
    let origin = bbox.min_v();

    let indices: Vec<[usize; 3]> = (0..dims[2])
        .flat_map(|k| (0..dims[1]).flat_map(move |j| (0..dims[0]).map(move |i| [i, j, k])))
        .collect();
    let per_cell: Vec<Vec<Beam>> = indices
        .par_iter()
        .map(|&idx| {
            let spec = &layer_specs[idx[2]];
            let o = origin + Vec3::new(idx[0] as f64, idx[1] as f64, idx[2] as f64) * cell_size;
            let overhangs = (0..3).any(|a| o[a] + cell_size > bbox.max[a] + 1e-9);
            generate_cell(spec, &o)
                .into_iter()
                .enumerate()
                .filter_map(|(e, solid)| {
                    let solid = if overhangs {
                        solid.clip_all(&bounds.planes)?
                    } else {
                        solid
                    };
                    (solid.volume() > SLIVER_VOLUME).then_some(Beam {
                        cell: idx,
                        edge: e as u8,
                        solid,
                    })
                })
                .collect()
        })
        .collect();

    let cells = indices
        .iter()
        .zip(&per_cell)
        .map(|(idx, beams)| Cell {
            index: *idx,
            spec: layer_specs[idx[2]],
            occupied: !beams.is_empty(),
        })
        .collect();
    Ok(LatticeModel {
        bbox: *bbox,
        cell_size,
        grid_dims: dims,
        cells,
        beams: per_cell.into_iter().flatten().collect(),
        parts: Vec::new(),
        pouches: Vec::new(),
        slot: None,
        hull: None,
    })
}

/// Clips every beam to the hull; beams entirely outside are dropped.
pub fn trim_to_hull(lattice: &LatticeModel, hull: &ConvexPolytope) -> Result<LatticeModel, LatticeError> {
    let beams: Vec<Beam> = lattice
        .beams
        .par_iter()
        .filter_map(|b| {
            let solid = b.solid.clip_all(&hull.planes)?;
            (solid.volume() > SLIVER_VOLUME).then(|| Beam {
                cell: b.cell,
                edge: b.edge,
                solid,
            })
        })
        .collect();
    if beams.is_empty() && !lattice.beams.is_empty() {
        return Err(LatticeError::EmptyResult);
    }
    let mut out = LatticeModel {
        beams,
        hull: Some(hull.clone()),
        ..lattice.clone()
    };
    out.refresh_occupancy();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::HalfSpace;

    fn bx(x: f64, y: f64, z: f64) -> Aabb {
        Aabb::new(Vec3::zeros(), Vec3::new(x, y, z))
    }

    #[test]
    fn reference_cuboid_grid() {
        let g = LayerGrading::new(vec![0.001, 0.0015, 0.002]).unwrap();
        let l = tile_lattice(&bx(40.0, 40.0, 24.0), 8.0, &g, 0.4).unwrap();
        assert_eq!(l.grid_dims, [5, 5, 3]);
        assert_eq!(l.cell_count(), 75);
        assert_eq!(l.beams.len(), 75 * 12);
        assert!(l.cells[0].spec.beam_width < l.cells[74].spec.beam_width);
    }

    #[test]
    fn single_cell_and_ceiling_division() {
        let g = LayerGrading::uniform(0.01).unwrap();
        assert_eq!(tile_lattice(&bx(8.0, 8.0, 8.0), 8.0, &g, 0.4).unwrap().cell_count(), 1);
        let l = tile_lattice(&bx(41.0, 40.0, 24.0), 8.0, &g, 0.4).unwrap();
        assert_eq!(l.grid_dims, [6, 5, 3]);
        let inflated = l.bbox.inflate(1e-6);
        for b in &l.beams {
            assert!(b.solid.vertices.iter().all(|v| inflated.contains(v, 0.0)));
            assert!(b.solid.to_shell().closed);
        }
    }

    #[test]
    fn box_too_small() {
        let g = LayerGrading::uniform(0.01).unwrap();
        let err = tile_lattice(&bx(40.0, 40.0, 6.0), 8.0, &g, 0.4).unwrap_err();
        assert!(matches!(err, LatticeError::BoxTooSmall { ref axis, .. } if axis == "z"));
    }

    #[test]
    fn identity_trim() {
        let g = LayerGrading::uniform(0.002).unwrap();
        let b = bx(24.0, 16.0, 16.0);
        let l = tile_lattice(&b, 8.0, &g, 0.4).unwrap();
        let t = trim_to_hull(&l, &ConvexPolytope::from_aabb(&b)).unwrap();
        assert_eq!(t.beams.len(), l.beams.len());
        assert!((t.beam_volume() - l.beam_volume()).abs() <= 1e-9 * l.beam_volume());
        for (a, b) in t.beams.iter().zip(&l.beams) {
            assert_eq!(a.solid, b.solid);
        }
    }

    #[test]
    fn disjoint_hull_is_empty_result() {
        let g = LayerGrading::uniform(0.002).unwrap();
        let l = tile_lattice(&bx(16.0, 16.0, 16.0), 8.0, &g, 0.4).unwrap();
        let far = ConvexPolytope::from_aabb(&Aabb::new(Vec3::new(100.0, 0.0, 0.0), Vec3::new(110.0, 10.0, 10.0)));
        assert!(matches!(trim_to_hull(&l, &far), Err(LatticeError::EmptyResult)));
    }

    #[test]
    fn trimmed_vertices_respect_planes() {
        let g = LayerGrading::uniform(0.002).unwrap();
        let l = tile_lattice(&bx(40.0, 40.0, 40.0), 8.0, &g, 0.4).unwrap();
        let mut hull = ConvexPolytope::from_aabb(&bx(40.0, 40.0, 40.0));
        hull.planes.push(HalfSpace::new(Vec3::new(1.0, 1.0, 1.0), 50.0).unwrap());
        let t = trim_to_hull(&l, &hull).unwrap();
        assert!(t.beam_volume() < l.beam_volume());
        for b in &t.beams {
            assert!(b.solid.vertices.iter().all(|v| hull.max_violation(v) <= 1e-6));
            assert!(b.solid.to_shell().closed);
        }
        assert!(t.cells.iter().any(|c| !c.occupied));
    }
}
