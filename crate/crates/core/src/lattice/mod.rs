//! Convex hull, beam-frame microstructure tiling and hull trimming.
//!
//! The lattice is emitted as a soup of individually closed convex beam
//! solids. Trimming clips each beam against the hull's half-spaces, which
//! keeps every surviving beam convex and closed.

mod cell;
mod grid;
mod hull;
mod solid;

use thiserror::Error;

pub use cell::{generate_cell, modulus_to_beam, CellSpec, LayerGrading, DEFAULT_MIN_BEAM};
pub use grid::{tile_lattice, trim_to_hull, Beam, Cell, LatticeModel, Part, PartKind, SLIVER_VOLUME};
pub use hull::{convex_hull, convex_hull_of_mesh, ConvexPolytope};
pub use solid::{Clipped, ConvexSolid, CLIP_EPS};

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("degenerate hull input: {0}")]
    DegenerateInput(String),
    #[error("invalid cell parameters: {0}")]
    InvalidCellSpec(String),
    #[error(
        "modulus ratio {modulus_ratio} at cell size {cell_size} mm needs beam width {beam_width:.4} mm, \
         which is not below half the cell"
    )]
    OutOfRange {
        modulus_ratio: f64,
        cell_size: f64,
        beam_width: f64,
    },
    #[error("bounding box {axis} extent {extent} mm is smaller than cell size {cell_size} mm")]
    BoxTooSmall {
        axis: String,
        extent: f64,
        cell_size: f64,
    },
    #[error("hull and lattice do not intersect")]
    EmptyResult,
}
