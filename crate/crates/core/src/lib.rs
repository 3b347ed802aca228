//! Toolchain for turning a convex part into a printable magnetic tactile
//! sensor, plus the magnetostatic and signal models used to analyse it.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`mesh`]: triangle mesh model, shell validation, STL/OBJ I/O
//! - [`lattice`]: convex hull, convex clipping, beam-frame cells, tiling and trimming
//! - [`fabrication`]: magnet pouches, magnetometer slot, pause-layer print plan
//! - [`magnetics`]: dipole-stack magnet model, field maps, polarity patterns
//! - [`sensor`]: contact forward model, Jacobian, localisation, sensitivity, slip features
//! - [`pipeline`]: configuration and end-to-end orchestration
//!
//! Geometry is expressed in millimetres. Magnetics use SI units; the
//! conversion happens at the boundary of the [`magnetics`] module.

pub mod error;
pub mod fabrication;
pub mod geom;
pub mod lattice;
pub mod magnetics;
pub mod mesh;
pub mod pipeline;
pub mod sensor;

pub use error::{Error, ErrorClass};
pub use geom::{Aabb, Vec3};
