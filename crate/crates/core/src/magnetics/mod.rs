//! Magnetostatics of the embedded magnet array.
//!
//! Magnets are cylinders modelled as stacks of thin discs, each disc
//! sampled by a small polar quadrature of point dipoles. Positions are in
//! metres and fields in tesla inside this module; [`MagnetSource::from_pouch`]
//! converts from the millimetre geometry of the fabrication stage.

mod dipole;
mod export;
mod fieldmap;
mod polarity;
mod report;
mod source;

use thiserror::Error;

pub(crate) use dipole::gradient_unchecked;
pub use dipole::{dipole_field, dipole_field_gradient, Dipole, MU0, SINGULAR_RADIUS};
pub use export::{write_field_csv, write_field_pgm};
pub use fieldmap::{field_map, FieldMap, PlaneSpec};
pub use polarity::{assign_polarities, PolarityMode};
pub use report::{stray_field_report, Metric, StrayFieldReport, ZERO_FIELD};
pub(crate) use source::sum_dipoles;
pub use source::{cylinder_on_axis_bz, magnet_field, total_field, DiscQuadrature, MagnetSource, DEFAULT_SLICES};

#[derive(Debug, Error)]
pub enum MagneticsError {
    #[error("field evaluated {distance:.3e} m from a point dipole")]
    SingularPoint { distance: f64 },
    #[error("point ({x:.4e}, {y:.4e}, {z:.4e}) m lies inside magnet {index}")]
    PointInsideMagnet { index: usize, x: f64, y: f64, z: f64 },
    #[error("evaluation plane z = {z:.4e} m cuts through magnet {index}")]
    PlaneIntersectsMagnet { index: usize, z: f64 },
    #[error("invalid magnet source: {0}")]
    InvalidSource(String),
    #[error("invalid plane: {0}")]
    InvalidPlane(String),
    #[error("field maps do not share plane geometry")]
    MismatchedMaps,
    #[error("export failed: {0}")]
    Export(#[from] std::io::Error),
}
