use thiserror::Error;

use crate::fabrication::FabricationError;
use crate::lattice::LatticeError;
use crate::magnetics::MagneticsError;
use crate::mesh::MeshError;
use crate::sensor::SensorError;

/// Coarse error category, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage = 1,
    Io = 2,
    Geometry = 3,
    Fabrication = 4,
    Simulation = 5,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Fabrication(#[from] FabricationError),
    #[error(transparent)]
    Magnetics(#[from] MagneticsError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Mesh(_) | Error::Io { .. } => ErrorClass::Io,
            Error::Lattice(_) => ErrorClass::Geometry,
            Error::Fabrication(_) => ErrorClass::Fabrication,
            Error::Magnetics(_) | Error::Sensor(_) => ErrorClass::Simulation,
            Error::Config(_) => ErrorClass::Usage,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
