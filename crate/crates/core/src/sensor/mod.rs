//! Contact forward model, inverse localisation, the 6σ sensitivity rule and
//! slip-detection features.
//!
//! Contacts are given in millimetres relative to the sensor center, with
//! `z` the indentation depth. Signals are 15-value frames in tesla: five
//! magnetometers, x/y/z each, magnetometer-major.

mod io;
mod localize;
mod model;
mod sensitivity;
mod slip;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::magnetics::MagneticsError;

pub use io::{read_signal_csv, read_windows_csv, write_signal_csv, write_windows_csv, LabeledWindow, SIGNAL_HEADER};
pub use localize::{localize_contact, Localization, LocalizeOptions, SolveStatus};
pub use model::{forward_signal, jacobian, MagnetometerLayout, SensorModel, MODEL_SCHEMA_VERSION};
pub use sensitivity::{sensitivity, Sensitivity, SIGMA_MULTIPLE};
pub use slip::{slip_features, train_slip_classifier, SlipClassifier, SlipFeatures, TrainOptions, DEFAULT_WINDOW};

pub const CHANNELS: usize = 15;
pub const MAGNETOMETERS: usize = 5;

#[derive(Debug, Error)]
pub enum SensorError {
    #[error("magnet {index} would be pushed to or below the board plane")]
    MagnetBelowBoard { index: usize },
    #[error("invalid contact: {0}")]
    InvalidContact(String),
    #[error("invalid sensor model: {0}")]
    InvalidModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("6σ threshold {threshold:.3e} T exceeds the signal {available:.3e} T at full indentation")]
    Undetectable { threshold: f64, available: f64 },
    #[error("slip window has {len} frames, need at least 2")]
    WindowTooShort { len: usize },
    #[error("training data contains only one class")]
    SingleClassDataset,
    #[error("signal data, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Magnetics(#[from] MagneticsError),
}

/// One magnetometer reading, tesla.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalFrame {
    pub timestamp: f64,
    pub values: [f64; CHANNELS],
}

impl SignalFrame {
    pub fn new(timestamp: f64, values: [f64; CHANNELS]) -> Self {
        Self { timestamp, values }
    }

    pub fn zero() -> Self {
        Self::new(0.0, [0.0; CHANNELS])
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Field vector of magnetometer `k`.
    pub fn sensor(&self, k: usize) -> [f64; 3] {
        [self.values[3 * k], self.values[3 * k + 1], self.values[3 * k + 2]]
    }
}

/// Surface contact: planar position and indentation depth, millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ContactState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}
