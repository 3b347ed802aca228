use serde::Serialize;

use super::model::{forward_signal, SensorModel};
use super::{ContactState, SensorError};

/// Detection threshold in noise standard deviations.
pub const SIGMA_MULTIPLE: f64 = 6.0;

const DEPTH_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sensitivity {
    /// Minimum detectable force, newtons.
    pub force: f64,
    /// Indentation at which the signal norm reaches the threshold, mm.
    pub depth: f64,
    /// Signal-norm threshold, tesla.
    pub threshold: f64,
}

fn signal_norm(model: &SensorModel, z: f64) -> Result<f64, SensorError> {
    Ok(forward_signal(&ContactState::new(0.0, 0.0, z), model)?.norm())
}

/// Smallest central indentation whose signal norm reaches `6σ`, converted
/// to force with a linear `stiffness` (N/mm). The depth is bracketed by
/// bisection to 1e-4 mm and the upper end of the bracket is reported.
pub fn sensitivity(model: &SensorModel, sigma_noise: f64, stiffness: f64) -> Result<Sensitivity, SensorError> {
    if !(sigma_noise >= 0.0 && sigma_noise.is_finite()) {
        return Err(SensorError::InvalidParameter(format!("noise σ {sigma_noise} must be non-negative")));
    }
    if !(stiffness > 0.0 && stiffness.is_finite()) {
        return Err(SensorError::InvalidParameter(format!("stiffness {stiffness} N/mm must be positive")));
    }
    model.validate()?;
    let threshold = SIGMA_MULTIPLE * sigma_noise;
    if threshold == 0.0 {
        return Ok(Sensitivity { force: 0.0, depth: 0.0, threshold });
    }
    let (mut lo, mut hi) = (0.0, model.max_indentation);
    let available = signal_norm(model, hi)?;
    if available < threshold {
        return Err(SensorError::Undetectable { threshold, available });
    }
    while hi - lo > DEPTH_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if signal_norm(model, mid)? >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Sensitivity {
        force: stiffness * hi,
        depth: hi,
        threshold,
    })
}
