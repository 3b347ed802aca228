use serde::{Deserialize, Serialize};

use super::{FabricationError, PouchSpec};

pub const DEFAULT_LAYER_HEIGHT: f64 = 0.2;

/// Where the printer stops so magnets can be dropped into open pouches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintPlan {
    pub layer_height: f64,
    /// 1-based layer after which the print pauses.
    pub pause_layer_index: u32,
    pub pause_z: f64,
    pub max_cavity_top: f64,
}

/// Smallest layer count whose top is at or above `z`.
///
/// A height that is an exact layer multiple maps to that layer: the layer
/// finishing the cavity wall is printed, the next one starts the cover.
/// Quotients within 1e-9 of an integer count as exact so decimal inputs
/// like 13.8 / 0.2 are not pushed up by binary rounding.
pub fn layer_index_at_or_above(z: f64, layer_height: f64) -> u32 {
    let q = z / layer_height;
    let r = q.round();
    let n = if (q - r).abs() <= 1e-9 * r.abs().max(1.0) { r } else { q.ceil() };
    n.max(0.0) as u32
}

pub fn pause_layer(pouches: &[PouchSpec], layer_height: f64) -> Result<PrintPlan, FabricationError> {
    if !(layer_height > 0.0 && layer_height.is_finite()) {
        return Err(FabricationError::InvalidLayerHeight(layer_height));
    }
    if pouches.is_empty() {
        return Err(FabricationError::NoPouches);
    }
    let tops: Vec<f64> = pouches.iter().map(|p| p.cavity_top()).collect();
    let hi = tops.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tops.iter().copied().fold(f64::INFINITY, f64::min);
    if hi - lo > layer_height {
        let mut indices: Vec<u32> = tops
            .iter()
            .map(|&t| layer_index_at_or_above(t, layer_height))
            .collect();
        indices.sort_unstable();
        indices.dedup();
        return Err(FabricationError::MultiplePauseLevels { indices });
    }
    let index = layer_index_at_or_above(hi, layer_height);
    Ok(PrintPlan {
        layer_height,
        pause_layer_index: index,
        pause_z: index as f64 * layer_height,
        max_cavity_top: hi,
    })
}
