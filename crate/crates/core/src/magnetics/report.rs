use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use super::fieldmap::{FieldMap, PlaneSpec};
use super::MagneticsError;

/// Alternating metrics below this (tesla) make the ratio infinite.
pub const ZERO_FIELD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Max,
    Mean,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Metric::Max),
            "mean" => Ok(Metric::Mean),
            other => Err(format!("unknown metric '{other}', expected max or mean")),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Max => "max",
            Metric::Mean => "mean",
        })
    }
}

/// Aligned-versus-alternating comparison of `|B_z|` on a common plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrayFieldReport {
    pub metric: Metric,
    pub plane: PlaneSpec,
    pub aligned_max: f64,
    pub aligned_mean: f64,
    pub alternating_max: f64,
    pub alternating_mean: f64,
    /// Aligned over alternating for the chosen metric.
    #[serde(serialize_with = "number_or_inf")]
    pub ratio: f64,
    /// Set when the alternating metric is below [`ZERO_FIELD`].
    pub zero_denominator: bool,
    /// Per-sample `|B_z|` ratio in map order; 1 where both maps vanish.
    #[serde(serialize_with = "numbers_or_inf")]
    pub per_point_ratio: Vec<f64>,
}

fn number_or_inf<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

fn numbers_or_inf<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element("inf")?;
        }
    }
    seq.end()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den < ZERO_FIELD {
        if num < ZERO_FIELD {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

pub fn stray_field_report(
    aligned: &FieldMap,
    alternating: &FieldMap,
    metric: Metric,
) -> Result<StrayFieldReport, MagneticsError> {
    if aligned.plane != alternating.plane || aligned.values.len() != alternating.values.len() {
        return Err(MagneticsError::MismatchedMaps);
    }
    let (am, aa) = (aligned.max_abs_bz(), aligned.mean_abs_bz());
    let (bm, ba) = (alternating.max_abs_bz(), alternating.mean_abs_bz());
    let (num, den) = match metric {
        Metric::Max => (am, bm),
        Metric::Mean => (aa, ba),
    };
    let per_point_ratio = aligned
        .bz()
        .zip(alternating.bz())
        .map(|(a, b)| ratio(a.abs(), b.abs()))
        .collect();
    Ok(StrayFieldReport {
        metric,
        plane: aligned.plane,
        aligned_max: am,
        aligned_mean: aa,
        alternating_max: bm,
        alternating_mean: ba,
        ratio: ratio(num, den),
        zero_denominator: den < ZERO_FIELD,
        per_point_ratio,
    })
}
