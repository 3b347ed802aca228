use nalgebra::{Matrix3, SMatrix};
use serde::{Deserialize, Serialize};

use super::{ContactState, SensorError, SignalFrame, CHANNELS, MAGNETOMETERS};
use crate::fabrication::MagnetSpec;
use crate::geom::Vec3;
use crate::magnetics::{Dipole, MagnetSource};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

const MM: f64 = 1e-3;

/// Magnetometer positions on the board plane, millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetometerLayout {
    pub positions: [[f64; 2]; MAGNETOMETERS],
    pub board_z: f64,
}

impl Default for MagnetometerLayout {
    fn default() -> Self {
        Self {
            positions: [[0.0, 0.0], [7.0, 7.0], [-7.0, 7.0], [-7.0, -7.0], [7.0, -7.0]],
            board_z: 1.0,
        }
    }
}

impl MagnetometerLayout {
    pub fn sensor_point(&self, k: usize) -> Vec3 {
        Vec3::new(self.positions[k][0], self.positions[k][1], self.board_z) * MM
    }
}

/// Calibrated sensor: rest magnets, magnetometers and contact kinematics.
///
/// Magnet centers are in metres with x and y relative to the sensor
/// center. Each magnet moves straight down by
/// `z · exp(-d² / (2ℓ²))`, `d` its planar distance to the contact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub schema_version: u32,
    pub magnets: Vec<MagnetSource>,
    pub layout: MagnetometerLayout,
    /// Gaussian influence length ℓ, millimetres.
    pub influence_length: f64,
    /// Largest indentation, millimetres.
    pub max_indentation: f64,
    /// Contacts must satisfy |x|, |y| ≤ this, millimetres.
    pub footprint_half: f64,
}

impl Default for SensorModel {
    /// Four 9.525×3.175 mm magnets at (±10, ±10) mm, 11 mm above the board.
    fn default() -> Self {
        let spec = MagnetSpec::new(9.525, 3.175);
        let magnets = [[-10.0, -10.0], [10.0, -10.0], [-10.0, 10.0], [10.0, 10.0]]
            .iter()
            .map(|c| MagnetSource::new(spec, Vec3::new(c[0], c[1], 12.0) * MM))
            .collect();
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            magnets,
            layout: MagnetometerLayout::default(),
            influence_length: 8.0,
            max_indentation: 4.2,
            footprint_half: 20.0,
        }
    }
}

impl SensorModel {
    pub fn with_polarities(mut self, polarities: &[i8]) -> Self {
        for (m, p) in self.magnets.iter_mut().zip(polarities) {
            m.spec.polarity = *p;
        }
        self
    }

    pub fn from_json(text: &str) -> Result<Self, SensorError> {
        let m: SensorModel = serde_json::from_str(text).map_err(|e| SensorError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        if m.schema_version != MODEL_SCHEMA_VERSION {
            return Err(SensorError::InvalidModel(format!(
                "unsupported schema_version {}, expected {MODEL_SCHEMA_VERSION}",
                m.schema_version
            )));
        }
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        let bad = |m: String| Err(SensorError::InvalidModel(m));
        if !(self.influence_length > 0.0 && self.influence_length.is_finite()) {
            return bad(format!("influence length {} must be positive", self.influence_length));
        }
        if !(self.max_indentation > 0.0 && self.footprint_half > 0.0) {
            return bad("max indentation and footprint must be positive".into());
        }
        for (i, m) in self.magnets.iter().enumerate() {
            m.validate()?;
            if m.z_range().0 <= self.layout.board_z * MM {
                return Err(SensorError::MagnetBelowBoard { index: i });
            }
        }
        let p = &self.layout.positions;
        for a in 0..MAGNETOMETERS {
            for b in a + 1..MAGNETOMETERS {
                if p[a] == p[b] {
                    return bad(format!("magnetometers {a} and {b} coincide"));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_contact(&self, c: &ContactState) -> Result<(), SensorError> {
        let tol = 1e-9;
        if !(c.x.is_finite() && c.y.is_finite() && c.z.is_finite()) {
            return Err(SensorError::InvalidContact("coordinates must be finite".into()));
        }
        if c.z < -tol || c.z > self.max_indentation + tol {
            return Err(SensorError::InvalidContact(format!(
                "depth {} mm outside [0, {}]",
                c.z, self.max_indentation
            )));
        }
        if c.x.abs() > self.footprint_half + tol || c.y.abs() > self.footprint_half + tol {
            return Err(SensorError::InvalidContact(format!(
                "({}, {}) mm is outside the ±{} mm footprint",
                c.x, c.y, self.footprint_half
            )));
        }
        Ok(())
    }

    /// Downward displacement of each magnet and its derivatives by (x, y, z).
    fn displacements(&self, c: &ContactState) -> Vec<(f64, [f64; 3])> {
        let l2 = self.influence_length * self.influence_length;
        self.magnets
            .iter()
            .map(|m| {
                let (dx, dy) = (m.center.x / MM - c.x, m.center.y / MM - c.y);
                let g = (-(dx * dx + dy * dy) / (2.0 * l2)).exp();
                let w = c.z * g;
                (w, [w * dx / l2, w * dy / l2, g])
            })
            .collect()
    }

    fn displaced(&self, c: &ContactState) -> Result<Vec<(MagnetSource, [f64; 3])>, SensorError> {
        let board = self.layout.board_z * MM;
        self.displacements(c)
            .into_iter()
            .zip(&self.magnets)
            .enumerate()
            .map(|(index, ((w, dw), m))| {
                let mut moved = *m;
                moved.center.z -= w * MM;
                if moved.z_range().0 <= board {
                    return Err(SensorError::MagnetBelowBoard { index });
                }
                Ok((moved, dw))
            })
            .collect()
    }
}

fn field_at(dipoles: &[Vec<Dipole>], p: &Vec3) -> Result<Vec3, SensorError> {
    let mut b = Vec3::zeros();
    for ds in dipoles {
        b += crate::magnetics::sum_dipoles(ds, p)?;
    }
    Ok(b)
}

/// Field change at each magnetometer caused by `contact`.
pub fn forward_signal(contact: &ContactState, model: &SensorModel) -> Result<SignalFrame, SensorError> {
    model.check_contact(contact)?;
    let moved = model.displaced(contact)?;
    let rest: Vec<Vec<Dipole>> = model.magnets.iter().map(|m| m.dipoles()).collect();
    let disp: Vec<Vec<Dipole>> = moved.iter().map(|(m, _)| m.dipoles()).collect();
    let mut values = [0.0; CHANNELS];
    for k in 0..MAGNETOMETERS {
        let p = model.layout.sensor_point(k);
        let d = field_at(&disp, &p)? - field_at(&rest, &p)?;
        values[3 * k..3 * k + 3].copy_from_slice(d.as_slice());
    }
    Ok(SignalFrame::new(0.0, values))
}

/// `∂ΔB/∂(x, y, z)` in tesla per millimetre, rows in frame order.
pub fn jacobian(contact: &ContactState, model: &SensorModel) -> Result<SMatrix<f64, CHANNELS, 3>, SensorError> {
    model.check_contact(contact)?;
    let moved = model.displaced(contact)?;
    let mut j = SMatrix::<f64, CHANNELS, 3>::zeros();
    for (m, dw) in &moved {
        let dipoles = m.dipoles();
        for k in 0..MAGNETOMETERS {
            let p = model.layout.sensor_point(k);
            let mut g = Matrix3::zeros();
            for d in &dipoles {
                let r = p - d.position;
                g += crate::magnetics::gradient_unchecked(&d.moment, &r, r.norm_squared());
            }
            // Lowering the magnet by w raises the sensor's relative height by w.
            let db_dw = g.column(2) * MM;
            for c in 0..3 {
                for a in 0..3 {
                    j[(3 * k + a, c)] += db_dw[a] * dw[c];
                }
            }
        }
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetics::total_field;

    #[test]
    fn zero_depth_is_zero_signal() {
        let m = SensorModel::default();
        let f = forward_signal(&ContactState::new(3.0, -2.0, 0.0), &m).unwrap();
        assert!(f.values.iter().all(|v| *v == 0.0));
        let j = jacobian(&ContactState::new(3.0, -2.0, 0.0), &m).unwrap();
        assert!(j.column(0).iter().chain(j.column(1).iter()).all(|v| *v == 0.0));
    }

    #[test]
    fn matches_two_evaluation_oracle() {
        let m = SensorModel::default();
        let c = ContactState::new(0.0, 0.0, 2.0);
        let f = forward_signal(&c, &m).unwrap();
        let moved: Vec<MagnetSource> = m
            .magnets
            .iter()
            .map(|s| {
                let (dx, dy) = (s.center.x / 1e-3, s.center.y / 1e-3);
                let w = 2.0 * (-(dx * dx + dy * dy) / (2.0 * 64.0)).exp();
                let mut s = *s;
                s.center.z -= w * 1e-3;
                s
            })
            .collect();
        for k in 0..5 {
            let p = m.layout.sensor_point(k);
            let d = total_field(&moved, &p).unwrap() - total_field(&m.magnets, &p).unwrap();
            assert_eq!(f.sensor(k), [d.x, d.y, d.z]);
        }
    }

    #[test]
    fn narrow_influence_moves_one_magnet() {
        let mut m = SensorModel::default();
        m.influence_length = 0.05;
        let c = ContactState::new(10.0, 10.0, 1.5);
        let f = forward_signal(&c, &m).unwrap();
        let one = SensorModel {
            magnets: vec![m.magnets[3]],
            ..m.clone()
        };
        let g = forward_signal(&c, &one).unwrap();
        for (a, b) in f.values.iter().zip(&g.values) {
            assert!((a - b).abs() <= 1e-15 * f.norm());
        }
    }

    #[test]
    fn rejects_invalid_states() {
        let m = SensorModel::default();
        assert!(forward_signal(&ContactState::new(0.0, 0.0, -0.1), &m).is_err());
        assert!(forward_signal(&ContactState::new(25.0, 0.0, 1.0), &m).is_err());
        let mut low = m.clone();
        low.layout.board_z = 9.0;
        assert!(matches!(
            forward_signal(&ContactState::new(10.0, 10.0, 4.0), &low),
            Err(SensorError::MagnetBelowBoard { index: 3 })
        ));
    }

    #[test]
    fn json_round_trip() {
        let m = SensorModel::default().with_polarities(&[1, -1, -1, 1]);
        let back = SensorModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(SensorModel::from_json("{}").is_err());
    }
}
