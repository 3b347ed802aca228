use serde::{Deserialize, Serialize};

use super::{SensorError, SignalFrame, CHANNELS, MAGNETOMETERS};

/// Default window length in frames.
pub const DEFAULT_WINDOW: usize = 50;

pub const FEATURES: usize = MAGNETOMETERS + 2;

/// Window statistics used for slip detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipFeatures {
    /// Mean planar norm `√(Bx² + By²)` per magnetometer.
    pub xy_norms: [f64; MAGNETOMETERS],
    /// Largest peak-to-peak range of any channel.
    pub max_change: f64,
    /// Root-mean-square distance of the frames from their mean frame.
    pub std: f64,
}

impl SlipFeatures {
    pub fn to_array(&self) -> [f64; FEATURES] {
        let mut a = [0.0; FEATURES];
        a[..MAGNETOMETERS].copy_from_slice(&self.xy_norms);
        a[MAGNETOMETERS] = self.max_change;
        a[MAGNETOMETERS + 1] = self.std;
        a
    }
}

pub fn slip_features(window: &[SignalFrame]) -> Result<SlipFeatures, SensorError> {
    if window.len() < 2 {
        return Err(SensorError::WindowTooShort { len: window.len() });
    }
    let n = window.len() as f64;
    let mut xy_norms = [0.0; MAGNETOMETERS];
    for f in window {
        for (k, acc) in xy_norms.iter_mut().enumerate() {
            let [bx, by, _] = f.sensor(k);
            *acc += bx.hypot(by);
        }
    }
    xy_norms.iter_mut().for_each(|v| *v /= n);

    let mut max_change: f64 = 0.0;
    let mut mean = [0.0; CHANNELS];
    for c in 0..CHANNELS {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for f in window {
            lo = lo.min(f.values[c]);
            hi = hi.max(f.values[c]);
            mean[c] += f.values[c];
        }
        max_change = max_change.max(hi - lo);
        mean[c] /= n;
    }
    let var = window
        .iter()
        .map(|f| f.values.iter().zip(&mean).map(|(v, m)| (v - m).powi(2)).sum::<f64>())
        .sum::<f64>()
        / n;
    Ok(SlipFeatures {
        xy_norms,
        max_change,
        std: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub epochs: usize,
}

// Standardised features keep the log-loss curvature below 7/4, so a unit
// step is stable; separable sets need the long run to grow their weights.
impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            epochs: 3000,
        }
    }
}

/// Added before taking logs so empty channels stay finite; far below any
/// magnetometer's resolution.
pub const LOG_FLOOR: f64 = 1e-12;

/// Features are non-negative magnitudes spanning decades, so the model
/// sees their logarithms.
fn log_features(f: &SlipFeatures) -> [f64; FEATURES] {
    f.to_array().map(|v| (v.max(0.0) + LOG_FLOOR).ln())
}

/// Logistic regression on standardised log slip features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlipClassifier {
    /// Mean and spread of the log features over the training set.
    pub mean: [f64; FEATURES],
    pub scale: [f64; FEATURES],
    pub weights: [f64; FEATURES],
    pub bias: f64,
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl SlipClassifier {
    /// Probability that the window contains applied force.
    pub fn probability(&self, f: &SlipFeatures) -> f64 {
        let x = log_features(f);
        let t: f64 = (0..FEATURES)
            .map(|k| self.weights[k] * (x[k] - self.mean[k]) / self.scale[k])
            .sum::<f64>()
            + self.bias;
        sigmoid(t)
    }

    /// True for "force".
    pub fn classify(&self, f: &SlipFeatures) -> bool {
        self.probability(f) >= 0.5
    }

    pub fn accuracy(&self, data: &[(SlipFeatures, bool)]) -> f64 {
        let hits = data.iter().filter(|(f, y)| self.classify(f) == *y).count();
        hits as f64 / data.len().max(1) as f64
    }
}

/// Full-batch gradient descent on the mean log loss, weights from zero.
pub fn train_slip_classifier(
    data: &[(SlipFeatures, bool)],
    opts: &TrainOptions,
) -> Result<SlipClassifier, SensorError> {
    let positives = data.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == data.len() {
        return Err(SensorError::SingleClassDataset);
    }
    if data.iter().flat_map(|(f, _)| f.to_array()).any(|v| !v.is_finite()) {
        return Err(SensorError::InvalidParameter("features must be finite".into()));
    }
    let xs: Vec<[f64; FEATURES]> = data.iter().map(|(f, _)| log_features(f)).collect();
    let n = data.len() as f64;
    let mut mean = [0.0; FEATURES];
    let mut scale = [0.0; FEATURES];
    for k in 0..FEATURES {
        mean[k] = xs.iter().map(|x| x[k]).sum::<f64>() / n;
        let var = xs.iter().map(|x| (x[k] - mean[k]).powi(2)).sum::<f64>() / n;
        scale[k] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let zs: Vec<[f64; FEATURES]> = xs
        .iter()
        .map(|x| std::array::from_fn(|k| (x[k] - mean[k]) / scale[k]))
        .collect();
    let mut model = SlipClassifier {
        mean,
        scale,
        weights: [0.0; FEATURES],
        bias: 0.0,
    };
    for _ in 0..opts.epochs {
        let mut gw = [0.0; FEATURES];
        let mut gb = 0.0;
        for (z, (_, y)) in zs.iter().zip(data) {
            let t: f64 = (0..FEATURES).map(|k| model.weights[k] * z[k]).sum::<f64>() + model.bias;
            let err = sigmoid(t) - if *y { 1.0 } else { 0.0 };
            for k in 0..FEATURES {
                gw[k] += err * z[k];
            }
            gb += err;
        }
        for k in 0..FEATURES {
            model.weights[k] -= opts.learning_rate * gw[k] / n;
        }
        model.bias -= opts.learning_rate * gb / n;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(v: impl Fn(usize) -> f64) -> SignalFrame {
        SignalFrame::new(0.0, std::array::from_fn(v))
    }

    #[test]
    fn constant_window() {
        let f = frame(|c| c as f64 * 1e-5);
        let s = slip_features(&[f; 4]).unwrap();
        assert_eq!(s.max_change, 0.0);
        assert_eq!(s.std, 0.0);
        for k in 0..5 {
            let [bx, by, _] = f.sensor(k);
            assert!((s.xy_norms[k] - bx.hypot(by)).abs() < 1e-18);
        }
    }

    #[test]
    fn step_height() {
        let mut w = vec![SignalFrame::zero(); 5];
        w[2].values[7] = 3e-5;
        assert_eq!(slip_features(&w).unwrap().max_change, 3e-5);
    }

    #[test]
    fn short_window() {
        assert!(matches!(
            slip_features(&[SignalFrame::zero()]),
            Err(SensorError::WindowTooShort { len: 1 })
        ));
    }

    #[test]
    fn separable_training() {
        let mut data = Vec::new();
        for i in 0..40 {
            let e = (i % 7) as f64 * 1e-3;
            let quiet = SlipFeatures {
                xy_norms: [e; 5],
                max_change: e,
                std: e,
            };
            let force = SlipFeatures {
                xy_norms: [1.0 + e; 5],
                max_change: 1.0 + e,
                std: 0.5 + e,
            };
            data.push((quiet, false));
            data.push((force, true));
        }
        let c = train_slip_classifier(&data, &TrainOptions::default()).unwrap();
        assert_eq!(c.accuracy(&data), 1.0);
        let zero = SlipFeatures {
            xy_norms: [0.0; 5],
            max_change: 0.0,
            std: 0.0,
        };
        assert!(!c.classify(&zero));
        let only: Vec<_> = data.iter().filter(|d| d.1).cloned().collect();
        assert!(matches!(
            train_slip_classifier(&only, &TrainOptions::default()),
            Err(SensorError::SingleClassDataset)
        ));
    }
}
