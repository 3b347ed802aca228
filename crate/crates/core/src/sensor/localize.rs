use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::model::{forward_signal, jacobian, SensorModel};
use super::{ContactState, SensorError, SignalFrame, CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Iteration limit reached; the best iterate is returned.
    NonConvergence,
    /// The solution was held on the footprint boundary.
    OutOfFootprint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub contact: ContactState,
    /// Euclidean norm of the signal residual, tesla.
    pub residual_norm: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Index of the start that produced the answer; 0 is the caller's guess.
    pub start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizeOptions {
    pub max_iterations: usize,
    /// Stop once a step moves the estimate less than this, millimetres.
    pub step_tolerance: f64,
    /// Extra starts are tried when the residual exceeds this fraction of
    /// the signal norm.
    pub restart_fraction: f64,
    /// Extra starts form an n×n grid over the footprint.
    pub grid: usize,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_tolerance: 1e-9,
            restart_fraction: 1e-6,
            grid: 3,
        }
    }
}

type V3 = Vector3<f64>;

struct Bounds {
    lo: V3,
    hi: V3,
}

impl Bounds {
    fn project(&self, p: &V3) -> V3 {
        V3::from_fn(|i, _| p[i].clamp(self.lo[i], self.hi[i]))
    }
}

fn residual(model: &SensorModel, p: &V3, signal: &SignalFrame) -> Result<[f64; CHANNELS], SensorError> {
    let f = forward_signal(&ContactState::new(p.x, p.y, p.z), model)?;
    Ok(std::array::from_fn(|k| f.values[k] - signal.values[k]))
}

fn cost(r: &[f64; CHANNELS]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

struct Run {
    p: V3,
    cost: f64,
    iterations: usize,
    converged: bool,
}

/// Box-constrained Levenberg-Marquardt with Marquardt diagonal scaling.
fn levenberg_marquardt(
    model: &SensorModel,
    signal: &SignalFrame,
    start: V3,
    bounds: &Bounds,
    opts: &LocalizeOptions,
) -> Result<Run, SensorError> {
    let mut p = bounds.project(&start);
    let mut r = residual(model, &p, signal)?;
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    for it in 0..opts.max_iterations {
        if c == 0.0 {
            return Ok(Run { p, cost: c, iterations: it, converged: true });
        }
        let j = jacobian(&ContactState::new(p.x, p.y, p.z), model)?;
        let a: Matrix3<f64> = j.transpose() * j;
        let g: V3 = j.transpose() * nalgebra::SVector::<f64, CHANNELS>::from_column_slice(&r);
        let floor = 1e-12 * a.diagonal().max().max(f64::MIN_POSITIVE);
        let d = a.diagonal().map(|v| v.max(floor));
        loop {
            let mut m = a;
            for i in 0..3 {
                m[(i, i)] += lambda * d[i];
            }
            let step = match m.cholesky() {
                Some(ch) => ch.solve(&(-g)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e30 {
                        return Ok(Run { p, cost: c, iterations: it + 1, converged: true });
                    }
                    continue;
                }
            };
            let q = bounds.project(&(p + step));
            let moved = (q - p).norm();
            let rq = residual(model, &q, signal)?;
            let cq = cost(&rq);
            if cq < c {
                p = q;
                r = rq;
                c = cq;
                lambda = (lambda / 3.0).max(1e-15);
                if moved < opts.step_tolerance {
                    return Ok(Run { p, cost: c, iterations: it + 1, converged: true });
                }
                break;
            }
            lambda *= 4.0;
            if moved < opts.step_tolerance || lambda > 1e30 {
                return Ok(Run { p, cost: c, iterations: it + 1, converged: true });
            }
        }
    }
    Ok(Run {
        p,
        cost: c,
        iterations: opts.max_iterations,
        converged: false,
    })
}

/// Contact whose predicted signal best matches `signal` in least squares.
///
/// Starts from `guess` (the footprint center at mid depth when `None`);
/// when the fit is poor, further starts on a grid over the footprint are
/// tried and the lowest residual wins.
pub fn localize_contact(
    signal: &SignalFrame,
    model: &SensorModel,
    guess: Option<ContactState>,
    opts: &LocalizeOptions,
) -> Result<Localization, SensorError> {
    model.validate()?;
    if signal.values.iter().any(|v| !v.is_finite()) {
        return Err(SensorError::InvalidParameter("signal contains non-finite values".into()));
    }
    let h = model.footprint_half;
    let bounds = Bounds {
        lo: V3::new(-h, -h, 0.0),
        hi: V3::new(h, h, model.max_indentation),
    };
    let g = guess.unwrap_or(ContactState::new(0.0, 0.0, model.max_indentation / 2.0));
    let mut starts = vec![V3::new(g.x, g.y, g.z)];
    let n = opts.grid.max(1);
    for i in 0..n {
        for j in 0..n {
            let at = |k: usize| if n == 1 { 0.0 } else { -h / 2.0 + h * k as f64 / (n - 1) as f64 };
            starts.push(V3::new(at(i), at(j), model.max_indentation / 2.0));
        }
    }
    let target = opts.restart_fraction * signal.norm();
    let mut best: Option<(usize, Run)> = None;
    let mut total_iterations = 0;
    for (k, s) in starts.iter().enumerate() {
        let run = levenberg_marquardt(model, signal, *s, &bounds, opts)?;
        total_iterations += run.iterations;
        if best.as_ref().map_or(true, |(_, b)| run.cost < b.cost) {
            best = Some((k, run));
        }
        if best.as_ref().unwrap().1.cost.sqrt() <= target {
            break;
        }
    }
    let (start, run) = best.expect("at least one start");
    let on_edge = (run.p.x.abs() - h).abs() < 1e-12 || (run.p.y.abs() - h).abs() < 1e-12;
    let status = if !run.converged {
        SolveStatus::NonConvergence
    } else if on_edge {
        SolveStatus::OutOfFootprint
    } else {
        SolveStatus::Converged
    };
    Ok(Localization {
        contact: ContactState::new(run.p.x, run.p.y, run.p.z),
        residual_norm: run.cost.sqrt(),
        iterations: total_iterations,
        status,
        start,
    })
}
