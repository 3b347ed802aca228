use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarityMode {
    Aligned,
    Alternating,
}

impl fmt::Display for PolarityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolarityMode::Aligned => "aligned",
            PolarityMode::Alternating => "alternating",
        })
    }
}

impl FromStr for PolarityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aligned" => Ok(PolarityMode::Aligned),
            "alternating" => Ok(PolarityMode::Alternating),
            other => Err(format!("unknown polarity mode '{other}', expected aligned or alternating")),
        }
    }
}

/// Sign per magnet.
///
/// Alternating layouts that form a full rectangular grid in x and y get a
/// checkerboard by (row + column) parity. Other layouts are colored
/// breadth-first over the nearest-neighbour graph, each magnet taking the
/// sign that disagrees with most of its already-colored neighbours.
pub fn assign_polarities(centers: &[[f64; 3]], mode: PolarityMode) -> Vec<i8> {
    if mode == PolarityMode::Aligned || centers.is_empty() {
        return vec![1; centers.len()];
    }
    let scale = centers
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let tol = 1e-9 * scale;
    let xs = distinct(centers.iter().map(|c| c[0]), tol);
    let ys = distinct(centers.iter().map(|c| c[1]), tol);
    let rank = |vals: &[f64], v: f64| vals.iter().position(|u| (u - v).abs() <= tol).unwrap();
    if xs.len() * ys.len() == centers.len() {
        let mut seen = vec![false; centers.len()];
        let cells: Vec<(usize, usize)> = centers.iter().map(|c| (rank(&xs, c[0]), rank(&ys, c[1]))).collect();
        let full = cells.iter().all(|&(i, j)| !std::mem::replace(&mut seen[j * xs.len() + i], true));
        if full {
            return cells
                .iter()
                .map(|&(i, j)| if (i + j) % 2 == 0 { 1 } else { -1 })
                .collect();
        }
    }
    max_cut_coloring(centers)
}

fn distinct(values: impl Iterator<Item = f64>, tol: f64) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    v
}

fn max_cut_coloring(centers: &[[f64; 3]]) -> Vec<i8> {
    let n = centers.len();
    let dist = |a: usize, b: usize| {
        let (p, q) = (centers[a], centers[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
    };
    let mut adj = vec![Vec::new(); n];
    for a in 0..n {
        let nearest = (0..n).filter(|&b| b != a).map(|b| dist(a, b)).fold(f64::INFINITY, f64::min);
        for b in (0..n).filter(|&b| b != a) {
            if dist(a, b) <= nearest * (1.0 + 1e-6) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut sign = vec![0i8; n];
    for start in 0..n {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if sign[b] != 0 {
                    continue;
                }
                let balance: i32 = adj[b].iter().map(|&c| sign[c] as i32).sum();
                sign[b] = match balance.cmp(&0) {
                    std::cmp::Ordering::Greater => -1,
                    std::cmp::Ordering::Less => 1,
                    std::cmp::Ordering::Equal => -sign[a],
                };
                queue.push_back(b);
            }
        }
    }
    sign
}
