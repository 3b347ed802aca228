//! Shared fixtures and independent oracles for the integration suites.
#![allow(dead_code)]

use eflesh_core::geom::{Aabb, Vec3};
use eflesh_core::lattice::{convex_hull, ConvexPolytope, ConvexSolid};
use eflesh_core::mesh::{box_mesh, emit_mesh, MeshFormat};
use eflesh_core::sensor::{forward_signal, ContactState, LabeledWindow, SensorModel, SignalFrame, CHANNELS};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn reference_box() -> Aabb {
    Aabb::new(Vec3::zeros(), Vec3::new(40.0, 40.0, 24.0))
}

pub fn write_box_stl(path: &std::path::Path, bbox: &Aabb) {
    emit_mesh(&box_mesh(bbox), path, MeshFormat::StlBinary).unwrap();
}

/// Hull of `n` random points on a sphere; `2n - 4` planes for points in
/// general position.
pub fn random_polytope(rng: &mut ChaCha8Rng, center: Vec3, radius: f64, n: usize) -> ConvexPolytope {
    let pts: Vec<Vec3> = (0..n)
        .map(|_| {
            let d: [f64; 3] = UnitSphere.sample(rng);
            center + Vec3::from(d) * radius
        })
        .collect();
    convex_hull(&pts).unwrap()
}

/// Planes `(n, d)` with `n·x <= d` bounding a convex solid given as face loops.
pub fn solid_planes(s: &ConvexSolid) -> Vec<(Vec3, f64)> {
    s.faces
        .iter()
        .map(|f| {
            // Newell normal of the loop
            let mut n = Vec3::zeros();
            for k in 0..f.len() {
                let a = s.vertices[f[k] as usize];
                let b = s.vertices[f[(k + 1) % f.len()] as usize];
                n.x += (a.y - b.y) * (a.z + b.z);
                n.y += (a.z - b.z) * (a.x + b.x);
                n.z += (a.x - b.x) * (a.y + b.y);
            }
            let n = n.normalize();
            (n, n.dot(&s.vertices[f[0] as usize]))
        })
        .collect()
}

/// Volume of `{x : n_i·x <= d_i}` by vertex enumeration: every feasible
/// triple-plane intersection is a vertex, each plane's vertices form a face,
/// and the volume is the sum of face pyramids from the vertex centroid.
pub fn halfspace_volume(planes: &[(Vec3, f64)]) -> f64 {
    let tol = 1e-9;
    let mut verts: Vec<Vec3> = Vec::new();
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            for k in j + 1..planes.len() {
                let m = nalgebra::Matrix3::from_rows(&[
                    planes[i].0.transpose(),
                    planes[j].0.transpose(),
                    planes[k].0.transpose(),
                ]);
                if m.determinant().abs() < 1e-12 {
                    continue;
                }
                let Some(p) = m.lu().solve(&Vec3::new(planes[i].1, planes[j].1, planes[k].1)) else {
                    continue;
                };
                if planes.iter().all(|(n, d)| n.dot(&p) - d <= tol)
                    && !verts.iter().any(|v| (v - p).norm() < 1e-9)
                {
                    verts.push(p);
                }
            }
        }
    }
    if verts.len() < 4 {
        return 0.0;
    }
    let c = verts.iter().sum::<Vec3>() / verts.len() as f64;
    let mut vol = 0.0;
    for (n, d) in planes {
        let on: Vec<Vec3> = verts.iter().copied().filter(|v| (n.dot(v) - d).abs() <= 1e-7).collect();
        if on.len() < 3 {
            continue;
        }
        let fc = on.iter().sum::<Vec3>() / on.len() as f64;
        let u = (on[0] - fc).normalize();
        let w = n.cross(&u);
        let mut ring: Vec<(f64, Vec3)> = on.iter().map(|v| ((v - fc).dot(&w).atan2((v - fc).dot(&u)), *v)).collect();
        ring.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut area = Vec3::zeros();
        for k in 0..ring.len() {
            area += (ring[k].1 - fc).cross(&(ring[(k + 1) % ring.len()].1 - fc));
        }
        let a = 0.5 * area.dot(n).abs();
        let h = d - n.dot(&c);
        vol += a * h / 3.0;
    }
    vol
}

/// Volume of a convex solid clipped to a polytope, computed without the
/// crate's clipper.
pub fn clipped_volume(s: &ConvexSolid, hull: &ConvexPolytope) -> f64 {
    let own = solid_planes(s);
    let hp: Vec<(Vec3, f64)> = hull.planes.iter().map(|h| (h.n(), h.offset)).collect();
    // entirely inside: the solid's own volume
    if s.vertices.iter().all(|v| hp.iter().all(|(n, d)| n.dot(v) <= *d)) {
        return halfspace_volume(&own);
    }
    // entirely beyond one plane
    if hp.iter().any(|(n, d)| s.vertices.iter().all(|v| n.dot(v) >= *d)) {
        return 0.0;
    }
    let mut all = own;
    all.extend(hp);
    halfspace_volume(&all)
}

/// On-axis field of a uniformly magnetised cylinder, `z` from the top face.
pub fn cylinder_axis_oracle(br: f64, radius: f64, length: f64, z: f64) -> f64 {
    let f = |s: f64| s / (s * s + radius * radius).sqrt();
    0.5 * br * (f(z + length) - f(z))
}

/// Synthetic slip windows: quiet windows hold a random baseline with sensor
/// noise, force windows add a press that ramps in and drags sideways.
pub fn slip_dataset(rng: &mut ChaCha8Rng, per_class: usize, frames: usize) -> Vec<LabeledWindow> {
    let model = SensorModel::default();
    let noise = Normal::new(0.0, 2e-7).unwrap();
    let mut out = Vec::with_capacity(2 * per_class);
    for i in 0..2 * per_class {
        let force = i % 2 == 1;
        let base: [f64; CHANNELS] = std::array::from_fn(|_| rng.gen_range(-5e-5..5e-5));
        let (x0, y0) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let depth = rng.gen_range(0.5..3.0);
        let drag = rng.gen_range(1.0..4.0);
        let mut w = Vec::with_capacity(frames);
        for t in 0..frames {
            let s = t as f64 / (frames - 1) as f64;
            let press = if force {
                forward_signal(&ContactState::new(x0 + drag * s, y0, depth * s.min(0.5) * 2.0), &model)
                    .unwrap()
                    .values
            } else {
                [0.0; CHANNELS]
            };
            let values = std::array::from_fn(|c| base[c] + press[c] + noise.sample(rng));
            w.push(SignalFrame::new(t as f64 * 0.01, values));
        }
        out.push(LabeledWindow {
            id: format!("w{i}"),
            label: force,
            frames: w,
        });
    }
    out
}
