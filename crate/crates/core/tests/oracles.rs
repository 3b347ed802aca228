//! Crate results checked against independently computed values.

mod common;

use common::*;
use eflesh_core::fabrication::{pause_layer, MagnetSpec, PouchSpec};
use eflesh_core::geom::{Aabb, Vec3};
use eflesh_core::lattice::{convex_hull, tile_lattice, trim_to_hull, LayerGrading};
use eflesh_core::magnetics::{field_map, total_field, MagnetSource, PlaneSpec, MU0};
use eflesh_core::mesh::validate_shell;
use eflesh_core::sensor::{forward_signal, jacobian, slip_features, ContactState, SensorModel};
use rand::Rng;

#[test]
fn hull_matches_brute_force_facets() {
    let mut r = rng(11);
    for _ in 0..20 {
        let n = r.gen_range(4..40);
        let pts: Vec<Vec3> = (0..n)
            .map(|_| Vec3::new(r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0)))
            .collect();
        let hull = convex_hull(&pts).unwrap();
        // brute force: a triple is a facet when all points lie on one side
        let mut facet_planes = 0usize;
        let mut on_hull = vec![false; n];
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let nrm = (pts[j] - pts[i]).cross(&(pts[k] - pts[i]));
                    if nrm.norm() < 1e-12 {
                        continue;
                    }
                    let s: Vec<f64> = pts.iter().map(|p| nrm.dot(&(p - pts[i]))).collect();
                    if s.iter().all(|v| *v <= 1e-9) || s.iter().all(|v| *v >= -1e-9) {
                        facet_planes += 1;
                        on_hull[i] = true;
                        on_hull[j] = true;
                        on_hull[k] = true;
                    }
                }
            }
        }
        assert!(facet_planes >= 4);
        for (p, on) in pts.iter().zip(&on_hull) {
            assert!(hull.contains(p, 1e-9));
            let is_vertex = hull.vertices.iter().any(|v| (v - p).norm() < 1e-12);
            assert_eq!(is_vertex, *on, "{p:?}");
        }
        let report = validate_shell(&hull.to_mesh());
        assert!(report.closed && report.euler_characteristic == 2);
    }
}

#[test]
fn trim_matches_vertex_enumeration() {
    let mut r = rng(5);
    let bbox = Aabb::new(Vec3::zeros(), Vec3::new(24.0, 24.0, 16.0));
    let lattice = tile_lattice(&bbox, 8.0, &LayerGrading::uniform(0.002).unwrap(), 0.4).unwrap();
    for _ in 0..4 {
        let (radius, n) = (r.gen_range(8.0..14.0), r.gen_range(4..12));
        let hull = random_polytope(&mut r, bbox.center(), radius, n);
        let trimmed = trim_to_hull(&lattice, &hull).unwrap();
        let got: f64 = trimmed.beams.iter().map(|b| b.solid.volume()).sum();
        let want: f64 = lattice.beams.iter().map(|b| clipped_volume(&b.solid, &hull)).sum();
        assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    }
}

#[test]
fn halfspace_oracle_on_a_box() {
    let planes = [
        (Vec3::x(), 2.0),
        (-Vec3::x(), 0.0),
        (Vec3::y(), 3.0),
        (-Vec3::y(), 0.0),
        (Vec3::z(), 4.0),
        (-Vec3::z(), 0.0),
    ];
    assert!((halfspace_volume(&planes) - 24.0).abs() < 1e-12);
}

#[test]
fn magnet_axis_matches_closed_form() {
    let m = MagnetSource::new(MagnetSpec::new(9.525, 3.175), Vec3::zeros()).with_slices(32);
    let (radius, len) = (9.525e-3 / 2.0, 3.175e-3);
    for d in [5.0, 7.5, 10.0, 20.0, 35.0, 50.0] {
        let z = d * 1e-3;
        let b = total_field(std::slice::from_ref(&m), &Vec3::new(0.0, 0.0, len / 2.0 + z)).unwrap();
        let want = cylinder_axis_oracle(1.45, radius, len, z);
        assert!((b.z / want - 1.0).abs() < 0.02, "{d} mm: {} vs {want}", b.z);
    }
}

/// Plain point-dipole sum, written out from the textbook formula.
fn dipole_sum(sources: &[(Vec3, Vec3)], p: &Vec3) -> Vec3 {
    sources.iter().fold(Vec3::zeros(), |acc, (pos, m)| {
        let r = p - pos;
        let d = r.norm();
        acc + MU0 / (4.0 * std::f64::consts::PI) * (3.0 * r * m.dot(&r) / d.powi(5) - m / d.powi(3))
    })
}

#[test]
fn field_map_matches_independent_summation() {
    let spec = MagnetSpec::new(9.525, 3.175);
    let centers = [[-10.0, -10.0], [10.0, -10.0], [-10.0, 10.0], [10.0, 10.0]];
    let signs = [1i8, -1, -1, 1];
    let sources: Vec<MagnetSource> = centers
        .iter()
        .zip(signs)
        .map(|(c, s)| {
            MagnetSource::new(spec, Vec3::new(c[0], c[1], 0.0) * 1e-3)
                .with_polarity(s)
                .with_quadrature(eflesh_core::magnetics::DiscQuadrature::AXIAL)
                .with_slices(1)
        })
        .collect();
    let plane = PlaneSpec {
        z: 0.03,
        center: [0.0, 0.0],
        extent: [0.04, 0.04],
        resolution: [9, 7],
    };
    let map = field_map(&sources, &plane).unwrap();
    let moment = 1.45 * std::f64::consts::PI * (9.525e-3f64 / 2.0).powi(2) * 3.175e-3 / MU0;
    let dipoles: Vec<(Vec3, Vec3)> = centers
        .iter()
        .zip(signs)
        .map(|(c, s)| (Vec3::new(c[0], c[1], 0.0) * 1e-3, Vec3::z() * moment * s as f64))
        .collect();
    for j in 0..7 {
        for i in 0..9 {
            let p = plane.point(i, j);
            let want = dipole_sum(&dipoles, &p);
            let got = Vec3::from(map.at(i, j));
            assert!((got - want).norm() <= 1e-9 * want.norm().max(1e-12), "{i},{j}");
        }
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let m = SensorModel::default();
    let mut r = rng(3);
    for _ in 0..100 {
        let c = [r.gen_range(-15.0..15.0), r.gen_range(-15.0..15.0), r.gen_range(0.3..4.0)];
        let j = jacobian(&ContactState::new(c[0], c[1], c[2]), &m).unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let (mut a, mut b) = (c, c);
            a[k] += h;
            b[k] -= h;
            let fa = forward_signal(&ContactState::new(a[0], a[1], a[2]), &m).unwrap();
            let fb = forward_signal(&ContactState::new(b[0], b[1], b[2]), &m).unwrap();
            let fd: Vec<f64> = (0..15).map(|q| (fa.values[q] - fb.values[q]) / (2.0 * h)).collect();
            let norm = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = (0..15).map(|q| (j[(q, k)] - fd[q]).powi(2)).sum::<f64>().sqrt();
            assert!(err <= 1e-5 * norm.max(1e-12), "{c:?} col {k}: {err} vs {norm}");
        }
    }
}

#[test]
fn slip_features_recomputed_by_hand() {
    let mut r = rng(8);
    for w in slip_dataset(&mut r, 3, 20) {
        let f = slip_features(&w.frames).unwrap();
        let n = w.frames.len() as f64;
        for k in 0..5 {
            let want = w
                .frames
                .iter()
                .map(|fr| (fr.values[3 * k].powi(2) + fr.values[3 * k + 1].powi(2)).sqrt())
                .sum::<f64>()
                / n;
            assert!((f.xy_norms[k] - want).abs() <= 1e-15 + 1e-12 * want);
        }
        let mut max_change: f64 = 0.0;
        let mut ss = 0.0;
        for c in 0..15 {
            let col: Vec<f64> = w.frames.iter().map(|fr| fr.values[c]).collect();
            let mean = col.iter().sum::<f64>() / n;
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            max_change = max_change.max(hi - lo);
            ss += col.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        }
        assert_eq!(f.max_change, max_change);
        assert!((f.std - (ss / n).sqrt()).abs() <= 1e-12 * f.std.max(1e-30));
    }
}

#[test]
fn pause_layer_ceil_oracle() {
    let mut r = rng(21);
    for _ in 0..300 {
        let top = r.gen_range(2.0..30.0);
        let mut p = PouchSpec::new([20.0, 20.0, 0.0], MagnetSpec::new(9.525, 3.175));
        p.center[2] = top - p.cavity_height() / 2.0;
        let actual_top = p.cavity_top();
        let plan = pause_layer(&[p], 0.2).unwrap();
        let want = (actual_top / 0.2).ceil() as u32;
        // ceil of an exact multiple can land one high through rounding
        let exact = (actual_top / 0.2).round();
        let want = if (actual_top / 0.2 - exact).abs() < 1e-9 { exact as u32 } else { want };
        assert_eq!(plan.pause_layer_index, want, "top {actual_top}");
        assert!(plan.pause_z + 1e-9 >= actual_top);
    }
}
