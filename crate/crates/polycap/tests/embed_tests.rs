//! Development into coordinates, isometry verification and OBJ export.

mod common;

use common::*;
use polycap::{develop, maximize, obj_string, verify_isometry, SolveOptions};

#[test]
fn develops_square_pyramid() {
    let disk = square_pyramid();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    assert_eq!(emb.vertices.len(), 5);
    assert!(emb.extra.is_empty());
    assert_eq!(emb.upper_faces.len(), 4);
    assert!(emb.wall_faces.is_empty());
    assert_eq!(emb.base_face.len(), 4);
    // Apex at height 1 over the centroid of a 2×2 square, up to planar motion.
    let apex = emb.vertices[0];
    assert!((apex[2] - 1.0).abs() < 1e-7);
    let cx = (1..5).map(|v| emb.vertices[v][0]).sum::<f64>() / 4.0;
    let cy = (1..5).map(|v| emb.vertices[v][1]).sum::<f64>() / 4.0;
    assert!((apex[0] - cx).abs() < 1e-7 && (apex[1] - cy).abs() < 1e-7);
    for v in 1..5 {
        assert!(emb.vertices[v][2].abs() < 1e-12);
        let dx = emb.vertices[v][0] - cx;
        let dy = emb.vertices[v][1] - cy;
        assert!((dx * dx + dy * dy - 2.0).abs() < 1e-7);
    }
    let report = verify_isometry(&emb, &result.cap, &disk);
    assert!(report.max_edge_rel_err < 1e-7);
    assert!(report.max_cone_angle_err < 1e-7);
    assert!(report.max_link_err < 1e-7);
}

#[test]
fn develops_two_triangle_to_corner_tetrahedron() {
    // The solved cap must be congruent to the lower hull of
    // (1,0,0), (0,1,0), (0,0,1).
    let disk = two_triangle();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    assert_eq!(emb.vertices.len(), 3);
    assert_eq!(emb.extra.len(), 1, "the ridge projection is a base corner");
    assert_eq!(emb.upper_faces.len(), 1);
    assert_eq!(emb.wall_faces.len(), 2, "the wall folds over the base corner");

    // Expected: i at the origin lifted to 1, j and k on the axes.
    let expect = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let a: Vec<[f64; 2]> = emb.vertices.iter().map(|p| [p[0], p[1]]).collect();
    let b: Vec<[f64; 2]> = expect.iter().map(|p| [p[0], p[1]]).collect();
    assert!(align_2d(&a, &b) < 1e-6);
    for (p, q) in emb.vertices.iter().zip(expect.iter()) {
        assert!((p[2] - q[2]).abs() < 1e-6);
    }
    // The extra base corner is the projection of the interior vertex.
    let o = emb.extra[0];
    assert!((o[0] - emb.vertices[0][0]).abs() < 1e-9);
    assert!((o[1] - emb.vertices[0][1]).abs() < 1e-9);
    assert!(o[2] == 0.0);

    let report = verify_isometry(&emb, &result.cap, &disk);
    assert!(report.max_edge_rel_err < 1e-6, "edge err {}", report.max_edge_rel_err);
}

#[test]
fn develops_exact_wall_state() {
    // A cap constructed at the exact wall heights (not solved) develops to
    // the same tetrahedron corner.
    let disk = two_triangle();
    let cap = polycap::feasibility(&disk, &[1.0, 0.0, 0.0], None).unwrap();
    let classification = polycap::classify(&cap, 1e-8);
    assert!(matches!(
        classification,
        polycap::Classification::ClassicalCap3D { degenerate_prisms: 1 }
    ));
    let emb = develop(&cap, &classification).unwrap();
    assert_eq!(emb.wall_faces.len(), 2);
    let report = verify_isometry(&emb, &cap, &disk);
    assert!(report.max_edge_rel_err < 1e-9);
}

#[test]
fn develops_doubled_triangle_flat() {
    let disk = doubled_triangle();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    assert!(emb.flat2d);
    // Standing triangle: base endpoints at distance 2, apex at height √3.
    assert!((emb.vertices[0][2] - SQRT3).abs() < 1e-6);
    assert!((emb.vertices[1][0] - emb.vertices[2][0]).abs() - 2.0 < 1e-9);
    let report = verify_isometry(&emb, &result.cap, &disk);
    assert!(report.max_edge_rel_err < 1e-6);
    assert!(report.max_cone_angle_err < 1e-6);
}

#[test]
fn develops_loop_cone() {
    // The cone-in-a-loop disk folds onto a single polygon with a vertical
    // symmetry axis: a fully degenerate cap built on a loop and a self-glued
    // edge pair.
    let disk = loop_cone();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    assert_eq!(
        result.classification,
        polycap::Classification::ClassicalCapFlat2D
    );
    let emb = develop(&result.cap, &result.classification).unwrap();
    assert!(emb.flat2d);
    let report = verify_isometry(&emb, &result.cap, &disk);
    assert!(report.max_edge_rel_err < 1e-6);
    assert!(report.max_cone_angle_err < 1e-6);
}

#[test]
fn seed_independence_of_development() {
    // Pairwise distances between developed vertices are seed independent.
    let disk = pyramid_with_flat_vertex();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    // Rebuild with a shuffled triangulation, i.e. a different seed triangle
    // and propagation order.
    let h = result.cap.heights().to_vec();
    let shuffled = polycap::cap::shuffle_triangulation(disk.triangulation(), 5, 10);
    let cap2 = polycap::feasibility(&disk, &h, Some(&shuffled)).unwrap();
    let emb2 = develop(&cap2, &result.classification).unwrap();
    for i in 0..emb.vertices.len() {
        for j in i + 1..emb.vertices.len() {
            let d1 = dist3(emb.vertices[i], emb.vertices[j]);
            let d2 = dist3(emb2.vertices[i], emb2.vertices[j]);
            assert!((d1 - d2).abs() < 1e-8, "pair {i},{j}: {d1} vs {d2}");
        }
    }
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[test]
fn embedded_dihedrals_match_theta() {
    let disk = square_pyramid();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    let cap = &result.cap;
    // For each interior edge, the dihedral measured from coordinates.
    for (e_idx, e) in cap.edges().iter().enumerate() {
        let polycap::EdgeSides::Interior(a, b) = e.sides else { continue };
        let ta = &cap.triangulation().tris()[a.tri];
        let tb = &cap.triangulation().tris()[b.tri];
        let (sa, ea_) = polycap::trian::side_corners(a.side);
        let p = emb.vertices[ta.v[sa]];
        let q = emb.vertices[ta.v[ea_]];
        let r1 = emb.vertices[ta.v[a.side]];
        let r2 = emb.vertices[tb.v[b.side]];
        let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
        let un = {
            let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            [u[0] / n, u[1] / n, u[2] / n]
        };
        let perp = |w: [f64; 3]| {
            let d = w[0] * un[0] + w[1] * un[1] + w[2] * un[2];
            [w[0] - d * un[0], w[1] - d * un[1], w[2] - d * un[2]]
        };
        let v1 = perp([r1[0] - p[0], r1[1] - p[1], r1[2] - p[2]]);
        let v2 = perp([r2[0] - p[0], r2[1] - p[1], r2[2] - p[2]]);
        let dot = v1[0] * v2[0] + v1[1] * v2[1] + v1[2] * v2[2];
        let n1 = (v1[0] * v1[0] + v1[1] * v1[1] + v1[2] * v1[2]).sqrt();
        let n2 = (v2[0] * v2[0] + v2[1] * v2[1] + v2[2] * v2[2]).sqrt();
        let dihedral = (dot / (n1 * n2)).clamp(-1.0, 1.0).acos();
        let theta = cap.theta(e_idx).unwrap();
        assert!(
            (dihedral - theta).abs() < 1e-7,
            "edge {e_idx}: coords {dihedral} vs θ {theta}"
        );
        assert!(theta <= std::f64::consts::PI + 1e-9);
    }
}

#[test]
fn kappa_from_coordinates() {
    let disk = pyramid_with_flat_vertex();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    let report = verify_isometry(&emb, &result.cap, &disk);
    // The projected link closes to 2π − κ at every interior vertex.
    assert!(report.max_link_err < 1e-7);
}

#[test]
fn embed_reextract_resolve_round_trip() {
    // Measure the embedded roof's edge lengths, rebuild the metric from
    // them, and solve again: the heights come back.
    let disk = pyramid_with_flat_vertex();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    assert!(emb.wall_faces.is_empty());
    let t = result.cap.triangulation();
    let dist = |a: usize, b: usize| dist3(emb.vertices[a], emb.vertices[b]);
    let tris: Vec<polycap::Tri<f64>> = t
        .tris()
        .iter()
        .map(|tri| polycap::Tri {
            v: tri.v,
            len: [
                dist(tri.v[1], tri.v[2]),
                dist(tri.v[2], tri.v[0]),
                dist(tri.v[0], tri.v[1]),
            ],
        })
        .collect();
    let gluings: Vec<(polycap::Side, polycap::Side)> = result
        .cap
        .edges()
        .iter()
        .filter_map(|e| match e.sides {
            polycap::EdgeSides::Interior(a, b) => Some((a, b)),
            polycap::EdgeSides::Boundary(_) => None,
        })
        .collect();
    let ids: Vec<i64> = (0..disk.n_vertices()).map(|v| disk.id_of(v)).collect();
    let redisk =
        polycap::MetricDisk::new(ids, disk.boundary_flags().to_vec(), tris, &gluings).unwrap();
    let re = maximize(&redisk, &SolveOptions::default()).unwrap();
    for v in disk.interior_vertices() {
        assert!(
            (re.cap.heights()[v] - result.cap.heights()[v]).abs() < 1e-6,
            "vertex {v}: {} vs {}",
            re.cap.heights()[v],
            result.cap.heights()[v]
        );
    }
}

#[test]
fn isometry_detects_injected_noise() {
    let disk = square_pyramid();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let mut emb = develop(&result.cap, &result.classification).unwrap();
    emb.vertices[0][0] += 1e-3;
    // Recompute plain chord lengths against the tampered coordinates.
    for (e_idx, e) in result.cap.edges().iter().enumerate() {
        let (u, v) = e.ends;
        emb.edge_lengths[e_idx] = dist3(emb.vertices[u], emb.vertices[v]);
    }
    let report = verify_isometry(&emb, &result.cap, &disk);
    assert!(report.max_edge_rel_err >= 1e-4);
}

#[test]
fn obj_export_is_deterministic_and_reparses() {
    let disk = square_pyramid();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    let s1 = obj_string(&emb);
    let s2 = obj_string(&emb);
    assert_eq!(s1, s2);
    // 5 vertex lines (base corners shared with the rim), 4 + 1 faces.
    let v_lines: Vec<&str> = s1.lines().filter(|l| l.starts_with("v ")).collect();
    let f_lines: Vec<&str> = s1.lines().filter(|l| l.starts_with("f ")).collect();
    assert_eq!(v_lines.len(), 5);
    assert_eq!(f_lines.len(), 5);
    assert!(s1.ends_with('\n') && !s1.contains('\r'));
    // Parse the vertex lines back and compare coordinates.
    for (line, p) in v_lines.iter().zip(emb.vertices.iter()) {
        let nums: Vec<f64> = line[2..]
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        for k in 0..3 {
            assert!((nums[k] - p[k]).abs() < 1e-11);
        }
    }
    // Face indices are 1-based and in range.
    for line in f_lines {
        for tok in line[2..].split_whitespace() {
            let idx: usize = tok.parse().unwrap();
            assert!(idx >= 1 && idx <= emb.n_points());
        }
    }

    let dir = std::env::temp_dir().join("polycap_obj_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pyramid.obj");
    polycap::export_obj(&emb, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), s1);
    // A missing directory is an i/o error.
    assert!(polycap::export_obj(&emb, dir.join("no_such_dir").join("x.obj")).is_err());
}

#[test]
fn obj_two_triangle_has_base_corner_vertex() {
    let disk = two_triangle();
    let result = maximize(&disk, &SolveOptions::default()).unwrap();
    let emb = develop(&result.cap, &result.classification).unwrap();
    let s = obj_string(&emb);
    let v_lines = s.lines().filter(|l| l.starts_with("v ")).count();
    let f_lines = s.lines().filter(|l| l.starts_with("f ")).count();
    // 3 metric vertices + 1 base corner; roof + 2 walls + base.
    assert_eq!(v_lines, 4);
    assert_eq!(f_lines, 4);
}
