//! Shared fixtures and independent oracles for the integration tests.
//!
//! The oracles here recompute prism angles from explicit 3D coordinates via
//! face tangents/normals, deliberately not sharing any code path with the
//! intrinsic spherical-triangle formulas in the library.

#![allow(dead_code)]

use polycap::{parse_disk, MetricDisk, Scalar};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;
pub const SQRT3: f64 = 1.7320508075688772;

/// Upper boundary of the pyramid with apex (0,0,1) over corners (±1,±1,0):
/// four lateral triangles (2, √3, √3) fanned around the interior apex.
pub fn square_pyramid_json() -> String {
    format!(
        r#"{{
  "vertices": [
    {{"id": 0, "boundary": false}},
    {{"id": 1, "boundary": true}},
    {{"id": 2, "boundary": true}},
    {{"id": 3, "boundary": true}},
    {{"id": 4, "boundary": true}}
  ],
  "triangles": [
    {{"corners": [0, 1, 2], "lengths": [2.0, {s3}, {s3}]}},
    {{"corners": [0, 2, 3], "lengths": [2.0, {s3}, {s3}]}},
    {{"corners": [0, 3, 4], "lengths": [2.0, {s3}, {s3}]}},
    {{"corners": [0, 4, 1], "lengths": [2.0, {s3}, {s3}]}}
  ],
  "gluings": [
    [[0, 1], [1, 2]],
    [[1, 1], [2, 2]],
    [[2, 1], [3, 2]],
    [[3, 1], [0, 2]]
  ]
}}"#,
        s3 = SQRT3
    )
}

pub fn square_pyramid() -> MetricDisk<Scalar> {
    parse_disk(&square_pyramid_json()).expect("square pyramid disk")
}

/// The two-triangle disk of the lower hull of (1,0,0), (0,1,0), (0,0,1):
/// an equilateral triangle of side √2 and an isosceles right one with
/// hypotenuse 2, glued along both slanted sides (a multi-edge pair).
/// Vertex 0 is the interior singularity.
pub fn two_triangle_json() -> String {
    format!(
        r#"{{
  "vertices": [
    {{"id": 0, "boundary": false}},
    {{"id": 1, "boundary": true}},
    {{"id": 2, "boundary": true}}
  ],
  "triangles": [
    {{"corners": [0, 1, 2], "lengths": [{s2}, {s2}, {s2}]}},
    {{"corners": [0, 2, 1], "lengths": [2.0, {s2}, {s2}]}}
  ],
  "gluings": [
    [[0, 1], [1, 2]],
    [[0, 2], [1, 1]]
  ]
}}"#,
        s2 = SQRT2
    )
}

pub fn two_triangle() -> MetricDisk<Scalar> {
    parse_disk(&two_triangle_json()).expect("two-triangle disk")
}

/// Doubled equilateral triangle of side 2: two copies glued along both
/// slanted sides. Its cap is the triangle standing on its base side, i.e.
/// fully degenerate with the apex at height √3.
pub fn doubled_triangle() -> MetricDisk<Scalar> {
    let json = r#"{
  "vertices": [
    {"id": 0, "boundary": false},
    {"id": 1, "boundary": true},
    {"id": 2, "boundary": true}
  ],
  "triangles": [
    {"corners": [0, 1, 2], "lengths": [2.0, 2.0, 2.0]},
    {"corners": [0, 2, 1], "lengths": [2.0, 2.0, 2.0]}
  ],
  "gluings": [
    [[0, 1], [1, 2]],
    [[0, 2], [1, 1]]
  ]
}"#;
    parse_disk(json).expect("doubled triangle disk")
}

/// Doubled trapezoid (corners (0,0),(4,0),(3,1),(1,1)), each copy cut by the
/// diagonal (0,0)–(3,1). The two diagonals are parallel interior edges
/// between the same vertex pair. Vertices 2, 3 are interior.
pub fn doubled_trapezoid_json() -> String {
    let s2 = SQRT2;
    let s10 = 10f64.sqrt();
    format!(
        r#"{{
  "vertices": [
    {{"id": 0, "boundary": true}},
    {{"id": 1, "boundary": true}},
    {{"id": 2, "boundary": false}},
    {{"id": 3, "boundary": false}}
  ],
  "triangles": [
    {{"corners": [0, 1, 3], "lengths": [{s2}, {s10}, 4.0]}},
    {{"corners": [0, 3, 2], "lengths": [2.0, {s2}, {s10}]}},
    {{"corners": [0, 3, 1], "lengths": [{s2}, 4.0, {s10}]}},
    {{"corners": [0, 2, 3], "lengths": [2.0, {s10}, {s2}]}}
  ],
  "gluings": [
    [[0, 1], [1, 2]],
    [[2, 2], [3, 1]],
    [[0, 0], [2, 0]],
    [[1, 1], [3, 2]],
    [[1, 0], [3, 0]]
  ]
}}"#
    )
}

pub fn doubled_trapezoid() -> MetricDisk<Scalar> {
    parse_disk(&doubled_trapezoid_json()).expect("doubled trapezoid disk")
}

/// A cone inside a geodesic loop: triangle (i, j, j) with its two `ij` sides
/// glued to each other, the loop side glued to an outer triangle (b, j, j).
/// Exercises loops, self-glued edges and the closed-geodesic inequality.
pub fn loop_cone() -> MetricDisk<Scalar> {
    let json = r#"{
  "vertices": [
    {"id": 0, "boundary": false},
    {"id": 1, "boundary": true},
    {"id": 2, "boundary": true}
  ],
  "triangles": [
    {"corners": [0, 1, 1], "lengths": [1.9, 1.0, 1.0]},
    {"corners": [2, 1, 1], "lengths": [1.9, 0.96, 0.96]}
  ],
  "gluings": [
    [[0, 1], [0, 2]],
    [[0, 0], [1, 0]]
  ]
}"#;
    parse_disk(json).expect("loop cone disk")
}

/// Two triangles fanned around an interior vertex with a boundary vertex of
/// total angle exactly 3π/2 — a convexity violation.
pub fn nonconvex_boundary_json() -> String {
    // Leg u chosen so both triangles have angle 3π/4 at vertex 1.
    let u = (5.0 + 2.0 * SQRT2).sqrt();
    format!(
        r#"{{
  "vertices": [
    {{"id": 0, "boundary": false}},
    {{"id": 1, "boundary": true}},
    {{"id": 2, "boundary": true}}
  ],
  "triangles": [
    {{"corners": [0, 1, 2], "lengths": [1.0, {u}, 2.0]}},
    {{"corners": [0, 2, 1], "lengths": [1.0, 2.0, {u}]}}
  ],
  "gluings": [
    [[0, 1], [1, 2]],
    [[0, 2], [1, 1]]
  ]
}}"#
    )
}

/// Square pyramid with one lateral face subdivided through an interior
/// Steiner point `m` (vertex id 5) that is flat: cone angle exactly 2π.
/// The realizing cap must put `m` back onto the face at height 1/3.
pub fn pyramid_with_flat_vertex() -> MetricDisk<Scalar> {
    let mq = 2.0 * SQRT2 / 3.0; // |m - apex|
    let m1 = 11f64.sqrt() / 3.0; // |m - rim corner|
    let json = format!(
        r#"{{
  "vertices": [
    {{"id": 0, "boundary": false}},
    {{"id": 1, "boundary": true}},
    {{"id": 2, "boundary": true}},
    {{"id": 3, "boundary": true}},
    {{"id": 4, "boundary": true}},
    {{"id": 5, "boundary": false}}
  ],
  "triangles": [
    {{"corners": [0, 1, 5], "lengths": [{m1}, {mq}, {s3}]}},
    {{"corners": [1, 2, 5], "lengths": [{m1}, {m1}, 2.0]}},
    {{"corners": [2, 0, 5], "lengths": [{mq}, {m1}, {s3}]}},
    {{"corners": [0, 2, 3], "lengths": [2.0, {s3}, {s3}]}},
    {{"corners": [0, 3, 4], "lengths": [2.0, {s3}, {s3}]}},
    {{"corners": [0, 4, 1], "lengths": [2.0, {s3}, {s3}]}}
  ],
  "gluings": [
    [[0, 0], [1, 1]],
    [[1, 0], [2, 1]],
    [[2, 0], [0, 1]],
    [[2, 2], [3, 2]],
    [[3, 1], [4, 2]],
    [[4, 1], [5, 2]],
    [[5, 1], [0, 2]]
  ]
}}"#,
        s3 = SQRT3
    );
    parse_disk(&json).expect("pyramid with flat vertex")
}

/// Crater: one cone surrounded by a staggered hexagonal ring of cone points
/// inside a square base. At uniform small heights the extension is a flat
/// plateau over the ring, isolating the center in Γ.
pub fn crater() -> polycap::hull::GeneratedCap<Scalar> {
    let mut pts: Vec<[f64; 3]> = vec![
        [-2.0, -2.0, 0.5],
        [2.0, -2.0, 0.5],
        [2.0, 2.0, 0.5],
        [-2.0, 2.0, 0.5],
    ];
    for k in 0..6 {
        let r = 1.0 + 0.03 * k as f64;
        let a = 0.1 * k as f64 + std::f64::consts::PI / 3.0 * k as f64;
        pts.push([r * a.cos(), r * a.sin(), 0.3]);
    }
    pts.push([0.03, -0.02, 0.55]);
    polycap::hull::cap_from_points(&pts).expect("crater builds")
}

// ---------------------------------------------------------------------------
// 3D oracle for prism angles.

pub fn v3_sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn v3_dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn v3_cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn v3_norm(a: [f64; 3]) -> f64 {
    v3_dot(a, a).sqrt()
}

pub fn v3_scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub struct PrismOracle {
    /// Upper vertices in 3D.
    pub q: [[f64; 3]; 3],
    /// Dihedral at upper edge s (opposite corner s).
    pub alpha: [f64; 3],
    /// Dihedral at the vertical edge under corner a.
    pub omega: [f64; 3],
    /// Tilt of the upper base against the base plane.
    pub eta: f64,
}

/// Builds the prism explicitly: projected triangle in z = 0 from the
/// projected side lengths, upper vertices lifted to the heights; angles by
/// tangent vectors perpendicular to each edge.
pub fn prism_oracle(len: [f64; 3], h: [f64; 3]) -> PrismOracle {
    let lp = |s: usize| -> f64 {
        let (a, b) = ((s + 1) % 3, (s + 2) % 3);
        (len[s] * len[s] - (h[a] - h[b]) * (h[a] - h[b])).max(0.0).sqrt()
    };
    let (l0, l1, l2) = (lp(0), lp(1), lp(2));
    let x = (l2 * l2 + l1 * l1 - l0 * l0) / (2.0 * l2);
    let y = (l1 * l1 - x * x).max(0.0).sqrt();
    let p = [[0.0, 0.0], [l2, 0.0], [x, y]];
    let q = [
        [p[0][0], p[0][1], h[0]],
        [p[1][0], p[1][1], h[1]],
        [p[2][0], p[2][1], h[2]],
    ];
    // Dihedral at upper edge (a,b) between the upper face and the vertical
    // lateral plane under the edge: angle between the in-face and in-wall
    // tangents perpendicular to the edge.
    let dihedral = |a: usize, b: usize, c: usize| -> f64 {
        let u = v3_sub(q[b], q[a]);
        let un = v3_scale(u, 1.0 / v3_norm(u));
        let perp = |w: [f64; 3]| -> [f64; 3] {
            let proj = v3_dot(w, un);
            v3_sub(w, v3_scale(un, proj))
        };
        let in_face = perp(v3_sub(q[c], q[a]));
        let down = perp([0.0, 0.0, -1.0]);
        let cosv = v3_dot(in_face, down) / (v3_norm(in_face) * v3_norm(down));
        cosv.clamp(-1.0, 1.0).acos()
    };
    let alpha = [dihedral(1, 2, 0), dihedral(2, 0, 1), dihedral(0, 1, 2)];
    // Dihedral at the vertical edge under a: the horizontal directions to
    // the neighbouring projections.
    let omega_at = |a: usize| -> f64 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let u = [p[b][0] - p[a][0], p[b][1] - p[a][1]];
        let w = [p[c][0] - p[a][0], p[c][1] - p[a][1]];
        let cosv = (u[0] * w[0] + u[1] * w[1])
            / ((u[0] * u[0] + u[1] * u[1]).sqrt() * (w[0] * w[0] + w[1] * w[1]).sqrt());
        cosv.clamp(-1.0, 1.0).acos()
    };
    let omega = [omega_at(0), omega_at(1), omega_at(2)];
    // Tilt from the upper-face normal against the vertical.
    let n = v3_cross(v3_sub(q[1], q[0]), v3_sub(q[2], q[0]));
    let eta = (n[2] / v3_norm(n)).clamp(-1.0, 1.0).acos();
    PrismOracle { q, alpha, omega, eta }
}

// ---------------------------------------------------------------------------
// Sampling and alignment helpers.

use rand::Rng;

/// Random feasible heights: raw samples scaled toward zero until feasible
/// (the cap space is convex and contains zero), then shrunk once more.
/// Some infeasibilities are scale invariant (the loop inequality compares
/// heights), so samples that do not become feasible at a meaningful scale
/// are redrawn rather than shrunk into the numerical slack.
pub fn random_feasible_heights(
    disk: &MetricDisk<Scalar>,
    rng: &mut impl Rng,
    interior_shrink: f64,
) -> Vec<Scalar> {
    let dhat = disk.approx_boundary_distance(2);
    for _attempt in 0..60 {
        let mut h: Vec<f64> = (0..disk.n_vertices())
            .map(|v| {
                if disk.is_boundary(v) {
                    0.0
                } else {
                    rng.random_range(0.0..1.0) * dhat[v]
                }
            })
            .collect();
        for _ in 0..25 {
            if polycap::feasibility(disk, &h, None).is_ok() {
                if h.iter().fold(0.0f64, |m, &x| m.max(x)) < 1e-9 {
                    break;
                }
                for x in h.iter_mut() {
                    *x *= interior_shrink;
                }
                assert!(polycap::feasibility(disk, &h, None).is_ok());
                return h;
            }
            for x in h.iter_mut() {
                *x *= 0.5;
            }
        }
    }
    // Zero heights are always feasible.
    vec![0.0; disk.n_vertices()]
}

/// Random heights at which every coordinate can move by `eps` both ways
/// without leaving the cap space, so central differences are valid. Only
/// meaningful on disks whose cap space is full-dimensional (every interior
/// vertex strictly singular).
pub fn random_fd_point(
    disk: &MetricDisk<Scalar>,
    rng: &mut impl Rng,
    eps: f64,
) -> Vec<Scalar> {
    let dhat = disk.approx_boundary_distance(2);
    'outer: for _ in 0..200 {
        let mut h: Vec<f64> = (0..disk.n_vertices())
            .map(|v| {
                if disk.is_boundary(v) {
                    0.0
                } else {
                    (0.15 + 0.7 * rng.random_range(0.0..1.0)) * dhat[v]
                }
            })
            .collect();
        for _ in 0..60 {
            if polycap::feasibility(disk, &h, None).is_ok() {
                for x in h.iter_mut() {
                    *x *= 0.7;
                }
                for v in disk.interior_vertices() {
                    for sign in [-1.0, 1.0] {
                        let mut hp = h.clone();
                        hp[v] += sign * eps;
                        if polycap::feasibility(disk, &hp, None).is_err() {
                            continue 'outer;
                        }
                    }
                }
                return h;
            }
            for x in h.iter_mut() {
                *x *= 0.5;
            }
        }
    }
    panic!("no interior point with finite-difference margin found");
}

/// Best rigid alignment (rotation, optional reflection, translation) of the
/// planar point sets; returns the max residual.
pub fn align_2d(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let centroid = |pts: &[[f64; 2]]| -> [f64; 2] {
        let mut c = [0.0, 0.0];
        for p in pts {
            c[0] += p[0];
            c[1] += p[1];
        }
        [c[0] / n, c[1] / n]
    };
    let ca = centroid(a);
    let cb = centroid(b);
    let mut best = f64::INFINITY;
    for reflect in [false, true] {
        let aa: Vec<[f64; 2]> = a
            .iter()
            .map(|p| {
                let q = [p[0] - ca[0], p[1] - ca[1]];
                if reflect {
                    [q[0], -q[1]]
                } else {
                    q
                }
            })
            .collect();
        let bb: Vec<[f64; 2]> = b.iter().map(|p| [p[0] - cb[0], p[1] - cb[1]]).collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for (p, q) in aa.iter().zip(bb.iter()) {
            num += p[0] * q[1] - p[1] * q[0];
            den += p[0] * q[0] + p[1] * q[1];
        }
        let theta = num.atan2(den);
        let (s, c) = theta.sin_cos();
        let mut worst: f64 = 0.0;
        for (p, q) in aa.iter().zip(bb.iter()) {
            let r = [c * p[0] - s * p[1], s * p[0] + c * p[1]];
            worst = worst.max(((r[0] - q[0]).powi(2) + (r[1] - q[1]).powi(2)).sqrt());
        }
        best = best.min(worst);
    }
    best
}
