//! Synthetic convex caps from point samples, for round-trip testing.
//!
//! Sample points in `[−1,1]² × (0,1]`, pin the 2D-hull corners of their
//! projections to height zero, and take the concave roof over the base
//! polygon — the upper side of the lower hull. The roof triangulation, read
//! off with its 3D edge lengths, is a convex polyhedral metric whose unique
//! realizing cap is known by construction, heights and all.
//!
//! Trials are discarded when the configuration is degenerate: a base corner
//! within `1e-6` of the straight-angle convexity limit, four roof points
//! within `1e-9` of coplanar, or no strictly interior roof vertex.

use crate::disk::MetricDisk;
use crate::trian::{Side, Tri};
use crate::Real;
use rand::Rng;

/// A cap built from explicit points: the extracted metric plus the known
/// heights and coordinates of its vertices.
#[derive(Debug, Clone)]
pub struct GeneratedCap<R> {
    pub disk: MetricDisk<R>,
    /// True heights per disk vertex (zero on the boundary).
    pub heights: Vec<R>,
    /// Generating coordinates per disk vertex.
    pub coords: Vec<[f64; 3]>,
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Strict convex hull indices, counter-clockwise.
fn hull2(pts: &[[f64; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .partial_cmp(&pts[b][0])
            .unwrap()
            .then(pts[a][1].partial_cmp(&pts[b][1]).unwrap())
    });
    let build = |iter: &mut dyn Iterator<Item = usize>| {
        let mut chain: Vec<usize> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && cross2(
                    pts[chain[chain.len() - 2]],
                    pts[chain[chain.len() - 1]],
                    pts[p],
                ) <= 0.0
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain.pop();
        chain
    };
    let mut lower = build(&mut idx.iter().copied());
    let upper = build(&mut idx.iter().rev().copied());
    lower.extend(upper);
    lower
}

/// Builds the cap determined by explicit sample points: projections of 2D
/// hull corners are pinned to height zero, every other sample keeps its
/// height. Returns `None` for degenerate configurations.
pub fn cap_from_points<R: Real>(samples: &[[f64; 3]]) -> Option<GeneratedCap<R>> {
    let n = samples.len();
    if n < 4 {
        return None;
    }
    let proj: Vec<[f64; 2]> = samples.iter().map(|p| [p[0], p[1]]).collect();
    let hull = hull2(&proj);
    if hull.len() < 3 {
        return None;
    }
    // Base corners must be strictly convex: turn angle at least 1e-6.
    for k in 0..hull.len() {
        let o = proj[hull[(k + hull.len() - 1) % hull.len()]];
        let a = proj[hull[k]];
        let b = proj[hull[(k + 1) % hull.len()]];
        let u = [a[0] - o[0], a[1] - o[1]];
        let w = [b[0] - a[0], b[1] - a[1]];
        let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
        let nw = (w[0] * w[0] + w[1] * w[1]).sqrt();
        let sin_turn = (u[0] * w[1] - u[1] * w[0]) / (nu * nw);
        if sin_turn < 1e-6 {
            return None;
        }
    }
    let on_hull: Vec<bool> = {
        let mut f = vec![false; n];
        for &h in &hull {
            f[h] = true;
        }
        f
    };
    // Interior samples too close to the base boundary are rejected.
    for i in 0..n {
        if on_hull[i] {
            continue;
        }
        for k in 0..hull.len() {
            let a = proj[hull[k]];
            let b = proj[hull[(k + 1) % hull.len()]];
            let area2 = cross2(a, b, proj[i]).abs();
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            if area2 / len < 1e-6 {
                return None;
            }
        }
    }
    let lifted: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            if on_hull[i] {
                [proj[i][0], proj[i][1], 0.0]
            } else {
                samples[i]
            }
        })
        .collect();

    // Roof faces: triples whose plane has every other point at or below it.
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let area2 = cross2(proj[i], proj[j], proj[k]);
                if area2.abs() < 1e-9 {
                    continue;
                }
                // Plane z = c0 + c1 x + c2 y through the three lifted points.
                let (pi, pj, pk) = (lifted[i], lifted[j], lifted[k]);
                let det = area2;
                let c1 = ((pj[2] - pi[2]) * (pk[1] - pi[1])
                    - (pk[2] - pi[2]) * (pj[1] - pi[1]))
                    / det;
                let c2 = ((pk[2] - pi[2]) * (pj[0] - pi[0])
                    - (pj[2] - pi[2]) * (pk[0] - pi[0]))
                    / det;
                let plane = |p: [f64; 3]| pi[2] + c1 * (p[0] - pi[0]) + c2 * (p[1] - pi[1]);
                let mut is_face = true;
                let mut near_coplanar = false;
                for (m, p) in lifted.iter().enumerate() {
                    if m == i || m == j || m == k {
                        continue;
                    }
                    let gap = plane(*p) - p[2];
                    if gap < -1e-12 {
                        is_face = false;
                        break;
                    }
                    if gap < 1e-9 {
                        near_coplanar = true;
                    }
                }
                if is_face {
                    if near_coplanar {
                        // Ambiguous triangulation of a flat spot.
                        return None;
                    }
                    // Counter-clockwise in the projection.
                    if area2 > 0.0 {
                        faces.push([i, j, k]);
                    } else {
                        faces.push([i, k, j]);
                    }
                }
            }
        }
    }
    if faces.is_empty() {
        return None;
    }
    // The faces must tile the base polygon.
    let hull_area: f64 = {
        let mut a = 0.0;
        for k in 1..hull.len() - 1 {
            a += cross2(proj[hull[0]], proj[hull[k]], proj[hull[k + 1]]);
        }
        a / 2.0
    };
    let faces_area: f64 = faces
        .iter()
        .map(|f| cross2(proj[f[0]], proj[f[1]], proj[f[2]]) / 2.0)
        .sum();
    if (faces_area - hull_area).abs() > 1e-9 * hull_area.max(1.0) {
        return None;
    }

    // Vertices used by the roof; there must be an interior one.
    let mut used = vec![false; n];
    for f in &faces {
        for &v in f {
            used[v] = true;
        }
    }
    if !(0..n).any(|i| used[i] && !on_hull[i]) {
        return None;
    }
    for &h in &hull {
        if !used[h] {
            return None;
        }
    }
    let mut remap = vec![usize::MAX; n];
    let mut coords: Vec<[f64; 3]> = Vec::new();
    let mut boundary = Vec::new();
    let mut ids = Vec::new();
    for i in 0..n {
        if used[i] {
            remap[i] = coords.len();
            ids.push(coords.len() as i64);
            boundary.push(on_hull[i]);
            coords.push(lifted[i]);
        }
    }

    let dist3 = |a: [f64; 3], b: [f64; 3]| -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    };
    let mut tris: Vec<Tri<R>> = Vec::new();
    for f in &faces {
        let v = [remap[f[0]], remap[f[1]], remap[f[2]]];
        let len = [
            R::of(dist3(coords[v[1]], coords[v[2]])),
            R::of(dist3(coords[v[2]], coords[v[0]])),
            R::of(dist3(coords[v[0]], coords[v[1]])),
        ];
        tris.push(Tri { v, len });
    }
    // Gluings by shared vertex pair; the embedded roof has no multi-edges.
    let mut by_pair: std::collections::BTreeMap<(usize, usize), Vec<Side>> =
        std::collections::BTreeMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for s in 0..3 {
            let (a, b) = crate::trian::side_corners(s);
            let (u, v) = (tri.v[a], tri.v[b]);
            by_pair
                .entry((u.min(v), u.max(v)))
                .or_default()
                .push(Side::new(t, s));
        }
    }
    let mut gluings = Vec::new();
    for sides in by_pair.values() {
        match sides.len() {
            1 => {}
            2 => gluings.push((sides[0], sides[1])),
            _ => return None,
        }
    }

    let heights: Vec<R> = coords.iter().map(|p| R::of(p[2])).collect();
    let disk = MetricDisk::new(ids, boundary, tris, &gluings).ok()?;
    Some(GeneratedCap {
        disk,
        heights,
        coords,
    })
}

/// One random trial: `n` points uniform in `[−1,1]² × (0,1]`.
pub fn random_cap<R: Real>(n: usize, rng: &mut impl Rng) -> Option<GeneratedCap<R>> {
    let samples: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..1.0f64).max(1e-3),
            ]
        })
        .collect();
    cap_from_points(&samples)
}

/// Retries random trials until one survives the degeneracy filters.
pub fn random_cap_retry<R: Real>(n: usize, rng: &mut impl Rng, max_tries: usize) -> GeneratedCap<R> {
    for _ in 0..max_tries {
        if let Some(cap) = random_cap(n, rng) {
            return cap;
        }
    }
    panic!("no valid random cap after {max_tries} tries");
}
