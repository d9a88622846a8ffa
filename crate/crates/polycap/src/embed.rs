//! Development of a classical-cap maximizer into explicit coordinates.
//!
//! The non-degenerate prisms are laid out in the plane over the projected
//! metric (edge lengths `ℓ' = sqrt(ℓ² − Δh²)`) by breadth-first propagation
//! from a seed triangle; zero curvature at the free interior vertices makes
//! the development consistent, and any residual curvature surfaces as a
//! closure failure. Vertices are then lifted to `z = h`.
//!
//! Degenerate prisms are the vertical faces. A wall prism is intrinsically
//! flat but may bend across vertical edges of the cap, which happens exactly
//! where its base side runs through corners of the base polygon; those
//! corners are the projections of ridge vertices and enter the mesh as extra
//! base vertices. Each wall prism is emitted as a fan of vertical triangles
//! over its folded base path.
//!
//! A fully degenerate cap is a doubled polygon standing on its base side; it
//! is emitted as the single flagged polygon.

use crate::cap::CapState;
use crate::disk::MetricDisk;
use crate::geom;
use crate::solver::{Classification, ACTIVE_SLOPE_TOL};
use crate::trian::{side_corners, EdgeSides, Side};
use crate::Real;
use thiserror::Error;

/// Development mismatch above this (relative to local scale) is a failure.
pub const CLOSURE_TOL: f64 = 1e-6;
/// Relative tolerance when matching a wall base side to a base-polygon arc.
pub const BASE_WALK_TOL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum EmbedError<R: Real> {
    #[error("cap is not classical: {0}")]
    NotClassical(String),
    #[error("development fails to close at vertex {vertex}: mismatch {mismatch} (residual curvature)")]
    ClosureFailure { vertex: usize, mismatch: R },
    #[error("non-degenerate prisms form a disconnected complex")]
    DisconnectedInterior,
    #[error("unsupported wall configuration: {0}")]
    UnsupportedWall(String),
    #[error("no base-polygon arc matches the wall base side of length {len}")]
    BaseWalkFailed { len: R },
}

/// A cap realized by coordinates in the upper half-space.
#[derive(Debug, Clone)]
pub struct EmbeddedCap<R> {
    /// Positions of the metric vertices, in vertex order; `z` is the height.
    pub vertices: Vec<[R; 3]>,
    /// Extra base vertices: projections of ridge vertices at `z = 0`.
    pub extra: Vec<[R; 3]>,
    /// Roof triangles (indices into `vertices` then `extra`), outward up.
    pub upper_faces: Vec<[usize; 3]>,
    /// Vertical wall triangles, outward.
    pub wall_faces: Vec<[usize; 3]>,
    /// Base polygon, outward down. Empty for a flat cap.
    pub base_face: Vec<usize>,
    /// Doubled polygon standing on its base side.
    pub flat2d: bool,
    /// Embedded length of every cap edge (edge index order); wall base
    /// edges measure along their folded path.
    pub edge_lengths: Vec<R>,
    /// Which prisms were treated as walls.
    pub wall_prisms: Vec<bool>,
}

impl<R: Real> EmbeddedCap<R> {
    pub fn n_points(&self) -> usize {
        self.vertices.len() + self.extra.len()
    }

    pub fn point(&self, i: usize) -> [R; 3] {
        if i < self.vertices.len() {
            self.vertices[i]
        } else {
            self.extra[i - self.vertices.len()]
        }
    }
}

/// Third corner position given two placed corners and the distances to them,
/// on the left of the directed segment `q1 → q2` when `left` is set.
fn third_point<R: Real>(q1: [R; 2], q2: [R; 2], d1: R, d2: R, left: bool) -> [R; 2] {
    let base = geom::dist(q1, q2);
    let ux = (q2[0] - q1[0]) / base;
    let uy = (q2[1] - q1[1]) / base;
    let x = (base * base + d1 * d1 - d2 * d2) / (R::of(2.0) * base);
    let y = (d1 * d1 - x * x).max(R::zero()).sqrt();
    let y = if left { y } else { -y };
    [q1[0] + x * ux - y * uy, q1[1] + x * uy + y * ux]
}

/// Develops a classified maximizer into coordinates.
pub fn develop<R: Real>(
    cap: &CapState<R>,
    classification: &Classification,
) -> Result<EmbeddedCap<R>, EmbedError<R>> {
    match classification {
        Classification::NotClassical(why) => Err(EmbedError::NotClassical(why.clone())),
        Classification::ClassicalCapFlat2D => develop_flat(cap),
        Classification::ClassicalCap3D { .. } => develop_3d(cap),
    }
}

fn wall_flags<R: Real>(cap: &CapState<R>) -> Vec<bool> {
    let threshold = R::of(1.0 - ACTIVE_SLOPE_TOL);
    (0..cap.triangulation().n_triangles())
        .map(|t| cap.slope(t) >= threshold)
        .collect()
}

/// Breadth-first planar development of the projected metric over the
/// non-wall prisms (or all prisms when `walls` is all-true, which lays a
/// fully degenerate cap onto a line).
fn develop_positions<R: Real>(
    cap: &CapState<R>,
    include: &[bool],
    closure_tol: R,
) -> Result<Vec<Option<[R; 2]>>, EmbedError<R>> {
    let t = cap.triangulation();
    let n_tris = t.n_triangles();
    let seed = (0..n_tris)
        .find(|&ti| include[ti])
        .ok_or(EmbedError::DisconnectedInterior)?;
    let mut pos: Vec<Option<[R; 2]>> = vec![None; cap.heights().len()];
    let mut placed = vec![false; n_tris];

    let set = |pos: &mut Vec<Option<[R; 2]>>, v: usize, p: [R; 2]| -> Result<(), EmbedError<R>> {
        match pos[v] {
            None => {
                pos[v] = Some(p);
                Ok(())
            }
            Some(q) => {
                let mismatch = geom::dist(p, q);
                let scale = R::one() + geom::norm(q);
                if mismatch > closure_tol * scale {
                    Err(EmbedError::ClosureFailure {
                        vertex: v,
                        mismatch,
                    })
                } else {
                    Ok(())
                }
            }
        }
    };

    // Seed: corner 0 at the origin, corner 1 on the positive x-axis.
    let seed_tri = &t.tris()[seed];
    let lp = cap.prisms()[seed].projected;
    let p0 = [R::zero(), R::zero()];
    let p1 = [lp[2], R::zero()];
    let p2 = third_point(p0, p1, lp[1], lp[0], true);
    set(&mut pos, seed_tri.v[0], p0)?;
    set(&mut pos, seed_tri.v[1], p1)?;
    set(&mut pos, seed_tri.v[2], p2)?;
    placed[seed] = true;
    let mut queue = std::collections::VecDeque::from([seed]);

    while let Some(ti) = queue.pop_front() {
        for s in 0..3 {
            let side = Side::new(ti, s);
            let Some(o) = t.opposite(side) else { continue };
            if placed[o.tri] || !include[o.tri] {
                // Re-reaching a placed triangle re-checks its vertices via
                // `set` when we placed it; nothing to do here.
                continue;
            }
            let otri = &t.tris()[o.tri];
            let olp = cap.prisms()[o.tri].projected;
            let (sa, ea) = side_corners(o.side);
            // The shared side of the neighbour runs end-to-start relative to
            // ours; both endpoints already have positions.
            let q_start = pos[otri.v[sa]].ok_or(EmbedError::UnsupportedWall(
                "neighbour endpoint unplaced".into(),
            ))?;
            let q_end = pos[otri.v[ea]].ok_or(EmbedError::UnsupportedWall(
                "neighbour endpoint unplaced".into(),
            ))?;
            let apex = third_point(
                q_start,
                q_end,
                olp[(o.side + 2) % 3],
                olp[(o.side + 1) % 3],
                true,
            );
            set(&mut pos, otri.v[o.side], apex)?;
            placed[o.tri] = true;
            queue.push_back(o.tri);
        }
    }
    for ti in 0..n_tris {
        if include[ti] && !placed[ti] {
            return Err(EmbedError::DisconnectedInterior);
        }
    }
    Ok(pos)
}

/// Convex hull (counter-clockwise) of the points, with points lying on hull
/// edges inserted into the cycle so boundary vertices are never dropped.
fn hull_with_collinear<R: Real>(pts: &[[R; 2]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .partial_cmp(&pts[b][0])
            .unwrap()
            .then(pts[a][1].partial_cmp(&pts[b][1]).unwrap())
    });
    idx.dedup_by(|&mut a, &mut b| geom::dist(pts[a], pts[b]) < R::of(1e-12));
    if idx.len() <= 2 {
        return idx;
    }
    let turn = |o: usize, a: usize, b: usize| -> R {
        geom::cross(geom::sub(pts[a], pts[o]), geom::sub(pts[b], pts[o]))
    };
    let scale = idx
        .iter()
        .fold(R::zero(), |m, &i| m.max(pts[i][0].abs().max(pts[i][1].abs())))
        .max(R::one());
    let eps = scale * scale * R::of(1e-12);
    // Strict hull corners first.
    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    let corners = lower;
    // Insert points sitting on hull edges, ordered along each edge.
    let mut cycle: Vec<usize> = Vec::new();
    let on_hull: std::collections::BTreeSet<usize> = corners.iter().copied().collect();
    for k in 0..corners.len() {
        let a = corners[k];
        let b = corners[(k + 1) % corners.len()];
        cycle.push(a);
        let dir = geom::sub(pts[b], pts[a]);
        let len = geom::norm(dir);
        let mut onto: Vec<(R, usize)> = idx
            .iter()
            .copied()
            .filter(|&p| !on_hull.contains(&p))
            .filter_map(|p| {
                let rel = geom::sub(pts[p], pts[a]);
                let off = geom::cross(dir, rel).abs() / len;
                let along = geom::dot(dir, rel) / len;
                if off <= R::of(1e-9) * scale && along > R::zero() && along < len {
                    Some((along, p))
                } else {
                    None
                }
            })
            .collect();
        onto.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        cycle.extend(onto.into_iter().map(|(_, p)| p));
    }
    cycle
}

fn develop_3d<R: Real>(cap: &CapState<R>) -> Result<EmbeddedCap<R>, EmbedError<R>> {
    let t = cap.triangulation();
    let walls = wall_flags(cap);
    let roof: Vec<bool> = walls.iter().map(|&w| !w).collect();
    let pos2 = develop_positions(cap, &roof, R::of(CLOSURE_TOL))?;

    // Every wall vertex must have been placed through the roof.
    for (ti, tri) in t.tris().iter().enumerate() {
        if walls[ti] {
            for &v in &tri.v {
                if pos2[v].is_none() {
                    return Err(EmbedError::UnsupportedWall(format!(
                        "vertex {v} lies only on degenerate prisms"
                    )));
                }
            }
        }
    }

    let mut vertices = Vec::with_capacity(cap.heights().len());
    for v in 0..cap.heights().len() {
        let p = pos2[v].unwrap_or([R::nan(), R::nan()]);
        vertices.push([p[0], p[1], cap.heights()[v]]);
    }

    // Base polygon: hull of the placed projections. Corners that are not
    // height-zero metric vertices are projections of ridge vertices and
    // become extra base points.
    let placed: Vec<(usize, [R; 2])> = (0..vertices.len())
        .filter_map(|v| pos2[v].map(|p| (v, p)))
        .collect();
    let plane_pts: Vec<[R; 2]> = placed.iter().map(|&(_, p)| p).collect();
    let hull = hull_with_collinear(&plane_pts);

    let mut extra: Vec<[R; 3]> = Vec::new();
    let scale = plane_pts
        .iter()
        .fold(R::one(), |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let mut base_face: Vec<usize> = Vec::new();
    let mut hull_points: Vec<[R; 2]> = Vec::new();
    for &k in &hull {
        let (v, p) = placed[k];
        hull_points.push(p);
        if cap.heights()[v].abs() <= R::of(1e-12) {
            base_face.push(v);
        } else {
            // Projection of a ridge vertex: a new base corner.
            let idx = vertices.len() + extra.len();
            extra.push([p[0], p[1], R::zero()]);
            base_face.push(idx);
        }
    }

    // Roof faces.
    let mut upper_faces = Vec::new();
    for (ti, tri) in t.tris().iter().enumerate() {
        if !walls[ti] {
            upper_faces.push([tri.v[0], tri.v[1], tri.v[2]]);
        }
    }

    // Wall faces: fan over the folded base path.
    let mut wall_faces = Vec::new();
    let mut edge_lengths = vec![R::zero(); cap.edges().len()];
    for (e_idx, e) in cap.edges().iter().enumerate() {
        let (u, v) = e.ends;
        if u == v {
            // A loop edge's length is not a function of vertex positions.
            edge_lengths[e_idx] = R::nan();
            continue;
        }
        let (pu, pv) = (vertices[u], vertices[v]);
        edge_lengths[e_idx] = ((pu[0] - pv[0]) * (pu[0] - pv[0])
            + (pu[1] - pv[1]) * (pu[1] - pv[1])
            + (pu[2] - pv[2]) * (pu[2] - pv[2]))
            .sqrt();
    }
    for (ti, tri) in t.tris().iter().enumerate() {
        if !walls[ti] {
            continue;
        }
        // The base side has both endpoints at height zero.
        let htol = R::of(1e-9);
        let base_side = (0..3).find(|&s| {
            let (a, b) = side_corners(s);
            cap.heights()[tri.v[a]].abs() <= htol && cap.heights()[tri.v[b]].abs() <= htol
        });
        let Some(bs) = base_side else {
            return Err(EmbedError::UnsupportedWall(format!(
                "wall prism {ti} has no base-level side"
            )));
        };
        let (ca, cb) = side_corners(bs);
        let (va, vb, vtop) = (tri.v[ca], tri.v[cb], tri.v[bs]);
        let len = tri.len[bs];
        let pa = pos2[va].unwrap();
        let pb = pos2[vb].unwrap();

        // Fold points: corners of the base polygon along the arc from a to b
        // whose length matches the intrinsic base side.
        let path = base_arc(&hull_points, pa, pb, len)?;
        let mut chain: Vec<usize> = vec![va];
        for q in &path {
            // Reuse an existing point at this position when possible.
            let found = base_face
                .iter()
                .find(|&&i| {
                    let p = if i < vertices.len() {
                        vertices[i]
                    } else {
                        extra[i - vertices.len()]
                    };
                    geom::dist([p[0], p[1]], *q) <= R::of(1e-9) * scale
                })
                .copied();
            let idx = match found {
                Some(i) => i,
                None => {
                    let idx = vertices.len() + extra.len();
                    extra.push([q[0], q[1], R::zero()]);
                    idx
                }
            };
            chain.push(idx);
        }
        chain.push(vb);
        for w in chain.windows(2) {
            wall_faces.push([w[0], w[1], vtop]);
        }
        // The base edge of this wall measures along the folded path.
        let side_ref = Side::new(ti, bs);
        let e_idx = cap.edge_of_side(side_ref);
        let mut along = R::zero();
        let all: Vec<[R; 3]> = chain
            .iter()
            .map(|&i| {
                if i < vertices.len() {
                    vertices[i]
                } else {
                    extra[i - vertices.len()]
                }
            })
            .collect();
        for w in all.windows(2) {
            along = along
                + geom::dist([w[0][0], w[0][1]], [w[1][0], w[1][1]]);
        }
        edge_lengths[e_idx] = along;
    }

    // Base polygon faces downward: reverse the counter-clockwise hull.
    base_face.reverse();

    Ok(EmbeddedCap {
        vertices,
        extra,
        upper_faces,
        wall_faces,
        base_face,
        flat2d: false,
        edge_lengths,
        wall_prisms: walls,
    })
}

/// Corners strictly between `from` and `to` along the hull arc whose length
/// matches `want`; empty when the straight chord already matches.
fn base_arc<R: Real>(
    hull: &[[R; 2]],
    from: [R; 2],
    to: [R; 2],
    want: R,
) -> Result<Vec<[R; 2]>, EmbedError<R>> {
    let tol = R::of(BASE_WALK_TOL) * want.max(R::one());
    if (geom::dist(from, to) - want).abs() <= tol {
        return Ok(Vec::new());
    }
    let n = hull.len();
    let near = |p: [R; 2]| -> Option<usize> {
        (0..n).find(|&i| geom::dist(hull[i], p) <= tol)
    };
    let (Some(i0), Some(i1)) = (near(from), near(to)) else {
        return Err(EmbedError::BaseWalkFailed { len: want });
    };
    // Walk forwards and backwards around the hull.
    for dir in [1i64, -1i64] {
        let mut total = R::zero();
        let mut cur = i0;
        let mut inner: Vec<[R; 2]> = Vec::new();
        for _ in 0..n {
            let next = ((cur as i64 + dir).rem_euclid(n as i64)) as usize;
            total = total + geom::dist(hull[cur], hull[next]);
            cur = next;
            if cur == i1 {
                break;
            }
            inner.push(hull[cur]);
        }
        if cur == i1 && (total - want).abs() <= tol {
            return Ok(inner);
        }
    }
    Err(EmbedError::BaseWalkFailed { len: want })
}

/// A fully degenerate cap: a doubled polygon standing vertically. Both
/// copies project onto the same segment. The planar development is only
/// used for ordering — residual heights within the blocked-slope tolerance
/// blow up to square-root-sized planar defects — and the line coordinates
/// are then rebuilt by chaining projected edge lengths along the polygon.
fn develop_flat<R: Real>(cap: &CapState<R>) -> Result<EmbeddedCap<R>, EmbedError<R>> {
    let all = vec![true; cap.triangulation().n_triangles()];
    let pos2 = develop_positions(cap, &all, R::of(1e-2))?;
    let n = cap.heights().len();
    let mut order: Vec<usize> = (0..n).filter(|&v| pos2[v].is_some()).collect();
    if order.len() != n {
        return Err(EmbedError::UnsupportedWall(
            "flat cap leaves vertices unplaced".into(),
        ));
    }
    // The development is collinear: use the signed coordinate along the
    // dominant direction.
    let dir = {
        let mut best = [R::one(), R::zero()];
        let mut len = R::zero();
        for v in 0..n {
            for w in 0..n {
                let d = geom::dist(pos2[v].unwrap(), pos2[w].unwrap());
                if d > len {
                    len = d;
                    let a = pos2[v].unwrap();
                    let b = pos2[w].unwrap();
                    best = [(b[0] - a[0]) / d, (b[1] - a[1]) / d];
                }
            }
        }
        best
    };
    let coord = |v: usize| geom::dot(pos2[v].unwrap(), dir);
    order.sort_by(|&a, &b| coord(a).partial_cmp(&coord(b)).unwrap());
    // Rebuild the line coordinates by walking consecutive polygon vertices
    // along their joining edges; the projected lengths are well conditioned.
    let t = cap.triangulation();
    let mut x = vec![R::zero(); n];
    for w in order.windows(2) {
        let (u, v) = (w[0], w[1]);
        let joining = cap.edges().iter().find(|e| {
            (e.ends.0 == u && e.ends.1 == v) || (e.ends.0 == v && e.ends.1 == u)
        });
        let step = match joining {
            Some(e) => {
                let len = match e.sides {
                    EdgeSides::Interior(a, _) => t.side_len(a),
                    EdgeSides::Boundary(a) => t.side_len(a),
                };
                let dh = cap.heights()[u] - cap.heights()[v];
                ((len - dh.abs()) * (len + dh.abs())).max(R::zero()).sqrt()
            }
            None => coord(v) - coord(u),
        };
        x[v] = x[u] + step;
    }
    let vertices: Vec<[R; 3]> = (0..n).map(|v| [x[v], R::zero(), cap.heights()[v]]).collect();
    // The standing polygon: base endpoints at the extremes, ridge in order.
    let polygon: Vec<usize> = order.clone();
    let mut edge_lengths = vec![R::zero(); cap.edges().len()];
    for (e_idx, e) in cap.edges().iter().enumerate() {
        let (u, v) = e.ends;
        if u == v {
            edge_lengths[e_idx] = R::nan();
            continue;
        }
        let (pu, pv) = (vertices[u], vertices[v]);
        edge_lengths[e_idx] = ((pu[0] - pv[0]) * (pu[0] - pv[0])
            + (pu[2] - pv[2]) * (pu[2] - pv[2]))
            .sqrt();
    }
    Ok(EmbeddedCap {
        vertices,
        extra: Vec::new(),
        upper_faces: vec![],
        wall_faces: vec![],
        base_face: polygon,
        flat2d: true,
        edge_lengths,
        wall_prisms: vec![true; cap.triangulation().n_triangles()],
    })
}

/// Isometry report: embedded edge lengths against the intrinsic metric and
/// angle closure at the interior vertices.
#[derive(Debug, Clone)]
pub struct IsometryReport<R> {
    /// Max `|embedded − intrinsic| / intrinsic` over all cap edges.
    pub max_edge_rel_err: R,
    pub worst_edge: Option<(usize, usize)>,
    /// Max deviation of the summed face angles from the metric cone angle
    /// over interior vertices (radians).
    pub max_cone_angle_err: R,
    /// Max deviation of the projected link from `2π − κ` over interior
    /// vertices (radians).
    pub max_link_err: R,
    /// Loop edges, whose length is not a function of vertex positions and
    /// is therefore not compared; the angle closure still covers them.
    pub skipped_loop_edges: usize,
}

impl<R: Real> IsometryReport<R> {
    pub fn within(&self, edge_rel: R, angle_abs: R) -> bool {
        self.max_edge_rel_err <= edge_rel
            && self.max_cone_angle_err <= angle_abs
            && self.max_link_err <= angle_abs
    }
}

/// Verifies that the embedded cap realizes the disk metric: every edge
/// length is reproduced and the faces close up around interior vertices.
pub fn verify_isometry<R: Real>(
    emb: &EmbeddedCap<R>,
    cap: &CapState<R>,
    disk: &MetricDisk<R>,
) -> IsometryReport<R> {
    let t = cap.triangulation();
    let mut max_edge = R::zero();
    let mut worst = None;
    let mut skipped = 0;
    for (e_idx, e) in cap.edges().iter().enumerate() {
        if !emb.edge_lengths[e_idx].is_finite() {
            skipped += 1;
            continue;
        }
        let intrinsic = match e.sides {
            EdgeSides::Interior(a, _) => t.side_len(a),
            EdgeSides::Boundary(a) => t.side_len(a),
        };
        let err = (emb.edge_lengths[e_idx] - intrinsic).abs() / intrinsic;
        if err > max_edge {
            max_edge = err;
            worst = Some(e.ends);
        }
    }

    // Face angles at each vertex from coordinates, both for roof and walls.
    let mut sum3d = vec![R::zero(); emb.vertices.len()];
    let angle3 = |a: [R; 3], b: [R; 3], c: [R; 3]| -> R {
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let nw = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        geom::clamp1((u[0] * w[0] + u[1] * w[1] + u[2] * w[2]) / (nu * nw)).acos()
    };
    let faces = emb.upper_faces.iter().chain(emb.wall_faces.iter());
    for f in faces {
        for c in 0..3 {
            let v = f[c];
            if v < emb.vertices.len() {
                sum3d[v] = sum3d[v]
                    + angle3(
                        emb.point(f[c]),
                        emb.point(f[(c + 1) % 3]),
                        emb.point(f[(c + 2) % 3]),
                    );
            }
        }
    }
    if emb.flat2d {
        // The polygon face is not triangulated: measure each intrinsic
        // triangle directly in its embedded (vertical-plane) coordinates.
        for tri in t.tris() {
            for c in 0..3 {
                let a = emb.vertices[tri.v[c]];
                let b = emb.vertices[tri.v[(c + 1) % 3]];
                let d = emb.vertices[tri.v[(c + 2) % 3]];
                sum3d[tri.v[c]] = sum3d[tri.v[c]] + angle3(a, b, d);
            }
        }
    }
    let angles = disk.vertex_angles();
    let mut max_cone = R::zero();
    for a in &angles {
        if !a.boundary {
            max_cone = max_cone.max((sum3d[a.vertex] - a.cone_angle).abs());
        }
    }

    // Projected link: planar angles of roof triangles plus π per wall prism,
    // against 2π − κ.
    let mut link = vec![R::zero(); emb.vertices.len()];
    for (ti, tri) in t.tris().iter().enumerate() {
        if emb.flat2d {
            continue;
        }
        for c in 0..3 {
            let v = tri.v[c];
            if emb.wall_prisms[ti] {
                // A wall contributes its collapsed projected angle.
                link[v] = link[v] + cap.prisms()[ti].omega[c];
            } else {
                let p = |w: usize| {
                    let q = emb.vertices[w];
                    [q[0], q[1]]
                };
                let u = geom::sub(p(tri.v[(c + 1) % 3]), p(v));
                let w = geom::sub(p(tri.v[(c + 2) % 3]), p(v));
                let ang = geom::clamp1(geom::dot(u, w) / (geom::norm(u) * geom::norm(w))).acos();
                link[v] = link[v] + ang;
            }
        }
    }
    let mut max_link = R::zero();
    if !emb.flat2d {
        let two_pi = R::of(2.0) * R::PI();
        for v in cap.interior_vertices() {
            let expect = two_pi - cap.kappa()[v];
            max_link = max_link.max((link[v] - expect).abs());
        }
    }

    IsometryReport {
        max_edge_rel_err: max_edge,
        worst_edge: worst,
        max_cone_angle_err: max_cone,
        max_link_err: max_link,
        skipped_loop_edges: skipped,
    }
}
