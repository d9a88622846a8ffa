//! Maximization of the total scalar curvature over the cap space.
//!
//! The functional is strictly concave on a compact convex polyhedron of
//! height vectors, so the maximizer exists and is unique, and `h = 0` is
//! always a feasible start. The ascent is a damped Newton iteration with a
//! backtracking line search and an active set on the gradient-bound
//! constraint: a vertex whose height is blocked (an incident prism at slope
//! one that steepens when the height grows) is frozen while its curvature
//! stays non-negative. Convergence is declared on the KKT residual
//! `max(|κ| inactive, (−κ)₊ active)`.
//!
//! The maximizer is classified as a classical cap by the curvature
//! conditions: `κ = 0` off the degenerate part and `κ ≥ 0` on it, with every
//! blocked vertex connected to the boundary through degenerate prisms.

use crate::cap::{feasibility, CapState, Infeasibility, InfeasibleWitness};
use crate::disk::MetricDisk;
use crate::functional::{hessian, total_scalar_curvature};
use crate::geom;
use crate::linalg::{cholesky_solve, SymMat};
use crate::Real;
use thiserror::Error;

/// A vertex counts as blocked when an incident prism it steepens has slope
/// at least `1 − ACTIVE_SLOPE_TOL`.
pub const ACTIVE_SLOPE_TOL: f64 = 1e-7;
/// Smallest line-search step before giving up.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Newton,
    Gradient,
}

#[derive(Debug, Clone)]
pub struct SolveOptions<R> {
    /// KKT residual bound, radians.
    pub tolerance: R,
    pub max_iterations: usize,
    pub method: Method,
    /// Line-search shrink factor in (0, 1).
    pub shrink: R,
    /// Starting heights; zeros (always feasible) when absent. An infeasible
    /// start is halved towards zero until feasible.
    pub initial: Option<Vec<R>>,
    /// Log one `iter=…` line per iteration to standard error.
    pub verbose: bool,
}

impl<R: Real> Default for SolveOptions<R> {
    fn default() -> Self {
        Self {
            tolerance: R::of(1e-8),
            max_iterations: 10_000,
            method: Method::Newton,
            shrink: R::of(0.5),
            initial: None,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Zero gradient inside the cap space.
    InteriorOptimum,
    /// Optimum with blocked vertices on the boundary of the cap space.
    BoundaryOptimum,
    /// Iteration budget exhausted or the line search stalled; the best cap
    /// found is returned.
    MaxIterations,
}

/// Whether the maximizer is a classical convex cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// Three-dimensional classical cap; counts the degenerate prisms that
    /// form its vertical faces.
    ClassicalCap3D { degenerate_prisms: usize },
    /// Every prism degenerate: a doubled polygon standing on its base side.
    ClassicalCapFlat2D,
    /// Curvature conditions failed, which for a true maximizer can only be
    /// numerical failure.
    NotClassical(String),
}

#[derive(Debug, Error)]
pub enum SolveError<R: Real> {
    #[error("invalid disk: {0}")]
    InvalidDisk(String),
    #[error("initial heights are infeasible: {0}")]
    BadInitial(Infeasibility<R>),
    #[error("line search cannot restore feasibility above step {MIN_STEP}")]
    InternalInfeasible,
    #[error(
        "convex-face assertion failed at vertex {vertex}: κ = {kappa} ≤ 0 \
         but a face angle is {angle} ≥ π (feasibility bug)"
    )]
    ConvexFaceViolation { vertex: usize, kappa: R, angle: R },
}

#[derive(Debug, Clone)]
pub struct SolveResult<R> {
    pub cap: CapState<R>,
    pub status: SolveStatus,
    pub kkt_residual: R,
    pub s_value: R,
    pub iterations: usize,
    pub classification: Classification,
    /// Blocked interior vertices at the solution.
    pub active: Vec<usize>,
}

/// Blocked interior vertices: some incident prism has slope `≥ 1 − tol`
/// and raising the vertex raises that slope.
pub fn active_set<R: Real>(cap: &CapState<R>) -> Vec<bool> {
    let n = cap.heights().len();
    let mut active = vec![false; n];
    let threshold = R::of(1.0 - ACTIVE_SLOPE_TOL);
    for (ti, tri) in cap.triangulation().tris().iter().enumerate() {
        if cap.slope(ti) < threshold {
            continue;
        }
        let p = geom::layout_triangle(&tri.len);
        let h = [
            cap.heights()[tri.v[0]],
            cap.heights()[tri.v[1]],
            cap.heights()[tri.v[2]],
        ];
        let g = geom::linear_gradient(&p, &h);
        for c in 0..3 {
            let v = tri.v[c];
            if cap.is_boundary(v) {
                continue;
            }
            // Basis gradient of corner c: slope of the interpolant that is 1
            // at c and 0 at the others. d(|g|²)/dh_c = 2 g·g_c.
            let mut e = [R::zero(); 3];
            e[c] = R::one();
            let gc = geom::linear_gradient(&p, &e);
            if geom::dot(g, gc) >= R::zero() {
                active[v] = true;
            }
        }
    }
    active
}

/// KKT residual: `|κ|` over free vertices, `(−κ)₊` over blocked ones.
pub fn kkt_residual<R: Real>(cap: &CapState<R>, active: &[bool]) -> R {
    let mut r = R::zero();
    for v in cap.interior_vertices() {
        let k = cap.kappa()[v];
        r = r.max(if active[v] { (-k).max(R::zero()) } else { k.abs() });
    }
    r
}

/// Face angles at `v`: corner angles summed between consecutive Γ-edges
/// (strictly convex or boundary) around the vertex.
fn face_angles_at<R: Real>(cap: &CapState<R>, v: usize) -> Vec<R> {
    let t = cap.triangulation();
    let mut corners = Vec::new();
    for (ti, tri) in t.tris().iter().enumerate() {
        for c in 0..3 {
            if tri.v[c] == v {
                corners.push((ti, c));
            }
        }
    }
    if corners.is_empty() {
        return Vec::new();
    }
    // Walk to a starting corner: after a Γ-edge, or a boundary side.
    let is_gamma_crossing = |ti: usize, c: usize| -> bool {
        // The side crossed by corner_next from (ti, c).
        let s = crate::trian::Side::new(ti, (c + 2) % 3);
        match t.opposite(s) {
            None => true,
            Some(_) => cap.strictly_convex(cap.edge_of_side(s)),
        }
    };
    let start = {
        let mut cur = corners[0];
        let mut hops = 0;
        loop {
            // Move backwards until the previous crossing is a Γ edge or the
            // boundary.
            let s_prev = crate::trian::Side::new(cur.0, (cur.1 + 1) % 3);
            let prev_is_gamma = match t.opposite(s_prev) {
                None => true,
                Some(_) => cap.strictly_convex(cap.edge_of_side(s_prev)),
            };
            if prev_is_gamma {
                break cur;
            }
            cur = t.corner_prev(cur.0, cur.1).unwrap();
            hops += 1;
            if hops > corners.len() {
                // No Γ edge at all around an interior vertex: one face.
                break cur;
            }
        }
    };
    let mut faces = Vec::new();
    let mut acc = R::zero();
    let mut cur = start;
    for _ in 0..corners.len() {
        acc = acc + t.corner_angle(cur.0, cur.1);
        if is_gamma_crossing(cur.0, cur.1) {
            faces.push(acc);
            acc = R::zero();
        }
        match t.corner_next(cur.0, cur.1) {
            Some(next) => cur = next,
            None => break,
        }
    }
    if acc > R::zero() {
        faces.push(acc);
    }
    faces
}

/// Whenever `κᵢ ≤ 0` at a singular vertex, every face of the cap incident to
/// `i` must have angle below π there; a violation indicates a feasibility
/// bug. Regular (zero-defect) listed vertices are exempt: a flat vertex
/// inside a flat face legitimately sees a full `2π` face.
fn assert_convex_faces<R: Real>(cap: &CapState<R>, defects: &[R]) -> Result<(), SolveError<R>> {
    let bound = R::PI() + R::of(1e-9);
    let singular = R::of(crate::disk::SINGULARITY_TOL);
    for v in cap.interior_vertices() {
        let k = cap.kappa()[v];
        if k <= R::zero() && defects[v] > singular {
            for angle in face_angles_at(cap, v) {
                if angle >= bound {
                    return Err(SolveError::ConvexFaceViolation {
                        vertex: v,
                        kappa: k,
                        angle,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Pushes each blocked vertex onto the exact constraint boundary by
/// bisecting the largest feasible height increase. Near a wall the
/// curvature varies like the square root of the remaining gap, so the
/// active-set stop alone leaves κ short by ~1e-3; closing the gap to
/// rounding makes the degenerate prisms exact and their angles snap to the
/// wall limits.
fn polish_boundary<R: Real>(
    disk: &MetricDisk<R>,
    h: &mut Vec<R>,
    cap: &mut CapState<R>,
    tol: R,
) {
    for _sweep in 0..3 {
        let active = active_set(cap);
        let mut changed = false;
        let vertices: Vec<usize> = cap.interior_vertices().filter(|&v| active[v]).collect();
        for v in vertices {
            if cap.kappa()[v] < -tol {
                continue;
            }
            // Find an infeasible upper bound for the increment.
            let mut hi = R::of(1e-7);
            let mut feasible_hi = false;
            for _ in 0..40 {
                let mut trial = h.clone();
                trial[v] = trial[v] + hi;
                if feasibility(disk, &trial, Some(cap.triangulation())).is_ok() {
                    feasible_hi = true;
                    hi = hi * R::of(2.0);
                } else {
                    feasible_hi = false;
                    break;
                }
            }
            if feasible_hi {
                continue;
            }
            let mut lo = R::zero();
            for _ in 0..80 {
                let mid = (lo + hi) / R::of(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                let mut trial = h.clone();
                trial[v] = trial[v] + mid;
                if feasibility(disk, &trial, Some(cap.triangulation())).is_ok() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if lo > R::zero() {
                h[v] = h[v] + lo;
                match feasibility(disk, h, Some(cap.triangulation())) {
                    // A push that turns the curvature negative means the
                    // optimum is interior in this coordinate after all (a
                    // nearly-vertical but not vertical face); undo it.
                    Ok(next) if next.kappa()[v] >= -tol => {
                        *cap = next;
                        changed = true;
                    }
                    _ => {
                        h[v] = h[v] - lo;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// First-order lift of a direction to the regular (zero-defect) vertices.
///
/// A flat vertex is pinned to the interpolation of its neighbours: its star
/// develops to a full 2π fan, the vertex sits inside the neighbour polygon,
/// and any feasible motion moves it by the matching barycentric combination.
/// Chains of flat vertices are resolved by fixed-point sweeps.
fn lift_flat_vertices<R: Real>(cap: &CapState<R>, defects: &[R], d: &mut [R]) {
    let singular = R::of(crate::disk::SINGULARITY_TOL);
    let flats: Vec<usize> = cap
        .interior_vertices()
        .filter(|&v| defects[v] <= singular)
        .collect();
    if flats.is_empty() {
        return;
    }
    let t = cap.triangulation();
    // Barycentric weights of each flat vertex in its developed star.
    let mut weights: Vec<(usize, Vec<(usize, R)>)> = Vec::new();
    for &v in &flats {
        // Walk the fan once around v collecting neighbours in order.
        let start = (0..t.n_triangles())
            .flat_map(|ti| (0..3).map(move |c| (ti, c)))
            .find(|&(ti, c)| t.tris()[ti].v[c] == v)
            .expect("vertex has a corner");
        let mut ring: Vec<([R; 2], usize)> = Vec::new();
        let mut angle = R::zero();
        let mut cur = start;
        loop {
            let (ti, c) = cur;
            let tri = &t.tris()[ti];
            // The edge at the current accumulated angle points to the corner
            // behind the forthcoming wedge; the wedge then rotates onto the
            // edge shared with the next corner of the fan.
            let nb = tri.v[(c + 2) % 3];
            let r = tri.len[(c + 1) % 3];
            ring.push(([r * angle.cos(), r * angle.sin()], nb));
            angle = angle + t.corner_angle(ti, c);
            match t.corner_next(ti, c) {
                Some(next) if next != start => cur = next,
                _ => break,
            }
        }
        // Find a fan triangle of the neighbour polygon containing the origin
        // and take its barycentric weights.
        let mut found = None;
        'search: for k0 in 0..ring.len() {
            for k in 1..ring.len() - 1 {
                let a = ring[k0].0;
                let b = ring[(k0 + k) % ring.len()].0;
                let c = ring[(k0 + k + 1) % ring.len()].0;
                let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                if det.abs() < R::of(1e-12) {
                    continue;
                }
                let l1 = ((b[0] - R::zero()) * (c[1] - R::zero())
                    - (b[1] - R::zero()) * (c[0] - R::zero()))
                    / det;
                let l2 = ((c[0]) * (a[1]) - (c[1]) * (a[0])) / det;
                let l3 = ((a[0]) * (b[1]) - (a[1]) * (b[0])) / det;
                let eps = R::of(-1e-9);
                if l1 > eps && l2 > eps && l3 > eps {
                    found = Some(vec![
                        (ring[k0].1, l1),
                        (ring[(k0 + k) % ring.len()].1, l2),
                        (ring[(k0 + k + 1) % ring.len()].1, l3),
                    ]);
                    break 'search;
                }
            }
        }
        if let Some(w) = found {
            weights.push((v, w));
        }
    }
    // Fixed-point sweeps resolve flats referencing other flats.
    for _ in 0..60 {
        let mut delta = R::zero();
        for (v, w) in &weights {
            let lifted = w
                .iter()
                .fold(R::zero(), |acc, &(nb, lam)| acc + lam * d[nb]);
            delta = delta.max((lifted - d[*v]).abs());
            d[*v] = lifted;
        }
        if delta <= R::of(1e-15) {
            break;
        }
    }
}

/// Bends a full step `h + d` back into the cap space by successively
/// restoring the violated inequalities its witnesses report: a too-high far
/// vertex of a quadrilateral drops onto the extending plane (or, when it is
/// pinned, the plane is raised through its positive coefficients), a
/// violated loop inequality lifts the enclosed vertex, and a gradient-bound
/// violation contracts the step. Returns a direction whose full step is
/// feasible — and with it every backtracked fraction, by convexity of the
/// cap space — or `None` when the repair loop does not settle.
fn repair_direction<R: Real>(
    disk: &MetricDisk<R>,
    h: &[R],
    d0: &[R],
    warm: &CapState<R>,
) -> Option<Vec<R>> {
    let mut d = d0.to_vec();
    let rounds = 40 * disk.n_vertices().max(4);
    for _ in 0..rounds {
        let trial: Vec<R> = h
            .iter()
            .zip(d.iter())
            .map(|(&hv, &dv)| (hv + dv).max(R::zero()))
            .collect();
        match feasibility(disk, &trial, Some(warm.triangulation())) {
            Ok(_) => return Some(d),
            Err(Infeasibility::Witness(InfeasibleWitness::ConcaveQuad {
                far,
                tri,
                coeffs,
                ext,
                h_far,
                ..
            })) => {
                let deficit = h_far - ext;
                if deficit <= R::zero() {
                    return None;
                }
                if !disk.is_boundary(far) && trial[far] - deficit >= -R::of(1e-15) {
                    d[far] = d[far] - deficit;
                } else {
                    // Raise the extending plane through its movable
                    // positive-coefficient vertices, least-norm.
                    let mut norm2 = R::zero();
                    for k in 0..3 {
                        if !disk.is_boundary(tri[k]) && coeffs[k] > R::zero() {
                            norm2 = norm2 + coeffs[k] * coeffs[k];
                        }
                    }
                    if norm2 <= R::zero() {
                        return None;
                    }
                    for k in 0..3 {
                        if !disk.is_boundary(tri[k]) && coeffs[k] > R::zero() {
                            d[tri[k]] = d[tri[k]] + coeffs[k] * deficit / norm2;
                        }
                    }
                }
            }
            Err(Infeasibility::Witness(InfeasibleWitness::ClosedGeodesic {
                enclosed,
                h_enclosed,
                h_base,
                ..
            })) => {
                if disk.is_boundary(enclosed) {
                    return None;
                }
                d[enclosed] = d[enclosed] + (h_base - h_enclosed);
            }
            Err(
                Infeasibility::GradientBoundViolated { .. }
                | Infeasibility::VerticalEdgePrism { .. }
                | Infeasibility::Prism(_),
            ) => {
                let mut largest = R::zero();
                for x in d.iter_mut() {
                    *x = *x * R::of(0.5);
                    largest = largest.max(x.abs());
                }
                if largest < R::of(1e-15) {
                    return None;
                }
            }
            Err(_) => return None,
        }
    }
    None
}

/// Ascent direction: Newton on the free block with gradient fallback, plus
/// downhill moves for blocked vertices with negative curvature. Regular
/// vertices follow their neighbours.
fn direction<R: Real>(
    cap: &CapState<R>,
    active: &[bool],
    defects: &[R],
    tol: R,
    method: Method,
) -> Vec<R> {
    let n = cap.heights().len();
    let singular = R::of(crate::disk::SINGULARITY_TOL);
    let mut d = vec![R::zero(); n];
    let free: Vec<usize> = cap
        .interior_vertices()
        .filter(|&v| !active[v] && defects[v] > singular)
        .collect();
    for v in cap.interior_vertices() {
        if active[v] && cap.kappa()[v] < -tol {
            d[v] = cap.kappa()[v];
        }
    }
    if free.is_empty() {
        lift_flat_vertices(cap, defects, &mut d);
        return d;
    }
    let newton = if method == Method::Newton {
        // The interior Hessian, falling back to the block away from
        // degenerate prisms when entries blow up at a wall.
        let assembled: Option<(Vec<usize>, SymMat<R>)> = match hessian(cap) {
            Ok(rep) => Some((rep.interior, rep.hessian)),
            Err(_) => Some(crate::functional::hessian_off_walls(cap)),
        };
        assembled.and_then(|(order, hess)| {
            let mut index = vec![usize::MAX; n];
            for (k, &v) in order.iter().enumerate() {
                index[v] = k;
            }
            let block: Vec<usize> = free
                .iter()
                .copied()
                .filter(|&v| index[v] != usize::MAX)
                .collect();
            if block.is_empty() {
                return None;
            }
            let m = block.len();
            let mut neg_h = SymMat::zeros(m);
            for (ri, &vi) in block.iter().enumerate() {
                for (rj, &vj) in block.iter().enumerate().skip(ri) {
                    neg_h.set(ri, rj, -hess.get(index[vi], index[vj]));
                }
            }
            let rhs: Vec<R> = block.iter().map(|&v| cap.kappa()[v]).collect();
            cholesky_solve(&neg_h, &rhs).map(|step| (block, step))
        })
    } else {
        None
    };
    match newton {
        Some((block, step)) => {
            let mut covered = vec![false; n];
            for (k, &v) in block.iter().enumerate() {
                d[v] = step[k];
                covered[v] = true;
            }
            // Free vertices outside the block (on a wall) move by gradient.
            for &v in &free {
                if !covered[v] {
                    d[v] = cap.kappa()[v];
                }
            }
        }
        None => {
            for &v in &free {
                d[v] = cap.kappa()[v];
            }
        }
    }
    lift_flat_vertices(cap, defects, &mut d);
    d
}

/// Maximizes `S` over the cap space and classifies the maximizer.
pub fn maximize<R: Real>(
    disk: &MetricDisk<R>,
    opts: &SolveOptions<R>,
) -> Result<SolveResult<R>, SolveError<R>> {
    let report = disk.validate_convexity();
    if !report.is_convex() {
        let v = &report.violations[0];
        return Err(SolveError::InvalidDisk(format!(
            "vertex {} has total angle {} ≥ {}",
            v.id, v.cone_angle, v.limit
        )));
    }

    let mut h = opts
        .initial
        .clone()
        .unwrap_or_else(|| vec![R::zero(); disk.n_vertices()]);
    let mut cap = {
        let mut tries = 0;
        loop {
            match feasibility(disk, &h, None) {
                Ok(c) => break c,
                Err(e) => {
                    tries += 1;
                    if tries > 80 || h.iter().all(|&x| x == R::zero()) {
                        return Err(SolveError::BadInitial(e));
                    }
                    for x in h.iter_mut() {
                        *x = *x * R::of(0.5);
                    }
                }
            }
        }
    };
    let mut s = total_scalar_curvature(&cap);
    let mut last_step = R::zero();
    let defects = disk.defects();
    let profile = disk.approx_boundary_distance(2);

    let mut iterations_done = opts.max_iterations;
    for iter in 0..opts.max_iterations {
        iterations_done = iter;
        assert_convex_faces(&cap, &defects)?;
        let active = active_set(&cap);
        let resid = kkt_residual(&cap, &active);
        let n_active = cap.interior_vertices().filter(|&v| active[v]).count();
        if opts.verbose {
            eprintln!(
                "iter={iter} S={s} kkt={resid} step={last_step} active={n_active}"
            );
        }
        if resid <= opts.tolerance {
            let (status, active) = if n_active == 0 {
                (SolveStatus::InteriorOptimum, active)
            } else {
                // Close the remaining gap to the blocking constraints.
                polish_boundary(disk, &mut h, &mut cap, opts.tolerance);
                s = total_scalar_curvature(&cap);
                (SolveStatus::BoundaryOptimum, active_set(&cap))
            };
            let resid = kkt_residual(&cap, &active);
            if resid > opts.tolerance {
                // Polishing moved the free curvatures; keep iterating.
                continue;
            }
            let classification = classify(&cap, opts.tolerance.max(resid));
            return Ok(SolveResult {
                active: collect_active(&cap, &active),
                cap,
                status,
                kkt_residual: resid,
                s_value: s,
                iterations: iter,
                classification,
            });
        }

        // Candidate directions in preference order. The distance profile is
        // a last resort for stiff starts: at h = 0 the Hessian vanishes
        // identically and the defect gradient may point far outside the
        // feasible cone, while the boundary-distance profile is an ascent
        // direction shaped like a cap.
        let mut candidates: Vec<Vec<R>> = Vec::new();
        candidates.push(direction(&cap, &active, &defects, opts.tolerance, opts.method));
        if opts.method != Method::Gradient {
            candidates.push(direction(
                &cap,
                &active,
                &defects,
                opts.tolerance,
                Method::Gradient,
            ));
        }
        let mut prof: Vec<R> = profile
            .iter()
            .zip(h.iter())
            .map(|(&p, &hv)| (p - hv).max(R::zero()))
            .collect();
        for v in 0..prof.len() {
            if cap.is_boundary(v) || (active[v] && cap.kappa()[v] >= -opts.tolerance) {
                prof[v] = R::zero();
            }
        }
        candidates.push(prof);

        // Bend each full step into the cap space when possible: every
        // backtracked fraction of a repaired step stays feasible. The raw
        // directions stay in play in case the repair distorts the ascent.
        let mut expanded: Vec<Vec<R>> = Vec::new();
        for d in &candidates {
            if let Some(r) = repair_direction(disk, &h, d, &cap) {
                if r != *d {
                    expanded.push(r);
                }
            }
            expanded.push(d.clone());
        }

        let mut best: Option<(Vec<R>, CapState<R>, R, R)> = None;
        let mut any_feasible = false;
        'methods: for d in &expanded {
            if d.iter().all(|&x| x == R::zero()) {
                continue;
            }
            let mut t = R::one();
            while t >= R::of(MIN_STEP) {
                let trial: Vec<R> = h
                    .iter()
                    .zip(d.iter())
                    .map(|(&hv, &dv)| (hv + t * dv).max(R::zero()))
                    .collect();
                if let Ok(cap2) = feasibility(disk, &trial, Some(cap.triangulation())) {
                    any_feasible = true;
                    let s2 = total_scalar_curvature(&cap2);
                    let active2 = active_set(&cap2);
                    let resid2 = kkt_residual(&cap2, &active2);
                    // Near the optimum the S increments sink below the float
                    // resolution of S; residual decrease is the progress
                    // measure there.
                    let noise = R::of(1e-14) * (R::one() + s.abs());
                    if s2 > s || (s2 >= s - noise && resid2 < resid * R::of(0.99)) {
                        let better = match &best {
                            None => true,
                            Some((_, _, s_best, _)) => s2 > *s_best,
                        };
                        if better {
                            best = Some((trial, cap2, s2, t));
                        }
                        // A substantial step wins outright; microscopic
                        // progress keeps lower-priority directions in play.
                        if t >= R::of(1e-6) {
                            break 'methods;
                        }
                        break;
                    }
                }
                t = t * opts.shrink;
            }
        }
        match best {
            Some((trial, cap2, s2, t)) => {
                h = trial;
                cap = cap2;
                s = s2;
                last_step = t;
            }
            None => {
                if !any_feasible {
                    return Err(SolveError::InternalInfeasible);
                }
                // Numerically stalled short of the tolerance.
                break;
            }
        }
    }

    // Stalled or out of budget: polish any blocked vertices, then report
    // the best cap found honestly.
    if active_set(&cap).iter().any(|&a| a) {
        polish_boundary(disk, &mut h, &mut cap, opts.tolerance);
        s = total_scalar_curvature(&cap);
    }
    let active = active_set(&cap);
    let resid = kkt_residual(&cap, &active);
    let status = if resid <= opts.tolerance {
        if active.iter().any(|&a| a) {
            SolveStatus::BoundaryOptimum
        } else {
            SolveStatus::InteriorOptimum
        }
    } else {
        SolveStatus::MaxIterations
    };
    let classification = classify(&cap, opts.tolerance.max(resid));
    Ok(SolveResult {
        active: collect_active(&cap, &active),
        s_value: s,
        kkt_residual: resid,
        iterations: iterations_done,
        status,
        classification,
        cap,
    })
}

fn collect_active<R: Real>(cap: &CapState<R>, active: &[bool]) -> Vec<usize> {
    cap.interior_vertices().filter(|&v| active[v]).collect()
}

/// Number of prisms at the blocked-slope threshold.
pub fn degenerate_prism_count<R: Real>(cap: &CapState<R>) -> usize {
    let threshold = R::of(1.0 - ACTIVE_SLOPE_TOL);
    (0..cap.triangulation().n_triangles())
        .filter(|&t| cap.slope(t) >= threshold)
        .count()
}

/// Classifies a converged maximizer per the curvature conditions: `κ = 0`
/// where the height is free, `κ ≥ 0` where it is blocked, and every blocked
/// vertex reaches the boundary through degenerate prisms ("height equals
/// boundary distance" read off the degenerate part).
pub fn classify<R: Real>(cap: &CapState<R>, residual: R) -> Classification {
    let threshold = R::of(1.0 - ACTIVE_SLOPE_TOL);
    let n_tris = cap.triangulation().n_triangles();
    let degenerate: Vec<bool> = (0..n_tris).map(|t| cap.slope(t) >= threshold).collect();
    let n_degenerate = degenerate.iter().filter(|&&d| d).count();
    if n_degenerate == n_tris {
        return Classification::ClassicalCapFlat2D;
    }
    let active = active_set(cap);
    for v in cap.interior_vertices() {
        let k = cap.kappa()[v];
        if active[v] {
            if k < -residual {
                return Classification::NotClassical(format!(
                    "blocked vertex {v} has κ = {k} < 0"
                ));
            }
        } else if k.abs() > residual {
            return Classification::NotClassical(format!(
                "free vertex {v} has κ = {k} ≠ 0"
            ));
        }
    }
    // Blocked vertices must sit on the degenerate part, and their wall must
    // reach the boundary.
    if n_degenerate > 0 {
        let n = cap.heights().len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let nx = p[c];
                p[c] = r;
                c = nx;
            }
            r
        }
        for (ti, tri) in cap.triangulation().tris().iter().enumerate() {
            if degenerate[ti] {
                for w in 0..2 {
                    let (a, b) = (find(&mut parent, tri.v[w]), find(&mut parent, tri.v[w + 1]));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut root_touches_boundary = vec![false; n];
        let mut on_wall = vec![false; n];
        for (ti, tri) in cap.triangulation().tris().iter().enumerate() {
            if degenerate[ti] {
                for &v in &tri.v {
                    on_wall[v] = true;
                }
            }
        }
        for v in 0..n {
            if on_wall[v] && cap.is_boundary(v) {
                let r = find(&mut parent, v);
                root_touches_boundary[r] = true;
            }
        }
        for v in cap.interior_vertices() {
            if active[v] {
                if !on_wall[v] {
                    return Classification::NotClassical(format!(
                        "blocked vertex {v} touches no degenerate prism"
                    ));
                }
                let r = find(&mut parent, v);
                if !root_touches_boundary[r] {
                    return Classification::NotClassical(format!(
                        "degenerate part at vertex {v} does not reach the boundary"
                    ));
                }
            }
        }
    }
    Classification::ClassicalCap3D {
        degenerate_prisms: n_degenerate,
    }
}
