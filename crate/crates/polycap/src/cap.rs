//! Generalized convex caps over a metric disk, decided by heights alone.
//!
//! A height vector determines at most one generalized convex cap: the unique
//! concave piecewise-linear extension of the heights, when it exists. The
//! flip algorithm finds it: lay out the two triangles of an interior edge in
//! the plane, test whether the height interpolant is concave across the edge,
//! and replace bad edges by the cross diagonal until none remain. Membership
//! in the cap space then further requires zero boundary heights and gradient
//! magnitude at most one on every triangle.
//!
//! Failures are reported as witnesses: a violated loop inequality
//! `h_i ≥ h_j` (a geodesic loop around `i` based at `j`), a violated
//! quadrilateral inequality `h_i ≥ ext(i)`, or an exceeded gradient bound.

use crate::disk::MetricDisk;
use crate::geom;
use crate::prism::{prism_angles, Degeneracy, PrismAngles, PrismError, PrismSpec};
use crate::trian::{side_corners, Edge, EdgeSides, Side, Tri, Triangulation};
use crate::Real;
use thiserror::Error;

/// Concavity slack: an edge is bad only when the extension test fails by
/// more than this (scaled by the local height magnitude).
pub const BAD_EDGE_SLACK: f64 = 1e-12;
/// Strict-convexity slack for flippable quadrilaterals, relative to the
/// shared edge length.
pub const QUAD_CONVEX_SLACK: f64 = 1e-12;
/// Slack on the per-triangle gradient bound `|grad h̃| ≤ 1`.
pub const GRAD_SLACK: f64 = 1e-9;
/// An interior edge is strictly convex (belongs to Γ) when `θ < π − this`.
pub const THETA_STRICT_TOL: f64 = 1e-9;

/// Witness of a height vector outside the cap space.
#[derive(Debug, Clone, PartialEq)]
pub enum InfeasibleWitness<R> {
    /// A geodesic loop around `enclosed` based at `base` demands
    /// `h[enclosed] ≥ h[base]`.
    ClosedGeodesic {
        enclosed: usize,
        base: usize,
        h_enclosed: R,
        h_base: R,
    },
    /// A concave quadrilateral demands `ext(far) ≥ h[far]`, where `ext` is
    /// the linear extension `Σ coeffs[k] · h[tri[k]]` across the edge, but
    /// the extension falls short and the edge cannot be flipped.
    ConcaveQuad {
        edge_ends: (usize, usize),
        far: usize,
        /// Vertices of the extending triangle: edge start, edge end, apex.
        tri: [usize; 3],
        /// Affine coordinates of the far position with respect to `tri`.
        coeffs: [R; 3],
        ext: R,
        h_far: R,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum ExtensionError<R: Real> {
    #[error("heights admit no concave extension: {0:?}")]
    Infeasible(InfeasibleWitness<R>),
    #[error("flip loop exceeded its iteration cap after {flips} flips")]
    IterationCapExceeded { flips: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum Infeasibility<R: Real> {
    #[error("height at boundary vertex {vertex} is {h}, expected 0")]
    BoundaryHeightNonzero { vertex: usize, h: R },
    #[error("height at vertex {vertex} is not finite")]
    NonFiniteHeight { vertex: usize },
    #[error("heights admit no concave extension: {0:?}")]
    Witness(InfeasibleWitness<R>),
    #[error("flip loop exceeded its iteration cap after {flips} flips")]
    IterationCapExceeded { flips: usize },
    #[error("gradient bound violated on triangle {tri}: |grad| = {slope}")]
    GradientBoundViolated { tri: usize, slope: R },
    #[error("triangle {tri} forms a prism with a vertical upper edge ({kind:?})")]
    VerticalEdgePrism { tri: usize, kind: Degeneracy },
    #[error(transparent)]
    Prism(#[from] PrismError),
}

#[derive(Debug, Error, PartialEq)]
pub enum FlipError {
    #[error("edge lies in a single triangle and cannot be flipped")]
    SingleTriangle,
    #[error("quadrilateral is not strictly convex (diagonal crossing at {at})")]
    NotConvex { at: f64 },
}

/// The two triangles of an interior edge unrolled into the plane: the shared
/// edge on the x-axis from `pos[0]` to `pos[1]`, one apex above, one below.
/// Boundary identifications are resolved by developing the two triangles
/// independently, so loops and multi-edges need no special cases.
#[derive(Debug, Clone)]
pub struct QuadLayout<R> {
    /// start, end, upper apex, lower apex.
    pub pos: [[R; 2]; 4],
    /// Vertex indices at those four positions.
    pub verts: [usize; 4],
}

/// Unrolls the quadrilateral around the interior edge `(a, b)`.
pub fn layout_quad<R: Real>(t: &Triangulation<R>, a: Side, b: Side) -> QuadLayout<R> {
    let ta = &t.tris()[a.tri];
    let tb = &t.tris()[b.tri];
    let base = ta.len[a.side];
    let (sa, ea) = side_corners(a.side);
    let apex_top = geom::apex_position(
        base,
        ta.len[(a.side + 2) % 3],
        ta.len[(a.side + 1) % 3],
        true,
    );
    let apex_bot = geom::apex_position(
        base,
        tb.len[(b.side + 1) % 3],
        tb.len[(b.side + 2) % 3],
        false,
    );
    QuadLayout {
        pos: [
            [R::zero(), R::zero()],
            [base, R::zero()],
            apex_top,
            apex_bot,
        ],
        verts: [ta.v[sa], ta.v[ea], ta.v[a.side], tb.v[b.side]],
    }
}

/// Whether the height interpolant fails concavity across the interior edge
/// `(a, b)`: the linear extension of the upper triangle, evaluated at the
/// lower apex, must be at least the height there.
pub fn is_bad_edge<R: Real>(t: &Triangulation<R>, h: &[R], a: Side, b: Side) -> bool {
    bad_edge_violation(t, h, a, b) > R::zero()
}

/// Positive amount by which concavity fails across the edge, zero when good.
pub fn bad_edge_violation<R: Real>(t: &Triangulation<R>, h: &[R], a: Side, b: Side) -> R {
    let q = layout_quad(t, a, b);
    let tri = [q.pos[0], q.pos[1], q.pos[2]];
    let vals = [h[q.verts[0]], h[q.verts[1]], h[q.verts[2]]];
    let ext = geom::linear_value(&tri, &vals, q.pos[3]);
    let h_far = h[q.verts[3]];
    let scale = R::one()
        + vals[0].abs().max(vals[1].abs()).max(vals[2].abs()).max(h_far.abs());
    let slack = R::of(BAD_EDGE_SLACK) * scale;
    (h_far - ext - slack).max(R::zero())
}

/// Replaces the interior edge `(a, b)` by the cross diagonal of its
/// unrolled quadrilateral. The edge must lie in two distinct triangles and
/// the quadrilateral must be strictly convex; the new diagonal length comes
/// from the planar layout.
pub fn flip_edge<R: Real>(
    t: &Triangulation<R>,
    a: Side,
    b: Side,
) -> Result<Triangulation<R>, FlipError> {
    if a.tri == b.tri {
        return Err(FlipError::SingleTriangle);
    }
    let q = layout_quad(t, a, b);
    let base = q.pos[1][0];
    let (y_top, y_bot) = (q.pos[2][1], q.pos[3][1]);
    // The new diagonal joins the apexes; it must cross the open shared edge.
    let cross_at = q.pos[2][0] + (q.pos[3][0] - q.pos[2][0]) * y_top / (y_top - y_bot);
    let slack = base * R::of(QUAD_CONVEX_SLACK);
    if !(cross_at > slack && cross_at < base - slack) {
        return Err(FlipError::NotConvex {
            at: (cross_at / base).as_f64(),
        });
    }
    let diag = geom::dist(q.pos[2], q.pos[3]);

    let ta = t.tris()[a.tri].clone();
    let tb = t.tris()[b.tri].clone();
    let (i1, i2) = (a.tri, b.tri);
    let (s1, s2) = (a.side, b.side);
    // New triangles: (A, B, D) at i1 and (A, D, C) at i2, where A, D are the
    // apexes and B, C the start and end of the old edge.
    let va = ta.v[s1];
    let vb = ta.v[(s1 + 1) % 3];
    let vc = ta.v[(s1 + 2) % 3];
    let vd = tb.v[s2];
    let new_t1 = Tri {
        v: [va, vb, vd],
        len: [tb.len[(s2 + 1) % 3], diag, ta.len[(s1 + 2) % 3]],
    };
    let new_t2 = Tri {
        v: [va, vd, vc],
        len: [tb.len[(s2 + 2) % 3], ta.len[(s1 + 1) % 3], diag],
    };

    // Where the surviving outer sides move to.
    let reloc = |side: Side| -> Side {
        if side == Side::new(i1, (s1 + 1) % 3) {
            Side::new(i2, 1)
        } else if side == Side::new(i1, (s1 + 2) % 3) {
            Side::new(i1, 2)
        } else if side == Side::new(i2, (s2 + 1) % 3) {
            Side::new(i1, 0)
        } else if side == Side::new(i2, (s2 + 2) % 3) {
            Side::new(i2, 0)
        } else {
            side
        }
    };
    let p_bd = t.opposite(Side::new(i2, (s2 + 1) % 3)).map(reloc);
    let p_ab = t.opposite(Side::new(i1, (s1 + 2) % 3)).map(reloc);
    let p_dc = t.opposite(Side::new(i2, (s2 + 2) % 3)).map(reloc);
    let p_ca = t.opposite(Side::new(i1, (s1 + 1) % 3)).map(reloc);

    let mut out = t.clone();
    out.tris[i1] = new_t1;
    out.tris[i2] = new_t2;
    out.opp[i1] = [p_bd, Some(Side::new(i2, 2)), p_ab];
    out.opp[i2] = [p_dc, p_ca, Some(Side::new(i1, 1))];
    // Restore back references from partners.
    for (side, partner) in [
        (Side::new(i1, 0), p_bd),
        (Side::new(i1, 2), p_ab),
        (Side::new(i2, 0), p_dc),
        (Side::new(i2, 1), p_ca),
    ] {
        if let Some(p) = partner {
            out.opp[p.tri][p.side] = Some(side);
        }
    }
    Ok(out)
}

/// Runs the flip algorithm: repeatedly flips the bad edge with the largest
/// concavity violation until the piecewise-linear extension of `h` is
/// concave across every interior edge. Failures return the violated
/// inequality as a witness.
pub fn pl_extension<R: Real>(
    t0: &Triangulation<R>,
    h: &[R],
) -> Result<Triangulation<R>, ExtensionError<R>> {
    assert_eq!(h.len(), t0.n_vertices());
    let cap = (10 * t0.n_triangles() * t0.n_triangles()).max(100);
    let mut t = t0.clone();
    let mut flips = 0usize;
    loop {
        // Bad edges sorted by violation, steepest first; ties by side order.
        let mut bad: Vec<(R, Side, Side)> = Vec::new();
        for e in t.edges() {
            if let EdgeSides::Interior(a, b) = e.sides {
                let viol = bad_edge_violation(&t, h, a, b);
                if viol > R::zero() {
                    bad.push((viol, a, b));
                }
            }
        }
        if bad.is_empty() {
            return Ok(t);
        }
        bad.sort_by(|x, y| {
            y.0.partial_cmp(&x.0)
                .unwrap()
                .then_with(|| (x.1, x.2).cmp(&(y.1, y.2)))
        });
        let mut flipped = false;
        for &(_, a, b) in &bad {
            if let Ok(next) = flip_edge(&t, a, b) {
                t = next;
                flips += 1;
                flipped = true;
                break;
            }
        }
        if !flipped {
            let (_, a, b) = bad[0];
            return Err(ExtensionError::Infeasible(witness(&t, h, a, b)));
        }
        if flips > cap {
            return Err(ExtensionError::IterationCapExceeded { flips });
        }
    }
}

/// Builds the violated-inequality witness for an unflippable bad edge.
fn witness<R: Real>(t: &Triangulation<R>, h: &[R], a: Side, b: Side) -> InfeasibleWitness<R> {
    if a.tri == b.tri {
        // A self-glued edge pair bounds a triangle `jij`; concavity across it
        // is the loop inequality at the enclosed vertex.
        let shared = 3 - a.side - b.side;
        let enclosed = t.tris()[a.tri].v[shared];
        let base = t.tris()[a.tri].v[a.side];
        InfeasibleWitness::ClosedGeodesic {
            enclosed,
            base,
            h_enclosed: h[enclosed],
            h_base: h[base],
        }
    } else {
        let q = layout_quad(t, a, b);
        let tri = [q.pos[0], q.pos[1], q.pos[2]];
        let vals = [h[q.verts[0]], h[q.verts[1]], h[q.verts[2]]];
        let ext = geom::linear_value(&tri, &vals, q.pos[3]);
        // Affine coordinates of the far position with respect to the
        // extending triangle (signed areas against the opposite sides).
        let area = |p: [R; 2], q1: [R; 2], r: [R; 2]| -> R {
            geom::cross(geom::sub(q1, p), geom::sub(r, p))
        };
        let det = area(tri[0], tri[1], tri[2]);
        let coeffs = [
            area(q.pos[3], tri[1], tri[2]) / det,
            area(tri[0], q.pos[3], tri[2]) / det,
            area(tri[0], tri[1], q.pos[3]) / det,
        ];
        InfeasibleWitness::ConcaveQuad {
            edge_ends: (q.verts[0], q.verts[1]),
            far: q.verts[3],
            tri: [q.verts[0], q.verts[1], q.verts[2]],
            coeffs,
            ext,
            h_far: h[q.verts[3]],
        }
    }
}

/// A generalized convex cap: heights plus the concavity-certifying
/// triangulation, with every prism angle evaluated.
#[derive(Debug, Clone)]
pub struct CapState<R> {
    heights: Vec<R>,
    boundary: Vec<bool>,
    trian: Triangulation<R>,
    edges: Vec<Edge>,
    prisms: Vec<PrismAngles<R>>,
    /// Total dihedral angle per edge index; `None` on boundary edges.
    theta: Vec<Option<R>>,
    /// Base dihedral per edge index; `None` on interior edges.
    eta: Vec<Option<R>>,
    /// Curvature `κ = 2π − ω` per vertex; NaN at boundary vertices.
    kappa: Vec<R>,
    /// Edge index per triangle side.
    side_edge: Vec<[usize; 3]>,
}

impl<R: Real> CapState<R> {
    /// Validates heights against a given triangulation and computes all
    /// angles. The triangulation must already certify concavity; use
    /// [`feasibility`] to obtain one via the flip algorithm.
    pub fn assemble(
        disk: &MetricDisk<R>,
        heights: Vec<R>,
        trian: Triangulation<R>,
    ) -> Result<Self, Infeasibility<R>> {
        assert_eq!(heights.len(), disk.n_vertices());
        for (v, &h) in heights.iter().enumerate() {
            if !h.is_finite() {
                return Err(Infeasibility::NonFiniteHeight { vertex: v });
            }
            if disk.is_boundary(v) && h != R::zero() {
                return Err(Infeasibility::BoundaryHeightNonzero { vertex: v, h });
            }
        }
        let edges = trian.edges();
        for e in &edges {
            if let EdgeSides::Interior(a, b) = e.sides {
                let viol = bad_edge_violation(&trian, &heights, a, b);
                if viol > R::zero() {
                    return Err(Infeasibility::Witness(witness(&trian, &heights, a, b)));
                }
            }
        }
        let mut prisms = Vec::with_capacity(trian.n_triangles());
        for (ti, tri) in trian.tris().iter().enumerate() {
            let spec = PrismSpec::new(
                tri.len,
                [heights[tri.v[0]], heights[tri.v[1]], heights[tri.v[2]]],
            );
            // The gradient bound is checked before prism construction so a
            // too-steep face reports as such rather than as a missing prism.
            let base = geom::layout_triangle(&tri.len);
            let slope = geom::norm(geom::linear_gradient(
                &base,
                &[heights[tri.v[0]], heights[tri.v[1]], heights[tri.v[2]]],
            ));
            if slope > R::of(1.0 + GRAD_SLACK) {
                return Err(Infeasibility::GradientBoundViolated { tri: ti, slope });
            }
            let angles = prism_angles(&spec)?;
            if matches!(angles.degeneracy, Degeneracy::TypeB | Degeneracy::TypeC) {
                return Err(Infeasibility::VerticalEdgePrism {
                    tri: ti,
                    kind: angles.degeneracy,
                });
            }
            prisms.push(angles);
        }
        let mut theta = Vec::with_capacity(edges.len());
        let mut eta = Vec::with_capacity(edges.len());
        for e in &edges {
            match e.sides {
                EdgeSides::Interior(a, b) => {
                    let th = prisms[a.tri].alpha[a.side] + prisms[b.tri].alpha[b.side];
                    theta.push(Some(th));
                    eta.push(None);
                }
                EdgeSides::Boundary(a) => {
                    theta.push(None);
                    eta.push(Some(prisms[a.tri].eta[a.side]));
                }
            }
        }
        let mut omega_sum = vec![R::zero(); disk.n_vertices()];
        for (ti, tri) in trian.tris().iter().enumerate() {
            for c in 0..3 {
                omega_sum[tri.v[c]] = omega_sum[tri.v[c]] + prisms[ti].omega[c];
            }
        }
        let two_pi = R::of(2.0) * R::PI();
        let kappa = (0..disk.n_vertices())
            .map(|v| {
                if disk.is_boundary(v) {
                    R::nan()
                } else {
                    two_pi - omega_sum[v]
                }
            })
            .collect();
        let mut side_edge = vec![[usize::MAX; 3]; trian.n_triangles()];
        for (e_idx, e) in edges.iter().enumerate() {
            match e.sides {
                EdgeSides::Interior(a, b) => {
                    side_edge[a.tri][a.side] = e_idx;
                    side_edge[b.tri][b.side] = e_idx;
                }
                EdgeSides::Boundary(a) => side_edge[a.tri][a.side] = e_idx,
            }
        }
        Ok(Self {
            heights,
            boundary: disk.boundary_flags().to_vec(),
            trian,
            edges,
            prisms,
            theta,
            eta,
            kappa,
            side_edge,
        })
    }

    /// Edge index of a triangle side.
    pub fn edge_of_side(&self, s: Side) -> usize {
        self.side_edge[s.tri][s.side]
    }

    pub fn heights(&self) -> &[R] {
        &self.heights
    }

    pub fn triangulation(&self) -> &Triangulation<R> {
        &self.trian
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn prisms(&self) -> &[PrismAngles<R>] {
        &self.prisms
    }

    pub fn theta(&self, edge: usize) -> Option<R> {
        self.theta[edge]
    }

    pub fn eta(&self, edge: usize) -> Option<R> {
        self.eta[edge]
    }

    /// Curvatures per vertex; boundary entries are NaN and must not be used.
    pub fn kappa(&self) -> &[R] {
        &self.kappa
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.heights.len()).filter(move |&v| !self.boundary[v])
    }

    pub fn slope(&self, tri: usize) -> R {
        self.prisms[tri].slope
    }

    /// Whether an interior edge is strictly convex (`θ < π − tol`).
    pub fn strictly_convex(&self, edge: usize) -> bool {
        match self.theta[edge] {
            Some(th) => th < R::PI() - R::of(THETA_STRICT_TOL),
            None => false,
        }
    }
}

/// Decides membership of `h` in the cap space and builds the full state:
/// zero boundary heights, a concave extension found by flips, gradient bound
/// on every triangle, and no vertical-edge prisms. `warm_start` seeds the
/// flip loop (the disk's own triangulation by default).
pub fn feasibility<R: Real>(
    disk: &MetricDisk<R>,
    heights: &[R],
    warm_start: Option<&Triangulation<R>>,
) -> Result<CapState<R>, Infeasibility<R>> {
    assert_eq!(heights.len(), disk.n_vertices());
    for (v, &h) in heights.iter().enumerate() {
        if !h.is_finite() {
            return Err(Infeasibility::NonFiniteHeight { vertex: v });
        }
        if disk.is_boundary(v) && h != R::zero() {
            return Err(Infeasibility::BoundaryHeightNonzero { vertex: v, h });
        }
    }
    let t0 = warm_start.unwrap_or_else(|| disk.triangulation());
    let t = pl_extension(t0, heights).map_err(|e| match e {
        ExtensionError::Infeasible(w) => Infeasibility::Witness(w),
        ExtensionError::IterationCapExceeded { flips } => {
            Infeasibility::IterationCapExceeded { flips }
        }
    })?;
    CapState::assemble(disk, heights.to_vec(), t)
}

/// The graph Γ(C): boundary edges plus strictly convex interior edges.
/// Its connectivity governs infinitesimal rigidity.
#[derive(Debug, Clone)]
pub struct GammaGraph {
    /// Vertex pairs of Γ edges (loops dropped).
    pub edges: Vec<(usize, usize)>,
    /// Component id per vertex.
    pub component_of: Vec<usize>,
    pub n_components: usize,
    /// The component containing the boundary cycle.
    pub boundary_component: usize,
    /// Components disjoint from the boundary, one indicator vector each.
    pub interior_components: Vec<usize>,
}

impl GammaGraph {
    pub fn is_connected(&self) -> bool {
        self.n_components == 1
    }

    pub fn component(&self, id: usize) -> Vec<usize> {
        self.component_of
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == id)
            .map(|(v, _)| v)
            .collect()
    }
}

/// Builds Γ(C) and its connected components.
pub fn gamma_graph<R: Real>(cap: &CapState<R>) -> GammaGraph {
    let n = cap.heights().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    let mut edges = Vec::new();
    for (e_idx, e) in cap.edges().iter().enumerate() {
        let in_gamma = match e.sides {
            EdgeSides::Boundary(_) => true,
            EdgeSides::Interior(_, _) => cap.strictly_convex(e_idx),
        };
        if in_gamma {
            let (u, v) = e.ends;
            if u != v {
                edges.push((u.min(v), u.max(v)));
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru != rv {
                    parent[ru.max(rv)] = ru.min(rv);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut n_components = 0;
    for v in 0..n {
        let r = find(&mut parent, v);
        if label[r] == usize::MAX {
            label[r] = n_components;
            n_components += 1;
        }
        label[v] = label[r];
    }
    let boundary_component = (0..n)
        .find(|&v| cap.is_boundary(v))
        .map(|v| label[v])
        .expect("disk has boundary vertices");
    let interior_components = (0..n_components)
        .filter(|&c| c != boundary_component)
        .collect();
    GammaGraph {
        edges,
        component_of: label,
        n_components,
        boundary_component,
        interior_components,
    }
}

/// Applies up to `attempts` random orientation-preserving flips, producing a
/// different geodesic triangulation of the same metric. Used to exercise
/// triangulation independence.
pub fn shuffle_triangulation<R: Real>(
    t: &Triangulation<R>,
    seed: u64,
    attempts: usize,
) -> Triangulation<R> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut out = t.clone();
    for _ in 0..attempts {
        let interior: Vec<(Side, Side)> = out
            .edges()
            .iter()
            .filter_map(|e| match e.sides {
                EdgeSides::Interior(a, b) => Some((a, b)),
                EdgeSides::Boundary(_) => None,
            })
            .collect();
        if interior.is_empty() {
            break;
        }
        let (a, b) = interior[rng.random_range(0..interior.len())];
        if let Ok(next) = flip_edge(&out, a, b) {
            out = next;
        }
    }
    out
}
