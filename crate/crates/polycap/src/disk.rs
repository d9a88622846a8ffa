//! Intrinsic convex polyhedral metrics on a disk.
//!
//! The input is a bag of Euclidean triangles with explicit side gluings.
//! Validation checks that the glued complex is a disk, that glued lengths
//! agree, that every triangle is non-degenerate, that the metric is convex
//! (interior cone angles below `2π`, boundary angles below `π`), and that
//! there is at least one interior and one boundary singularity — metrics
//! without them reduce to planar cases this crate deliberately rejects.

use crate::trian::{Side, Tri, Triangulation, TrianError};
use crate::Real;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Defect below which a listed vertex is treated as regular (flat).
pub const SINGULARITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DiskError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(i64),
    #[error("triangle {tri} references unknown vertex id {id}")]
    UnknownVertex { tri: usize, id: i64 },
    #[error(transparent)]
    Gluing(#[from] TrianError),
    #[error("vertex {id} is {place} but carries the opposite boundary flag")]
    BoundaryFlagMismatch { id: i64, place: &'static str },
    #[error("metric has no interior singularity (angle defect above {SINGULARITY_TOL})")]
    NoInteriorSingularity,
    #[error("metric has no boundary singularity (angle defect above {SINGULARITY_TOL})")]
    NoBoundarySingularity,
}

/// A validated convex Euclidean polyhedral metric on a disk.
#[derive(Debug, Clone)]
pub struct MetricDisk<R> {
    ids: Vec<i64>,
    boundary: Vec<bool>,
    trian: Triangulation<R>,
}

/// Total cone angle and defect of one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexAngles<R> {
    pub vertex: usize,
    pub id: i64,
    pub boundary: bool,
    /// Sum of incident triangle corner angles.
    pub cone_angle: R,
    /// `2π − cone_angle` at interior vertices, `π − cone_angle` at boundary ones.
    pub defect: R,
}

/// One vertex whose total angle violates the convexity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityViolation<R> {
    pub vertex: usize,
    pub id: i64,
    pub boundary: bool,
    pub cone_angle: R,
    /// `2π` for interior vertices, `π` for boundary ones.
    pub limit: R,
}

/// Convexity report: empty violation list means the metric is convex.
#[derive(Debug, Clone)]
pub struct ConvexityReport<R> {
    pub angles: Vec<VertexAngles<R>>,
    pub violations: Vec<ConvexityViolation<R>>,
}

impl<R> ConvexityReport<R> {
    pub fn is_convex(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<R: Real> MetricDisk<R> {
    /// Builds and fully validates a disk from raw parts. `ids` and
    /// `boundary` are parallel; triangle corners refer to positions in `ids`.
    pub fn new(
        ids: Vec<i64>,
        boundary: Vec<bool>,
        tris: Vec<Tri<R>>,
        gluings: &[(Side, Side)],
    ) -> Result<Self, DiskError> {
        assert_eq!(ids.len(), boundary.len());
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(DiskError::DuplicateVertex(w[0]));
            }
        }
        let trian = Triangulation::new(ids.len(), tris, gluings)?;
        trian.validate_disk()?;
        let computed = trian.boundary_vertices();
        for (v, (&flag, &real)) in boundary.iter().zip(computed.iter()).enumerate() {
            if flag != real {
                return Err(DiskError::BoundaryFlagMismatch {
                    id: ids[v],
                    place: if real { "on the boundary" } else { "interior" },
                });
            }
        }
        let disk = Self {
            ids,
            boundary,
            trian,
        };
        let angles = disk.vertex_angles();
        let tol = R::of(SINGULARITY_TOL);
        if !angles.iter().any(|a| !a.boundary && a.defect > tol) {
            return Err(DiskError::NoInteriorSingularity);
        }
        if !angles.iter().any(|a| a.boundary && a.defect > tol) {
            return Err(DiskError::NoBoundarySingularity);
        }
        Ok(disk)
    }

    pub fn n_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[i64] {
        &self.ids
    }

    pub fn id_of(&self, v: usize) -> i64 {
        self.ids[v]
    }

    pub fn index_of(&self, id: i64) -> Option<usize> {
        self.ids.iter().position(|&i| i == id)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ids.len()).filter(move |&v| !self.boundary[v])
    }

    /// The reference triangulation the metric was given with.
    pub fn triangulation(&self) -> &Triangulation<R> {
        &self.trian
    }

    /// Cone angle and defect of every vertex.
    pub fn vertex_angles(&self) -> Vec<VertexAngles<R>> {
        let mut cone = vec![R::zero(); self.ids.len()];
        for t in 0..self.trian.n_triangles() {
            for c in 0..3 {
                let v = self.trian.tris()[t].v[c];
                cone[v] = cone[v] + self.trian.corner_angle(t, c);
            }
        }
        cone.iter()
            .enumerate()
            .map(|(v, &angle)| {
                let full = if self.boundary[v] { R::PI() } else { R::of(2.0) * R::PI() };
                VertexAngles {
                    vertex: v,
                    id: self.ids[v],
                    boundary: self.boundary[v],
                    cone_angle: angle,
                    defect: full - angle,
                }
            })
            .collect()
    }

    /// Angle defect per vertex, in vertex order.
    pub fn defects(&self) -> Vec<R> {
        self.vertex_angles().into_iter().map(|a| a.defect).collect()
    }

    /// Lists every vertex violating the convexity bounds (interior total
    /// angle `< 2π`, boundary total angle `< π`). A vertex with zero defect
    /// is regular, not a violation.
    pub fn validate_convexity(&self) -> ConvexityReport<R> {
        let angles = self.vertex_angles();
        let tol = R::of(SINGULARITY_TOL);
        let violations = angles
            .iter()
            .filter(|a| a.defect < -tol)
            .map(|a| ConvexityViolation {
                vertex: a.vertex,
                id: a.id,
                boundary: a.boundary,
                cone_angle: a.cone_angle,
                limit: if a.boundary { R::PI() } else { R::of(2.0) * R::PI() },
            })
            .collect();
        ConvexityReport { angles, violations }
    }

    /// Upper bound on the intrinsic distance from each vertex to the
    /// boundary, by shortest paths on a chord graph. `level` is the dyadic
    /// subdivision depth: every edge gains `2^level − 1` evenly spaced nodes,
    /// and within each triangle all nodes on its sides are joined by straight
    /// chords. Level 0 is the plain edge graph. Nested node sets make the
    /// bound monotonically non-increasing in `level`.
    pub fn approx_boundary_distance(&self, level: u32) -> Vec<R> {
        let level = level.min(10);
        let pieces = 1usize << level;
        let t = &self.trian;
        let edges = t.edges();

        // Node numbering: vertices, then per-edge interior subdivision points.
        let mut side_edge = vec![[usize::MAX; 3]; t.n_triangles()];
        for (e_idx, e) in edges.iter().enumerate() {
            match e.sides {
                crate::trian::EdgeSides::Interior(a, b) => {
                    side_edge[a.tri][a.side] = e_idx;
                    side_edge[b.tri][b.side] = e_idx;
                }
                crate::trian::EdgeSides::Boundary(a) => side_edge[a.tri][a.side] = e_idx,
            }
        }
        let nv = self.n_vertices();
        let per_edge = pieces - 1;
        let node_of = |e_idx: usize, k: usize| nv + e_idx * per_edge + (k - 1);
        let n_nodes = nv + edges.len() * per_edge;

        let mut adj: Vec<Vec<(usize, R)>> = vec![Vec::new(); n_nodes];
        let push = |adj: &mut Vec<Vec<(usize, R)>>, a: usize, b: usize, w: R| {
            adj[a].push((b, w));
            adj[b].push((a, w));
        };

        for ti in 0..t.n_triangles() {
            let tri = &t.tris()[ti];
            let p = crate::geom::layout_triangle(&tri.len);
            // Collect (node, position) for corners and side subdivisions.
            let mut nodes: Vec<(usize, [R; 2])> = Vec::with_capacity(3 * pieces);
            for c in 0..3 {
                nodes.push((tri.v[c], p[c]));
            }
            for s in 0..3 {
                let e_idx = side_edge[ti][s];
                let (ca, cb) = crate::trian::side_corners(s);
                // Subdivision point k/pieces measured from the canonical
                // start of the edge. For the second side of an interior
                // edge the parametrization reverses.
                let canonical_start_here = match edges[e_idx].sides {
                    crate::trian::EdgeSides::Interior(a, _) => a == Side::new(ti, s),
                    crate::trian::EdgeSides::Boundary(_) => true,
                };
                for k in 1..pieces {
                    let f = R::of(k as f64 / pieces as f64);
                    let f_here = if canonical_start_here { f } else { R::one() - f };
                    let pos = [
                        p[ca][0] + (p[cb][0] - p[ca][0]) * f_here,
                        p[ca][1] + (p[cb][1] - p[ca][1]) * f_here,
                    ];
                    nodes.push((node_of(e_idx, k), pos));
                }
            }
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    if nodes[i].0 != nodes[j].0 {
                        push(&mut adj, nodes[i].0, nodes[j].0, crate::geom::dist(nodes[i].1, nodes[j].1));
                    }
                }
            }
        }

        // Multi-source Dijkstra from every node on the boundary.
        let mut dist = vec![R::infinity(); n_nodes];
        let mut heap: BinaryHeap<HeapItem<R>> = BinaryHeap::new();
        let seed = |dist: &mut Vec<R>, heap: &mut BinaryHeap<HeapItem<R>>, n: usize| {
            if dist[n] > R::zero() {
                dist[n] = R::zero();
                heap.push(HeapItem(R::zero(), n));
            }
        };
        for (e_idx, e) in edges.iter().enumerate() {
            if let crate::trian::EdgeSides::Boundary(_) = e.sides {
                seed(&mut dist, &mut heap, e.ends.0);
                seed(&mut dist, &mut heap, e.ends.1);
                for k in 1..pieces {
                    seed(&mut dist, &mut heap, node_of(e_idx, k));
                }
            }
        }
        while let Some(HeapItem(d, n)) = heap.pop() {
            if d > dist[n] {
                continue;
            }
            for &(m, w) in &adj[n] {
                let nd = d + w;
                if nd < dist[m] {
                    dist[m] = nd;
                    heap.push(HeapItem(nd, m));
                }
            }
        }
        dist.truncate(nv);
        dist
    }
}

/// Min-heap item ordered by distance; scalars are finite by construction.
struct HeapItem<R>(R, usize);

impl<R: Real> PartialEq for HeapItem<R> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0 && self.1 == other.1
    }
}
impl<R: Real> Eq for HeapItem<R> {}
impl<R: Real> PartialOrd for HeapItem<R> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<R: Real> Ord for HeapItem<R> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .0
            .partial_cmp(&self.0)
            .unwrap()
            .then_with(|| other.1.cmp(&self.1))
    }
}
