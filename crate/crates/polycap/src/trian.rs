//! Combinatorial triangulated surfaces with intrinsic edge lengths.
//!
//! Triangles carry their own side lengths; interior edges are explicit
//! gluings between triangle sides, never inferred from vertex ids, so loops
//! and multiple edges between the same vertex pair are fully supported.
//!
//! Conventions: side `s` of a triangle is opposite corner `s` and runs from
//! corner `(s+1)%3` to corner `(s+2)%3`; triangles are positively oriented
//! and a gluing identifies two sides reversing direction, so the start of one
//! side meets the end of the other.

use crate::Real;
use thiserror::Error;

/// Relative tolerance for glued side lengths.
pub const GLUE_REL_TOL: f64 = 1e-9;

/// One side of one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Side {
    pub tri: usize,
    pub side: usize,
}

impl Side {
    pub fn new(tri: usize, side: usize) -> Self {
        Self { tri, side }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.tri, self.side)
    }
}

/// A triangle: corner vertex indices and side lengths (side `s` opposite
/// corner `s`).
#[derive(Debug, Clone, PartialEq)]
pub struct Tri<R> {
    pub v: [usize; 3],
    pub len: [R; 3],
}

#[derive(Debug, Error, PartialEq)]
pub enum TrianError {
    #[error("triangle {tri} references vertex {vertex} out of range")]
    UnknownVertex { tri: usize, vertex: usize },
    #[error("triangle {tri} has non-positive or non-finite side length")]
    BadLength { tri: usize },
    #[error("triangle {tri} violates the strict triangle inequality")]
    DegenerateTriangle { tri: usize },
    #[error("gluing references invalid side {0}")]
    BadGluingRef(String),
    #[error("side {0} appears in more than one gluing")]
    SideReused(String),
    #[error("glued sides {a} and {b} have lengths {la} and {lb}")]
    GluingMismatch { a: String, b: String, la: f64, lb: f64 },
    #[error("glued sides {a} and {b} do not match vertex ids under orientation reversal")]
    CornerMismatch { a: String, b: String },
    #[error("not a disk: {0}")]
    NotADisk(String),
}

/// Triangulated surface over `nv` vertices.
#[derive(Debug, Clone)]
pub struct Triangulation<R> {
    nv: usize,
    pub(crate) tris: Vec<Tri<R>>,
    pub(crate) opp: Vec<[Option<Side>; 3]>,
}

/// Canonical reference to an edge: the glued side pair for an interior edge,
/// a single side for a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSides {
    Interior(Side, Side),
    Boundary(Side),
}

/// One edge of the surface with its endpoints and length.
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub sides: EdgeSides,
    /// Endpoint vertex indices, unordered; equal for a loop edge.
    pub ends: (usize, usize),
}

impl<R: Real> Triangulation<R> {
    /// Builds the surface and validates gluing consistency.
    pub fn new(
        nv: usize,
        tris: Vec<Tri<R>>,
        gluings: &[(Side, Side)],
    ) -> Result<Self, TrianError> {
        for (t, tri) in tris.iter().enumerate() {
            for &v in &tri.v {
                if v >= nv {
                    return Err(TrianError::UnknownVertex { tri: t, vertex: v });
                }
            }
            for &l in &tri.len {
                if !(l > R::zero()) || !l.is_finite() {
                    return Err(TrianError::BadLength { tri: t });
                }
            }
            for s in 0..3 {
                if tri.len[s] >= tri.len[(s + 1) % 3] + tri.len[(s + 2) % 3] {
                    return Err(TrianError::DegenerateTriangle { tri: t });
                }
            }
        }
        let mut opp: Vec<[Option<Side>; 3]> = vec![[None; 3]; tris.len()];
        for &(a, b) in gluings {
            for side in [a, b] {
                if side.tri >= tris.len() || side.side >= 3 {
                    return Err(TrianError::BadGluingRef(side.to_string()));
                }
            }
            if a == b {
                return Err(TrianError::BadGluingRef(a.to_string()));
            }
            for side in [a, b] {
                if opp[side.tri][side.side].is_some() {
                    return Err(TrianError::SideReused(side.to_string()));
                }
            }
            let la = tris[a.tri].len[a.side];
            let lb = tris[b.tri].len[b.side];
            if (la - lb).abs() > R::of(GLUE_REL_TOL) * la.max(lb) {
                return Err(TrianError::GluingMismatch {
                    a: a.to_string(),
                    b: b.to_string(),
                    la: la.as_f64(),
                    lb: lb.as_f64(),
                });
            }
            // Orientation-reversing identification: start of one side is the
            // end of the other.
            let (sa, ea) = side_corners(a.side);
            let (sb, eb) = side_corners(b.side);
            if tris[a.tri].v[sa] != tris[b.tri].v[eb] || tris[a.tri].v[ea] != tris[b.tri].v[sb] {
                return Err(TrianError::CornerMismatch {
                    a: a.to_string(),
                    b: b.to_string(),
                });
            }
            opp[a.tri][a.side] = Some(b);
            opp[b.tri][b.side] = Some(a);
        }
        Ok(Self { nv, tris, opp })
    }

    pub fn n_vertices(&self) -> usize {
        self.nv
    }

    pub fn n_triangles(&self) -> usize {
        self.tris.len()
    }

    pub fn tris(&self) -> &[Tri<R>] {
        &self.tris
    }

    pub fn opposite(&self, s: Side) -> Option<Side> {
        self.opp[s.tri][s.side]
    }

    pub fn side_len(&self, s: Side) -> R {
        self.tris[s.tri].len[s.side]
    }

    /// Ordered endpoints `(start, end)` of a side.
    pub fn side_ends(&self, s: Side) -> (usize, usize) {
        let (a, b) = side_corners(s.side);
        (self.tris[s.tri].v[a], self.tris[s.tri].v[b])
    }

    /// Every edge once, boundary edges included, in deterministic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for t in 0..self.tris.len() {
            for s in 0..3 {
                let side = Side::new(t, s);
                let ends = self.side_ends(side);
                match self.opp[t][s] {
                    None => out.push(Edge {
                        sides: EdgeSides::Boundary(side),
                        ends,
                    }),
                    Some(o) => {
                        if side < o {
                            out.push(Edge {
                                sides: EdgeSides::Interior(side, o),
                                ends,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn boundary_sides(&self) -> Vec<Side> {
        let mut out = Vec::new();
        for t in 0..self.tris.len() {
            for s in 0..3 {
                if self.opp[t][s].is_none() {
                    out.push(Side::new(t, s));
                }
            }
        }
        out
    }

    /// Whether each vertex lies on a boundary side.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut b = vec![false; self.nv];
        for s in self.boundary_sides() {
            let (u, v) = self.side_ends(s);
            b[u] = true;
            b[v] = true;
        }
        b
    }

    /// Rotates around the vertex at corner `(t,c)`, crossing the side that
    /// follows the corner in positive orientation. `None` at the boundary.
    pub fn corner_next(&self, t: usize, c: usize) -> Option<(usize, usize)> {
        let s = (c + 2) % 3;
        self.opp[t][s].map(|o| (o.tri, (o.side + 2) % 3))
    }

    /// Rotates the other way, crossing the side that precedes the corner.
    pub fn corner_prev(&self, t: usize, c: usize) -> Option<(usize, usize)> {
        let s = (c + 1) % 3;
        self.opp[t][s].map(|o| (o.tri, (o.side + 1) % 3))
    }

    /// Corners around each vertex in rotational order, one fan per vertex.
    /// Errors when some vertex link is not a single disk or half-disk, when
    /// the surface is disconnected, has the wrong Euler characteristic, or
    /// its boundary is not a single cycle — i.e. whenever it is not a disk.
    pub fn validate_disk(&self) -> Result<(), TrianError> {
        if self.tris.is_empty() {
            return Err(TrianError::NotADisk("no triangles".into()));
        }
        // Connectivity over triangles.
        let mut seen = vec![false; self.tris.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(t) = stack.pop() {
            for s in 0..3 {
                if let Some(o) = self.opp[t][s] {
                    if !seen[o.tri] {
                        seen[o.tri] = true;
                        stack.push(o.tri);
                    }
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(TrianError::NotADisk("glued complex is disconnected".into()));
        }
        // Euler characteristic V − E + F = 1.
        let n_bound = self.boundary_sides().len();
        let n_int = self.tris.len() * 3 - n_bound;
        if n_int % 2 != 0 {
            return Err(TrianError::NotADisk("odd number of glued sides".into()));
        }
        let e = n_int / 2 + n_bound;
        let chi = self.nv as i64 - e as i64 + self.tris.len() as i64;
        if chi != 1 {
            return Err(TrianError::NotADisk(format!(
                "Euler characteristic is {chi}, expected 1"
            )));
        }
        // Vertex links: a single cycle (interior) or a single chain (boundary).
        let mut corners_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.nv];
        for (t, tri) in self.tris.iter().enumerate() {
            for c in 0..3 {
                corners_at[tri.v[c]].push((t, c));
            }
        }
        for v in 0..self.nv {
            let total = corners_at[v].len();
            if total == 0 {
                return Err(TrianError::NotADisk(format!(
                    "vertex {v} is not used by any triangle"
                )));
            }
            let start = corners_at[v][0];
            let mut visited = 1usize;
            let mut cur = start;
            let mut closed = false;
            while let Some(next) = self.corner_next(cur.0, cur.1) {
                if next == start {
                    closed = true;
                    break;
                }
                visited += 1;
                cur = next;
                if visited > total {
                    break;
                }
            }
            if !closed {
                let mut cur = start;
                while let Some(prev) = self.corner_prev(cur.0, cur.1) {
                    visited += 1;
                    cur = prev;
                    if visited > total {
                        break;
                    }
                }
            }
            if visited != total {
                return Err(TrianError::NotADisk(format!(
                    "vertex {v} has a pinched or disconnected link"
                )));
            }
        }
        // The boundary must be one cycle.
        let bounds = self.boundary_sides();
        if bounds.is_empty() {
            return Err(TrianError::NotADisk("no boundary".into()));
        }
        let first = bounds[0];
        let mut cur = first;
        let mut walked = 0usize;
        loop {
            cur = self.next_boundary_side(cur);
            walked += 1;
            if cur == first || walked > bounds.len() {
                break;
            }
        }
        if walked != bounds.len() {
            return Err(TrianError::NotADisk(
                "boundary splits into several cycles".into(),
            ));
        }
        Ok(())
    }

    /// The boundary side that follows `s` along the boundary cycle.
    pub fn next_boundary_side(&self, s: Side) -> Side {
        debug_assert!(self.opp[s.tri][s.side].is_none());
        // Stand at the end corner of `s` and rotate around that vertex until
        // the next crossing would leave the surface.
        let (mut t, mut c) = (s.tri, (s.side + 2) % 3);
        loop {
            let cross = (c + 2) % 3;
            match self.opp[t][cross] {
                Some(o) => {
                    t = o.tri;
                    c = (o.side + 2) % 3;
                }
                None => return Side::new(t, cross),
            }
        }
    }

    /// Boundary sides in cycle order, starting from the lowest one.
    pub fn boundary_cycle(&self) -> Vec<Side> {
        let mut bounds = self.boundary_sides();
        bounds.sort();
        let first = bounds[0];
        let mut cycle = vec![first];
        let mut cur = self.next_boundary_side(first);
        while cur != first {
            cycle.push(cur);
            cur = self.next_boundary_side(cur);
        }
        cycle
    }

    /// Corner angle at corner `(t,c)` by the law of cosines.
    pub fn corner_angle(&self, t: usize, c: usize) -> R {
        let len = &self.tris[t].len;
        crate::geom::corner_angle(len[c], len[(c + 1) % 3], len[(c + 2) % 3])
    }
}

/// `(start, end)` corner indices of side `s`.
#[inline]
pub fn side_corners(s: usize) -> (usize, usize) {
    ((s + 1) % 3, (s + 2) % 3)
}
