//! On-disk JSON formats for metrics and caps.
//!
//! Disk file:
//!
//! ```json
//! { "vertices":  [{"id": 0, "boundary": false}, ...],
//!   "triangles": [{"corners": [0,1,2], "lengths": [2.0, 1.7320508, 1.7320508]}, ...],
//!   "gluings":   [[[0,1],[1,2]], ...] }
//! ```
//!
//! Side `s` of a triangle is the side opposite `corners[s]`, joining
//! `corners[(s+1)%3]` and `corners[(s+2)%3]`; triangles are positively
//! oriented and a gluing identifies two sides reversing direction.
//!
//! Cap file: heights plus the concavity-certifying triangulation written by
//! the solver, with the per-edge angles and the functional value attached.

use crate::cap::CapState;
use crate::disk::{DiskError, MetricDisk};
use crate::trian::{EdgeSides, Side, Tri};
use crate::Real;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
pub struct DiskVertexRec {
    pub id: i64,
    pub boundary: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DiskTriangleRec {
    pub corners: [i64; 3],
    pub lengths: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DiskFile {
    pub vertices: Vec<DiskVertexRec>,
    pub triangles: Vec<DiskTriangleRec>,
    pub gluings: Vec<[[usize; 2]; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CapTriangulationRec {
    pub triangles: Vec<DiskTriangleRec>,
    pub gluings: Vec<[[usize; 2]; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CapFile {
    pub heights: BTreeMap<String, f64>,
    pub triangulation: CapTriangulationRec,
    pub theta: BTreeMap<String, f64>,
    pub kappa: BTreeMap<String, f64>,
    #[serde(rename = "S")]
    pub s: f64,
}

fn disk_from_file<R: Real>(file: DiskFile) -> Result<MetricDisk<R>, DiskError> {
    let ids: Vec<i64> = file.vertices.iter().map(|v| v.id).collect();
    let boundary: Vec<bool> = file.vertices.iter().map(|v| v.boundary).collect();
    let index_of = |id: i64| ids.iter().position(|&i| i == id);
    let mut tris = Vec::with_capacity(file.triangles.len());
    for (t, tri) in file.triangles.iter().enumerate() {
        let mut v = [0usize; 3];
        for (slot, &id) in v.iter_mut().zip(tri.corners.iter()) {
            *slot = index_of(id).ok_or(DiskError::UnknownVertex { tri: t, id })?;
        }
        let len = [
            R::of(tri.lengths[0]),
            R::of(tri.lengths[1]),
            R::of(tri.lengths[2]),
        ];
        tris.push(Tri { v, len });
    }
    let gluings: Vec<(Side, Side)> = file
        .gluings
        .iter()
        .map(|g| (Side::new(g[0][0], g[0][1]), Side::new(g[1][0], g[1][1])))
        .collect();
    MetricDisk::new(ids, boundary, tris, &gluings)
}

fn disk_to_file<R: Real>(disk: &MetricDisk<R>) -> DiskFile {
    let t = disk.triangulation();
    let vertices = (0..disk.n_vertices())
        .map(|v| DiskVertexRec {
            id: disk.id_of(v),
            boundary: disk.is_boundary(v),
        })
        .collect();
    let triangles = t
        .tris()
        .iter()
        .map(|tri| DiskTriangleRec {
            corners: [
                disk.id_of(tri.v[0]),
                disk.id_of(tri.v[1]),
                disk.id_of(tri.v[2]),
            ],
            lengths: [
                tri.len[0].as_f64(),
                tri.len[1].as_f64(),
                tri.len[2].as_f64(),
            ],
        })
        .collect();
    let mut gluings = Vec::new();
    for e in t.edges() {
        if let EdgeSides::Interior(a, b) = e.sides {
            gluings.push([[a.tri, a.side], [b.tri, b.side]]);
        }
    }
    DiskFile {
        vertices,
        triangles,
        gluings,
    }
}

/// Parses a disk from JSON text.
pub fn parse_disk<R: Real>(text: &str) -> Result<MetricDisk<R>, DiskError> {
    let file: DiskFile = serde_json::from_str(text).map_err(|e| DiskError::Parse(e.to_string()))?;
    disk_from_file(file)
}

/// Loads and validates a disk file.
pub fn load_disk<R: Real>(path: impl AsRef<Path>) -> Result<MetricDisk<R>, DiskError> {
    let text = std::fs::read_to_string(path)?;
    parse_disk(&text)
}

/// Writes a disk back out; reloading reproduces it field for field.
pub fn save_disk<R: Real>(disk: &MetricDisk<R>, path: impl AsRef<Path>) -> Result<(), DiskError> {
    let file = disk_to_file(disk);
    let text = serde_json::to_string_pretty(&file).map_err(|e| DiskError::Parse(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Serializes a solved cap.
pub fn cap_to_file<R: Real>(disk: &MetricDisk<R>, cap: &CapState<R>, s_value: R) -> CapFile {
    let t = cap.triangulation();
    let triangles = t
        .tris()
        .iter()
        .map(|tri| DiskTriangleRec {
            corners: [
                disk.id_of(tri.v[0]),
                disk.id_of(tri.v[1]),
                disk.id_of(tri.v[2]),
            ],
            lengths: [
                tri.len[0].as_f64(),
                tri.len[1].as_f64(),
                tri.len[2].as_f64(),
            ],
        })
        .collect();
    let mut gluings = Vec::new();
    let mut theta = BTreeMap::new();
    for (e_idx, e) in cap.edges().iter().enumerate() {
        if let EdgeSides::Interior(a, b) = e.sides {
            gluings.push([[a.tri, a.side], [b.tri, b.side]]);
            if let Some(th) = cap.theta(e_idx) {
                theta.insert(format!("{a}|{b}"), th.as_f64());
            }
        }
    }
    let mut heights = BTreeMap::new();
    for v in 0..disk.n_vertices() {
        heights.insert(disk.id_of(v).to_string(), cap.heights()[v].as_f64());
    }
    let mut kappa = BTreeMap::new();
    for v in disk.interior_vertices() {
        kappa.insert(disk.id_of(v).to_string(), cap.kappa()[v].as_f64());
    }
    CapFile {
        heights,
        triangulation: CapTriangulationRec { triangles, gluings },
        theta,
        kappa,
        s: s_value.as_f64(),
    }
}

/// Writes a solved cap to `path`.
pub fn save_cap<R: Real>(
    disk: &MetricDisk<R>,
    cap: &CapState<R>,
    s_value: R,
    path: impl AsRef<Path>,
) -> Result<(), DiskError> {
    let file = cap_to_file(disk, cap, s_value);
    let text = serde_json::to_string_pretty(&file).map_err(|e| DiskError::Parse(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Reads a cap file back against its disk, rebuilding the full state on the
/// saved triangulation (no flips are re-run).
pub fn load_cap<R: Real>(
    path: impl AsRef<Path>,
    disk: &MetricDisk<R>,
) -> Result<CapState<R>, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    let file: CapFile = serde_json::from_str(&text)?;
    let mut heights = vec![R::zero(); disk.n_vertices()];
    for (id, h) in &file.heights {
        let id: i64 = id.parse()?;
        let v = disk
            .index_of(id)
            .ok_or_else(|| format!("cap references unknown vertex id {id}"))?;
        heights[v] = R::of(*h);
    }
    let mut tris = Vec::with_capacity(file.triangulation.triangles.len());
    for (t, tri) in file.triangulation.triangles.iter().enumerate() {
        let mut v = [0usize; 3];
        for (slot, &id) in v.iter_mut().zip(tri.corners.iter()) {
            *slot = disk
                .index_of(id)
                .ok_or(DiskError::UnknownVertex { tri: t, id })?;
        }
        tris.push(Tri {
            v,
            len: [
                R::of(tri.lengths[0]),
                R::of(tri.lengths[1]),
                R::of(tri.lengths[2]),
            ],
        });
    }
    let gluings: Vec<(Side, Side)> = file
        .triangulation
        .gluings
        .iter()
        .map(|g| (Side::new(g[0][0], g[0][1]), Side::new(g[1][0], g[1][1])))
        .collect();
    let trian = crate::trian::Triangulation::new(disk.n_vertices(), tris, &gluings)?;
    let cap = crate::cap::CapState::assemble(disk, heights, trian)?;
    Ok(cap)
}

/// Reads a `{vertex-id: height}` JSON object into a height vector.
pub fn load_heights<R: Real>(
    path: impl AsRef<Path>,
    disk: &MetricDisk<R>,
) -> Result<Vec<R>, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    let map: BTreeMap<String, f64> = serde_json::from_str(&text)?;
    let mut heights = vec![R::zero(); disk.n_vertices()];
    for (id, h) in &map {
        let id: i64 = id.parse()?;
        let v = disk
            .index_of(id)
            .ok_or_else(|| format!("heights reference unknown vertex id {id}"))?;
        heights[v] = R::of(*h);
    }
    Ok(heights)
}
