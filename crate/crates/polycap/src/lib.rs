//! Reconstruction of convex caps from intrinsic polyhedral disk metrics.
//!
//! Given a disk glued from Euclidean triangles whose metric is convex (interior
//! cone angles below `2π`, boundary angles below `π`), there is a unique convex
//! cap in the upper half-space whose upper boundary is isometric to the disk.
//! This crate finds it variationally: the space of *generalized* convex caps is
//! parametrized by the vertex heights, and the total scalar curvature
//!
//! ```text
//! S = Σ hᵢ κᵢ + Σ ℓᵢⱼ (π − θᵢⱼ) + Σ ℓᵢⱼ (π/2 − ηᵢⱼ)
//! ```
//!
//! is strictly concave there with gradient `κ` and an explicit cotangent-weight
//! Hessian. Maximizing `S` yields the cap; the Hessian doubles as a rigidity
//! certificate.
//!
//! The pipeline: [`disk`] ingests and validates the metric, [`prism`] computes
//! the angles of a single height prism, [`cap`] decides feasibility of a height
//! vector through the concavity-restoring edge-flip algorithm, [`functional`]
//! evaluates `S`, `κ` and the Hessian, [`solver`] runs the active-set Newton
//! ascent, and [`embed`] develops the maximizer into explicit coordinates.
//!
//! All geometry is generic over the scalar type through [`Real`]; the CLI and
//! the file formats instantiate everything at [`Scalar`] (`f64`).

pub mod cap;
pub mod disk;
pub mod embed;
pub mod functional;
pub(crate) mod geom;
pub mod hull;
pub mod linalg;
pub mod obj;
pub mod prism;
pub mod solver;
pub mod trian;

mod io;

pub use cap::{
    feasibility, flip_edge, gamma_graph, is_bad_edge, pl_extension, CapState, GammaGraph,
    InfeasibleWitness, Infeasibility,
};
pub use disk::{ConvexityReport, DiskError, MetricDisk, VertexAngles};
pub use embed::{develop, verify_isometry, EmbeddedCap, IsometryReport};
pub use functional::{
    check_derivatives, curvatures, hessian, rigidity_report, total_scalar_curvature,
    CurvatureReport, RigidityReport,
};
pub use io::{load_cap, load_disk, load_heights, parse_disk, save_cap, save_disk};
pub use obj::{export_obj, obj_string};
pub use prism::{prism_angles, project_length, rho, Degeneracy, PrismAngles, PrismSpec};
pub use solver::{
    classify, kkt_residual, maximize, Classification, Method, SolveOptions, SolveResult,
    SolveStatus,
};
pub use trian::{Edge, EdgeSides, Side, Tri, Triangulation};

/// Scalar abstraction for the geometric core: `f32`, `f64`, or any other
/// floating point with the `num-traits` surface.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Default
    + 'static
{
    /// Converts an `f64` constant into the scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant must be representable")
    }

    /// Lossy view of the scalar as `f64`, used at reporting boundaries.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FloatConst
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + std::fmt::Debug
        + std::fmt::Display
        + std::fmt::LowerExp
        + Default
        + 'static
{
}

/// Default scalar used by the CLI and the on-disk formats.
pub type Scalar = f64;

/// Metric disk at the default scalar.
pub type Disk64 = MetricDisk<Scalar>;
/// Cap state at the default scalar.
pub type Cap64 = CapState<Scalar>;
/// Solve result at the default scalar.
pub type SolveResult64 = SolveResult<Scalar>;
