//! The total scalar curvature, its derivatives, and rigidity reports.
//!
//! For a cap with heights `h`, curvatures `κ`, interior edge angles `θ` and
//! boundary angles `η`,
//!
//! ```text
//! S = Σᵢ hᵢ κᵢ + Σ_int ℓᵢⱼ (π − θᵢⱼ) + Σ_bd ℓᵢⱼ (π/2 − ηᵢⱼ).
//! ```
//!
//! Schläfli's formula gives `∂S/∂hᵢ = κᵢ`, and the second derivatives are
//! the cotangent weights
//!
//! ```text
//! aᵢⱼ = (cot αᵢⱼ + cot αⱼᵢ) / (ℓᵢⱼ sin² ρᵢⱼ)
//!     = sin θᵢⱼ / (sin αᵢⱼ sin αⱼᵢ ℓᵢⱼ sin² ρᵢⱼ)
//! ```
//!
//! summed over parallel edges, with loops dropped and edges at `θ = π`
//! contributing nothing. The Hessian is assembled as the graph Laplacian of
//! these weights (diagonal `−Σⱼ aᵢⱼ` with the sum over boundary vertices
//! included), which makes negative semidefiniteness and the nullspace
//! structure — indicator vectors of Γ-components disjoint from the boundary —
//! hold by construction.

use crate::cap::{gamma_graph, CapState, GammaGraph};
use crate::linalg::{symmetric_eigenvalues, SymMat};
use crate::prism::Degeneracy;
use crate::trian::EdgeSides;
use crate::Real;
use thiserror::Error;

/// `sin` of an angle below this is treated as a degenerate configuration.
pub const DEGENERATE_SIN_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum FunctionalError {
    #[error(
        "Hessian entry is singular at edge {edge} (vertices {i}, {j}): {reason}; \
         the cap sits on the degenerate boundary of the cap space"
    )]
    DegenerateAngle {
        edge: usize,
        i: usize,
        j: usize,
        reason: &'static str,
    },
}

/// Curvatures, functional value, Hessian and its predicted nullspace.
#[derive(Debug, Clone)]
pub struct CurvatureReport<R> {
    /// Total scalar curvature.
    pub s: R,
    /// Interior vertex indices, the coordinate order of the Hessian.
    pub interior: Vec<usize>,
    /// Curvature per interior vertex, aligned with `interior`.
    pub kappa: Vec<R>,
    /// Cotangent weights `a_ij` by vertex pair (`i < j`), parallel edges
    /// summed; pairs with one boundary endpoint feed only the diagonal.
    pub pairs: Vec<(usize, usize, R)>,
    /// Dense Hessian over `interior`: off-diagonal `a_ij`, diagonal `−Σ_j a_ij`.
    pub hessian: SymMat<R>,
    pub gamma: GammaGraph,
    /// Indicator vectors (over `interior`) of Γ-components disjoint from the
    /// boundary; they span the predicted nullspace.
    pub nullspace: Vec<Vec<R>>,
}

/// Evaluates the total scalar curvature of the cap.
pub fn total_scalar_curvature<R: Real>(cap: &CapState<R>) -> R {
    let pi = R::PI();
    let half_pi = pi / R::of(2.0);
    let mut s = R::zero();
    for v in cap.interior_vertices() {
        s = s + cap.heights()[v] * cap.kappa()[v];
    }
    for (e_idx, e) in cap.edges().iter().enumerate() {
        let len = match e.sides {
            EdgeSides::Interior(a, _) => cap.triangulation().side_len(a),
            EdgeSides::Boundary(a) => cap.triangulation().side_len(a),
        };
        match (cap.theta(e_idx), cap.eta(e_idx)) {
            (Some(theta), _) => s = s + len * (pi - theta),
            (None, Some(eta)) => s = s + len * (half_pi - eta),
            _ => unreachable!(),
        }
    }
    s
}

/// Curvatures `κᵢ = 2π − ωᵢ` per vertex (NaN at boundary vertices), the
/// gradient of `S` in the heights.
pub fn curvatures<R: Real>(cap: &CapState<R>) -> Vec<R> {
    cap.kappa().to_vec()
}

/// The cotangent weight of one strictly convex interior edge.
fn edge_weight<R: Real>(
    cap: &CapState<R>,
    e_idx: usize,
) -> Result<Option<(usize, usize, R)>, FunctionalError> {
    let e = &cap.edges()[e_idx];
    let (a, b) = match e.sides {
        EdgeSides::Interior(a, b) => (a, b),
        EdgeSides::Boundary(_) => return Ok(None),
    };
    if !cap.strictly_convex(e_idx) {
        return Ok(None);
    }
    let (i, j) = e.ends;
    if i == j {
        // Loops do not move: dρ = 0 along a loop edge.
        return Ok(None);
    }
    let tol = R::of(DEGENERATE_SIN_TOL);
    for side in [a, b] {
        if cap.prisms()[side.tri].degeneracy != Degeneracy::NonDegenerate {
            return Err(FunctionalError::DegenerateAngle {
                edge: e_idx,
                i,
                j,
                reason: "a prism at the edge is degenerate (vertical upper base)",
            });
        }
    }
    let theta = cap.theta(e_idx).unwrap();
    let sin_a1 = cap.prisms()[a.tri].alpha[a.side].sin();
    let sin_a2 = cap.prisms()[b.tri].alpha[b.side].sin();
    if sin_a1 < tol || sin_a2 < tol {
        return Err(FunctionalError::DegenerateAngle {
            edge: e_idx,
            i,
            j,
            reason: "a dihedral angle at the edge is 0 or π",
        });
    }
    // ρ at either endpoint has the same sine (they sum to π).
    let (ca, cb) = crate::trian::side_corners(a.side);
    let rho = cap.prisms()[a.tri].rho[ca][cb];
    let sin_rho = rho.sin();
    if sin_rho < tol {
        return Err(FunctionalError::DegenerateAngle {
            edge: e_idx,
            i,
            j,
            reason: "the edge is vertical (ρ is 0 or π)",
        });
    }
    let len = cap.triangulation().side_len(a);
    let w = theta.sin() / (sin_a1 * sin_a2 * len * sin_rho * sin_rho);
    Ok(Some((i.min(j), i.max(j), w.max(R::zero()))))
}

fn weight_pairs<R: Real>(cap: &CapState<R>) -> Result<Vec<(usize, usize, R)>, FunctionalError> {
    let mut acc: std::collections::BTreeMap<(usize, usize), R> = std::collections::BTreeMap::new();
    for e_idx in 0..cap.edges().len() {
        if let Some((i, j, w)) = edge_weight(cap, e_idx)? {
            let slot = acc.entry((i, j)).or_insert_with(R::zero);
            *slot = *slot + w;
        }
    }
    Ok(acc.into_iter().map(|((i, j), w)| (i, j, w)).collect())
}

fn laplacian<R: Real>(
    interior: &[usize],
    n_vertices: usize,
    pairs: &[(usize, usize, R)],
) -> SymMat<R> {
    let mut index = vec![usize::MAX; n_vertices];
    for (k, &v) in interior.iter().enumerate() {
        index[v] = k;
    }
    let mut h = SymMat::zeros(interior.len());
    for &(i, j, w) in pairs {
        let (ki, kj) = (index[i], index[j]);
        if ki != usize::MAX {
            h.add(ki, ki, -w);
        }
        if kj != usize::MAX {
            h.add(kj, kj, -w);
        }
        if ki != usize::MAX && kj != usize::MAX {
            h.add(ki, kj, w);
        }
    }
    h
}

/// Assembles the Hessian of `S` with its Γ-graph and predicted nullspace.
/// Fails with [`FunctionalError::DegenerateAngle`] when the cap carries a
/// degenerate prism on a strictly convex edge, where the second derivative
/// blows up; no clamping is attempted.
pub fn hessian<R: Real>(cap: &CapState<R>) -> Result<CurvatureReport<R>, FunctionalError> {
    let interior: Vec<usize> = cap.interior_vertices().collect();
    let pairs = weight_pairs(cap)?;
    let h = laplacian(&interior, cap.heights().len(), &pairs);
    let gamma = gamma_graph(cap);
    let nullspace = nullspace_basis(cap, &gamma, &interior);
    let kappa = interior.iter().map(|&v| cap.kappa()[v]).collect();
    Ok(CurvatureReport {
        s: total_scalar_curvature(cap),
        interior,
        kappa,
        pairs,
        hessian: h,
        gamma,
        nullspace,
    })
}

fn nullspace_basis<R: Real>(
    _cap: &CapState<R>,
    gamma: &GammaGraph,
    interior: &[usize],
) -> Vec<Vec<R>> {
    gamma
        .interior_components
        .iter()
        .map(|&comp| {
            interior
                .iter()
                .map(|&v| {
                    if gamma.component_of[v] == comp {
                        R::one()
                    } else {
                        R::zero()
                    }
                })
                .collect()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|v: &Vec<R>| v.iter().any(|&x| x > R::zero()))
        .collect()
}

/// Rigidity certificate for a cap.
#[derive(Debug, Clone)]
pub struct RigidityReport<R> {
    pub gamma_components: usize,
    /// Γ components disjoint from the boundary.
    pub interior_components: usize,
    /// Infinitesimally rigid iff every interior vertex lies in the boundary
    /// component of Γ.
    pub rigid: bool,
    pub nullspace_dim: usize,
    /// Max residual of `H · v` over the predicted nullspace vectors.
    pub nullspace_residual: R,
    /// Eigenvalues of the interior Hessian (ascending). When the cap has
    /// exactly degenerate prisms the Hessian blows up there and the spectrum
    /// is taken over the vertices not touching any degenerate prism, per
    /// `wall_restricted`.
    pub eigenvalues: Vec<R>,
    /// Largest eigenvalue divided by the largest matrix entry magnitude.
    pub eig_max_scaled: Option<R>,
    pub wall_restricted: bool,
    /// Coordinate order of `eigenvalues` (vertex indices).
    pub spectrum_vertices: Vec<usize>,
}

/// Computes Γ-components, the rigidity verdict, the predicted nullspace and
/// an eigenvalue summary of the Hessian.
pub fn rigidity_report<R: Real>(cap: &CapState<R>) -> RigidityReport<R> {
    let gamma = gamma_graph(cap);
    let interior: Vec<usize> = cap.interior_vertices().collect();
    let rigid = gamma.interior_components.is_empty();

    match hessian(cap) {
        Ok(rep) => {
            let mut resid = R::zero();
            for v in &rep.nullspace {
                for r in rep.hessian.mul_vec(v) {
                    resid = resid.max(r.abs());
                }
            }
            let eigenvalues = symmetric_eigenvalues(&rep.hessian);
            let scale = rep.hessian.max_abs().max(R::one());
            let eig_max_scaled = eigenvalues.last().map(|&l| l / scale);
            RigidityReport {
                gamma_components: gamma.n_components,
                interior_components: gamma.interior_components.len(),
                rigid,
                nullspace_dim: rep.nullspace.len(),
                nullspace_residual: resid,
                eigenvalues,
                eig_max_scaled,
                wall_restricted: false,
                spectrum_vertices: interior,
            }
        }
        Err(_) => {
            // Exactly degenerate prisms make some entries infinite. Restrict
            // to vertices away from the degenerate part, whose heights the
            // walls pin down; the sub-Laplacian stays finite because every
            // edge of a degenerate prism has both endpoints on it.
            let (restricted, h) = hessian_off_walls(cap);
            let eigenvalues = symmetric_eigenvalues(&h);
            let scale = h.max_abs().max(R::one());
            let eig_max_scaled = eigenvalues.last().map(|&l| l / scale);
            RigidityReport {
                gamma_components: gamma.n_components,
                interior_components: gamma.interior_components.len(),
                rigid,
                nullspace_dim: gamma.interior_components.len(),
                nullspace_residual: R::zero(),
                eigenvalues,
                eig_max_scaled,
                wall_restricted: true,
                spectrum_vertices: restricted,
            }
        }
    }
}

/// Vertices touching a degenerate prism.
pub fn wall_vertices<R: Real>(cap: &CapState<R>) -> Vec<bool> {
    let mut on_wall = vec![false; cap.heights().len()];
    for (ti, p) in cap.prisms().iter().enumerate() {
        if p.degeneracy != Degeneracy::NonDegenerate {
            for &v in &cap.triangulation().tris()[ti].v {
                on_wall[v] = true;
            }
        }
    }
    on_wall
}

/// Interior Hessian block over the vertices away from the degenerate part,
/// where the weights stay finite; walls and the boundary act as fixed
/// heights through the diagonal. Returns the vertex order and the matrix.
pub fn hessian_off_walls<R: Real>(cap: &CapState<R>) -> (Vec<usize>, SymMat<R>) {
    let on_wall = wall_vertices(cap);
    let restricted: Vec<usize> = cap
        .interior_vertices()
        .filter(|&v| !on_wall[v])
        .collect();
    let pairs = restricted_pairs(cap, &on_wall);
    let h = laplacian(&restricted, cap.heights().len(), &pairs);
    (restricted, h)
}

/// Weights of edges whose endpoints avoid the degenerate part.
fn restricted_pairs<R: Real>(cap: &CapState<R>, on_wall: &[bool]) -> Vec<(usize, usize, R)> {
    let mut acc: std::collections::BTreeMap<(usize, usize), R> = std::collections::BTreeMap::new();
    for (e_idx, e) in cap.edges().iter().enumerate() {
        let (i, j) = e.ends;
        if on_wall[i] && on_wall[j] {
            continue;
        }
        if let Ok(Some((i, j, w))) = edge_weight(cap, e_idx) {
            let slot = acc.entry((i, j)).or_insert_with(R::zero);
            *slot = *slot + w;
        }
    }
    acc.into_iter().map(|((i, j), w)| (i, j, w)).collect()
}

/// Central-difference checks of the gradient and Hessian of `S`, used by the
/// command line and the test suites.
#[derive(Debug, Clone)]
pub struct DerivativeCheck<R> {
    /// Per interior vertex: `(vertex, κ, central difference of S)`.
    pub gradient: Vec<(usize, R, R)>,
    /// Per interior pair `(i, j, H_ij, central difference of κ_i along e_j)`.
    pub hessian: Vec<(usize, usize, R, R)>,
    pub max_gradient_err: R,
    pub max_hessian_err: R,
}

/// Runs central-difference comparisons at a feasible interior point. `eps`
/// is the step; the point must remain feasible at `h ± eps` per coordinate.
pub fn check_derivatives<R: Real>(
    disk: &crate::disk::MetricDisk<R>,
    heights: &[R],
    eps: R,
) -> Result<DerivativeCheck<R>, crate::cap::Infeasibility<R>> {
    let base = crate::cap::feasibility(disk, heights, None)?;
    let interior: Vec<usize> = base.interior_vertices().collect();
    let eval = |h: &[R]| -> Result<(R, Vec<R>), crate::cap::Infeasibility<R>> {
        let cap = crate::cap::feasibility(disk, h, Some(base.triangulation()))?;
        Ok((total_scalar_curvature(&cap), cap.kappa().to_vec()))
    };
    let mut gradient = Vec::new();
    let mut max_g = R::zero();
    let mut s_plus: Vec<(R, Vec<R>)> = Vec::new();
    let mut s_minus: Vec<(R, Vec<R>)> = Vec::new();
    for &v in &interior {
        let mut hp = heights.to_vec();
        hp[v] = hp[v] + eps;
        let mut hm = heights.to_vec();
        hm[v] = hm[v] - eps;
        let p = eval(&hp)?;
        let m = eval(&hm)?;
        let fd = (p.0 - m.0) / (R::of(2.0) * eps);
        let kappa = base.kappa()[v];
        max_g = max_g.max((fd - kappa).abs());
        gradient.push((v, kappa, fd));
        s_plus.push(p);
        s_minus.push(m);
    }
    // Hessian by differencing κ; skipped when the analytic Hessian is
    // singular at this point (degenerate prisms).
    let mut hess = Vec::new();
    let mut max_h = R::zero();
    if let Ok(rep) = hessian(&base) {
        let mut index = vec![usize::MAX; heights.len()];
        for (k, &v) in rep.interior.iter().enumerate() {
            index[v] = k;
        }
        for (kj, &vj) in interior.iter().enumerate() {
            let kp = &s_plus[kj].1;
            let km = &s_minus[kj].1;
            for &vi in &interior {
                let fd = (kp[vi] - km[vi]) / (R::of(2.0) * eps);
                let analytic = rep.hessian.get(index[vi], index[vj]);
                max_h = max_h.max((fd - analytic).abs());
                hess.push((vi, vj, analytic, fd));
            }
        }
    }
    Ok(DerivativeCheck {
        gradient,
        hessian: hess,
        max_gradient_err: max_g,
        max_hessian_err: max_h,
    })
}
