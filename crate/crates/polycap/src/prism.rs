//! Angle geometry of a single prism.
//!
//! A prism here is the lower hull of three points in the upper half-space:
//! a slanted triangular upper base, vertical lateral edges of lengths
//! `h_a ≥ 0` (the heights), and a flat lower base in the plane `z = 0`.
//! It is determined up to isometry by the upper-base side lengths and the
//! three heights, which is all this module takes as input.
//!
//! Everything is derived intrinsically, without embedding the prism:
//!
//! * `ρ_ab = atan2(ℓ'_ab, h_a − h_b)` from the trapezoid under the edge `ab`,
//!   where `ℓ'` is the horizontally projected edge length;
//! * `ω_a` is the angle of the projected triangle at `a`, because the lateral
//!   faces are vertical planes;
//! * the dihedral `α` at an upper edge comes from the spherical triangle cut
//!   out at one of its endpoints, whose sides are `ρ_ab`, `ρ_ac` and the
//!   intrinsic corner angle;
//! * `η = arcsin |grad h̃|` is the tilt of the upper base against the lower
//!   base, which is the dihedral at any level edge of the prism.
//!
//! Tests cross-check all of this against an explicit 3D embedding.

use crate::geom;
use crate::Real;
use thiserror::Error;

/// Slope at and above which the projected triangle is treated as collapsed.
pub const DEGENERACY_SLOPE_TOL: f64 = 1e-9;
/// Slack on the gradient bound: slopes up to `1 + SLOPE_SLACK` still define a prism.
pub const SLOPE_SLACK: f64 = 1e-9;
/// Relative threshold for `|h_a − h_b| = ℓ_ab`, i.e. a vertical upper edge.
pub const VERTICAL_EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PrismError {
    #[error("height difference {dh} exceeds edge length {len}")]
    HeightExceedsLength { len: f64, dh: f64 },
    #[error("no prism with these heights: face slope {slope} exceeds 1")]
    NoSuchPrism { slope: f64 },
}

/// Upper-base side lengths and heights of one prism.
///
/// Side `s` is opposite corner `s`; heights are listed per corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrismSpec<R> {
    pub len: [R; 3],
    pub h: [R; 3],
}

impl<R: Real> PrismSpec<R> {
    pub fn new(len: [R; 3], h: [R; 3]) -> Self {
        Self { len, h }
    }
}

/// How a prism degenerates when its upper base becomes vertical (projected
/// area zero). Only walls (`TypeA`) can occur inside a generalized convex
/// cap; the two other kinds signal an infeasible height vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    NonDegenerate,
    /// Vertical upper base, no vertical upper edge: a wall.
    TypeA,
    /// A vertical upper edge hanging strictly above the lower base.
    TypeB,
    /// A vertical upper edge reaching the lower base; some angles are undefined.
    TypeC,
}

/// All angles of one prism. Indexing follows the spec of [`PrismSpec`]:
/// `alpha[s]` sits at the upper edge opposite corner `s`, `omega[a]` at the
/// vertical edge under corner `a`, `rho[a][b]` at corner `a` looking along
/// the edge towards corner `b` (diagonal unused).
#[derive(Debug, Clone)]
pub struct PrismAngles<R> {
    pub alpha: [R; 3],
    pub omega: [R; 3],
    pub rho: [[R; 3]; 3],
    pub eta: [R; 3],
    /// Gradient magnitude of the height interpolant over the intrinsic base.
    pub slope: R,
    /// Projected side lengths, same indexing as `len`.
    pub projected: [R; 3],
    pub degeneracy: Degeneracy,
}

impl<R: Real> PrismAngles<R> {
    /// Dihedral at the upper edge joining corners `a` and `b`.
    pub fn alpha_at(&self, a: usize, b: usize) -> R {
        self.alpha[3 - a - b]
    }
}

/// Projected (horizontal) length of an edge of length `len` whose endpoints
/// sit at heights `h_a`, `h_b`.
pub fn project_length<R: Real>(len: R, h_a: R, h_b: R) -> Result<R, PrismError> {
    let dh = (h_a - h_b).abs();
    if dh > len * (R::one() + R::of(VERTICAL_EDGE_TOL)) {
        return Err(PrismError::HeightExceedsLength {
            len: len.as_f64(),
            dh: dh.as_f64(),
        });
    }
    Ok(((len - dh) * (len + dh)).max(R::zero()).sqrt())
}

/// Angle at the upper vertex `a` between the edge `ab` and the downward
/// vertical; when `h_a = 0` this is the angle against `(0,0,−1)`.
pub fn rho<R: Real>(len: R, h_a: R, h_b: R) -> Result<R, PrismError> {
    let lp = project_length(len, h_a, h_b)?;
    Ok(lp.atan2(h_a - h_b))
}

fn vertical_edge<R: Real>(len: R, h_a: R, h_b: R) -> bool {
    (h_a - h_b).abs() >= len * (R::one() - R::of(VERTICAL_EDGE_TOL))
}

/// Computes every angle of the prism described by `spec`.
pub fn prism_angles<R: Real>(spec: &PrismSpec<R>) -> Result<PrismAngles<R>, PrismError> {
    let PrismSpec { len, h } = *spec;
    let mut projected = [R::zero(); 3];
    for s in 0..3 {
        let (a, b) = ((s + 1) % 3, (s + 2) % 3);
        projected[s] = project_length(len[s], h[a], h[b])?;
    }

    let base = geom::layout_triangle(&len);
    let slope = geom::norm(geom::linear_gradient(&base, &h));
    if slope > R::of(1.0 + SLOPE_SLACK) {
        return Err(PrismError::NoSuchPrism {
            slope: slope.as_f64(),
        });
    }

    let vertical = [
        vertical_edge(len[0], h[1], h[2]),
        vertical_edge(len[1], h[2], h[0]),
        vertical_edge(len[2], h[0], h[1]),
    ];
    let degeneracy = if slope < R::of(1.0 - DEGENERACY_SLOPE_TOL) {
        Degeneracy::NonDegenerate
    } else if !vertical.iter().any(|&v| v) {
        Degeneracy::TypeA
    } else {
        let reaches_base = (0..3).any(|s| {
            vertical[s] && {
                let (a, b) = ((s + 1) % 3, (s + 2) % 3);
                h[a].min(h[b]) <= R::of(VERTICAL_EDGE_TOL) * len[s]
            }
        });
        if reaches_base {
            Degeneracy::TypeC
        } else {
            Degeneracy::TypeB
        }
    };

    let mut rho_tab = [[R::zero(); 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            if a != b {
                let s = 3 - a - b;
                rho_tab[a][b] = projected[s].atan2(h[a] - h[b]);
            }
        }
    }

    // Corner angles of the intrinsic upper base.
    let gamma = [
        geom::corner_angle(len[0], len[1], len[2]),
        geom::corner_angle(len[1], len[2], len[0]),
        geom::corner_angle(len[2], len[0], len[1]),
    ];

    // omega: angle of the projected triangle. Undefined when an adjacent
    // projected edge vanishes (vertical upper edge).
    let mut omega = [R::zero(); 3];
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let (ab, ac, bc) = (projected[3 - a - b], projected[3 - a - c], projected[a]);
        let tiny = R::of(1e-300);
        omega[a] = if ab < tiny || ac < tiny {
            R::nan()
        } else {
            geom::corner_angle(bc, ab, ac)
        };
    }

    // alpha at edge s, from the spherical section at whichever endpoint is
    // better conditioned.
    let mut alpha = [R::zero(); 3];
    for s in 0..3 {
        let (a, b) = ((s + 1) % 3, (s + 2) % 3);
        let at = |p: usize, q: usize| -> (R, R) {
            let c = 3 - p - q;
            let denom = rho_tab[p][q].sin() * gamma[p].sin();
            let cos_a = (rho_tab[p][c].cos() - gamma[p].cos() * rho_tab[p][q].cos()) / denom;
            (denom, cos_a)
        };
        let (da, ca) = at(a, b);
        let (db, cb) = at(b, a);
        let cos_alpha = if da >= db { ca } else { cb };
        // Collapsed prisms take the limit dihedrals 0 or π through the same
        // clamped formula; snapping them exactly would tear S at the
        // degeneracy threshold, and continuity matters more than the last
        // square-root-of-epsilon digits at the wall.
        alpha[s] = if da.max(db) <= R::zero() {
            R::nan()
        } else {
            geom::clamp1(cos_alpha).acos()
        };
    }

    // Tilt of the upper base against the lower base. `sin(tilt)` is the
    // intrinsic slope and `cos(tilt)` the area contraction under projection;
    // atan2 of the two independent computations stays accurate at both the
    // flat and the vertical end.
    let heron = |l: &[R; 3]| -> R {
        let s = (l[0] + l[1] + l[2]) / R::of(2.0);
        (s * (s - l[0]) * (s - l[1]) * (s - l[2])).max(R::zero()).sqrt()
    };
    let tilt = (slope * heron(&len)).atan2(heron(&projected));
    Ok(PrismAngles {
        alpha,
        omega,
        rho: rho_tab,
        eta: [tilt; 3],
        slope,
        projected,
        degeneracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn project_length_examples() {
        assert!((project_length(5.0f64, 3.0, 0.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((project_length(1.25f64, 0.4, 0.4).unwrap() - 1.25).abs() < 1e-12);
        assert!((project_length(SQRT2, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            project_length(1.0f64, 2.5, 0.0),
            Err(PrismError::HeightExceedsLength { .. })
        ));
    }

    #[test]
    fn rho_examples() {
        assert!((rho(2.0f64, 0.7, 0.7).unwrap() - FRAC_PI_2).abs() < 1e-12);
        let r = rho(3f64.sqrt(), 1.0, 0.0).unwrap();
        assert!((r - (1.0 / 3f64.sqrt()).acos()).abs() < 1e-12);
        assert!((rho(1.5f64, 0.0, 1.5).unwrap() - PI).abs() < 1e-12);
        assert!((rho(1.5f64, 1.5, 0.0).unwrap() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn rho_pair_sums_to_pi() {
        for &(l, ha, hb) in &[(1.7, 0.9, 0.2), (2.0, 0.0, 1.3), (0.8, 0.5, 0.5)] {
            let r1: f64 = rho(l, ha, hb).unwrap();
            let r2 = rho(l, hb, ha).unwrap();
            assert!((r1 + r2 - PI).abs() < 1e-12);
        }
    }

    /// Right prism: equal heights leave the base angles and put every upper
    /// dihedral at π/2.
    #[test]
    fn right_prism() {
        let spec = PrismSpec::new([1.5, 1.2, 0.9], [0.4, 0.4, 0.4]);
        let a = prism_angles(&spec).unwrap();
        assert_eq!(a.degeneracy, Degeneracy::NonDegenerate);
        for s in 0..3 {
            assert!((a.alpha[s] - FRAC_PI_2).abs() < 1e-12);
        }
        for c in 0..3 {
            let gamma = crate::geom::corner_angle(
                spec.len[c],
                spec.len[(c + 1) % 3],
                spec.len[(c + 2) % 3],
            );
            assert!((a.omega[c] - gamma).abs() < 1e-12);
        }
        assert!(a.slope.abs() < 1e-12 && a.eta[0].abs() < 1e-12);
    }

    /// Lateral prism of the square pyramid: apex height 1 over a 2×2 square.
    #[test]
    fn square_pyramid_lateral_prism() {
        let s3 = 3f64.sqrt();
        let spec = PrismSpec::new([2.0, s3, s3], [1.0, 0.0, 0.0]);
        let a = prism_angles(&spec).unwrap();
        assert_eq!(a.degeneracy, Degeneracy::NonDegenerate);
        assert!((a.omega[0] - FRAC_PI_2).abs() < 1e-12);
        assert!((a.rho[0][1] - (1.0 / s3).acos()).abs() < 1e-12);
        assert!((a.rho[0][2] - (1.0 / s3).acos()).abs() < 1e-12);
        assert!((a.eta[0] - FRAC_PI_4).abs() < 1e-12);
        // Dihedral at each slanted upper edge is π/3 (the 2π/3 roof dihedral
        // of the pyramid splits evenly between the two lateral prisms).
        assert!((a.alpha[1] - PI / 3.0).abs() < 1e-12);
        assert!((a.alpha[2] - PI / 3.0).abs() < 1e-12);
        assert!((a.slope - 1.0 / SQRT2).abs() < 1e-12);
    }

    /// The vertical wall of the two-triangle example cap: projected sides
    /// (1, 1, 2) are collinear.
    #[test]
    fn wall_prism_is_type_a() {
        let spec = PrismSpec::new([2.0, SQRT2, SQRT2], [1.0, 0.0, 0.0]);
        let a = prism_angles(&spec).unwrap();
        assert_eq!(a.degeneracy, Degeneracy::TypeA);
        assert!((a.slope - 1.0).abs() < 1e-12);
        // The middle vertex of the collapsed projection sees π, the ends 0.
        assert!((a.omega[0] - PI).abs() < 1e-9);
        assert!(a.omega[1] < 1e-7 && a.omega[2] < 1e-7);
        // Dihedrals at the slanted upper edges collapse to 0, the level edge
        // opens to π, and the base tilt is π/2.
        assert!(a.alpha[1] < 1e-7 && a.alpha[2] < 1e-7);
        assert!((a.alpha[0] - PI).abs() < 1e-7);
        assert!((a.eta[0] - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn vertical_edge_prisms_are_rejected_kinds() {
        // |h0 − h1| = len of edge 01 makes that upper edge vertical.
        let spec = PrismSpec::new([1.0, 1.0, 1.0], [1.0, 0.0, 0.5]);
        let a = prism_angles(&spec).unwrap();
        assert_eq!(a.degeneracy, Degeneracy::TypeC);
        let spec = PrismSpec::new([1.0, 1.0, 1.0], [1.2, 0.2, 0.7]);
        let a = prism_angles(&spec).unwrap();
        assert_eq!(a.degeneracy, Degeneracy::TypeB);
    }

    #[test]
    fn infeasible_heights_are_no_prism() {
        let spec = PrismSpec::new([2.0, 3f64.sqrt(), 3f64.sqrt()], [1.5, 0.0, 0.0]);
        assert!(matches!(
            prism_angles(&spec),
            Err(PrismError::NoSuchPrism { .. })
        ));
    }

    #[test]
    fn flat_prism_has_plain_angles() {
        let spec = PrismSpec::new([1.1, 0.9, 1.4], [0.0, 0.0, 0.0]);
        let a = prism_angles(&spec).unwrap();
        assert_eq!(a.degeneracy, Degeneracy::NonDegenerate);
        for s in 0..3 {
            assert!((a.alpha[s] - FRAC_PI_2).abs() < 1e-12);
            assert!((a.eta[s] - 0.0).abs() < 1e-12);
        }
    }

    #[test]
    fn works_at_f32() {
        let spec = PrismSpec::new([2.0f32, 3f32.sqrt(), 3f32.sqrt()], [1.0, 0.0, 0.0]);
        let a = prism_angles(&spec).unwrap();
        assert!((a.omega[0] - std::f32::consts::FRAC_PI_2).abs() < 1e-5);
    }
}
