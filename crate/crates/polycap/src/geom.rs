//! Small planar helpers shared by the layout code.
//!
//! Triangles are always indexed so that side `s` is opposite corner `s`,
//! i.e. side `s` joins corners `(s+1)%3` and `(s+2)%3`.

use crate::Real;

#[inline]
pub fn sub<R: Real>(a: [R; 2], b: [R; 2]) -> [R; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot<R: Real>(a: [R; 2], b: [R; 2]) -> R {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross<R: Real>(a: [R; 2], b: [R; 2]) -> R {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm<R: Real>(a: [R; 2]) -> R {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist<R: Real>(a: [R; 2], b: [R; 2]) -> R {
    norm(sub(a, b))
}

#[inline]
pub fn clamp1<R: Real>(x: R) -> R {
    x.min(R::one()).max(-R::one())
}

/// Interior angle opposite `opp` in a triangle with adjacent sides `a`, `b`.
#[inline]
pub fn corner_angle<R: Real>(opp: R, a: R, b: R) -> R {
    clamp1((a * a + b * b - opp * opp) / (R::of(2.0) * a * b)).acos()
}

/// Lays a triangle out in the plane: corner 0 at the origin, corner 1 on the
/// positive x-axis, corner 2 in the upper half-plane.
pub fn layout_triangle<R: Real>(len: &[R; 3]) -> [[R; 2]; 3] {
    let base = len[2];
    let x = (base * base + len[1] * len[1] - len[0] * len[0]) / (R::of(2.0) * base);
    let y = (len[1] * len[1] - x * x).max(R::zero()).sqrt();
    [[R::zero(), R::zero()], [base, R::zero()], [x, y]]
}

/// Position of the corner opposite a base `(0,0)–(base,0)`, at distance
/// `from_start` from the origin and `from_end` from `(base,0)`. `upper`
/// selects the half-plane.
pub fn apex_position<R: Real>(base: R, from_start: R, from_end: R, upper: bool) -> [R; 2] {
    let x = (base * base + from_start * from_start - from_end * from_end) / (R::of(2.0) * base);
    let y = (from_start * from_start - x * x).max(R::zero()).sqrt();
    [x, if upper { y } else { -y }]
}

/// Gradient of the linear interpolant taking values `v` at the corners `p`.
pub fn linear_gradient<R: Real>(p: &[[R; 2]; 3], v: &[R; 3]) -> [R; 2] {
    let e1 = sub(p[1], p[0]);
    let e2 = sub(p[2], p[0]);
    let det = cross(e1, e2);
    let d1 = v[1] - v[0];
    let d2 = v[2] - v[0];
    [(d1 * e2[1] - d2 * e1[1]) / det, (e1[0] * d2 - e2[0] * d1) / det]
}

/// Value at `q` of the linear function with values `v` at the corners `p`.
pub fn linear_value<R: Real>(p: &[[R; 2]; 3], v: &[R; 3], q: [R; 2]) -> R {
    let g = linear_gradient(p, v);
    v[0] + dot(g, sub(q, p[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_reproduces_lengths() {
        let len = [2.0_f64, 1.7, 1.2];
        let p = layout_triangle(&len);
        assert!((dist(p[1], p[2]) - len[0]).abs() < 1e-12);
        assert!((dist(p[0], p[2]) - len[1]).abs() < 1e-12);
        assert!((dist(p[0], p[1]) - len[2]).abs() < 1e-12);
        assert!(p[2][1] > 0.0);
    }

    #[test]
    fn gradient_of_plane() {
        let p = [[0.0_f64, 0.0], [2.0, 0.0], [0.3, 1.4]];
        let plane = |q: [f64; 2]| 0.7 * q[0] - 1.3 * q[1] + 0.25;
        let v = [plane(p[0]), plane(p[1]), plane(p[2])];
        let g = linear_gradient(&p, &v);
        assert!((g[0] - 0.7).abs() < 1e-12 && (g[1] + 1.3).abs() < 1e-12);
        assert!((linear_value(&p, &v, [5.0, -3.0]) - plane([5.0, -3.0])).abs() < 1e-10);
    }

    #[test]
    fn corner_angles_sum_to_pi() {
        let len = [1.3_f64, 2.0, 2.9];
        let s = corner_angle(len[0], len[1], len[2])
            + corner_angle(len[1], len[2], len[0])
            + corner_angle(len[2], len[0], len[1]);
        assert!((s - std::f64::consts::PI).abs() < 1e-12);
    }
}
