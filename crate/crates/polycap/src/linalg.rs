//! Dense symmetric linear algebra for the small systems this crate meets.
//!
//! The Newton systems and rigidity summaries involve one unknown per interior
//! vertex, a few dozen at most, so a plain Cholesky factorization and a cyclic
//! Jacobi eigenvalue sweep are all that is needed. Both are deterministic.

use crate::Real;

/// Row-major symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymMat<R> {
    pub n: usize,
    pub a: Vec<R>,
}

impl<R: Real> SymMat<R> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![R::zero(); n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: R) {
        self.a[i * self.n + j] = self.a[i * self.n + j] + v;
        if i != j {
            self.a[j * self.n + i] = self.a[j * self.n + i] + v;
        }
    }

    pub fn max_abs(&self) -> R {
        self.a
            .iter()
            .fold(R::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[R]) -> Vec<R> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(R::zero(), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
/// Returns `None` when a pivot drops below `tol` times the largest diagonal,
/// i.e. when `A` is (numerically) not positive definite.
pub fn cholesky_solve<R: Real>(a: &SymMat<R>, b: &[R]) -> Option<Vec<R>> {
    let n = a.n;
    if n == 0 {
        return Some(Vec::new());
    }
    let scale = (0..n).fold(R::zero(), |m, i| m.max(a.get(i, i).abs()));
    if scale <= R::zero() {
        return None;
    }
    let tol = scale * R::of(1e-13);
    let mut l = vec![R::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= tol {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = vec![R::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<R: Real>(m: &SymMat<R>) -> Vec<R> {
    let n = m.n;
    if n == 0 {
        return Vec::new();
    }
    let mut a = m.a.clone();
    let idx = |i: usize, j: usize| i * n + j;
    let scale = m.max_abs().max(R::of(1e-300));
    for _sweep in 0..64 {
        let mut off = R::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(a[idx(i, j)].abs());
            }
        }
        if off <= scale * R::of(1e-15) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                if apq.abs() <= scale * R::of(1e-18) {
                    continue;
                }
                let theta = (a[idx(q, q)] - a[idx(p, p)]) / (R::of(2.0) * apq);
                let t = {
                    let s = if theta >= R::zero() { R::one() } else { -R::one() };
                    s / (theta.abs() + (theta * theta + R::one()).sqrt())
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<R> = (0..n).map(|i| a[idx(i, i)]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}
