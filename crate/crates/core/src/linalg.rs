//! Small dense linear algebra on `f64` slices.
//!
//! Everything in this crate works in ambient dimension at most four, so plain
//! vectors and Householder QR are all that is needed.

use alloc::vec;
use alloc::vec::Vec;

pub type Point = Vec<f64>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Point {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn neg(a: &[f64]) -> Point {
    a.iter().map(|x| -x).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Unit vector in the direction of `a`, or `None` for the zero vector.
pub fn normalize(a: &[f64]) -> Option<Point> {
    let n = norm(a);
    if n <= 1e-300 || !n.is_finite() {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

/// Convex combination `sum_i w[i] * pts[i]`.
pub fn combine(pts: &[Point], w: &[f64]) -> Point {
    let mut out = vec![0.0; pts[0].len()];
    for (p, &wi) in pts.iter().zip(w) {
        for (o, x) in out.iter_mut().zip(p) {
            *o += wi * x;
        }
    }
    out
}

pub fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(core::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Orthonormal basis of the orthogonal complement of the span of `vs`
/// inside `R^dim`, built by Gram-Schmidt against the standard basis.
pub fn complement_basis(vs: &[Point], dim: usize) -> Vec<Point> {
    let mut basis: Vec<Point> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for b in &basis {
            let c = dot(&w, b);
            w = axpy(&w, -c, b);
        }
        if let Some(u) = normalize(&w) {
            if norm(&w) > 1e-12 {
                basis.push(u);
            }
        }
    }
    let fixed = basis.len();
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            e = axpy(&e, -c, b);
        }
        if norm(&e) > 1e-6 {
            basis.push(normalize(&e).unwrap());
        }
    }
    basis.split_off(fixed)
}

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Point {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * x[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let s = (0..self.cols).map(|k| self.get(r, k) * other.get(k, c)).sum();
                out.set(r, c, s);
            }
        }
        out
    }

    /// Largest singular value estimate via power iteration on `A^T A`.
    pub fn operator_norm(&self) -> f64 {
        let ata = self.transpose().matmul(self);
        let mut v = vec![1.0; self.cols];
        let mut lambda = 0.0;
        for _ in 0..50 {
            let w = ata.mul_vec(&v);
            let n = norm(&w);
            if n < 1e-300 {
                return 0.0;
            }
            lambda = n;
            v = scale(&w, 1.0 / n);
        }
        lambda.sqrt()
    }
}

/// Outcome of a least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: Point,
    /// Whether the columns were numerically independent.
    pub full_rank: bool,
    /// Euclidean norm of `A x - b`.
    pub residual: f64,
}

/// Solve `min |A x - b|` by Householder QR. Requires `rows >= cols` for a
/// unique answer; otherwise `full_rank` is `false` and `x` is a basic solution.
pub fn least_squares(a: &Matrix, b: &[f64], rank_tol: f64) -> LeastSquares {
    let (m, n) = (a.rows, a.cols);
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    let scale_ref = r.data.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let steps = m.min(n);
    let mut full_rank = m >= n;
    for k in 0..steps {
        let col_norm = (k..m).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
        if col_norm <= rank_tol * scale_ref {
            full_rank = false;
            continue;
        }
        let alpha = if r.get(k, k) > 0.0 { -col_norm } else { col_norm };
        let mut v: Vec<f64> = (k..m).map(|i| r.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 <= 1e-300 {
            continue;
        }
        for c in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * r.get(i, c)).sum::<f64>() * 2.0 / vnorm2;
            for i in k..m {
                let val = r.get(i, c) - s * v[i - k];
                r.set(i, c, val);
            }
        }
        let s: f64 = (k..m).map(|i| v[i - k] * qtb[i]).sum::<f64>() * 2.0 / vnorm2;
        for i in k..m {
            qtb[i] -= s * v[i - k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..steps).rev() {
        let d = r.get(k, k);
        if d.abs() <= rank_tol * scale_ref {
            full_rank = false;
            x[k] = 0.0;
            continue;
        }
        let s: f64 = (k + 1..n).map(|c| r.get(k, c) * x[c]).sum();
        x[k] = (qtb[k] - s) / d;
    }
    let ax = a.mul_vec(&x);
    let residual = dist(&ax, b);
    LeastSquares { x, full_rank, residual }
}

/// Solve the square system `A x = b` by Gaussian elimination with partial
/// pivoting; `None` if singular.
pub fn solve_square(a: &Matrix, b: &[f64]) -> Option<Point> {
    let n = a.rows;
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let (piv, pval) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pval <= 1e-300 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            rhs.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            if f != 0.0 {
                for c in k..n {
                    m[i * n + c] -= f * m[k * n + c];
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| m[k * n + c] * x[c]).sum();
        x[k] = (rhs[k] - s) / m[k * n + k];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Numerical rank of the vectors `pts[i] - pts[0]`.
pub fn affine_rank(pts: &[Point], tol: f64) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let dim = pts[0].len();
    let mut basis: Vec<Point> = Vec::new();
    for p in &pts[1..] {
        let mut w = sub(p, &pts[0]);
        for b in &basis {
            let c = dot(&w, b);
            w = axpy(&w, -c, b);
        }
        let n = norm(&w);
        if n > tol {
            basis.push(scale(&w, 1.0 / n));
        }
        if basis.len() == dim {
            break;
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_square_system() {
        let mut a = Matrix::zeros(2, 2);
        a.data = vec![2.0, 1.0, 1.0, 3.0];
        let ls = least_squares(&a, &[3.0, 5.0], 1e-12);
        assert!(ls.full_rank);
        assert!((ls.x[0] - 0.8).abs() < 1e-12 && (ls.x[1] - 1.4).abs() < 1e-12);
        assert!(ls.residual < 1e-12);
    }

    #[test]
    fn least_squares_detects_rank_deficiency() {
        let mut a = Matrix::zeros(3, 2);
        a.data = vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
        let ls = least_squares(&a, &[1.0, 2.0, 3.0], 1e-12);
        assert!(!ls.full_rank);
    }

    #[test]
    fn overdetermined_consistent() {
        let mut a = Matrix::zeros(3, 2);
        a.data = vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let ls = least_squares(&a, &[1.0, 2.0, 3.0], 1e-12);
        assert!(ls.full_rank && ls.residual < 1e-12);
        let ls = least_squares(&a, &[1.0, 2.0, 4.0], 1e-12);
        assert!(ls.residual > 0.5);
    }

    #[test]
    fn complement_is_orthonormal() {
        let b = complement_basis(&[vec![1.0, 1.0, 0.0]], 3);
        assert_eq!(b.len(), 2);
        for u in &b {
            assert!((norm(u) - 1.0).abs() < 1e-12);
            assert!(dot(u, &[1.0, 1.0, 0.0]).abs() < 1e-12);
        }
        assert!(dot(&b[0], &b[1]).abs() < 1e-12);
    }
}
