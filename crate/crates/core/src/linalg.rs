//! Small dense linear algebra: LU solve and least squares.
//!
//! Systems in this crate are tiny (absorbing chains with a handful of states,
//! RBF output layers with at most a few dozen columns), so plain row-major
//! storage and textbook algorithms are used.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pivots with magnitude below this are treated as zero by [`lu_solve`].
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// Relative rank cutoff used by [`least_squares`].
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| self.row(i).iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b)).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve<T: Real>(mut a: Matrix<T>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.cols() });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let tiny = T::lit(SINGULAR_PIVOT);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap()).unwrap();
        let pivot = a[(p, k)];
        if !(pivot.abs() > tiny) {
            return Err(Error::Singular { pivot: pivot.to_f64().unwrap_or(f64::NAN) });
        }
        a.swap_rows(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] = a[(i, j)] - f * v;
            }
            let v = b[k];
            b[i] = b[i] - f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s = (i + 1..n).fold(b[i], |acc, j| acc - a[(i, j)] * x[j]);
        x[i] = s / a[(i, i)];
    }
    Ok(x)
}

/// Minimizes `‖a x − b‖² + ridge ‖x‖²`.
///
/// Uses Householder QR with column pivoting on the ridge-augmented system.
/// Columns whose pivot falls below [`RANK_TOLERANCE`] relative to the
/// leading pivot get a zero coefficient, so rank deficiency with `ridge = 0`
/// still yields a (basic) least-squares solution.
pub fn least_squares<T: Real>(a: &Matrix<T>, b: &[T], ridge: T) -> Result<Vec<T>> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.len() });
    }
    if ridge < T::zero() {
        return Err(Error::InvalidArgument("ridge must be nonnegative".into()));
    }
    let extra = if ridge > T::zero() { n } else { 0 };
    let mut r = Matrix::zeros(m + extra, n);
    r.data[..m * n].copy_from_slice(&a.data);
    let mut rhs = b.to_vec();
    rhs.resize(m + extra, T::zero());
    if extra > 0 {
        let s = ridge.sqrt();
        for j in 0..n {
            r[(m + j, j)] = s;
        }
    }
    let rows = m + extra;
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = rows.min(n);
    let mut rank = 0;
    let mut lead = T::zero();
    let tol = T::lit(RANK_TOLERANCE);
    for k in 0..steps {
        let col_norm2 = |r: &Matrix<T>, j: usize| (k..rows).fold(T::zero(), |acc, i| acc + r[(i, j)] * r[(i, j)]);
        let (best, best_norm2) =
            (k..n)
                .map(|j| (j, col_norm2(&r, j)))
                .fold((k, -T::one()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let norm = best_norm2.sqrt();
        if k == 0 {
            lead = norm;
        }
        if !(norm > tol * lead) || norm == T::zero() {
            break;
        }
        r.swap_cols(k, best);
        perm.swap(k, best);

        let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..rows).map(|i| r[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        if vnorm2 > T::zero() {
            let two = T::lit(2.0);
            for j in k..n {
                let dot = v.iter().enumerate().fold(T::zero(), |acc, (t, &vi)| acc + vi * r[(k + t, j)]);
                let f = two * dot / vnorm2;
                for (t, &vi) in v.iter().enumerate() {
                    r[(k + t, j)] = r[(k + t, j)] - f * vi;
                }
            }
            let dot = v.iter().enumerate().fold(T::zero(), |acc, (t, &vi)| acc + vi * rhs[k + t]);
            let f = two * dot / vnorm2;
            for (t, &vi) in v.iter().enumerate() {
                rhs[k + t] = rhs[k + t] - f * vi;
            }
        }
        rank = k + 1;
    }
    let mut z = vec![T::zero(); rank];
    for i in (0..rank).rev() {
        let s = (i + 1..rank).fold(rhs[i], |acc, j| acc - r[(i, j)] * z[j]);
        z[i] = s / r[(i, i)];
    }
    let mut x = vec![T::zero(); n];
    for (i, zi) in z.into_iter().enumerate() {
        x[perm[i]] = zi;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_pivoting_case() {
        let a = Matrix::<f64>::from_rows(&[vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
        let x = lu_solve(a, vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(lu_solve(a, vec![1.0, 2.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn least_squares_fits_line() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let b: Vec<f64> = (0..5).map(|i| 2.0 + 3.0 * i as f64).collect();
        let x = least_squares(&Matrix::from_rows(&rows).unwrap(), &b, 0.0).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_handles_duplicate_columns() {
        let rows: Vec<Vec<f64>> = (0..4).map(|_| vec![1.0, 1.0]).collect();
        let x = least_squares(&Matrix::from_rows(&rows).unwrap(), &[3.0; 4], 0.0).unwrap();
        assert!((x[0] + x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ridge_matches_normal_equations() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0, (i as f64).sin(), (i as f64 * 0.3).exp()]).collect();
        let a = Matrix::from_rows(&rows).unwrap();
        let b: Vec<f64> = (0..6).map(|i| (i as f64).cos()).collect();
        let ridge = 0.1;
        let x = least_squares(&a, &b, ridge).unwrap();
        let mut ata = Matrix::zeros(3, 3);
        let mut atb = vec![0.0; 3];
        for i in 0..6 {
            for p in 0..3 {
                atb[p] += a[(i, p)] * b[i];
                for q in 0..3 {
                    ata[(p, q)] += a[(i, p)] * a[(i, q)];
                }
            }
        }
        for p in 0..3 {
            ata[(p, p)] += ridge;
        }
        let y = lu_solve(ata, atb).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
    }
}
