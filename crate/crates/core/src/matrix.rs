//! Dense matrices over a generic [`Scalar`].
//!
//! Sizes in this crate are desk-scale (dimension ≤ a few dozen), so the
//! implementation favors exactness and clarity: fraction-free (Bareiss)
//! elimination computes determinants on the exact backend, partial-pivot
//! elimination on the float backend, and the same pivoting split drives
//! linear solves, rank, and nullspace computations.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::new(rows, cols, vec![S::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Order-reversing permutation (antidiagonal of ones).
    pub fn reversal(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, n - 1 - i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix::new(rows, cols, data)
    }

    pub fn diagonal(entries: &[S]) -> Self {
        let n = entries.len();
        let mut m = Matrix::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix::new(self.rows, self.cols, self.data.iter().map(f).collect())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + other[(i, j)].clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - other[(i, j)].clone()
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "inner dimensions must agree in a product"
        );
        let mut out: Matrix<S> = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }

    /// Square matrix power with non-negative exponent.
    pub fn pow(&self, e: usize) -> Self {
        assert!(self.is_square(), "matrix power needs a square matrix");
        let mut acc = Matrix::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn hstack(&self, right: &Self) -> Self {
        assert_eq!(self.rows, right.rows);
        Matrix::from_fn(self.rows, self.cols + right.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                right[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn submatrix(&self, row_ids: &[usize], col_ids: &[usize]) -> Self {
        Matrix::from_fn(row_ids.len(), col_ids.len(), |i, j| {
            self[(row_ids[i], col_ids[j])].clone()
        })
    }

    /// Largest entry modulus (0 for empty matrices).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    /// Max-entry modulus of the difference; the basic residual measure.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Determinant.  Exact backend: fraction-free (Bareiss) elimination with
    /// first-nonzero pivoting — every division is exact.  Float backend:
    /// partial-pivot elimination, det = sign · Π pivots.
    pub fn det(&self) -> Result<S> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(S::one());
        }
        let mut a = self.clone();
        if S::EXACT {
            let mut sign = S::one();
            let mut prev = S::one();
            for k in 0..n - 1 {
                if a[(k, k)].is_zero() {
                    match (k + 1..n).find(|&r| !a[(r, k)].is_zero()) {
                        Some(r) => {
                            a.swap_rows(k, r);
                            sign = -sign;
                        }
                        None => return Ok(S::zero()),
                    }
                }
                for i in k + 1..n {
                    for j in k + 1..n {
                        let num = a[(i, j)].clone() * a[(k, k)].clone()
                            - a[(i, k)].clone() * a[(k, j)].clone();
                        a[(i, j)] = num / prev.clone();
                    }
                    a[(i, k)] = S::zero();
                }
                prev = a[(k, k)].clone();
            }
            Ok(sign * a[(n - 1, n - 1)].clone())
        } else {
            let mut det = S::one();
            for k in 0..n {
                let pivot_row = (k..n)
                    .max_by(|&r, &s| {
                        a[(r, k)]
                            .modulus()
                            .partial_cmp(&a[(s, k)].modulus())
                            .unwrap()
                    })
                    .unwrap();
                if a[(pivot_row, k)].is_zero() {
                    return Ok(S::zero());
                }
                if pivot_row != k {
                    a.swap_rows(k, pivot_row);
                    det = -det;
                }
                let p = a[(k, k)].clone();
                det = det * p.clone();
                for i in k + 1..n {
                    let factor = a[(i, k)].clone() / p.clone();
                    if factor.is_zero() {
                        continue;
                    }
                    for j in k + 1..n {
                        a[(i, j)] =
                            a[(i, j)].clone() - factor.clone() * a[(k, j)].clone();
                    }
                    a[(i, k)] = S::zero();
                }
            }
            Ok(det)
        }
    }

    /// Solve `self · X = rhs` for square `self` via Gauss–Jordan
    /// elimination (first-nonzero pivot on the exact backend, partial
    /// pivoting on the float backend).
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("solve needs a square matrix".into()));
        }
        if self.rows != rhs.rows {
            return Err(Error::Shape("solve: right-hand side height mismatch".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let pivot_row = if S::EXACT {
                (k..n).find(|&r| !a[(r, k)].is_zero())
            } else {
                let r = (k..n)
                    .max_by(|&r, &s| {
                        a[(r, k)]
                            .modulus()
                            .partial_cmp(&a[(s, k)].modulus())
                            .unwrap()
                    })
                    .unwrap();
                (!a[(r, k)].is_zero()).then_some(r)
            };
            let Some(pr) = pivot_row else {
                return Err(Error::Singular("pivot vanished during solve".into()));
            };
            if pr != k {
                a.swap_rows(k, pr);
                b.swap_rows(k, pr);
            }
            let p = a[(k, k)].clone();
            for j in 0..n {
                a[(k, j)] = a[(k, j)].clone() / p.clone();
            }
            for j in 0..b.cols {
                b[(k, j)] = b[(k, j)].clone() / p.clone();
            }
            for i in 0..n {
                if i == k || a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone();
                for j in 0..n {
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                }
                for j in 0..b.cols {
                    b[(i, j)] = b[(i, j)].clone() - f.clone() * b[(k, j)].clone();
                }
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Matrix::identity(self.rows))
    }

    /// Row-echelon rank.  The float backend treats a column as exhausted
    /// when its best remaining pivot is below `rel_tol` times the largest
    /// entry of the original matrix.
    pub fn rank(&self, rel_tol: f64) -> usize {
        self.echelon(rel_tol).1.len()
    }

    /// Reduced row echelon form together with the pivot-column list.
    fn echelon(&self, rel_tol: f64) -> (Matrix<S>, Vec<usize>) {
        let mut a = self.clone();
        let threshold = if S::EXACT {
            0.0
        } else {
            rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
        };
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let best = (r..a.rows)
                .max_by(|&i, &j| {
                    a[(i, c)]
                        .modulus()
                        .partial_cmp(&a[(j, c)].modulus())
                        .unwrap()
                })
                .unwrap();
            let usable = if S::EXACT {
                !a[(best, c)].is_zero()
            } else {
                a[(best, c)].modulus() > threshold
            };
            if !usable {
                continue;
            }
            a.swap_rows(r, best);
            let p = a[(r, c)].clone();
            for j in 0..a.cols {
                a[(r, j)] = a[(r, j)].clone() / p.clone();
            }
            for i in 0..a.rows {
                if i == r || a[(i, c)].is_zero() {
                    continue;
                }
                let f = a[(i, c)].clone();
                for j in 0..a.cols {
                    a[(i, j)] = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    /// A basis of the right nullspace, returned as the rows of an
    /// `(N − rank) × N` matrix `R` with `self · Rᵀ = 0` (bilinear, no
    /// conjugation).  For a full-row-rank `n×N` input this is the
    /// complementary `(N−n)×N` annihilator; a rank-deficient input is
    /// reported as [`Error::Rank`].
    pub fn row_annihilator(&self, rel_tol: f64) -> Result<Self> {
        let (rref, pivots) = self.echelon(rel_tol);
        if pivots.len() < self.rows {
            return Err(Error::Rank(format!(
                "expected full row rank {}, found {}",
                self.rows,
                pivots.len()
            )));
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(free.len(), self.cols);
        for (row, &fc) in free.iter().enumerate() {
            out[(row, fc)] = S::one();
            for (i, &pc) in pivots.iter().enumerate() {
                out[(row, pc)] = -rref[(i, fc)].clone();
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<S: Scalar> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

/// Bilinear dot product (no conjugation).
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len(), "dot product length mismatch");
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Matrix · column vector.
pub fn mat_vec<S: Scalar>(m: &Matrix<S>, v: &[S]) -> Vec<S> {
    assert_eq!(m.cols(), v.len(), "mat_vec length mismatch");
    (0..m.rows()).map(|i| dot(m.row(i), v)).collect()
}

/// Row vector · matrix.
pub fn vec_mat<S: Scalar>(v: &[S], m: &Matrix<S>) -> Vec<S> {
    assert_eq!(m.rows(), v.len(), "vec_mat length mismatch");
    (0..m.cols())
        .map(|j| {
            (0..m.rows()).fold(S::zero(), |acc, i| {
                acc + v[i].clone() * m[(i, j)].clone()
            })
        })
        .collect()
}

/// Outer product `u vᵀ`.
pub fn outer<S: Scalar>(u: &[S], v: &[S]) -> Matrix<S> {
    Matrix::from_fn(u.len(), v.len(), |i, j| u[i].clone() * v[j].clone())
}

/// Standard basis vector of length `n` with a one in slot `i` (0-based).
pub fn unit_vector<S: Scalar>(n: usize, i: usize) -> Vec<S> {
    let mut v = vec![S::zero(); n];
    v[i] = S::one();
    v
}

/// Max entry modulus of a vector.
pub fn vec_max_abs<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{C64, CQ};

    fn qm(rows: Vec<Vec<i64>>) -> Matrix<CQ> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(CQ::from_i64).collect())
                .collect(),
        )
    }

    #[test]
    fn det_exact_small_cases() {
        assert_eq!(qm(vec![vec![5]]).det().unwrap(), CQ::from_i64(5));
        assert_eq!(
            qm(vec![vec![1, 2], vec![3, 4]]).det().unwrap(),
            CQ::from_i64(-2)
        );
        // Cofactor-checked 3x3: det = 1*(45-48) - 2*(36-42) + 3*(32-35) = 0
        assert_eq!(
            qm(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]])
                .det()
                .unwrap(),
            CQ::from_i64(0)
        );
        // Nonsingular 3x3 with a zero leading pivot (forces a row swap):
        // det [[0,1,2],[1,0,3],[4,5,6]] = 0*(0-15) - 1*(6-12) + 2*(5-0) = 16
        assert_eq!(
            qm(vec![vec![0, 1, 2], vec![1, 0, 3], vec![4, 5, 6]])
                .det()
                .unwrap(),
            CQ::from_i64(16)
        );
    }

    /// Brute-force determinant by cofactor expansion (independent oracle).
    fn det_cofactor(m: &Matrix<CQ>) -> CQ {
        let n = m.rows();
        if n == 0 {
            return CQ::from_i64(1);
        }
        if n == 1 {
            return m[(0, 0)].clone();
        }
        let mut acc = CQ::from_i64(0);
        let all_rows: Vec<usize> = (1..n).collect();
        for j in 0..n {
            let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
            let minor = det_cofactor(&m.submatrix(&all_rows, &cols));
            let signed = if j % 2 == 0 {
                m[(0, j)].clone()
            } else {
                -m[(0, j)].clone()
            };
            acc = acc + signed * minor;
        }
        acc
    }

    #[test]
    fn det_matches_cofactor_oracle() {
        // A fixed 4x4 with mixed signs and a repeated value.
        let m = qm(vec![
            vec![2, -1, 0, 3],
            vec![1, 1, 4, -2],
            vec![0, 5, -1, 1],
            vec![3, 0, 2, 2],
        ]);
        assert_eq!(m.det().unwrap(), det_cofactor(&m));
    }

    #[test]
    fn det_float_partial_pivot() {
        let m = Matrix::<C64>::from_rows(vec![
            vec![C64::from_re_im(1e-12, 0.0), C64::from_i64(1)],
            vec![C64::from_i64(1), C64::from_i64(1)],
        ]);
        // det = 1e-12 - 1; partial pivoting keeps this accurate.
        let d = m.det().unwrap();
        assert!((d.re + 1.0).abs() < 1e-11 && d.im == 0.0);
    }

    #[test]
    fn solve_and_inverse() {
        let a = qm(vec![vec![2, 1], vec![5, 3]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2));
        let rhs = qm(vec![vec![1], vec![0]]);
        let x = a.solve(&rhs).unwrap();
        assert_eq!(a.mul(&x), rhs);
    }

    #[test]
    fn solve_reports_singular() {
        let a = qm(vec![vec![1, 2], vec![2, 4]]);
        assert!(matches!(
            a.solve(&Matrix::identity(2)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn annihilator_of_all_ones_row() {
        // A = [1 1 1]: complementary annihilator is 2x3 with A·R^T = 0.
        let a = qm(vec![vec![1, 1, 1]]);
        let r = a.row_annihilator(1e-12).unwrap();
        assert_eq!((r.rows(), r.cols()), (2, 3));
        let prod = a.mul(&r.transpose());
        assert_eq!(prod, Matrix::zeros(1, 2));
        assert_eq!(r.rank(1e-12), 2);
    }

    #[test]
    fn annihilator_rejects_rank_deficient() {
        let a = qm(vec![vec![1, 2, 3], vec![2, 4, 6]]);
        assert!(matches!(a.row_annihilator(1e-12), Err(Error::Rank(_))));
    }

    #[test]
    fn annihilator_float_backend() {
        let a = Matrix::<C64>::from_rows(vec![
            vec![C64::from_i64(1), C64::from_i64(2), C64::from_i64(3)],
            vec![C64::from_i64(0), C64::from_i64(1), C64::from_i64(-1)],
        ]);
        let r = a.row_annihilator(1e-12).unwrap();
        assert_eq!((r.rows(), r.cols()), (1, 3));
        assert!(a.mul(&r.transpose()).max_abs() < 1e-14);
    }

    #[test]
    fn rank_with_tolerance() {
        let mut a = Matrix::<C64>::identity(3);
        a[(2, 2)] = C64::from_re_im(1e-14, 0.0);
        assert_eq!(a.rank(1e-10), 2);
        assert_eq!(a.rank(1e-16), 3);
    }

    #[test]
    fn reversal_and_power() {
        let j = Matrix::<CQ>::reversal(3);
        assert_eq!(j.mul(&j), Matrix::identity(3));
        let shift = Matrix::<CQ>::from_fn(3, 3, |i, k| {
            if k == i + 1 {
                CQ::from_i64(1)
            } else {
                CQ::from_i64(0)
            }
        });
        assert_eq!(shift.pow(3), Matrix::zeros(3, 3));
    }

    #[test]
    fn vector_helpers() {
        let m = qm(vec![vec![1, 2], vec![3, 4]]);
        let v = vec![CQ::from_i64(1), CQ::from_i64(-1)];
        assert_eq!(mat_vec(&m, &v), vec![CQ::from_i64(-1), CQ::from_i64(-1)]);
        assert_eq!(vec_mat(&v, &m), vec![CQ::from_i64(-2), CQ::from_i64(-2)]);
        let o = outer(&v, &v);
        assert_eq!(o[(0, 1)], CQ::from_i64(-1));
        assert_eq!(dot(&v, &v), CQ::from_i64(2));
    }
}
