use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{One, Zero};

use crate::scalar::{cr, Real, C};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<C<T>>>) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self {
            rows: n,
            cols: m,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn diagonal(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[C<T>], b: &[C<T>]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
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

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| *x * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o = *o + a * *b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "vector length differs");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// Kronecker product with `self` as the slow index.
    pub fn kron(&self, rhs: &Matrix<T>) -> Self {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        Self::from_fn(r, c, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(C::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn max_abs_diff(&self, other: &Matrix<T>) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// max |M - M†| over entries.
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        self.max_abs_diff(&self.adjoint())
    }

    /// max |M†M - I| over entries.
    pub fn unitary_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.rows))
    }

    pub fn commutator(&self, other: &Matrix<T>) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |s, i| s + self[(i, j)].norm()))
            .fold(T::zero(), T::max)
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor series.
    ///
    /// The argument is scaled so its 1-norm is at most 1/2; the series is then
    /// summed until the next term falls below machine precision relative to
    /// the running sum, and the result squared back.
    pub fn expm(&self) -> Self {
        assert!(self.is_square(), "expm of a non-square matrix");
        let n = self.rows;
        let norm = self.norm_one();
        let half = T::lit(0.5);
        let mut squarings = 0u32;
        let mut scale = T::one();
        while norm * scale > half {
            scale = scale * half;
            squarings += 1;
        }
        let a = self.scale(cr(scale));
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=40 {
            term = term.matmul(&a).scale(cr(T::one() / T::lit(k as f64)));
            sum = &sum + &term;
            if term.norm_one() <= T::epsilon() * T::lit(0.01) {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns ascending eigenvalues and the unitary whose columns
    /// are the matching eigenvectors.
    pub fn eigh(&self) -> (Vec<T>, Matrix<T>) {
        assert!(self.is_square(), "eigh of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut v = Self::identity(n);
        let scale = a.max_abs().max(T::min_positive_value());
        let negligible = T::epsilon() * scale * T::lit(1e-3);
        for _sweep in 0..100 {
            if off_diagonal_norm(&a) <= negligible {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    if r <= negligible {
                        continue;
                    }
                    // Phase e^{iφ} making the (p, q) entry real, then a real
                    // Jacobi rotation zeroing it.
                    let phase = apq.unscale(r);
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (T::lit(2.0) * r);
                    let sign = if tau >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    let t = sign / (tau.abs() + (T::one() + tau * tau).sqrt());
                    let cs = T::one() / (T::one() + t * t).sqrt();
                    let sn = t * cs;
                    // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                    let g_pp = cr(cs);
                    let g_pq = cr(sn);
                    let g_qp = phase.conj() * cr(-sn);
                    let g_qq = phase.conj() * cr(cs);
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * g_pp + akq * g_qp;
                        a[(k, q)] = akp * g_pq + akq * g_qq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * g_pp + vkq * g_qp;
                        v[(k, q)] = vkp * g_pq + vkq * g_qq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[(i, i)]
                .re
                .partial_cmp(&a[(j, j)].re)
                .expect("finite eigenvalues")
        });
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = Self::from_fn(n, n, |i, j| v[(i, order[j])]);
        (values, vectors)
    }
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>) -> T {
    let mut s = T::zero();
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs)
    }
}
