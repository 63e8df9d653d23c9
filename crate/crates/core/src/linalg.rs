//! Sparse rate matrices and the two matrix-exponential routes: uniformization
//! for vector actions, scaling-and-squaring for small dense matrices.

use crate::Scalar;

/// Truncation target for the Poisson tail in uniformization.
pub const UNIFORMIZATION_TAIL: f64 = 1e-12;

/// Largest `λ·τ` handled in a single uniformization sub-step.
const MAX_POISSON_MEAN: f64 = 50.0;

/// Row-compressed (sub-)generator: off-diagonal entries in CSR form plus a dense diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGenerator<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
    diag: Vec<T>,
}

impl<T: Scalar> SparseGenerator<T> {
    /// `rows[i]` lists the non-zero off-diagonal `(column, rate)` pairs of row `i`.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>, diag: Vec<T>) -> Self {
        assert_eq!(rows.len(), diag.len());
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                debug_assert!(c < n);
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals, diag }
    }

    /// Rows sum to zero: diagonal set to the negated off-diagonal sum.
    pub fn closed_from_rows(rows: Vec<Vec<(usize, T)>>) -> Self {
        let diag = rows.iter().map(|r| -r.iter().map(|&(_, v)| v).sum::<T>()).collect();
        Self::from_rows(rows, diag)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self, i: usize) -> T {
        self.diag[i]
    }

    pub fn off_diagonal(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn nnz_off_diagonal(&self) -> usize {
        self.vals.iter().filter(|v| **v != T::zero()).count()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.diag[i];
        }
        self.off_diagonal(i).find(|&(c, _)| c == j).map_or(T::zero(), |(_, v)| v)
    }

    pub fn max_exit_rate(&self) -> T {
        self.diag.iter().map(|d| -*d).fold(T::zero(), T::max)
    }

    pub fn row_sum(&self, i: usize) -> T {
        self.diag[i] + self.off_diagonal(i).map(|(_, v)| v).sum::<T>()
    }

    /// `out = vᵀ Q`
    pub fn left_mul(&self, v: &[T], out: &mut [T]) {
        for (o, (&d, &x)) in out.iter_mut().zip(self.diag.iter().zip(v)) {
            *o = d * x;
        }
        for (i, &x) in v.iter().enumerate() {
            if x == T::zero() {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.cols[k];
                out[c] = out[c] + x * self.vals[k];
            }
        }
    }

    /// `out = Q v`
    pub fn right_mul(&self, v: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[i] * v[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + self.vals[k] * v[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            m[(i, i)] = self.diag[i];
            for (c, v) in self.off_diagonal(i) {
                m[(i, c)] = v;
            }
        }
        m
    }
}

/// Which side the vector multiplies the exponential from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `vᵀ exp(Qt)`: forward propagation of a distribution.
    Left,
    /// `exp(Qt) v`: backward propagation of a likelihood.
    Right,
}

/// Action of `exp(Q t)` on a non-negative vector by uniformization.
///
/// Returns the propagated vector rescaled to unit max-norm together with the
/// natural log of the factor removed, so that long horizons under lossy
/// sub-generators never underflow. The true result is `v · exp(log_scale)`.
pub fn expm_action_scaled<T: Scalar>(q: &SparseGenerator<T>, v: &[T], t: T, side: Side) -> (Vec<T>, T) {
    assert_eq!(v.len(), q.n());
    let mut cur = v.to_vec();
    let mut log_scale = rescale(&mut cur);
    let lambda = q.max_exit_rate();
    if t <= T::zero() || lambda == T::zero() || !log_scale.is_finite() {
        return (cur, log_scale);
    }
    let total = lambda * t;
    let n_sub = (total.to_f64_lossy() / MAX_POISSON_MEAN).ceil().max(1.0) as usize;
    let mean = total / T::of(n_sub as f64);
    let tail = T::of(UNIFORMIZATION_TAIL).max(T::epsilon() * T::of(4.0));
    let k_cap = (mean.to_f64_lossy() + 12.0 * mean.to_f64_lossy().sqrt() + 60.0) as usize;
    let mut term = vec![T::zero(); q.n()];
    let mut scratch = vec![T::zero(); q.n()];
    let mut acc = vec![T::zero(); q.n()];
    for _ in 0..n_sub {
        term.copy_from_slice(&cur);
        let mut w = (-mean).exp();
        let mut cum = w;
        for (a, &x) in acc.iter_mut().zip(&term) {
            *a = w * x;
        }
        let mut k = 0usize;
        while T::one() - cum > tail && k < k_cap {
            k += 1;
            // term ← term · (I + Q/λ)
            match side {
                Side::Left => q.left_mul(&term, &mut scratch),
                Side::Right => q.right_mul(&term, &mut scratch),
            }
            for (x, &d) in term.iter_mut().zip(&scratch) {
                *x = (*x + d / lambda).max(T::zero());
            }
            w = w * mean / T::of(k as f64);
            cum = cum + w;
            for (a, &x) in acc.iter_mut().zip(&term) {
                *a = *a + w * x;
            }
        }
        cur.copy_from_slice(&acc);
        log_scale = log_scale + rescale(&mut cur);
        if !log_scale.is_finite() {
            break;
        }
    }
    (cur, log_scale)
}

/// Unscaled `vᵀ exp(Qt)` or `exp(Qt) v`.
pub fn expm_action<T: Scalar>(q: &SparseGenerator<T>, v: &[T], t: T, side: Side) -> Vec<T> {
    let (mut out, log_scale) = expm_action_scaled(q, v, t, side);
    let f = log_scale.exp();
    out.iter_mut().for_each(|x| *x = *x * f);
    out
}

/// Divide by the max-norm; returns `ln(max)`, or `-inf` for the zero vector.
pub(crate) fn rescale<T: Scalar>(v: &mut [T]) -> T {
    let m = v.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if m == T::zero() {
        return T::neg_infinity();
    }
    v.iter_mut().for_each(|x| *x = *x / m);
    m.ln()
}

/// Small dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.iter().flatten().copied().collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn scale(&self, s: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// `vᵀ M`
    pub fn left_mul(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for (i, &x) in v.iter().enumerate() {
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o = *o + x * m;
            }
        }
        out
    }

    /// `M v`
    pub fn right_mul(&self, v: &[T]) -> Vec<T> {
        (0..self.n).map(|i| self.row(i).iter().zip(v).map(|(&m, &x)| m * x).sum()).collect()
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Dense `exp(A)` by scaling and squaring with a Taylor core.
pub fn expm_dense<T: Scalar>(a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let n = a.n();
    let norm = a.norm_inf();
    let mut squarings = 0i32;
    if norm > T::of(0.5) {
        squarings = (norm.to_f64_lossy() / 0.5).log2().ceil() as i32;
    }
    let scaled = a.scale(T::of(0.5f64.powi(squarings)));
    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale(T::one() / T::of(k as f64));
        result = result.add(&term);
        if term.norm_inf() <= T::epsilon() * result.norm_inf() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}
