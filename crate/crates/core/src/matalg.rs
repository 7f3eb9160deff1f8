//! Designs, covariance matrices and the dense linear algebra behind them.
//!
//! Everything here is O(n³) dense code. Sizes up to a few thousand points
//! are expected; nothing is blocked or sparse except the closed-form
//! tridiagonal OU inverse.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::kernels::Covariance;
use crate::math::sqrt;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from row slices; all rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{}x{} times {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Largest absolute entrywise difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Inner product over the common prefix. Eight independent partial sums
/// let the compiler vectorize; the summation order is fixed, so results are
/// reproducible.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `sums[r] = block_row_r[..len] · lj` for the first `rows` rows of a block
/// stored with stride `n`.
#[inline]
fn dot_rows(block: &[f64], n: usize, rows: usize, len: usize, lj: &[f64], sums: &mut [f64; 4]) {
    if rows < 4 {
        for r in 0..rows {
            sums[r] = dot(&block[r * n..r * n + len], lj);
        }
        return;
    }
    let (r0, r1, r2, r3) = (
        &block[..len],
        &block[n..n + len],
        &block[2 * n..2 * n + len],
        &block[3 * n..3 * n + len],
    );
    let mut acc = [[0.0f64; 4]; 4];
    let chunks = len / 4;
    for c in 0..chunks {
        let o = c * 4;
        for k in 0..4 {
            let y = lj[o + k];
            acc[0][k] += r0[o + k] * y;
            acc[1][k] += r1[o + k] * y;
            acc[2][k] += r2[o + k] * y;
            acc[3][k] += r3[o + k] * y;
        }
    }
    for (r, row) in [r0, r1, r2, r3].iter().enumerate() {
        let mut s = (acc[r][0] + acc[r][2]) + (acc[r][1] + acc[r][3]);
        for o in chunks * 4..len {
            s += row[o] * lj[o];
        }
        sums[r] = s;
    }
}

/// Closed design space `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Interval { a, b })
        } else {
            Err(Error::invalid(alloc::format!("invalid interval [{a}, {b}]")))
        }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }
}

/// Ordered design points inside a compact interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    points: Vec<f64>,
    space: Interval,
}

impl Design {
    pub fn new(points: Vec<f64>, space: Interval) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("a design needs at least two points"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("design points must be finite"));
        }
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("design points must be nondecreasing"));
        }
        if let Some(x) = points.iter().find(|&&x| !space.contains(x)) {
            return Err(Error::invalid(alloc::format!(
                "design point {x} lies outside [{}, {}]",
                space.a,
                space.b
            )));
        }
        Ok(Design { points, space })
    }

    /// Design whose space is the hull of its own points (widened when all
    /// points coincide).
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let hi = if hi > lo { hi } else { lo + 1.0 };
        let space = Interval::new(lo, hi)?;
        Design::new(points, space)
    }

    /// `n` points starting at `start` with common spacing `d`.
    pub fn equispaced(n: usize, d: f64, start: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::invalid(alloc::format!("spacing must be nonnegative, got {d}")));
        }
        let points: Vec<f64> = (0..n).map(|i| start + i as f64 * d).collect();
        Design::from_points(points)
    }

    /// Points `start, start + d₁, start + d₁ + d₂, …`.
    pub fn from_distances(start: f64, distances: &[f64], space: Interval) -> Result<Self> {
        if distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("distances must be finite and nonnegative"));
        }
        let mut points = Vec::with_capacity(distances.len() + 1);
        let mut x = start;
        points.push(x);
        for d in distances {
            x += d;
            points.push(x);
        }
        Design::new(points, space)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn space(&self) -> Interval {
        self.space
    }

    /// `d_i = x_{i+1} - x_i`.
    pub fn distances(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// True when two consecutive points coincide.
    pub fn is_collapsed(&self) -> bool {
        self.points.windows(2).any(|w| w[1] == w[0])
    }
}

/// Covariance matrix `C_ij = C(|x_i - x_j|)`; exactly symmetric.
pub fn kernel_matrix<K: Covariance + ?Sized>(kernel: &K, points: &[f64]) -> Matrix {
    let n = points.len();
    let mut m = Matrix::zeros(n, n);
    let var = kernel.variance();
    for i in 0..n {
        m[(i, i)] = var;
        for j in 0..i {
            let v = kernel.eval(points[i] - points[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Covariance of `n` observations on a unit-step time grid. Only `n`
/// kernel evaluations are needed since the matrix is Toeplitz.
pub fn unit_lag_matrix<K: Covariance + ?Sized>(kernel: &K, n: usize) -> Matrix {
    let mut lags: Vec<f64> = (0..n).map(|l| kernel.eval(l as f64)).collect();
    if let Some(first) = lags.first_mut() {
        *first = kernel.variance();
    }
    Matrix::from_fn(n, n, |i, j| lags[i.abs_diff(j)])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCertificate {
    /// NaN when the eigenvalue routine failed.
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Default PSD slack: `1e-8 · n · σ²`.
pub fn psd_tolerance(n: usize, variance: f64) -> f64 {
    1e-8 * n as f64 * variance
}

fn certify(matrix: &Matrix) -> PsdCertificate {
    let tolerance = psd_tolerance(matrix.rows(), matrix.max_diagonal().abs());
    match symmetric_extremes(matrix) {
        Ok((lo, hi)) => PsdCertificate {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
            tolerance,
            passed: lo >= -tolerance,
        },
        Err(_) => PsdCertificate {
            min_eigenvalue: f64::NAN,
            max_eigenvalue: f64::NAN,
            tolerance,
            passed: false,
        },
    }
}

/// A covariance matrix together with its PSD certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    matrix: Matrix,
    certificate: PsdCertificate,
}

impl CovMatrix {
    /// Certifies an arbitrary square matrix.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("covariance matrix must be square".into()));
        }
        let certificate = certify(&matrix);
        Ok(CovMatrix {
            matrix,
            certificate,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn certificate(&self) -> &PsdCertificate {
        &self.certificate
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }
}

/// Builds `C` for a design and certifies it. A matrix that fails the PSD
/// check is still returned; the failure is recorded on the certificate.
pub fn build<K: Covariance + ?Sized>(kernel: &K, design: &Design) -> CovMatrix {
    let matrix = kernel_matrix(kernel, design.points());
    let certificate = certify(&matrix);
    CovMatrix {
        matrix,
        certificate,
    }
}

/// Relative pivot floor for Cholesky.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Lower Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors a symmetric matrix, reading its lower triangle. Fails with
    /// [`Error::NotPositiveDefinite`] when a pivot drops to
    /// `PIVOT_FLOOR · max diag` or below.
    pub fn factor(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("Cholesky needs a square matrix".into()));
        }
        let n = a.rows();
        let floor = PIVOT_FLOOR * a.max_diagonal().abs().max(f64::MIN_POSITIVE);
        let mut l = Matrix::zeros(n, n);
        // Rows are produced in blocks of four so each earlier row is read
        // once per block instead of once per row.
        let mut i0 = 0;
        while i0 < n {
            let rows = (n - i0).min(4);
            for j in 0..i0 {
                let rj = j * n;
                let (head, tail) = l.data.split_at_mut(i0 * n);
                let lj = &head[rj..rj + j];
                let ljj = head[rj + j];
                let mut sums = [0.0; 4];
                dot_rows(tail, n, rows, j, lj, &mut sums);
                for (r, s) in sums.iter().enumerate().take(rows) {
                    let i = i0 + r;
                    tail[r * n + j] = (a[(i, j)] - s) / ljj;
                }
            }
            for i in i0..i0 + rows {
                for j in i0..=i {
                    let (ri, rj) = (i * n, j * n);
                    let s = dot(&l.data[ri..ri + j], &l.data[rj..rj + j]);
                    let v = a[(i, j)] - s;
                    if i == j {
                        if !(v > floor) {
                            return Err(Error::NotPositiveDefinite { pivot: i, value: v });
                        }
                        l.data[ri + i] = sqrt(v);
                    } else {
                        l.data[ri + j] = v / l.data[rj + j];
                    }
                }
            }
            i0 += rows;
        }
        Ok(Cholesky { l })
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn into_l(self) -> Matrix {
        self.l
    }

    pub fn n(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        forward_substitution(&self.l, b)
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        let mut col = vec![0.0; b.rows()];
        for j in 0..b.cols() {
            for (i, c) in col.iter_mut().enumerate() {
                *c = b[(i, j)];
            }
            let x = self.solve(&col);
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// `L z`.
    pub fn transform(&self, z: &[f64]) -> Vec<f64> {
        lower_mul(&self.l, z)
    }
}

/// `L y = b` for lower-triangular `L`, reading the leading `b.len()` rows.
pub fn forward_substitution(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(b.len());
    for (i, &bi) in b.iter().enumerate() {
        let s = dot(&l.row(i)[..i], &y);
        y.push((bi - s) / l[(i, i)]);
    }
    y
}

/// `L z` for lower-triangular `L` (upper part ignored).
pub fn lower_mul(l: &Matrix, z: &[f64]) -> Vec<f64> {
    (0..z.len()).map(|i| dot(&l.row(i)[..=i], &z[..=i])).collect()
}

/// Cholesky factor of a certified covariance matrix.
pub fn chol_lower(m: &CovMatrix) -> Result<Matrix> {
    Cholesky::factor(m.matrix()).map(Cholesky::into_l)
}

/// Closed-form inverse of the Toeplitz matrix `(c^{|i-j|})` of size `n`:
/// `(1 - c²) C⁻¹` is tridiagonal with `-c` off the diagonal and diagonal
/// `1, 1 + c², …, 1 + c², 1`.
pub fn ou_tridiag_inverse(c: f64, n: usize) -> Result<Matrix> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::invalid(alloc::format!("c must lie in (0, 1), got {c}")));
    }
    if n < 2 {
        return Err(Error::invalid("the tridiagonal inverse needs n >= 2"));
    }
    let scale = 1.0 / (1.0 - c * c);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let diag = if i == 0 || i == n - 1 { 1.0 } else { 1.0 + c * c };
        m[(i, i)] = diag * scale;
        if i + 1 < n {
            m[(i, i + 1)] = -c * scale;
            m[(i + 1, i)] = -c * scale;
        }
    }
    Ok(m)
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns the diagonal and the sub-diagonal.
fn tridiagonalize(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut m = a.clone();
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let norm = sqrt((k + 1..n).map(|i| m[(i, k)] * m[(i, k)]).sum());
        if norm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let x0 = m[(k + 1, k)];
        let alpha = if x0 > 0.0 { -norm } else { norm };
        for i in k + 1..n {
            v[i] = m[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = sqrt((k + 1..n).map(|i| v[i] * v[i]).sum());
        if vnorm == 0.0 {
            off[k] = x0;
            continue;
        }
        for i in k + 1..n {
            v[i] /= vnorm;
        }
        // p = A v on the trailing block, then w = p - (vᵀp) v.
        for i in k + 1..n {
            p[i] = (k + 1..n).map(|j| m[(i, j)] * v[j]).sum();
        }
        let vp: f64 = (k + 1..n).map(|i| v[i] * p[i]).sum();
        for i in k + 1..n {
            p[i] -= vp * v[i];
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[(i, j)] -= 2.0 * (v[i] * p[j] + p[i] * v[j]);
            }
        }
        off[k] = alpha;
        for i in k + 2..n {
            m[(i, k)] = 0.0;
            m[(k, i)] = 0.0;
        }
    }
    if n >= 2 {
        off[n - 2] = m[(n - 1, n - 2)];
    }
    let diag = (0..n).map(|i| m[(i, i)]).collect();
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

const BISECTION_CAP: usize = 400;

fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize, lo: f64, hi: f64) -> Result<f64> {
    // Eigenvalues near zero can only be resolved to about ε·‖A‖.
    let abs_tol = f64::EPSILON * lo.abs().max(hi.abs());
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        if width <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + abs_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NonConvergence {
        iterations: BISECTION_CAP,
    })
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_extremes(a: &Matrix) -> Result<(f64, f64)> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::DimensionMismatch("eigenvalues need a non-empty square matrix".into()));
    }
    if a.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonConvergence { iterations: 0 });
    }
    let n = a.rows();
    let (diag, off) = tridiagonalize(a);
    // Gershgorin bracket on the tridiagonal form.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = 1e-12 * (hi - lo).abs().max(1.0);
    lo -= pad;
    hi += pad;
    let min = kth_eigenvalue(&diag, &off, 0, lo, hi)?;
    let max = kth_eigenvalue(&diag, &off, n - 1, lo, hi)?;
    Ok((min, max))
}

/// Extreme eigenvalues of a covariance matrix.
pub fn eig_extremes(m: &CovMatrix) -> Result<(f64, f64)> {
    symmetric_extremes(m.matrix())
}
