//! Dense complex linear algebra kernels: LU with partial pivoting,
//! Hessenberg/QR eigenvalues, Hermitian Jacobi, singular-value extremes.
//!
//! Everything here is plain `Vec<Complex64>` row-major storage, double
//! precision, desk scale (k up to ~128). All routines are pure functions
//! of their inputs.

use num_complex::Complex64;
use thiserror::Error;

/// Relative rcond threshold factor; the effective threshold is `1e-12 * k`.
pub const DEFAULT_RCOND_FACTOR: f64 = 1e-12;

/// Documented size bound for the dense eigenvalue routine. Not enforced.
pub const DESK_SCALE: usize = 128;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("operation requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is numerically singular (margin {margin:.3e} below threshold {threshold:.3e})")]
    Singular { margin: f64, threshold: f64 },
    #[error("eigenvalue iteration did not converge within {max_iter} iterations")]
    NoConvergence { max_iter: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Build from row slices. Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    /// Build from real row slices (imaginary parts zero).
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let converted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&converted)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &x)| a * x).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of the difference. Handy in tests and
    /// residual checks.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>12.5e}{:+.5e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

// ── LU factorization ────────────────────────────────────────────────

/// Packed LU factorization with partial pivoting, `P*M = L*U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    odd_swaps: bool,
    max_pivot: f64,
    min_pivot: f64,
}

impl Lu {
    pub fn factor(m: &ComplexMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let n = m.rows;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd_swaps = false;
        let mut max_pivot: f64 = 0.0;
        let mut min_pivot = f64::INFINITY;

        for col in 0..n {
            // pick the largest remaining entry in this column
            let mut best = col;
            let mut best_mag = lu[(col, col)].norm();
            for r in (col + 1)..n {
                let mag = lu[(r, col)].norm();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best != col {
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(best, j)];
                    lu[(best, j)] = tmp;
                }
                perm.swap(col, best);
                odd_swaps = !odd_swaps;
            }
            let pivot = lu[(col, col)];
            let pmag = pivot.norm();
            max_pivot = max_pivot.max(pmag);
            min_pivot = min_pivot.min(pmag);
            if pmag == 0.0 {
                // exactly singular column; leave the zero pivot in place
                continue;
            }
            for r in (col + 1)..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                if factor != Complex64::new(0.0, 0.0) {
                    for j in (col + 1)..n {
                        let u = lu[(col, j)];
                        lu[(r, j)] -= factor * u;
                    }
                }
            }
        }
        if n == 0 {
            min_pivot = 0.0;
        }
        Ok(Self {
            lu,
            perm,
            odd_swaps,
            max_pivot,
            min_pivot,
        })
    }

    pub fn size(&self) -> usize {
        self.lu.rows
    }

    /// Cheap conditioning estimate, `min |u_ii| / max |u_ii|`. Zero when a
    /// pivot vanished exactly. This is the margin reported by
    /// [`LinalgError::Singular`]; the honest sigma-ratio is available via
    /// [`sigma_extremes`].
    pub fn rcond_estimate(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    pub fn determinant(&self) -> Complex64 {
        let mut det = if self.odd_swaps {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..self.lu.rows {
            det *= self.lu[(i, i)];
        }
        det
    }

    fn check_rcond(&self, threshold: f64) -> Result<(), LinalgError> {
        let margin = self.rcond_estimate();
        if margin < threshold {
            return Err(LinalgError::Singular { margin, threshold });
        }
        Ok(())
    }

    /// Solve for a single right-hand side without conditioning checks.
    fn solve_vec_unchecked(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        debug_assert_eq!(rhs.len(), n);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut v = rhs[self.perm[i]];
            for j in 0..i {
                v -= self.lu[(i, j)] * y[j];
            }
            y[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in (i + 1)..n {
                v -= self.lu[(i, j)] * y[j];
            }
            y[i] = v / self.lu[(i, i)];
        }
        y
    }

    pub fn solve_vec(&self, rhs: &[Complex64], rcond: f64) -> Result<Vec<Complex64>, LinalgError> {
        self.check_rcond(rcond)?;
        Ok(self.solve_vec_unchecked(rhs))
    }

    /// Solve `M^H x = rhs` from the same factorization:
    /// `M = P^T L U` gives `M^H = U^H L^H P`.
    fn adjoint_solve_vec_unchecked(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        debug_assert_eq!(rhs.len(), n);
        // forward: U^H y = rhs  (U^H is lower triangular)
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut v = rhs[i];
            for j in 0..i {
                v -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = v / self.lu[(i, i)].conj();
        }
        // backward: L^H w = y  (unit upper triangular)
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in (i + 1)..n {
                v -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = v;
        }
        // undo the row permutation: x[perm[i]] = w[i]
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }

    /// Solve `M * X = rhs` column by column.
    pub fn solve_mat(
        &self,
        rhs: &ComplexMatrix,
        rcond: f64,
    ) -> Result<ComplexMatrix, LinalgError> {
        if rhs.rows != self.size() {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.size(),
                left_cols: self.size(),
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        self.check_rcond(rcond)?;
        let mut out = ComplexMatrix::zeros(rhs.rows, rhs.cols);
        for j in 0..rhs.cols {
            let col = rhs.column(j);
            let x = self.solve_vec_unchecked(&col);
            for i in 0..rhs.rows {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, rcond: f64) -> Result<ComplexMatrix, LinalgError> {
        self.solve_mat(&ComplexMatrix::identity(self.size()), rcond)
    }
}

/// Default rcond threshold for a k-by-k system.
pub fn default_rcond(k: usize) -> f64 {
    DEFAULT_RCOND_FACTOR * k.max(1) as f64
}

/// Determinant via pivoted triangular factorization. Exactly singular
/// matrices yield 0, not an error.
pub fn determinant(m: &ComplexMatrix) -> Result<Complex64, LinalgError> {
    Ok(Lu::factor(m)?.determinant())
}

/// Inverse with the default rcond threshold.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    Lu::factor(m)?.inverse(default_rcond(m.rows))
}

/// Inverse plus the achieved residual `max |M*M^-1 - I|`.
pub fn inverse_with_residual(m: &ComplexMatrix) -> Result<(ComplexMatrix, f64), LinalgError> {
    let inv = inverse(m)?;
    let residual = m.matmul(&inv).max_abs_diff(&ComplexMatrix::identity(m.rows));
    Ok((inv, residual))
}

/// Solve `M * X = rhs` with the default rcond threshold.
pub fn solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    Lu::factor(m)?.solve_mat(rhs, default_rcond(m.rows))
}

// ── General eigenvalues: Hessenberg + shifted QR ────────────────────

fn householder_hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows;
    let mut h = m.clone();
    for col in 0..n.saturating_sub(2) {
        // reflect column `col` below the subdiagonal to zero
        let mut norm_sqr = 0.0;
        for i in (col + 1)..n {
            norm_sqr += h[(i, col)].norm_sqr();
        }
        let x0 = h[(col + 1, col)];
        let norm = norm_sqr.sqrt();
        if norm <= f64::MIN_POSITIVE || (norm_sqr - x0.norm_sqr()).sqrt() <= 1e-300 {
            continue;
        }
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        // v = x - alpha*e1, normalized
        let mut v = vec![Complex64::new(0.0, 0.0); n - col - 1];
        v[0] = x0 - alpha;
        for i in (col + 2)..n {
            v[i - col - 1] = h[(i, col)];
        }
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= f64::MIN_POSITIVE {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H := (I - 2 v v^H) H  on rows col+1.., all cols
        for j in col..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in (col + 1)..n {
                dot += v[i - col - 1].conj() * h[(i, j)];
            }
            let dot = dot * 2.0;
            for i in (col + 1)..n {
                let vi = v[i - col - 1];
                h[(i, j)] -= vi * dot;
            }
        }
        // H := H (I - 2 v v^H)  on all rows, cols col+1..
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for j in (col + 1)..n {
                dot += h[(i, j)] * v[j - col - 1];
            }
            let dot = dot * 2.0;
            for j in (col + 1)..n {
                h[(i, j)] -= dot * v[j - col - 1].conj();
            }
        }
    }
    // clean the zeroed part
    for i in 2..n {
        for j in 0..(i - 1) {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Eigenvalues of the trailing 2x2 `[[a,b],[c,d]]`; used for the
/// Wilkinson shift.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    (l1, l2)
}

/// Complex Givens rotation zeroing `b` in `(a, b)`: returns `(c, s, r)`
/// with c real, `[c, s; -conj(s), c] * [a; b] = [r; 0]` and c^2+|s|^2=1.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), a);
    }
    let an = a.norm();
    let r = (an * an + bn * bn).sqrt();
    if an == 0.0 {
        // rotate b straight into the first slot
        return (0.0, b.conj() / bn, Complex64::new(bn, 0.0));
    }
    let c = an / r;
    let phase = a / an;
    let s = phase * b.conj() / r;
    (c, s, phase * r)
}

/// All eigenvalues (with multiplicity) of a general complex square matrix
/// via Hessenberg reduction and shifted QR with deflation. Intended for
/// desk scale (documented bound [`DESK_SCALE`]).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows;
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mut h = householder_hessenberg(m);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is rows/cols [lo, hi)
    let max_iter = 60 * n;
    let mut total_iter = 0usize;
    let mut iter_since_deflation = 0usize;

    while hi > 0 {
        if hi == 1 {
            eigs.push(h[(0, 0)]);
            hi = 0;
            continue;
        }
        // find the start of the active unreduced block
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * local.max(scale * 1e-3) {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            // 1x1 block deflated
            eigs.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        if lo == hi - 2 {
            // 2x2 block: close directly
            let (l1, l2) = eig2(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            );
            eigs.push(l1);
            eigs.push(l2);
            hi -= 2;
            iter_since_deflation = 0;
            continue;
        }

        total_iter += 1;
        iter_since_deflation += 1;
        if total_iter > max_iter {
            return Err(LinalgError::NoConvergence { max_iter });
        }

        // Wilkinson shift from the trailing 2x2; occasional exceptional
        // shift to break symmetry stalls.
        let shift = if iter_since_deflation % 12 == 0 {
            let mag = h[(hi - 1, hi - 2)].norm() + 0.01 * scale;
            h[(hi - 1, hi - 1)] + Complex64::new(0.75 * mag, 0.0)
        } else {
            let (l1, l2) = eig2(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            );
            let corner = h[(hi - 1, hi - 1)];
            if (l1 - corner).norm() <= (l2 - corner).norm() {
                l1
            } else {
                l2
            }
        };

        // explicit shifted QR step on the active block via Givens rotations
        for i in lo..hi {
            h[(i, i)] -= shift;
        }
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo - 1);
        for i in lo..(hi - 1) {
            let (c, s, r) = givens(h[(i, i)], h[(i + 1, i)]);
            h[(i, i)] = r;
            h[(i + 1, i)] = Complex64::new(0.0, 0.0);
            for j in (i + 1)..hi {
                let a = h[(i, j)];
                let b = h[(i + 1, j)];
                h[(i, j)] = a * c + b * s;
                h[(i + 1, j)] = -a * s.conj() + b * c;
            }
            rots.push((c, s));
        }
        // multiply by the rotations on the right: H := R * Q with
        // Q = G_lo^H ... G_{hi-2}^H, i.e. columns (i, i+1) recombine as
        // col_i <- c col_i + s^* col_{i+1}, col_{i+1} <- -s col_i + c col_{i+1}
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            for r in lo..(i + 2).min(hi) {
                let a = h[(r, i)];
                let b = h[(r, i + 1)];
                h[(r, i)] = a * c + b * s.conj();
                h[(r, i + 1)] = -a * s + b * c;
            }
        }
        for i in lo..hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eigs)
}

/// One eigenvector of `m` for (approximate) eigenvalue `lambda` via
/// inverse iteration with a perturbed shift. The caller judges quality
/// through the residual it needs.
pub fn inverse_iteration_eigenvector(
    m: &ComplexMatrix,
    lambda: Complex64,
    seed: u64,
) -> Result<Vec<Complex64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    // the floor keeps the shift meaningful for (near-)zero matrices
    let scale = m.max_abs().max(1.0);
    let mut rng = crate::rng::SeededRng::new(seed);
    let mut delta = 1e-11 * scale;
    for _attempt in 0..6 {
        let shift = lambda + Complex64::new(delta, 0.37 * delta);
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        match Lu::factor(&shifted) {
            Ok(lu) if lu.rcond_estimate() > 0.0 => {
                let mut v: Vec<Complex64> = (0..n).map(|_| rng.complex_gaussian()).collect();
                normalize_vec(&mut v);
                let mut ok = true;
                for _ in 0..3 {
                    let w = lu.solve_vec_unchecked(&v);
                    let norm = vec_norm(&w);
                    if !norm.is_finite() || norm == 0.0 {
                        ok = false;
                        break;
                    }
                    v = w;
                    for z in v.iter_mut() {
                        *z /= norm;
                    }
                }
                if ok {
                    return Ok(v);
                }
            }
            _ => {}
        }
        delta *= 32.0;
    }
    Err(LinalgError::NoConvergence { max_iter: 6 })
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize_vec(v: &mut [Complex64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

// ── Hermitian Jacobi ────────────────────────────────────────────────

/// Eigendecomposition of a Hermitian matrix: real eigenvalues ascending
/// plus a unitary matrix of column eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Cyclic Jacobi for Hermitian matrices. The input is symmetrized
/// implicitly; callers pass `M^H M`-type matrices.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * norm;

    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let beta = apq.norm();
                if beta <= 1e-300 {
                    continue;
                }
                // phase factor making the pivot real, then a real rotation
                let w = apq.conj() / beta;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: J[p] = c*e_p + s*conj(w)... applied as
                // col_p' = c*col_p - s*w*col_q ; col_q' = s*conj(w)*col_p + c*col_q
                let sw = Complex64::new(s, 0.0) * w;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * sw;
                    a[(i, q)] = aip * sw.conj() + aiq * c;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - aqj * sw.conj();
                    a[(q, j)] = apj * sw + aqj * c;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * sw;
                    v[(i, q)] = vip * sw.conj() + viq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

// ── Singular values ─────────────────────────────────────────────────

/// Smallest and largest singular values via eigenvalues of `M^H M`.
/// Works for rectangular matrices with `rows >= cols`.
pub fn sigma_extremes(m: &ComplexMatrix) -> Result<(f64, f64), LinalgError> {
    let gram = m.adjoint().matmul(m);
    let eig = hermitian_eigen(&gram)?;
    let lo = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let hi = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    Ok((lo.sqrt(), hi.sqrt()))
}

/// Smallest singular value of a square matrix; zero means singular up to
/// round-off. Computed as the smallest eigenvalue of `M^H M` by inverse
/// power iteration through the LU factors of M, which keeps membership
/// sampling affordable at larger k. A factorization with a vanished pivot
/// short-circuits to zero.
pub fn sigma_min(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(0.0);
    }
    let lu = Lu::factor(m)?;
    if lu.rcond_estimate() == 0.0 {
        return Ok(0.0);
    }
    let mut rng = crate::rng::SeededRng::new(0x519a ^ n as u64);
    let mut v: Vec<Complex64> = (0..n).map(|_| rng.complex_gaussian()).collect();
    normalize_vec(&mut v);
    let mut sigma = f64::INFINITY;
    for _ in 0..60 {
        // v <- (M^H M)^-1 v
        let y = lu.adjoint_solve_vec_unchecked(&v);
        let mut w = lu.solve_vec_unchecked(&y);
        let norm = vec_norm(&w);
        if !norm.is_finite() || norm == 0.0 {
            return Ok(0.0);
        }
        for z in w.iter_mut() {
            *z /= norm;
        }
        let mv = m.mul_vec(&w);
        let estimate = vec_norm(&mv);
        v = w;
        if (sigma - estimate).abs() <= 1e-9 * estimate.max(f64::MIN_POSITIVE) {
            return Ok(estimate);
        }
        sigma = estimate;
    }
    Ok(sigma)
}

/// Orthonormal near-nullspace of a (possibly rectangular) matrix: the
/// right singular vectors whose singular value is at most
/// `rel_tol * sigma_max`. Returns the vectors and all singular values
/// ascending.
pub fn nullspace_basis(
    m: &ComplexMatrix,
    rel_tol: f64,
) -> Result<(Vec<Vec<Complex64>>, Vec<f64>), LinalgError> {
    let gram = m.adjoint().matmul(m);
    let eig = hermitian_eigen(&gram)?;
    let sigmas: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let smax = sigmas.last().copied().unwrap_or(0.0);
    let mut basis = Vec::new();
    for (j, &s) in sigmas.iter().enumerate() {
        if s <= rel_tol * smax.max(f64::MIN_POSITIVE) {
            basis.push(eig.vectors.column(j));
        }
    }
    Ok((basis, sigmas))
}
