//! Matrix tuples A = (A_0, ..., A_n), the linear pencil
//! A(z) = z_0 A_0 + ... + z_n A_n, and projective points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PencilError {
    #[error("tuple needs at least one matrix")]
    Empty,
    #[error("matrix {index} is {rows}x{cols}, expected {k}x{k}")]
    ShapeMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        k: usize,
    },
    #[error("point has {got} coordinates, tuple expects {expected}")]
    CoordinateCount { expected: usize, got: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// An (n+1)-tuple of k-by-k complex matrices. Immutable after
/// construction; linear dependence among the matrices is allowed (the
/// independence assumption is only "without loss of generality") and
/// reported by [`MatrixTuple::independence_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    matrices: Vec<ComplexMatrix>,
}

impl MatrixTuple {
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self, PencilError> {
        if matrices.is_empty() {
            return Err(PencilError::Empty);
        }
        let k = matrices[0].rows();
        for (index, m) in matrices.iter().enumerate() {
            if m.rows() != k || m.cols() != k {
                return Err(PencilError::ShapeMismatch {
                    index,
                    rows: m.rows(),
                    cols: m.cols(),
                    k,
                });
            }
            if !m.is_finite() {
                return Err(PencilError::NonFinite);
            }
        }
        Ok(Self { matrices })
    }

    /// Matrix size k.
    pub fn k(&self) -> usize {
        self.matrices[0].rows()
    }

    /// Number of matrices, n + 1.
    pub fn count(&self) -> usize {
        self.matrices.len()
    }

    /// Projective dimension n.
    pub fn n(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, j: usize) -> &ComplexMatrix {
        &self.matrices[j]
    }

    /// The pencil A(z) = sum_j z_j A_j.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<ComplexMatrix, PencilError> {
        if z.len() != self.count() {
            return Err(PencilError::CoordinateCount {
                expected: self.count(),
                got: z.len(),
            });
        }
        let k = self.k();
        let mut out = ComplexMatrix::zeros(k, k);
        for (coeff, m) in z.iter().zip(&self.matrices) {
            if *coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            out = out.add(&m.scale(*coeff));
        }
        Ok(out)
    }

    /// True when all pairwise commutators vanish relative to the factors'
    /// norms.
    pub fn is_commutative(&self, tol: f64) -> bool {
        for i in 0..self.count() {
            for j in (i + 1)..self.count() {
                let a = &self.matrices[i];
                let b = &self.matrices[j];
                let comm = a.commutator(b);
                let scale = a.frobenius_norm() * b.frobenius_norm();
                if comm.frobenius_norm() > tol * scale.max(f64::MIN_POSITIVE) {
                    return false;
                }
            }
        }
        true
    }

    /// Numerical rank of the vectorized matrices; flags linear dependence.
    pub fn independence_check(&self) -> Result<IndependenceReport, PencilError> {
        let k2 = self.k() * self.k();
        let stacked = ComplexMatrix::from_fn(self.count(), k2, |i, j| self.matrices[i].data()[j]);
        // Gram matrix is (n+1)x(n+1), tiny
        let (_, sigmas) = linalg::nullspace_basis(&stacked.adjoint(), 0.0)?;
        let smax = sigmas.last().copied().unwrap_or(0.0);
        let tol = 1e-10 * smax.max(f64::MIN_POSITIVE);
        let rank = sigmas.iter().filter(|&&s| s > tol).count();
        Ok(IndependenceReport {
            rank,
            count: self.count(),
            singular_values: sigmas,
            independent: rank == self.count(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndependenceReport {
    pub rank: usize,
    pub count: usize,
    pub singular_values: Vec<f64>,
    pub independent: bool,
}

// ── Projective points ───────────────────────────────────────────────

/// A point of P^n stored through its canonical representative: unit
/// Euclidean norm, with the largest-modulus coordinate rotated to the
/// positive real axis (ties broken by lowest index). The largest-modulus
/// anchor keeps normalization stable when a mathematically zero
/// coordinate comes out as round-off noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
}

impl ProjectivePoint {
    pub fn new(coords: &[Complex64]) -> Option<Self> {
        let norm = coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        let mut v: Vec<Complex64> = coords.iter().map(|&z| z / norm).collect();
        let mut anchor = 0;
        let mut best = -1.0;
        for (i, z) in v.iter().enumerate() {
            let m = z.norm();
            if m > best {
                best = m;
                anchor = i;
            }
        }
        let phase = v[anchor] / v[anchor].norm();
        let rot = phase.conj();
        for z in v.iter_mut() {
            *z *= rot;
        }
        // scrub the anchor's residual imaginary round-off
        v[anchor] = Complex64::new(v[anchor].re, 0.0);
        Some(Self { coords: v })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Affine coordinates xi_j = z_j / z_chart on the chart where that
    /// coordinate does not vanish; `None` when it (numerically) does.
    pub fn affine_chart(&self, chart: usize) -> Option<Vec<Complex64>> {
        let pivot = self.coords[chart];
        if pivot.norm() < 1e-12 {
            return None;
        }
        Some(
            self.coords
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != chart)
                .map(|(_, &z)| z / pivot)
                .collect(),
        )
    }

    /// Chordal distance between projective points; zero iff they agree as
    /// points of P^n. Cancellation gives it a noise floor around 1e-8 for
    /// nearly identical points; use [`ProjectivePoint::coord_distance`]
    /// when a tighter comparison is needed.
    pub fn distance(&self, other: &Self) -> f64 {
        let inner: Complex64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a.conj() * b)
            .sum();
        (1.0 - inner.norm_sqr()).max(0.0).sqrt()
    }

    /// Largest coordinate deviation of the canonical representatives.
    /// Accurate down to round-off for equal points; only meaningful when
    /// the anchor coordinate is unambiguous.
    pub fn coord_distance(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

// ── JSON interchange ────────────────────────────────────────────────

pub(crate) fn complex_to_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub(crate) fn pair_to_complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub(crate) fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|&z| complex_to_pair(z)).collect())
        .collect()
}

pub(crate) fn pairs_to_matrix(rows: &[Vec<[f64; 2]>]) -> ComplexMatrix {
    let converted: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&p| pair_to_complex(p)).collect())
        .collect();
    ComplexMatrix::from_rows(&converted)
}

/// On-disk tuple schema:
/// `{"k": k, "n": n, "matrices": [[[ [re,im], ... ], ...], ...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct TupleJson {
    pub k: usize,
    pub n: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Error)]
pub enum TupleIoError {
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("declared k={k}, n={n} do not match {count} matrices of size {size}")]
    DeclarationMismatch { k: usize, n: usize, count: usize, size: usize },
    #[error(transparent)]
    Pencil(#[from] PencilError),
}

impl MatrixTuple {
    pub fn to_json(&self) -> TupleJson {
        TupleJson {
            k: self.k(),
            n: self.n(),
            matrices: self.matrices.iter().map(matrix_to_pairs).collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("tuple serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self, TupleIoError> {
        let parsed: TupleJson = serde_json::from_str(s)?;
        let matrices: Vec<ComplexMatrix> =
            parsed.matrices.iter().map(|m| pairs_to_matrix(m)).collect();
        let tuple = MatrixTuple::new(matrices)?;
        if tuple.k() != parsed.k || tuple.n() != parsed.n {
            return Err(TupleIoError::DeclarationMismatch {
                k: parsed.k,
                n: parsed.n,
                count: tuple.count(),
                size: tuple.k(),
            });
        }
        Ok(tuple)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::braid_tuple;
    use crate::demos::{clock_shift_tuple, line_quadric_tuple};
    use crate::rng::SeededRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_braid_at_first_basis_vector() {
        let a = braid_tuple();
        let m = a
            .evaluate(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let expect =
            ComplexMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        assert!(m.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn evaluate_line_quadric_at_ones_has_det_nine() {
        let a = line_quadric_tuple();
        let m = a.evaluate(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let det = linalg::determinant(&m).unwrap();
        assert!((det - c(9.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn evaluate_at_zero_is_zero_matrix() {
        let a = braid_tuple();
        let m = a.evaluate(&[c(0.0, 0.0); 3]).unwrap();
        assert!(m.max_abs() == 0.0);
    }

    #[test]
    fn evaluate_rejects_wrong_coordinate_count() {
        let a = braid_tuple();
        assert!(matches!(
            a.evaluate(&[c(1.0, 0.0)]),
            Err(PencilError::CoordinateCount { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn commutativity_verdicts() {
        assert!(braid_tuple().is_commutative(1e-12));
        assert!(!line_quadric_tuple().is_commutative(1e-8));
        assert!(!clock_shift_tuple(3).unwrap().is_commutative(1e-8));
    }

    #[test]
    fn independence_ranks() {
        // the three braid matrices sum to zero, so the tuple is accepted
        // with a dependence flag: row reduction of the vectorized
        // matrices leaves rank 2
        let report = braid_tuple().independence_check().unwrap();
        assert_eq!(report.rank, 2);
        assert!(!report.independent);

        let i2 = ComplexMatrix::identity(2);
        let dependent = MatrixTuple::new(vec![i2.clone(), i2.clone()]).unwrap();
        let report = dependent.independence_check().unwrap();
        assert_eq!(report.rank, 1);
        assert!(!report.independent);

        let a0 = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let pair = MatrixTuple::new(vec![i2, a0]).unwrap();
        assert_eq!(pair.independence_check().unwrap().rank, 2);
    }

    #[test]
    fn pencil_linearity_and_homogeneity() {
        let a = line_quadric_tuple();
        let mut rng = SeededRng::new(5);
        for _ in 0..10 {
            let z = rng.unit_vector(3);
            let w = rng.unit_vector(3);
            let alpha = rng.complex_gaussian();
            let beta = rng.complex_gaussian();
            let combo: Vec<Complex64> = z
                .iter()
                .zip(&w)
                .map(|(&zi, &wi)| alpha * zi + beta * wi)
                .collect();
            let lhs = a.evaluate(&combo).unwrap();
            let rhs = a
                .evaluate(&z)
                .unwrap()
                .scale(alpha)
                .add(&a.evaluate(&w).unwrap().scale(beta));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);

            let t = rng.complex_gaussian();
            let tz: Vec<Complex64> = z.iter().map(|&zi| zi * t).collect();
            let lhs = a.evaluate(&tz).unwrap();
            let rhs = a.evaluate(&z).unwrap().scale(t);
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn projective_normalization_is_scale_invariant() {
        let mut rng = SeededRng::new(11);
        for _ in 0..20 {
            let v = rng.unit_vector(4);
            let p = ProjectivePoint::new(&v).unwrap();
            let t = rng.complex_gaussian() * 3.0 + Complex64::new(0.05, 0.0);
            let tv: Vec<Complex64> = v.iter().map(|&z| z * t).collect();
            let q = ProjectivePoint::new(&tv).unwrap();
            assert!(p.coord_distance(&q) < 1e-12);
        }
    }

    #[test]
    fn projective_normalization_is_idempotent() {
        let p = ProjectivePoint::new(&[c(0.0, 2.0), c(1.0, 1.0)]).unwrap();
        let q = ProjectivePoint::new(p.coords()).unwrap();
        for (a, b) in p.coords().iter().zip(q.coords()) {
            assert!((a - b).norm() < 1e-15);
        }
        let norm: f64 = p.coords().iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_vector_is_not_projective() {
        assert!(ProjectivePoint::new(&[c(0.0, 0.0), c(0.0, 0.0)]).is_none());
    }

    #[test]
    fn tuple_json_round_trip() {
        let a = line_quadric_tuple();
        let s = a.to_json_string();
        let b = MatrixTuple::from_json_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tuple_json_rejects_bad_declaration() {
        let a = braid_tuple();
        let mut json = a.to_json();
        json.k = 7;
        let s = serde_json::to_string(&json).unwrap();
        assert!(matches!(
            MatrixTuple::from_json_str(&s),
            Err(TupleIoError::DeclarationMismatch { .. })
        ));
    }
}
