//! Membership tests and sampling of the projective spectrum P(A) and its
//! affine slices.
//!
//! Spectrum points on a line come from the roots of the restricted
//! determinant polynomial; each root is then polished by Newton steps on
//! t -> det A(a + t b) itself (log-derivative via Jacobi's formula), which
//! keeps margins tight even at larger matrix sizes where the monomial
//! coefficients of the restriction are badly scaled.

use num_complex::Complex64;
use thiserror::Error;

use crate::detpoly::{self, DetPolyError};
use crate::linalg::{self, LinalgError, Lu};
use crate::pencil::{MatrixTuple, PencilError, ProjectivePoint};
use crate::rng::SeededRng;

/// Default tolerance on the normalized invertibility margin.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("the line lies inside the projective spectrum")]
    LineInsideSpectrum,
    #[error("chart index {chart} out of range for n = {n}")]
    ChartOutOfRange { chart: usize, n: usize },
    #[error("affine slices are only plotted for n = 1 or n = 2, got n = {n}")]
    UnsupportedDimension { n: usize },
    #[error(transparent)]
    DetPoly(#[from] DetPolyError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Invertibility verdict for A(z) at a (normalized) point.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub invertible: bool,
    /// sigma_min(A(z)) / ||A(z)||_F on the normalized representative.
    pub margin: f64,
    pub tolerance: f64,
    /// Set when z = 0, where A(0) = 0 is singular for every tuple.
    pub degenerate_zero: bool,
}

/// Scale-invariant membership check; z is normalized before evaluation.
pub fn membership(
    a: &MatrixTuple,
    z: &[Complex64],
    tol: f64,
) -> Result<MembershipVerdict, SpectrumError> {
    let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(MembershipVerdict {
            invertible: false,
            margin: 0.0,
            tolerance: tol,
            degenerate_zero: true,
        });
    }
    let zn: Vec<Complex64> = z.iter().map(|&c| c / norm).collect();
    let m = a.evaluate(&zn)?;
    let fro = m.frobenius_norm();
    let margin = if fro == 0.0 {
        0.0
    } else {
        linalg::sigma_min(&m)? / fro
    };
    Ok(MembershipVerdict {
        invertible: margin > tol,
        margin,
        tolerance: tol,
        degenerate_zero: false,
    })
}

/// A sampled spectrum point with the root multiplicity of the line
/// restriction it came from.
#[derive(Debug, Clone)]
pub struct SpectrumPoint {
    pub point: ProjectivePoint,
    pub multiplicity: usize,
    /// True when this is the direction point \[b\] contributed by a degree
    /// drop of the restriction (a root at infinity of the line chart).
    pub at_infinity: bool,
}

/// All intersections of the line {a + t b} with P(A), as normalized
/// projective points. The degree deficit of the restriction is reported
/// as the point \[b\] with the missing multiplicity.
pub fn line_sample(
    a: &MatrixTuple,
    base: &[Complex64],
    dir: &[Complex64],
) -> Result<Vec<SpectrumPoint>, SpectrumError> {
    let poly = detpoly::restrict_to_line(a, base, dir)?;
    if poly.is_zero() {
        return Err(SpectrumError::LineInsideSpectrum);
    }
    let raw = match detpoly::roots(&poly) {
        Ok(r) => r,
        Err(DetPolyError::ZeroPolynomial) => return Err(SpectrumError::LineInsideSpectrum),
        Err(e) => return Err(e.into()),
    };
    let dir_matrix = a.evaluate(dir)?;
    let refined: Vec<Complex64> = raw
        .into_iter()
        .map(|t| newton_refine_root(a, base, dir, &dir_matrix, t))
        .collect();

    let mut out = Vec::new();
    for (root, multiplicity) in detpoly::cluster_roots(&refined) {
        let coords: Vec<Complex64> = base
            .iter()
            .zip(dir)
            .map(|(&x, &y)| x + root * y)
            .collect();
        if let Some(point) = ProjectivePoint::new(&coords) {
            out.push(SpectrumPoint {
                point,
                multiplicity,
                at_infinity: false,
            });
        }
    }
    let deficit = a.k().saturating_sub(poly.degree());
    if deficit > 0 {
        if let Some(point) = ProjectivePoint::new(dir) {
            out.push(SpectrumPoint {
                point,
                multiplicity: deficit,
                at_infinity: true,
            });
        }
    }
    Ok(out)
}

/// Newton steps on t -> det A(a + t b) using the log-derivative
/// d/dt log det = Tr(A(z)^-1 A(b)). Backward stable through the LU
/// factorization, unlike polishing against the monomial coefficients.
fn newton_refine_root(
    a: &MatrixTuple,
    base: &[Complex64],
    dir: &[Complex64],
    dir_matrix: &linalg::ComplexMatrix,
    mut t: Complex64,
) -> Complex64 {
    for _ in 0..3 {
        let z: Vec<Complex64> = base.iter().zip(dir).map(|(&x, &y)| x + t * y).collect();
        let m = match a.evaluate(&z) {
            Ok(m) => m,
            Err(_) => return t,
        };
        let lu = match Lu::factor(&m) {
            Ok(lu) => lu,
            Err(_) => return t,
        };
        if lu.rcond_estimate() < 1e-15 {
            return t; // pinned to a numerically exact root
        }
        let inv_times_dir = match lu.solve_mat(dir_matrix, 1e-15) {
            Ok(x) => x,
            Err(_) => return t,
        };
        let log_derivative = inv_times_dir.trace();
        if log_derivative.norm() < 1e-300 {
            return t;
        }
        let step = Complex64::new(1.0, 0.0) / log_derivative;
        if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 0.5 * (1.0 + t.norm()) {
            return t;
        }
        t -= step;
    }
    t
}

/// A cloud point with the membership margin it re-verified at.
#[derive(Debug, Clone)]
pub struct CloudPoint {
    pub point: ProjectivePoint,
    pub multiplicity: usize,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct CloudSample {
    pub points: Vec<CloudPoint>,
    /// Lines skipped because they were inside the spectrum (or degenerate).
    pub skipped_lines: usize,
}

/// Spectrum points harvested from pseudo-random lines; deterministic for
/// a given seed. Every point is re-verified through [`membership`].
pub fn cloud_sample(
    a: &MatrixTuple,
    num_lines: usize,
    seed: u64,
) -> Result<CloudSample, SpectrumError> {
    let mut rng = SeededRng::new(seed);
    let mut points = Vec::new();
    let mut skipped = 0usize;
    for _ in 0..num_lines {
        let base = rng.unit_vector(a.count());
        let dir = rng.unit_vector(a.count());
        match line_sample(a, &base, &dir) {
            Ok(samples) => {
                for s in samples {
                    let verdict = membership(a, s.point.coords(), MEMBERSHIP_TOL)?;
                    points.push(CloudPoint {
                        point: s.point,
                        multiplicity: s.multiplicity,
                        margin: verdict.margin,
                    });
                }
            }
            Err(SpectrumError::LineInsideSpectrum) | Err(SpectrumError::DetPoly(DetPolyError::DependentDirections)) => {
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(CloudSample {
        points,
        skipped_lines: skipped,
    })
}

/// Rectangle + resolution for affine slices.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone)]
pub struct AffineSliceCell {
    pub x: f64,
    pub y: f64,
    pub margin: f64,
}

/// Margins over the affine chart z_chart = 1. For n = 1 the grid covers
/// the complex coordinate xi (x = Re, y = Im); for n = 2 it covers the
/// two affine coordinates along the real axes.
pub fn affine_slice(
    a: &MatrixTuple,
    chart: usize,
    grid: &GridSpec,
    tol: f64,
) -> Result<Vec<AffineSliceCell>, SpectrumError> {
    let n = a.n();
    if chart > n {
        return Err(SpectrumError::ChartOutOfRange { chart, n });
    }
    if n != 1 && n != 2 {
        return Err(SpectrumError::UnsupportedDimension { n });
    }
    let others: Vec<usize> = (0..=n).filter(|&j| j != chart).collect();
    let mut out = Vec::with_capacity(grid.nx * grid.ny);
    for iy in 0..grid.ny {
        let y = if grid.ny <= 1 {
            grid.y_min
        } else {
            grid.y_min + (grid.y_max - grid.y_min) * iy as f64 / (grid.ny - 1) as f64
        };
        for ix in 0..grid.nx {
            let x = if grid.nx <= 1 {
                grid.x_min
            } else {
                grid.x_min + (grid.x_max - grid.x_min) * ix as f64 / (grid.nx - 1) as f64
            };
            let mut z = vec![Complex64::new(0.0, 0.0); n + 1];
            z[chart] = Complex64::new(1.0, 0.0);
            if n == 1 {
                z[others[0]] = Complex64::new(x, y);
            } else {
                z[others[0]] = Complex64::new(x, 0.0);
                z[others[1]] = Complex64::new(y, 0.0);
            }
            let verdict = membership(a, &z, tol)?;
            out.push(AffineSliceCell {
                x,
                y,
                margin: verdict.margin,
            });
        }
    }
    Ok(out)
}
