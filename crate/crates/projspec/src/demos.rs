//! Finite-dimensional stand-ins for the infinite-dimensional examples:
//! the q x q clock-and-shift pair approximating the rotation algebra, and
//! polynomial membership in the disk algebra.
//!
//! The clock-and-shift model is chosen over a truncated bilateral shift
//! because truncation destroys unitarity and with it the spectral locus,
//! while the cyclic model keeps both the commutation relation
//! V U = omega U V and the |z0| = |z1| locus exact at every finite q.
//! It approximates the irrational-angle algebra as q grows; convergence
//! is reported, not asserted at a rate.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::detpoly::{self, DetPolyError, UnivariatePolynomial};
use crate::linalg::ComplexMatrix;
use crate::mcform::LinearFunctional;
use crate::pencil::MatrixTuple;
use crate::periods::{self, IntegrationOpts, PeriodError, PeriodReport};
use crate::spectrum::{self, SpectrumError};

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("clock-and-shift modulus must be at least 2, got {q}")]
    ModulusTooSmall { q: usize },
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    DetPoly(#[from] DetPolyError),
}

/// The q x q clock matrix diag(1, w, ..., w^{q-1}) and the cyclic shift
/// sending e_j to e_{j-1 mod q}, paired so that V U = w U V with
/// w = e^{2 pi i / q}.
pub fn clock_shift_tuple(q: usize) -> Result<MatrixTuple, DemoError> {
    if q < 2 {
        return Err(DemoError::ModulusTooSmall { q });
    }
    let omega = |j: usize| {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / q as f64;
        Complex64::new(theta.cos(), theta.sin())
    };
    let clock = ComplexMatrix::from_fn(q, q, |i, j| {
        if i == j {
            omega(i)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let shift = ComplexMatrix::from_fn(q, q, |i, j| {
        if (i + 1) % q == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(MatrixTuple::new(vec![clock, shift]).expect("square matrices"))
}

/// Closed form of det(z0 U_q + z1 V_q): the identity permutation
/// contributes w^{q(q-1)/2} z0^q, the q-cycle contributes its sign.
pub fn clock_shift_det_closed_form(q: usize, z0: Complex64, z1: Complex64) -> Complex64 {
    let theta = std::f64::consts::PI * (q as f64 - 1.0); // (2 pi / q) * q(q-1)/2
    let phase = Complex64::new(theta.cos(), theta.sin());
    let sign = if q % 2 == 0 { -1.0 } else { 1.0 };
    let mut p0 = Complex64::new(1.0, 0.0);
    let mut p1 = Complex64::new(1.0, 0.0);
    for _ in 0..q {
        p0 *= z0;
        p1 *= z1;
    }
    phase * p0 + p1 * sign
}

/// Period of the normalized trace form over one of the two resolvent
/// components: the outer loop z0 = 2 e^{i theta}, z1 = 1 (the |z0| > |z1|
/// component, where the limiting form is dz0/z0) or the inner loop with
/// the roles swapped. Contract: 2 pi i either way.
pub fn rotation_period_experiment(
    q: usize,
    outer: bool,
    opts: &IntegrationOpts,
) -> Result<PeriodReport, DemoError> {
    let a = clock_shift_tuple(q)?;
    let phi = LinearFunctional::normalized_trace(q);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (center, direction) = if outer {
        (vec![zero, one], vec![one, zero])
    } else {
        (vec![one, zero], vec![zero, one])
    };
    let path = periods::Loop::Circle {
        center,
        direction,
        radius: 2.0,
        samples: 128,
    };
    Ok(periods::integrate(&a, &phi, &path, opts)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct LocusReport {
    pub q: usize,
    pub points: usize,
    pub skipped_lines: usize,
    /// max | |z0| - |z1| | over normalized spectrum points.
    pub max_deviation: f64,
}

/// Sample the finite-q spectrum over random lines and measure how far the
/// cloud strays from the |z0| = |z1| locus. The exact finite-q locus lies
/// on it, so the deviation is pure root-finding error.
pub fn rotation_spectrum_locus(q: usize, lines: usize, seed: u64) -> Result<LocusReport, DemoError> {
    let a = clock_shift_tuple(q)?;
    let cloud = spectrum::cloud_sample(&a, lines, seed)?;
    let mut max_dev = 0.0f64;
    for p in &cloud.points {
        let z = p.point.coords();
        max_dev = max_dev.max((z[0].norm() - z[1].norm()).abs());
    }
    Ok(LocusReport {
        q,
        points: cloud.points.len(),
        skipped_lines: cloud.skipped_lines,
        max_deviation: max_dev,
    })
}

/// Verdict for the disk-algebra tuple (1, w, ..., w^n) at coefficients z:
/// A(z) = sum_j z_j w^j is invertible iff it has no zero in the closed
/// unit disk.
#[derive(Debug, Clone, Serialize)]
pub struct DiskReport {
    pub invertible: bool,
    /// min |root| - 1; `None` for a nonzero constant (no roots at all).
    pub margin: Option<f64>,
    pub roots: Vec<[f64; 2]>,
    /// All-zero coefficients: singular everywhere.
    pub degenerate: bool,
}

pub fn disk_poly_membership(coeffs: &[Complex64]) -> Result<DiskReport, DemoError> {
    let poly = UnivariatePolynomial::new(coeffs.to_vec());
    if poly.is_zero() {
        return Ok(DiskReport {
            invertible: false,
            margin: None,
            roots: vec![],
            degenerate: true,
        });
    }
    if poly.degree() == 0 {
        return Ok(DiskReport {
            invertible: true,
            margin: None,
            roots: vec![],
            degenerate: false,
        });
    }
    let roots = detpoly::roots(&poly)?;
    let min_modulus = roots
        .iter()
        .map(|r| r.norm())
        .fold(f64::INFINITY, f64::min);
    Ok(DiskReport {
        invertible: min_modulus > 1.0,
        margin: Some(min_modulus - 1.0),
        roots: roots.iter().map(|&r| [r.re, r.im]).collect(),
        degenerate: false,
    })
}

/// Independent cross-check for [`disk_poly_membership`]: scan |p| over
/// 4096 boundary points plus interior rings at uniform density and decide
/// invertibility from the minimum against a Lipschitz threshold
/// (max |p'| <= sum_j j |c_j| on the closed disk). A root in the disk
/// forces the grid minimum below lip * h for covering radius h. Returns
/// `None` when a root sits too close to the unit circle for the grid
/// resolution to call the verdict.
pub fn disk_grid_oracle(coeffs: &[Complex64]) -> Option<bool> {
    let poly = UnivariatePolynomial::new(coeffs.to_vec());
    if poly.is_zero() {
        return Some(false);
    }
    if poly.degree() == 0 {
        return Some(true);
    }
    let lip: f64 = poly
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| j as f64 * c.norm())
        .sum();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut min_boundary = f64::INFINITY;
    for b in 0..4096 {
        let theta = two_pi * b as f64 / 4096.0;
        let w = Complex64::new(theta.cos(), theta.sin());
        min_boundary = min_boundary.min(poly.evaluate(w).norm());
    }
    // a root within ~0.004 of the circle makes the verdict grid-ambiguous
    if min_boundary <= lip * 0.004 {
        return None;
    }
    let rings = 256usize;
    let mut min_all = min_boundary.min(poly.evaluate(Complex64::new(0.0, 0.0)).norm());
    for ring in 1..rings {
        let r = ring as f64 / rings as f64;
        let count = ((two_pi * r * rings as f64).ceil() as usize).max(8);
        for s in 0..count {
            let theta = two_pi * s as f64 / count as f64;
            let w = Complex64::new(r * theta.cos(), r * theta.sin());
            min_all = min_all.min(poly.evaluate(w).norm());
        }
    }
    let tau = lip / rings as f64;
    Some(min_all > tau)
}

/// The 3x3 tuple whose determinant factors into a line and a quadric,
/// det A(z) = (z0+z1+z2)(z0^2+z1^2+z2^2). Generates the block algebra
/// C + M_2 inside M_3.
pub fn line_quadric_tuple() -> MatrixTuple {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let a0 = ComplexMatrix::from_rows(&[
        vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
    ]);
    let a1 = ComplexMatrix::from_rows(&[
        vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)],
    ]);
    let a2 = ComplexMatrix::identity(3);
    MatrixTuple::new(vec![a0, a1, a2]).expect("static tuple")
}

/// The two block traces on C + M_2: phi_1 reads the scalar block (its
/// form is d log of the linear factor), phi_2 the 2x2 block trace (d log
/// of the quadric). Both are traces on the generated algebra.
pub fn line_quadric_functionals() -> (LinearFunctional, LinearFunctional) {
    let c = |re: f64| Complex64::new(re, 0.0);
    let phi1 = LinearFunctional::new(
        ComplexMatrix::diag(&[c(1.0), c(0.0), c(0.0)]),
        "phi1",
    )
    .with_claims(true, true);
    let phi2 = LinearFunctional::new(
        ComplexMatrix::diag(&[c(0.0), c(1.0), c(1.0)]),
        "phi2",
    )
    .with_claims(true, true);
    (phi1, phi2)
}
