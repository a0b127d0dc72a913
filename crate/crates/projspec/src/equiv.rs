//! Similarity of Maurer-Cartan forms and recovery of the (U, V) pair
//! with U A_j V = B_j.
//!
//! The solver samples the coefficient matrices F_j = A(z)^-1 A_j of both
//! tuples at shared resolvent points and extracts V from the near-null
//! space of the stacked Sylvester-type system F^A_j V - V F^B_j = 0.
//! U is then read off the constancy of A(z) V B(z)^-1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::mcform::{self, FormError};
use crate::pencil::{self, MatrixTuple, PencilError};
use crate::rng::SeededRng;
use crate::spectrum::{self, MEMBERSHIP_TOL};

/// Relative singular-value cut for the near-nullspace. The singular
/// values come from the Gram matrix, which floors them at about
/// sqrt(eps) * sigma_max; the cut sits above that floor and the
/// constancy/residual verification filters any false inclusion.
pub const NULLSPACE_TOL: f64 = 1e-6;
/// Allowed relative wobble of A(z) V B(z)^-1 across samples.
pub const CONSTANCY_TOL: f64 = 1e-8;
/// Residual bound on the verified witness.
pub const WITNESS_RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum EquivError {
    #[error("tuples have different shapes: k={k_a},n={n_a} vs k={k_b},n={n_b}")]
    ShapeMismatch {
        k_a: usize,
        n_a: usize,
        k_b: usize,
        n_b: usize,
    },
    #[error("no admissible sample points in the common resolvent set after {tries} tries")]
    NoSamplePoints { tries: usize },
    #[error("the forms are not similar (empty nullspace)")]
    NotSimilar,
    #[error("candidate rejected: {reason}")]
    CandidateRejected { reason: String },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Spectrum(#[from] crate::spectrum::SpectrumError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// An equivalence pair with the verified relative residual
/// max_j ||U A_j V - B_j|| / ||B_j||.
#[derive(Debug, Clone)]
pub struct EquivalenceWitness {
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub residual: f64,
}

/// Witness schema: `{u, v, residual}` with matrices as `[[re,im]]` rows.
#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessJson {
    pub u: Vec<Vec<[f64; 2]>>,
    pub v: Vec<Vec<[f64; 2]>>,
    pub residual: f64,
}

impl EquivalenceWitness {
    pub fn to_json_string(&self) -> String {
        let json = WitnessJson {
            u: pencil::matrix_to_pairs(&self.u),
            v: pencil::matrix_to_pairs(&self.v),
            residual: self.residual,
        };
        serde_json::to_string_pretty(&json).expect("witness json")
    }
}

/// Near-nullspace candidates for V, with the singular values of the
/// stacked system for diagnostics. Dimension above one means several
/// inequivalent candidates; verification filters them.
#[derive(Debug, Clone)]
pub struct SimilarityCandidates {
    pub basis: Vec<ComplexMatrix>,
    pub singular_values: Vec<f64>,
    pub sample_points: Vec<Vec<Complex64>>,
}

fn check_shapes(a: &MatrixTuple, b: &MatrixTuple) -> Result<(), EquivError> {
    if a.k() != b.k() || a.n() != b.n() {
        return Err(EquivError::ShapeMismatch {
            k_a: a.k(),
            n_a: a.n(),
            k_b: b.k(),
            n_b: b.n(),
        });
    }
    Ok(())
}

/// Rejection-sample unit points lying in both resolvent sets.
fn common_resolvent_points(
    a: &MatrixTuple,
    b: &MatrixTuple,
    count: usize,
    rng: &mut SeededRng,
) -> Result<Vec<Vec<Complex64>>, EquivError> {
    let mut points = Vec::with_capacity(count);
    let tries = 200 * count.max(1);
    for _ in 0..tries {
        if points.len() == count {
            break;
        }
        let z = rng.unit_vector(a.count());
        let ma = spectrum::membership(a, &z, MEMBERSHIP_TOL)?;
        let mb = spectrum::membership(b, &z, MEMBERSHIP_TOL)?;
        if ma.margin > 1e-3 && mb.margin > 1e-3 {
            points.push(z);
        }
    }
    if points.len() < count {
        return Err(EquivError::NoSamplePoints { tries });
    }
    Ok(points)
}

/// Solve the homogeneous system F^A_j(z_s) V = V F^B_j(z_s) over all
/// sampled points: candidates are the near-null right singular vectors of
/// the stacked matrix, reshaped to k x k. Zero candidates means the forms
/// are not similar.
pub fn solve_form_similarity(
    a: &MatrixTuple,
    b: &MatrixTuple,
    samples: usize,
    seed: u64,
) -> Result<SimilarityCandidates, EquivError> {
    check_shapes(a, b)?;
    let k = a.k();
    let k2 = k * k;
    let mut rng = SeededRng::new(seed);
    let nsamples = samples.max(1);
    let points = common_resolvent_points(a, b, nsamples, &mut rng)?;

    // vec(V) is column-stacked: the equation F V - V G = 0 becomes
    // (I (x) F - G^T (x) I) vec(V) = 0
    let rows = points.len() * a.count() * k2;
    let mut stacked = ComplexMatrix::zeros(rows, k2);
    let mut row = 0usize;
    for z in &points {
        let fa = mcform::omega_eval(a, z)?;
        let fb = mcform::omega_eval(b, z)?;
        for (f, g) in fa.coeffs.iter().zip(&fb.coeffs) {
            for col_v in 0..k {
                for row_v in 0..k {
                    // coefficient of V[(p, q)] in equation (row_v, col_v)
                    for p in 0..k {
                        // F V term: F[row_v, p] V[p, col_v]
                        stacked[(row + row_v + col_v * k, p + col_v * k)] += f[(row_v, p)];
                    }
                    for q in 0..k {
                        // -V G term: -V[row_v, q] G[q, col_v]
                        stacked[(row + row_v + col_v * k, row_v + q * k)] -= g[(q, col_v)];
                    }
                }
            }
            row += k2;
        }
    }

    let (null, sigmas) = linalg::nullspace_basis(&stacked, NULLSPACE_TOL)?;
    if null.is_empty() {
        return Err(EquivError::NotSimilar);
    }
    let basis = null
        .into_iter()
        .map(|vecv| {
            // undo column stacking
            ComplexMatrix::from_fn(k, k, |i, j| vecv[i + j * k])
        })
        .map(normalize_gauge)
        .collect();
    Ok(SimilarityCandidates {
        basis,
        singular_values: sigmas,
        sample_points: points,
    })
}

/// Fix the (U, V) -> (U/t, tV) gauge: Frobenius norm one and the
/// largest-modulus entry of V rotated positive real.
fn normalize_gauge(v: ComplexMatrix) -> ComplexMatrix {
    let norm = v.frobenius_norm();
    if norm == 0.0 {
        return v;
    }
    let mut anchor = Complex64::new(0.0, 0.0);
    let mut best = -1.0;
    for i in 0..v.rows() {
        for j in 0..v.cols() {
            let m = v[(i, j)].norm();
            if m > best {
                best = m;
                anchor = v[(i, j)];
            }
        }
    }
    let phase = anchor / anchor.norm();
    v.scale(phase.conj() / norm)
}

/// Check a candidate V: C(z_s) = A(z_s) V B(z_s)^-1 must be constant
/// across samples, its inverse is U, and U A_j V = B_j must verify.
pub fn recover_u(
    a: &MatrixTuple,
    b: &MatrixTuple,
    v: &ComplexMatrix,
    samples: usize,
    seed: u64,
) -> Result<EquivalenceWitness, EquivError> {
    check_shapes(a, b)?;
    let k = a.k();
    if v.rows() != k || v.cols() != k {
        return Err(EquivError::CandidateRejected {
            reason: format!("V is {}x{}, expected {}x{}", v.rows(), v.cols(), k, k),
        });
    }
    let (smin, smax) = linalg::sigma_extremes(v)?;
    if smin <= 1e-10 * smax.max(f64::MIN_POSITIVE) {
        return Err(EquivError::CandidateRejected {
            reason: "V is numerically singular".into(),
        });
    }
    let v = normalize_gauge(v.clone());

    let mut rng = SeededRng::new(seed);
    let points = common_resolvent_points(a, b, samples.max(2), &mut rng)?;
    let mut reference: Option<ComplexMatrix> = None;
    let mut mean = ComplexMatrix::zeros(k, k);
    for z in &points {
        let az = a.evaluate(z)?;
        let bz = b.evaluate(z)?;
        let binv = linalg::inverse(&bz).map_err(|_| EquivError::CandidateRejected {
            reason: "sample point left B's resolvent set".into(),
        })?;
        let c = az.matmul(&v).matmul(&binv);
        if let Some(first) = &reference {
            let dev = c.sub(first).frobenius_norm() / first.frobenius_norm().max(1e-300);
            if dev > CONSTANCY_TOL {
                return Err(EquivError::CandidateRejected {
                    reason: format!("A(z) V B(z)^-1 varies by {dev:.3e} across samples"),
                });
            }
        } else {
            reference = Some(c.clone());
        }
        mean = mean.add(&c);
    }
    let mean = mean.scale(Complex64::new(1.0 / points.len() as f64, 0.0));
    let u = linalg::inverse(&mean).map_err(|_| EquivError::CandidateRejected {
        reason: "constant A(z) V B(z)^-1 is singular".into(),
    })?;

    let mut residual = 0.0f64;
    for (aj, bj) in a.matrices().iter().zip(b.matrices()) {
        let lhs = u.matmul(aj).matmul(&v);
        let scale = bj.frobenius_norm().max(1e-300);
        residual = residual.max(lhs.sub(bj).frobenius_norm() / scale);
    }
    if residual > WITNESS_RESIDUAL_TOL {
        return Err(EquivError::CandidateRejected {
            reason: format!("witness residual {residual:.3e} above {WITNESS_RESIDUAL_TOL:.0e}"),
        });
    }
    Ok(EquivalenceWitness { u, v, residual })
}

/// End-to-end: find V candidates, then verify them; the first verified
/// witness wins. When the nullspace has dimension above one, single basis
/// vectors can each be singular even though the span contains invertible
/// witnesses (the invertibles are open in the span), so random
/// combinations are tried as well.
pub fn find_witness(
    a: &MatrixTuple,
    b: &MatrixTuple,
    seed: u64,
) -> Result<EquivalenceWitness, EquivError> {
    let samples = 2 * a.count();
    let candidates = solve_form_similarity(a, b, samples, seed)?;
    let mut trials: Vec<ComplexMatrix> = candidates.basis.clone();
    if candidates.basis.len() > 1 {
        let mut rng = SeededRng::new(seed ^ 0xb1e55);
        let k = a.k();
        for _ in 0..6 {
            let mut combo = ComplexMatrix::zeros(k, k);
            for v in &candidates.basis {
                combo = combo.add(&v.scale(rng.complex_gaussian()));
            }
            trials.push(normalize_gauge(combo));
        }
    }
    let mut last_rejection = None;
    for v in &trials {
        match recover_u(a, b, v, samples, seed.wrapping_add(1)) {
            Ok(witness) => return Ok(witness),
            Err(EquivError::CandidateRejected { reason }) => {
                last_rejection = Some(reason);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_rejection
        .map(|reason| EquivError::CandidateRejected { reason })
        .unwrap_or(EquivError::NotSimilar))
}

/// Random invertible matrix with condition number at most `max_cond`.
fn random_well_conditioned(k: usize, max_cond: f64, rng: &mut SeededRng) -> ComplexMatrix {
    loop {
        let m = ComplexMatrix::from_fn(k, k, |_, _| rng.complex_gaussian());
        if let Ok((smin, smax)) = linalg::sigma_extremes(&m) {
            if smin > 0.0 && smax / smin <= max_cond {
                return m;
            }
        }
    }
}

/// Test-fixture generator: random invertible (U, V) with condition at
/// most 100 and B_j = U A_j V.
pub fn random_equivalent_tuple(
    a: &MatrixTuple,
    seed: u64,
) -> (MatrixTuple, ComplexMatrix, ComplexMatrix) {
    let mut rng = SeededRng::new(seed);
    let k = a.k();
    let u = random_well_conditioned(k, 100.0, &mut rng);
    let v = random_well_conditioned(k, 100.0, &mut rng);
    let b = MatrixTuple::new(
        a.matrices()
            .iter()
            .map(|aj| u.matmul(aj).matmul(&v))
            .collect(),
    )
    .expect("same shapes");
    (b, u, v)
}
