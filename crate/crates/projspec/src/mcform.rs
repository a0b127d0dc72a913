//! The matrix-valued 1-form A(z)^-1 dA(z): pointwise evaluation, the
//! differential identities it satisfies (resolvent derivative, flatness
//! d omega = -omega ^ omega, Euler contraction = I), and scalar forms
//! obtained by applying linear functionals.
//!
//! Derivative checks are diagnostics: they return observed error
//! magnitudes, never booleans. Central differences in each coordinate are
//! valid for the complex derivatives because everything in sight is
//! holomorphic on the resolvent set.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError, Lu};
use crate::pencil::{self, MatrixTuple, PencilError};
use crate::rng::SeededRng;

/// Default finite-difference step, relative to the base point norm.
pub const DEFAULT_STEP_FACTOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("base point is in the projective spectrum (margin {margin:.3e})")]
    SingularPoint { margin: f64 },
    #[error("finite-difference stencil leaves the resolvent set at offset {coordinate}")]
    StencilSingular { coordinate: usize },
    #[error("weight matrix is {got}x{got}, tuple is {expected}x{expected}")]
    WeightSize { expected: usize, got: usize },
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Coefficients F_j = A(z)^-1 A_j of the form at a base point.
#[derive(Debug, Clone)]
pub struct OneFormAtPoint {
    pub base: Vec<Complex64>,
    pub coeffs: Vec<ComplexMatrix>,
}

impl OneFormAtPoint {
    /// Contraction with the Euler field, sum_j z_j F_j. Identically the
    /// identity matrix up to solve error.
    pub fn euler_contraction(&self) -> ComplexMatrix {
        let k = self.coeffs[0].rows();
        let mut acc = ComplexMatrix::zeros(k, k);
        for (zj, fj) in self.base.iter().zip(&self.coeffs) {
            acc = acc.add(&fj.scale(*zj));
        }
        acc
    }
}

/// A linear functional phi(X) = trace(W X) given by its weight matrix.
/// Centrality and trace-ness are claims to be verified by
/// [`centrality_check`], never assumed from the weight's shape.
#[derive(Debug, Clone)]
pub struct LinearFunctional {
    weight: ComplexMatrix,
    label: String,
    pub claimed_central: bool,
    pub claimed_trace: bool,
}

impl LinearFunctional {
    pub fn new(weight: ComplexMatrix, label: impl Into<String>) -> Self {
        Self {
            weight,
            label: label.into(),
            claimed_central: false,
            claimed_trace: false,
        }
    }

    pub fn with_claims(mut self, central: bool, trace: bool) -> Self {
        self.claimed_central = central;
        self.claimed_trace = trace;
        self
    }

    /// The ordinary matrix trace on M_k.
    pub fn full_trace(k: usize) -> Self {
        Self::new(ComplexMatrix::identity(k), "Tr").with_claims(true, true)
    }

    /// The unital trace Tr/k, with phi(I) = 1.
    pub fn normalized_trace(k: usize) -> Self {
        let w = ComplexMatrix::identity(k).scale(Complex64::new(1.0 / k as f64, 0.0));
        Self::new(w, "Tr/k").with_claims(true, true)
    }

    pub fn weight(&self) -> &ComplexMatrix {
        &self.weight
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.weight.rows()
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Complex64 {
        debug_assert_eq!(x.rows(), self.weight.rows());
        let k = x.rows();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..k {
            for j in 0..k {
                acc += self.weight[(i, j)] * x[(j, i)];
            }
        }
        acc
    }

    /// phi(I) = trace(W).
    pub fn value_at_identity(&self) -> Complex64 {
        self.weight.trace()
    }

    pub fn to_json_string(&self) -> String {
        let json = FunctionalJson {
            label: self.label.clone(),
            weight: pencil::matrix_to_pairs(&self.weight),
        };
        serde_json::to_string_pretty(&json).expect("functional json")
    }

    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        let json: FunctionalJson = serde_json::from_str(s)?;
        Ok(Self::new(pencil::pairs_to_matrix(&json.weight), json.label))
    }
}

/// Functional schema: `{label, weight: [[[re,im],...],...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct FunctionalJson {
    pub label: String,
    pub weight: Vec<Vec<[f64; 2]>>,
}

/// The scalar 1-form phi(omega_A) at a point: coefficients phi(F_j).
#[derive(Debug, Clone)]
pub struct ScalarOneFormAtPoint {
    pub base: Vec<Complex64>,
    pub coeffs: Vec<Complex64>,
}

/// Maurer-Cartan coefficients F_j = A(z)^-1 A_j through one LU
/// factorization of A(z).
pub fn omega_eval(a: &MatrixTuple, z: &[Complex64]) -> Result<OneFormAtPoint, FormError> {
    let m = a.evaluate(z)?;
    let lu = Lu::factor(&m)?;
    let rcond = linalg::default_rcond(a.k());
    if lu.rcond_estimate() < rcond {
        let fro = m.frobenius_norm();
        let margin = if fro == 0.0 {
            0.0
        } else {
            linalg::sigma_min(&m)? / fro
        };
        return Err(FormError::SingularPoint { margin });
    }
    let coeffs = a
        .matrices()
        .iter()
        .map(|aj| lu.solve_mat(aj, rcond))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OneFormAtPoint {
        base: z.to_vec(),
        coeffs,
    })
}

fn resolvent_at(a: &MatrixTuple, z: &[Complex64], coordinate: usize) -> Result<ComplexMatrix, FormError> {
    let m = a.evaluate(z)?;
    let lu = Lu::factor(&m)?;
    if lu.rcond_estimate() < linalg::default_rcond(a.k()) {
        return Err(FormError::StencilSingular { coordinate });
    }
    Ok(lu.inverse(linalg::default_rcond(a.k()))?)
}

fn stepped(z: &[Complex64], j: usize, h: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut plus = z.to_vec();
    let mut minus = z.to_vec();
    plus[j] += Complex64::new(h, 0.0);
    minus[j] -= Complex64::new(h, 0.0);
    (plus, minus)
}

/// Verifies d/dz_j A^-1 = -A^-1 A_j A^-1 by central differences; returns
/// the worst Frobenius mismatch over j. Expected O(h^2).
pub fn resolvent_derivative_check(
    a: &MatrixTuple,
    z: &[Complex64],
    h: f64,
) -> Result<f64, FormError> {
    let inv = resolvent_at(a, z, usize::MAX).map_err(|e| match e {
        FormError::StencilSingular { .. } => FormError::SingularPoint { margin: 0.0 },
        other => other,
    })?;
    let mut worst = 0.0f64;
    for j in 0..a.count() {
        let (zp, zm) = stepped(z, j, h);
        let ip = resolvent_at(a, &zp, j)?;
        let im = resolvent_at(a, &zm, j)?;
        let diff = ip.sub(&im).scale(Complex64::new(1.0 / (2.0 * h), 0.0));
        let analytic = inv.matmul(a.matrix(j)).matmul(&inv);
        worst = worst.max(diff.add(&analytic).frobenius_norm());
    }
    Ok(worst)
}

/// Verifies d omega = -omega ^ omega coefficientwise: the worst
/// || (d_i F_j - d_j F_i) + [F_i, F_j] || over i < j, central differences.
pub fn flatness_check(a: &MatrixTuple, z: &[Complex64], h: f64) -> Result<f64, FormError> {
    let form = omega_eval(a, z)?;
    let n1 = a.count();
    // F_j at all stencil points
    let mut plus = Vec::with_capacity(n1);
    let mut minus = Vec::with_capacity(n1);
    for i in 0..n1 {
        let (zp, zm) = stepped(z, i, h);
        plus.push(omega_eval(a, &zp).map_err(|_| FormError::StencilSingular { coordinate: i })?);
        minus.push(omega_eval(a, &zm).map_err(|_| FormError::StencilSingular { coordinate: i })?);
    }
    let scale = Complex64::new(1.0 / (2.0 * h), 0.0);
    let mut worst = 0.0f64;
    for i in 0..n1 {
        for j in (i + 1)..n1 {
            let di_fj = plus[i].coeffs[j].sub(&minus[i].coeffs[j]).scale(scale);
            let dj_fi = plus[j].coeffs[i].sub(&minus[j].coeffs[i]).scale(scale);
            let curl = di_fj.sub(&dj_fi);
            let bracket = form.coeffs[i].commutator(&form.coeffs[j]);
            worst = worst.max(curl.add(&bracket).frobenius_norm());
        }
    }
    Ok(worst)
}

/// Contraction of omega_A with the Euler field at z; contractually the
/// identity matrix.
pub fn euler_contraction(a: &MatrixTuple, z: &[Complex64]) -> Result<ComplexMatrix, FormError> {
    Ok(omega_eval(a, z)?.euler_contraction())
}

/// phi applied coefficientwise: the scalar form sum_j phi(F_j) dz_j.
pub fn apply_functional(
    phi: &LinearFunctional,
    form: &OneFormAtPoint,
) -> Result<ScalarOneFormAtPoint, FormError> {
    let k = form.coeffs[0].rows();
    if phi.size() != k {
        return Err(FormError::WeightSize {
            expected: k,
            got: phi.size(),
        });
    }
    Ok(ScalarOneFormAtPoint {
        base: form.base.clone(),
        coeffs: form.coeffs.iter().map(|f| phi.apply(f)).collect(),
    })
}

/// Max |phi(XY) - phi(YX)| / (||X|| ||Y|| ||W||) over random words in the
/// algebra generated by the tuple and a few resolvent samples. This probes
/// centrality relative to the generated inversion-closed algebra, which is
/// what makes phi(omega_A) closed; sampling finitely many words and
/// resolvents keeps it a heuristic certificate, reported as a magnitude.
pub fn centrality_check(
    phi: &LinearFunctional,
    a: &MatrixTuple,
    word_len: usize,
    trials: usize,
    seed: u64,
) -> Result<f64, FormError> {
    if phi.size() != a.k() {
        return Err(FormError::WeightSize {
            expected: a.k(),
            got: phi.size(),
        });
    }
    let mut rng = SeededRng::new(seed);
    let mut alphabet: Vec<ComplexMatrix> = a.matrices().to_vec();
    let mut found = 0;
    for _ in 0..50 {
        if found >= 3 {
            break;
        }
        let z = rng.unit_vector(a.count());
        if let Ok(m) = a.evaluate(&z) {
            if let Ok(lu) = Lu::factor(&m) {
                if lu.rcond_estimate() > 1e-6 {
                    if let Ok(inv) = lu.inverse(1e-6) {
                        alphabet.push(inv);
                        found += 1;
                    }
                }
            }
        }
    }
    let wnorm = phi.weight().frobenius_norm().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    let random_word = |rng: &mut SeededRng| -> ComplexMatrix {
        let len = 1 + (rng.next_u64() as usize) % word_len.max(1);
        let mut word = alphabet[(rng.next_u64() as usize) % alphabet.len()].clone();
        for _ in 1..len {
            let next = &alphabet[(rng.next_u64() as usize) % alphabet.len()];
            word = word.matmul(next);
        }
        word
    };
    for _ in 0..trials {
        let x = random_word(&mut rng);
        let y = random_word(&mut rng);
        let xy = phi.apply(&x.matmul(&y));
        let yx = phi.apply(&y.matmul(&x));
        let scale = x.frobenius_norm() * y.frobenius_norm() * wnorm;
        if scale > 0.0 {
            worst = worst.max((xy - yx).norm() / scale);
        }
    }
    Ok(worst)
}

/// Max |d_i phi(F_j) - d_j phi(F_i)| over i < j, central differences.
/// For a functional central on the generated algebra this is O(h^2).
pub fn closedness_check(
    a: &MatrixTuple,
    phi: &LinearFunctional,
    z: &[Complex64],
    h: f64,
) -> Result<f64, FormError> {
    if phi.size() != a.k() {
        return Err(FormError::WeightSize {
            expected: a.k(),
            got: phi.size(),
        });
    }
    let n1 = a.count();
    let mut plus = Vec::with_capacity(n1);
    let mut minus = Vec::with_capacity(n1);
    for i in 0..n1 {
        let (zp, zm) = stepped(z, i, h);
        let fp = omega_eval(a, &zp).map_err(|_| FormError::StencilSingular { coordinate: i })?;
        let fm = omega_eval(a, &zm).map_err(|_| FormError::StencilSingular { coordinate: i })?;
        plus.push(apply_functional(phi, &fp)?);
        minus.push(apply_functional(phi, &fm)?);
    }
    let mut worst = 0.0f64;
    for i in 0..n1 {
        for j in (i + 1)..n1 {
            let di_fj = (plus[i].coeffs[j] - minus[i].coeffs[j]) / (2.0 * h);
            let dj_fi = (plus[j].coeffs[i] - minus[j].coeffs[i]) / (2.0 * h);
            worst = worst.max((di_fj - dj_fi).norm());
        }
    }
    Ok(worst)
}

/// Euler contraction of the scalar form: sum_j z_j phi(F_j). Contract:
/// equals phi(I) = trace(W), so the form descends to projective space
/// exactly when trace(W) = 0.
pub fn descent_check(
    a: &MatrixTuple,
    phi: &LinearFunctional,
    z: &[Complex64],
) -> Result<Complex64, FormError> {
    let form = omega_eval(a, z)?;
    let scalar = apply_functional(phi, &form)?;
    Ok(z.iter().zip(&scalar.coeffs).map(|(&zj, &fj)| zj * fj).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::braid_tuple;
    use crate::demos::{clock_shift_tuple, line_quadric_functionals, line_quadric_tuple};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_tuple(values: &[f64]) -> MatrixTuple {
        MatrixTuple::new(
            values
                .iter()
                .map(|&v| ComplexMatrix::diag(&[c(v, 0.0)]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn omega_of_scalar_resolvent() {
        // tuple (1, -1) at (1, 2): F = (1/(1-2)) (1, -1) = (-1, 1)
        let a = scalar_tuple(&[1.0, -1.0]);
        let form = omega_eval(&a, &[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!((form.coeffs[0][(0, 0)] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((form.coeffs[1][(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn omega_of_braid_is_diagonal_arithmetic() {
        let a = braid_tuple();
        let z = [c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let form = omega_eval(&a, &z).unwrap();
        // A(z) = diag(-1, 3, -2); F_j = diag(A_j / A(z))
        let azdiag = [c(-1.0, 0.0), c(3.0, 0.0), c(-2.0, 0.0)];
        for (j, fj) in form.coeffs.iter().enumerate() {
            for i in 0..3 {
                let expect = a.matrix(j)[(i, i)] / azdiag[i];
                assert!((fj[(i, i)] - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn omega_last_coefficient_is_resolvent_for_identity_member() {
        // the third matrix of the line-quadric tuple is I, so F_2 = A^-1
        let a = line_quadric_tuple();
        let z = [c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let form = omega_eval(&a, &z).unwrap();
        let inv = linalg::inverse(&a.evaluate(&z).unwrap()).unwrap();
        assert!(form.coeffs[2].max_abs_diff(&inv) < 1e-12);
    }

    #[test]
    fn omega_errors_on_spectrum_point() {
        let a = braid_tuple();
        // (1,1,0) lies on the plane z0 = z1
        let err = omega_eval(&a, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap_err();
        match err {
            FormError::SingularPoint { margin } => assert!(margin < 1e-10),
            other => panic!("expected singular point, got {other:?}"),
        }
    }

    #[test]
    fn resolvent_derivative_scalar_case() {
        let a = scalar_tuple(&[1.0, -1.0]);
        let err = resolvent_derivative_check(&a, &[c(1.0, 0.0), c(3.0, 0.0)], 1e-4).unwrap();
        assert!(err <= 1e-7, "error {err}");
    }

    #[test]
    fn resolvent_derivative_line_quadric() {
        let a = line_quadric_tuple();
        let z = [c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let err = resolvent_derivative_check(&a, &z, 1e-4).unwrap();
        assert!(err <= 1e-6, "error {err}");
    }

    #[test]
    fn resolvent_derivative_is_second_order() {
        let a = line_quadric_tuple();
        let z = [c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let e1 = resolvent_derivative_check(&a, &z, 2e-3).unwrap();
        let e2 = resolvent_derivative_check(&a, &z, 1e-3).unwrap();
        let ratio = e1 / e2;
        assert!((2.8..5.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn flatness_scalar_tuple_vanishes() {
        let a = scalar_tuple(&[1.0, -2.0]);
        let err = flatness_check(&a, &[c(1.0, 0.0), c(3.0, 0.0)], 1e-4).unwrap();
        assert!(err <= 1e-10, "error {err}");
    }

    #[test]
    fn flatness_line_quadric_and_clock_shift() {
        let a = line_quadric_tuple();
        let err = flatness_check(&a, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], 1e-4).unwrap();
        assert!(err <= 1e-6, "line-quadric error {err}");

        let a = clock_shift_tuple(4).unwrap();
        let err = flatness_check(&a, &[c(2.0, 0.0), c(1.0, 0.0)], 1e-4).unwrap();
        assert!(err <= 1e-6, "clock-shift error {err}");
    }

    #[test]
    fn euler_contraction_is_identity() {
        let cases: Vec<(MatrixTuple, Vec<Complex64>)> = vec![
            (braid_tuple(), vec![c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]),
            (
                line_quadric_tuple(),
                vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            ),
            (clock_shift_tuple(8).unwrap(), vec![c(3.0, 0.0), c(1.0, 0.0)]),
        ];
        for (a, z) in cases {
            let contraction = euler_contraction(&a, &z).unwrap();
            let id = ComplexMatrix::identity(a.k());
            assert!(
                contraction.max_abs_diff(&id) < 1e-12,
                "contraction deviates by {}",
                contraction.max_abs_diff(&id)
            );
        }
    }

    #[test]
    fn functional_coefficients_on_braid_match_log_derivative() {
        // Tr(omega) = d log det; det = (z0-z1)(z2-z0)(z1-z2)
        let a = braid_tuple();
        let z = [c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let phi = LinearFunctional::full_trace(3);
        let form = omega_eval(&a, &z).unwrap();
        let scalar = apply_functional(&phi, &form).unwrap();
        let expect = [
            c(-4.0 / 3.0, 0.0),
            c(0.5, 0.0),
            c(5.0 / 6.0, 0.0),
        ];
        for (got, want) in scalar.coeffs.iter().zip(expect) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn functional_coefficients_line_quadric() {
        // phi_1 reads the 1x1 block: phi_1(omega) = d log(z0+z1+z2)
        let a = line_quadric_tuple();
        let (phi1, phi2) = line_quadric_functionals();
        let z = [c(2.0, 0.0), c(1.0, -1.0), c(0.5, 0.3)];
        let form = omega_eval(&a, &z).unwrap();
        let s1 = apply_functional(&phi1, &form).unwrap();
        let linear = z[0] + z[1] + z[2];
        for got in &s1.coeffs {
            assert!((got - 1.0 / linear).norm() < 1e-12);
        }
        let s2 = apply_functional(&phi2, &form).unwrap();
        let quadric = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
        for (j, got) in s2.coeffs.iter().enumerate() {
            let want = 2.0 * z[j] / quadric;
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_functional_gives_zero_coefficients() {
        let a = braid_tuple();
        let phi = LinearFunctional::new(ComplexMatrix::zeros(3, 3), "0");
        let form = omega_eval(&a, &[c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
        let s = apply_functional(&phi, &form).unwrap();
        for coef in &s.coeffs {
            assert_eq!(*coef, c(0.0, 0.0));
        }
    }

    #[test]
    fn functional_size_mismatch_is_rejected() {
        let a = braid_tuple();
        let phi = LinearFunctional::full_trace(2);
        let form = omega_eval(&a, &[c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!(matches!(
            apply_functional(&phi, &form),
            Err(FormError::WeightSize { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn centrality_of_full_trace() {
        let a = line_quadric_tuple();
        let phi = LinearFunctional::full_trace(3);
        let v = centrality_check(&phi, &a, 4, 48, 3).unwrap();
        assert!(v <= 1e-12, "violation {v}");
    }

    #[test]
    fn centrality_of_block_trace_on_generated_algebra() {
        // phi_2 = trace of the lower 2x2 block is central on C + M_2 even
        // though its weight is not scalar on M_3
        let a = line_quadric_tuple();
        let (_, phi2) = line_quadric_functionals();
        let v = centrality_check(&phi2, &a, 4, 48, 3).unwrap();
        assert!(v <= 1e-10, "violation {v}");
    }

    #[test]
    fn centrality_violated_by_off_diagonal_weight() {
        // strictly upper-triangular rank-1 weight on the noncommutative
        // clock-shift pair: phi(X) = X_{1,0}, already broken by X=U, Y=V
        let a = clock_shift_tuple(2).unwrap();
        let mut w = ComplexMatrix::zeros(2, 2);
        w[(0, 1)] = c(1.0, 0.0);
        let phi = LinearFunctional::new(w, "E01");
        let v = centrality_check(&phi, &a, 3, 48, 5).unwrap();
        assert!(v > 1e-2, "violation only {v}");
    }

    #[test]
    fn closedness_of_central_functionals() {
        let a = line_quadric_tuple();
        let (phi1, _) = line_quadric_functionals();
        let z = [c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let err = closedness_check(&a, &phi1, &z, 1e-4).unwrap();
        assert!(err <= 1e-7, "error {err}");

        let a = clock_shift_tuple(4).unwrap();
        let phi = LinearFunctional::full_trace(4);
        let err = closedness_check(&a, &phi, &[c(2.0, 0.0), c(1.0, 0.0)], 1e-4).unwrap();
        assert!(err <= 1e-7, "error {err}");
    }

    #[test]
    fn closedness_fails_for_non_central_weight() {
        // phi(X) = X_{1,1} is not central on the 2x2 block
        let a = line_quadric_tuple();
        let w = ComplexMatrix::diag(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let phi = LinearFunctional::new(w, "e11");
        let z = [c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let err = closedness_check(&a, &phi, &z, 1e-4).unwrap();
        assert!(err > 1e-3, "unexpectedly closed: {err}");
    }

    #[test]
    fn descent_value_is_trace_of_weight() {
        let a = line_quadric_tuple();
        let z = [c(1.0, 0.0), c(0.5, 0.5), c(2.0, -1.0)];
        // traceless weight descends to projective space
        let w = ComplexMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let phi = LinearFunctional::new(w, "traceless");
        let v = descent_check(&a, &phi, &z).unwrap();
        assert!(v.norm() < 1e-12);

        let full = LinearFunctional::full_trace(3);
        let v = descent_check(&a, &full, &z).unwrap();
        assert!((v - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn coefficients_scale_inverse_linearly() {
        // F_j(t z) = t^-1 F_j(z)
        let a = line_quadric_tuple();
        let z = [c(1.3, 0.2), c(0.4, -0.7), c(0.9, 0.1)];
        let t = c(1.7, 0.4);
        let tz: Vec<Complex64> = z.iter().map(|&zi| zi * t).collect();
        let f = omega_eval(&a, &z).unwrap();
        let ft = omega_eval(&a, &tz).unwrap();
        for (fj, ftj) in f.coeffs.iter().zip(&ft.coeffs) {
            let scaled = fj.scale(c(1.0, 0.0) / t);
            assert!(ftj.max_abs_diff(&scaled) < 1e-10);
        }
    }

    #[test]
    fn functional_json_round_trip() {
        let (phi1, _) = line_quadric_functionals();
        let s = phi1.to_json_string();
        let back = LinearFunctional::from_json_str(&s).unwrap();
        assert_eq!(back.label(), phi1.label());
        assert!(back.weight().max_abs_diff(phi1.weight()) < 1e-15);
    }
}
