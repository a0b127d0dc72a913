//! Hyperplane decomposition P(A) = union of H_phi for commutative tuples,
//! through joint eigenvalues of a generic combination.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::pencil::{self, MatrixTuple, PencilError, ProjectivePoint};
use crate::rng::SeededRng;

/// Commutativity tolerance used before attempting the decomposition.
pub const COMMUTATIVITY_TOL: f64 = 1e-10;
/// Required joint-eigenvector residual.
pub const JOINT_RESIDUAL_TOL: f64 = 1e-7;
/// Projective distance below which two plane normals are merged.
pub const PLANE_DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArrangementError {
    #[error("tuple is not commutative (commutator norm above {COMMUTATIVITY_TOL:.0e})")]
    NotCommutative,
    #[error(
        "generic combination stayed defective after {attempts} reseeds; \
         exact multiplicities are unsupported for non-diagonalizable tuples"
    )]
    Defective { attempts: usize },
    #[error("a joint eigenvalue tuple vanished entirely: P(A) is all of C^(n+1)")]
    WholeSpace,
    #[error("plane multiplicities sum to {got}, expected k = {expected}")]
    MultiplicityMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A hyperplane H = {z : sum_j z_j normal_j = 0}, the kernel of the
/// multiplicative functional whose values on the tuple form `normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: ProjectivePoint,
    multiplicity: usize,
}

impl Hyperplane {
    pub fn new(normal: &[Complex64], multiplicity: usize) -> Option<Self> {
        ProjectivePoint::new(normal).map(|normal| Self {
            normal,
            multiplicity,
        })
    }

    pub fn normal(&self) -> &[Complex64] {
        self.normal.coords()
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// The defining linear form sum_j z_j normal_j.
    pub fn linear_form(&self, z: &[Complex64]) -> Complex64 {
        z.iter()
            .zip(self.normal.coords())
            .map(|(&zi, &ni)| zi * ni)
            .sum()
    }

    /// Normalized distance of a point to the plane.
    pub fn relative_offset(&self, z: &[Complex64]) -> f64 {
        let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        self.linear_form(z).norm() / norm
    }
}

/// One joint eigenvalue tuple (phi(A_0), ..., phi(A_n)) with its
/// multiplicity and the worst eigen-residual it was read off with.
#[derive(Debug, Clone)]
pub struct JointTuple {
    pub values: Vec<Complex64>,
    pub multiplicity: usize,
    pub residual: f64,
}

/// Joint eigenvalue tuples of a commutative tuple: eigen-decompose a
/// generic random combination and read each phi(A_j) off the shared
/// eigenvectors. Defective combinations are reseeded up to 3 times.
pub fn joint_eigen_tuples(
    a: &MatrixTuple,
    seed: u64,
) -> Result<Vec<JointTuple>, ArrangementError> {
    if !a.is_commutative(COMMUTATIVITY_TOL) {
        return Err(ArrangementError::NotCommutative);
    }
    let k = a.k();
    let attempts = 3;
    let mut last_residual = f64::INFINITY;
    for attempt in 0..attempts {
        let mut rng = SeededRng::new(seed.wrapping_add(attempt as u64));
        let coeffs: Vec<Complex64> = (0..a.count()).map(|_| rng.complex_gaussian()).collect();
        let combo = a.evaluate(&coeffs)?;
        let eigs = match linalg::eigenvalues(&combo) {
            Ok(e) => e,
            Err(LinalgError::NoConvergence { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let clusters = crate::detpoly::cluster_roots(&eigs);
        let mut tuples = Vec::with_capacity(clusters.len());
        let mut ok = true;
        for (lambda, multiplicity) in clusters {
            let v = match linalg::inverse_iteration_eigenvector(&combo, lambda, rng.next_u64()) {
                Ok(v) => v,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            let mut values = Vec::with_capacity(a.count());
            let mut worst = 0.0f64;
            for m in a.matrices() {
                let mv = m.mul_vec(&v);
                // Rayleigh quotient of the unit eigenvector
                let lam: Complex64 = v.iter().zip(&mv).map(|(&vi, &mvi)| vi.conj() * mvi).sum();
                let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
                let res = mv
                    .iter()
                    .zip(&v)
                    .map(|(&mvi, &vi)| (mvi - lam * vi).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    / scale;
                worst = worst.max(res);
                values.push(lam);
            }
            if worst > JOINT_RESIDUAL_TOL {
                ok = false;
                last_residual = last_residual.min(worst);
                break;
            }
            tuples.push(JointTuple {
                values,
                multiplicity,
                residual: worst,
            });
        }
        if ok && tuples.iter().map(|t| t.multiplicity).sum::<usize>() == k {
            return Ok(tuples);
        }
    }
    Err(ArrangementError::Defective { attempts })
}

/// The deduplicated hyperplane arrangement of a commutative tuple,
/// multiplicities summed across merged planes.
pub fn hyperplanes(a: &MatrixTuple) -> Result<Vec<Hyperplane>, ArrangementError> {
    hyperplanes_seeded(a, 0xa77a)
}

pub fn hyperplanes_seeded(a: &MatrixTuple, seed: u64) -> Result<Vec<Hyperplane>, ArrangementError> {
    let tuples = joint_eigen_tuples(a, seed)?;
    let mut planes: Vec<Hyperplane> = Vec::new();
    for t in tuples {
        let scale = t.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tuple_scale: f64 = a
            .matrices()
            .iter()
            .map(|m| m.frobenius_norm())
            .fold(0.0, f64::max);
        if scale <= 1e-10 * tuple_scale.max(f64::MIN_POSITIVE) {
            // phi(A_j) = 0 for all j: every z is singular
            return Err(ArrangementError::WholeSpace);
        }
        let candidate = Hyperplane::new(&t.values, t.multiplicity).expect("nonzero normal");
        match planes
            .iter_mut()
            .find(|p| p.normal.coord_distance(&candidate.normal) <= PLANE_DEDUP_TOL)
        {
            Some(existing) => existing.multiplicity += t.multiplicity,
            None => planes.push(candidate),
        }
    }
    Ok(planes)
}

/// Residual report for the factorization det A(z) = c * prod <z, normal_i>^mult_i.
#[derive(Debug, Clone, Serialize)]
pub struct FactorizationReport {
    pub constant: [f64; 2],
    pub max_relative_residual: f64,
    pub ok: bool,
}

/// Fit the single constant c at 50 random points and report the worst
/// relative mismatch between det A(z) and the plane product.
pub fn verify_factorization(
    a: &MatrixTuple,
    planes: &[Hyperplane],
) -> Result<FactorizationReport, ArrangementError> {
    let total: usize = planes.iter().map(|p| p.multiplicity).sum();
    if total != a.k() {
        return Err(ArrangementError::MultiplicityMismatch {
            got: total,
            expected: a.k(),
        });
    }
    let mut rng = SeededRng::new(0xfac7);
    let npoints = 50;
    let mut dets = Vec::with_capacity(npoints);
    let mut prods = Vec::with_capacity(npoints);
    for _ in 0..npoints {
        let z = rng.unit_vector(a.count());
        dets.push(linalg::determinant(&a.evaluate(&z)?)?);
        let mut prod = Complex64::new(1.0, 0.0);
        for p in planes {
            let f = p.linear_form(&z);
            for _ in 0..p.multiplicity {
                prod *= f;
            }
        }
        prods.push(prod);
    }
    // least-squares constant through the origin
    let num: Complex64 = prods.iter().zip(&dets).map(|(&q, &d)| q.conj() * d).sum();
    let den: f64 = prods.iter().map(|q| q.norm_sqr()).sum();
    let constant = if den > 0.0 {
        num / den
    } else {
        Complex64::new(0.0, 0.0)
    };
    let mut worst = 0.0f64;
    for (q, d) in prods.iter().zip(&dets) {
        let fit = constant * q;
        let scale = d.norm().max(1e-300);
        worst = worst.max((fit - d).norm() / scale);
    }
    Ok(FactorizationReport {
        constant: pencil::complex_to_pair(constant),
        max_relative_residual: worst,
        ok: worst <= 1e-6,
    })
}

/// The diagonal tuple whose spectrum is the braid arrangement
/// (z0 - z1)(z1 - z2)(z2 - z0) = 0.
pub fn braid_tuple() -> MatrixTuple {
    let c = |re: f64| Complex64::new(re, 0.0);
    MatrixTuple::new(vec![
        ComplexMatrix::diag(&[c(1.0), c(-1.0), c(0.0)]),
        ComplexMatrix::diag(&[c(-1.0), c(0.0), c(1.0)]),
        ComplexMatrix::diag(&[c(0.0), c(1.0), c(-1.0)]),
    ])
    .expect("static tuple")
}

// ── JSON interchange ────────────────────────────────────────────────

/// Arrangement schema: a list of `{normal: [[re,im],...], multiplicity}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct HyperplaneJson {
    pub normal: Vec<[f64; 2]>,
    pub multiplicity: usize,
}

impl Hyperplane {
    pub fn to_json(&self) -> HyperplaneJson {
        HyperplaneJson {
            normal: self
                .normal
                .coords()
                .iter()
                .map(|&z| pencil::complex_to_pair(z))
                .collect(),
            multiplicity: self.multiplicity,
        }
    }

    pub fn from_json(json: &HyperplaneJson) -> Option<Self> {
        let normal: Vec<Complex64> = json
            .normal
            .iter()
            .map(|&p| pencil::pair_to_complex(p))
            .collect();
        Hyperplane::new(&normal, json.multiplicity)
    }
}

pub fn arrangement_to_json_string(planes: &[Hyperplane]) -> String {
    let items: Vec<HyperplaneJson> = planes.iter().map(|p| p.to_json()).collect();
    serde_json::to_string_pretty(&items).expect("arrangement json")
}

pub fn arrangement_from_json_str(s: &str) -> Result<Vec<Hyperplane>, serde_json::Error> {
    let items: Vec<HyperplaneJson> = serde_json::from_str(s)?;
    Ok(items
        .iter()
        .filter_map(Hyperplane::from_json)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demos::line_quadric_tuple;
    use crate::spectrum::{self, MEMBERSHIP_TOL};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plane_from(re: [f64; 3]) -> Hyperplane {
        let normal: Vec<Complex64> = re.iter().map(|&x| c(x, 0.0)).collect();
        Hyperplane::new(&normal, 1).unwrap()
    }

    #[test]
    fn braid_tuple_is_the_paper_matrices() {
        let a = braid_tuple();
        assert_eq!(a.k(), 3);
        assert!(a.is_commutative(0.0));
        let d = linalg::determinant(
            &a.evaluate(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap(),
        )
        .unwrap();
        // (1-2)(2-3)(3-1) = 2
        assert!((d - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn joint_tuples_of_braid() {
        let tuples = joint_eigen_tuples(&braid_tuple(), 1).unwrap();
        assert_eq!(tuples.len(), 3);
        let expect: [[f64; 3]; 3] = [[1.0, -1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 1.0, -1.0]];
        for want in expect {
            let found = tuples.iter().any(|t| {
                t.values
                    .iter()
                    .zip(want)
                    .all(|(&got, w)| (got - c(w, 0.0)).norm() < 1e-7)
            });
            assert!(found, "missing joint tuple {want:?}");
        }
        for t in &tuples {
            assert!(t.residual <= JOINT_RESIDUAL_TOL);
            assert_eq!(t.multiplicity, 1);
        }
    }

    #[test]
    fn joint_tuples_of_diagonal_pair() {
        let a = MatrixTuple::new(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]),
        ])
        .unwrap();
        let tuples = joint_eigen_tuples(&a, 5).unwrap();
        assert_eq!(tuples.len(), 2);
        for want in [[1.0, 1.0], [1.0, 2.0]] {
            assert!(tuples.iter().any(|t| {
                t.values
                    .iter()
                    .zip(want)
                    .all(|(&got, w)| (got - c(w, 0.0)).norm() < 1e-8)
            }));
        }
    }

    #[test]
    fn joint_tuples_reject_noncommutative() {
        assert!(matches!(
            joint_eigen_tuples(&line_quadric_tuple(), 1),
            Err(ArrangementError::NotCommutative)
        ));
    }

    #[test]
    fn braid_arrangement_planes() {
        let planes = hyperplanes(&braid_tuple()).unwrap();
        assert_eq!(planes.len(), 3);
        for want in [
            plane_from([1.0, -1.0, 0.0]),
            plane_from([0.0, 1.0, -1.0]),
            plane_from([-1.0, 0.0, 1.0]),
        ] {
            let hit = planes
                .iter()
                .find(|p| p.normal.distance(&want.normal) < 1e-7);
            assert!(hit.is_some(), "missing plane");
            assert_eq!(hit.unwrap().multiplicity(), 1);
        }
    }

    #[test]
    fn diagonal_pair_planes() {
        let a = MatrixTuple::new(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]),
        ])
        .unwrap();
        let planes = hyperplanes(&a).unwrap();
        assert_eq!(planes.len(), 2);
        for want in [[1.0, 1.0], [1.0, 2.0]] {
            let normal: Vec<Complex64> = want.iter().map(|&x| c(x, 0.0)).collect();
            let target = Hyperplane::new(&normal, 1).unwrap();
            assert!(planes
                .iter()
                .any(|p| p.normal.distance(&target.normal) < 1e-7));
        }
    }

    #[test]
    fn degenerate_second_matrix_gives_single_plane() {
        // (I, 0): joint tuples are (1, 0) twice, one plane z0 = 0 with
        // multiplicity k
        let a = MatrixTuple::new(vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)])
            .unwrap();
        let report = a.independence_check().unwrap();
        assert!(!report.independent);
        let planes = hyperplanes(&a).unwrap();
        assert_eq!(planes.len(), 1);
        assert_eq!(planes[0].multiplicity(), 2);
        let target = Hyperplane::new(&[c(1.0, 0.0), c(0.0, 0.0)], 2).unwrap();
        assert!(planes[0].normal.distance(&target.normal) < 1e-8);
    }

    #[test]
    fn whole_space_flagged_for_zero_tuple() {
        let a = MatrixTuple::new(vec![ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 2)])
            .unwrap();
        assert!(matches!(
            hyperplanes(&a),
            Err(ArrangementError::WholeSpace)
        ));
    }

    #[test]
    fn factorization_residuals() {
        let a = braid_tuple();
        let planes = hyperplanes(&a).unwrap();
        let report = verify_factorization(&a, &planes).unwrap();
        assert!(report.ok);
        assert!(report.max_relative_residual <= 1e-9);

        let diag = MatrixTuple::new(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]),
        ])
        .unwrap();
        let report = verify_factorization(&diag, &hyperplanes(&diag).unwrap()).unwrap();
        assert!(report.max_relative_residual <= 1e-9);

        // negative control: wrong plane set fails loudly
        let wrong = vec![
            plane_from([1.0, 1.0, 0.0]),
            plane_from([0.0, 1.0, 1.0]),
            plane_from([1.0, 0.0, 1.0]),
        ];
        let report = verify_factorization(&a, &wrong).unwrap();
        assert!(!report.ok);
        assert!(report.max_relative_residual > 1e-2);
    }

    #[test]
    fn factorization_requires_full_multiplicity() {
        let a = braid_tuple();
        let planes = vec![plane_from([1.0, -1.0, 0.0])];
        assert!(matches!(
            verify_factorization(&a, &planes),
            Err(ArrangementError::MultiplicityMismatch { got: 1, expected: 3 })
        ));
    }

    #[test]
    fn sampled_plane_points_are_in_the_spectrum() {
        let a = braid_tuple();
        let planes = hyperplanes(&a).unwrap();
        let mut rng = SeededRng::new(33);
        for p in &planes {
            for _ in 0..5 {
                // random point of the plane: project a random vector onto it
                let w = rng.unit_vector(3);
                let normal = p.normal();
                let nn: f64 = normal.iter().map(|z| z.norm_sqr()).sum();
                let form: Complex64 = w.iter().zip(normal).map(|(&wi, &ni)| wi * ni).sum();
                let z: Vec<Complex64> = w
                    .iter()
                    .zip(normal)
                    .map(|(&wi, &ni)| wi - form / nn * ni.conj())
                    .collect();
                assert!(p.relative_offset(&z) < 1e-12);
                let verdict = spectrum::membership(&a, &z, MEMBERSHIP_TOL).unwrap();
                assert!(
                    verdict.margin <= MEMBERSHIP_TOL,
                    "plane point not singular, margin {}",
                    verdict.margin
                );
            }
        }
    }

    #[test]
    fn line_samples_lie_on_the_plane_union() {
        let a = braid_tuple();
        let planes = hyperplanes(&a).unwrap();
        let cloud = spectrum::cloud_sample(&a, 10, 9).unwrap();
        for p in &cloud.points {
            let min_offset = planes
                .iter()
                .map(|h| h.relative_offset(p.point.coords()))
                .fold(f64::INFINITY, f64::min);
            assert!(min_offset <= 1e-6, "offset {min_offset}");
        }
    }

    #[test]
    fn arrangement_json_round_trip() {
        let planes = hyperplanes(&braid_tuple()).unwrap();
        let s = arrangement_to_json_string(&planes);
        let back = arrangement_from_json_str(&s).unwrap();
        assert_eq!(planes.len(), back.len());
        for (p, q) in planes.iter().zip(&back) {
            assert!(p.normal.distance(&q.normal) < 1e-12);
            assert_eq!(p.multiplicity(), q.multiplicity());
        }
    }
}
