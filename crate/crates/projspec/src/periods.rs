//! Contour integration of scalar 1-forms phi(omega_A) over loops in the
//! resolvent set, winding-number quantization, and nontriviality
//! certificates for de Rham classes.
//!
//! Circles are integrated by the uniform trapezoid rule, which converges
//! spectrally for periodic analytic integrands; polygons edge by edge.
//! Sample counts double until the |I_N - I_2N| estimate meets the target
//! or the cap is reached.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detpoly::HomogeneousPolynomial;
use crate::linalg::LinalgError;
use crate::mcform::{self, FormError, LinearFunctional};
use crate::pencil::{self, MatrixTuple, PencilError};
use crate::rng::SeededRng;
use crate::spectrum::{self, SpectrumError, MEMBERSHIP_TOL};

/// Default number of initial loop samples.
pub const DEFAULT_LOOP_SAMPLES: usize = 256;
/// Hard cap on sample doubling.
pub const MAX_LOOP_SAMPLES: usize = 1 << 16;
/// Loops must keep this multiple of the membership tolerance as margin.
pub const ADMISSIBILITY_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum PeriodError {
    #[error("loop touches the spectrum at theta = {theta:.6} (margin {margin:.3e})")]
    TouchesSpectrum { theta: f64, margin: f64 },
    #[error(
        "trace-form winding {trace:.6} and det phase winding {unwrap:.6} disagree; \
         sampling is insufficient"
    )]
    Inconsistent { trace: f64, unwrap: f64 },
    #[error("no admissible linking loop found after {retries} retries")]
    NoAdmissibleLoop { retries: usize },
    #[error("hyperplane normal is zero")]
    ZeroNormal,
    #[error("loop has no vertices")]
    EmptyLoop,
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A closed parametrized path in C^(n+1).
#[derive(Debug, Clone)]
pub enum Loop {
    /// z(theta) = center + radius * e^{i theta} * direction.
    Circle {
        center: Vec<Complex64>,
        direction: Vec<Complex64>,
        radius: f64,
        samples: usize,
    },
    /// Closed polygon through the vertices (last edge returns to the
    /// first vertex).
    Polygon {
        vertices: Vec<Vec<Complex64>>,
        samples: usize,
    },
}

impl Loop {
    pub fn circle(center: Vec<Complex64>, direction: Vec<Complex64>, radius: f64) -> Self {
        Loop::Circle {
            center,
            direction,
            radius,
            samples: DEFAULT_LOOP_SAMPLES,
        }
    }

    pub fn samples(&self) -> usize {
        match self {
            Loop::Circle { samples, .. } | Loop::Polygon { samples, .. } => *samples,
        }
    }

    /// The point z(0), used as the base point of pointwise diagnostics.
    pub fn base_point(&self) -> Result<Vec<Complex64>, PeriodError> {
        match self {
            Loop::Circle {
                center,
                direction,
                radius,
                ..
            } => Ok(center
                .iter()
                .zip(direction)
                .map(|(&c0, &d)| c0 + d * *radius)
                .collect()),
            Loop::Polygon { vertices, .. } => {
                vertices.first().cloned().ok_or(PeriodError::EmptyLoop)
            }
        }
    }

    /// Position and velocity at parameter theta in [0, 2 pi).
    fn at(&self, theta: f64) -> Result<(Vec<Complex64>, Vec<Complex64>), PeriodError> {
        match self {
            Loop::Circle {
                center,
                direction,
                radius,
                ..
            } => {
                let rot = Complex64::new(0.0, theta).exp() * *radius;
                let vel = rot * Complex64::new(0.0, 1.0);
                let z = center
                    .iter()
                    .zip(direction)
                    .map(|(&c0, &d)| c0 + rot * d)
                    .collect();
                let dz = direction.iter().map(|&d| vel * d).collect();
                Ok((z, dz))
            }
            Loop::Polygon { vertices, .. } => {
                let v = vertices.len();
                if v == 0 {
                    return Err(PeriodError::EmptyLoop);
                }
                let tau = theta.rem_euclid(2.0 * std::f64::consts::PI)
                    / (2.0 * std::f64::consts::PI);
                let scaled = tau * v as f64;
                let edge = (scaled.floor() as usize).min(v - 1);
                let s = scaled - edge as f64;
                let from = &vertices[edge];
                let to = &vertices[(edge + 1) % v];
                let z = from
                    .iter()
                    .zip(to)
                    .map(|(&p, &q)| p + (q - p) * s)
                    .collect();
                // d z / d theta = (to - from) * v / (2 pi)
                let rate = v as f64 / (2.0 * std::f64::consts::PI);
                let dz = from.iter().zip(to).map(|(&p, &q)| (q - p) * rate).collect();
                Ok((z, dz))
            }
        }
    }

    pub fn to_json(&self) -> LoopJson {
        match self {
            Loop::Circle {
                center,
                direction,
                radius,
                samples,
            } => LoopJson {
                kind: "circle".into(),
                center: Some(center.iter().map(|&z| pencil::complex_to_pair(z)).collect()),
                direction: Some(
                    direction
                        .iter()
                        .map(|&z| pencil::complex_to_pair(z))
                        .collect(),
                ),
                radius: Some(*radius),
                vertices: None,
                samples: *samples,
            },
            Loop::Polygon { vertices, samples } => LoopJson {
                kind: "polygon".into(),
                center: None,
                direction: None,
                radius: None,
                vertices: Some(
                    vertices
                        .iter()
                        .map(|v| v.iter().map(|&z| pencil::complex_to_pair(z)).collect())
                        .collect(),
                ),
                samples: *samples,
            },
        }
    }

    pub fn from_json(json: &LoopJson) -> Option<Self> {
        match json.kind.as_str() {
            "circle" => Some(Loop::Circle {
                center: json
                    .center
                    .as_ref()?
                    .iter()
                    .map(|&p| pencil::pair_to_complex(p))
                    .collect(),
                direction: json
                    .direction
                    .as_ref()?
                    .iter()
                    .map(|&p| pencil::pair_to_complex(p))
                    .collect(),
                radius: json.radius?,
                samples: json.samples,
            }),
            "polygon" => Some(Loop::Polygon {
                vertices: json
                    .vertices
                    .as_ref()?
                    .iter()
                    .map(|v| v.iter().map(|&p| pencil::pair_to_complex(p)).collect())
                    .collect(),
                samples: json.samples,
            }),
            _ => None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        let json: LoopJson = serde_json::from_str(s)?;
        Loop::from_json(&json).ok_or_else(|| {
            serde::de::Error::custom("unknown loop kind or missing fields")
        })
    }
}

/// Loop schema:
/// `{"kind":"circle","center":[[re,im],...],"direction":[[re,im],...],"radius":r,"samples":N}`
/// or `{"kind":"polygon","vertices":[[[re,im],...],...],"samples":N}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct LoopJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    DEFAULT_LOOP_SAMPLES
}

/// Nearest-integer view of a period divided by 2 pi i.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Quantized {
    pub integer: i64,
    pub distance: f64,
}

/// A contour integral with its doubling-based error estimate.
#[derive(Debug, Clone)]
pub struct PeriodReport {
    pub value: Complex64,
    pub est_error: f64,
    pub samples_used: usize,
    pub quantized: Option<Quantized>,
}

impl PeriodReport {
    fn new(value: Complex64, est_error: f64, samples_used: usize) -> Self {
        let w = value / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let integer = w.re.round();
        let quantized = if integer.abs() < i64::MAX as f64 {
            Some(Quantized {
                integer: integer as i64,
                distance: (w - Complex64::new(integer, 0.0)).norm(),
            })
        } else {
            None
        };
        Self {
            value,
            est_error,
            samples_used,
            quantized,
        }
    }

    /// value / (2 pi i).
    pub fn winding(&self) -> Complex64 {
        self.value / Complex64::new(0.0, 2.0 * std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOpts {
    /// Stop doubling below this |I_N - I_2N|.
    pub target_error: f64,
    pub max_samples: usize,
    pub membership_tol: f64,
}

impl Default for IntegrationOpts {
    fn default() -> Self {
        Self {
            target_error: 1e-9,
            max_samples: MAX_LOOP_SAMPLES,
            membership_tol: MEMBERSHIP_TOL,
        }
    }
}

/// Validate loop admissibility: every sample at the loop's declared
/// resolution must keep margin above 10x the membership tolerance.
fn validate_loop(
    a: &MatrixTuple,
    path: &Loop,
    opts: &IntegrationOpts,
) -> Result<(), PeriodError> {
    let n = path.samples().max(16);
    for m in 0..n {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
        let (z, _) = path.at(theta)?;
        let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue; // constant zero loop integrates to zero anyway
        }
        let verdict = spectrum::membership(a, &z, opts.membership_tol)?;
        if verdict.margin <= ADMISSIBILITY_FACTOR * opts.membership_tol {
            return Err(PeriodError::TouchesSpectrum {
                theta,
                margin: verdict.margin,
            });
        }
    }
    Ok(())
}

/// phi(omega_A) paired with a velocity vector at a point; the integrand.
fn pullback(
    a: &MatrixTuple,
    phi: &LinearFunctional,
    z: &[Complex64],
    dz: &[Complex64],
    theta: f64,
) -> Result<Complex64, PeriodError> {
    let znorm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if znorm == 0.0 {
        return Ok(Complex64::new(0.0, 0.0)); // degenerate constant loop
    }
    let form = mcform::omega_eval(a, z).map_err(|e| match e {
        FormError::SingularPoint { margin } => PeriodError::TouchesSpectrum { theta, margin },
        other => other.into(),
    })?;
    let scalar = mcform::apply_functional(phi, &form)?;
    Ok(scalar.coeffs.iter().zip(dz).map(|(&f, &v)| f * v).sum())
}

/// Quadrature with n samples total. Circles get the uniform periodic
/// trapezoid rule (spectrally accurate); polygons are integrated edge by
/// edge with endpoint half-weights, since the pulled-back integrand jumps
/// at the corners where the velocity turns.
fn trapezoid_sum(
    a: &MatrixTuple,
    phi: &LinearFunctional,
    path: &Loop,
    n: usize,
) -> Result<Complex64, PeriodError> {
    match path {
        Loop::Circle { .. } => {
            let mut acc = Complex64::new(0.0, 0.0);
            let step = 2.0 * std::f64::consts::PI / n as f64;
            for m in 0..n {
                let theta = step * m as f64;
                let (z, dz) = path.at(theta)?;
                acc += pullback(a, phi, &z, &dz, theta)?;
            }
            Ok(acc * step)
        }
        Loop::Polygon { vertices, .. } => {
            let v = vertices.len();
            if v == 0 {
                return Err(PeriodError::EmptyLoop);
            }
            let per_edge = (n / v).max(2);
            let mut acc = Complex64::new(0.0, 0.0);
            for (e, from) in vertices.iter().enumerate() {
                let to = &vertices[(e + 1) % v];
                let velocity: Vec<Complex64> =
                    from.iter().zip(to).map(|(&p, &q)| q - p).collect();
                // composite trapezoid on s in [0, 1]
                let mut edge_acc = Complex64::new(0.0, 0.0);
                for i in 0..=per_edge {
                    let s = i as f64 / per_edge as f64;
                    let z: Vec<Complex64> = from
                        .iter()
                        .zip(to)
                        .map(|(&p, &q)| p + (q - p) * s)
                        .collect();
                    let theta = 2.0 * std::f64::consts::PI * (e as f64 + s) / v as f64;
                    let g = pullback(a, phi, &z, &velocity, theta)?;
                    let weight = if i == 0 || i == per_edge { 0.5 } else { 1.0 };
                    edge_acc += g * weight;
                }
                acc += edge_acc / per_edge as f64;
            }
            Ok(acc)
        }
    }
}

/// The period of phi(omega_A) over a validated loop, with doubling until
/// the error estimate meets the target (or the cap).
pub fn integrate(
    a: &MatrixTuple,
    phi: &LinearFunctional,
    path: &Loop,
    opts: &IntegrationOpts,
) -> Result<PeriodReport, PeriodError> {
    validate_loop(a, path, opts)?;
    let mut n = path.samples().max(16);
    let mut current = trapezoid_sum(a, phi, path, n)?;
    loop {
        let doubled = trapezoid_sum(a, phi, path, 2 * n)?;
        let err = (doubled - current).norm();
        n *= 2;
        current = doubled;
        if err <= opts.target_error || 2 * n > opts.max_samples {
            return Ok(PeriodReport::new(current, err, n));
        }
    }
}

/// Winding of det A along a loop, computed two independent ways.
#[derive(Debug, Clone)]
pub struct WindingReport {
    /// (1 / 2 pi i) * contour integral of Tr(omega_A).
    pub trace_winding: Complex64,
    /// Phase-unwrapped argument increment of det A(z(theta)) / 2 pi.
    pub phase_winding: f64,
    pub integer: i64,
    /// Worst distance of either route to the common integer.
    pub max_distance: f64,
    pub period: PeriodReport,
}

/// Both the trace-form period and the det phase unwinding; they must
/// agree and sit on a common integer.
pub fn winding_of_det(
    a: &MatrixTuple,
    path: &Loop,
    opts: &IntegrationOpts,
) -> Result<WindingReport, PeriodError> {
    let phi = LinearFunctional::full_trace(a.k());
    let period = integrate(a, &phi, path, opts)?;
    let trace_winding = period.winding();

    // phase unwrap at the resolution the integral settled at
    let n = period.samples_used.max(64);
    let mut prev: Option<Complex64> = None;
    let mut first = Complex64::new(0.0, 0.0);
    let mut total_arg = 0.0f64;
    for m in 0..n {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
        let (z, _) = path.at(theta)?;
        let det = crate::linalg::determinant(&a.evaluate(&z)?)?;
        if let Some(p) = prev {
            total_arg += (det / p).arg();
        } else {
            first = det;
        }
        prev = Some(det);
    }
    if let Some(p) = prev {
        total_arg += (first / p).arg();
    }
    let phase_winding = total_arg / (2.0 * std::f64::consts::PI);

    if (trace_winding.re - phase_winding).abs() > 1e-4 || trace_winding.im.abs() > 1e-4 {
        return Err(PeriodError::Inconsistent {
            trace: trace_winding.re,
            unwrap: phase_winding,
        });
    }
    let integer = phase_winding.round() as i64;
    let d1 = (trace_winding - Complex64::new(integer as f64, 0.0)).norm();
    let d2 = (phase_winding - integer as f64).abs();
    Ok(WindingReport {
        trace_winding,
        phase_winding,
        integer,
        max_distance: d1.max(d2),
        period,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Closed within tolerance and some period is visibly nonzero.
    Nontrivial,
    /// Nothing proven: triviality is never claimed.
    Inconclusive,
}

/// The evidence backing a nontriviality verdict for \[phi(omega_A)\].
#[derive(Debug, Clone)]
pub struct Certificate {
    pub centrality: f64,
    pub max_closedness: f64,
    pub periods: Vec<PeriodReport>,
    pub verdict: Verdict,
}

/// Threshold on the closedness diagnostic for step h.
pub fn closedness_threshold(h: f64) -> f64 {
    (100.0 * h * h).max(1e-9)
}

/// Certify a nontrivial de Rham class: phi must look central, the form
/// closed at the loop base points, and some supplied loop must carry a
/// nonzero period. Anything less stays INCONCLUSIVE — the absence of a
/// nonzero period over these particular loops proves nothing.
pub fn nontriviality_certificate(
    a: &MatrixTuple,
    phi: &LinearFunctional,
    loops: &[Loop],
    h: f64,
    opts: &IntegrationOpts,
) -> Result<Certificate, PeriodError> {
    let centrality = mcform::centrality_check(phi, a, 4, 64, 0xce7)?;
    let mut max_closedness = 0.0f64;
    let mut periods = Vec::with_capacity(loops.len());
    for path in loops {
        let base = path.base_point()?;
        let closedness = mcform::closedness_check(a, phi, &base, h)?;
        max_closedness = max_closedness.max(closedness);
        periods.push(integrate(a, phi, path, opts)?);
    }
    let closed = centrality <= 1e-8 && max_closedness <= closedness_threshold(h);
    let has_period = periods.iter().any(|p| p.value.norm() > 1e-4);
    let verdict = if closed && has_period && !loops.is_empty() {
        Verdict::Nontrivial
    } else {
        Verdict::Inconclusive
    };
    Ok(Certificate {
        centrality,
        max_closedness,
        periods,
        verdict,
    })
}

/// Integrate phi(omega_A) along the scaling orbit theta -> r e^{i theta} z.
/// By the Euler contraction the integrand is identically i phi(I), so the
/// period must be 2 pi i trace(W) — the quantitative form of the
/// no-primitive obstruction.
pub fn radial_log_test(
    a: &MatrixTuple,
    phi: &LinearFunctional,
    z: &[Complex64],
    radius: f64,
    opts: &IntegrationOpts,
) -> Result<PeriodReport, PeriodError> {
    let path = Loop::Circle {
        center: vec![Complex64::new(0.0, 0.0); z.len()],
        direction: z.to_vec(),
        radius,
        samples: DEFAULT_LOOP_SAMPLES,
    };
    integrate(a, phi, &path, opts)
}

/// Side conditions a linking loop must keep away from.
#[derive(Debug, Clone)]
pub enum AvoidConstraint {
    /// Keep |<z, normal>| / (|z| |normal|) bounded below.
    Plane(Vec<Complex64>),
    /// Keep |p(z)| away from zero relative to its typical size.
    Polynomial(HomogeneousPolynomial),
}

impl AvoidConstraint {
    fn admissible(&self, z: &[Complex64]) -> bool {
        let znorm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if znorm == 0.0 {
            return false;
        }
        match self {
            AvoidConstraint::Plane(normal) => {
                let nnorm: f64 = normal.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if nnorm == 0.0 {
                    return false;
                }
                let form: Complex64 = z.iter().zip(normal).map(|(&a, &b)| a * b).sum();
                form.norm() / (znorm * nnorm) > 1e-3
            }
            AvoidConstraint::Polynomial(p) => {
                let zn: Vec<Complex64> = z.iter().map(|&c| c / znorm).collect();
                p.evaluate(&zn).norm() > 1e-3 * p.max_coefficient().max(f64::MIN_POSITIVE)
            }
        }
    }
}

/// Build a small circle linking the hyperplane {<z, normal> = 0} once:
/// random base point on the plane, a transverse complex direction, and a
/// check that all avoid-constraints stay bounded away from zero on the
/// circle. Retries with fresh randomness up to a bound.
pub fn linking_loop(
    normal: &[Complex64],
    avoid: &[AvoidConstraint],
    radius: f64,
    seed: u64,
) -> Result<Loop, PeriodError> {
    let nnorm_sqr: f64 = normal.iter().map(|c| c.norm_sqr()).sum();
    if nnorm_sqr == 0.0 {
        return Err(PeriodError::ZeroNormal);
    }
    let dim = normal.len();
    let mut rng = SeededRng::new(seed);
    let retries = 64;
    for _ in 0..retries {
        // project a random vector onto the plane
        let w = rng.unit_vector(dim);
        let form: Complex64 = w.iter().zip(normal).map(|(&a, &b)| a * b).sum();
        let base: Vec<Complex64> = w
            .iter()
            .zip(normal)
            .map(|(&wi, &ni)| wi - form / nnorm_sqr * ni.conj())
            .collect();
        let base_norm: f64 = base.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if base_norm < 0.1 {
            continue;
        }
        let dir = rng.unit_vector(dim);
        let transversality: Complex64 = dir.iter().zip(normal).map(|(&a, &b)| a * b).sum();
        if transversality.norm() / nnorm_sqr.sqrt() < 0.2 {
            continue;
        }
        let candidate = Loop::Circle {
            center: base,
            direction: dir,
            radius,
            samples: DEFAULT_LOOP_SAMPLES,
        };
        let mut ok = true;
        'outer: for m in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / 64.0;
            let (z, _) = candidate.at(theta)?;
            for constraint in avoid {
                if !constraint.admissible(&z) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return Ok(candidate);
        }
    }
    Err(PeriodError::NoAdmissibleLoop { retries })
}

// ── JSON report ─────────────────────────────────────────────────────

/// Period report schema: `{value: [re,im], error, quantized, loop}`.
#[derive(Debug, Serialize)]
pub struct PeriodReportJson {
    pub value: [f64; 2],
    pub error: f64,
    pub samples: usize,
    pub quantized: Option<Quantized>,
    #[serde(rename = "loop")]
    pub loop_description: LoopJson,
}

impl PeriodReport {
    pub fn to_json(&self, path: &Loop) -> PeriodReportJson {
        PeriodReportJson {
            value: pencil::complex_to_pair(self.value),
            error: self.est_error,
            samples: self.samples_used,
            quantized: self.quantized,
            loop_description: path.to_json(),
        }
    }
}
