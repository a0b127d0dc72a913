//! Reconstruction of det A(z) as a homogeneous polynomial, restriction of
//! the determinant to lines, and univariate root extraction.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError, Lu};
use crate::pencil::{MatrixTuple, PencilError};
use crate::rng::SeededRng;

/// Default node seed for determinant interpolation.
pub const INTERPOLATION_SEED: u64 = 42;
/// Required relative residual of the interpolation fit.
pub const INTERPOLATION_RESIDUAL_TOL: f64 = 1e-8;
/// Relative cluster radius when grouping multiple roots.
pub const ROOT_CLUSTER_TOL: f64 = 1e-6;
/// A sampled restriction counts as the zero polynomial below this fraction
/// of the tuple's determinant scale.
pub const ZERO_POLY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetPolyError {
    #[error("interpolation residual {residual:.3e} exceeds {tol:.3e}; try more samples")]
    IllConditioned { residual: f64, tol: f64 },
    #[error("line directions are linearly dependent")]
    DependentDirections,
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

// ── Homogeneous polynomials ─────────────────────────────────────────

/// Multi-index map representation of a homogeneous polynomial; every key
/// is an exponent vector of length `nvars` summing to `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPolynomial {
    degree: usize,
    nvars: usize,
    coefficients: BTreeMap<Vec<u32>, Complex64>,
}

impl HomogeneousPolynomial {
    pub fn new(
        degree: usize,
        nvars: usize,
        coefficients: BTreeMap<Vec<u32>, Complex64>,
    ) -> Self {
        for key in coefficients.keys() {
            debug_assert_eq!(key.len(), nvars);
            debug_assert_eq!(key.iter().sum::<u32>() as usize, degree);
        }
        Self {
            degree,
            nvars,
            coefficients,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<u32>, Complex64> {
        &self.coefficients
    }

    pub fn coefficient(&self, index: &[u32]) -> Complex64 {
        self.coefficients
            .get(index)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.nvars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, &coeff) in &self.coefficients {
            let mut term = coeff;
            for (e, zi) in idx.iter().zip(z) {
                for _ in 0..*e {
                    term *= zi;
                }
            }
            acc += term;
        }
        acc
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coefficients
            .values()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Serialize as the JSON map `"e0,e1,...,en" -> [re, im]`.
    pub fn to_json_string(&self) -> String {
        let mut map = serde_json::Map::new();
        for (idx, coeff) in &self.coefficients {
            let key = idx
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",");
            map.insert(key, serde_json::json!([coeff.re, coeff.im]));
        }
        serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("polynomial json")
    }

    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        let map: BTreeMap<String, [f64; 2]> = serde_json::from_str(s)?;
        let mut coefficients = BTreeMap::new();
        let mut degree = 0usize;
        let mut nvars = 0usize;
        for (key, val) in map {
            let idx: Vec<u32> = key
                .split(',')
                .map(|p| p.trim().parse::<u32>().unwrap_or(0))
                .collect();
            nvars = nvars.max(idx.len());
            degree = degree.max(idx.iter().sum::<u32>() as usize);
            coefficients.insert(idx, Complex64::new(val[0], val[1]));
        }
        Ok(Self {
            degree,
            nvars,
            coefficients,
        })
    }
}

/// All exponent vectors of length `nvars` summing to `degree`, in
/// lexicographic order.
pub fn monomial_indices(degree: usize, nvars: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn recurse(
        pos: usize,
        remaining: u32,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos + 1 == current.len() {
            current[pos] = remaining;
            out.push(current.clone());
            return;
        }
        for e in (0..=remaining).rev() {
            current[pos] = e;
            recurse(pos + 1, remaining - e, current, out);
        }
    }
    if nvars == 0 {
        return out;
    }
    recurse(0, degree as u32, &mut current, &mut out);
    out
}

// ── Univariate polynomials ──────────────────────────────────────────

/// Coefficients ascending in degree; trailing entries below the trim
/// threshold are dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePolynomial {
    coeffs: Vec<Complex64>,
}

const TRIM_REL_TOL: f64 = 1e-11;

impl UnivariatePolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = TRIM_REL_TOL * scale;
        while let Some(last) = coeffs.last() {
            if last.norm() <= cut {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree after trimming; zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs
            .last()
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn evaluate(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self { coeffs: vec![] };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Self { coeffs }
    }
}

/// All complex roots with multiplicity via companion-matrix eigenvalues,
/// each refined by one Newton step. A degree-0 nonzero polynomial has an
/// empty root multiset; the zero polynomial is an error (the caller
/// decides what a vanishing restriction means).
pub fn roots(p: &UnivariatePolynomial) -> Result<Vec<Complex64>, DetPolyError> {
    if p.is_zero() {
        return Err(DetPolyError::ZeroPolynomial);
    }
    let d = p.degree();
    if d == 0 {
        return Ok(vec![]);
    }
    let lead = p.leading();
    let monic: Vec<Complex64> = p.coeffs[..d].iter().map(|&c| c / lead).collect();
    let mut companion = ComplexMatrix::zeros(d, d);
    for i in 1..d {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        companion[(i, d - 1)] = -monic[i];
    }
    let mut eigs = linalg::eigenvalues(&companion)?;
    let dp = p.derivative();
    for r in eigs.iter_mut() {
        let slope = dp.evaluate(*r);
        if slope.norm() > 1e-300 {
            let step = p.evaluate(*r) / slope;
            if step.norm() < 0.5 * (1.0 + r.norm()) {
                *r -= step;
            }
        }
    }
    Ok(eigs)
}

/// Group a root multiset into (representative, multiplicity) clusters at
/// the relative radius [`ROOT_CLUSTER_TOL`].
pub fn cluster_roots(roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &r in roots {
        let radius = ROOT_CLUSTER_TOL * r.norm().max(1.0);
        match clusters.iter_mut().find(|(rep, _)| (*rep - r).norm() <= radius) {
            Some((rep, count)) => {
                // running mean keeps the representative centered
                *rep = (*rep * *count as f64 + r) / (*count as f64 + 1.0);
                *count += 1;
            }
            None => clusters.push((r, 1)),
        }
    }
    clusters
}

// ── Determinant sampling ────────────────────────────────────────────

/// Reference determinant magnitude: max |det A(z)| over a fixed sample of
/// unit-sphere points. Anchors the zero-polynomial threshold.
pub fn det_scale(a: &MatrixTuple) -> Result<f64, DetPolyError> {
    let mut rng = SeededRng::new(0x5ca1e);
    let mut best = 0.0f64;
    for _ in 0..32 {
        let z = rng.unit_vector(a.count());
        let d = linalg::determinant(&a.evaluate(&z)?)?;
        best = best.max(d.norm());
    }
    Ok(best)
}

/// Least-squares fit of det A(z) in the monomial basis, sampled at twice
/// as many pseudo-random unit-sphere points as there are monomials.
pub fn interpolate_det(a: &MatrixTuple) -> Result<HomogeneousPolynomial, DetPolyError> {
    interpolate_det_seeded(a, INTERPOLATION_SEED)
}

pub fn interpolate_det_seeded(
    a: &MatrixTuple,
    seed: u64,
) -> Result<HomogeneousPolynomial, DetPolyError> {
    let k = a.k();
    let nvars = a.count();
    let indices = monomial_indices(k, nvars);
    let m = indices.len();
    let nsamples = 2 * m;
    let mut rng = SeededRng::new(seed);

    let mut vandermonde = ComplexMatrix::zeros(nsamples, m);
    let mut dets = Vec::with_capacity(nsamples);
    for s in 0..nsamples {
        let z = rng.unit_vector(nvars);
        for (col, idx) in indices.iter().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            for (e, zi) in idx.iter().zip(&z) {
                for _ in 0..*e {
                    term *= zi;
                }
            }
            vandermonde[(s, col)] = term;
        }
        dets.push(linalg::determinant(&a.evaluate(&z)?)?);
    }

    let rhs_norm = dets.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt();
    if rhs_norm == 0.0 {
        // determinant vanishes identically (degenerate pencil)
        return Ok(HomogeneousPolynomial::new(k, nvars, BTreeMap::new()));
    }

    // normal equations; the residual check below guards the conditioning
    let vh = vandermonde.adjoint();
    let gram = vh.matmul(&vandermonde);
    let mut rhs = ComplexMatrix::zeros(m, 1);
    for i in 0..m {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in 0..nsamples {
            acc += vandermonde[(s, i)].conj() * dets[s];
        }
        rhs[(i, 0)] = acc;
    }
    let lu = Lu::factor(&gram)?;
    let coeffs = lu
        .solve_mat(&rhs, 1e-14)
        .map_err(|_| DetPolyError::IllConditioned {
            residual: f64::INFINITY,
            tol: INTERPOLATION_RESIDUAL_TOL,
        })?;

    let mut residual_sqr = 0.0;
    for s in 0..nsamples {
        let mut fit = Complex64::new(0.0, 0.0);
        for i in 0..m {
            fit += vandermonde[(s, i)] * coeffs[(i, 0)];
        }
        residual_sqr += (fit - dets[s]).norm_sqr();
    }
    let residual = residual_sqr.sqrt() / rhs_norm;
    if residual > INTERPOLATION_RESIDUAL_TOL {
        return Err(DetPolyError::IllConditioned {
            residual,
            tol: INTERPOLATION_RESIDUAL_TOL,
        });
    }

    let max_coeff = (0..m).map(|i| coeffs[(i, 0)].norm()).fold(0.0, f64::max);
    let cut = 1e-11 * max_coeff;
    let mut map = BTreeMap::new();
    for (i, idx) in indices.into_iter().enumerate() {
        let c = coeffs[(i, 0)];
        if c.norm() > cut {
            map.insert(idx, c);
        }
    }
    Ok(HomogeneousPolynomial::new(k, nvars, map))
}

/// Coefficients of t -> det A(a + t b) by evaluation at the (k+1)-st
/// roots of unity and an exact inverse DFT. Returns the zero polynomial
/// when the whole line lies inside the spectrum.
pub fn restrict_to_line(
    a: &MatrixTuple,
    base: &[Complex64],
    dir: &[Complex64],
) -> Result<UnivariatePolynomial, DetPolyError> {
    if base.len() != a.count() || dir.len() != a.count() {
        return Err(PencilError::CoordinateCount {
            expected: a.count(),
            got: base.len().max(dir.len()),
        }
        .into());
    }
    let na: f64 = base.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = dir.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(DetPolyError::DependentDirections);
    }
    // Gram-Schmidt residual of dir against base (stable where the Gram
    // determinant cancels)
    let inner: Complex64 = base.iter().zip(dir).map(|(&x, &y)| x.conj() * y).sum();
    let residual_sqr: f64 = base
        .iter()
        .zip(dir)
        .map(|(&x, &y)| (y - inner / (na * na) * x).norm_sqr())
        .sum();
    if residual_sqr.sqrt() <= 1e-10 * nb {
        return Err(DetPolyError::DependentDirections);
    }

    let k = a.k();
    let nodes = k + 1;
    let mut values = Vec::with_capacity(nodes);
    for j in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
        let t = Complex64::new(theta.cos(), theta.sin());
        let z: Vec<Complex64> = base
            .iter()
            .zip(dir)
            .map(|(&x, &y)| x + t * y)
            .collect();
        values.push(linalg::determinant(&a.evaluate(&z)?)?);
    }

    let scale = det_scale(a)?;
    let max_val = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_val <= ZERO_POLY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Ok(UnivariatePolynomial { coeffs: vec![] });
    }

    let mut coeffs = Vec::with_capacity(nodes);
    for m in 0..nodes {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let theta = -2.0 * std::f64::consts::PI * (j * m) as f64 / nodes as f64;
            acc += v * Complex64::new(theta.cos(), theta.sin());
        }
        coeffs.push(acc / nodes as f64);
    }
    Ok(UnivariatePolynomial::new(coeffs))
}
