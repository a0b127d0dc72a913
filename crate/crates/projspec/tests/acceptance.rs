//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use num_complex::Complex64;

use projspec::arrangement::{self, braid_tuple};
use projspec::demos::{
    self, clock_shift_tuple, disk_grid_oracle, disk_poly_membership, line_quadric_functionals,
    line_quadric_tuple,
};
use projspec::detpoly;
use projspec::equiv;
use projspec::linalg::ComplexMatrix;
use projspec::mcform::{self, LinearFunctional};
use projspec::pencil::MatrixTuple;
use projspec::periods::{self, IntegrationOpts, Loop};
use projspec::rng::SeededRng;
use projspec::spectrum::{self, SpectrumError};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(id: usize, description: &str, ok: bool, details: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("acceptance {id:2}: {verdict} — {description} ({details})");
    assert!(ok, "acceptance {id} failed: {description} ({details})");
}

fn random_tuple(k: usize, n: usize, seed: u64) -> MatrixTuple {
    let mut rng = SeededRng::new(seed);
    MatrixTuple::new(
        (0..=n)
            .map(|_| ComplexMatrix::from_fn(k, k, |_, _| rng.complex_gaussian()))
            .collect(),
    )
    .unwrap()
}

/// Rejection-sample a unit point with comfortable resolvent margin.
fn resolvent_point(a: &MatrixTuple, rng: &mut SeededRng, min_margin: f64) -> Vec<Complex64> {
    loop {
        let z = rng.unit_vector(a.count());
        let v = spectrum::membership(a, &z, spectrum::MEMBERSHIP_TOL).unwrap();
        if v.margin > min_margin {
            return z;
        }
    }
}

#[test]
fn criterion_01_determinant_interpolation() {
    let start = Instant::now();
    let p = detpoly::interpolate_det(&line_quadric_tuple()).unwrap();
    // expansion of (z0+z1+z2)(z0^2+z1^2+z2^2) = sum_{i,j} z_i z_j^2:
    // every pure cube and z_i z_j^2 coefficient is 1, the mixed z0 z1 z2
    // monomial is absent
    let mut worst = 0.0f64;
    for idx in detpoly::monomial_indices(3, 3) {
        let want = if idx.contains(&3) || idx.contains(&2) {
            1.0
        } else {
            0.0
        };
        let got = p.coefficient(&idx);
        worst = worst.max((got - c(want, 0.0)).norm());
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-8 && elapsed.as_secs_f64() < 1.0;
    report(
        1,
        "determinant interpolation matches the line-quadric expansion",
        ok,
        &format!("max coeff error {worst:.2e}, runtime {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_trace_forms_and_periods() {
    let a = line_quadric_tuple();
    let (phi1, phi2) = line_quadric_functionals();
    let mut rng = SeededRng::new(2026);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z = resolvent_point(&a, &mut rng, 1e-2);
        let form = mcform::omega_eval(&a, &z).unwrap();
        let s1 = mcform::apply_functional(&phi1, &form).unwrap();
        let linear = z[0] + z[1] + z[2];
        for got in &s1.coeffs {
            worst = worst.max((got - 1.0 / linear).norm());
        }
        let s2 = mcform::apply_functional(&phi2, &form).unwrap();
        let quadric = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
        for (j, got) in s2.coeffs.iter().enumerate() {
            worst = worst.max((got - 2.0 * z[j] / quadric).norm());
        }
    }

    let path = Loop::Circle {
        center: vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)],
        direction: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        radius: 0.1,
        samples: 128,
    };
    let opts = IntegrationOpts::default();
    let p1 = periods::integrate(&a, &phi1, &path, &opts).unwrap();
    let p2 = periods::integrate(&a, &phi2, &path, &opts).unwrap();
    let e1 = (p1.value - c(0.0, TWO_PI)).norm();
    let e2 = p2.value.norm();
    let ok = worst <= 1e-8 && e1 <= 1e-6 && e2 <= 1e-6;
    report(
        2,
        "block-trace forms match d log factors; linking periods 2*pi*i and 0",
        ok,
        &format!("coeff error {worst:.2e}, phi1 period error {e1:.2e}, phi2 period {e2:.2e}"),
    );
}

#[test]
fn criterion_03_braid_arrangement() {
    let a = braid_tuple();
    let planes = arrangement::hyperplanes(&a).unwrap();
    let expected = [
        [1.0, -1.0, 0.0],
        [0.0, 1.0, -1.0],
        [-1.0, 0.0, 1.0],
    ];
    let mut found = 0;
    for want in expected {
        let normal: Vec<Complex64> = want.iter().map(|&x| c(x, 0.0)).collect();
        let target = arrangement::Hyperplane::new(&normal, 1).unwrap();
        if planes.iter().any(|p| {
            p.multiplicity() == 1
                && arrangement::Hyperplane::new(p.normal(), 1)
                    .unwrap()
                    .normal()
                    .iter()
                    .zip(target.normal())
                    .map(|(&x, &y)| (x - y).norm())
                    .fold(0.0, f64::max)
                    < 1e-7
        }) {
            found += 1;
        }
    }
    let fact = arrangement::verify_factorization(&a, &planes).unwrap();
    let ok = planes.len() == 3 && found == 3 && fact.max_relative_residual <= 1e-9;
    report(
        3,
        "braid arrangement: exactly the three planes, factorization verified",
        ok,
        &format!(
            "{} planes, {found}/3 matched, residual {:.2e}",
            planes.len(),
            fact.max_relative_residual
        ),
    );
}

#[test]
fn criterion_04_identity_suite() {
    let mut rng = SeededRng::new(404);
    let mut worst_euler = 0.0f64;
    let mut worst_ratio_dev = 0.0f64;
    let mut floored = 0usize;
    let h = 1e-3;
    for trial in 0..100 {
        let k = 2 + (trial % 4);
        let n = 1 + (trial % 3);
        let a = random_tuple(k, n, 9000 + trial as u64);
        let z = resolvent_point(&a, &mut rng, 0.2);

        let contraction = mcform::euler_contraction(&a, &z).unwrap();
        worst_euler = worst_euler
            .max(contraction.max_abs_diff(&ComplexMatrix::identity(k)));

        let r1 = mcform::resolvent_derivative_check(&a, &z, h).unwrap();
        let r2 = mcform::resolvent_derivative_check(&a, &z, h / 2.0).unwrap();
        let f1 = mcform::flatness_check(&a, &z, h).unwrap();
        let f2 = mcform::flatness_check(&a, &z, h / 2.0).unwrap();
        for (e1, e2) in [(r1, r2), (f1, f2)] {
            if e2 < 1e-11 {
                // both step sizes at the round-off floor; order unobservable
                floored += 1;
                continue;
            }
            let ratio = e1 / e2;
            worst_ratio_dev = worst_ratio_dev.max((ratio - 4.0).abs());
        }
    }
    let ok = worst_euler <= 1e-10 && worst_ratio_dev <= 1.2;
    report(
        4,
        "Euler contraction = I; resolvent-derivative and flatness are O(h^2)",
        ok,
        &format!(
            "max ||sum z_j F_j - I|| = {worst_euler:.2e}, worst |ratio-4| = {worst_ratio_dev:.2}, {floored} floored"
        ),
    );
}

#[test]
fn criterion_05_winding_quantization() {
    let fixtures: Vec<MatrixTuple> = vec![
        braid_tuple(),
        line_quadric_tuple(),
        clock_shift_tuple(3).unwrap(),
        clock_shift_tuple(5).unwrap(),
        random_tuple(3, 2, 505),
    ];
    let opts = IntegrationOpts::default();
    let mut rng = SeededRng::new(555);
    let mut admissible = 0usize;
    let mut worst = 0.0f64;
    let mut nonzero_windings = 0usize;
    let mut tries = 0usize;
    while admissible < 50 && tries < 4000 {
        tries += 1;
        let a = &fixtures[tries % fixtures.len()];
        let center = rng.unit_vector(a.count());
        let direction = rng.unit_vector(a.count());
        let radius = 0.1 + 0.4 * rng.uniform();
        let path = Loop::Circle {
            center,
            direction,
            radius,
            samples: 128,
        };
        match periods::winding_of_det(a, &path, &opts) {
            Ok(w) => {
                admissible += 1;
                worst = worst.max(w.max_distance);
                if w.integer != 0 {
                    nonzero_windings += 1;
                }
            }
            Err(periods::PeriodError::TouchesSpectrum { .. }) => continue,
            Err(e) => panic!("unexpected integration failure: {e}"),
        }
    }
    let ok = admissible == 50 && worst <= 1e-6 && nonzero_windings > 0;
    report(
        5,
        "trace-form periods quantize and match det phase unwinding",
        ok,
        &format!(
            "{admissible} loops, worst distance to integer {worst:.2e}, {nonzero_windings} nonzero windings"
        ),
    );
}

#[test]
fn criterion_06_rotation_demo() {
    let opts = IntegrationOpts::default();
    let mut details = String::new();
    let mut ok = true;
    for q in [8usize, 16, 64] {
        let start = Instant::now();
        let lines = (256 / q).max(2);
        let locus = demos::rotation_spectrum_locus(q, lines, 2026).unwrap();
        let outer = demos::rotation_period_experiment(q, true, &opts).unwrap();
        let inner = demos::rotation_period_experiment(q, false, &opts).unwrap();
        let eo = (outer.value - c(0.0, TWO_PI)).norm();
        let ei = (inner.value - c(0.0, TWO_PI)).norm();
        let elapsed = start.elapsed().as_secs_f64();
        let this_ok = locus.points > 0
            && locus.max_deviation <= 1e-8
            && eo <= 1e-6
            && ei <= 1e-6
            && (q != 64 || elapsed < 5.0);
        ok &= this_ok;
        details.push_str(&format!(
            "q={q}: dev {:.1e}, outer {:.1e}, inner {:.1e}, {:.2}s; ",
            locus.max_deviation, eo, ei, elapsed
        ));
    }
    report(
        6,
        "rotation demo: modulus locus and unit periods on both components",
        ok,
        details.trim_end_matches("; "),
    );
}

#[test]
fn criterion_07_equivalence_round_trip() {
    let mut worst = 0.0f64;
    let mut recovered = 0usize;
    for trial in 0..20u64 {
        let k = 2 + (trial as usize % 5); // k in 2..=6
        let n = 1 + (trial as usize % 3); // n in 1..=3
        let a = random_tuple(k, n, 7000 + trial);
        let (b, _, _) = equiv::random_equivalent_tuple(&a, 7100 + trial);
        match equiv::find_witness(&a, &b, 7200 + trial) {
            Ok(w) => {
                recovered += 1;
                worst = worst.max(w.residual);
            }
            Err(e) => panic!("trial {trial}: no witness found: {e}"),
        }
    }
    // negative control: braid vs clock-shift padded with the identity
    let cs = clock_shift_tuple(3).unwrap();
    let padded = MatrixTuple::new(vec![
        cs.matrix(0).clone(),
        cs.matrix(1).clone(),
        ComplexMatrix::identity(3),
    ])
    .unwrap();
    let negative = matches!(
        equiv::find_witness(&braid_tuple(), &padded, 7),
        Err(equiv::EquivError::NotSimilar)
            | Err(equiv::EquivError::CandidateRejected { .. })
    );
    let ok = recovered == 20 && worst <= 1e-7 && negative;
    report(
        7,
        "equivalence witnesses recovered on 20 round-trip fixtures",
        ok,
        &format!("worst residual {worst:.2e}, negative control not-similar: {negative}"),
    );
}

#[test]
fn criterion_08_nonemptiness_on_lines() {
    let fixtures: Vec<MatrixTuple> = vec![
        braid_tuple(),
        line_quadric_tuple(),
        clock_shift_tuple(4).unwrap(),
        random_tuple(3, 2, 808),
    ];
    let mut worst_margin = 0.0f64;
    let mut ok = true;
    for (fi, a) in fixtures.iter().enumerate() {
        let mut rng = SeededRng::new(8800 + fi as u64);
        for _ in 0..100 {
            let base = rng.unit_vector(a.count());
            let dir = rng.unit_vector(a.count());
            match spectrum::line_sample(a, &base, &dir) {
                Ok(points) => {
                    ok &= !points.is_empty();
                    for p in points {
                        let v = spectrum::membership(a, p.point.coords(), 1e-6).unwrap();
                        worst_margin = worst_margin.max(v.margin);
                    }
                }
                // a line inside the spectrum intersects it trivially
                Err(SpectrumError::LineInsideSpectrum) => {}
                Err(e) => panic!("fixture {fi}: {e}"),
            }
        }
    }
    ok &= worst_margin <= 1e-6;
    report(
        8,
        "every random line meets the spectrum; points re-verified",
        ok,
        &format!("400 lines, worst membership margin {worst_margin:.2e}"),
    );
}

#[test]
fn criterion_09_radial_obstruction() {
    let opts = IntegrationOpts::default();
    let mut rng = SeededRng::new(909);
    let mut worst = 0.0f64;
    let (phi1, phi2) = line_quadric_functionals();
    let mut random_weight = |k: usize| {
        LinearFunctional::new(
            ComplexMatrix::from_fn(k, k, |_, _| rng.complex_gaussian()),
            "random",
        )
    };
    let cases: Vec<(MatrixTuple, Vec<LinearFunctional>)> = vec![
        (
            braid_tuple(),
            vec![
                LinearFunctional::full_trace(3),
                LinearFunctional::new(
                    ComplexMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]),
                    "traceless",
                ),
                random_weight(3),
            ],
        ),
        (line_quadric_tuple(), vec![phi1, phi2, random_weight(3)]),
        (
            clock_shift_tuple(4).unwrap(),
            vec![
                LinearFunctional::full_trace(4),
                LinearFunctional::normalized_trace(4),
                random_weight(4),
            ],
        ),
    ];
    let mut rng2 = SeededRng::new(919);
    for (a, functionals) in &cases {
        let z = resolvent_point(a, &mut rng2, 0.05);
        for phi in functionals {
            let p = periods::radial_log_test(a, phi, &z, 1.0, &opts).unwrap();
            let want = Complex64::new(0.0, TWO_PI) * phi.value_at_identity();
            worst = worst.max((p.value - want).norm());
        }
    }
    let ok = worst <= 1e-8;
    report(
        9,
        "radial period equals 2*pi*i*trace(W) for every functional fixture",
        ok,
        &format!("9 functionals, worst deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_10_disk_demo_oracle() {
    let mut rng = SeededRng::new(1010);
    let mut decided = 0usize;
    let mut disagreements = 0usize;
    for trial in 0..100 {
        let len = 2 + trial % 6;
        let coeffs: Vec<Complex64> = (0..len).map(|_| rng.complex_gaussian()).collect();
        let report = disk_poly_membership(&coeffs).unwrap();
        if let Some(oracle) = disk_grid_oracle(&coeffs) {
            decided += 1;
            if oracle != report.invertible {
                disagreements += 1;
            }
        }
    }
    let ok = disagreements == 0 && decided >= 90;
    report(
        10,
        "disk verdicts agree with the dense-grid minimum-modulus oracle",
        ok,
        &format!("{decided}/100 decided, {disagreements} disagreements"),
    );
}
