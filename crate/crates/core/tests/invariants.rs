mod common;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_sim::geometry::{ArrayGeometry, Direction, Point3};
use ris_sim::pattern::{
    array_factor_far, coding_excitation, default_theta_grid, far_field_at, far_field_cut, nearfield_cut,
    FeedSpec, UnitCellReflection,
};
use ris_sim::phase::{quantize_1bit, snell_gradient, CodingMask};

const LAMBDA: f64 = 0.0545;

fn random_mask(rng: &mut ChaCha8Rng, g: ArrayGeometry) -> CodingMask {
    CodingMask::from_fn(g, |_, _| rng.random::<bool>())
}

#[test]
fn engine_matches_term_by_term_resummation() {
    let g = ArrayGeometry::prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cell = UnitCellReflection::measured_worst_case();
    let mask = random_mask(&mut rng, g);
    let exc = coding_excitation(&mask, &cell);
    let coeffs: Vec<(f64, f64)> = exc.iter().map(|c| (c.re, c.im)).collect();
    for _ in 0..10 {
        let inc = Direction::new(rng.random_range(0.0..60.0), rng.random_range(0.0..360.0)).unwrap();
        let phi_plane = rng.random_range(0.0..180.0);
        let theta = rng.random_range(-90.0..90.0);
        let engine = far_field_at(&g, &exc, inc, phi_plane, theta, LAMBDA);
        let (re, im) = common::far_field_oracle(16, 10, 0.016, &coeffs, inc.theta(), inc.phi(), phi_plane, theta, LAMBDA);
        let oracle = Complex64::new(re, im);
        let rel = (engine - oracle).norm() / oracle.norm().max(1e-300);
        assert!(rel < 1e-10, "theta {theta}: relative error {rel}");
    }
}

#[test]
fn reciprocity_conjugates_the_field() {
    let g = ArrayGeometry::prototype();
    let mask = quantize_1bit(
        &snell_gradient(&g, Direction::BORESIGHT, Direction::new(25.0, 0.0).unwrap(), LAMBDA).unwrap(),
    );
    let exc = coding_excitation(&mask, &UnitCellReflection::default());
    for (a, b) in [(10.0, 35.0), (0.0, 60.0), (22.5, 5.0)] {
        let f = far_field_at(&g, &exc, Direction::new(a, 0.0).unwrap(), 0.0, b, LAMBDA);
        let r = far_field_at(&g, &exc, Direction::new(b, 0.0).unwrap(), 0.0, a, LAMBDA);
        assert!((f - r.conj()).norm() <= 1e-9 * f.norm().max(1.0));
    }
}

#[test]
fn one_bit_normal_incidence_patterns_are_mirror_symmetric() {
    let g = ArrayGeometry::prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = default_theta_grid();
    let cell = UnitCellReflection {
        magnitude_state0: 0.8,
        magnitude_state1: 0.8,
        ..UnitCellReflection::default()
    };
    for _ in 0..5 {
        let cut = array_factor_far(&g, &random_mask(&mut rng, g), &cell, Direction::BORESIGHT, 0.0, &grid, LAMBDA).unwrap();
        let n = cut.samples.len();
        for i in 0..n {
            let a = cut.samples[i].field().norm();
            let b = cut.samples[n - 1 - i].field().norm();
            assert!((a - b).abs() <= 1e-9 * a.max(b));
        }
    }
}

#[test]
fn normalization_peaks_at_zero_db() {
    let g = ArrayGeometry::prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cut = array_factor_far(
        &g,
        &random_mask(&mut rng, g),
        &UnitCellReflection::default(),
        Direction::new(20.0, 0.0).unwrap(),
        0.0,
        &default_theta_grid(),
        LAMBDA,
    )
    .unwrap();
    let max = cut.samples.iter().map(|s| s.gain_db).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(max, 0.0);
}

#[test]
fn parallel_evaluation_is_bit_identical() {
    let g = ArrayGeometry::prototype();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let exc = coding_excitation(&random_mask(&mut rng, g), &UnitCellReflection::default());
    let grid = default_theta_grid();
    let inc = Direction::new(10.0, 0.0).unwrap();
    let feed = FeedSpec::new(Point3::new(0.12, 0.072, 0.3), 7.0).unwrap();

    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (
                far_field_cut(&g, &exc, inc, 0.0, &grid, LAMBDA).unwrap(),
                nearfield_cut(&g, &exc, &feed, 1.0, 0.0, &grid, LAMBDA).unwrap(),
            )
        })
    };
    let single = run(1);
    let many = run(4);
    assert_eq!(single, many);

    // reversed, one sample at a time
    let mut fields: Vec<(f64, Complex64)> = grid
        .iter()
        .rev()
        .map(|&t| (t, far_field_at(&g, &exc, inc, 0.0, t, LAMBDA)))
        .collect();
    fields.reverse();
    for (s, (t, f)) in single.0.samples.iter().zip(fields) {
        assert_eq!(s.theta_deg, t);
        assert_eq!((s.re, s.im), (f.re, f.im));
    }
}

#[test]
fn quantization_matches_raw_rule() {
    let g = ArrayGeometry::prototype();
    for steer in [7.0, 15.0, 33.0, 58.0] {
        let phases = snell_gradient(&g, Direction::BORESIGHT, Direction::new(steer, 0.0).unwrap(), LAMBDA).unwrap();
        let bits = quantize_1bit(&phases);
        for (p, b) in phases.as_slice().iter().zip(bits.as_slice()) {
            assert_eq!(common::one_bit(*p), *b);
        }
    }
}
