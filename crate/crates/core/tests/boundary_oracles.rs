//! Boundary-map checks against direct evaluation.

use std::f64::consts::TAU;

use blaschke::boundary::{
    identity_convergence_check, measure_preservation_test, psi_l1_distance, radial_limit_probe, rybkin_bound,
    span_zeros,
};
use blaschke::diagnostics::{interior_cauchy_gauge, schwarz_lower_bound, PolarGrid};
use blaschke::families::{geometric_generators, random_generators, random_product};
use blaschke::stats::ks_critical_value;
use blaschke::{BlaschkeProduct, CircleAngle, Complex64, CompositionSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn geometric(count: usize) -> CompositionSequence {
    CompositionSequence::new(geometric_generators(count, 0.5, 1.0).unwrap()).unwrap()
}

#[test]
fn ks_for_zeros_at_origin_and_one_half() {
    let b = BlaschkeProduct::from_zeros(1, vec![Complex64::new(0.5, 0.0)]).unwrap();
    let d = measure_preservation_test(&b, 1_000_000, 7).unwrap();
    assert!(d < 1.63 / 1000.0, "KS {d}");
    assert!((ks_critical_value(1_000_000, 0.01) - 1.63e-3).abs() < 1e-5);
}

#[test]
fn radial_probe_of_degree_32_composite_settles() {
    let mut seq = CompositionSequence::new(random_generators(42, 5, 2)).unwrap();
    let b = seq.materialize(5).unwrap();
    let v = radial_limit_probe(b, CircleAngle::new(1.2), &[1e-4, 1e-6, 1e-8]).unwrap();
    assert!(v[0].norm() < v[1].norm() && v[1].norm() < v[2].norm() && v[2].norm() <= 1.0);
    assert!((v[2] / v[1]).arg().abs() < 1e-6);
}

#[test]
fn geometric_boundary_maps_approach_identity() {
    let seq = geometric(30);
    let thetas: Vec<CircleAngle> = (0..64).map(|j| CircleAngle::new(TAU * (j as f64 + 0.5) / 64.0)).collect();
    let check = identity_convergence_check(&seq, &thetas, 30, 1e-3).unwrap();
    // Thirty terms are too few for the decade heuristic (the last decade
    // still adds about 2⁻³), so the precondition flag is not asserted.
    assert!(check.below_tolerance, "max {}", check.max_at_last_step);
    // Oracle: |b̂ₖ(e^{iθ})/e^{iθ} − 1| by hand for the last generator.
    let g = &seq.generators()[29];
    for (t, d) in thetas.iter().zip(&check.distances) {
        let u = t.to_unit();
        let a = g.zeros()[0];
        let f = (a.norm() / a) * (a - u) / (Complex64::new(1.0, 0.0) - a.conj() * u);
        assert!(((f - 1.0).norm() - d[29]).abs() < 1e-12);
    }
}

#[test]
fn geometric_interior_gauge_matches_direct_evaluation() {
    let seq = geometric(20);
    let grid = PolarGrid::default();
    let gauge = interior_cauchy_gauge(&seq, 10, 10, 0.5, grid).unwrap();
    let mut oracle = 0.0f64;
    for i in 1..=grid.radii {
        for j in 0..grid.angles {
            let z = Complex64::from_polar(0.5 * i as f64 / grid.radii as f64, TAU * j as f64 / grid.angles as f64);
            let mut w = z;
            let mut at_10 = z;
            for (k, g) in seq.generators().iter().enumerate() {
                w = g.eval(w).unwrap();
                if k + 1 == 10 {
                    at_10 = w;
                }
            }
            oracle = oracle.max((w - at_10).norm());
        }
    }
    assert!(gauge < 1e-2);
    assert!((gauge - oracle).abs() < 1e-15, "{gauge} vs {oracle}");
}

#[test]
fn lower_bound_on_random_small_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let extra = rng.gen_range(0..=3);
        let g = random_product(&mut rng, 1, extra, (0.05, 0.95));
        let lambda = g.derivative_at_origin().unwrap().norm();
        for _ in 0..200 {
            let z = Complex64::from_polar(lambda * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            let bound = schwarz_lower_bound(lambda, z).unwrap();
            assert!(g.eval(z).unwrap().norm() >= bound - 1e-12);
        }
    }
}

#[test]
fn geometric_l1_distance_below_envelope() {
    // Node-doubling stability of this value is measured by the acceptance
    // suite; here only the envelope.
    let seq = geometric(10);
    let d = psi_l1_distance(&seq, 5, 5, 4096).unwrap();
    let bound = rybkin_bound(&span_zeros(&seq, 5, 5));
    assert!(d <= bound, "{d} > {bound}");
    // Regression value at 4096 nodes.
    assert!((d - 0.093_987_708_250_332_05).abs() < 1e-12);
}
