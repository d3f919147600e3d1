//! Property tests over randomly drawn products and sequences.

use std::f64::consts::TAU;

use blaschke::angle::reduce;
use blaschke::boundary::{
    boundary_arg_shift, psi_l1_distance, rybkin_bound, span_zeros, winding_number,
};
use blaschke::diagnostics::{classification_sum, frostman_sum, schwarz_lower_bound};
use blaschke::families::random_product;
use blaschke::{preimages, BlaschkeProduct, CircleAngle, Complex64, CompositionSequence};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` generators fixing 0 with a simple zero there and up to
/// `max_extra` further zeros.
fn generators(seed: u64, count: usize, max_extra: usize, modulus: (f64, f64)) -> Vec<BlaschkeProduct> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let extra = rng.gen_range(0..=max_extra);
            random_product(&mut rng, 1, extra, modulus)
        })
        .collect()
}

fn full_zero_list(b: &BlaschkeProduct) -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); b.origin_multiplicity() as usize];
    z.extend_from_slice(b.zeros());
    z
}

/// Every element of `small` is matched by a distinct element of `big`.
fn multiset_contains(big: &[Complex64], small: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; big.len()];
    small.iter().all(|s| {
        match (0..big.len()).filter(|&i| !used[i]).min_by(|&i, &j| (big[i] - s).norm().total_cmp(&(big[j] - s).norm())) {
            Some(i) if (big[i] - s).norm() < tol => {
                used[i] = true;
                true
            }
            _ => false,
        }
    })
}

fn disc_point(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composite_invariants(seed in any::<u64>(), count in 1usize..=4) {
        let gens = generators(seed, count, 2, (0.05, 0.95));
        let mut seq = CompositionSequence::new(gens.clone()).unwrap();
        seq.materialize(count).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut expected_degree = 1usize;
        let mut expected_derivative = Complex64::new(1.0, 0.0);
        for n in 1..=count {
            let b = seq.composite(n).unwrap();
            expected_degree *= gens[n - 1].degree();
            expected_derivative *= gens[n - 1].derivative_at_origin().unwrap();
            prop_assert_eq!(b.degree(), expected_degree);
            prop_assert!((b.derivative_at_origin().unwrap() - expected_derivative).norm() < 1e-9);
            prop_assert!((seq.chain_rule_derivative(n).unwrap() - expected_derivative).norm() < 1e-12);
            if n > 1 {
                let prev = full_zero_list(seq.composite(n - 1).unwrap());
                prop_assert!(multiset_contains(&full_zero_list(b), &prev, 1e-8));
            }
            for _ in 0..20 {
                let z = disc_point(&mut rng, 0.95);
                prop_assert!((b.eval(z).unwrap() - seq.nested_eval(n, z).unwrap()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn preimages_of_origin_are_the_zeros(seed in any::<u64>()) {
        let mut seq = CompositionSequence::new(generators(seed, 2, 2, (0.05, 0.9))).unwrap();
        let b = seq.materialize(2).unwrap().clone();
        let roots = preimages(&b, Complex64::new(0.0, 0.0)).unwrap();
        prop_assert!(blaschke::product::multiset_matches(&roots, &full_zero_list(&b), 1e-7));
    }

    #[test]
    fn partial_sums_are_monotone(seed in any::<u64>(), count in 1usize..=200) {
        let gens = generators(seed, count, 1, (0.01, 0.999)).iter().map(|g| g.normalize_rotation().unwrap()).collect();
        let seq = CompositionSequence::new(gens).unwrap();
        let c = classification_sum(&seq, count).unwrap();
        let f = frostman_sum(&seq, count).unwrap();
        prop_assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(f.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn schwarz_bound_holds_for_composites(seed in any::<u64>(), count in 1usize..=3) {
        let mut seq = CompositionSequence::new(generators(seed, count, 2, (0.05, 0.95))).unwrap();
        let b = seq.materialize(count).unwrap().clone();
        let lambda = b.derivative_at_origin().unwrap().norm();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        for _ in 0..100 {
            let z = disc_point(&mut rng, 0.999);
            let bound = schwarz_lower_bound(lambda, z).unwrap();
            prop_assert!(b.eval(z).unwrap().norm() >= bound - 1e-12);
        }
    }

    #[test]
    fn closed_form_shift_matches_direct_evaluation(seed in any::<u64>(), theta in 0.0..TAU) {
        let g = &generators(seed, 1, 3, (0.05, 0.95))[0];
        // Skip angles next to a zero's direction, where the shift is singular.
        prop_assume!(g.zeros().iter().all(|a| CircleAngle::new(a.arg()).circular_distance(CircleAngle::new(theta)) > 1e-6));
        let shift = boundary_arg_shift(g, CircleAngle::new(theta)).unwrap().shift;
        let u = Complex64::from_polar(1.0, theta);
        let direct = (g.eval_boundary(CircleAngle::new(theta)) / u).arg();
        let diff = reduce(shift - direct);
        prop_assert!(diff.min(TAU - diff) < 1e-9, "{} vs {}", shift, direct);
    }

    #[test]
    fn winding_number_is_the_degree(seed in any::<u64>(), count in 1usize..=2) {
        let mut seq = CompositionSequence::new(generators(seed, count, 2, (0.05, 0.8))).unwrap();
        let b = seq.materialize(count).unwrap().clone();
        let w = winding_number(&b, 1 << 14);
        prop_assert!((w - b.degree() as f64).abs() < 1e-6, "{} vs {}", w, b.degree());
    }

    #[test]
    fn l1_distance_below_envelope(ratio in 0.2f64..0.8, step in 0.0..TAU, n in 0usize..6, m in 1usize..4) {
        let gens: Vec<BlaschkeProduct> = (1..=12)
            .map(|k| BlaschkeProduct::from_zeros(1, vec![Complex64::from_polar(1.0 - ratio.powi(k), k as f64 * step)]).unwrap())
            .collect();
        let seq = CompositionSequence::new(gens).unwrap();
        let d = psi_l1_distance(&seq, n, m, 4096).unwrap();
        prop_assert!(d <= rybkin_bound(&span_zeros(&seq, n, m)), "{}", d);
    }
}
