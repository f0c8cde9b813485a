use kernel_extrema::coefficients::{c_beta, c_beta_table, d_beta_table};
use kernel_extrema::corpus::stream_rng;
use kernel_extrema::function::{mobius_shift, AnalyticFunction};
use kernel_extrema::functional::FunctionalSpec;
use kernel_extrema::geometry::{kernel_eval, DiskPoint, MobiusMap, SpaceParams};
use kernel_extrema::norms::{norm, pointwise_bound_margin, QuadratureConfig};
use kernel_extrema::reduction::{
    lemma_value, random_decreasing, random_weaker_step, weaker_condition_exact, StepFunction,
};
use kernel_extrema::search::Evaluator;
use num_complex::Complex64;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

fn disk_point(max_radius: f64) -> impl Strategy<Value = DiskPoint> {
    (0.0..max_radius, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| DiskPoint::from_polar(r, th).unwrap())
}

fn space() -> impl Strategy<Value = SpaceParams> {
    prop::sample::select(vec![(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0), (3.0, 1.5), (0.5, 2.0)])
        .prop_map(|(p, a)| SpaceParams::new(p, a).unwrap())
}

fn coeffs(max_degree: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..=max_degree + 1)
        .prop_filter("not nearly zero", |c| c.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-2)
        .prop_map(|c| c.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn divisor_count(n: usize) -> usize {
    (1..=n).filter(|d| n % d == 0).count()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn kernel_at_origin_is_one(sp in space(), z in disk_point(0.99)) {
        let k = kernel_eval(DiskPoint::ORIGIN, sp, z);
        prop_assert!((k - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mobius_inverse_round_trip(w in disk_point(0.9), z in disk_point(0.9)) {
        let m = MobiusMap::new(w);
        let back = m.inverse().apply(m.apply(z));
        prop_assert!((back.to_complex() - z.to_complex()).norm() < 1e-12);
    }

    #[test]
    fn mobius_preserves_pseudo_distance(w in disk_point(0.9), z1 in disk_point(0.9), z2 in disk_point(0.9)) {
        let d = |a: Complex64, b: Complex64| ((a - b) / (Complex64::new(1.0, 0.0) - a.conj() * b)).norm();
        let m = MobiusMap::new(w);
        let before = d(z1.to_complex(), z2.to_complex());
        let after = d(m.apply(z1).to_complex(), m.apply(z2).to_complex());
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn c_beta_matches_gamma_ratio(beta in 0.1..6.0f64, n in 0usize..200) {
        let exact = (ln_gamma(n as f64 + beta) - ln_gamma(beta) - ln_gamma(n as f64 + 1.0)).exp();
        prop_assert!(rel(c_beta(beta, n), exact) < 1e-10);
    }

    #[test]
    fn c_beta_generating_function(beta in 0.1..4.0f64, x in 0.0..0.5f64) {
        let table = c_beta_table(beta, 200);
        let series: f64 = table.values().iter().rev().fold(0.0, |acc, c| acc * x + c);
        prop_assert!(rel(series, (1.0 - x).powf(-beta)) < 1e-12);
    }

    #[test]
    fn d_beta_multiplicative(beta in 0.1..4.0f64, m in 1usize..60, n in 1usize..60) {
        prop_assume!(gcd(m, n) == 1);
        let d = d_beta_table(beta, m * n);
        prop_assert!(rel(d.get(m * n), d.get(m) * d.get(n)) < 1e-13);
    }

    #[test]
    fn d_beta_convolution(b1 in 0.1..3.0f64, b2 in 0.1..3.0f64, n in 1usize..150) {
        let (d1, d2, d12) = (d_beta_table(b1, n), d_beta_table(b2, n), d_beta_table(b1 + b2, n));
        let conv: f64 = (1..=n).filter(|k| n % k == 0).map(|k| d1.get(k) * d2.get(n / k)).sum();
        prop_assert!(rel(conv, d12.get(n)) < 1e-12);
    }

    #[test]
    fn d_two_counts_divisors(n in 1usize..2000) {
        prop_assert_eq!(d_beta_table(2.0, n).get(n), divisor_count(n) as f64);
    }

    #[test]
    fn nondecreasing_steps_satisfy_weaker_condition(
        widths in prop::collection::vec(0.01..1.0f64, 1..20),
        incs in prop::collection::vec(0.0..2.0f64, 20),
    ) {
        let mut breaks = vec![0.0];
        for w in &widths {
            breaks.push(breaks.last().unwrap() + w);
        }
        let values: Vec<f64> = incs.iter().take(widths.len()).scan(0.0, |v, d| { *v += d; Some(*v) }).collect();
        let s = StepFunction::new(breaks, values).unwrap();
        prop_assert!(weaker_condition_exact(&s) >= -1e-12);
    }

    #[test]
    fn constant_beats_decreasing_weights(seed in any::<u64>(), x0 in 0.05..1.0f64, c in 0.1..10.0f64) {
        let mut rng = stream_rng(seed, 0);
        let s = random_weaker_step(&mut rng, 1.0);
        let h = random_decreasing(&mut rng, x0, c);
        let flat = StepFunction::constant(c / x0, x0).unwrap();
        let bound = lemma_value(&s, &flat);
        prop_assert!(lemma_value(&s, &h) <= bound + 1e-12 * bound.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn mobius_shift_is_an_isometry(c in coeffs(4), w in disk_point(0.6), sp in space()) {
        let quad = QuadratureConfig::default();
        let f = AnalyticFunction::polynomial(c).unwrap();
        let before = norm(&f, sp, &quad).unwrap();
        let after = norm(&mobius_shift(&f, w, sp), sp, &quad).unwrap();
        prop_assert!(rel(after, before) < 1e-6, "{before} vs {after}");
    }

    #[test]
    fn point_evaluation_bound(c in coeffs(6), sp in space()) {
        let f = AnalyticFunction::polynomial(c).unwrap();
        let margin = pointwise_bound_margin(&f, sp, &QuadratureConfig::default()).unwrap();
        prop_assert!(margin >= -1e-8, "margin {margin}");
    }

    #[test]
    fn objective_ignores_scale(c in coeffs(5), scale in 0.1..10.0f64, phase in 0.0..std::f64::consts::TAU, sp in space()) {
        let eval = Evaluator::new(sp, &FunctionalSpec::Power { s: 2.0 }, &QuadratureConfig::default()).unwrap();
        let scaled: Vec<Complex64> = c.iter().map(|a| a * Complex64::from_polar(scale, phase)).collect();
        prop_assert!(rel(eval.value(&scaled).unwrap(), eval.value(&c).unwrap()) < 1e-10);
    }

    // With p = 2 the integrands are trigonometric polynomials in the angle,
    // which the fixed rule integrates exactly at any rotation.
    #[test]
    fn objective_ignores_rotation(c in coeffs(5), theta in 0.0..std::f64::consts::TAU, alpha in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let sp = SpaceParams::new(2.0, alpha).unwrap();
        let eval = Evaluator::new(sp, &FunctionalSpec::Power { s: 2.0 }, &QuadratureConfig::default()).unwrap();
        let rotated: Vec<Complex64> = c
            .iter()
            .enumerate()
            .map(|(n, a)| a * Complex64::from_polar(1.0, n as f64 * theta))
            .collect();
        prop_assert!(rel(eval.value(&rotated).unwrap(), eval.value(&c).unwrap()) < 1e-10);
    }

    #[test]
    fn objective_bounded_by_constant(c in coeffs(5), sp in space()) {
        let eval = Evaluator::new(sp, &FunctionalSpec::Power { s: 2.0 }, &QuadratureConfig::default()).unwrap();
        let one = eval.value(&[Complex64::new(1.0, 0.0)]).unwrap();
        prop_assert!(eval.value(&c).unwrap() <= one + 1e-6);
    }
}
