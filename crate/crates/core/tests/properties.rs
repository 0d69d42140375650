//! Property-based and oracle checks across modules.

use amplify::bench::{run_experiment, run_experiment_logged, ExperimentPlan, PlanProperty};
use amplify::dist::{Family, FamilySpec, Property};
use amplify::estimators::{
    cached_lipschitz_polynomial, competitive_support_size, empirical_estimate,
    small_branch_value, EstimatorConfig, EstimatorKind,
};
use amplify::polyapprox::entropy::kernel_fit;
use amplify::polyapprox::{bernstein_eval, build_amplified_entropy_poly, AmplificationParams};
use amplify::profile::{poisson_expectation, CountVector, Fingerprint};
use proptest::prelude::*;

fn fingerprint_pairs() -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((1u64..300, 1u64..5_000), 0..25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fingerprint_accounts_for_every_draw(counts in prop::collection::vec(0u64..50, 0..200)) {
        let cv = CountVector::new(counts.clone());
        let fp = cv.fingerprint();
        let total: u64 = counts.iter().sum();
        let nonzero = counts.iter().filter(|&&c| c > 0).count() as u64;
        prop_assert_eq!(fp.total(), total);
        prop_assert_eq!(fp.distinct(), nonzero);
        for (j, phi) in fp.iter() {
            prop_assert_eq!(phi, counts.iter().filter(|&&c| c == j).count() as u64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn support_size_is_linear_in_the_fingerprint(
        left in fingerprint_pairs(),
        right in fingerprint_pairs(),
        a in 1.0f64..3.0,
        r in 0.0f64..3.0,
    ) {
        let f = Fingerprint::from_pairs(left).unwrap();
        let g = Fingerprint::from_pairs(right).unwrap();
        let cfg = EstimatorConfig { a: Some(a), r: Some(r), ..EstimatorConfig::default() };
        let whole = competitive_support_size(&f.merged(&g), &cfg).unwrap().value;
        let parts = competitive_support_size(&f, &cfg).unwrap().value
            + competitive_support_size(&g, &cfg).unwrap().value;
        prop_assert!((whole - parts).abs() <= 1e-9 * whole.abs().max(1.0), "{whole} vs {parts}");
    }

    #[test]
    fn unit_amplification_counts_distinct(pairs in fingerprint_pairs(), r in 0.0f64..20.0) {
        let fp = Fingerprint::from_pairs(pairs).unwrap();
        let cfg = EstimatorConfig { a: Some(1.0), r: Some(r), ..EstimatorConfig::default() };
        let v = competitive_support_size(&fp, &cfg).unwrap().value;
        prop_assert_eq!(v.to_bits(), (fp.distinct() as f64).to_bits());
    }

    #[test]
    fn empirical_entropy_is_bounded(counts in prop::collection::vec(0u64..1_000, 1..300)) {
        let cv = CountVector::new(counts);
        let n = cv.total();
        prop_assume!(n > 0);
        let h = empirical_estimate(&Property::Entropy, &cv, n).unwrap();
        let cap = (cv.distinct() as f64).ln();
        prop_assert!(h >= -1e-12 && h <= cap + 1e-12, "h = {h}, ln distinct = {cap}");
    }

    #[test]
    fn bernstein_interpolates_endpoints(
        coeffs in prop::collection::vec(-5.0f64..5.0, 1..6),
        m in 1u64..400,
    ) {
        let f = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let scale = coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
        prop_assert!((bernstein_eval(f, m, 0.0) - f(0.0)).abs() <= 1e-12 * scale);
        prop_assert!((bernstein_eval(f, m, 1.0) - f(1.0)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn bernstein_reproduces_lines(slope in -5.0f64..5.0, icpt in -5.0f64..5.0, m in 1u64..2_000, x in 0.0f64..=1.0) {
        let got = bernstein_eval(|t| slope * t + icpt, m, x);
        prop_assert!((got - (slope * x + icpt)).abs() <= 1e-11);
    }
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
    refine(f, a, b, whole, tol, depth)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let left = (c - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + c)) + f(c));
    let right = (b - c) / 6.0 * (f(c) + 4.0 * f(0.5 * (c + b)) + f(b));
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    refine(f, a, c, left, 0.5 * tol, depth - 1) + refine(f, c, b, right, 0.5 * tol, depth - 1)
}

#[test]
fn amplified_polynomial_integrates_its_closed_form_slope() {
    for (n, eps, c_s) in [(10_000u64, 1.0, 0.3), (640, 1.0, 2.0), (2_000, 0.5, 1.0)] {
        let params = AmplificationParams::new(n, eps, 4.0, c_s).unwrap();
        let poly = build_amplified_entropy_poly(params).unwrap();
        let fit = kernel_fit(params.degree()).unwrap();
        let (l, na, delta) = (params.interval_hi(), params.na(), params.delta());
        let h1 = |y: f64| l * fit.value_at(y / l) + y * (1.0 / l).ln();
        let slope = |x: f64| (na / (na - 1.0)).ln() + (na - 1.0) * (h1(x + delta) - h1(x));
        for i in 1..=50 {
            let x = l * i as f64 / 50.0;
            let integral = simpson(&slope, 0.0, x, 1e-11, 18);
            let got = poly.antiderivative.value_at(x);
            assert!(
                (got - integral).abs() <= 1e-8,
                "n={n} x={x}: polynomial {got} vs quadrature {integral}"
            );
        }
    }
}

#[test]
fn l1_small_branch_is_unbiased() {
    let cfg = EstimatorConfig::default();
    for n in [1_000u64, 10_000] {
        let params = cfg.amplification_params(n).unwrap();
        let nf = n as f64;
        for q in [0.0, 0.5 * params.interval_hi(), 2.0 / nf] {
            let poly = cached_lipschitz_polynomial(params, q).unwrap();
            for p in [0.1 / nf, 1.0 / nf, 2.0 / nf, 0.9 * params.interval_hi()] {
                let exact = poisson_expectation(nf * p, 1e-18, |c| {
                    small_branch_value(poly.coeffs(), c, n).unwrap()
                });
                let target = poly.antiderivative.value_at(p);
                assert!(
                    (exact - target).abs() <= 1e-6 * target.abs().max(1e-12),
                    "n={n} q={q} p={p}: {exact} vs {target}"
                );
            }
        }
    }
}

fn single_family_plan(property: PlanProperty, family: Family, n_grid: Vec<u64>) -> ExperimentPlan {
    let mut plan = ExperimentPlan::standard(property, 1000, 3);
    plan.families = vec![FamilySpec::new(family, 1000)];
    plan.n_grid = n_grid;
    plan
}

#[test]
fn empirical_support_mean_matches_closed_form() {
    let mut plan = single_family_plan(PlanProperty::SupportSize, Family::Uniform, vec![640]);
    plan.estimators = vec![EstimatorKind::Empirical];
    let rec = &run_experiment(&plan).unwrap()[0];
    let k = 1000.0f64;
    let expected = k * (1.0 - (1.0 - 1.0 / k).powi(640));
    assert!((expected - 472.6).abs() < 0.5);
    let se = rec.std_dev / (rec.trials as f64).sqrt();
    assert!(
        (rec.mean_estimate - expected).abs() <= 4.0 * se,
        "mean {} vs {expected} (se {se})",
        rec.mean_estimate
    );
}

#[test]
fn empirical_entropy_error_shrinks_with_n() {
    let mut plan = single_family_plan(PlanProperty::Entropy, Family::Uniform, vec![40, 640]);
    plan.estimators = vec![EstimatorKind::Empirical];
    let recs = run_experiment(&plan).unwrap();
    let (small, large) = (&recs[0], &recs[1]);
    assert_eq!((small.n, large.n), (40, 640));
    assert!(large.mae < small.mae);
    assert!(large.mae > 0.0 && large.mae < 1000f64.ln());
}

#[test]
fn plug_in_budgets_follow_the_amplified_sizes() {
    for (property, scale) in [(PlanProperty::Entropy, None), (PlanProperty::SupportSize, Some(1000.0))] {
        let mut plan = single_family_plan(property, Family::TwoSteps, vec![5, 80, 640]);
        plan.trials = 4;
        plan.estimators = vec![EstimatorKind::EmpiricalPlus, EstimatorKind::EmpiricalPlusPlus];
        let (_, budgets) = run_experiment_logged(&plan).unwrap();
        assert_eq!(budgets.len(), 6);
        for b in budgets {
            let nf = b.n as f64;
            let ln_a = scale.unwrap_or(nf).ln();
            let want = match b.estimator {
                EstimatorKind::EmpiricalPlus => (nf * ln_a.sqrt()).ceil(),
                _ => (nf * ln_a).ceil(),
            } as u64;
            assert_eq!(b.budget, want, "{:?} at n = {}", b.estimator, b.n);
            assert!(b.drawn.iter().all(|&d| d == want));
        }
    }
}

#[test]
fn bernstein_bias_of_plugin_entropy_is_the_dominant_error() {
    // uniform p: E[h(N/n)] summed over symbols is k·B_n(h, 1/k)
    let k = 1000usize;
    let n = 640u64;
    let mut plan = single_family_plan(PlanProperty::Entropy, Family::Uniform, vec![n]);
    plan.estimators = vec![EstimatorKind::Empirical];
    let rec = &run_experiment(&plan).unwrap()[0];
    let expected = k as f64 * bernstein_eval(amplify::numeric::entropy_kernel, n, 1.0 / k as f64);
    let se = rec.std_dev / (rec.trials as f64).sqrt();
    assert!((rec.mean_estimate - expected).abs() <= 4.0 * se + 1e-9);
    assert!((rec.mae - (rec.true_value - expected)).abs() <= 4.0 * se + 1e-9);
}
