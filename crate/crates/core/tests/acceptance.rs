//! Acceptance checks. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use amplify::bench::{run_experiment_logged, BenchRecord, ExperimentPlan, PlanProperty};
use amplify::dist::{Family, FamilySpec};
use amplify::estimators::{
    cached_entropy_polynomial, competitive_coverage, competitive_support_size,
    coverage_amplification, extrapolated_distinct, small_branch_value, EstimatorConfig,
    EstimatorKind,
};
use amplify::numeric::{entropy_kernel, uniform_grid};
use amplify::polyapprox::{
    bernstein_derivative_eval, bernstein_eval, forward_difference_fn, AmplificationParams,
    EntropyPolynomial,
};
use amplify::profile::{check_tail_bounds, poisson_expectation, Fingerprint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

fn within(limit: Duration, start: Instant, mut v: Verdict) -> Verdict {
    let took = start.elapsed();
    v.detail = format!("{}; {:.2?} (limit {:?})", v.detail, took, limit);
    v.pass &= took < limit;
    v
}

fn bernstein_sandwich() -> Verdict {
    let start = Instant::now();
    let mut worst_upper = f64::NEG_INFINITY;
    let mut worst_lower = f64::INFINITY;
    let mut pass = true;
    for m in [10u64, 100, 1000] {
        for x in uniform_grid(0.0, 1.0, 200) {
            let d = bernstein_eval(entropy_kernel, m, x) - entropy_kernel(x);
            let floor = -(1.0 - x) / m as f64;
            worst_upper = worst_upper.max(d);
            worst_lower = worst_lower.min(d - floor);
            pass &= d <= 1e-9 && d >= floor - 1e-9;
        }
    }
    within(
        Duration::from_secs(1),
        start,
        Verdict::new(
            pass,
            format!("max(B - h) = {worst_upper:.3e}, min(B - h + (1-x)/m) = {worst_lower:.3e}"),
        ),
    )
}

fn derivative_bound() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for m in [10u64, 100] {
        let hm = forward_difference_fn(m);
        for x in uniform_grid(0.0, 1.0 - 1.0 / (m - 1) as f64, 200) {
            worst = worst.max((bernstein_derivative_eval(m, x) - hm(x)).abs());
        }
    }
    within(
        Duration::from_secs(1),
        start,
        Verdict::new(worst <= 1.0 + 1e-6, format!("max |B' - h_m| = {worst:.6}")),
    )
}

fn small_branch_unbiasedness() -> Verdict {
    let start = Instant::now();
    let cfg = EstimatorConfig::default();
    let mut worst = 0.0f64;
    let mut pass = true;
    for n in [1_000u64, 10_000] {
        let params = cfg.amplification_params(n).expect("parameters");
        let poly = cached_entropy_polynomial(params, false).expect("polynomial");
        let nf = n as f64;
        for p in [0.1 / nf, 1.0 / nf, 0.9 * params.interval_hi()] {
            let exact = poisson_expectation(nf * p, 1e-18, |c| {
                small_branch_value(poly.coeffs(), c, n).expect("falling factorial")
            });
            let target = poly.antiderivative.value_at(p);
            let rel = (exact - target).abs() / target.abs();
            worst = worst.max(rel);
            pass &= rel <= 1e-6;
        }
    }
    within(
        Duration::from_secs(5),
        start,
        Verdict::new(pass, format!("max relative deviation {worst:.3e}")),
    )
}

fn pointwise_ratio() -> Verdict {
    let start = Instant::now();
    let params = AmplificationParams::with_defaults(10_000, 1.0).expect("parameters");
    let poly = EntropyPolynomial::construct(params, false, true).expect("polynomial");
    let ratio = poly.max_ratio_error.expect("measured");
    within(
        Duration::from_secs(10),
        start,
        Verdict::new(
            ratio <= 2.0,
            format!(
                "sup |H - B_na(h)|/x = {ratio:.4} over [0, {:.4e}] at degree {}",
                params.interval_hi(),
                poly.degree()
            ),
        ),
    )
}

fn tail_bounds() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut checked = 0;
    for mu in [0.5, 1.0, 5.0, 20.0, 100.0] {
        for delta in [0.1, 0.5, 0.9, 2.0, 5.0] {
            let c = check_tail_bounds(mu, delta).expect("grid point");
            pass &= c.upper.holds();
            checked += 1;
            if let Some(lower) = c.lower {
                pass &= lower.holds();
                checked += 1;
            }
        }
    }
    within(
        Duration::from_secs(1),
        start,
        Verdict::new(pass, format!("{checked} inequalities")),
    )
}

fn support_bias_bound() -> Verdict {
    let start = Instant::now();
    let mut pass = true;
    let mut tightest = f64::INFINITY;
    for k in [5usize, 10] {
        for spec in FamilySpec::benchmark_suite(k) {
            let dist = spec.build().expect("family");
            let support = dist.support_size() as f64;
            for n in [20u64, 50] {
                for a in [1.5, 2.0] {
                    for r in [1.0, 2.0] {
                        let coeff: Vec<f64> = (0..=400u64)
                            .map(|j| {
                                if j == 0 {
                                    return 0.0;
                                }
                                let fp = Fingerprint::from_pairs([(j, 1)]).expect("fingerprint");
                                extrapolated_distinct(&fp, a, r).expect("coefficient").value
                            })
                            .collect();
                        let na = n as f64 * a;
                        let mut est = 0.0;
                        let mut target = 0.0;
                        for &p in dist.probs() {
                            est += poisson_expectation(n as f64 * p, 1e-16, |j| {
                                coeff.get(j as usize).copied().unwrap_or(f64::NAN)
                            });
                            target += -(-na * p).exp_m1();
                        }
                        let bound = na.min(support) * (-r).exp() + 2.0;
                        let gap = (est - target).abs();
                        tightest = tightest.min(bound - gap);
                        pass &= gap <= bound;
                    }
                }
            }
        }
    }
    within(
        Duration::from_secs(30),
        start,
        Verdict::new(pass, format!("smallest slack {tightest:.4}")),
    )
}

fn unit_amplification_collapse() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pass = true;
    for _ in 0..100 {
        let entries = rng.random_range(0..30);
        let pairs: Vec<(u64, u64)> = (0..entries)
            .map(|_| (rng.random_range(1..500), rng.random_range(1..10_000)))
            .collect();
        let fp = Fingerprint::from_pairs(pairs).expect("fingerprint");
        let cfg = EstimatorConfig {
            a: Some(1.0),
            r: Some(rng.random_range(0.0..10.0)),
            ..EstimatorConfig::default()
        };
        let got = competitive_support_size(&fp, &cfg).expect("estimate").value;
        pass &= got.to_bits() == (fp.distinct() as f64).to_bits();
    }
    Verdict::new(pass, "100 random fingerprints")
}

fn mae(records: &[BenchRecord], family: &str, estimator: EstimatorKind, n: u64) -> f64 {
    records
        .iter()
        .find(|r| r.family == family && r.estimator == estimator.name() && r.n == n)
        .unwrap_or_else(|| panic!("missing cell {family} {estimator} {n}"))
        .mae
}

fn entropy_reproduction() -> Verdict {
    let start = Instant::now();
    let mut plan = ExperimentPlan::standard(PlanProperty::Entropy, 1000, 2024);
    plan.families = vec![
        FamilySpec::new(Family::Uniform, 1000),
        FamilySpec::new(Family::Zipf { power: 1.0 }, 1000),
        FamilySpec::new(Family::Dirichlet { alpha: 1.0, seed: 0 }, 1000),
    ];
    plan.n_grid = vec![160, 320, 640];
    plan.trials = 100;
    plan.config.epsilon = 1.0;
    plan.estimators = vec![
        EstimatorKind::Empirical,
        EstimatorKind::EmpiricalPlusPlus,
        EstimatorKind::Competitive,
        EstimatorKind::CompetitiveRefined,
    ];
    let (records, budgets) = run_experiment_logged(&plan).expect("experiment");
    let big = (640.0f64 * 640f64.ln()).ceil() as u64;
    let budget_ok = budgets
        .iter()
        .filter(|b| b.estimator == EstimatorKind::EmpiricalPlusPlus && b.n == 640)
        .all(|b| b.budget == big && b.drawn.iter().all(|&d| d == big));

    let mut notes = Vec::new();
    let mut beats_plugin = true;
    for spec in &plan.families {
        let fam = spec.label();
        for &n in &plan.n_grid {
            let c = mae(&records, &fam, EstimatorKind::Competitive, n);
            let e = mae(&records, &fam, EstimatorKind::Empirical, n);
            beats_plugin &= c <= e;
            notes.push(format!("{fam}@{n}: {c:.3} vs {e:.3}"));
        }
    }
    let mut near_big = true;
    for fam in ["uniform", "zipf-1"] {
        let c = mae(&records, fam, EstimatorKind::Competitive, 640);
        let big_mae = mae(&records, fam, EstimatorKind::EmpiricalPlusPlus, 640);
        let refined = mae(&records, fam, EstimatorKind::CompetitiveRefined, 640);
        near_big &= c <= 2.0 * big_mae;
        notes.push(format!(
            "{fam}: competitive@640 {c:.3} vs 2 x empirical@{big} {:.3} (refined {refined:.3})",
            2.0 * big_mae
        ));
    }
    within(
        Duration::from_secs(120),
        start,
        Verdict::new(
            beats_plugin && near_big && budget_ok,
            format!(
                "beats plug-in at n: {beats_plugin}; within 2x of n ln n plug-in: {near_big}; \
                 budget {big} used: {budget_ok}; {}",
                notes.join(", ")
            ),
        ),
    )
}

fn support_reproduction() -> Verdict {
    let start = Instant::now();
    let mut plan = ExperimentPlan::standard(PlanProperty::SupportSize, 1000, 2024);
    plan.families = vec![
        FamilySpec::new(Family::Uniform, 1000),
        FamilySpec::new(Family::TwoSteps, 1000),
    ];
    plan.n_grid = vec![320, 640];
    plan.trials = 100;
    plan.config.epsilon = (-2.0f64).exp();
    plan.config.a = None;
    plan.estimators = vec![EstimatorKind::Empirical, EstimatorKind::Competitive];
    let (records, _) = run_experiment_logged(&plan).expect("experiment");
    let mut pass = true;
    let mut notes = Vec::new();
    for spec in &plan.families {
        let fam = spec.label();
        let truth = spec.build().expect("family").support_size() as f64;
        for &n in &plan.n_grid {
            let c = mae(&records, &fam, EstimatorKind::Competitive, n) / truth;
            let e = mae(&records, &fam, EstimatorKind::Empirical, n) / truth;
            pass &= c <= e;
            notes.push(format!("{fam}@{n}: {c:.3} vs {e:.3}"));
        }
    }
    within(
        Duration::from_secs(60),
        start,
        Verdict::new(pass, notes.join(", ")),
    )
}

fn coverage_formula() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut consistent = true;
    let fp = Fingerprint::from_pairs([(1, 6), (2, 3), (5, 1)]).expect("fingerprint");
    for _ in 0..100 {
        let n: u64 = rng.random_range(1..5_000);
        let a: f64 = rng.random_range(1.0..10.0);
        let m: u64 = (1.5 * n as f64).ceil() as u64 + rng.random_range(0..20_000);
        let direct = a * (1.0 - (-(m as f64) / (n as f64 * a)).exp());
        worst = worst.max((coverage_amplification(n, a, m) - direct).abs());
        if a > 1.8 {
            let cfg = EstimatorConfig {
                epsilon: (-2.0f64).exp(),
                a: Some(a),
                m: Some(m),
                ..EstimatorConfig::default()
            };
            let got = competitive_coverage(&fp, n, &cfg).expect("coverage").value;
            let want = extrapolated_distinct(&fp, direct, cfg.smoothing()).expect("sum").value;
            consistent &= (got - want).abs() <= 1e-9 * want.abs().max(1.0);
        }
    }
    Verdict::new(
        worst <= 1e-12 && consistent,
        format!("max |a' - direct| = {worst:.3e}; estimator uses a': {consistent}"),
    )
}

fn determinism() -> Verdict {
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_amplify"))
            .args(["bench", "--seed", "1"])
            .output()
            .expect("spawn amplify");
        assert!(out.status.success(), "bench failed: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run();
    let second = run();
    Verdict::new(
        first == second && !first.is_empty(),
        format!("{} bytes, {} lines", first.len(), first.iter().filter(|&&b| b == b'\n').count()),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        ("bernstein sandwich", bernstein_sandwich),
        ("bernstein derivative bound", derivative_bound),
        ("small-branch unbiasedness", small_branch_unbiasedness),
        ("amplified polynomial pointwise ratio", pointwise_ratio),
        ("poisson tail bounds", tail_bounds),
        ("support-size bias bound", support_bias_bound),
        ("unit amplification collapse", unit_amplification_collapse),
        ("entropy desk-scale reproduction", entropy_reproduction),
        ("support-size desk-scale reproduction", support_reproduction),
        ("coverage amplification formula", coverage_formula),
        ("bench determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        });
        if !verdict.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if verdict.pass { "PASS" } else { "FAIL" },
            verdict.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
