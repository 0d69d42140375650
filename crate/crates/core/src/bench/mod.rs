//! Experiment harness: distributions × sample sizes × estimators × trials.

pub mod cli;
mod emit;

pub use emit::{emit_results, parse_csv, read_csv, write_csv, write_json, OutputFormat, CSV_HEADER};

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{derive_seed, fnv1a, sample_counts, seeded_rng, FamilySpec, Property, SampleMode};
use crate::error::{Error, Result};
use crate::estimators::{
    competitive_coverage, competitive_entropy, competitive_l1, competitive_support_size,
    empirical_estimate, EstimatorConfig, EstimatorKind,
};
use crate::numeric::CompensatedSum;

/// The property measured by a plan, before it is specialised to a family's
/// alphabet.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanProperty {
    Entropy,
    /// ℓ1-distance to `reference`, rebuilt at each family's `k`.
    L1 { reference: FamilySpec },
    SupportSize,
    Coverage { m: u64 },
}

impl PlanProperty {
    pub fn name(&self) -> &'static str {
        match self {
            PlanProperty::Entropy => "entropy",
            PlanProperty::L1 { .. } => "l1",
            PlanProperty::SupportSize => "support_size",
            PlanProperty::Coverage { .. } => "coverage",
        }
    }

    fn for_alphabet(&self, k: usize) -> Result<Property> {
        Ok(match self {
            PlanProperty::Entropy => Property::Entropy,
            PlanProperty::L1 { reference } => {
                let q = FamilySpec::new(reference.family.clone(), k).build()?;
                Property::L1 {
                    q: q.probs().to_vec(),
                }
            }
            PlanProperty::SupportSize => Property::SupportSize,
            PlanProperty::Coverage { m } => Property::Coverage { m: *m },
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub property: PlanProperty,
    pub families: Vec<FamilySpec>,
    /// Ascending sample sizes.
    pub n_grid: Vec<u64>,
    pub trials: u64,
    pub estimators: Vec<EstimatorKind>,
    pub master_seed: u64,
    pub config: EstimatorConfig,
    /// Sampling for the competitive estimators; plug-in baselines always use
    /// exactly their sample budget.
    pub competitive_mode: SampleMode,
}

/// Doubling grid 5, 10, ..., 640.
pub fn default_n_grid() -> Vec<u64> {
    (0..8).map(|i| 5u64 << i).collect()
}

impl ExperimentPlan {
    /// Full benchmark grid for `property` with the nine families at `k`.
    pub fn standard(property: PlanProperty, k: usize, master_seed: u64) -> Self {
        let estimators = match property {
            PlanProperty::Entropy => EstimatorKind::ALL.to_vec(),
            _ => EstimatorKind::ALL
                .into_iter()
                .filter(|e| *e != EstimatorKind::CompetitiveRefined)
                .collect(),
        };
        let config = match property {
            PlanProperty::Entropy | PlanProperty::L1 { .. } => EstimatorConfig::desk_scale(),
            _ => EstimatorConfig {
                epsilon: (-2.0f64).exp(),
                ..EstimatorConfig::default()
            },
        };
        ExperimentPlan {
            property,
            families: FamilySpec::benchmark_suite(k),
            n_grid: default_n_grid(),
            trials: 100,
            estimators,
            master_seed,
            config,
            competitive_mode: SampleMode::Poissonized,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "need at least one trial"));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("n", "grid must be nonempty and strictly ascending"));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::param("n", "sample sizes must be positive"));
        }
        if self.families.is_empty() || self.estimators.is_empty() {
            return Err(Error::param("plan", "need at least one family and one estimator"));
        }
        for &e in &self.estimators {
            if e == EstimatorKind::CompetitiveRefined && self.property != PlanProperty::Entropy {
                return Err(Error::Incompatible {
                    estimator: e.name().into(),
                    property: self.property.name().into(),
                });
            }
        }
        Ok(())
    }
}

/// Aggregate over the trials of one (property, family, estimator, n) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub property: String,
    pub family: String,
    pub estimator: String,
    pub n: u64,
    pub trials: u64,
    pub true_value: f64,
    pub mean_estimate: f64,
    pub mae: f64,
    pub std_dev: f64,
}

/// Sample sizes consumed by one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetEntry {
    pub family: String,
    pub estimator: EstimatorKind,
    pub n: u64,
    /// Samples the estimator is entitled to per trial.
    pub budget: u64,
    /// Sample totals actually drawn, per trial, summed over main and probe.
    pub drawn: Vec<u64>,
}

/// Samples granted to an estimator at grid point `n`; `scale` is `A`.
pub fn sample_budget(kind: EstimatorKind, n: u64, scale: f64) -> u64 {
    let nf = n as f64;
    let ln_a = scale.max(1.0).ln();
    let b = match kind {
        EstimatorKind::EmpiricalPlus => (nf * ln_a.sqrt()).ceil(),
        EstimatorKind::EmpiricalPlusPlus => (nf * ln_a).ceil(),
        _ => nf,
    };
    (b as u64).max(1)
}

fn budget_scale(property: &PlanProperty, n: u64, truth: f64) -> f64 {
    match property {
        PlanProperty::Entropy | PlanProperty::L1 { .. } => n as f64,
        PlanProperty::SupportSize | PlanProperty::Coverage { .. } => truth,
    }
}

struct Cell<'a> {
    family: &'a FamilySpec,
    property: Property,
    truth: f64,
    dist: crate::dist::DiscreteDistribution,
    estimator: EstimatorKind,
    n: u64,
}

// One trial: returns (estimate, samples drawn).
fn run_trial(plan: &ExperimentPlan, cell: &Cell<'_>, cfg: &EstimatorConfig, seed: u64) -> Result<(f64, u64)> {
    let mut rng = seeded_rng(seed);
    let n = cell.n;
    if cell.estimator.is_empirical() {
        let scale = budget_scale(&plan.property, n, cell.truth);
        let budget = sample_budget(cell.estimator, n, scale);
        let counts = sample_counts(&cell.dist, budget, SampleMode::Fixed, &mut rng);
        let v = empirical_estimate(&cell.property, &counts, budget)?;
        return Ok((v, counts.total()));
    }
    let mode = plan.competitive_mode;
    match &cell.property {
        Property::Entropy | Property::L1 { .. } => {
            let main = sample_counts(&cell.dist, n, mode, &mut rng);
            let probe = sample_counts(&cell.dist, n, mode, &mut rng);
            let est = match &cell.property {
                Property::L1 { q } => competitive_l1(&main, &probe, n, q, cfg)?,
                _ => competitive_entropy(&main, &probe, n, cfg)?,
            };
            Ok((est.value, main.total() + probe.total()))
        }
        Property::SupportSize => {
            let counts = sample_counts(&cell.dist, n, mode, &mut rng);
            let est = competitive_support_size(&counts.fingerprint(), cfg)?;
            Ok((est.value, counts.total()))
        }
        Property::Coverage { .. } => {
            let counts = sample_counts(&cell.dist, n, mode, &mut rng);
            let est = competitive_coverage(&counts.fingerprint(), n, cfg)?;
            Ok((est.value, counts.total()))
        }
    }
}

fn cell_config(plan: &ExperimentPlan, cell: &Cell<'_>) -> EstimatorConfig {
    let mut cfg = plan.config;
    cfg.refined = cell.estimator == EstimatorKind::CompetitiveRefined;
    if let Property::Coverage { m } = cell.property {
        cfg.m = Some(m);
        let horizon_ok = m as f64 >= 1.5 * cell.n as f64;
        let a_ok = cfg.a.is_none_or(|a| a == 1.0 || a > 1.8);
        if !cell.estimator.is_empirical() && !(horizon_ok && a_ok) {
            warn!(
                "coverage cell {} n={} m={m}: amplification regime violated, using a = 1",
                cell.family.label(),
                cell.n
            );
            cfg.a = Some(1.0);
        }
    }
    cfg
}

fn run_cell(plan: &ExperimentPlan, cell: &Cell<'_>) -> Result<(BenchRecord, BudgetEntry)> {
    let label = format!(
        "{}|{}|{}|{}",
        plan.property.name(),
        cell.family,
        cell.estimator.name(),
        cell.n
    );
    let cell_hash = fnv1a(&label);
    let cfg = cell_config(plan, cell);
    let attempts: Vec<(f64, u64, Option<String>)> = (0..plan.trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(&[plan.master_seed, cell_hash, t]);
            match run_trial(plan, cell, &cfg, seed) {
                // resolved amplification can still land outside the regime
                Err(Error::Regime(msg)) if matches!(cell.property, Property::Coverage { .. }) => {
                    let fallback = EstimatorConfig { a: Some(1.0), ..cfg };
                    run_trial(plan, cell, &fallback, seed).map(|(v, s)| (v, s, Some(msg)))
                }
                other => other.map(|(v, s)| (v, s, None)),
            }
        })
        .collect::<Result<_>>()?;
    let fallbacks: Vec<&String> = attempts.iter().filter_map(|a| a.2.as_ref()).collect();
    if let Some(first) = fallbacks.first() {
        warn!(
            "{label}: {} of {} trials outside the amplification regime, run at a = 1 (first: {first})",
            fallbacks.len(),
            plan.trials
        );
    }
    let outcomes: Vec<(f64, u64)> = attempts.iter().map(|&(v, s, _)| (v, s)).collect();

    let trials = plan.trials as f64;
    let mut sum = CompensatedSum::new();
    let mut abs_err = CompensatedSum::new();
    for &(v, _) in &outcomes {
        sum.add(v);
        abs_err.add((v - cell.truth).abs());
    }
    let mean = sum.value() / trials;
    let mut var = CompensatedSum::new();
    for &(v, _) in &outcomes {
        var.add((v - mean) * (v - mean));
    }
    let scale = budget_scale(&plan.property, cell.n, cell.truth);
    let budget = match cell.estimator {
        e if e.is_empirical() => sample_budget(e, cell.n, scale),
        _ => cell.n,
    };
    let drawn: Vec<u64> = outcomes.iter().map(|&(_, s)| s).collect();
    debug!("{label}: budget {budget}, first trial drew {}", drawn[0]);
    Ok((
        BenchRecord {
            property: plan.property.name().to_string(),
            family: cell.family.label(),
            estimator: cell.estimator.name().to_string(),
            n: cell.n,
            trials: plan.trials,
            true_value: cell.truth,
            mean_estimate: mean,
            mae: abs_err.value() / trials,
            std_dev: (var.value() / trials).max(0.0).sqrt(),
        },
        BudgetEntry {
            family: cell.family.label(),
            estimator: cell.estimator,
            n: cell.n,
            budget,
            drawn,
        },
    ))
}

/// Runs every cell of `plan`, returning records in (family, n, estimator)
/// order together with the per-cell sample budgets.
pub fn run_experiment_logged(plan: &ExperimentPlan) -> Result<(Vec<BenchRecord>, Vec<BudgetEntry>)> {
    plan.validate()?;
    let mut cells = Vec::new();
    for family in &plan.families {
        let dist = family.build()?;
        let property = plan.property.for_alphabet(family.k)?;
        let truth = dist.true_value(&property)?;
        for &n in &plan.n_grid {
            for &estimator in &plan.estimators {
                cells.push(Cell {
                    family,
                    property: property.clone(),
                    truth,
                    dist: dist.clone(),
                    estimator,
                    n,
                });
            }
        }
    }
    let results: Vec<(BenchRecord, BudgetEntry)> = cells
        .par_iter()
        .map(|cell| run_cell(plan, cell))
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<BenchRecord>> {
    run_experiment_logged(plan).map(|(records, _)| records)
}
