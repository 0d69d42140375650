//! Command-line interface.
//!
//! Exit codes: 0 on success, 2 on argument or configuration errors, 1 on
//! runtime failures.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::{emit_results, ExperimentPlan, OutputFormat, PlanProperty};
use crate::dist::{FamilySpec, Property, SampleMode, DEFAULT_K};
use crate::error::{Error, Result};
use crate::estimators::{
    competitive_coverage, competitive_entropy, competitive_l1, competitive_support_size,
    empirical_estimate, EstimatorConfig, EstimatorKind,
};
use crate::numeric::{entropy_kernel, uniform_grid};
use crate::polyapprox::{self, AmplificationParams, EntropyPolynomial};
use crate::profile::{self, CountVector};

const ABOUT: &str = "Competitive estimators for entropy, l1-distance, support size and \
support coverage, with plug-in baselines and a benchmark harness.\n\n\
All logarithms are natural; entropies are reported in nats.";

#[derive(Debug, Parser)]
#[command(name = "amplify", version, about = ABOUT)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a benchmark grid and print one record per cell.
    Bench(BenchArgs),
    /// Estimate a property from a count file.
    Estimate(EstimateArgs),
    /// Dump (x, H(x), B(h, x)) for the amplified entropy polynomial.
    Diagnose(DiagnoseArgs),
    /// Run the built-in oracle checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Entropy,
    L1,
    #[value(name = "support_size", alias = "support-size")]
    SupportSize,
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Poissonized,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn parse_family(s: &str) -> std::result::Result<FamilySpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_estimator(s: &str) -> std::result::Result<EstimatorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Property to estimate.
    #[arg(long, value_enum)]
    property: Option<PropertyArg>,
    /// Distribution family, e.g. `zipf:k=1000,power=1`; repeatable.
    /// Defaults to the nine benchmark families.
    #[arg(long, value_parser = parse_family)]
    family: Vec<FamilySpec>,
    /// Alphabet size for the default families.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated ascending sample sizes [default: 5,10,...,640].
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,
    /// Trials per cell [default: 100].
    #[arg(long)]
    trials: Option<u64>,
    /// Comma-separated estimators [default: all applicable].
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator)]
    estimator: Vec<EstimatorKind>,
    /// Master seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Reference distribution for l1 [default: uniform].
    #[arg(long, value_parser = parse_family)]
    reference: Option<FamilySpec>,
    /// Sampling for competitive estimators [default: poissonized].
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Flat key=value file supplying defaults for any of the options above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct TuningArgs {
    /// Accuracy parameter [default: 1 for entropy and l1, e^-2 for support
    /// size and coverage].
    #[arg(long)]
    epsilon: Option<f64>,
    /// Small-branch interval constant [default: 4].
    #[arg(long = "c-l")]
    c_l: Option<f64>,
    /// Polynomial degree constant [default: 2 for the CLI].
    #[arg(long = "c-s")]
    c_s: Option<f64>,
    /// Poisson smoothing parameter [default: |ln epsilon|].
    #[arg(long)]
    r: Option<f64>,
    /// Amplification for support size and coverage [default: resolved from
    /// the sample].
    #[arg(long)]
    a: Option<f64>,
    /// Coverage horizon [default: twice the largest n].
    #[arg(long)]
    m: Option<u64>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    property: PropertyArg,
    /// File with one nonnegative count per line.
    #[arg(long)]
    counts: PathBuf,
    /// Independent probe sample, required by competitive entropy and l1.
    #[arg(long)]
    probe: Option<PathBuf>,
    /// Sample size [default: total of the counts].
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, value_parser = parse_estimator, default_value = "competitive")]
    estimator: EstimatorKind,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Reference distribution for l1 [default: uniform].
    #[arg(long, value_parser = parse_family)]
    reference: Option<FamilySpec>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long = "c-l", default_value_t = polyapprox::DEFAULT_C_L)]
    c_l: f64,
    #[arg(long = "c-s", default_value_t = polyapprox::DEFAULT_C_S)]
    c_s: f64,
    /// Use the refined polynomial.
    #[arg(long)]
    refined: bool,
    /// Number of grid points on the small interval.
    #[arg(long, default_value_t = 200)]
    points: usize,
}

/// An error tagged with its exit code.
struct Failure {
    code: i32,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::UnknownFamily(_)
            | Error::FamilySpec { .. }
            | Error::InvalidParameter { .. }
            | Error::Incompatible { .. } => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

fn usage(error: Error) -> Failure {
    Failure { code: 2, error }
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();

    let outcome = match cli.command {
        Command::Bench(args) => run_bench(args),
        Command::Estimate(args) => run_estimate(args),
        Command::Diagnose(args) => run_diagnose(args),
        Command::Selftest => run_selftest(),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

type Outcome = std::result::Result<i32, Failure>;

// ---------------------------------------------------------------- config

struct ConfigFile {
    path: PathBuf,
    values: HashMap<String, Vec<String>>,
}

impl ConfigFile {
    fn load(path: &Path) -> std::result::Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| usage(Error::io(path, e)))?;
        let mut values: HashMap<String, Vec<String>> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                usage(Error::Parse {
                    path: path.into(),
                    reason: format!("line {}: expected key=value", i + 1),
                })
            })?;
            let key = k.trim().to_ascii_lowercase().replace('-', "_");
            values.entry(key).or_default().push(v.trim().to_string());
        }
        Ok(ConfigFile {
            path: path.into(),
            values,
        })
    }

    fn empty() -> Self {
        ConfigFile {
            path: PathBuf::new(),
            values: HashMap::new(),
        }
    }

    fn bad(&self, key: &str, value: &str) -> Failure {
        usage(Error::Parse {
            path: self.path.clone(),
            reason: format!("invalid value `{value}` for `{key}`"),
        })
    }

    fn get<T: FromStr>(&self, key: &str) -> std::result::Result<Option<T>, Failure> {
        match self.values.get(key).and_then(|v| v.last()) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| self.bad(key, v)),
        }
    }

    fn list<T: FromStr>(&self, key: &str, sep: Option<char>) -> std::result::Result<Vec<T>, Failure> {
        let mut out = Vec::new();
        for v in self.values.get(key).into_iter().flatten() {
            let items: Vec<&str> = match sep {
                Some(c) => v.split(c).map(str::trim).filter(|s| !s.is_empty()).collect(),
                None => vec![v.as_str()],
            };
            for item in items {
                out.push(item.parse().map_err(|_| self.bad(key, item))?);
            }
        }
        Ok(out)
    }

    fn value_enum<T: ValueEnum>(&self, key: &str) -> std::result::Result<Option<T>, Failure> {
        match self.values.get(key).and_then(|v| v.last()) {
            None => Ok(None),
            Some(v) => T::from_str(v, true).map(Some).map_err(|_| self.bad(key, v)),
        }
    }

    fn check_keys(&self) -> std::result::Result<(), Failure> {
        const KNOWN: [&str; 18] = [
            "property", "family", "k", "n", "trials", "estimator", "seed", "epsilon", "c_l",
            "c_s", "r", "a", "m", "reference", "mode", "format", "output", "estimators",
        ];
        match self.values.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            Some(k) => Err(usage(Error::Parse {
                path: self.path.clone(),
                reason: format!("unknown key `{k}`"),
            })),
            None => Ok(()),
        }
    }
}

fn tuning_from(
    cli: &TuningArgs,
    file: &ConfigFile,
) -> std::result::Result<TuningArgs, Failure> {
    Ok(TuningArgs {
        epsilon: cli.epsilon.or(file.get("epsilon")?),
        c_l: cli.c_l.or(file.get("c_l")?),
        c_s: cli.c_s.or(file.get("c_s")?),
        r: cli.r.or(file.get("r")?),
        a: cli.a.or(file.get("a")?),
        m: cli.m.or(file.get("m")?),
    })
}

fn default_epsilon(property: PropertyArg) -> f64 {
    match property {
        PropertyArg::Entropy | PropertyArg::L1 => 1.0,
        PropertyArg::SupportSize | PropertyArg::Coverage => (-2.0f64).exp(),
    }
}

fn estimator_config(property: PropertyArg, t: &TuningArgs) -> EstimatorConfig {
    let base = EstimatorConfig::desk_scale();
    EstimatorConfig {
        epsilon: t.epsilon.unwrap_or_else(|| default_epsilon(property)),
        c_l: t.c_l.unwrap_or(base.c_l),
        c_s: t.c_s.unwrap_or(base.c_s),
        r: t.r,
        a: t.a,
        m: t.m,
        refined: false,
    }
}

// ----------------------------------------------------------------- bench

fn run_bench(args: BenchArgs) -> Outcome {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::empty(),
    };
    file.check_keys()?;

    let property = match args.property {
        Some(p) => p,
        None => file.value_enum("property")?.unwrap_or(PropertyArg::Entropy),
    };
    let k = match args.k {
        Some(k) => k,
        None => file.get("k")?.unwrap_or(DEFAULT_K),
    };
    let mut families = args.family.clone();
    if families.is_empty() {
        for s in file.list::<String>("family", None)? {
            families.push(s.parse().map_err(usage)?);
        }
    }
    if families.is_empty() {
        families = FamilySpec::benchmark_suite(k);
    }
    let mut n_grid = args.n.clone();
    if n_grid.is_empty() {
        n_grid = file.list("n", Some(','))?;
    }
    if n_grid.is_empty() {
        n_grid = super::default_n_grid();
    }
    let mut estimators = args.estimator.clone();
    if estimators.is_empty() {
        for key in ["estimator", "estimators"] {
            for s in file.list::<String>(key, Some(','))? {
                estimators.push(s.parse().map_err(usage)?);
            }
        }
    }
    let tuning = tuning_from(&args.tuning, &file)?;
    let reference = match args.reference.clone() {
        Some(r) => r,
        None => match file.get::<String>("reference")? {
            Some(s) => s.parse().map_err(usage)?,
            None => FamilySpec::new(crate::dist::Family::Uniform, k),
        },
    };
    let max_n = n_grid.iter().copied().max().unwrap_or(1);
    let plan_property = match property {
        PropertyArg::Entropy => PlanProperty::Entropy,
        PropertyArg::L1 => PlanProperty::L1 { reference },
        PropertyArg::SupportSize => PlanProperty::SupportSize,
        PropertyArg::Coverage => PlanProperty::Coverage {
            m: tuning.m.unwrap_or(2 * max_n),
        },
    };
    let seed = match args.seed {
        Some(s) => s,
        None => file.get("seed")?.unwrap_or(0),
    };
    let mut plan = ExperimentPlan::standard(plan_property, k, seed);
    plan.families = families;
    plan.n_grid = n_grid;
    if !estimators.is_empty() {
        plan.estimators = estimators;
    }
    if let Some(t) = args.trials.or(file.get("trials")?) {
        plan.trials = t;
    }
    plan.config = estimator_config(property, &tuning);
    let mode = match args.mode {
        Some(m) => m,
        None => file.value_enum("mode")?.unwrap_or(ModeArg::Poissonized),
    };
    plan.competitive_mode = match mode {
        ModeArg::Poissonized => SampleMode::Poissonized,
        ModeArg::Fixed => SampleMode::Fixed,
    };
    let format = match args.format {
        Some(f) => f,
        None => file.value_enum("format")?.unwrap_or(FormatArg::Csv),
    };
    let output = match args.output.clone() {
        Some(o) => Some(o),
        None => file.get::<String>("output")?.map(PathBuf::from),
    };
    plan.validate().map_err(usage)?;

    let records = super::run_experiment(&plan)?;
    let format = match format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    emit_results(&records, format, output.as_deref())?;
    Ok(0)
}

// -------------------------------------------------------------- estimate

fn read_counts(path: &Path) -> std::result::Result<CountVector, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut counts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        counts.push(line.parse::<u64>().map_err(|_| {
            usage(Error::Parse {
                path: path.into(),
                reason: format!("line {}: `{line}` is not a nonnegative integer", i + 1),
            })
        })?);
    }
    Ok(CountVector::new(counts))
}

fn run_estimate(args: EstimateArgs) -> Outcome {
    let main = read_counts(&args.counts)?;
    let n = args.n.unwrap_or(main.total());
    let mut cfg = estimator_config(args.property, &args.tuning);
    cfg.refined = args.estimator == EstimatorKind::CompetitiveRefined;
    if cfg.refined && args.property != PropertyArg::Entropy {
        return Err(Error::Incompatible {
            estimator: args.estimator.name().into(),
            property: format!("{:?}", args.property).to_lowercase(),
        }
        .into());
    }
    let k = main.len();
    let property = match args.property {
        PropertyArg::Entropy => Property::Entropy,
        PropertyArg::L1 => {
            let spec = args
                .reference
                .clone()
                .unwrap_or(FamilySpec::new(crate::dist::Family::Uniform, k));
            let q = FamilySpec::new(spec.family, k).build()?;
            Property::L1 {
                q: q.probs().to_vec(),
            }
        }
        PropertyArg::SupportSize => Property::SupportSize,
        PropertyArg::Coverage => Property::Coverage {
            m: cfg
                .m
                .ok_or_else(|| usage(Error::param("m", "coverage needs --m")))?,
        },
    };

    let value = if args.estimator.is_empirical() {
        empirical_estimate(&property, &main, n)?
    } else {
        match &property {
            Property::Entropy | Property::L1 { .. } => {
                let probe_path = args.probe.as_ref().ok_or_else(|| {
                    usage(Error::param(
                        "probe",
                        "competitive entropy and l1 need an independent --probe sample",
                    ))
                })?;
                let probe = read_counts(probe_path)?;
                let est = match &property {
                    Property::L1 { q } => competitive_l1(&main, &probe, n, q, &cfg)?,
                    _ => competitive_entropy(&main, &probe, n, &cfg)?,
                };
                log::info!(
                    "small {} large {} dropped {}",
                    est.small,
                    est.large,
                    est.dropped
                );
                est.value
            }
            Property::SupportSize => competitive_support_size(&main.fingerprint(), &cfg)?.value,
            Property::Coverage { .. } => competitive_coverage(&main.fingerprint(), n, &cfg)?.value,
        }
    };
    println!("{value}");
    Ok(0)
}

// -------------------------------------------------------------- diagnose

fn run_diagnose(args: DiagnoseArgs) -> Outcome {
    let params = AmplificationParams::new(args.n, args.epsilon, args.c_l, args.c_s)?;
    let poly = EntropyPolynomial::construct(params, args.refined, true)?;
    let m = params.bernstein_degree();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io_err = |e| Failure::from(Error::io("<stdout>", e));
    writeln!(out, "x,poly,bernstein").map_err(io_err)?;
    for x in uniform_grid(0.0, params.interval_hi(), args.points.max(2)) {
        let y = poly.antiderivative.value_at(x);
        let b = polyapprox::bernstein_eval(entropy_kernel, m, x);
        writeln!(out, "{x:.8e},{y:.8e},{b:.8e}").map_err(io_err)?;
    }
    eprintln!(
        "degree {} | interval [0, {:.6e}] | max |H - B|/x = {:.6e} | max |H - B| = {:.6e}",
        poly.degree(),
        params.interval_hi(),
        poly.max_ratio_error.unwrap_or(f64::NAN),
        poly.max_abs_error.unwrap_or(f64::NAN)
    );
    Ok(0)
}

// -------------------------------------------------------------- selftest

fn check(name: &str, ok: bool, failures: &mut u32) {
    println!("{} {name}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        *failures += 1;
    }
}

fn run_selftest() -> Outcome {
    let mut failures = 0;

    let sandwich = [10u64, 100, 1000].iter().all(|&m| {
        uniform_grid(0.0, 1.0, 200).into_iter().all(|x| {
            let d = polyapprox::bernstein_eval(entropy_kernel, m, x) - entropy_kernel(x);
            d <= 1e-9 && d >= -(1.0 - x) / m as f64 - 1e-9
        })
    });
    check("bernstein sandwich", sandwich, &mut failures);

    let derivative = [10u64, 100].iter().all(|&m| {
        let hm = polyapprox::forward_difference_fn(m);
        uniform_grid(0.0, 1.0 - 1.0 / (m - 1) as f64, 200)
            .into_iter()
            .all(|x| (polyapprox::bernstein_derivative_eval(m, x) - hm(x)).abs() <= 1.0 + 1e-6)
    });
    check("bernstein derivative bound", derivative, &mut failures);

    let mut tails = true;
    for mu in [0.5, 1.0, 5.0, 20.0, 100.0] {
        for delta in [0.1, 0.5, 0.9, 2.0, 5.0] {
            match profile::check_tail_bounds(mu, delta) {
                Ok(c) => tails &= c.upper.holds() && c.lower.is_none_or(|l| l.holds()),
                Err(_) => tails = false,
            }
        }
    }
    check("poisson tail bounds", tails, &mut failures);

    let unbiased = (|| -> Result<bool> {
        let n = 1000;
        let cfg = EstimatorConfig::default();
        let params = cfg.amplification_params(n)?;
        let poly = crate::estimators::cached_entropy_polynomial(params, false)?;
        let p = 1.0 / n as f64;
        let exact = profile::poisson_expectation(n as f64 * p, 1e-18, |c| {
            crate::estimators::small_branch_value(poly.coeffs(), c, n).unwrap_or(f64::NAN)
        });
        let target = poly.antiderivative.value_at(p);
        Ok((exact - target).abs() <= 1e-6 * target.abs())
    })()
    .unwrap_or(false);
    check("small-branch unbiasedness", unbiased, &mut failures);

    let fp = profile::Fingerprint::from_pairs([(1, 17), (2, 4), (9, 1)]).unwrap_or_default();
    let cfg = EstimatorConfig {
        a: Some(1.0),
        r: Some(3.0),
        ..EstimatorConfig::default()
    };
    let collapse = competitive_support_size(&fp, &cfg)
        .map(|e| e.value == 22.0)
        .unwrap_or(false);
    check("support-size collapse at a = 1", collapse, &mut failures);

    Ok(if failures == 0 { 0 } else { 1 })
}
