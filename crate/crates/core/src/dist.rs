//! Synthetic distribution families, exact property values and sampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, entropy_kernel};
use crate::profile::{ln_binomial_pmf, ln_poisson_pmf, CountVector};

/// Seedable random stream used for every draw in the crate.
pub type StreamRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a sequence of words into one seed. Used to derive per-trial streams
/// from `(master seed, cell, trial)` so results do not depend on scheduling.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243f_6a88_85a3_08d3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// 64-bit FNV-1a, for hashing cell labels into seeds.
pub fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// A family of distributions over `k` symbols.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Uniform,
    /// Half the symbols at `0.5/k`, the rest at `1.5/k`.
    TwoSteps,
    Zipf { power: f64 },
    /// `Bin(k-1, p)` mass on symbols `0..k`.
    Binomial { p: f64 },
    /// Mass proportional to `p (1-p)^i`, truncated to `k` symbols.
    Geometric { p: f64 },
    /// `Poi(mean_factor · k)` mass on symbols `0..k`.
    Poisson { mean_factor: f64 },
    /// A single `Dir(alpha)` draw. `seed` fixes the draw when the family is
    /// built without an explicit stream.
    Dirichlet { alpha: f64, seed: u64 },
}

/// Family plus alphabet size, as written on the command line:
/// `zipf:k=1000,power=1`, `dirichlet:k=1000,alpha=0.5,seed=7`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub k: usize,
}

pub const DEFAULT_K: usize = 1000;

impl FamilySpec {
    pub fn new(family: Family, k: usize) -> Self {
        FamilySpec { family, k }
    }

    /// The nine benchmark families at alphabet size `k`.
    pub fn benchmark_suite(k: usize) -> Vec<FamilySpec> {
        [
            Family::Uniform,
            Family::TwoSteps,
            Family::Zipf { power: 0.5 },
            Family::Zipf { power: 1.0 },
            Family::Binomial { p: 0.3 },
            Family::Geometric { p: 0.9 },
            Family::Poisson { mean_factor: 0.3 },
            Family::Dirichlet { alpha: 1.0, seed: 0 },
            Family::Dirichlet { alpha: 0.5, seed: 0 },
        ]
        .into_iter()
        .map(|f| FamilySpec::new(f, k))
        .collect()
    }

    /// Short label without commas, used as the `family` column of results.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Uniform => "uniform".into(),
            Family::TwoSteps => "two-steps".into(),
            Family::Zipf { power } => format!("zipf-{power}"),
            Family::Binomial { p } => format!("binomial-{p}"),
            Family::Geometric { p } => format!("geometric-{p}"),
            Family::Poisson { mean_factor } => format!("poisson-{mean_factor}k"),
            Family::Dirichlet { alpha, .. } => format!("dirichlet-{alpha}"),
        }
    }

    /// Builds the distribution; Dirichlet families draw from `rng`.
    pub fn make<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DiscreteDistribution> {
        make_distribution(&self.family, self.k, rng)
    }

    /// Builds the distribution; Dirichlet families draw from their own seed.
    pub fn build(&self) -> Result<DiscreteDistribution> {
        let seed = match self.family {
            Family::Dirichlet { seed, .. } => seed,
            _ => 0,
        };
        self.make(&mut seeded_rng(seed))
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.k;
        match &self.family {
            Family::Uniform => write!(f, "uniform:k={k}"),
            Family::TwoSteps => write!(f, "two-steps:k={k}"),
            Family::Zipf { power } => write!(f, "zipf:k={k},power={power}"),
            Family::Binomial { p } => write!(f, "binomial:k={k},p={p}"),
            Family::Geometric { p } => write!(f, "geometric:k={k},p={p}"),
            Family::Poisson { mean_factor } => write!(f, "poisson:k={k},mean={mean_factor}"),
            Family::Dirichlet { alpha, seed } => {
                write!(f, "dirichlet:k={k},alpha={alpha},seed={seed}")
            }
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: String| Error::FamilySpec {
            spec: spec.to_string(),
            reason,
        };
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), r.trim()),
            None => (spec.trim(), ""),
        };
        let mut kv: Vec<(String, String)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{item}`")))?;
            kv.push((key.trim().to_ascii_lowercase(), value.trim().to_string()));
        }
        let take = |kv: &mut Vec<(String, String)>, key: &str| -> Option<String> {
            let pos = kv.iter().position(|(k, _)| k == key)?;
            Some(kv.remove(pos).1)
        };
        let num = |v: Option<String>, key: &str, default: f64| -> Result<f64> {
            match v {
                None => Ok(default),
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|_| bad(format!("`{key}` must be a number, got `{s}`"))),
            }
        };

        let k = match take(&mut kv, "k") {
            None => DEFAULT_K,
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| bad(format!("`k` must be a positive integer, got `{s}`")))?,
        };
        let family = match name.to_ascii_lowercase().as_str() {
            "uniform" => Family::Uniform,
            "two-steps" | "twosteps" | "two_steps" | "step" => Family::TwoSteps,
            "zipf" => Family::Zipf {
                power: num(take(&mut kv, "power"), "power", 1.0)?,
            },
            "binomial" => Family::Binomial {
                p: num(take(&mut kv, "p"), "p", 0.3)?,
            },
            "geometric" => Family::Geometric {
                p: num(take(&mut kv, "p"), "p", 0.9)?,
            },
            "poisson" => Family::Poisson {
                mean_factor: num(take(&mut kv, "mean"), "mean", 0.3)?,
            },
            "dirichlet" => {
                let alpha = num(take(&mut kv, "alpha"), "alpha", 1.0)?;
                let seed = match take(&mut kv, "seed") {
                    None => 0,
                    Some(s) => s
                        .parse::<u64>()
                        .map_err(|_| bad(format!("`seed` must be an integer, got `{s}`")))?,
                };
                Family::Dirichlet { alpha, seed }
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        if let Some((key, _)) = kv.first() {
            return Err(bad(format!("unknown parameter `{key}`")));
        }
        Ok(FamilySpec { family, k })
    }
}

/// Probability vector over `k` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
    label: String,
}

impl DiscreteDistribution {
    /// Validates and wraps a probability vector. Entries must be finite and
    /// nonnegative and sum to 1 within 1e-9; they are renormalized exactly.
    pub fn from_probs(probs: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("k", "distribution needs at least one symbol"));
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::param("probs", format!("invalid probability {bad}")));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("probs", format!("probabilities sum to {total}")));
        }
        Ok(normalized(probs, label.into()))
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn true_value(&self, property: &Property) -> Result<f64> {
        true_value(self, property)
    }
}

fn normalized(weights: Vec<f64>, label: String) -> DiscreteDistribution {
    let total = compensated_sum(weights.iter().copied());
    let probs = weights.into_iter().map(|w| w / total).collect();
    DiscreteDistribution { probs, label }
}

fn check_open_unit(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in (0, 1), got {p}")))
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

/// Builds a member of `family` over `k` symbols. Only Dirichlet draws from
/// `rng`.
pub fn make_distribution<R: Rng + ?Sized>(
    family: &Family,
    k: usize,
    rng: &mut R,
) -> Result<DiscreteDistribution> {
    if k == 0 {
        return Err(Error::param("k", "alphabet size must be at least 1"));
    }
    let label = FamilySpec::new(family.clone(), k).label();
    let weights: Vec<f64> = match *family {
        Family::Uniform => vec![1.0; k],
        Family::TwoSteps => {
            let half = k / 2;
            (0..k).map(|i| if i < half { 0.5 } else { 1.5 }).collect()
        }
        Family::Zipf { power } => {
            check_positive("power", power)?;
            (1..=k).map(|i| (i as f64).powf(-power)).collect()
        }
        Family::Binomial { p } => {
            check_open_unit("p", p)?;
            let m = (k - 1) as u64;
            (0..k as u64).map(|i| ln_binomial_pmf(m, i, p).exp()).collect()
        }
        Family::Geometric { p } => {
            check_open_unit("p", p)?;
            let (lp, lq) = (p.ln(), (-p).ln_1p());
            (0..k).map(|i| (lp + i as f64 * lq).exp()).collect()
        }
        Family::Poisson { mean_factor } => {
            check_positive("mean", mean_factor)?;
            let mean = mean_factor * k as f64;
            (0..k as u64).map(|i| ln_poisson_pmf(mean, i).exp()).collect()
        }
        Family::Dirichlet { alpha, .. } => {
            check_positive("alpha", alpha)?;
            let gamma = Gamma::new(alpha, 1.0)
                .map_err(|e| Error::param("alpha", e.to_string()))?;
            loop {
                let w: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
                if w.iter().any(|&x| x > 0.0) {
                    break w;
                }
            }
        }
    };
    Ok(normalized(weights, label))
}

/// An additive property `Σ f_i(p_i)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Property {
    /// Shannon entropy in nats.
    Entropy,
    /// ℓ1-distance to a reference distribution `q` on the same alphabet.
    L1 { q: Vec<f64> },
    SupportSize,
    /// Expected number of distinct symbols in `m` draws.
    Coverage { m: u64 },
}

impl Property {
    pub fn name(&self) -> &'static str {
        match self {
            Property::Entropy => "entropy",
            Property::L1 { .. } => "l1",
            Property::SupportSize => "support_size",
            Property::Coverage { .. } => "coverage",
        }
    }
}

pub fn true_value(dist: &DiscreteDistribution, property: &Property) -> Result<f64> {
    let p = dist.probs();
    Ok(match property {
        Property::Entropy => compensated_sum(p.iter().map(|&x| entropy_kernel(x))),
        Property::L1 { q } => {
            if q.len() != p.len() {
                return Err(Error::param(
                    "q",
                    format!("reference has {} symbols, distribution has {}", q.len(), p.len()),
                ));
            }
            compensated_sum(p.iter().zip(q).map(|(a, b)| (a - b).abs()))
        }
        Property::SupportSize => dist.support_size() as f64,
        Property::Coverage { m } => {
            let m = *m as f64;
            compensated_sum(p.iter().map(|&x| {
                if x >= 1.0 {
                    1.0
                } else {
                    -(m * (-x).ln_1p()).exp_m1()
                }
            }))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Exactly `n` independent categorical draws.
    Fixed,
    /// Independent `N_i ~ Poi(n p_i)`.
    Poissonized,
}

/// Draws a sample of (expected) size `n` and returns its counts.
pub fn sample_counts<R: Rng + ?Sized>(
    dist: &DiscreteDistribution,
    n: u64,
    mode: SampleMode,
    rng: &mut R,
) -> CountVector {
    let p = dist.probs();
    match mode {
        SampleMode::Fixed => {
            let mut counts = vec![0u64; p.len()];
            if n == 0 {
                return CountVector::new(counts);
            }
            let mut cumulative = Vec::with_capacity(p.len());
            let mut acc = 0.0;
            for &x in p {
                acc += x;
                cumulative.push(acc);
            }
            let total = acc;
            // zero-mass symbols never win: the search lands on the first
            // index whose cumulative value exceeds u
            let last_positive = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
            for _ in 0..n {
                let u = rng.random::<f64>() * total;
                let i = cumulative.partition_point(|&c| c <= u).min(last_positive);
                counts[i] += 1;
            }
            CountVector::new(counts)
        }
        SampleMode::Poissonized => {
            let counts = p
                .iter()
                .map(|&x| {
                    let lambda = n as f64 * x;
                    if lambda > 0.0 {
                        Poisson::new(lambda)
                            .map(|d| d.sample(rng) as u64)
                            .unwrap_or(0)
                    } else {
                        0
                    }
                })
                .collect();
            CountVector::new(counts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(s: &str) -> DiscreteDistribution {
        s.parse::<FamilySpec>().unwrap().build().unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn family_examples() {
        assert_close(build("uniform:k=4").probs(), &[0.25; 4], 1e-15);
        assert_close(
            build("two-steps:k=4").probs(),
            &[0.125, 0.125, 0.375, 0.375],
            1e-15,
        );
        assert_close(
            build("zipf:k=3,power=1").probs(),
            &[6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0],
            1e-15,
        );
    }

    #[test]
    fn suite_is_valid_for_several_k() {
        for k in [2, 10, 1000] {
            for spec in FamilySpec::benchmark_suite(k) {
                let d = spec.build().unwrap();
                assert_eq!(d.k(), k);
                assert!(d.probs().iter().all(|&p| p >= 0.0));
                let s: f64 = compensated_sum(d.probs().iter().copied());
                assert!((s - 1.0).abs() <= 1e-12, "{spec}: {s}");
                let h = d.true_value(&Property::Entropy).unwrap();
                assert!(h >= 0.0 && h <= (k as f64).ln() + 1e-12);
            }
        }
    }

    #[test]
    fn binomial_family_matches_pascal_row() {
        let d = build("binomial:k=4,p=0.5");
        assert_close(d.probs(), &[0.125, 0.375, 0.375, 0.125], 1e-15);
    }

    #[test]
    fn parse_round_trip_and_errors() {
        for spec in FamilySpec::benchmark_suite(1000) {
            let again: FamilySpec = spec.to_string().parse().unwrap();
            assert_eq!(again, spec);
        }
        let d: FamilySpec = "dirichlet:k=1000,alpha=0.5,seed=7".parse().unwrap();
        assert_eq!(d.family, Family::Dirichlet { alpha: 0.5, seed: 7 });
        assert!(matches!(
            "cauchy:k=3".parse::<FamilySpec>(),
            Err(Error::UnknownFamily(_))
        ));
        assert!("zipf:k=3,gamma=2".parse::<FamilySpec>().is_err());
        assert!("zipf:k=x".parse::<FamilySpec>().is_err());
        let bad: FamilySpec = "zipf:k=3,power=-1".parse().unwrap();
        assert!(bad.build().is_err());
        let bad: FamilySpec = "geometric:k=3,p=1.5".parse().unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn dirichlet_depends_only_on_seed() {
        let a = build("dirichlet:k=50,alpha=1,seed=3");
        let b = build("dirichlet:k=50,alpha=1,seed=3");
        let c = build("dirichlet:k=50,alpha=1,seed=4");
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn true_value_examples() {
        let u4 = build("uniform:k=4");
        let h = u4.true_value(&Property::Entropy).unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-15);
        let half = DiscreteDistribution::from_probs(vec![0.5, 0.5, 0.0, 0.0], "x").unwrap();
        assert_eq!(half.true_value(&Property::SupportSize).unwrap(), 2.0);
        let u2 = build("uniform:k=2");
        let c = u2.true_value(&Property::Coverage { m: 1 }).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
        let l1 = half
            .true_value(&Property::L1 { q: vec![0.25; 4] })
            .unwrap();
        assert!((l1 - 1.0).abs() < 1e-15);
        assert!(half.true_value(&Property::L1 { q: vec![1.0] }).is_err());
    }

    #[test]
    fn sampling_examples() {
        let mut rng = seeded_rng(11);
        let d = build("zipf:k=10,power=1");
        assert_eq!(sample_counts(&d, 0, SampleMode::Fixed, &mut rng).total(), 0);
        let single = DiscreteDistribution::from_probs(vec![1.0], "point").unwrap();
        assert_eq!(
            sample_counts(&single, 7, SampleMode::Fixed, &mut rng).counts(),
            &[7]
        );
        let with_zero = DiscreteDistribution::from_probs(vec![0.0, 1.0, 0.0], "p").unwrap();
        let c = sample_counts(&with_zero, 1000, SampleMode::Fixed, &mut rng);
        assert_eq!(c.counts(), &[0, 1000, 0]);
        for n in [1u64, 17, 1000, 100_000] {
            assert_eq!(sample_counts(&d, n, SampleMode::Fixed, &mut rng).total(), n);
        }
    }

    #[test]
    fn poissonized_counts_concentrate() {
        let d = build("uniform:k=2");
        for seed in 0..30 {
            let c = sample_counts(&d, 1_000_000, SampleMode::Poissonized, &mut seeded_rng(seed));
            for &x in c.counts() {
                assert!((x as i64 - 500_000).abs() <= 5_000, "seed={seed} x={x}");
            }
        }
    }

    #[test]
    fn poissonized_means_within_four_standard_errors() {
        let d = build("zipf:k=10,power=1");
        let (n, trials) = (50u64, 10_000);
        let mut sums = [0u64; 10];
        let mut rng = seeded_rng(2024);
        for _ in 0..trials {
            let c = sample_counts(&d, n, SampleMode::Poissonized, &mut rng);
            for (s, &x) in sums.iter_mut().zip(c.counts()) {
                *s += x;
            }
        }
        for (i, &s) in sums.iter().enumerate() {
            let lambda = n as f64 * d.probs()[i];
            let mean = s as f64 / trials as f64;
            let se = (lambda / trials as f64).sqrt();
            assert!((mean - lambda).abs() <= 4.0 * se, "i={i} mean={mean} lambda={lambda}");
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(&[1, 2, 3]);
        assert_ne!(a, derive_seed(&[1, 2, 4]));
        assert_ne!(a, derive_seed(&[1, 3, 2]));
        assert_eq!(a, derive_seed(&[1, 2, 3]));
    }
}
