//! Sample summaries: count vectors, fingerprints, falling factorials and
//! Poisson probabilities.
//!
//! Poisson probabilities use Loader's saddle-point form
//! `ln p(j; λ) = -stirlerr(j) - bd0(j, λ) - ½ ln(2πj)`, which stays accurate
//! to a few ulps for λ in the hundreds, where the naive
//! `-λ + j ln λ - ln j!` loses most of its digits to cancellation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Per-symbol sample counts `N_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        CountVector { counts, total }
    }

    pub fn zeros(k: usize) -> Self {
        CountVector {
            counts: vec![0; k],
            total: 0,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Alphabet size.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of symbols observed at least once.
    pub fn distinct(&self) -> u64 {
        self.counts.iter().filter(|&&c| c > 0).count() as u64
    }

    pub fn fingerprint(&self) -> Fingerprint {
        fingerprint(self)
    }
}

/// Profile `φ_j`: the number of symbols seen exactly `j >= 1` times.
///
/// Stored sparsely; a sample of size `N` has at most `√(2N)` distinct
/// multiplicities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    phi: BTreeMap<u64, u64>,
}

impl Fingerprint {
    /// Builds a fingerprint from `(multiplicity, count)` pairs. Pairs with a
    /// zero count are dropped; multiplicity zero is rejected.
    pub fn from_pairs<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Result<Self> {
        let mut phi = BTreeMap::new();
        for (j, c) in pairs {
            if j == 0 {
                return Err(Error::param("phi", "multiplicity 0 is not part of a fingerprint"));
            }
            if c > 0 {
                *phi.entry(j).or_insert(0) += c;
            }
        }
        Ok(Fingerprint { phi })
    }

    pub fn get(&self, j: u64) -> u64 {
        self.phi.get(&j).copied().unwrap_or(0)
    }

    /// `(j, φ_j)` in increasing `j`, nonzero entries only.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.phi.iter().map(|(&j, &c)| (j, c))
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// `Σ_j φ_j`, the number of distinct symbols.
    pub fn distinct(&self) -> u64 {
        self.phi.values().sum()
    }

    /// `Σ_j j·φ_j`, the sample size.
    pub fn total(&self) -> u64 {
        self.phi.iter().map(|(&j, &c)| j * c).sum()
    }

    /// Fingerprint of the union of two disjoint-alphabet samples.
    pub fn merged(&self, other: &Fingerprint) -> Fingerprint {
        let mut phi = self.phi.clone();
        for (&j, &c) in &other.phi {
            *phi.entry(j).or_insert(0) += c;
        }
        Fingerprint { phi }
    }
}

pub fn fingerprint(counts: &CountVector) -> Fingerprint {
    let mut phi = BTreeMap::new();
    for &c in counts.counts() {
        if c > 0 {
            *phi.entry(c).or_insert(0) += 1;
        }
    }
    Fingerprint { phi }
}

/// Order-`t` falling factorial `N (N-1) ... (N-t+1)`.
///
/// Returns 1 for `t = 0` and 0 for `t > N`; overflow of `u128` is an error.
pub fn falling_factorial(n: u64, t: u32) -> Result<u128> {
    if t as u64 > n {
        return Ok(0);
    }
    let mut acc: u128 = 1;
    for m in 0..t as u64 {
        acc = acc
            .checked_mul((n - m) as u128)
            .ok_or(Error::Overflow { n, t })?;
    }
    Ok(acc)
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// stirlerr(n) = ln n! - ln(√(2πn) (n/e)^n) for n = 0..=15.
const STIRLERR_SMALL: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_26,
    0.041_340_695_955_409_3,
    0.027_677_925_684_998_34,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_193,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_77,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_87,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_53,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_847_5,
    0.005_554_733_551_962_801,
];

fn stirlerr(n: u64) -> f64 {
    if n <= 15 {
        return STIRLERR_SMALL[n as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let x = n as f64;
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance term `x ln(x/μ) + μ - x`, evaluated without cancellation near
/// `x = μ`.
fn bd0(x: f64, mu: f64) -> f64 {
    if (x - mu).abs() < 0.1 * (x + mu) {
        let mut v = (x - mu) / (x + mu);
        let mut s = (x - mu) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / mu).ln() + mu - x
    }
}

/// `ln Pr(Z = j)` for `Z ~ Poi(lambda)`.
pub fn ln_poisson_pmf(lambda: f64, j: u64) -> f64 {
    if lambda == 0.0 {
        return if j == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if j == 0 {
        return -lambda;
    }
    let x = j as f64;
    -stirlerr(j) - bd0(x, lambda) - 0.5 * x.ln() - LN_SQRT_2PI
}

pub fn poisson_pmf(lambda: f64, j: u64) -> f64 {
    ln_poisson_pmf(lambda, j).exp()
}

/// `ln Pr(X = x)` for `X ~ Bin(m, p)`, in the same saddle-point form.
pub fn ln_binomial_pmf(m: u64, x: u64, p: f64) -> f64 {
    if x > m {
        return f64::NEG_INFINITY;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == m { 0.0 } else { f64::NEG_INFINITY };
    }
    let mf = m as f64;
    if x == 0 {
        return mf * (-p).ln_1p();
    }
    if x == m {
        return mf * p.ln();
    }
    let xf = x as f64;
    let lc = stirlerr(m) - stirlerr(x) - stirlerr(m - x) - bd0(xf, mf * p) - bd0(mf - xf, mf * q);
    let lf = 2.0 * LN_SQRT_2PI + xf.ln() + (-xf / mf).ln_1p();
    lc - 0.5 * lf
}

/// Visits `(j, Pr(Z = j))` for `Z ~ Poi(lambda)` over the window of indices
/// carrying non-negligible mass.
///
/// Walks outward from the mode with the ratio recursion. A side stops once
/// the geometric bound on its remaining mass, scaled by `1 + |weight(j)|`,
/// falls below `tol`; `weight` lets callers truncate weighted sums
/// (`Σ pmf(j) g(j)`) rather than bare mass.
pub fn for_each_poisson_term<W, F>(lambda: f64, tol: f64, weight: W, mut visit: F)
where
    W: Fn(u64) -> f64,
    F: FnMut(u64, f64),
{
    if lambda <= 0.0 {
        visit(0, 1.0);
        return;
    }
    let mode = lambda.floor() as u64;
    let p_mode = poisson_pmf(lambda, mode);
    visit(mode, p_mode);

    // upward
    let mut p = p_mode;
    let mut j = mode;
    loop {
        p *= lambda / (j + 1) as f64;
        j += 1;
        if p == 0.0 {
            break;
        }
        visit(j, p);
        let ratio = lambda / (j + 1) as f64;
        if ratio < 1.0 {
            let bound = p * ratio / (1.0 - ratio);
            if bound * (1.0 + weight(j).abs()) < tol {
                break;
            }
        }
    }

    // downward
    let mut p = p_mode;
    let mut j = mode;
    while j > 0 {
        p *= j as f64 / lambda;
        j -= 1;
        if p == 0.0 {
            break;
        }
        visit(j, p);
        if j == 0 {
            break;
        }
        let ratio = j as f64 / lambda;
        if ratio < 1.0 {
            let bound = p * ratio / (1.0 - ratio);
            if bound * (1.0 + weight(j).abs()) < tol {
                break;
            }
        }
    }
}

/// `E[g(Z)]` for `Z ~ Poi(lambda)`, truncated so the neglected weighted mass
/// is below `tol`.
pub fn poisson_expectation<G: Fn(u64) -> f64>(lambda: f64, tol: f64, g: G) -> f64 {
    let mut acc = CompensatedSum::new();
    for_each_poisson_term(lambda, tol, &g, |j, p| acc.add(p * g(j)));
    acc.value()
}

// Σ_{i>=j} Pr(Z = i) / Pr(Z = j), for j > lambda.
fn upper_tail_ratio_sum(lambda: f64, j: u64) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    let mut i = j;
    acc.add(term);
    loop {
        term *= lambda / (i + 1) as f64;
        i += 1;
        acc.add(term);
        if term < 1e-18 * acc.value() {
            break;
        }
    }
    acc.value()
}

// Σ_{i<=j} Pr(Z = i), summed downward from j, intended for j < lambda.
fn lower_sum(lambda: f64, j: u64) -> f64 {
    let mut p = poisson_pmf(lambda, j);
    let mut acc = CompensatedSum::new();
    acc.add(p);
    let mut i = j;
    while i > 0 {
        p *= i as f64 / lambda;
        i -= 1;
        acc.add(p);
        if p < 1e-18 * acc.value() {
            break;
        }
    }
    acc.value()
}

/// Upper tail `Pr(Z >= j)` of `Z ~ Poi(r)`.
///
/// Whichever side of the distribution is smaller is summed directly; the
/// other side is obtained as its complement.
pub fn poisson_tail(r: f64, j: u64) -> f64 {
    assert!(r >= 0.0, "Poisson mean must be nonnegative, got {r}");
    if j == 0 {
        return 1.0;
    }
    if r == 0.0 {
        return 0.0;
    }
    if j as f64 > r {
        (poisson_pmf(r, j) * upper_tail_ratio_sum(r, j)).min(1.0)
    } else {
        (1.0 - lower_sum(r, j - 1)).max(0.0)
    }
}

/// `ln Pr(Z >= j)`; finite far into the tail where [`poisson_tail`]
/// underflows.
pub fn ln_poisson_tail(r: f64, j: u64) -> f64 {
    if j == 0 {
        return 0.0;
    }
    if r == 0.0 {
        return f64::NEG_INFINITY;
    }
    if j as f64 > r {
        ln_poisson_pmf(r, j) + upper_tail_ratio_sum(r, j).ln()
    } else {
        poisson_tail(r, j).ln()
    }
}

/// Lower tail `Pr(Z <= j)`.
pub fn poisson_cdf(r: f64, j: u64) -> f64 {
    assert!(r >= 0.0, "Poisson mean must be nonnegative, got {r}");
    if r == 0.0 {
        return 1.0;
    }
    if (j as f64) < r {
        lower_sum(r, j).min(1.0)
    } else {
        (1.0 - poisson_tail(r, j + 1)).max(0.0)
    }
}

/// Exact Poisson tail probability next to the corresponding exponential
/// bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundComparison {
    pub exact: f64,
    pub bound: f64,
}

impl BoundComparison {
    pub fn holds(&self) -> bool {
        self.exact <= self.bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundCheck {
    pub mu: f64,
    pub delta: f64,
    /// `Pr(X >= (1+δ)μ)` against `e^{-(δ²∧δ)μ/3}`.
    pub upper: BoundComparison,
    /// `Pr(X <= (1-δ)μ)` against `e^{-δ²μ/2}`; only defined for `δ ∈ (0, 1)`.
    pub lower: Option<BoundComparison>,
}

// Integer threshold for a real cut point, snapping values that are an
// integer up to rounding noise.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

fn check_mu_delta(mu: f64, delta: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be positive, got {mu}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    Ok(())
}

pub fn upper_tail_check(mu: f64, delta: f64) -> Result<BoundComparison> {
    check_mu_delta(mu, delta)?;
    let threshold = snap((1.0 + delta) * mu).ceil() as u64;
    Ok(BoundComparison {
        exact: poisson_tail(mu, threshold),
        bound: (-(delta * delta).min(delta) * mu / 3.0).exp(),
    })
}

pub fn lower_tail_check(mu: f64, delta: f64) -> Result<BoundComparison> {
    check_mu_delta(mu, delta)?;
    if delta >= 1.0 {
        return Err(Error::param(
            "delta",
            format!("lower-tail bound needs delta in (0, 1), got {delta}"),
        ));
    }
    let threshold = snap((1.0 - delta) * mu).floor() as u64;
    Ok(BoundComparison {
        exact: poisson_cdf(mu, threshold),
        bound: (-delta * delta * mu / 2.0).exp(),
    })
}

/// Both tail comparisons for `X ~ Poi(mu)`; the lower one is omitted when
/// `delta >= 1`.
pub fn check_tail_bounds(mu: f64, delta: f64) -> Result<TailBoundCheck> {
    let upper = upper_tail_check(mu, delta)?;
    let lower = if delta < 1.0 {
        Some(lower_tail_check(mu, delta)?)
    } else {
        None
    };
    Ok(TailBoundCheck {
        mu,
        delta,
        upper,
        lower,
    })
}
