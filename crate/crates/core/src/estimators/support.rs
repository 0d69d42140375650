//! Support size and coverage via smoothed Good–Toulmin extrapolation.
//!
//! The expected number of distinct symbols in a Poissonized sample `a` times
//! larger is estimated by `Σ_j φ_j (1 - (-(a-1))^j Pr(Z >= j))` with
//! `Z ~ Poi(r)`. The tail factor tames the alternating powers.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::profile::{ln_poisson_tail, Fingerprint};

use super::{Estimate, EstimatorConfig};

/// Amplification `ln(scale) / ln²(1/ε)`, floored at 1. Needs `ε <= e^-2`.
pub fn resolve_amplification(cfg: &EstimatorConfig, observed_scale: f64) -> Result<f64> {
    let eps = cfg.epsilon;
    let cap = (-2.0f64).exp();
    if !(eps > 0.0 && eps <= cap * (1.0 + 1e-12)) {
        return Err(Error::param(
            "epsilon",
            format!("support size and coverage need epsilon in (0, e^-2], got {eps}"),
        ));
    }
    if observed_scale.is_nan() || observed_scale < 0.0 {
        return Err(Error::param(
            "scale",
            format!("must be nonnegative, got {observed_scale}"),
        ));
    }
    let l = eps.ln();
    let a = observed_scale.max(1.0).ln() / (l * l);
    Ok(a.max(1.0))
}

/// `Σ_j φ_j (1 - (-(a-1))^j Pr(Poi(r) >= j))`.
///
/// Powers are formed as `sign · exp(j ln(a-1) + ln Pr(Z >= j))`; at `a = 1`
/// every coefficient is exactly 1 and the result is the distinct count.
pub fn extrapolated_distinct(fp: &Fingerprint, a: f64, r: f64) -> Result<Estimate> {
    if !(a >= 1.0 && a.is_finite()) {
        return Err(Error::param("a", format!("amplification must be >= 1, got {a}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("must be nonnegative, got {r}")));
    }
    let mut acc = CompensatedSum::new();
    let ln_base = (a - 1.0).ln();
    for (j, phi) in fp.iter() {
        let coeff = if a == 1.0 || r == 0.0 {
            1.0
        } else {
            let magnitude = (j as f64 * ln_base + ln_poisson_tail(r, j)).exp();
            if j % 2 == 1 {
                1.0 + magnitude
            } else {
                1.0 - magnitude
            }
        };
        acc.add(phi as f64 * coeff);
    }
    let distinct = fp.distinct();
    Ok(Estimate {
        value: acc.value(),
        small: distinct,
        large: 0,
        dropped: 0,
    })
}

/// Competitive support-size estimate. `cfg.a` is used when set; otherwise
/// `a` is resolved from the observed distinct count.
pub fn competitive_support_size(fp: &Fingerprint, cfg: &EstimatorConfig) -> Result<Estimate> {
    let a = match cfg.a {
        Some(a) => a,
        None => resolve_amplification(cfg, fp.distinct() as f64)?,
    };
    extrapolated_distinct(fp, a, cfg.smoothing())
}

/// Effective amplification `a' = a (1 - e^{-m/(na)})` for coverage.
pub fn coverage_amplification(n: u64, a: f64, m: u64) -> f64 {
    -a * (-(m as f64) / (n as f64 * a)).exp_m1()
}

/// Competitive coverage estimate for horizon `cfg.m`.
///
/// `cfg.a` is used when set, otherwise it is resolved from the plug-in
/// coverage of the sample. At `a = 1` the plug-in coverage is returned.
/// Amplifying (`a > 1`) requires `m >= 1.5 n` and `a > 1.8`.
pub fn competitive_coverage(fp: &Fingerprint, n: u64, cfg: &EstimatorConfig) -> Result<Estimate> {
    let m = cfg
        .m
        .ok_or_else(|| Error::param("m", "coverage needs a horizon m"))?;
    if m == 0 || n == 0 {
        return Err(Error::param("m", "coverage needs m >= 1 and n >= 1"));
    }
    let a = match cfg.a {
        Some(a) => a,
        None => resolve_amplification(cfg, plugin_coverage(fp, n, m))?,
    };
    if a.is_nan() || a < 1.0 {
        return Err(Error::param("a", format!("amplification must be >= 1, got {a}")));
    }
    if a == 1.0 {
        let distinct = fp.distinct();
        return Ok(Estimate {
            value: plugin_coverage(fp, n, m),
            small: 0,
            large: distinct,
            dropped: 0,
        });
    }
    if (m as f64) < 1.5 * n as f64 || a <= 1.8 {
        return Err(Error::Regime(format!(
            "amplified coverage needs m >= 1.5 n and a > 1.8 (n = {n}, m = {m}, a = {a})"
        )));
    }
    extrapolated_distinct(fp, coverage_amplification(n, a, m), cfg.smoothing())
}

fn plugin_coverage(fp: &Fingerprint, n: u64, m: u64) -> f64 {
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    for (j, phi) in fp.iter() {
        let miss = (1.0 - j as f64 / nf).max(0.0).powi(m as i32);
        acc.add(phi as f64 * (1.0 - miss));
    }
    acc.value()
}
