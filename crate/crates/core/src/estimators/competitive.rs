//! Competitive entropy and ℓ1 estimators.
//!
//! Per symbol, with main count `N` and probe count `N'`:
//!
//! * `N' > 1/ε`: plug-in value of `N/n`;
//! * `N' <= 1/ε` and `N <= c_l ln n`: the unbiased estimate
//!   `Σ_t c_t N^(t)/n^t` of the amplified polynomial `Σ_t c_t p^t`, where
//!   `N^(t)` is the falling factorial and `E[N^(t)] = (np)^t` under
//!   Poissonized sampling;
//! * otherwise: contributes 0 (counted as dropped).

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, entropy_kernel, CompensatedSum};
use crate::profile::{falling_factorial, CountVector};

use super::cache::{cached_entropy_polynomial, cached_lipschitz_polynomial};
use super::{Estimate, EstimatorConfig};

/// `Σ_t coeffs[t] · N^(t) / n^t`.
pub fn small_branch_value(coeffs: &[f64], count: u64, n: u64) -> Result<f64> {
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    let mut scale = 1.0;
    for (t, &c) in coeffs.iter().enumerate() {
        if t > 0 {
            scale /= nf;
        }
        if c != 0.0 {
            let ff = falling_factorial(count, t as u32)?;
            if ff == 0 {
                break;
            }
            acc.add(c * ff as f64 * scale);
        }
    }
    Ok(acc.value())
}

enum Route {
    Small,
    Large,
    Dropped,
}

fn route(count: u64, probe: u64, count_threshold: f64, probe_threshold: f64) -> Route {
    if probe as f64 > probe_threshold {
        Route::Large
    } else if count as f64 <= count_threshold {
        Route::Small
    } else {
        Route::Dropped
    }
}

fn check_pair(main: &CountVector, probe: &CountVector) -> Result<()> {
    if main.len() != probe.len() {
        return Err(Error::param(
            "counts",
            format!(
                "main sample has {} symbols, probe sample has {}",
                main.len(),
                probe.len()
            ),
        ));
    }
    Ok(())
}

/// Competitive entropy estimate (nats) from two independent Poissonized
/// samples of mean size `n`.
pub fn competitive_entropy(
    main: &CountVector,
    probe: &CountVector,
    n: u64,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    check_pair(main, probe)?;
    let params = cfg.amplification_params(n)?;
    let poly = cached_entropy_polynomial(params, cfg.refined)?;
    let count_threshold = params.count_threshold();
    let probe_threshold = 1.0 / cfg.epsilon;

    // the small branch depends on N alone, and N <= c_l ln n there
    let table: Vec<f64> = (0..=count_threshold.floor() as u64)
        .map(|c| small_branch_value(poly.coeffs(), c, n))
        .collect::<Result<_>>()?;

    let nf = n as f64;
    let mut est = Estimate::default();
    let mut acc = CompensatedSum::new();
    for (&c, &c2) in main.counts().iter().zip(probe.counts()) {
        match route(c, c2, count_threshold, probe_threshold) {
            Route::Large => {
                est.large += 1;
                acc.add(entropy_kernel(c as f64 / nf));
            }
            Route::Small => {
                est.small += 1;
                acc.add(table[c as usize]);
            }
            Route::Dropped => est.dropped += 1,
        }
    }
    est.value = acc.value();
    Ok(est)
}

/// Competitive estimate of `Σ |p_i - q_i|`.
///
/// Each symbol estimates `ℓ_{q_i}(p_i) = |p_i - q_i| - q_i`, which is
/// 1-Lipschitz and vanishes at 0; `Σ q_i` is added back at the end.
pub fn competitive_l1(
    main: &CountVector,
    probe: &CountVector,
    n: u64,
    q: &[f64],
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    check_pair(main, probe)?;
    if q.len() != main.len() {
        return Err(Error::param(
            "q",
            format!("reference has {} symbols, counts have {}", q.len(), main.len()),
        ));
    }
    let params = cfg.amplification_params(n)?;
    let count_threshold = params.count_threshold();
    let probe_threshold = 1.0 / cfg.epsilon;

    let nf = n as f64;
    let mut est = Estimate::default();
    let mut acc = CompensatedSum::new();
    for ((&c, &c2), &qi) in main.counts().iter().zip(probe.counts()).zip(q) {
        match route(c, c2, count_threshold, probe_threshold) {
            Route::Large => {
                est.large += 1;
                acc.add((c as f64 / nf - qi).abs() - qi);
            }
            Route::Small => {
                est.small += 1;
                if c > 0 {
                    let poly = cached_lipschitz_polynomial(params, qi)?;
                    acc.add(small_branch_value(poly.coeffs(), c, n)?);
                }
            }
            Route::Dropped => est.dropped += 1,
        }
    }
    acc.add(compensated_sum(q.iter().copied()));
    est.value = acc.value();
    Ok(est)
}
