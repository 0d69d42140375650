//! Amplified polynomials for 1-Lipschitz `f` with `f(0) = 0`.
//!
//! Writing `g(j) = na·f(j/na)`, the derivative of `B_na(f, ·)` at `x` is
//! close to `t_na(z) = E[g(J+1) - g(J)]` with `J ~ Poi(z)`, `z = (na-1)x`.
//! A degree-`(d-1)` near-min-max fit of `t_na((na-1)x)` on `I_n`, integrated
//! from 0, plays the role `H̃_na` plays for entropy.

use super::chebyshev::{chebyshev_interpolant, near_minmax_poly};
use super::{AmplificationParams, IntervalPolynomial};
use crate::error::{Error, Result};
use crate::numeric::uniform_grid;
use crate::profile::poisson_expectation;

const LIPSCHITZ_SLACK: f64 = 1e-6;
const TAIL_TOL: f64 = 1e-16;

#[derive(Debug, Clone)]
pub struct LipschitzPolynomial {
    pub params: AmplificationParams,
    /// Degree-`d` polynomial with zero constant term. Its `sup_error`, when
    /// measured, is `sup |poly' - t_na|` on the fitting grid.
    pub antiderivative: IntervalPolynomial,
    pub derivative: IntervalPolynomial,
}

impl LipschitzPolynomial {
    pub fn construct<F: Fn(f64) -> f64>(
        f: F,
        params: AmplificationParams,
        measure: bool,
    ) -> Result<Self> {
        check_lipschitz(&f, params.interval_hi())?;
        let d = params.degree() - 1;
        let l = params.interval_hi();
        let target = |x: f64| smoothed_slope(&f, &params, (params.na() - 1.0) * x);
        let derivative = if measure {
            near_minmax_poly(target, d, 0.0, l, false)?
        } else {
            chebyshev_interpolant(target, d, 0.0, l)?
        };
        let antiderivative = derivative.integral().with_sup_error(derivative.sup_error());
        Ok(LipschitzPolynomial {
            params,
            antiderivative,
            derivative,
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        self.antiderivative.coeffs()
    }
}

/// `t_na(z) = E[na (f((J+1)/na) - f(J/na))]`, `J ~ Poi(z)`.
pub fn smoothed_slope<F: Fn(f64) -> f64>(f: &F, params: &AmplificationParams, z: f64) -> f64 {
    let na = params.na();
    poisson_expectation(z, TAIL_TOL, |j| {
        let j = j as f64;
        na * (f((j + 1.0) / na) - f(j / na))
    })
}

fn check_lipschitz<F: Fn(f64) -> f64>(f: &F, fine_hi: f64) -> Result<()> {
    let f0 = f(0.0);
    if f0.abs() > 1e-12 {
        return Err(Error::NotLipschitz(format!("f(0) = {f0}")));
    }
    // coarse grid on [0, 1] plus a fine one where the polynomial is used
    let mut xs = uniform_grid(0.0, 1.0, 4097);
    xs.extend(uniform_grid(0.0, (2.0 * fine_hi).min(1.0), 4097));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for i in 1..xs.len() {
        let slope = (ys[i] - ys[i - 1]).abs() / (xs[i] - xs[i - 1]);
        if slope.is_nan() || slope > 1.0 + LIPSCHITZ_SLACK {
            return Err(Error::NotLipschitz(format!(
                "slope {slope} on [{}, {}]",
                xs[i - 1],
                xs[i]
            )));
        }
    }
    Ok(())
}

/// Lipschitz polynomial with its fit error measured.
pub fn build_lipschitz_poly<F: Fn(f64) -> f64>(
    f: F,
    params: AmplificationParams,
) -> Result<LipschitzPolynomial> {
    LipschitzPolynomial::construct(f, params, true)
}
