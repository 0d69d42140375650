//! The amplified entropy polynomial and its refinement.
//!
//! Let `h̃(u) = Σ_j b_j u^j` be a near-min-max fit of `h(u) = -u ln u` on
//! `[0, 1]`. Rescaling to `I_n = [0, L]` gives
//! `h̃₁(x) = L h̃(x/L) + x ln(1/L)`, and the difference quotient
//! `h̃_na(x) = ln(na/(na-1)) + (na-1)(h̃₁(x+δ) - h̃₁(x))`, `δ = 1/(na-1)`,
//! tracks the derivative of `B_na(h, ·)`. Integrating from 0 gives
//! `H̃_na(x) = Σ_{t>=1} b'_t x^t` with
//!
//! ```text
//! b'_t = Σ_{j=t}^{d} b_j/(j+1) · L^{1-j} · δ^{j-t} · C(j+1, j-t+1)      (t >= 2)
//! b'_1 = (same sum at t = 1) + ln(na/(na-1)) + ln(1/L)
//! ```
//!
//! so that `H̃_na' = h̃_na` exactly, including at the origin.
//!
//! The refined variant subtracts a degree-`(d-1)` fit `g̃` of
//! `ψ(x) = (h(z+1) - f2(z)) - (h(z) - f1(z))`, `z = (na-1)x`, from `h̃_na`
//! before integrating.

use super::bernstein::bernstein_eval;
use super::chebyshev::{chebyshev_interpolant, near_minmax_poly};
use super::fseries::{f_series_eval, FSeries};
use super::{measurement_grid, AmplificationParams, IntervalPolynomial};
use crate::error::Result;
use crate::numeric::{binomial_f64, entropy_kernel};

/// `H̃` together with its derivative and measured errors against the
/// amplified Bernstein polynomial `B_m(h, ·)`, `m = round(na)`.
#[derive(Debug, Clone)]
pub struct EntropyPolynomial {
    pub params: AmplificationParams,
    pub refined: bool,
    /// `H̃_na` or `H̃*` on `I_n`, zero constant term. Its `sup_error` is the
    /// ratio error for the base variant and the absolute error for the
    /// refined one.
    pub antiderivative: IntervalPolynomial,
    /// `h̃_na` or `h̃*`.
    pub derivative: IntervalPolynomial,
    /// `max |H̃(x) - B_m(h, x)| / x` over the measurement grid.
    pub max_ratio_error: Option<f64>,
    /// `max |H̃(x) - B_m(h, x)|` over the measurement grid.
    pub max_abs_error: Option<f64>,
}

impl EntropyPolynomial {
    /// Builds the base (`refined = false`) or refined polynomial. Errors
    /// against the Bernstein oracle are measured only when `measure` is set.
    pub fn construct(params: AmplificationParams, refined: bool, measure: bool) -> Result<Self> {
        let base = amplified_coefficients(&params)?;
        let l = params.interval_hi();
        let mut antiderivative = IntervalPolynomial::new(base, 0.0, l, None);
        if refined {
            let correction = refinement_fit(&params, measure)?;
            let mut deriv = antiderivative.derivative().coeffs().to_vec();
            for (t, c) in correction.coeffs().iter().enumerate() {
                deriv[t] -= c;
            }
            antiderivative = IntervalPolynomial::new(deriv, 0.0, l, None).integral();
        }
        let derivative = antiderivative.derivative();

        let (max_ratio_error, max_abs_error) = if measure {
            let (r, a) = bernstein_errors(&params, &antiderivative);
            (Some(r), Some(a))
        } else {
            (None, None)
        };
        let recorded = if refined { max_abs_error } else { max_ratio_error };
        Ok(EntropyPolynomial {
            params,
            refined,
            antiderivative: antiderivative.with_sup_error(recorded),
            derivative,
            max_ratio_error,
            max_abs_error,
        })
    }

    /// Coefficients `b'_t`, ascending, with `b'_0 = 0`.
    pub fn coeffs(&self) -> &[f64] {
        self.antiderivative.coeffs()
    }

    pub fn degree(&self) -> usize {
        self.antiderivative.degree()
    }
}

/// Near-min-max fit of `h` on `[0, 1]` at the construction degree.
pub fn kernel_fit(degree: usize) -> Result<IntervalPolynomial> {
    near_minmax_poly(entropy_kernel, degree, 0.0, 1.0, false)
}

fn amplified_coefficients(params: &AmplificationParams) -> Result<Vec<f64>> {
    let d = params.degree();
    let b = kernel_fit(d)?;
    let b = b.coeffs();
    let l = params.interval_hi();
    let na = params.na();
    let delta = params.delta();

    let mut out = vec![0.0; d + 1];
    for (t, slot) in out.iter_mut().enumerate().skip(1) {
        let mut g = 0.0;
        for (j, &bj) in b.iter().enumerate().skip(t) {
            g += bj / (j + 1) as f64
                * l.powi(1 - j as i32)
                * delta.powi((j - t) as i32)
                * binomial_f64((j + 1) as u64, (j - t + 1) as u64);
        }
        *slot = g;
    }
    out[1] += (na / (na - 1.0)).ln() + (1.0 / l).ln();
    Ok(out)
}

/// `ψ(x) = (h(z+1) - f2(z)) - (h(z) - f1(z))` with `z = (na-1)x`.
pub fn refinement_target(params: &AmplificationParams, x: f64) -> f64 {
    let z = (params.na() - 1.0) * x;
    let upper = entropy_kernel(z + 1.0) - f_series_eval(FSeries::F2, z);
    let lower = entropy_kernel(z) - f_series_eval(FSeries::F1, z);
    upper - lower
}

fn refinement_fit(params: &AmplificationParams, measure: bool) -> Result<IntervalPolynomial> {
    let d = params.degree() - 1;
    let l = params.interval_hi();
    let psi = |x: f64| refinement_target(params, x);
    if measure {
        near_minmax_poly(psi, d, 0.0, l, false)
    } else {
        chebyshev_interpolant(psi, d, 0.0, l)
    }
}

fn bernstein_errors(params: &AmplificationParams, poly: &IntervalPolynomial) -> (f64, f64) {
    let m = params.bernstein_degree();
    let mut ratio = 0.0_f64;
    let mut abs = 0.0_f64;
    for x in measurement_grid(params.interval_hi()) {
        let diff = (poly.value_at(x) - bernstein_eval(entropy_kernel, m, x)).abs();
        abs = abs.max(diff);
        ratio = ratio.max(diff / x);
    }
    (ratio, abs)
}

/// Base polynomial `H̃_na` with measured errors.
pub fn build_amplified_entropy_poly(params: AmplificationParams) -> Result<EntropyPolynomial> {
    EntropyPolynomial::construct(params, false, true)
}

/// Refined polynomial `H̃*` with measured errors.
pub fn build_refined_entropy_poly(params: AmplificationParams) -> Result<EntropyPolynomial> {
    EntropyPolynomial::construct(params, true, true)
}
