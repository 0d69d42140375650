//! Polynomial machinery behind the competitive estimators.
//!
//! * [`bernstein`] evaluates Bernstein polynomials and their derivatives;
//!   these describe exactly the bias of plug-in estimators and serve as
//!   oracles.
//! * [`chebyshev`] produces near-min-max polynomial fits on an interval.
//! * [`entropy`] builds the amplified entropy polynomial `H̃_na` and its
//!   refined variant `H̃*`.
//! * [`fseries`] evaluates the Poisson-smoothed `j ln j` series used by the
//!   refinement.
//! * [`lipschitz`] builds the analogous polynomial for any 1-Lipschitz `f`
//!   with `f(0) = 0`, used for ℓ1-distance.

pub mod bernstein;
pub mod chebyshev;
pub mod entropy;
pub mod fseries;
pub mod lipschitz;

pub use bernstein::{bernstein_derivative_eval, bernstein_eval, forward_difference_fn};
pub use chebyshev::{near_minmax_poly, MAX_DEGREE};
pub use entropy::{build_amplified_entropy_poly, build_refined_entropy_poly, EntropyPolynomial};
pub use fseries::{f_series_eval, FSeries};
pub use lipschitz::{build_lipschitz_poly, LipschitzPolynomial};

use crate::error::{Error, Result};

/// Monomial-basis polynomial with the interval it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPolynomial {
    coeffs: Vec<f64>,
    lo: f64,
    hi: f64,
    sup_error: Option<f64>,
}

impl IntervalPolynomial {
    /// `coeffs` in ascending degree. An empty vector is the zero polynomial.
    pub fn new(coeffs: Vec<f64>, lo: f64, hi: f64, sup_error: Option<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        IntervalPolynomial {
            coeffs,
            lo,
            hi,
            sup_error,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Measured sup-norm distance to the target the polynomial was built
    /// against, when it was measured.
    pub fn sup_error(&self) -> Option<f64> {
        self.sup_error
    }

    pub fn with_sup_error(mut self, sup_error: Option<f64>) -> Self {
        self.sup_error = sup_error;
        self
    }

    /// Evaluates at `x`, refusing points more than `1e-9·(hi-lo)` outside the
    /// interval.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let slack = 1e-9 * (self.hi - self.lo);
        if !(x >= self.lo - slack && x <= self.hi + slack) {
            return Err(Error::OutsideInterval {
                x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(self.value_at(x))
    }

    /// Horner evaluation with no interval check.
    pub fn value_at(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> IntervalPolynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(t, &c)| c * t as f64)
            .collect();
        IntervalPolynomial::new(coeffs, self.lo, self.hi, None)
    }

    /// Antiderivative with zero constant term.
    pub fn integral(&self) -> IntervalPolynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(t, &c)| c / (t + 1) as f64),
        );
        IntervalPolynomial::new(coeffs, self.lo, self.hi, None)
    }
}

/// Parameters shared by the entropy and Lipschitz constructions.
///
/// The amplification factor is `a = ε ln n`, the polynomial degree
/// `d = max(1, ⌊c_s ln n⌋)` and the small-probability interval
/// `I_n = [0, c_l ln n / n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationParams {
    pub n: u64,
    pub epsilon: f64,
    pub c_l: f64,
    pub c_s: f64,
}

pub const DEFAULT_C_L: f64 = 4.0;
pub const DEFAULT_C_S: f64 = 0.3;

impl AmplificationParams {
    /// Validated parameters; requires `n >= 3`, `ε ∈ (0, 1]`, `ε ln n >= 1`
    /// and positive constants.
    pub fn new(n: u64, epsilon: f64, c_l: f64, c_s: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Regime(format!("need n >= 3, got {n}")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1], got {epsilon}")));
        }
        if !(c_l > 0.0 && c_l.is_finite()) {
            return Err(Error::param("c_l", format!("must be positive, got {c_l}")));
        }
        if !(c_s > 0.0 && c_s.is_finite()) {
            return Err(Error::param("c_s", format!("must be positive, got {c_s}")));
        }
        let p = AmplificationParams {
            n,
            epsilon,
            c_l,
            c_s,
        };
        if p.a() < 1.0 {
            return Err(Error::Regime(format!(
                "epsilon * ln n = {} must be at least 1",
                p.a()
            )));
        }
        if p.degree() > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(p.degree()));
        }
        Ok(p)
    }

    pub fn with_defaults(n: u64, epsilon: f64) -> Result<Self> {
        Self::new(n, epsilon, DEFAULT_C_L, DEFAULT_C_S)
    }

    pub fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    pub fn a(&self) -> f64 {
        self.epsilon * self.ln_n()
    }

    /// Amplified sample size `n·a`, kept real-valued.
    pub fn na(&self) -> f64 {
        self.n as f64 * self.a()
    }

    pub fn degree(&self) -> usize {
        ((self.c_s * self.ln_n()).floor() as usize).max(1)
    }

    /// Right end of `I_n`.
    pub fn interval_hi(&self) -> f64 {
        self.c_l * self.ln_n() / self.n as f64
    }

    /// Shift `1/(na - 1)` of the difference quotient.
    pub fn delta(&self) -> f64 {
        1.0 / (self.na() - 1.0)
    }

    /// Count threshold `c_l ln n` of the small branch.
    pub fn count_threshold(&self) -> f64 {
        self.c_l * self.ln_n()
    }

    /// Integer Bernstein degree used as the amplified-sample oracle.
    pub fn bernstein_degree(&self) -> u64 {
        self.na().round() as u64
    }
}

/// Points of `(0, hi]` used to measure approximation errors: a uniform grid
/// plus a geometric grid towards 0, where ratio errors peak.
pub(crate) fn measurement_grid(hi: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (1..=256).map(|i| hi * i as f64 / 256.0).collect();
    let (lo_exp, hi_exp) = (-6.0_f64, (1.0_f64 / 256.0).log10());
    for i in 0..64 {
        let e = lo_exp + (hi_exp - lo_exp) * i as f64 / 64.0;
        xs.push(hi * 10f64.powf(e));
    }
    xs.sort_by(f64::total_cmp);
    xs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_rejects_far_outside_points() {
        let p = IntervalPolynomial::new(vec![1.0, 2.0], 0.0, 1.0, None);
        assert_eq!(p.eval(0.5).unwrap(), 2.0);
        assert!(p.eval(1.0 + 1e-12).is_ok());
        assert!(matches!(p.eval(1.1), Err(Error::OutsideInterval { .. })));
        assert!(p.eval(f64::NAN).is_err());
    }

    #[test]
    fn calculus_round_trip() {
        let p = IntervalPolynomial::new(vec![1.0, -3.0, 0.5], 0.0, 2.0, None);
        let back = p.integral().derivative();
        assert_eq!(back.coeffs(), p.coeffs());
        assert_eq!(p.integral().value_at(0.0), 0.0);
        assert_eq!(p.integral().degree(), 3);
    }

    #[test]
    fn params_derived_quantities() {
        let p = AmplificationParams::with_defaults(10_000, 1.0).unwrap();
        let ln = 10_000f64.ln();
        assert_eq!(p.degree(), 2);
        assert!((p.a() - ln).abs() < 1e-15);
        assert!((p.interval_hi() - 4.0 * ln / 1e4).abs() < 1e-18);
        assert!(AmplificationParams::with_defaults(2, 1.0).is_err());
        assert!(AmplificationParams::with_defaults(100, 0.1).is_err());
        assert!(AmplificationParams::with_defaults(100, 1.5).is_err());
        assert!(matches!(
            AmplificationParams::new(10_000, 1.0, 4.0, 5.0),
            Err(Error::DegreeTooLarge(46))
        ));
    }
}
