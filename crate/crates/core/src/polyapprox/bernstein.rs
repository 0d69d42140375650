//! Bernstein polynomials `B_m(f, x) = Σ_j f(j/m) C(m,j) x^j (1-x)^{m-j}`.
//!
//! `B_m(f, x)` is the expectation of the plug-in `f(N/m)` under
//! `N ~ Bin(m, x)`, so these evaluators are the bias oracles for the
//! estimators. Binomial weights are computed in log space at the mode and
//! extended by ratio recursion until they become negligible, so `m` in the
//! hundreds of thousands costs only `O(√(m x))` work.

use crate::numeric::{entropy_kernel, CompensatedSum};
use crate::profile::ln_binomial_pmf;

// Weights below this fraction of the modal weight are dropped.
const RELATIVE_CUTOFF: f64 = 1e-22;

/// Calls `visit(j, C(m,j) x^j (1-x)^{m-j})` over every index with
/// non-negligible weight.
pub(crate) fn for_each_binomial_weight<F: FnMut(u64, f64)>(m: u64, x: f64, mut visit: F) {
    if x <= 0.0 {
        visit(0, 1.0);
        return;
    }
    if x >= 1.0 {
        visit(m, 1.0);
        return;
    }
    let mode = (((m + 1) as f64 * x).floor() as u64).min(m);
    let w_mode = ln_binomial_pmf(m, mode, x).exp();
    let cutoff = w_mode * RELATIVE_CUTOFF;
    let odds = x / (1.0 - x);
    visit(mode, w_mode);

    let mut w = w_mode;
    let mut j = mode;
    while j < m {
        w *= (m - j) as f64 / (j + 1) as f64 * odds;
        j += 1;
        if w < cutoff {
            break;
        }
        visit(j, w);
    }

    let mut w = w_mode;
    let mut j = mode;
    while j > 0 {
        w *= j as f64 / (m - j + 1) as f64 / odds;
        j -= 1;
        if w < cutoff {
            break;
        }
        visit(j, w);
    }
}

/// `B_m(f, x)` for `m >= 1`, `x ∈ [0, 1]`.
pub fn bernstein_eval<F: Fn(f64) -> f64>(f: F, m: u64, x: f64) -> f64 {
    assert!(m >= 1, "Bernstein degree must be positive");
    let mf = m as f64;
    let mut acc = CompensatedSum::new();
    for_each_binomial_weight(m, x, |j, w| acc.add(w * f(j as f64 / mf)));
    acc.value()
}

/// `h_m(x) = m (h(((m-1)/m) x + 1/m) - h(((m-1)/m) x))`, the function whose
/// degree-`(m-1)` Bernstein polynomial is `B_m'(h, ·)`.
pub fn forward_difference_fn(m: u64) -> impl Fn(f64) -> f64 {
    let mf = m as f64;
    let scale = (mf - 1.0) / mf;
    move |x: f64| {
        let y = scale * x;
        mf * (entropy_kernel(y + 1.0 / mf) - entropy_kernel(y))
    }
}

/// `B_m'(h, x)` through the identity `B_m' = B_{m-1}(h_m, ·)`; `m >= 2`.
pub fn bernstein_derivative_eval(m: u64, x: f64) -> f64 {
    assert!(m >= 2, "derivative identity needs m >= 2");
    bernstein_eval(forward_difference_fn(m), m - 1, x)
}
