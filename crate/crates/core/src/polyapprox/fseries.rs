//! Poisson-smoothed `j ln j` series.
//!
//! With `J ~ Poi(z)`:
//!
//! * `f1(z) = -E[J ln J]`
//! * `f2(z) = -E[(J+1) ln(J+1)]`
//!
//! Both are series over the Poisson weights, truncated once the neglected
//! weighted mass drops below `1e-16`.

use crate::profile::poisson_expectation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FSeries {
    F1,
    F2,
}

const TAIL_TOL: f64 = 1e-16;

fn j_ln_j(j: f64) -> f64 {
    if j <= 1.0 {
        0.0
    } else {
        j * j.ln()
    }
}

pub fn f_series_eval(which: FSeries, z: f64) -> f64 {
    assert!(z >= 0.0, "f-series argument must be nonnegative, got {z}");
    match which {
        FSeries::F1 => -poisson_expectation(z, TAIL_TOL, |j| j_ln_j(j as f64)),
        FSeries::F2 => -poisson_expectation(z, TAIL_TOL, |j| j_ln_j((j + 1) as f64)),
    }
}
