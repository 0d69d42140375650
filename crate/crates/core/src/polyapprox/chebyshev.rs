//! Near-min-max polynomial fits.
//!
//! The default fit interpolates at first-kind Chebyshev nodes, which is
//! within a factor `1 + (2/π) ln(d+1)` of the best uniform approximation.
//! An optional Remez exchange pushes the fit towards true equioscillation.
//!
//! Results are returned in the monomial basis. The change of basis goes
//! through the shifted Chebyshev polynomials `T_j(2u - 1)`, whose integer
//! coefficients are exact in `i128` up to degree 40, with double-double
//! accumulation so that only the final rounding is lost.

use nalgebra::{DMatrix, DVector};

use super::IntervalPolynomial;
use crate::error::{Error, Result};
use crate::numeric::{uniform_grid, DoubleDouble};

/// Largest degree accepted by the monomial conversion.
pub const MAX_DEGREE: usize = 40;

const SUP_GRID: usize = 4097;
const REMEZ_MAX_ITER: usize = 20;
const REMEZ_TOL: f64 = 1e-10;

fn check_args(d: usize, lo: f64, hi: f64) -> Result<()> {
    if d > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(d));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::param("interval", format!("need lo < hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

/// Integer coefficients of `T_j(2u - 1)` in powers of `u`, for `j = 0..=d`.
fn shifted_chebyshev_table(d: usize) -> Vec<Vec<i128>> {
    let mut table: Vec<Vec<i128>> = vec![vec![1]];
    if d >= 1 {
        table.push(vec![-1, 2]);
    }
    for j in 2..=d {
        // T*_j = (4u - 2) T*_{j-1} - T*_{j-2}
        let prev = &table[j - 1];
        let prev2 = &table[j - 2];
        let mut next = vec![0i128; j + 1];
        for (i, &c) in prev.iter().enumerate() {
            next[i + 1] += 4 * c;
            next[i] -= 2 * c;
        }
        for (i, &c) in prev2.iter().enumerate() {
            next[i] -= c;
        }
        table.push(next);
    }
    table
}

/// Converts Chebyshev coefficients on `[lo, hi]` (series in `T_j(s)`,
/// `s = 2(x-lo)/(hi-lo) - 1`) to monomial coefficients in `x`.
pub(crate) fn chebyshev_to_monomial(cheb: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let d = cheb.len().saturating_sub(1);
    let table = shifted_chebyshev_table(d);
    // coefficients in u = (x - lo)/(hi - lo)
    let mut in_u = vec![DoubleDouble::ZERO; d + 1];
    for (j, &c) in cheb.iter().enumerate() {
        let c = DoubleDouble::from_f64(c);
        for (i, &t) in table[j].iter().enumerate() {
            in_u[i] = in_u[i] + c * DoubleDouble::from_i128(t);
        }
    }
    let inv_w = DoubleDouble::from_f64(1.0 / (hi - lo));
    let mut scaled = Vec::with_capacity(d + 1);
    let mut pow = DoubleDouble::from_f64(1.0);
    for c in &in_u {
        scaled.push(*c * pow);
        pow = pow * inv_w;
    }
    if lo == 0.0 {
        return scaled.iter().map(|c| c.to_f64()).collect();
    }
    // expand (x - lo)^i
    let mut out = vec![DoubleDouble::ZERO; d + 1];
    let neg_lo = DoubleDouble::from_f64(-lo);
    for (i, c) in scaled.iter().enumerate() {
        let mut binom = 1.0_f64;
        let mut lo_pow = vec![DoubleDouble::from_f64(1.0); i + 1];
        for e in 1..=i {
            lo_pow[e] = lo_pow[e - 1] * neg_lo;
        }
        for l in 0..=i {
            let term = c.mul_f64(binom) * lo_pow[i - l];
            out[l] = out[l] + term;
            binom = binom * (i - l) as f64 / (l + 1) as f64;
        }
    }
    out.iter().map(|c| c.to_f64()).collect()
}

fn to_unit(x: f64, lo: f64, hi: f64) -> f64 {
    (2.0 * x - lo - hi) / (hi - lo)
}

fn from_unit(s: f64, lo: f64, hi: f64) -> f64 {
    0.5 * (lo + hi) + 0.5 * (hi - lo) * s
}

fn clenshaw(cheb: &[f64], s: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in cheb.iter().skip(1).rev() {
        let b0 = 2.0 * s * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    s * b1 - b2 + cheb[0]
}

fn chebyshev_series<F: Fn(f64) -> f64>(f: &F, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    let nodes = d + 1;
    let values: Vec<(f64, f64)> = (0..nodes)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * nodes) as f64;
            (theta, f(from_unit(theta.cos(), lo, hi)))
        })
        .collect();
    (0..nodes)
        .map(|j| {
            let s: f64 = values
                .iter()
                .map(|&(theta, v)| v * (j as f64 * theta).cos())
                .sum();
            let c = 2.0 * s / nodes as f64;
            if j == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

// Chebyshev-basis coefficients refined by Remez exchange on the measurement
// grid. Returns None if a linear solve degenerates.
fn remez_series<F: Fn(f64) -> f64>(
    f: &F,
    d: usize,
    lo: f64,
    hi: f64,
    start: &[f64],
) -> Option<Vec<f64>> {
    let grid = uniform_grid(lo, hi, SUP_GRID);
    let fvals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let svals: Vec<f64> = grid.iter().map(|&x| to_unit(x, lo, hi)).collect();
    let size = d + 2;

    // reference: extrema of T_{d+1}, snapped to the grid
    let snap = |s: f64| -> usize {
        let x = from_unit(s, lo, hi);
        (((x - lo) / (hi - lo) * (SUP_GRID - 1) as f64).round() as usize).min(SUP_GRID - 1)
    };
    let mut reference: Vec<usize> = (0..size)
        .map(|k| snap(-(std::f64::consts::PI * k as f64 / (d + 1) as f64).cos()))
        .collect();
    reference.dedup();
    if reference.len() != size {
        return None;
    }

    let mut best = start.to_vec();
    let mut best_err = sup_on_grid(&best, &svals, &fvals);
    for _ in 0..REMEZ_MAX_ITER {
        let mut mat = DMatrix::<f64>::zeros(size, size);
        let mut rhs = DVector::<f64>::zeros(size);
        for (row, &g) in reference.iter().enumerate() {
            let s = svals[g];
            let (mut t0, mut t1) = (1.0, s);
            for col in 0..=d {
                mat[(row, col)] = t0;
                let t2 = 2.0 * s * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            mat[(row, d + 1)] = if row % 2 == 0 { 1.0 } else { -1.0 };
            rhs[row] = fvals[g];
        }
        let sol = mat.lu().solve(&rhs)?;
        let cheb: Vec<f64> = sol.iter().take(d + 1).copied().collect();
        let level = sol[d + 1].abs();

        let err: Vec<f64> = svals
            .iter()
            .zip(&fvals)
            .map(|(&s, &v)| v - clenshaw(&cheb, s))
            .collect();
        let sup = err.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        if sup < best_err {
            best = cheb.clone();
            best_err = sup;
        }
        if sup - level <= REMEZ_TOL * sup.max(f64::MIN_POSITIVE) {
            break;
        }

        // one extremum per maximal run of constant error sign
        let mut peaks: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < err.len() {
            let sign = err[i] >= 0.0;
            let mut arg = i;
            let mut j = i;
            while j < err.len() && (err[j] >= 0.0) == sign {
                if err[j].abs() > err[arg].abs() {
                    arg = j;
                }
                j += 1;
            }
            peaks.push(arg);
            i = j;
        }
        if peaks.len() < size {
            break;
        }
        while peaks.len() > size {
            let first = err[peaks[0]].abs();
            let last = err[*peaks.last().unwrap()].abs();
            if first < last {
                peaks.remove(0);
            } else {
                peaks.pop();
            }
        }
        if peaks == reference {
            break;
        }
        reference = peaks;
    }
    Some(best)
}

fn sup_on_grid(cheb: &[f64], svals: &[f64], fvals: &[f64]) -> f64 {
    svals
        .iter()
        .zip(fvals)
        .fold(0.0_f64, |m, (&s, &v)| m.max((v - clenshaw(cheb, s)).abs()))
}

fn measured_sup<F: Fn(f64) -> f64>(f: &F, coeffs: &[f64], lo: f64, hi: f64) -> f64 {
    let p = IntervalPolynomial::new(coeffs.to_vec(), lo, hi, None);
    uniform_grid(lo, hi, SUP_GRID)
        .into_iter()
        .fold(0.0_f64, |m, x| m.max((f(x) - p.value_at(x)).abs()))
}

/// Degree-`d` Chebyshev interpolant of `f` on `[lo, hi]`, without measuring
/// its error.
pub(crate) fn chebyshev_interpolant<F: Fn(f64) -> f64>(
    f: F,
    d: usize,
    lo: f64,
    hi: f64,
) -> Result<IntervalPolynomial> {
    check_args(d, lo, hi)?;
    let cheb = chebyshev_series(&f, d, lo, hi);
    Ok(IntervalPolynomial::new(
        chebyshev_to_monomial(&cheb, lo, hi),
        lo,
        hi,
        None,
    ))
}

/// Degree-`d` near-min-max approximation of `f` on `[lo, hi]`.
///
/// The sup-norm error is measured on a 4097-point uniform grid including
/// both endpoints. With `remez`, the Chebyshev interpolant seeds an exchange
/// iteration and the fit with the smaller measured error is returned.
pub fn near_minmax_poly<F: Fn(f64) -> f64>(
    f: F,
    d: usize,
    lo: f64,
    hi: f64,
    remez: bool,
) -> Result<IntervalPolynomial> {
    check_args(d, lo, hi)?;
    let cheb = chebyshev_series(&f, d, lo, hi);
    let mut coeffs = chebyshev_to_monomial(&cheb, lo, hi);
    let mut sup = measured_sup(&f, &coeffs, lo, hi);
    if remez {
        if let Some(refined) = remez_series(&f, d, lo, hi, &cheb) {
            let candidate = chebyshev_to_monomial(&refined, lo, hi);
            let candidate_sup = measured_sup(&f, &candidate, lo, hi);
            if candidate_sup < sup {
                coeffs = candidate;
                sup = candidate_sup;
            }
        }
    }
    Ok(IntervalPolynomial::new(coeffs, lo, hi, Some(sup)))
}
