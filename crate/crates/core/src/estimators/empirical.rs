use crate::dist::Property;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, entropy_kernel};
use crate::profile::CountVector;

/// Plug-in estimate `Σ f_i(N_i / n)`.
///
/// Support size counts nonzero entries. For coverage, `1 - N_i/n` is
/// clamped at 0 so Poissonized counts above `n` contribute 1.
pub fn empirical_estimate(property: &Property, counts: &CountVector, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "plug-in estimate needs at least one sample"));
    }
    let nf = n as f64;
    let c = counts.counts();
    Ok(match property {
        Property::Entropy => compensated_sum(c.iter().map(|&x| entropy_kernel(x as f64 / nf))),
        Property::L1 { q } => {
            if q.len() != c.len() {
                return Err(Error::param(
                    "q",
                    format!("reference has {} symbols, counts have {}", q.len(), c.len()),
                ));
            }
            compensated_sum(c.iter().zip(q).map(|(&x, &qi)| (x as f64 / nf - qi).abs()))
        }
        Property::SupportSize => counts.distinct() as f64,
        Property::Coverage { m } => {
            let m = *m as i32;
            compensated_sum(
                c.iter()
                    .filter(|&&x| x > 0)
                    .map(|&x| 1.0 - (1.0 - x as f64 / nf).max(0.0).powi(m)),
            )
        }
    })
}
