//! Process-wide memo of polynomial constructions, keyed by the exact bit
//! patterns of their parameters.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use crate::error::Result;
use crate::polyapprox::{AmplificationParams, EntropyPolynomial, LipschitzPolynomial};

type ParamKey = (u64, u64, u64, u64);

fn key(p: &AmplificationParams) -> ParamKey {
    (p.n, p.epsilon.to_bits(), p.c_l.to_bits(), p.c_s.to_bits())
}

type Memo<K, V> = LazyLock<Mutex<HashMap<K, Arc<V>>>>;

static ENTROPY: Memo<(ParamKey, bool), EntropyPolynomial> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

static L1: Memo<(ParamKey, u64), LipschitzPolynomial> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Entropy polynomial for `params`, built once per process. Errors are not
/// measured.
pub fn cached_entropy_polynomial(
    params: AmplificationParams,
    refined: bool,
) -> Result<Arc<EntropyPolynomial>> {
    let k = (key(&params), refined);
    if let Some(hit) = ENTROPY.lock().unwrap().get(&k) {
        return Ok(Arc::clone(hit));
    }
    // built outside the lock; a concurrent duplicate build is identical
    let built = Arc::new(EntropyPolynomial::construct(params, refined, false)?);
    Ok(Arc::clone(ENTROPY.lock().unwrap().entry(k).or_insert(built)))
}

/// Polynomial for `x ↦ |x - q| - q`.
pub fn cached_lipschitz_polynomial(
    params: AmplificationParams,
    q: f64,
) -> Result<Arc<LipschitzPolynomial>> {
    let k = (key(&params), q.to_bits());
    if let Some(hit) = L1.lock().unwrap().get(&k) {
        return Ok(Arc::clone(hit));
    }
    let built = Arc::new(LipschitzPolynomial::construct(
        move |x: f64| (x - q).abs() - q,
        params,
        false,
    )?);
    Ok(Arc::clone(L1.lock().unwrap().entry(k).or_insert(built)))
}
