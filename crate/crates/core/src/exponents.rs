//! Single-letter exponent functions of `(ρ, s, Q)` for a fixed channel.
//!
//! * `E_0(ρ,Q)`: Gallager's random-coding function.
//! * `E_G(ρ,s,Q)`: Gallager's expurgated function with a Chernoff distance;
//!   `s = 1/2` is the classical Bhattacharyya form.
//! * `E(ρ,s,Q)`: the same ingredients with the average over `x` taken
//!   outside the logarithm. By Jensen, `E >= E_G`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::channel::{chernoff_distance_matrix, Channel, DistanceMatrix, InputDistribution};
use crate::error::{Error, Result};
use crate::numeric::{ln_weighted_exp, log_sum_exp, CompensatedSum};
use crate::optimize::{maximize_concave, OptResult, DEFAULT_TOL};

/// `-ρ ln Σ_{x,x'} q(x) q(x') exp(-d(x,x')/ρ)` for any `ρ > 0`.
pub fn gallager_eg_from(dm: &DistanceMatrix, q: &InputDistribution, rho: f64) -> f64 {
    let p = q.probs();
    let k = p.len();
    let mut w = Vec::with_capacity(k * k);
    for &a in p {
        for &b in p {
            w.push(a * b);
        }
    }
    let ln = ln_weighted_exp(&w, dm.entries(), 1.0 / rho);
    -rho * ln
}

/// `-ρ Σ_x q(x) ln Σ_{x'} q(x') exp(-d(x,x')/ρ)` for any `ρ > 0`.
///
/// Letters with `q(x) = 0` contribute nothing.
pub fn ckm_e_from(dm: &DistanceMatrix, q: &InputDistribution, rho: f64) -> f64 {
    let p = q.probs();
    let mut acc = CompensatedSum::new();
    for (x, &qx) in p.iter().enumerate() {
        if qx == 0.0 {
            continue;
        }
        let ln = ln_weighted_exp(p, dm.row(x), 1.0 / rho);
        if ln == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        acc.add(qx * ln);
    }
    -rho * acc.value()
}

/// Channel plus input distribution, with distance matrices memoized by `s`.
#[derive(Debug)]
pub struct ExponentInputs {
    channel: Channel,
    q: InputDistribution,
    cache: Mutex<HashMap<u64, Arc<DistanceMatrix>>>,
}

impl Clone for ExponentInputs {
    fn clone(&self) -> Self {
        Self {
            channel: self.channel.clone(),
            q: self.q.clone(),
            cache: Mutex::new(self.cache.lock().expect("cache poisoned").clone()),
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 1.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rho = {rho}, need rho >= 1")))
    }
}

impl ExponentInputs {
    pub fn new(channel: Channel, q: InputDistribution) -> Result<Self> {
        let q = q.for_channel(&channel)?;
        Ok(Self {
            channel,
            q,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn input(&self) -> &InputDistribution {
        &self.q
    }

    /// Distance matrix at `s`, computed once per distinct `s`.
    pub fn distances(&self, s: f64) -> Result<Arc<DistanceMatrix>> {
        let key = s.to_bits();
        if let Some(dm) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(dm));
        }
        let dm = Arc::new(chernoff_distance_matrix(&self.channel, s)?);
        let mut cache = self.cache.lock().expect("cache poisoned");
        // The optimizers probe many distinct s; keep the memo bounded.
        if cache.len() > 4096 {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&dm));
        Ok(dm)
    }

    /// `E_0(ρ,Q) = -ln Σ_y [Σ_x q(x) p(y|x)^{1/(1+ρ)}]^{1+ρ}`.
    pub fn gallager_e0(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho = {rho}, need rho >= 0")));
        }
        let p = self.q.probs();
        let ln_q: Vec<f64> = p.iter().map(|v| v.ln()).collect();
        let outer = (0..self.channel.output_size()).map(|y| {
            let inner = log_sum_exp(
                (0..p.len()).map(|x| ln_q[x] + self.channel.log_row(x)[y] / (1.0 + rho)),
            );
            (1.0 + rho) * inner
        });
        let total = log_sum_exp(outer.collect::<Vec<_>>());
        Ok(-total)
    }

    /// `sup_{0<=ρ<=1} [E_0(ρ,Q) - ρR]`; `E_0` is concave in `ρ`.
    pub fn random_coding_exponent(&self, rate: f64) -> Result<OptResult> {
        if !(rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("rate = {rate} < 0")));
        }
        maximize_concave(
            |rho| self.gallager_e0(rho).map_or(f64::NAN, |e| e - rho * rate),
            0.0,
            1.0,
            DEFAULT_TOL,
        )
    }

    /// `E_G(ρ,s,Q)`, `ρ >= 1`.
    pub fn gallager_eg(&self, rho: f64, s: f64) -> Result<f64> {
        check_rho(rho)?;
        Ok(gallager_eg_from(&*self.distances(s)?, &self.q, rho))
    }

    /// `E(ρ,s,Q)`, `ρ >= 1`.
    pub fn ckm_e(&self, rho: f64, s: f64) -> Result<f64> {
        check_rho(rho)?;
        Ok(ckm_e_from(&*self.distances(s)?, &self.q, rho))
    }

    /// `max_s E(ρ,s,Q)` with its maximizer.
    ///
    /// `E` is concave in `s`; a 33-point scan precedes the golden section.
    pub fn ckm_e_best_s(&self, rho: f64) -> Result<OptResult> {
        check_rho(rho)?;
        crate::optimize::maximize_scan(
            |s| self.ckm_e(rho, s).unwrap_or(f64::NAN),
            0.0,
            1.0,
            33,
            DEFAULT_TOL,
        )
    }
}
