use serde::Serialize;

use crate::demand::DemandModel;
use crate::policies::{HindsightInfo, HoPolicy};

use super::{SimError, UniformStream};

/// One replication of the hindsight benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoSample {
    pub xi_bar: f64,
    /// `T r(clip(x_T + xi_bar))`: revenue of the clairvoyant fixed price,
    /// averaged over the noise given `xi_bar`.
    pub value: f64,
}

/// Mean of the `T` additive noise values a path seeded with `seed` will draw.
pub fn hindsight_info(model: &DemandModel, horizon: usize, seed: u64) -> HindsightInfo {
    let mut stream = UniformStream::new(seed);
    let sum: f64 = (0..horizon).map(|_| model.noise_from_uniform(0.0, stream.next_uniform())).sum();
    HindsightInfo {
        xi_bar: if horizon == 0 { 0.0 } else { sum / horizon as f64 },
    }
}

/// Draws `T` noise values from `seed`, reveals their mean to the hindsight
/// policy and returns its value.
pub fn ho_sample(model: &DemandModel, x_t: f64, horizon: usize, seed: u64) -> Result<HoSample, SimError> {
    let info = hindsight_info(model, horizon, seed);
    let xi_bar = info.xi_bar;
    let policy = HoPolicy::new(model, x_t, info)?;
    Ok(HoSample {
        xi_bar,
        value: horizon as f64 * model.revenue_formula(policy.demand_rate()),
    })
}
