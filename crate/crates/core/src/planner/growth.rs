use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Independent per-demand, per-period Gaussian growth factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthModel {
    pub mean: f64,
    pub std: f64,
}

impl Default for GrowthModel {
    fn default() -> Self {
        Self { mean: 0.25, std: 0.10 }
    }
}

/// Demand ids per period in the key space of one stream.
const KEY_STRIDE: u128 = 1 << 24;

impl GrowthModel {
    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() || !(self.std >= 0.0 && self.std.is_finite()) {
            return Err(Error::Config {
                key: "growth".into(),
                message: format!("need finite mean and std >= 0, got {} and {}", self.mean, self.std),
            });
        }
        Ok(())
    }

    /// Growth rate `g` for one demand in one period. The stream is selected by
    /// the realization and positioned by (period, demand), so every draw is
    /// independent of evaluation order.
    pub fn draw(&self, seed: u64, realization: u64, period: u32, demand: usize) -> f64 {
        if self.std == 0.0 {
            return self.mean;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(realization);
        rng.set_word_pos((period as u128 * KEY_STRIDE + demand as u128) * 2);
        let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        let z = Normal::standard().inverse_cdf(u);
        self.mean + self.std * z
    }
}

/// ART for `period` from the previous period's values.
pub fn grow_traffic(previous: &[f64], period: u32, model: &GrowthModel, seed: u64, realization: u64) -> Vec<f64> {
    debug_assert!(period >= 2);
    previous
        .iter()
        .enumerate()
        .map(|(d, art)| art * (1.0 + model.draw(seed, realization, period, d)))
        .collect()
}

/// Planning target of the initial Proactive step.
pub fn estimate_final_traffic(initial: f64, periods: u32, mean_growth: f64, overhead: f64) -> f64 {
    initial * (1.0 + mean_growth).powi(periods as i32 - 1) * (1.0 + overhead)
}
