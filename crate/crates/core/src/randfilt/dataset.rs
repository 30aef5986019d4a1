use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{draw_target, Draw, EqRanges, FamilyId, RandomFilterSpec, SamplerConfig, Stream};
use crate::dsp::{make_grid, FrequencyGrid};
use crate::error::Result;

/// Everything needed to regenerate a dataset; datasets themselves are not
/// stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub family: FamilyId,
    pub order: usize,
    pub seed: u64,
    pub count: usize,
    pub f_count: usize,
    pub sample_rate_hz: f64,
    pub eq_ranges: EqRanges,
    #[serde(default = "default_eigen_power")]
    pub eigen_scale_power: f64,
}

fn default_eigen_power() -> f64 {
    0.5
}

/// One materialized line of a dataset.
#[derive(Clone, Debug)]
pub struct DatasetRecord {
    pub draw: Draw,
}

impl DatasetManifest {
    pub fn new(family: FamilyId, order: usize, seed: u64, count: usize) -> Self {
        let cfg = SamplerConfig::default();
        Self {
            family,
            order,
            seed,
            count,
            f_count: 512,
            sample_rate_hz: cfg.sample_rate_hz,
            eq_ranges: cfg.eq_ranges,
            eigen_scale_power: cfg.eigen_scale_power,
        }
    }

    pub fn spec(&self) -> Result<RandomFilterSpec> {
        RandomFilterSpec::new(self.family, self.order, self.seed)
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            sample_rate_hz: self.sample_rate_hz,
            eq_ranges: self.eq_ranges.clone(),
            eigen_scale_power: self.eigen_scale_power,
        }
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        make_grid(self.f_count, self.sample_rate_hz)
    }

    /// Regenerates the dataset under `stream`. Work is spread over the rayon
    /// pool; results come back in index order regardless of thread count.
    pub fn generate(&self, stream: Stream) -> Result<Vec<DatasetRecord>> {
        let spec = self.spec()?;
        let cfg = self.sampler_config();
        let grid = self.grid()?;
        (0..self.count as u64)
            .into_par_iter()
            .map(|i| draw_target(&spec, &cfg, stream, i, &grid).map(|draw| DatasetRecord { draw }))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
