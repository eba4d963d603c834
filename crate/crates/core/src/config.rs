//! One JSON document holding every tunable of the pipeline.

use serde::{Deserialize, Serialize};

use crate::aggregation::AggregationConfig;
use crate::error::Result;
use crate::metrics::MetricConfig;
use crate::pipeline::SuccessorConfig;
use crate::planning::PlanConfig;
use crate::pruning::PruningConfig;
use crate::sampling::SamplingConfig;
use crate::scorer::TrainConfig;
use crate::worldgen::WorldSpec;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub world: WorldSpec,
    pub sampling: SamplingConfig,
    pub pruning: PruningConfig,
    pub train: TrainConfig,
    pub aggregation: AggregationConfig,
    pub metrics: MetricConfig,
    pub planning: PlanConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.sampling.validate()?;
        self.pruning.validate()?;
        self.train.validate()?;
        self.aggregation().validate()?;
        self.metrics.validate()?;
        self.planning.validate()
    }

    pub fn successor(&self) -> SuccessorConfig {
        SuccessorConfig {
            sampling: self.sampling.clone(),
            pruning: self.pruning.clone(),
        }
    }

    /// Aggregation settings with the per-crop prediction filled in.
    pub fn aggregation(&self) -> AggregationConfig {
        AggregationConfig {
            successor: self.successor(),
            ..self.aggregation.clone()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
