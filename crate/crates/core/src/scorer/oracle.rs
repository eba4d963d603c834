//! Ground-truth passthrough scorer.

use super::{ScoreOutputs, Scorer};
use crate::error::Result;
use crate::sampling::{make_labels, CropSample, ProposalGraph, SamplingConfig, TargetLabels};
use crate::scalar::Scalar;

pub const ORACLE_LOW: f64 = 0.05;
pub const ORACLE_HIGH: f64 = 0.95;

/// Scores that reproduce the labels: edge and terminal flags map to
/// {0.05, 0.95}, node scores pass through.
pub fn oracle_score<T: Scalar>(
    g: &ProposalGraph<T>,
    labels: &TargetLabels<T>,
) -> Result<ScoreOutputs<T>> {
    labels.check_aligned(g)?;
    let bin = |b: bool| T::lit(if b { ORACLE_HIGH } else { ORACLE_LOW });
    Ok(ScoreOutputs {
        edge: labels.edge_labels.iter().map(|&b| bin(b)).collect(),
        node: labels.node_scores.clone(),
        terminal: labels.endpoint_flags.iter().map(|&b| bin(b)).collect(),
    })
}

/// Scorer that reads the crop's ground truth.
#[derive(Debug, Clone, Default)]
pub struct OracleScorer {
    pub sampling: SamplingConfig,
}

impl<T: Scalar> Scorer<T> for OracleScorer {
    fn score(&self, g: &ProposalGraph<T>, sample: &CropSample) -> Result<ScoreOutputs<T>> {
        oracle_score(g, &make_labels(g, sample, &self.sampling))
    }
}
