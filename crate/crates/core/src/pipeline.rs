//! Single-crop successor lane graph prediction (sample, score, prune) and
//! evaluation of a predicted graph against the ground truth around it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{crop_graph, LaneGraph};
use crate::metrics::{compute_all, MetricConfig, MetricReport};
use crate::pruning::{prune, PruningConfig, ScoredGraph};
use crate::sampling::{CropSample, ProposalGraph, SamplingConfig};
use crate::scalar::Scalar;
use crate::scorer::Scorer;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuccessorConfig {
    pub sampling: SamplingConfig,
    pub pruning: PruningConfig,
}

/// Prediction for one crop, in crop pixels.
#[derive(Debug, Clone)]
pub struct SuccessorPrediction<T = f64> {
    pub proposal: ProposalGraph<T>,
    pub scored: ScoredGraph<T>,
    /// Pruned successor graph; node 0 is the agent anchor when non-empty.
    pub graph: LaneGraph<T>,
}

pub fn predict_successor<T: Scalar, S: Scorer<T> + ?Sized>(
    sample: &CropSample,
    scorer: &S,
    cfg: &SuccessorConfig,
) -> Result<SuccessorPrediction<T>> {
    let proposal = ProposalGraph::<T>::build(sample, &cfg.sampling)?;
    let out = scorer.score(&proposal, sample)?;
    let scored = ScoredGraph::new(
        proposal.base.clone(),
        out.edge,
        out.node,
        out.terminal,
        proposal.start,
    )?;
    let graph = prune(&scored, &cfg.pruning);
    Ok(SuccessorPrediction {
        proposal,
        scored,
        graph,
    })
}

/// A prediction, the GT it was compared against and the scores.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalBundle {
    pub pred: LaneGraph<f64>,
    /// GT restricted to the region the prediction covers.
    pub gt: LaneGraph<f64>,
    pub report: MetricReport,
    pub config: MetricConfig,
}

/// Scores `pred` against the part of `gt` inside the prediction's bounding
/// box grown by twice the match radius. An empty prediction is scored
/// against the whole GT.
pub fn evaluate<T: Scalar>(
    pred: &LaneGraph<T>,
    gt: &LaneGraph<T>,
    cfg: &MetricConfig,
) -> Result<EvalBundle> {
    cfg.validate()?;
    if pred.frame().kind != gt.frame().kind {
        return Err(Error::FrameMismatch(
            "prediction and GT live in different frames".into(),
        ));
    }
    let pred: LaneGraph<f64> = pred.cast();
    let gt: LaneGraph<f64> = gt.cast();
    let gt = match pred.bounds() {
        Some(b) => crop_graph(&gt, &b.inflate(2.0 * cfg.match_radius_px)),
        None => gt,
    };
    let report = compute_all(&pred, &gt, cfg)?;
    Ok(EvalBundle {
        pred,
        gt,
        report,
        config: cfg.clone(),
    })
}
