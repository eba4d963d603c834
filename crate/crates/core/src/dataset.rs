//! Crop datasets drawn from synthetic worlds, and per-crop evaluation of the
//! successor pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::LaneGraph;
use crate::metrics::{compute_all, mean_report, MetricConfig, MetricReport};
use crate::pipeline::{predict_successor, SuccessorConfig};
use crate::sampling::{
    extract_crop, make_labels, noisy_crop_pose, sample_agent_poses, CropSample, ProposalGraph,
    SamplingConfig,
};
use crate::scalar::Scalar;
use crate::scorer::{Scorer, TrainSample};
use crate::worldgen::World;

/// `n` crops at agent poses on GT nodes. With `noise` the crop is taken at
/// a pose perturbed by the configured Gaussian pose noise.
pub fn sample_crops(
    world: &World,
    n: usize,
    seed: u64,
    noise: Option<&SamplingConfig>,
) -> Result<Vec<CropSample>> {
    let poses = sample_agent_poses(world, n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
    let poses: Vec<_> = poses
        .into_iter()
        .map(|p| match noise {
            Some(cfg) => noisy_crop_pose(&p, rng.gen(), cfg.pose_sigma_px, cfg.pose_sigma_yaw),
            None => p,
        })
        .collect();
    poses.par_iter().map(|p| extract_crop(world, p)).collect()
}

/// Proposal graphs with their targets for training.
pub fn training_set<T: Scalar>(
    crops: &[CropSample],
    cfg: &SamplingConfig,
) -> Result<Vec<TrainSample<T>>> {
    crops
        .par_iter()
        .map(|c| {
            let graph = ProposalGraph::<T>::build(c, cfg)?;
            let labels = make_labels(&graph, c, cfg);
            Ok(TrainSample { graph, labels })
        })
        .collect()
}

/// Runs the successor pipeline on every crop and scores each prediction
/// against the crop's GT successor graph. Returns the mean report and the
/// per-crop reports.
pub fn evaluate_successor<T: Scalar, S: Scorer<T> + ?Sized>(
    crops: &[CropSample],
    scorer: &S,
    cfg: &SuccessorConfig,
    metrics: &MetricConfig,
) -> Result<(MetricReport, Vec<MetricReport>)> {
    let reports: Vec<MetricReport> = crops
        .par_iter()
        .map(|c| {
            let pred: LaneGraph<f64> = predict_successor::<T, S>(c, scorer, cfg)?.graph.cast();
            compute_all(&pred, &c.gt_successor, metrics)
        })
        .collect::<Result<_>>()?;
    let mean = mean_report(&reports).ok_or_else(|| Error::InvalidArgument("no crops".into()))?;
    Ok((mean, reports))
}
