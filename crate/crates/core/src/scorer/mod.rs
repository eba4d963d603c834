//! Edge, node and terminal scoring of proposal graphs: the causal
//! message-passing network, its training loop and an oracle.

mod layers;
mod network;
mod oracle;
mod params;
mod train;

pub use layers::{ConvGeom, Dense, Mlp};
pub use network::{backward, forward, forward_tape, loss, loss_and_grad, Tape, PROB_EPS};
pub use oracle::{oracle_score, OracleScorer, ORACLE_HIGH, ORACLE_LOW};
pub use params::{ScorerParams, TensorSpec, DEFAULT_STEPS};
pub use train::{mean_loss, train, write_loss_csv, TrainConfig, TrainSample};

use crate::error::Result;
use crate::sampling::{CropSample, ProposalGraph};
use crate::scalar::Scalar;

/// Per-element probabilities for one proposal graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutputs<T = f64> {
    pub edge: Vec<T>,
    pub node: Vec<T>,
    pub terminal: Vec<T>,
}

/// Anything that can score a proposal graph built from a crop.
pub trait Scorer<T: Scalar>: Sync {
    fn score(&self, g: &ProposalGraph<T>, sample: &CropSample) -> Result<ScoreOutputs<T>>;
}

/// The trained network as a [`Scorer`].
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedScorer<T = f64> {
    pub params: ScorerParams<T>,
}

impl<T: Scalar> Scorer<T> for LearnedScorer<T> {
    fn score(&self, g: &ProposalGraph<T>, _sample: &CropSample) -> Result<ScoreOutputs<T>> {
        forward(&self.params, g)
    }
}
