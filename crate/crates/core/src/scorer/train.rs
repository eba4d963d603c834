//! Adam training with gradient accumulation over ragged graph batches.

use std::io::Write;

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{backward, forward, forward_tape, loss};
use super::params::{ScorerParams, DEFAULT_STEPS};
use crate::error::{invalid, Error, Result};
use crate::sampling::{ProposalGraph, TargetLabels};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub steps: usize,
    pub seed: u64,
    /// A per-graph loss above this aborts training.
    pub divergence_loss: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 2,
            learning_rate: 1e-3,
            weight_decay: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            steps: DEFAULT_STEPS,
            seed: 0,
            divergence_loss: 1e6,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return invalid("epochs and batch_size must be positive");
        }
        if !(self.learning_rate >= 0.0) || !(self.weight_decay >= 0.0) {
            return invalid("learning_rate and weight_decay must be nonnegative");
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !(self.adam_eps > 0.0)
        {
            return invalid("Adam betas must lie in [0, 1) and eps must be positive");
        }
        if !(self.divergence_loss > 0.0) {
            return invalid("divergence_loss must be positive");
        }
        Ok(())
    }
}

/// One proposal graph with its targets.
#[derive(Debug, Clone)]
pub struct TrainSample<T = f64> {
    pub graph: ProposalGraph<T>,
    pub labels: TargetLabels<T>,
}

struct Adam<T> {
    m: ScorerParams<T>,
    v: ScorerParams<T>,
    t: i32,
}

impl<T: Scalar> Adam<T> {
    fn new(p: &ScorerParams<T>) -> Self {
        Self {
            m: p.zeros_like(),
            v: p.zeros_like(),
            t: 0,
        }
    }

    /// L2 weight decay is added to the gradient before the moment updates.
    fn step(&mut self, p: &mut ScorerParams<T>, g: &mut ScorerParams<T>, cfg: &TrainConfig) {
        self.t += 1;
        let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        let (lr, wd, eps) = (
            T::lit(cfg.learning_rate),
            T::lit(cfg.weight_decay),
            T::lit(cfg.adam_eps),
        );
        let tiny = T::min_positive_value().sqrt();
        let ps = p.slices_mut();
        let gs = g.slices_mut();
        let ms = self.m.slices_mut();
        let vs = self.v.slices_mut();
        for (((p, g), m), v) in ps.into_iter().zip(gs).zip(ms).zip(vs) {
            for k in 0..p.len() {
                let gk = g[k] + wd * p[k];
                m[k] = b1 * m[k] + (T::one() - b1) * gk;
                v[k] = b2 * v[k] + (T::one() - b2) * gk * gk;
                let mh = m[k] / c1;
                let vh = v[k] / c2;
                p[k] -= lr * mh / (vh.sqrt() + eps);
                // weights without data gradient decay geometrically under
                // weight decay; once their products with activations go
                // subnormal every matrix product slows down severalfold
                flush(&mut p[k], tiny);
                flush(&mut m[k], tiny);
                flush(&mut v[k], tiny);
            }
        }
    }
}

#[inline]
fn flush<T: Scalar>(x: &mut T, tiny: T) {
    if x.abs() < tiny {
        *x = T::zero();
    }
}

/// Mean per-graph loss over a dataset.
pub fn mean_loss<T: Scalar>(p: &ScorerParams<T>, data: &[TrainSample<T>]) -> Result<f64> {
    if data.is_empty() {
        return invalid("empty dataset");
    }
    let losses: Result<Vec<f64>> = data
        .par_iter()
        .map(|s| Ok(loss(&forward(p, &s.graph)?, &s.labels)?.to_f64c()))
        .collect();
    Ok(losses?.iter().sum::<f64>() / data.len() as f64)
}

/// Trains from `init`. Each epoch visits the samples in a seeded random
/// order; a batch's gradients are averaged before one Adam step.
/// `on_epoch(epoch, mean_loss)` sees the mean loss of the graphs as they
/// were scored during that epoch.
pub fn train<T: Scalar>(
    data: &[TrainSample<T>],
    cfg: &TrainConfig,
    init: ScorerParams<T>,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(ScorerParams<T>, Vec<f64>)> {
    cfg.validate()?;
    if data.is_empty() {
        return invalid("training needs at least one sample");
    }
    for s in data {
        s.labels.check_aligned(&s.graph)?;
    }
    let mut params = init;
    let mut adam = Adam::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let parts: Result<Vec<(f64, ScorerParams<T>)>> = batch
                .par_iter()
                .map(|&i| {
                    let (out, tape) = forward_tape(&params, &data[i].graph)?;
                    let l = loss(&out, &data[i].labels)?.to_f64c();
                    let mut g = params.zeros_like();
                    backward(&params, &tape, &data[i].labels, &mut g);
                    Ok((l, g))
                })
                .collect();
            let mut grad = params.zeros_like();
            for (l, mut g) in parts? {
                if !l.is_finite() || l > cfg.divergence_loss {
                    return Err(Error::Diverged { epoch, loss: l });
                }
                total += l;
                for (a, b) in grad.slices_mut().into_iter().zip(g.slices_mut()) {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += *y;
                    }
                }
            }
            let scale = T::one() / T::lit(batch.len() as f64);
            for s in grad.slices_mut() {
                s.iter_mut().for_each(|x| *x *= scale);
            }
            adam.step(&mut params, &mut grad, cfg);
        }
        let mean = total / data.len() as f64;
        info!("epoch {epoch}: mean loss {mean:.6}");
        on_epoch(epoch, mean);
        trace.push(mean);
    }
    Ok((params, trace))
}

/// Loss trace as CSV with an `epoch,mean_loss` header.
pub fn write_loss_csv<W: Write>(mut w: W, trace: &[f64]) -> Result<()> {
    writeln!(w, "epoch,mean_loss")?;
    for (k, l) in trace.iter().enumerate() {
        writeln!(w, "{},{:.9e}", k + 1, l)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::network::tests::random_instance;

    fn sample(seed: u64) -> TrainSample<f64> {
        let pts = [(0.0, 0.0), (20.0, 0.0), (40.0, 5.0), (20.0, 20.0)];
        let (graph, labels) = random_instance(&pts, &[(0, 1), (1, 2), (1, 3), (3, 2)], seed);
        TrainSample { graph, labels }
    }

    #[test]
    fn overfits_one_sample() {
        let mut s = sample(1);
        s.labels.node_scores = vec![1.0, 0.0, 1.0, 0.0];
        let cfg = TrainConfig {
            epochs: 200,
            batch_size: 1,
            steps: 2,
            ..Default::default()
        };
        let (p, trace) = train(
            std::slice::from_ref(&s),
            &cfg,
            ScorerParams::init(2, 3),
            |_, _| {},
        )
        .unwrap();
        assert_eq!(trace.len(), 200);
        assert!(mean_loss(&p, &[s]).unwrap() < 0.05, "final {}", trace[199]);
    }

    #[test]
    fn training_lowers_loss_and_is_deterministic() {
        let data: Vec<_> = (0..4).map(sample).collect();
        let cfg = TrainConfig {
            epochs: 5,
            steps: 2,
            ..Default::default()
        };
        let init = ScorerParams::init(2, 9);
        let before = mean_loss(&init, &data).unwrap();
        let (a, _) = train(&data, &cfg, init.clone(), |_, _| {}).unwrap();
        let (b, _) = train(&data, &cfg, init, |_, _| {}).unwrap();
        assert_eq!(a, b);
        assert!(mean_loss(&a, &data).unwrap() < before);
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let data = vec![sample(2)];
        let init = ScorerParams::init(1, 4);
        let cfg = TrainConfig {
            epochs: 2,
            learning_rate: 0.0,
            steps: 1,
            ..Default::default()
        };
        let (p, _) = train(&data, &cfg, init.clone(), |_, _| {}).unwrap();
        assert_eq!(p, init);
    }

    #[test]
    fn divergence_and_empty_data_are_errors() {
        let data = vec![sample(3)];
        let cfg = TrainConfig {
            epochs: 1,
            divergence_loss: 1e-9,
            steps: 1,
            ..Default::default()
        };
        assert!(matches!(
            train(&data, &cfg, ScorerParams::init(1, 5), |_, _| {}),
            Err(Error::Diverged { epoch: 1, .. })
        ));
        assert!(train::<f64>(
            &[],
            &TrainConfig::default(),
            ScorerParams::zeros(1),
            |_, _| {}
        )
        .is_err());
    }

    #[test]
    fn loss_csv_format() {
        let mut buf = Vec::new();
        write_loss_csv(&mut buf, &[0.5, 0.25]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,mean_loss\n1,5.000000000e-1\n2,2.500000000e-1\n"
        );
    }
}
