//! Network weights, their layout and the binary checkpoint format.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{ConvGeom, Dense, Mlp};
use crate::error::{Error, Result};
use crate::sampling::{GEO_DIM, NODE_DIM, PATCH_CHANNELS, PATCH_SIDE};
use crate::scalar::Scalar;

pub const NODE_EMB: usize = 16;
pub const EDGE_EMB: usize = 32;
pub const GEO_EMB: usize = 16;
pub const BEV_EMB: usize = 64;
pub const MSG_DIM: usize = 32;
pub const HIDDEN: usize = 64;
pub const DEFAULT_STEPS: usize = 6;

pub const CONV1: ConvGeom = ConvGeom {
    side_in: PATCH_SIDE,
    channels_in: PATCH_CHANNELS,
    kernel: 3,
    stride: 2,
    pad: 1,
};
pub const CONV1_OUT: usize = 8;
pub const CONV2: ConvGeom = ConvGeom {
    side_in: PATCH_SIDE / 2,
    channels_in: CONV1_OUT,
    kernel: 3,
    stride: 2,
    pad: 1,
};
pub const CONV2_OUT: usize = 16;
pub const BEV_FLAT: usize = CONV2_OUT * (PATCH_SIDE / 4) * (PATCH_SIDE / 4);

/// All trainable tensors. Message-passing MLPs are shared across steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerParams<T = f64> {
    pub node_enc: Mlp<T>,
    pub geo_enc: Mlp<T>,
    pub conv1: Dense<T>,
    pub conv2: Dense<T>,
    pub bev_proj: Dense<T>,
    pub fuse: Mlp<T>,
    pub edge_update: Mlp<T>,
    pub pred_msg: Mlp<T>,
    pub succ_msg: Mlp<T>,
    pub node_update: Mlp<T>,
    pub edge_head: Mlp<T>,
    pub node_head: Mlp<T>,
    pub terminal_head: Mlp<T>,
    pub steps: usize,
}

struct Layout {
    node_enc: [usize; 3],
    geo_enc: [usize; 3],
    conv1: (usize, usize),
    conv2: (usize, usize),
    bev_proj: (usize, usize),
    fuse: [usize; 3],
    edge_update: [usize; 3],
    pred_msg: [usize; 3],
    succ_msg: [usize; 3],
    node_update: [usize; 3],
    edge_head: [usize; 4],
    node_head: [usize; 4],
    terminal_head: [usize; 4],
}

const LAYOUT: Layout = Layout {
    node_enc: [NODE_DIM, 8, NODE_EMB],
    geo_enc: [GEO_DIM, 8, GEO_EMB],
    conv1: (CONV1.kernel * CONV1.kernel * PATCH_CHANNELS, CONV1_OUT),
    conv2: (CONV2.kernel * CONV2.kernel * CONV1_OUT, CONV2_OUT),
    bev_proj: (BEV_FLAT, BEV_EMB),
    fuse: [GEO_EMB + BEV_EMB, HIDDEN, EDGE_EMB],
    edge_update: [2 * NODE_EMB + EDGE_EMB, HIDDEN, EDGE_EMB],
    pred_msg: [2 * NODE_EMB + EDGE_EMB, HIDDEN, MSG_DIM],
    succ_msg: [2 * NODE_EMB + EDGE_EMB, HIDDEN, MSG_DIM],
    node_update: [2 * MSG_DIM, HIDDEN, NODE_EMB],
    edge_head: [EDGE_EMB, 16, 8, 1],
    node_head: [NODE_EMB, 8, 4, 1],
    terminal_head: [NODE_EMB, 8, 4, 1],
};

impl<T: Scalar> ScorerParams<T> {
    pub fn zeros(steps: usize) -> Self {
        let l = &LAYOUT;
        Self {
            node_enc: Mlp::zeros(&l.node_enc),
            geo_enc: Mlp::zeros(&l.geo_enc),
            conv1: Dense::zeros(l.conv1.0, l.conv1.1),
            conv2: Dense::zeros(l.conv2.0, l.conv2.1),
            bev_proj: Dense::zeros(l.bev_proj.0, l.bev_proj.1),
            fuse: Mlp::zeros(&l.fuse),
            edge_update: Mlp::zeros(&l.edge_update),
            pred_msg: Mlp::zeros(&l.pred_msg),
            succ_msg: Mlp::zeros(&l.succ_msg),
            node_update: Mlp::zeros(&l.node_update),
            edge_head: Mlp::zeros(&l.edge_head),
            node_head: Mlp::zeros(&l.node_head),
            terminal_head: Mlp::zeros(&l.terminal_head),
            steps,
        }
    }

    /// Fan-in scaled uniform initialization from a seeded ChaCha stream.
    pub fn init(steps: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = &mut rng;
        let l = &LAYOUT;
        Self {
            node_enc: Mlp::uniform(&l.node_enc, r),
            geo_enc: Mlp::uniform(&l.geo_enc, r),
            conv1: Dense::uniform(l.conv1.0, l.conv1.1, r),
            conv2: Dense::uniform(l.conv2.0, l.conv2.1, r),
            bev_proj: Dense::uniform(l.bev_proj.0, l.bev_proj.1, r),
            fuse: Mlp::uniform(&l.fuse, r),
            edge_update: Mlp::uniform(&l.edge_update, r),
            pred_msg: Mlp::uniform(&l.pred_msg, r),
            succ_msg: Mlp::uniform(&l.succ_msg, r),
            node_update: Mlp::uniform(&l.node_update, r),
            edge_head: Mlp::uniform(&l.edge_head, r),
            node_head: Mlp::uniform(&l.node_head, r),
            terminal_head: Mlp::uniform(&l.terminal_head, r),
            steps,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.steps)
    }

    /// Every dense layer with a stable name, in checkpoint order.
    pub fn layers(&self) -> Vec<(String, &Dense<T>)> {
        let mut out: Vec<(String, &Dense<T>)> = Vec::new();
        let mlps: [(&str, &Mlp<T>); 2] = [("node_enc", &self.node_enc), ("geo_enc", &self.geo_enc)];
        for (name, m) in mlps {
            out.extend(
                m.layers
                    .iter()
                    .enumerate()
                    .map(|(k, d)| (format!("{name}.{k}"), d)),
            );
        }
        out.push(("bev_conv.0".into(), &self.conv1));
        out.push(("bev_conv.1".into(), &self.conv2));
        out.push(("bev_proj".into(), &self.bev_proj));
        let mlps: [(&str, &Mlp<T>); 8] = [
            ("fuse", &self.fuse),
            ("edge_update", &self.edge_update),
            ("pred_msg", &self.pred_msg),
            ("succ_msg", &self.succ_msg),
            ("node_update", &self.node_update),
            ("edge_head", &self.edge_head),
            ("node_head", &self.node_head),
            ("terminal_head", &self.terminal_head),
        ];
        for (name, m) in mlps {
            out.extend(
                m.layers
                    .iter()
                    .enumerate()
                    .map(|(k, d)| (format!("{name}.{k}"), d)),
            );
        }
        out
    }

    /// Mutable counterpart of [`layers`](Self::layers), same order.
    pub fn layers_mut(&mut self) -> Vec<&mut Dense<T>> {
        let mut out: Vec<&mut Dense<T>> = Vec::new();
        out.extend(self.node_enc.layers.iter_mut());
        out.extend(self.geo_enc.layers.iter_mut());
        out.push(&mut self.conv1);
        out.push(&mut self.conv2);
        out.push(&mut self.bev_proj);
        out.extend(self.fuse.layers.iter_mut());
        out.extend(self.edge_update.layers.iter_mut());
        out.extend(self.pred_msg.layers.iter_mut());
        out.extend(self.succ_msg.layers.iter_mut());
        out.extend(self.node_update.layers.iter_mut());
        out.extend(self.edge_head.layers.iter_mut());
        out.extend(self.node_head.layers.iter_mut());
        out.extend(self.terminal_head.layers.iter_mut());
        out
    }

    /// Flat views of every tensor: weights then bias, layer by layer.
    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for d in self.layers_mut() {
            out.push(d.w.as_slice_mut().expect("standard layout"));
            out.push(d.b.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub fn tensor_specs(&self) -> Vec<TensorSpec> {
        let mut out = Vec::new();
        for (name, d) in self.layers() {
            out.push(TensorSpec {
                name: format!("{name}.w"),
                shape: d.w.shape().to_vec(),
            });
            out.push(TensorSpec {
                name: format!("{name}.b"),
                shape: d.b.shape().to_vec(),
            });
        }
        out
    }

    pub fn num_params(&self) -> usize {
        self.layers()
            .iter()
            .map(|(_, d)| d.w.len() + d.b.len())
            .sum()
    }

    /// All parameters flattened in checkpoint order.
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.num_params());
        for (_, d) in self.layers() {
            out.extend(d.w.iter().copied());
            out.extend(d.b.iter().copied());
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} parameters",
                flat.len(),
                self.num_params()
            )));
        }
        let mut k = 0;
        for s in self.slices_mut() {
            s.copy_from_slice(&flat[k..k + s.len()]);
            k += s.len();
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ScorerParams<U> {
        let mut out = ScorerParams::<U>::zeros(self.steps);
        let flat: Vec<U> = self.to_flat().into_iter().map(|v| v.cast()).collect();
        out.set_flat(&flat).expect("same layout");
        out
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }

    /// Writes the checkpoint: an 8-byte little-endian header length, a JSON
    /// header naming every tensor and its shape, then all values as
    /// little-endian `f64`.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        let header = CheckpointHeader {
            format: CHECKPOINT_FORMAT.to_string(),
            steps: self.steps,
            tensors: self.tensor_specs(),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::with_capacity(self.num_params() * 8);
        for v in self.to_flat() {
            buf.extend_from_slice(&v.to_f64c().to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len);
        if len > 1 << 24 {
            return Err(Error::Format(format!("checkpoint header of {len} bytes")));
        }
        let mut json = vec![0u8; len as usize];
        r.read_exact(&mut json)?;
        let header: CheckpointHeader = serde_json::from_slice(&json)?;
        if header.format != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!(
                "unknown checkpoint format {:?}",
                header.format
            )));
        }
        let mut params = Self::zeros(header.steps);
        if header.tensors != params.tensor_specs() {
            return Err(Error::Format(
                "checkpoint tensors do not match the architecture".into(),
            ));
        }
        let mut data = Vec::new();
        r.read_to_end(&mut data)?;
        if data.len() != params.num_params() * 8 {
            return Err(Error::Format(format!(
                "checkpoint holds {} data bytes, expected {}",
                data.len(),
                params.num_params() * 8
            )));
        }
        let flat: Vec<T> = data
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        params.set_flat(&flat)?;
        Ok(params)
    }
}

const CHECKPOINT_FORMAT: &str = "lanegraph-scorer-v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointHeader {
    format: String,
    steps: usize,
    tensors: Vec<TensorSpec>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_dimensions() {
        let p = ScorerParams::<f64>::zeros(DEFAULT_STEPS);
        assert_eq!(p.node_enc.dims(), vec![2, 8, 16]);
        assert_eq!(p.geo_enc.dims(), vec![4, 8, 16]);
        assert_eq!(p.fuse.dims(), vec![80, 64, 32]);
        assert_eq!(p.edge_update.dims(), vec![64, 64, 32]);
        assert_eq!(p.pred_msg.dims(), vec![64, 64, 32]);
        assert_eq!(p.node_update.dims(), vec![64, 64, 16]);
        assert_eq!(p.edge_head.dims(), vec![32, 16, 8, 1]);
        assert_eq!(p.terminal_head.dims(), vec![16, 8, 4, 1]);
        assert_eq!(p.bev_proj.w.dim(), (1024, 64));
        assert_eq!(p.conv1.w.dim(), (36, 8));
        assert_eq!(p.conv2.w.dim(), (72, 16));
        let names: Vec<String> = p.layers().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), p.clone().layers_mut().len());
        assert_eq!(names[0], "node_enc.0");
        assert!(names.contains(&"bev_proj".to_string()));
    }

    #[test]
    fn init_is_seeded() {
        let a = ScorerParams::<f64>::init(2, 7);
        assert_eq!(a, ScorerParams::init(2, 7));
        assert_ne!(a, ScorerParams::init(2, 8));
    }

    #[test]
    fn checkpoint_round_trip() {
        let p = ScorerParams::<f64>::init(3, 1);
        let mut buf = Vec::new();
        p.write_checkpoint(&mut buf).unwrap();
        assert_eq!(ScorerParams::<f64>::read_checkpoint(&buf[..]).unwrap(), p);
        let q = ScorerParams::<f32>::read_checkpoint(&buf[..]).unwrap();
        assert_eq!(q, p.cast::<f32>());
        assert!(ScorerParams::<f64>::read_checkpoint(&buf[..buf.len() - 8]).is_err());
    }
}
