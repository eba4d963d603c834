//! Forward pass, combined BCE loss and reverse-mode gradient of the
//! causal message-passing scorer.

use ndarray::{concatenate, s, Array1, Array2, ArrayBase, ArrayView2, Axis, DataMut, Ix2};

use super::layers::{relu_inplace, relu_mask, MlpTape};
use super::params::{
    ScorerParams, BEV_FLAT, CONV1, CONV1_OUT, CONV2, CONV2_OUT, EDGE_EMB, MSG_DIM, NODE_EMB,
};
use super::ScoreOutputs;
use crate::error::{Error, Result};
use crate::sampling::{ProposalGraph, TargetLabels, BEV_DIM, GEO_DIM, NODE_DIM};
use crate::scalar::Scalar;

/// Probabilities are clipped to `[PROB_EPS, 1 - PROB_EPS]`.
pub const PROB_EPS: f64 = 1e-7;

struct StepTape<T> {
    edge: MlpTape<T>,
    pred: MlpTape<T>,
    succ: MlpTape<T>,
    node: MlpTape<T>,
}

/// Everything the reverse pass needs from one forward evaluation.
pub struct Tape<T> {
    src: Vec<usize>,
    dst: Vec<usize>,
    node_enc: MlpTape<T>,
    geo_enc: MlpTape<T>,
    cols1: Array2<T>,
    act1: Array2<T>,
    cols2: Array2<T>,
    act2: Array2<T>,
    fuse: MlpTape<T>,
    steps: Vec<StepTape<T>>,
    edge_head: MlpTape<T>,
    node_head: MlpTape<T>,
    terminal_head: MlpTape<T>,
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

#[inline]
fn clip<T: Scalar>(p: T) -> T {
    let eps = T::lit(PROB_EPS);
    p.max(eps).min(T::one() - eps)
}

fn check_dims<T: Scalar>(g: &ProposalGraph<T>) -> Result<()> {
    let (v, e) = (g.node_count(), g.edge_count());
    let ok = g.node_features.dim() == (v, NODE_DIM)
        && g.geo_edge_features.dim() == (e, GEO_DIM)
        && g.bev_edge_features.dim() == (e, BEV_DIM);
    if !ok {
        return Err(Error::DimensionMismatch(format!(
            "feature tables {:?}/{:?}/{:?} do not fit |V|={v}, |E|={e}",
            g.node_features.dim(),
            g.geo_edge_features.dim(),
            g.bev_edge_features.dim()
        )));
    }
    Ok(())
}

fn gather<T: Scalar>(x: &Array2<T>, idx: &[usize]) -> Array2<T> {
    x.select(Axis(0), idx)
}

fn scatter_add<T: Scalar, S: DataMut<Elem = T>>(
    into: &mut ArrayBase<S, Ix2>,
    idx: &[usize],
    rows: ArrayView2<T>,
) {
    for (r, &i) in idx.iter().enumerate() {
        let mut dst = into.row_mut(i);
        dst += &rows.row(r);
    }
}

fn cat<T: Scalar>(parts: &[ArrayView2<T>]) -> Array2<T> {
    concatenate(Axis(1), parts).expect("row counts agree")
}

fn column<T: Scalar>(x: &Array2<T>) -> Array1<T> {
    x.column(0).to_owned()
}

/// Runs the network and keeps intermediate activations. Returned scores
/// are clipped probabilities.
pub fn forward_tape<T: Scalar>(
    p: &ScorerParams<T>,
    g: &ProposalGraph<T>,
) -> Result<(ScoreOutputs<T>, Tape<T>)> {
    check_dims(g)?;
    let src: Vec<usize> = g.base.edges().iter().map(|e| e.src).collect();
    let dst: Vec<usize> = g.base.edges().iter().map(|e| e.dst).collect();
    let ne = src.len();

    let node_enc = p.node_enc.forward(g.node_features.clone(), true);
    let geo_enc = p.geo_enc.forward(g.geo_edge_features.clone(), true);

    let bev = g.bev_edge_features.as_standard_layout();
    let cols1 = CONV1.im2col(bev.as_slice().expect("standard layout"), ne);
    let mut act1 = p.conv1.forward(cols1.view());
    relu_inplace(&mut act1);
    let cols2 = CONV2.im2col(act1.as_slice().expect("standard layout"), ne);
    let mut act2 = p.conv2.forward(cols2.view());
    relu_inplace(&mut act2);
    let flat = act2
        .view()
        .into_shape_with_order((ne, BEV_FLAT))
        .expect("contiguous");
    let bev_emb = p.bev_proj.forward(flat);
    let fuse = p
        .fuse
        .forward(cat(&[geo_enc.output().view(), bev_emb.view()]), true);

    let h0 = node_enc.output().clone();
    let mut hv = h0.clone();
    let mut he = fuse.output().clone();
    let nv = hv.nrows();
    let mut steps = Vec::with_capacity(p.steps);
    for _ in 0..p.steps {
        let (hs, hd) = (gather(&hv, &src), gather(&hv, &dst));
        let edge = p
            .edge_update
            .forward(cat(&[hs.view(), hd.view(), he.view()]), true);
        let he_new = edge.output();
        let pred = p.pred_msg.forward(
            cat(&[hs.view(), he_new.view(), gather(&h0, &src).view()]),
            true,
        );
        let succ = p.succ_msg.forward(
            cat(&[hd.view(), he_new.view(), gather(&h0, &dst).view()]),
            true,
        );
        let mut agg = Array2::zeros((nv, 2 * MSG_DIM));
        scatter_add(
            &mut agg.slice_mut(s![.., ..MSG_DIM]),
            &dst,
            pred.output().view(),
        );
        scatter_add(
            &mut agg.slice_mut(s![.., MSG_DIM..]),
            &src,
            succ.output().view(),
        );
        let node = p.node_update.forward(agg, true);
        he = he_new.clone();
        hv = node.output().clone();
        steps.push(StepTape {
            edge,
            pred,
            succ,
            node,
        });
    }

    let edge_head = p.edge_head.forward(he, false);
    let node_head = p.node_head.forward(hv.clone(), false);
    let terminal_head = p.terminal_head.forward(hv, false);
    let prob = |t: &MlpTape<T>| column(t.output()).mapv(|z| clip(sigmoid(z))).to_vec();
    let out = ScoreOutputs {
        edge: prob(&edge_head),
        node: prob(&node_head),
        terminal: prob(&terminal_head),
    };
    Ok((
        out,
        Tape {
            src,
            dst,
            node_enc,
            geo_enc,
            cols1,
            act1,
            cols2,
            act2,
            fuse,
            steps,
            edge_head,
            node_head,
            terminal_head,
        },
    ))
}

pub fn forward<T: Scalar>(p: &ScorerParams<T>, g: &ProposalGraph<T>) -> Result<ScoreOutputs<T>> {
    Ok(forward_tape(p, g)?.0)
}

fn bce<T: Scalar>(p: T, y: T) -> T {
    let p = clip(p);
    -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
}

/// Combined binary cross entropy summed over node, terminal and edge terms.
pub fn loss<T: Scalar>(out: &ScoreOutputs<T>, labels: &TargetLabels<T>) -> Result<T> {
    let (v, e) = (out.node.len(), out.edge.len());
    if out.terminal.len() != v
        || labels.node_scores.len() != v
        || labels.endpoint_flags.len() != v
        || labels.edge_labels.len() != e
    {
        return Err(Error::DimensionMismatch(
            "scores and labels differ in length".into(),
        ));
    }
    let flag = |b: bool| if b { T::one() } else { T::zero() };
    let mut total = T::zero();
    for i in 0..v {
        total += bce(out.node[i], labels.node_scores[i]);
        total += bce(out.terminal[i], flag(labels.endpoint_flags[i]));
    }
    for k in 0..e {
        total += bce(out.edge[k], flag(labels.edge_labels[k]));
    }
    Ok(total)
}

/// Gradient of the loss with respect to a logit. Zero where the probability
/// is clipped, matching the flat clipped loss.
fn logit_grad<T: Scalar>(logit: T, y: T) -> T {
    let s = sigmoid(logit);
    if s != clip(s) {
        T::zero()
    } else {
        s - y
    }
}

/// Loss and its gradient with respect to every parameter.
pub fn loss_and_grad<T: Scalar>(
    p: &ScorerParams<T>,
    g: &ProposalGraph<T>,
    labels: &TargetLabels<T>,
) -> Result<(T, ScorerParams<T>)> {
    let (out, tape) = forward_tape(p, g)?;
    let l = loss(&out, labels)?;
    let mut grad = p.zeros_like();
    backward(p, &tape, labels, &mut grad);
    Ok((l, grad))
}

/// Adds the loss gradient for one graph to `grad`.
pub fn backward<T: Scalar>(
    p: &ScorerParams<T>,
    tape: &Tape<T>,
    labels: &TargetLabels<T>,
    grad: &mut ScorerParams<T>,
) {
    let flag = |b: bool| if b { T::one() } else { T::zero() };
    let head_grad = |t: &MlpTape<T>, y: &dyn Fn(usize) -> T| {
        let z = t.output();
        Array2::from_shape_fn(z.dim(), |(i, _)| logit_grad(z[[i, 0]], y(i)))
    };
    let d_edge = head_grad(&tape.edge_head, &|i| flag(labels.edge_labels[i]));
    let d_node = head_grad(&tape.node_head, &|i| labels.node_scores[i]);
    let d_term = head_grad(&tape.terminal_head, &|i| flag(labels.endpoint_flags[i]));

    let mut d_he = p
        .edge_head
        .backward(&tape.edge_head, d_edge, false, &mut grad.edge_head);
    let mut d_hv = p
        .node_head
        .backward(&tape.node_head, d_node, false, &mut grad.node_head);
    d_hv += &p
        .terminal_head
        .backward(&tape.terminal_head, d_term, false, &mut grad.terminal_head);

    let (src, dst) = (&tape.src, &tape.dst);
    let nv = d_hv.nrows();
    let mut d_h0 = Array2::<T>::zeros((nv, NODE_EMB));
    for st in tape.steps.iter().rev() {
        let d_agg = p
            .node_update
            .backward(&st.node, d_hv, true, &mut grad.node_update);
        let d_pred = gather(&d_agg.slice(s![.., ..MSG_DIM]).to_owned(), dst);
        let d_succ = gather(&d_agg.slice(s![.., MSG_DIM..]).to_owned(), src);
        let dxp = p
            .pred_msg
            .backward(&st.pred, d_pred, true, &mut grad.pred_msg);
        let dxs = p
            .succ_msg
            .backward(&st.succ, d_succ, true, &mut grad.succ_msg);
        let (a, b) = (NODE_EMB, NODE_EMB + EDGE_EMB);
        let mut d_prev = Array2::<T>::zeros((nv, NODE_EMB));
        scatter_add(&mut d_prev, src, dxp.slice(s![.., ..a]));
        scatter_add(&mut d_h0, src, dxp.slice(s![.., b..]));
        scatter_add(&mut d_prev, dst, dxs.slice(s![.., ..a]));
        scatter_add(&mut d_h0, dst, dxs.slice(s![.., b..]));
        d_he += &dxp.slice(s![.., a..b]);
        d_he += &dxs.slice(s![.., a..b]);
        let dxe = p
            .edge_update
            .backward(&st.edge, d_he, true, &mut grad.edge_update);
        scatter_add(&mut d_prev, src, dxe.slice(s![.., ..NODE_EMB]));
        scatter_add(&mut d_prev, dst, dxe.slice(s![.., NODE_EMB..2 * NODE_EMB]));
        d_he = dxe.slice(s![.., 2 * NODE_EMB..]).to_owned();
        d_hv = d_prev;
    }
    d_h0 += &d_hv;
    p.node_enc
        .backward(&tape.node_enc, d_h0, true, &mut grad.node_enc);

    let d_fuse = p.fuse.backward(&tape.fuse, d_he, true, &mut grad.fuse);
    let geo = super::params::GEO_EMB;
    p.geo_enc.backward(
        &tape.geo_enc,
        d_fuse.slice(s![.., ..geo]).to_owned(),
        true,
        &mut grad.geo_enc,
    );
    let ne = src.len();
    let flat = tape
        .act2
        .view()
        .into_shape_with_order((ne, BEV_FLAT))
        .expect("contiguous");
    let d_flat = p
        .bev_proj
        .backward(flat, d_fuse.slice(s![.., geo..]), &mut grad.bev_proj);
    let mut d_act2 = d_flat
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((ne * CONV2.side_out() * CONV2.side_out(), CONV2_OUT))
        .expect("contiguous");
    relu_mask(&mut d_act2, &tape.act2);
    let d_cols2 = p
        .conv2
        .backward(tape.cols2.view(), d_act2.view(), &mut grad.conv2);
    let d_act1 = CONV2.col2im(&d_cols2, ne);
    let mut d_act1 = Array2::from_shape_vec(
        (ne * CONV1.side_out() * CONV1.side_out(), CONV1_OUT),
        d_act1,
    )
    .expect("sized");
    relu_mask(&mut d_act1, &tape.act1);
    p.conv1
        .accumulate(tape.cols1.view(), d_act1.view(), &mut grad.conv1);
}
