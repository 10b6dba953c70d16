use std::collections::BTreeMap;

use crate::error::{invalid, shape_err, Result};
use crate::ops::{
    affine_backward, affine_forward, channel_concat, channel_slice, conv2d_backward,
    conv2d_forward, relu, relu_backward, AffineParams, ConvParams,
};
use crate::tensor::Tensor;

use super::dropout::dropout_forward;
use super::norm::{norm_backward, norm_forward, NormCache, NormStatistics};
use super::params::{is_trainable, key, Gradients, ModelParams, RUNNING_DECAY};
use super::validate::{validate_graph, ShapeReport};
use super::{GraphSpec, Op};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Everything a forward pass produced that the backward pass needs.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub mode: Mode,
    names: Vec<String>,
    outputs: Vec<Tensor>,
    norm: BTreeMap<usize, NormCache>,
    masks: BTreeMap<usize, Vec<f32>>,
}

impl ForwardTrace {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn output(&self, name: &str) -> Option<&Tensor> {
        self.index(name).map(|i| &self.outputs[i])
    }

    pub fn norm_cache(&self, name: &str) -> Option<&NormCache> {
        self.index(name).and_then(|i| self.norm.get(&i))
    }

    pub fn dropout_mask(&self, name: &str) -> Option<&[f32]> {
        self.index(name)
            .and_then(|i| self.masks.get(&i))
            .map(Vec::as_slice)
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }
}

/// Parameter gradients plus the gradient reaching each node's output.
#[derive(Clone, Debug)]
pub struct BackwardOutput {
    pub params: Gradients,
    names: Vec<String>,
    node_grads: Vec<Option<Tensor>>,
}

impl BackwardOutput {
    /// `None` when no gradient reaches the node.
    pub fn node_grad(&self, name: &str) -> Option<&Tensor> {
        let i = self.names.iter().position(|n| n == name)?;
        self.node_grads[i].as_ref()
    }
}

/// A validated graph ready to execute.
#[derive(Clone, Debug)]
pub struct Network {
    spec: GraphSpec,
    report: ShapeReport,
}

fn node_seed(seed: u64, node: usize) -> u64 {
    seed ^ (node as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl Network {
    pub fn new(spec: GraphSpec) -> Result<Self> {
        let report = validate_graph(&spec)?;
        Ok(Self { spec, report })
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn report(&self) -> &ShapeReport {
        &self.report
    }

    pub fn classes(&self) -> usize {
        self.report.classes()
    }

    /// Per-sample input shape `[C, H, W]`.
    pub fn input_shape(&self) -> &[usize] {
        &self.report.shapes[self.report.input_node]
    }

    pub fn init_params(&self, seed: u64) -> Result<ModelParams> {
        ModelParams::init(&self.spec, seed)
    }

    fn conv_params(&self, params: &ModelParams, node: usize) -> Result<ConvParams> {
        let n = &self.spec.nodes[node];
        let Op::Conv { stride, pad, .. } = n.op else {
            unreachable!("conv_params on a non-conv node")
        };
        ConvParams::new(
            params.get(&n.name, "weight")?.clone(),
            params.get(&n.name, "bias")?.clone(),
            stride,
            pad,
        )
    }

    fn affine_params(&self, params: &ModelParams, node: usize) -> Result<AffineParams> {
        let n = &self.spec.nodes[node];
        AffineParams::new(
            params.get(&n.name, "weight")?.clone(),
            params.get(&n.name, "bias")?.clone(),
        )
    }

    /// Runs the graph on `[N, C, H, W]` input and returns head logits.
    ///
    /// Eval mode ignores `seed`. Train mode draws dropout masks from it and
    /// normalizes with batch statistics.
    pub fn forward(
        &self,
        params: &ModelParams,
        batch: &Tensor,
        mode: Mode,
        seed: u64,
    ) -> Result<(Tensor, ForwardTrace)> {
        params.check_against(&self.spec, &self.report)?;
        let mut expected = vec![batch.shape().first().copied().unwrap_or(0)];
        expected.extend_from_slice(self.input_shape());
        if batch.shape() != expected.as_slice() || expected[0] == 0 {
            return Err(shape_err!(
                "network input must be [N, {:?}], got {:?}",
                self.input_shape(),
                batch.shape()
            ));
        }

        let count = self.spec.nodes.len();
        let mut outputs: Vec<Option<Tensor>> = vec![None; count];
        let mut norm = BTreeMap::new();
        let mut masks = BTreeMap::new();
        for &i in &self.report.order {
            let node = &self.spec.nodes[i];
            let ins: Vec<&Tensor> = self.report.inputs[i]
                .iter()
                .map(|&j| outputs[j].as_ref().expect("inputs run first"))
                .collect();
            let out = match &node.op {
                Op::Input { .. } => batch.clone(),
                Op::Conv { .. } => conv2d_forward(ins[0], &self.conv_params(params, i)?)?,
                Op::Relu => relu(ins[0]),
                Op::Add => {
                    let mut acc = ins[0].clone();
                    for t in &ins[1..] {
                        for (a, b) in acc.data_mut().iter_mut().zip(t.data()) {
                            *a += b;
                        }
                    }
                    acc
                }
                Op::Concat => channel_concat(&ins)?,
                Op::Norm { eps } => {
                    let stats = match mode {
                        Mode::Train => NormStatistics::Batch,
                        Mode::Eval => NormStatistics::Running {
                            mean: params.get(&node.name, "running_mean")?.data(),
                            var: params.get(&node.name, "running_var")?.data(),
                        },
                    };
                    let (y, cache) = norm_forward(
                        ins[0],
                        params.get(&node.name, "scale")?,
                        params.get(&node.name, "shift")?,
                        *eps,
                        stats,
                    )?;
                    if let Some(c) = cache {
                        norm.insert(i, c);
                    }
                    y
                }
                Op::Dropout { rate } => {
                    let d = dropout_forward(ins[0], *rate, mode, node_seed(seed, i))?;
                    if let Some(m) = d.mask {
                        masks.insert(i, m);
                    }
                    d.output
                }
                Op::Affine { .. } | Op::Head { .. } => {
                    affine_forward(ins[0], &self.affine_params(params, i)?)?
                }
            };
            outputs[i] = Some(out);
        }
        let outputs: Vec<Tensor> = outputs
            .into_iter()
            .map(|o| o.expect("every node ran"))
            .collect();
        let logits = outputs[self.report.head_node].clone();
        Ok((
            logits,
            ForwardTrace {
                mode,
                names: self.spec.nodes.iter().map(|n| n.name.clone()).collect(),
                outputs,
                norm,
                masks,
            },
        ))
    }

    /// Eval-mode logits.
    pub fn predict(&self, params: &ModelParams, batch: &Tensor) -> Result<Tensor> {
        Ok(self.forward(params, batch, Mode::Eval, 0)?.0)
    }

    /// Back-propagates `grad_logits` through a train-mode trace.
    pub fn backward(
        &self,
        params: &ModelParams,
        trace: &ForwardTrace,
        grad_logits: &Tensor,
    ) -> Result<BackwardOutput> {
        if trace.mode != Mode::Train {
            return Err(invalid!(
                "backward needs a train-mode trace (eval traces keep no batch statistics or masks)"
            ));
        }
        if trace.outputs.len() != self.spec.nodes.len() {
            return Err(invalid!("trace was produced by a different graph"));
        }
        let head = self.report.head_node;
        grad_logits.ensure_shape(trace.outputs[head].shape(), "grad_logits")?;

        let mut grads: Vec<Option<Tensor>> = vec![None; self.spec.nodes.len()];
        grads[head] = Some(grad_logits.clone());
        let mut param_grads = Gradients::new();

        fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
            match slot {
                Some(acc) => {
                    for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                        *a += b;
                    }
                }
                None => *slot = Some(g),
            }
        }

        for &i in self.report.order.iter().rev() {
            let Some(g) = grads[i].clone() else { continue };
            let node = &self.spec.nodes[i];
            let parents = &self.report.inputs[i];
            let input = |k: usize| &trace.outputs[parents[k]];
            match &node.op {
                Op::Input { .. } => {}
                Op::Conv { .. } => {
                    let cg = conv2d_backward(input(0), &self.conv_params(params, i)?, &g)?;
                    param_grads.insert(key(&node.name, "weight"), cg.weights);
                    param_grads.insert(key(&node.name, "bias"), cg.bias);
                    accumulate(&mut grads[parents[0]], cg.input);
                }
                Op::Relu => {
                    let dx = relu_backward(input(0), &g)?;
                    accumulate(&mut grads[parents[0]], dx);
                }
                Op::Add => {
                    for &p in parents {
                        accumulate(&mut grads[p], g.clone());
                    }
                }
                Op::Concat => {
                    let mut start = 0;
                    for (k, &p) in parents.iter().enumerate() {
                        let c = input(k).shape()[1];
                        accumulate(&mut grads[p], channel_slice(&g, start, c)?);
                        start += c;
                    }
                }
                Op::Norm { .. } => {
                    let cache = trace
                        .norm
                        .get(&i)
                        .ok_or_else(|| invalid!("trace has no statistics for `{}`", node.name))?;
                    let ng = norm_backward(cache, params.get(&node.name, "scale")?, &g)?;
                    param_grads.insert(key(&node.name, "scale"), ng.scale);
                    param_grads.insert(key(&node.name, "shift"), ng.shift);
                    accumulate(&mut grads[parents[0]], ng.input);
                }
                Op::Dropout { .. } => {
                    let mask = trace
                        .masks
                        .get(&i)
                        .ok_or_else(|| invalid!("trace has no dropout mask for `{}`", node.name))?;
                    let data = g.data().iter().zip(mask).map(|(a, m)| a * m).collect();
                    accumulate(
                        &mut grads[parents[0]],
                        Tensor::new(g.shape().to_vec(), data)?,
                    );
                }
                Op::Affine { .. } | Op::Head { .. } => {
                    let ag = affine_backward(input(0), &self.affine_params(params, i)?, &g)?;
                    param_grads.insert(key(&node.name, "weight"), ag.weights);
                    param_grads.insert(key(&node.name, "bias"), ag.bias);
                    accumulate(&mut grads[parents[0]], ag.input);
                }
            }
        }

        // Nodes the gradient never reached still get (zero) entries.
        for (k, t) in params.iter() {
            if is_trainable(k) && !param_grads.contains_key(k) {
                param_grads.insert(k.clone(), Tensor::zeros(t.shape()));
            }
        }
        Ok(BackwardOutput {
            params: param_grads,
            names: trace.names.clone(),
            node_grads: grads,
        })
    }

    /// Folds the batch statistics of a train-mode trace into the running
    /// estimates: `running = 0.9 * running + 0.1 * batch`.
    pub fn update_running_stats(
        &self,
        params: &mut ModelParams,
        trace: &ForwardTrace,
    ) -> Result<()> {
        for (&i, cache) in &trace.norm {
            let name = &self.spec.nodes[i].name;
            for (role, batch) in [
                ("running_mean", &cache.batch_mean),
                ("running_var", &cache.batch_var),
            ] {
                let t = params.get_mut(name, role)?;
                for (r, &b) in t.data_mut().iter_mut().zip(batch.iter()) {
                    *r = (RUNNING_DECAY * *r as f64 + (1.0 - RUNNING_DECAY) * b) as f32;
                }
            }
        }
        Ok(())
    }
}
