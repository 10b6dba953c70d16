use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, shape_err, Result};
use crate::tensor::Tensor;

use super::validate::{validate_graph, ShapeReport};
use super::{GraphSpec, Op};

/// Decay of the running normalization statistics.
pub const RUNNING_DECAY: f64 = 0.9;

/// Gradient per trainable tensor, keyed like [`ModelParams`].
pub type Gradients = BTreeMap<String, Tensor>;

/// Named tensors of a model, keyed `"<node>.<role>"`.
///
/// Trainable roles are `weight`, `bias` (conv, affine, head) and `scale`,
/// `shift` (norm). Norm nodes also carry the non-trainable buffers
/// `running_mean` and `running_var`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelParams {
    tensors: BTreeMap<String, Tensor>,
}

pub fn key(node: &str, role: &str) -> String {
    format!("{node}.{role}")
}

pub fn is_trainable(key: &str) -> bool {
    !(key.ends_with(".running_mean") || key.ends_with(".running_var"))
}

/// Expected `(role, shape)` of every tensor a node owns.
pub(crate) fn node_tensor_shapes(
    op: &Op,
    input_shape: &[usize],
) -> Vec<(&'static str, Vec<usize>)> {
    match *op {
        Op::Conv {
            filters, kernel, ..
        } => vec![
            ("weight", vec![filters, input_shape[0], kernel, kernel]),
            ("bias", vec![filters]),
        ],
        Op::Affine { features: out } | Op::Head { classes: out } => {
            let fan_in: usize = input_shape.iter().product();
            vec![("weight", vec![out, fan_in]), ("bias", vec![out])]
        }
        Op::Norm { .. } => {
            let c = input_shape[0];
            vec![
                ("scale", vec![c]),
                ("shift", vec![c]),
                ("running_mean", vec![c]),
                ("running_var", vec![c]),
            ]
        }
        _ => Vec::new(),
    }
}

impl ModelParams {
    pub fn from_map(tensors: BTreeMap<String, Tensor>) -> Self {
        Self { tensors }
    }

    /// Seeded initialization: weights uniform in `[-s, s]` with
    /// `s = sqrt(2 / fan_in)`, biases and shifts 0, scales 1, running
    /// statistics 0 (mean) and 1 (variance).
    pub fn init(spec: &GraphSpec, seed: u64) -> Result<Self> {
        let report = validate_graph(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tensors = BTreeMap::new();
        for (i, node) in spec.nodes.iter().enumerate() {
            let in_shape = report.inputs[i]
                .first()
                .map(|&j| report.shapes[j].clone())
                .unwrap_or_default();
            for (role, shape) in node_tensor_shapes(&node.op, &in_shape) {
                let t = match role {
                    "weight" => {
                        let fan_in: usize = shape[1..].iter().product();
                        let s = (2.0 / fan_in as f64).sqrt();
                        Tensor::from_fn(&shape, |_| rng.gen_range(-s..s) as f32)
                    }
                    "scale" | "running_var" => Tensor::full(&shape, 1.0),
                    _ => Tensor::zeros(&shape),
                };
                tensors.insert(key(&node.name, role), t);
            }
        }
        Ok(Self { tensors })
    }

    /// Every tensor of `spec` filled with zeros (running variance 1).
    pub fn zeros(spec: &GraphSpec) -> Result<Self> {
        let mut p = Self::init(spec, 0)?;
        for (k, t) in p.tensors.iter_mut() {
            if !k.ends_with(".running_var") {
                t.data_mut().fill(0.0);
            }
        }
        Ok(p)
    }

    pub fn get(&self, node: &str, role: &str) -> Result<&Tensor> {
        let k = key(node, role);
        self.tensors
            .get(&k)
            .ok_or_else(|| invalid!("missing parameter tensor `{k}`"))
    }

    pub fn get_mut(&mut self, node: &str, role: &str) -> Result<&mut Tensor> {
        let k = key(node, role);
        self.tensors
            .get_mut(&k)
            .ok_or_else(|| invalid!("missing parameter tensor `{k}`"))
    }

    pub fn tensor(&self, key: &str) -> Option<&Tensor> {
        self.tensors.get(key)
    }

    pub fn tensor_mut(&mut self, key: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(key)
    }

    pub fn insert(&mut self, key: String, t: Tensor) {
        self.tensors.insert(key, t);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.tensors.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Tensor)> {
        self.tensors.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Sets every tensor owned by `node` to zero.
    pub fn zero_node(&mut self, node: &str) {
        let prefix = format!("{node}.");
        for (k, t) in self.tensors.iter_mut() {
            if k.starts_with(&prefix) && is_trainable(k) {
                t.data_mut().fill(0.0);
            }
        }
    }

    /// Checks that the tensor set matches `spec` exactly.
    pub fn check_against(&self, spec: &GraphSpec, report: &ShapeReport) -> Result<()> {
        let mut expected = 0;
        for (i, node) in spec.nodes.iter().enumerate() {
            let in_shape = report.inputs[i]
                .first()
                .map(|&j| report.shapes[j].clone())
                .unwrap_or_default();
            for (role, shape) in node_tensor_shapes(&node.op, &in_shape) {
                expected += 1;
                let t = self.get(&node.name, role)?;
                if t.shape() != shape.as_slice() {
                    return Err(shape_err!(
                        "parameter `{}` has shape {:?}, graph expects {shape:?}",
                        key(&node.name, role),
                        t.shape()
                    ));
                }
            }
        }
        if expected != self.tensors.len() {
            return Err(invalid!(
                "parameter set has {} tensors, graph expects {expected}",
                self.tensors.len()
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeParamCount {
    pub node: String,
    pub weights: usize,
    pub biases: usize,
}

impl NodeParamCount {
    pub fn total(&self) -> usize {
        self.weights + self.biases
    }
}

/// Learnable parameter counts (weights + biases; norm scale + shift).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamReport {
    pub per_node: Vec<NodeParamCount>,
    pub total: usize,
    /// Total without the classifier head.
    pub backbone: usize,
}

pub fn param_count(spec: &GraphSpec) -> Result<ParamReport> {
    let report = validate_graph(spec)?;
    let mut per_node = Vec::new();
    let mut head = 0;
    for (i, node) in spec.nodes.iter().enumerate() {
        let in_shape = report.inputs[i]
            .first()
            .map(|&j| report.shapes[j].clone())
            .unwrap_or_default();
        let shapes = node_tensor_shapes(&node.op, &in_shape);
        if shapes.is_empty() {
            continue;
        }
        let size = |role: &str| -> usize {
            shapes
                .iter()
                .find(|(r, _)| *r == role)
                .map(|(_, s)| s.iter().product())
                .unwrap_or(0)
        };
        let count = match node.op {
            Op::Norm { .. } => NodeParamCount {
                node: node.name.clone(),
                weights: size("scale"),
                biases: size("shift"),
            },
            _ => NodeParamCount {
                node: node.name.clone(),
                weights: size("weight"),
                biases: size("bias"),
            },
        };
        if matches!(node.op, Op::Head { .. }) {
            head += count.total();
        }
        per_node.push(count);
    }
    let total = per_node.iter().map(NodeParamCount::total).sum();
    Ok(ParamReport {
        per_node,
        total,
        backbone: total - head,
    })
}
