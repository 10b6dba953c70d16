use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ops::conv_output_dim;

use super::{GraphSpec, Op};

/// Result of validating a graph: execution order and per-sample shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeReport {
    /// Node indices in a valid execution order.
    pub order: Vec<usize>,
    /// Per-sample output shape of every node, indexed like `spec.nodes`
    /// (`[C, H, W]` for maps, `[F]` for feature vectors).
    pub shapes: Vec<Vec<usize>>,
    /// Resolved input indices of every node.
    pub inputs: Vec<Vec<usize>>,
    pub input_node: usize,
    pub head_node: usize,
    /// Layers along the deepest input-to-head path. Activations are folded
    /// into the layer they follow; the input layer counts, and the head
    /// counts twice (its affine map and its softmax).
    pub compute_stages: usize,
}

impl ShapeReport {
    pub fn classes(&self) -> usize {
        self.shapes[self.head_node][0]
    }
}

fn graph_err(msg: String) -> Error {
    Error::Graph(msg)
}

fn topo_order(spec: &GraphSpec, inputs: &[Vec<usize>]) -> Result<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks = vec![Mark::New; spec.nodes.len()];
    let mut order = Vec::with_capacity(spec.nodes.len());
    // Iterative DFS over dependencies; visiting in list order keeps the
    // result stable.
    for root in 0..spec.nodes.len() {
        if marks[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        marks[root] = Mark::Active;
        while let Some((node, next)) = stack.pop() {
            if let Some(&dep) = inputs[node].get(next) {
                stack.push((node, next + 1));
                match marks[dep] {
                    Mark::New => {
                        marks[dep] = Mark::Active;
                        stack.push((dep, 0));
                    }
                    Mark::Active => {
                        return Err(graph_err(format!(
                            "cycle detected at back edge `{}` -> `{}`",
                            spec.nodes[dep].name, spec.nodes[node].name
                        )))
                    }
                    Mark::Done => {}
                }
            } else {
                marks[node] = Mark::Done;
                order.push(node);
            }
        }
    }
    Ok(order)
}

fn arity_ok(op: &Op, n: usize) -> bool {
    match op {
        Op::Input { .. } => n == 0,
        Op::Add => n >= 2,
        Op::Concat => n >= 1,
        _ => n == 1,
    }
}

/// Topologically sorts the graph and propagates shapes from the input node.
pub fn validate_graph(spec: &GraphSpec) -> Result<ShapeReport> {
    let mut index = HashMap::new();
    for (i, node) in spec.nodes.iter().enumerate() {
        if index.insert(node.name.as_str(), i).is_some() {
            return Err(graph_err(format!("duplicate node name `{}`", node.name)));
        }
    }
    let mut inputs = Vec::with_capacity(spec.nodes.len());
    for node in &spec.nodes {
        if !arity_ok(&node.op, node.inputs.len()) {
            return Err(graph_err(format!(
                "{} node `{}` cannot take {} inputs",
                node.op.kind(),
                node.name,
                node.inputs.len()
            )));
        }
        let resolved = node
            .inputs
            .iter()
            .map(|name| {
                index.get(name.as_str()).copied().ok_or_else(|| {
                    graph_err(format!(
                        "node `{}` references unknown input `{name}`",
                        node.name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        inputs.push(resolved);
    }

    let find_single = |kind: &str| -> Result<usize> {
        let found: Vec<usize> = (0..spec.nodes.len())
            .filter(|&i| spec.nodes[i].op.kind() == kind)
            .collect();
        match found.as_slice() {
            [only] => Ok(*only),
            _ => Err(graph_err(format!(
                "graph needs exactly one {kind} node, found {}",
                found.len()
            ))),
        }
    };
    let input_node = find_single("input")?;
    let head_node = find_single("head")?;
    if let Some(consumer) = inputs.iter().position(|ins| ins.contains(&head_node)) {
        return Err(graph_err(format!(
            "head node `{}` must be the output but feeds `{}`",
            spec.nodes[head_node].name, spec.nodes[consumer].name
        )));
    }

    let order = topo_order(spec, &inputs)?;
    let mut shapes: Vec<Vec<usize>> = vec![Vec::new(); spec.nodes.len()];
    for &i in &order {
        let node = &spec.nodes[i];
        let ins: Vec<&Vec<usize>> = inputs[i].iter().map(|&j| &shapes[j]).collect();
        shapes[i] = node_shape(&node.name, &node.op, &ins)?;
    }

    let mut depth = vec![0usize; spec.nodes.len()];
    for &i in &order {
        let weight = match spec.nodes[i].op {
            Op::Relu => 0,
            Op::Head { .. } => 2,
            _ => 1,
        };
        depth[i] = inputs[i].iter().map(|&j| depth[j]).max().unwrap_or(0) + weight;
    }

    Ok(ShapeReport {
        order,
        compute_stages: depth[head_node],
        shapes,
        inputs,
        input_node,
        head_node,
    })
}

fn node_shape(name: &str, op: &Op, ins: &[&Vec<usize>]) -> Result<Vec<usize>> {
    let spatial = |s: &Vec<usize>| -> Result<(usize, usize, usize)> {
        match s.as_slice() {
            [c, h, w] => Ok((*c, *h, *w)),
            _ => Err(graph_err(format!(
                "{} node `{name}` needs a [C, H, W] input, got {s:?}",
                op.kind()
            ))),
        }
    };
    let positive = |what: &str, v: usize| -> Result<()> {
        if v == 0 {
            Err(graph_err(format!("node `{name}`: {what} must be positive")))
        } else {
            Ok(())
        }
    };
    match op {
        Op::Input {
            channels,
            height,
            width,
        } => {
            positive("channels", *channels)?;
            positive("height", *height)?;
            positive("width", *width)?;
            Ok(vec![*channels, *height, *width])
        }
        Op::Conv {
            filters,
            kernel,
            stride,
            pad,
        } => {
            positive("filters", *filters)?;
            positive("kernel", *kernel)?;
            positive("stride", *stride)?;
            let (_, h, w) = spatial(ins[0])?;
            match (
                conv_output_dim(h, *kernel, *stride, *pad),
                conv_output_dim(w, *kernel, *stride, *pad),
            ) {
                (Some(oh), Some(ow)) => Ok(vec![*filters, oh, ow]),
                _ => Err(graph_err(format!(
                    "conv node `{name}`: {kernel}x{kernel} kernel with pad {pad} does not fit {h}x{w}"
                ))),
            }
        }
        Op::Relu => Ok(ins[0].clone()),
        Op::Dropout { rate } => {
            if !(0.0..1.0).contains(rate) {
                return Err(graph_err(format!(
                    "dropout node `{name}`: rate {rate} outside [0, 1)"
                )));
            }
            Ok(ins[0].clone())
        }
        Op::Norm { eps } => {
            if !(*eps > 0.0) {
                return Err(graph_err(format!(
                    "norm node `{name}`: eps must be positive"
                )));
            }
            spatial(ins[0])?;
            Ok(ins[0].clone())
        }
        Op::Add => {
            let first = ins[0];
            if let Some(other) = ins.iter().find(|s| **s != first) {
                return Err(graph_err(format!(
                    "add node `{name}` has mismatched input shapes {first:?} and {other:?}"
                )));
            }
            Ok(first.clone())
        }
        Op::Concat => {
            let (_, h, w) = spatial(ins[0])?;
            let mut channels = 0;
            for s in ins {
                let (c, sh, sw) = spatial(s)?;
                if (sh, sw) != (h, w) {
                    return Err(graph_err(format!(
                        "concat node `{name}` has mismatched input shapes {:?} and {s:?}",
                        ins[0]
                    )));
                }
                channels += c;
            }
            Ok(vec![channels, h, w])
        }
        Op::Affine { features } => {
            positive("features", *features)?;
            Ok(vec![*features])
        }
        Op::Head { classes } => {
            positive("classes", *classes)?;
            Ok(vec![*classes])
        }
    }
}
