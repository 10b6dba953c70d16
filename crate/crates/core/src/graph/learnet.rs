use crate::error::{invalid, Result};

use super::{GraphSpec, NodeSpec, Op};

/// Sizes of a LEARNet instance. [`LearnetDims::default_for`] gives the
/// full-size network; shrunken variants keep the topology for testing.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnetDims {
    pub input_size: usize,
    pub input_channels: usize,
    pub stem_filters: usize,
    /// Filters of the 1x1, 3x3 and 5x5 convolutions in every pathway.
    pub path_filters: [usize; 3],
    pub conv5_filters: usize,
    pub conv5_pad: usize,
    pub fc_features: usize,
    pub dropout: f64,
    pub classes: usize,
}

impl LearnetDims {
    pub fn default_for(classes: usize) -> Self {
        Self {
            input_size: 112,
            input_channels: 3,
            stem_filters: 16,
            path_filters: [16, 32, 64],
            conv5_filters: 256,
            conv5_pad: 1,
            fc_features: 256,
            dropout: 0.5,
            classes,
        }
    }

    /// Valid padding at Conv-5 (3x3 output, 2304-input FC layer).
    pub fn reduced_for(classes: usize) -> Self {
        Self {
            conv5_pad: 0,
            ..Self::default_for(classes)
        }
    }
}

/// The full-size LEARNet graph for `num_classes` outputs.
pub fn build_learnet(num_classes: usize) -> Result<GraphSpec> {
    build_learnet_with(&LearnetDims::default_for(num_classes))
}

/// LEARNet with valid padding at Conv-5.
pub fn build_learnet_reduced(num_classes: usize) -> Result<GraphSpec> {
    build_learnet_with(&LearnetDims::reduced_for(num_classes))
}

fn conv(filters: usize, kernel: usize) -> Op {
    Op::Conv {
        filters,
        kernel,
        stride: 2,
        pad: kernel / 2,
    }
}

/// Builds the four-pathway graph. Pathways 1 and 2 are sequential; the
/// third and fourth conv of pathways 3 and 4 read accretion sums:
///
/// ```text
/// add1.1 = relu2.1 + relu2.2 -> conv3.3     add2.1 = relu3.1 + relu3.2 -> conv4.3
/// add1.2 = relu2.3 + relu2.4 -> conv3.4     add2.2 = relu3.3 + relu3.4 -> conv4.4
/// ```
pub fn build_learnet_with(dims: &LearnetDims) -> Result<GraphSpec> {
    if dims.classes < 2 {
        return Err(invalid!(
            "LEARNet needs at least 2 classes, got {}",
            dims.classes
        ));
    }
    let mut nodes = Vec::new();
    let mut push =
        |name: &str, op: Op, inputs: &[&str]| nodes.push(NodeSpec::new(name, op, inputs));

    push(
        "input",
        Op::Input {
            channels: dims.input_channels,
            height: dims.input_size,
            width: dims.input_size,
        },
        &[],
    );
    push("conv1", conv(dims.stem_filters, 3), &["input"]);
    push("relu1", Op::Relu, &["conv1"]);

    let [f2, f3, f4] = dims.path_filters;
    for p in 1..=4 {
        push(&format!("conv2.{p}"), conv(f2, 1), &["relu1"]);
        push(&format!("relu2.{p}"), Op::Relu, &[&format!("conv2.{p}")]);
    }
    push("add1.1", Op::Add, &["relu2.1", "relu2.2"]);
    push("add1.2", Op::Add, &["relu2.3", "relu2.4"]);

    let stage3_inputs = ["relu2.1", "relu2.2", "add1.1", "add1.2"];
    for (p, src) in (1..=4).zip(stage3_inputs) {
        push(&format!("conv3.{p}"), conv(f3, 3), &[src]);
        push(&format!("relu3.{p}"), Op::Relu, &[&format!("conv3.{p}")]);
    }
    push("add2.1", Op::Add, &["relu3.1", "relu3.2"]);
    push("add2.2", Op::Add, &["relu3.3", "relu3.4"]);

    let stage4_inputs = ["relu3.1", "relu3.2", "add2.1", "add2.2"];
    for (p, src) in (1..=4).zip(stage4_inputs) {
        push(&format!("conv4.{p}"), conv(f4, 5), &[src]);
        push(&format!("relu4.{p}"), Op::Relu, &[&format!("conv4.{p}")]);
    }
    push(
        "concat",
        Op::Concat,
        &["relu4.1", "relu4.2", "relu4.3", "relu4.4"],
    );
    push(
        "norm",
        Op::Norm {
            eps: super::NORM_EPS,
        },
        &["concat"],
    );
    push(
        "conv5",
        Op::Conv {
            filters: dims.conv5_filters,
            kernel: 3,
            stride: 2,
            pad: dims.conv5_pad,
        },
        &["norm"],
    );
    push("relu5", Op::Relu, &["conv5"]);
    push(
        "fc",
        Op::Affine {
            features: dims.fc_features,
        },
        &["relu5"],
    );
    push("relu_fc", Op::Relu, &["fc"]);
    push("dropout", Op::Dropout { rate: dims.dropout }, &["relu_fc"]);
    push(
        "head",
        Op::Head {
            classes: dims.classes,
        },
        &["dropout"],
    );

    Ok(GraphSpec { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_graph;

    #[test]
    fn rejects_single_class() {
        assert!(build_learnet(1).is_err());
        assert!(build_learnet(0).is_err());
    }

    #[test]
    fn shape_walk() {
        let spec = build_learnet(8).unwrap();
        let r = validate_graph(&spec).unwrap();
        let shape = |n: &str| r.shapes[spec.index_of(n).unwrap()].clone();
        assert_eq!(shape("input"), vec![3, 112, 112]);
        assert_eq!(shape("conv1"), vec![16, 56, 56]);
        for p in 1..=4 {
            assert_eq!(shape(&format!("conv2.{p}")), vec![16, 28, 28]);
            assert_eq!(shape(&format!("conv3.{p}")), vec![32, 14, 14]);
            assert_eq!(shape(&format!("conv4.{p}")), vec![64, 7, 7]);
        }
        assert_eq!(shape("add1.1"), vec![16, 28, 28]);
        assert_eq!(shape("add2.2"), vec![32, 14, 14]);
        assert_eq!(shape("concat"), vec![256, 7, 7]);
        assert_eq!(shape("norm"), vec![256, 7, 7]);
        assert_eq!(shape("conv5"), vec![256, 4, 4]);
        assert_eq!(shape("fc"), vec![256]);
        assert_eq!(shape("head"), vec![8]);

        let tv = build_learnet_reduced(8).unwrap();
        let r = validate_graph(&tv).unwrap();
        assert_eq!(r.shapes[tv.index_of("conv5").unwrap()], vec![256, 3, 3]);
    }
}
