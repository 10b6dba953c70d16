//! Declarative layer graphs: specification, validation, parameters and
//! hand-written forward/backward execution.
//!
//! A [`GraphSpec`] is plain data. The LEARNet topology, including which
//! branches receive accretion (elementwise-sum) inputs, is produced by
//! [`build_learnet`] but any other wiring of the same node kinds can be
//! loaded from a config file without code changes.

mod dropout;
mod exec;
mod learnet;
mod norm;
mod params;
mod validate;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dropout::{dropout_forward, DropoutOutput};
pub use exec::{BackwardOutput, ForwardTrace, Mode, Network};
pub use learnet::{build_learnet, build_learnet_reduced, build_learnet_with, LearnetDims};
pub use norm::{
    batch_stats, norm_backward, norm_forward, NormCache, NormGrads, NormStatistics, NORM_EPS,
};
pub use params::{param_count, Gradients, ModelParams, NodeParamCount, ParamReport, RUNNING_DECAY};
pub use validate::{validate_graph, ShapeReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Input {
        channels: usize,
        height: usize,
        width: usize,
    },
    Conv {
        filters: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
    },
    Relu,
    /// Accretion: elementwise sum of two or more equally shaped inputs.
    Add,
    Concat,
    /// Batch-statistics normalization with learnable scale and shift.
    Norm {
        #[serde(default = "default_eps")]
        eps: f64,
    },
    Dropout {
        rate: f64,
    },
    Affine {
        features: usize,
    },
    /// Final affine layer producing class logits.
    Head {
        classes: usize,
    },
}

fn default_eps() -> f64 {
    NORM_EPS
}

impl Op {
    pub fn kind(&self) -> &'static str {
        match self {
            Op::Input { .. } => "input",
            Op::Conv { .. } => "conv",
            Op::Relu => "relu",
            Op::Add => "add",
            Op::Concat => "concat",
            Op::Norm { .. } => "norm",
            Op::Dropout { .. } => "dropout",
            Op::Affine { .. } => "affine",
            Op::Head { .. } => "head",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    #[serde(flatten)]
    pub op: Op,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
}

impl NodeSpec {
    pub fn new(name: impl Into<String>, op: Op, inputs: &[&str]) -> Self {
        Self {
            name: name.into(),
            op,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub nodes: Vec<NodeSpec>,
}

impl GraphSpec {
    pub fn node(&self, name: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Compact JSON used for hashing; stable for a given spec value.
    pub fn canonical_text(&self) -> String {
        serde_json::to_string(self).expect("graph specs always serialize")
    }

    /// 64-bit FNV-1a of [`canonical_text`](Self::canonical_text).
    pub fn digest(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }

    pub fn to_config_text(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("graph specs always serialize");
        text.push('\n');
        text
    }

    pub fn from_config_text(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_config_text()).map_err(|e| Error::io(path, e))
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}
