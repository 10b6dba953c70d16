//! Dump intermediate activations of an untrained network as PGM tile grids.
//!
//! `cargo run --release --example inspect_features [OUT_DIR] [NODE...]`

use std::path::{Path, PathBuf};

use learnet::data::dump::dump_feature_maps;
use learnet::data::image::images_to_batch;
use learnet::data::synth::synth_clip;
use learnet::data::{clip_dynamic_image, SynthConfig, INPUT_SIZE};
use learnet::graph::{build_learnet, Mode, Network};
use learnet::rankpool::RankPoolConfig;

pub fn run(out: &Path, nodes: &[&str]) -> learnet::Result<Vec<PathBuf>> {
    let cfg = SynthConfig {
        seed: 5,
        ..SynthConfig::default()
    };
    let image = clip_dynamic_image(
        &synth_clip(1, 0, &cfg),
        INPUT_SIZE,
        &RankPoolConfig::default(),
    )?;
    let net = Network::new(build_learnet(cfg.classes)?)?;
    let params = net.init_params(0)?;
    let (logits, trace) = net.forward(&params, &images_to_batch(&[&image])?, Mode::Eval, 0)?;
    println!("logits {:?}", logits.data());

    std::fs::create_dir_all(out).map_err(|e| learnet::Error::io(out, e))?;
    let mut written = Vec::new();
    for node in nodes {
        let shape = trace
            .output(node)
            .map(|t| t.shape().to_vec())
            .unwrap_or_default();
        println!("{node}: {shape:?}");
        written.extend(dump_feature_maps(&trace, node, out)?);
    }
    Ok(written)
}

fn main() -> learnet::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.first().map_or("features", String::as_str);
    let mut nodes: Vec<&str> = args.iter().skip(1).map(String::as_str).collect();
    if nodes.is_empty() {
        nodes = vec!["conv1", "add1.1", "relu5"];
    }
    for path in run(Path::new(out), &nodes)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
