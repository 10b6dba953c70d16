//! End to end: synthesize clips, pool them, train LEARNet, report metrics.
//!
//! `cargo run --release --example train_synthetic [OUT_DIR] [EPOCHS]`

use std::path::Path;

use learnet::data::reports::{metrics_report, write_curve_csv};
use learnet::data::{
    generate_synthetic_dataset, load_dataset, save_checkpoint, SynthConfig, INPUT_SIZE,
};
use learnet::graph::{build_learnet, Network};
use learnet::rankpool::RankPoolConfig;
use learnet::train::{train_model, SplitPlan, TrainConfig, TrainOutcome};

pub fn run(out: &Path, epochs: usize) -> learnet::Result<TrainOutcome> {
    let synth = SynthConfig {
        clips_per_class: 10,
        frames: 6,
        seed: 11,
        ..SynthConfig::default()
    };
    let manifest = generate_synthetic_dataset(&out.join("corpus"), &synth)?;
    let data = load_dataset(&manifest, INPUT_SIZE, &RankPoolConfig::default())?;

    let net = Network::new(build_learnet(data.classes())?)?;
    let cfg = TrainConfig {
        epochs,
        augmentation: false,
        seed: 1,
        ..TrainConfig::default()
    };
    let outcome = train_model(&net, &data, &cfg, &SplitPlan::new(2, 1))?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }

    let best = outcome.best_repeat();
    save_checkpoint(
        &best.fit.params,
        net.spec().digest(),
        &out.join("model.lrnt"),
    )?;
    write_curve_csv(&out.join("curve.csv"), &best.fit.curve)?;
    println!("{}", metrics_report(&outcome.metrics, &data.class_names)?);
    Ok(outcome)
}

fn main() -> learnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "train_synthetic".into());
    let epochs = args
        .next()
        .map_or(5, |s| s.parse().expect("EPOCHS must be an integer"));
    run(Path::new(&out), epochs).map(|_| ())
}
