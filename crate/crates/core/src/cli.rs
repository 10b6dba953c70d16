//! The `learnet` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error. Diagnostics and
//! progress go to stderr; stdout carries only the documented data output
//! (parameter tables, metrics reports, written file lists).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::data::image::resize_bilinear;
use crate::data::ppm::{read_ppm, write_ppm};
use crate::data::reports::{metrics_report, write_confusion_csv, write_curve_csv};
use crate::data::{
    dump_feature_maps, generate_synthetic_dataset, load_checkpoint, load_dataset,
    load_frame_sequence, save_checkpoint, Manifest, SynthConfig,
};
use crate::error::{invalid, Error, Result};
use crate::graph::{param_count, GraphSpec, Mode, Network};
use crate::rankpool::{dynamic_image, RankPoolConfig, RankPoolMode};
use crate::train::{evaluate, train_model, SplitPlan, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "learnet",
    version,
    about = "Dynamic images and LEARNet training on the CPU"
)]
struct Cli {
    /// Worker threads; 1 selects the strictly sequential path.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pool a directory of frames into a dynamic image.
    Dynimg(DynimgArgs),
    /// Train on a manifest with the repeated-split protocol.
    Train(TrainArgs),
    /// Evaluate a checkpoint on every clip of a manifest.
    Eval(EvalArgs),
    /// Print learnable parameter counts per node.
    Params(ParamsArgs),
    /// Dump feature-map grids of one node for an input image.
    Inspect(InspectArgs),
    /// Write a seeded synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PoolMode {
    Exact,
    Approx,
}

#[derive(Args, Debug)]
struct DynimgArgs {
    /// Directory of PPM frames, ordered by file name.
    #[arg(long, value_name = "DIR")]
    frames: PathBuf,
    #[arg(long, value_enum)]
    mode: PoolMode,
    /// Regularization weight of the exact solver.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Iteration cap of the exact solver.
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Output PPM image.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also write the raw map as little-endian f32 (height, width, RGB order).
    #[arg(long, value_name = "FILE")]
    raw: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    #[arg(long, value_name = "FILE")]
    classes: PathBuf,
    /// Graph config (JSON).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Checkpoint of the repeat with the best validation accuracy.
    #[arg(long, value_name = "CKPT")]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 25)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.0)]
    momentum: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Train on the unaugmented images only.
    #[arg(long)]
    no_augment: bool,
    /// Loss curve of the saved repeat (epoch, train_loss, val_accuracy).
    #[arg(long, value_name = "FILE")]
    curve: Option<PathBuf>,
    /// Row-normalized test confusion matrix summed over repeats.
    #[arg(long, value_name = "FILE")]
    confusion: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_name = "CKPT")]
    model: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    #[arg(long, value_name = "FILE")]
    classes: PathBuf,
    #[arg(long, value_name = "FILE")]
    confusion: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ParamsArgs {
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[arg(long, value_name = "CKPT")]
    model: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Input dynamic image; resized to the network input when needed.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "NAME")]
    node: String,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 20)]
    per_class: usize,
    #[arg(long, default_value_t = 8)]
    frames: usize,
    /// Frame side length in pixels.
    #[arg(long, default_value_t = 112)]
    size: usize,
    #[arg(long)]
    seed: u64,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid!("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| invalid!("--threads: {e}"))?;
    pool.install(|| match cli.command {
        Command::Dynimg(a) => dynimg(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Params(a) => params(a),
        Command::Inspect(a) => inspect(a),
        Command::Synth(a) => synth(a),
    })
}

fn stdout_text(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

fn load_network(config: &Path) -> Result<Network> {
    Network::new(GraphSpec::load(config)?)
}

fn dynimg(a: DynimgArgs) -> Result<()> {
    let frames = load_frame_sequence(&a.frames)?;
    let cfg = RankPoolConfig {
        delta: a.delta,
        max_iters: a.iters,
        mode: match a.mode {
            PoolMode::Exact => RankPoolMode::Exact,
            PoolMode::Approx => RankPoolMode::Approximate,
        },
        ..RankPoolConfig::default()
    };
    info!(
        "pooling {} frames from {}",
        frames.len(),
        a.frames.display()
    );
    let (map, image) = dynamic_image(&frames, &cfg)?;
    if let Some(obj) = map.objective_value {
        info!("objective {obj:.6} after {} iterations", map.iterations);
    }
    write_ppm(&a.out, &image)?;
    if let Some(raw) = &a.raw {
        let bytes: Vec<u8> = map
            .weights
            .iter()
            .flat_map(|&v| (v as f32).to_le_bytes())
            .collect();
        fs::write(raw, bytes).map_err(|e| Error::io(raw, e))?;
    }
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let net = load_network(&a.config)?;
    let manifest = Manifest::load(&a.manifest, &a.classes)?;
    let size = net.input_shape()[1];
    info!("building dynamic images for {} clips", manifest.len());
    let data = load_dataset(&manifest, size, &RankPoolConfig::default())?;
    let cfg = TrainConfig {
        learning_rate: a.lr,
        batch_size: a.batch,
        epochs: a.epochs,
        momentum: a.momentum,
        seed: a.seed,
        augmentation: !a.no_augment,
        stop_at_train_accuracy: None,
    };
    if a.repeats == 0 {
        return Err(invalid!("--repeats must be at least 1"));
    }
    let outcome = train_model(&net, &data, &cfg, &SplitPlan::new(a.repeats, a.seed))?;
    let best = outcome.best_repeat();
    save_checkpoint(&best.fit.params, net.spec().digest(), &a.out)?;
    info!("saved checkpoint to {}", a.out.display());
    if let Some(path) = &a.curve {
        write_curve_csv(path, &best.fit.curve)?;
    }
    if let Some(path) = &a.confusion {
        write_confusion_csv(path, &outcome.metrics, &data.class_names)?;
    }
    stdout_text(&metrics_report(&outcome.metrics, &data.class_names)?)
}

fn eval(a: EvalArgs) -> Result<()> {
    let net = load_network(&a.config)?;
    let params = load_checkpoint(&a.model, net.spec().digest())?;
    params.check_against(net.spec(), net.report())?;
    let manifest = Manifest::load(&a.manifest, &a.classes)?;
    if manifest.classes.len() != net.classes() {
        return Err(invalid!(
            "{} lists {} classes but the model has {}",
            a.classes.display(),
            manifest.classes.len(),
            net.classes()
        ));
    }
    let data = load_dataset(&manifest, net.input_shape()[1], &RankPoolConfig::default())?;
    let images: Vec<_> = data.images.iter().collect();
    let metrics = evaluate(&net, &params, &images, &data.labels)?;
    if let Some(path) = &a.confusion {
        write_confusion_csv(path, &metrics, &data.class_names)?;
    }
    stdout_text(&metrics_report(&metrics, &data.class_names)?)
}

fn params(a: ParamsArgs) -> Result<()> {
    let spec = GraphSpec::load(&a.config)?;
    let report = param_count(&spec)?;
    let mut text = format!(
        "{:<12} {:<8} {:>10} {:>8} {:>10}\n",
        "node", "op", "weights", "biases", "total"
    );
    for n in report.per_node.iter().filter(|n| n.total() > 0) {
        let kind = spec.node(&n.node).map(|s| s.op.kind()).unwrap_or("?");
        text.push_str(&format!(
            "{:<12} {:<8} {:>10} {:>8} {:>10}\n",
            n.node,
            kind,
            n.weights,
            n.biases,
            n.total()
        ));
    }
    text.push_str(&format!(
        "backbone {}\ntotal {}\n",
        report.backbone, report.total
    ));
    stdout_text(&text)
}

fn inspect(a: InspectArgs) -> Result<()> {
    let net = load_network(&a.config)?;
    let params = load_checkpoint(&a.model, net.spec().digest())?;
    params.check_against(net.spec(), net.report())?;
    if net.spec().node(&a.node).is_none() {
        return Err(invalid!(
            "--node: no node named `{}` in {}",
            a.node,
            a.config.display()
        ));
    }
    let shape = net.input_shape();
    let image = read_ppm(&a.input)?;
    let image = resize_bilinear(&image, shape[2], shape[1]);
    let batch = crate::data::image::images_to_batch(&[&image])?;
    let (_, trace) = net.forward(&params, &batch, Mode::Eval, 0)?;
    let written = dump_feature_maps(&trace, &a.node, &a.out)?;
    let list: String = written
        .iter()
        .map(|p| format!("{}\n", p.display()))
        .collect();
    stdout_text(&list)
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        classes: a.classes,
        clips_per_class: a.per_class,
        frames: a.frames,
        size: a.size,
        seed: a.seed,
    };
    let manifest = generate_synthetic_dataset(&a.out, &cfg)?;
    info!("wrote {} clips to {}", manifest.len(), a.out.display());
    Ok(())
}
