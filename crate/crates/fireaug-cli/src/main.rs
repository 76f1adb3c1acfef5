//! `fireaug` command line: dehaze, split, augment, eval, rank, stats, and
//! the full pipeline. Flags override keys from the optional TOML config;
//! failures exit nonzero with a JSON error on stderr.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};

use fireaug::augment::Method;
use fireaug::dataset::DatasetManifest;
use fireaug::pipeline::{
    self, load_config, run_pipeline, PipelineConfig, PipelineOutcome, Stage,
};

#[derive(Parser)]
#[command(name = "fireaug", version, about = "Wildfire segmentation dataset toolkit")]
struct Cli {
    /// TOML config file; command-line flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Top-level seed; every stage derives its own stream from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Input directory of paired `<id>.png` / `<id>_mask.png` files.
    #[arg(long, global = true, value_name = "DIR")]
    input: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dehaze every input image (dark channel prior + guided filter)
    Dehaze {
        /// Haze-reduction strength in [0, 1].
        #[arg(long)]
        omega: Option<f64>,
        /// Dark-channel window size (odd).
        #[arg(long)]
        patch: Option<u32>,
        /// Guided-filter radius in pixels.
        #[arg(long)]
        guided_radius: Option<u32>,
    },
    /// Assign train/val/test splits and write the manifest
    Split {
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        val: Option<usize>,
        #[arg(long)]
        test: Option<usize>,
    },
    /// Generate an augmented dataset from the input pairs
    Augment {
        /// rotation | brightness | contrast | std_copy_paste | ccpda
        #[arg(long)]
        method: Option<String>,
        /// Repetitions per (source, target) pair for copy-paste methods.
        #[arg(long)]
        r: Option<u32>,
        /// CCPDA erosion level (e.g. 0.0, 0.1, 0.2, 0.3).
        #[arg(long)]
        erosion_percent: Option<f64>,
        /// Minimum segment area for standard copy-paste.
        #[arg(long)]
        min_area: Option<usize>,
    },
    /// Score external prediction masks against the input ground truth
    Eval {
        /// Directory of prediction masks named `<id>.png`.
        #[arg(long, value_name = "DIR")]
        predictions: Option<PathBuf>,
        /// Label for the resulting metric record.
        #[arg(long)]
        method_name: Option<String>,
    },
    /// Rank metric rows (method, fire_fnr, veg_iou, total_iou) from a CSV
    Rank {
        #[arg(long, value_name = "FILE")]
        metrics: Option<PathBuf>,
    },
    /// Pixel composition of the masks referenced by a manifest
    Stats {
        /// Manifest CSV; defaults to `<out>/manifest.csv`.
        #[arg(long, value_name = "FILE")]
        manifest: Option<PathBuf>,
    },
    /// Run all stages configured in the config file, in order
    Pipeline,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("{}", serde_json::json!({ "error": format!("{err:#}") }));
        std::process::exit(1);
    }
}

fn print_ranking(outcome: &PipelineOutcome) {
    if let Some(report) = &outcome.report {
        println!(
            "{:<32} {:>8} {:>10} {:>9} {:>11}",
            "method", "F(x)", "fire-FNR", "veg-IoU", "total-IoU"
        );
        for rec in &report.ranking {
            println!(
                "{:<32} {:>8.4} {:>9.2}% {:>8.2}% {:>10.2}%",
                rec.method,
                rec.score,
                100.0 * rec.fire_fnr,
                100.0 * rec.veg_iou,
                100.0 * rec.total_iou
            );
        }
        if let Some(kb) = &report.keep_best {
            println!("keep-best retained: {} (best: {})", kb.retained.join(" -> "), kb.best);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path).with_context(|| "loading config")?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(input) = &cli.input {
        cfg.input_dir = input.clone();
    }

    match cli.command {
        Command::Dehaze { omega, patch, guided_radius } => {
            if let Some(v) = omega {
                cfg.dehaze.omega = v;
            }
            if let Some(v) = patch {
                cfg.dehaze.patch = v;
            }
            if let Some(v) = guided_radius {
                cfg.dehaze.guided_radius = v;
            }
            cfg.stages = vec![Stage::Dehaze];
            let outcome = run_pipeline(&cfg)?;
            println!(
                "dehazed {} images -> {}",
                outcome.prepared,
                cfg.output_dir.join("prepared").display()
            );
        }
        Command::Split { train, val, test } => {
            if let Some(v) = train {
                cfg.split.train = v;
            }
            if let Some(v) = val {
                cfg.split.val = v;
            }
            if let Some(v) = test {
                cfg.split.test = v;
            }
            cfg.stages = vec![Stage::Split];
            let outcome = run_pipeline(&cfg)?;
            println!(
                "split {} pairs {}:{}:{} -> {}",
                outcome.prepared,
                cfg.split.train,
                cfg.split.val,
                cfg.split.test,
                cfg.output_dir.join("manifest.csv").display()
            );
        }
        Command::Augment { method, r, erosion_percent, min_area } => {
            if let Some(name) = method {
                cfg.augment.method = name.parse::<Method>()?;
            }
            if let Some(v) = r {
                cfg.augment.r = v;
            }
            if let Some(v) = erosion_percent {
                cfg.augment.erosion_percent = v;
            }
            if let Some(v) = min_area {
                cfg.augment.min_area_std = v;
            }
            cfg.stages = vec![Stage::Augment];
            let outcome = run_pipeline(&cfg)?;
            println!(
                "{} {} records -> {}",
                outcome.augmented,
                cfg.augment.method,
                cfg.output_dir.join("augmented").display()
            );
        }
        Command::Eval { predictions, method_name } => {
            if predictions.is_some() {
                cfg.evaluate.predictions_dir = predictions;
            }
            if method_name.is_some() {
                cfg.evaluate.method_name = method_name;
            }
            cfg.stages = vec![Stage::Evaluate];
            let outcome = run_pipeline(&cfg)?;
            println!("evaluated {} pairs", outcome.evaluated);
            print_ranking(&outcome);
        }
        Command::Rank { metrics } => {
            if metrics.is_some() {
                cfg.rank.metrics_csv = metrics;
            }
            cfg.stages = vec![Stage::Rank];
            let outcome = run_pipeline(&cfg)?;
            print_ranking(&outcome);
        }
        Command::Stats { manifest } => {
            let path = manifest.unwrap_or_else(|| cfg.output_dir.join("manifest.csv"));
            let manifest = DatasetManifest::read_csv(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let base = path.parent().unwrap_or(Path::new("."));
            let stats = pipeline::pixel_stats_for_manifest(&manifest, base)?;
            print!("{}", stats.render());
        }
        Command::Pipeline => {
            let outcome = run_pipeline(&cfg)?;
            println!(
                "pipeline done: {} prepared, {} augmented, {} evaluated",
                outcome.prepared, outcome.augmented, outcome.evaluated
            );
            print_ranking(&outcome);
        }
    }
    Ok(())
}
