//! Pipeline orchestration: declarative config, stage execution in the fixed
//! order dehaze → split → downscale → augment → evaluate → rank, manifests,
//! and reports.
//!
//! Re-running with the same config and inputs is byte-identical: stage seeds
//! derive from the one top-level seed and nothing written carries a
//! timestamp.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{self, AugmentConfig, Method, PastePlacement};
use crate::dataset::{assign_splits, DatasetManifest, ManifestRecord, Split};
use crate::dehaze::{dehaze_pipeline, DehazeParams};
use crate::error::{Error, Result};
use crate::eval::{fnr, iou, total_iou, ConfusionStats, MetricRecord, PixelStats, TotalIouMode};
use crate::pngio;
use crate::raster::{SamplePair, CLASS_FIRE, CLASS_NAMES, CLASS_VEGETATION, NUM_CLASSES};
use crate::score::{keep_best_rank, rank_methods, ScoreWeights};
use crate::util::stable_hash64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Dehaze,
    Split,
    Downscale,
    Augment,
    Evaluate,
    Rank,
}

/// Canonical execution order; the config's stage list is a set.
const STAGE_ORDER: [Stage; 6] = [
    Stage::Dehaze,
    Stage::Split,
    Stage::Downscale,
    Stage::Augment,
    Stage::Evaluate,
    Stage::Rank,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitCounts {
    fn default() -> Self {
        Self { train: 8, val: 2, test: 10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetSize {
    pub width: u32,
    pub height: u32,
}

impl Default for TargetSize {
    fn default() -> Self {
        Self { width: 256, height: 256 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DehazeSettings {
    pub patch: u32,
    pub omega: f64,
    pub t_floor: f64,
    pub guided_radius: u32,
    pub guided_eps: f64,
}

impl Default for DehazeSettings {
    fn default() -> Self {
        let p = DehazeParams::<f64>::default();
        Self {
            patch: p.patch,
            omega: p.omega,
            t_floor: p.t_floor,
            guided_radius: p.guided_radius,
            guided_eps: p.guided_eps,
        }
    }
}

impl DehazeSettings {
    pub fn to_params(self) -> DehazeParams<f64> {
        DehazeParams {
            patch: self.patch,
            omega: self.omega,
            t_floor: self.t_floor,
            guided_radius: self.guided_radius,
            guided_eps: self.guided_eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentSettings {
    pub method: Method,
    pub r: u32,
    pub dilation_kernel: u32,
    pub min_area_std: usize,
    pub erosion_percent: f64,
    pub min_area_ccpda: Option<usize>,
    pub placement: PastePlacement,
    pub max_placement_tries: u32,
    pub subset_prob: f64,
    pub ccpda_dilate: bool,
    pub ccpda_rotate: bool,
}

impl Default for AugmentSettings {
    fn default() -> Self {
        let c = AugmentConfig::new(Method::StdCopyPaste, 1);
        Self {
            method: c.method,
            r: c.r,
            dilation_kernel: c.dilation_kernel,
            min_area_std: c.min_area_std,
            erosion_percent: c.erosion_percent,
            min_area_ccpda: c.min_area_ccpda,
            placement: c.placement,
            max_placement_tries: c.max_placement_tries,
            subset_prob: c.subset_prob,
            ccpda_dilate: c.ccpda_dilate,
            ccpda_rotate: c.ccpda_rotate,
        }
    }
}

impl AugmentSettings {
    pub fn to_config(&self, n: usize, seed: u64) -> AugmentConfig {
        AugmentConfig {
            method: self.method,
            n,
            r: self.r,
            seed,
            dilation_kernel: self.dilation_kernel,
            min_area_std: self.min_area_std,
            erosion_percent: self.erosion_percent,
            min_area_ccpda: self.min_area_ccpda,
            placement: self.placement,
            max_placement_tries: self.max_placement_tries,
            subset_prob: self.subset_prob,
            ccpda_dilate: self.ccpda_dilate,
            ccpda_rotate: self.ccpda_rotate,
        }
    }
}

/// How confusion counts aggregate over the evaluation set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accumulation {
    /// Sum counts over all pairs, then divide once.
    #[default]
    Global,
    /// Compute metrics per image, then average the metric values.
    PerImage,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateSettings {
    /// Directory of prediction masks named `<id>.png`, one per evaluated pair.
    pub predictions_dir: Option<PathBuf>,
    pub total_iou_mode: TotalIouMode,
    pub accumulation: Accumulation,
    /// Method label attached to the resulting metric record.
    pub method_name: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankSettings {
    /// Extra metric rows (method, fire_fnr, veg_iou, total_iou as fractions)
    /// to rank alongside any evaluate-stage result.
    pub metrics_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportSettings {
    pub csv: bool,
    pub json: bool,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self { csv: true, json: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub split: SplitCounts,
    pub target_size: TargetSize,
    pub dehaze: DehazeSettings,
    pub augment: AugmentSettings,
    pub evaluate: EvaluateSettings,
    pub rank: RankSettings,
    pub report: ReportSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input_dir: PathBuf::from("."),
            output_dir: PathBuf::from("out"),
            seed: 0,
            stages: Vec::new(),
            split: SplitCounts::default(),
            target_size: TargetSize::default(),
            dehaze: DehazeSettings::default(),
            augment: AugmentSettings::default(),
            evaluate: EvaluateSettings::default(),
            rank: RankSettings::default(),
            report: ReportSettings::default(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Derive a stage's RNG seed from the top-level seed.
pub fn stage_seed(seed: u64, stage: &str) -> u64 {
    stable_hash64(seed, &[stage])
}

/// Split tags recorded by an earlier run, if a manifest exists in the output
/// directory. Lets `split` / `augment` / `eval` run as separate invocations
/// while keeping the test split out of augmentation and in evaluation.
fn splits_from_manifest(output_dir: &Path) -> Result<Option<HashMap<String, Split>>> {
    let manifest_path = output_dir.join("manifest.csv");
    if !manifest_path.exists() {
        return Ok(None);
    }
    let manifest = DatasetManifest::read_csv(&manifest_path)?;
    Ok(Some(
        manifest
            .records
            .iter()
            .filter(|r| r.method == "source")
            .map(|r| (r.source_id.clone(), r.split))
            .collect(),
    ))
}

/// Per-class IoU/FNR block for the JSON report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerClassMetrics {
    pub class: String,
    pub iou: f64,
    pub fnr: f64,
}

/// Keep-best trace: which rows a sequential sweep would have retained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeepBestSummary {
    /// Methods retained, in input order: the first row, then every row whose
    /// score beat the best so far.
    pub retained: Vec<String>,
    pub best: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub weights: Vec<f64>,
    pub per_class: Vec<PerClassMetrics>,
    /// Records ranked by recomputed F(x), descending.
    pub ranking: Vec<MetricRecord>,
    pub keep_best: Option<KeepBestSummary>,
}

#[derive(Debug, Default)]
pub struct PipelineOutcome {
    pub prepared: usize,
    pub augmented: usize,
    pub evaluated: usize,
    pub report: Option<Report>,
}

/// Compute metrics for prediction/ground-truth mask pairs.
pub fn evaluate_predictions(
    pairs: &[(SamplePair, PathBuf)],
    settings: &EvaluateSettings,
) -> Result<(Vec<PerClassMetrics>, MetricRecord)> {
    if pairs.is_empty() {
        return Err(Error::Config("evaluate stage has no pairs to score".into()));
    }
    let method = settings
        .method_name
        .clone()
        .unwrap_or_else(|| "external".to_string());

    let mut per_image: Vec<ConfusionStats> = Vec::with_capacity(pairs.len());
    for (pair, pred_path) in pairs {
        let pred = pngio::read_mask_png(pred_path)?;
        let mut stats = ConfusionStats::all_classes();
        stats.accumulate(&pred, &pair.mask)?;
        per_image.push(stats);
    }

    let (per_class, fire_fnr, veg_iou, tot) = match settings.accumulation {
        Accumulation::Global => {
            let mut global = ConfusionStats::all_classes();
            for stats in &per_image {
                global.merge(stats);
            }
            let per_class = (0..NUM_CLASSES as u8)
                .map(|c| PerClassMetrics {
                    class: CLASS_NAMES[c as usize].to_string(),
                    iou: iou(&global, c),
                    fnr: fnr(&global, c),
                })
                .collect();
            (
                per_class,
                fnr(&global, CLASS_FIRE),
                iou(&global, CLASS_VEGETATION),
                total_iou(&global, settings.total_iou_mode),
            )
        }
        Accumulation::PerImage => {
            let n = per_image.len() as f64;
            let mean = |f: &dyn Fn(&ConfusionStats) -> f64| {
                per_image.iter().map(f).sum::<f64>() / n
            };
            let per_class = (0..NUM_CLASSES as u8)
                .map(|c| PerClassMetrics {
                    class: CLASS_NAMES[c as usize].to_string(),
                    iou: mean(&|s| iou(s, c)),
                    fnr: mean(&|s| fnr(s, c)),
                })
                .collect();
            (
                per_class,
                mean(&|s| fnr(s, CLASS_FIRE)),
                mean(&|s| iou(s, CLASS_VEGETATION)),
                mean(&|s| total_iou(s, settings.total_iou_mode)),
            )
        }
    };

    let record = MetricRecord {
        method,
        fire_fnr,
        veg_iou,
        total_iou: tot,
        score: 0.0,
    };
    Ok((per_class, record))
}

/// Read metric rows (method, fire_fnr, veg_iou, total_iou) from CSV.
pub fn read_metric_rows(path: &Path) -> Result<Vec<MetricRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows: Vec<MetricRecord> = reader.deserialize().collect::<std::result::Result<_, _>>()?;
    for row in &rows {
        row.validate()?;
    }
    Ok(rows)
}

/// Write `report.csv` / `report.json` into `dir` per the report settings.
pub fn write_report(report: &Report, dir: &Path, settings: ReportSettings) -> Result<()> {
    if settings.csv {
        let path = dir.join("report.csv");
        let mut writer = csv::Writer::from_path(&path)?;
        for rec in &report.ranking {
            writer.serialize(rec)?;
        }
        writer.flush().map_err(|e| Error::io(&path, e))?;
    }
    if settings.json {
        let path = dir.join("report.json");
        let json = serde_json::to_string_pretty(report)?;
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Execute the configured stages. Augmentation only ever sees train-tagged
/// sources, and evaluation scores the test split when one is known.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let enabled: Vec<Stage> = STAGE_ORDER
        .into_iter()
        .filter(|s| cfg.stages.contains(s))
        .collect();
    let mut outcome = PipelineOutcome::default();
    if enabled.is_empty() {
        return Ok(outcome);
    }

    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    // Ranking metric rows is the one stage that works without imagery.
    let needs_pairs = enabled.iter().any(|s| *s != Stage::Rank);
    // Evaluate and rank only read; they must not rewrite the prepared set or
    // clobber a manifest written by an earlier dataset-producing run.
    let mutates_dataset = enabled
        .iter()
        .any(|s| matches!(s, Stage::Dehaze | Stage::Split | Stage::Downscale | Stage::Augment));
    let mut pairs = if needs_pairs {
        pngio::load_pairs(&cfg.input_dir)?
    } else {
        Vec::new()
    };
    if needs_pairs && pairs.is_empty() {
        return Err(Error::Config(format!(
            "no image/mask pairs found in {}",
            cfg.input_dir.display()
        )));
    }
    let mut splits: Option<HashMap<String, Split>> = None;
    let mut metric_rows: Vec<MetricRecord> = Vec::new();
    let mut per_class: Vec<PerClassMetrics> = Vec::new();
    let mut manifest_records: Vec<ManifestRecord> = Vec::new();
    let mut want_report = false;

    for stage in enabled {
        match stage {
            Stage::Dehaze => {
                let params = cfg.dehaze.to_params();
                for pair in &mut pairs {
                    pair.image = dehaze_pipeline(&pair.image, &params)?;
                }
            }
            Stage::Split => {
                let ids: Vec<String> = pairs.iter().map(|p| p.id.clone()).collect();
                let assigned = assign_splits(
                    &ids,
                    (cfg.split.train, cfg.split.val, cfg.split.test),
                    stage_seed(cfg.seed, "split"),
                )?;
                splits = Some(assigned.into_iter().collect());
            }
            Stage::Downscale => {
                for pair in &mut pairs {
                    pair.image = pair.image.resize(cfg.target_size.width, cfg.target_size.height)?;
                    pair.mask = pair.mask.resize(cfg.target_size.width, cfg.target_size.height)?;
                }
            }
            Stage::Augment => {
                if splits.is_none() {
                    splits = splits_from_manifest(&cfg.output_dir)?;
                }
                let split_of = |id: &str| -> Split {
                    splits
                        .as_ref()
                        .and_then(|m| m.get(id).copied())
                        .unwrap_or(Split::Train)
                };
                let sources: Vec<SamplePair> = pairs
                    .iter()
                    .filter(|p| split_of(&p.id) == Split::Train)
                    .cloned()
                    .collect();
                if sources.is_empty() {
                    return Err(Error::Config(
                        "no train-split sources available to augment".into(),
                    ));
                }
                let aug_cfg = cfg
                    .augment
                    .to_config(sources.len(), stage_seed(cfg.seed, "augment"));
                let aug_dir = cfg.output_dir.join("augmented");
                std::fs::create_dir_all(&aug_dir).map_err(|e| Error::io(&aug_dir, e))?;
                let manifest = augment::build_dataset(&sources, &aug_cfg, &aug_dir)?;
                outcome.augmented = manifest.len();
                for mut rec in manifest.records {
                    rec.out_image = format!("augmented/{}", rec.out_image);
                    rec.out_mask = format!("augmented/{}", rec.out_mask);
                    manifest_records.push(rec);
                }
            }
            Stage::Evaluate => {
                let pred_dir = cfg.evaluate.predictions_dir.as_ref().ok_or_else(|| {
                    Error::Config("evaluate stage requires evaluate.predictions_dir".into())
                })?;
                if splits.is_none() {
                    splits = splits_from_manifest(&cfg.output_dir)?;
                }
                // Score against the test split when one exists, else everything.
                let eval_pairs: Vec<(SamplePair, PathBuf)> = pairs
                    .iter()
                    .filter(|p| match &splits {
                        Some(m) => m.get(&p.id) == Some(&Split::Test),
                        None => true,
                    })
                    .map(|p| (p.clone(), pred_dir.join(format!("{}.png", p.id))))
                    .collect();
                outcome.evaluated = eval_pairs.len();
                let (classes, record) = evaluate_predictions(&eval_pairs, &cfg.evaluate)?;
                per_class = classes;
                metric_rows.push(record);
                want_report = true;
            }
            Stage::Rank => {
                if let Some(csv_path) = &cfg.rank.metrics_csv {
                    metric_rows.extend(read_metric_rows(csv_path)?);
                }
                want_report = true;
            }
        }
    }

    // Persist the prepared working set and the master manifest, but only
    // when some stage actually produced or transformed data.
    if mutates_dataset {
        let prepared_dir = cfg.output_dir.join("prepared");
        std::fs::create_dir_all(&prepared_dir).map_err(|e| Error::io(&prepared_dir, e))?;
        for pair in &pairs {
            pngio::write_pair(&prepared_dir, pair)?;
            let split = splits
                .as_ref()
                .and_then(|m| m.get(&pair.id).copied())
                .unwrap_or(Split::Train);
            manifest_records.insert(
                outcome.prepared,
                ManifestRecord {
                    out_image: format!("prepared/{}.png", pair.id),
                    out_mask: format!("prepared/{}_mask.png", pair.id),
                    method: "source".into(),
                    source_id: pair.id.clone(),
                    target_id: pair.id.clone(),
                    params_json: "{}".into(),
                    seed: cfg.seed,
                    split,
                },
            );
            outcome.prepared += 1;
        }
        let manifest = DatasetManifest::new(manifest_records)?;
        manifest.write_csv(&cfg.output_dir.join("manifest.csv"))?;
        manifest.verify_files(&cfg.output_dir)?;
    }

    if want_report {
        let weights = ScoreWeights::roc(3)?;
        let ranking = rank_methods(&metric_rows, &weights)?;
        let keep_best = if metric_rows.len() > 1 {
            let trace = keep_best_rank(&metric_rows, &weights)?;
            Some(KeepBestSummary {
                retained: trace
                    .retained
                    .iter()
                    .map(|&i| metric_rows[i].method.clone())
                    .collect(),
                best: trace.best.method,
            })
        } else {
            None
        };
        let report = Report {
            weights: weights.values().to_vec(),
            per_class,
            ranking,
            keep_best,
        };
        write_report(&report, &cfg.output_dir, cfg.report)?;
        outcome.report = Some(report);
    }

    Ok(outcome)
}

/// Pixel composition over every mask referenced by a manifest.
pub fn pixel_stats_for_manifest(manifest: &DatasetManifest, base: &Path) -> Result<PixelStats> {
    let mut masks = Vec::with_capacity(manifest.len());
    for rec in &manifest.records {
        masks.push(pngio::read_mask_png(&base.join(&rec.out_mask))?);
    }
    Ok(PixelStats::from_masks(masks.iter()))
}
