//! Segmentation scoring substrate: one-vs-rest confusion counts, IoU and
//! FNR, and per-class pixel composition statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{ClassMask, CLASS_NAMES, NUM_CLASSES};

/// One-vs-rest pixel counts for a single class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
}

impl ClassCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

/// Confusion counts accumulated over an evaluation set for a set of classes.
///
/// Accumulation is additive: merging per-image stats in any order equals one
/// sequential pass (integer counts, no rounding).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfusionStats {
    classes: Vec<u8>,
    counts: Vec<ClassCounts>,
}

impl ConfusionStats {
    pub fn new(classes: &[u8]) -> Self {
        Self {
            classes: classes.to_vec(),
            counts: vec![ClassCounts::default(); classes.len()],
        }
    }

    /// Stats over the full four-class scheme.
    pub fn all_classes() -> Self {
        Self::new(&[0, 1, 2, 3])
    }

    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    pub fn class(&self, c: u8) -> Option<&ClassCounts> {
        self.classes
            .iter()
            .position(|&x| x == c)
            .map(|i| &self.counts[i])
    }

    /// Add one prediction/ground-truth pair to the counts.
    pub fn accumulate(&mut self, pred: &ClassMask, gt: &ClassMask) -> Result<()> {
        if (pred.width(), pred.height()) != (gt.width(), gt.height()) {
            return Err(Error::DimensionMismatch(
                pred.width(),
                pred.height(),
                gt.width(),
                gt.height(),
            ));
        }
        for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
            for (ci, &c) in self.classes.iter().enumerate() {
                let counts = &mut self.counts[ci];
                match (p == c, g == c) {
                    (true, true) => counts.true_pos += 1,
                    (true, false) => counts.false_pos += 1,
                    (false, true) => counts.false_neg += 1,
                    (false, false) => counts.true_neg += 1,
                }
            }
        }
        Ok(())
    }

    /// Merge counts from another accumulation over the same classes.
    pub fn merge(&mut self, other: &ConfusionStats) {
        assert_eq!(self.classes, other.classes, "class sets differ");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.true_pos += b.true_pos;
            a.false_pos += b.false_pos;
            a.false_neg += b.false_neg;
            a.true_neg += b.true_neg;
        }
    }
}

/// One-shot confusion counts for a single pair.
pub fn confusion(pred: &ClassMask, gt: &ClassMask, classes: &[u8]) -> Result<ConfusionStats> {
    let mut stats = ConfusionStats::new(classes);
    stats.accumulate(pred, gt)?;
    Ok(stats)
}

/// Intersection over union `TP / (TP + FP + FN)` for one class.
///
/// A class absent from both masks counts as vacuous agreement: IoU = 1.
pub fn iou(stats: &ConfusionStats, c: u8) -> f64 {
    let counts = stats.class(c).expect("class not tracked in stats");
    let denom = counts.true_pos + counts.false_pos + counts.false_neg;
    if denom == 0 {
        1.0
    } else {
        counts.true_pos as f64 / denom as f64
    }
}

/// False negative rate `FN / (TP + FN)`; 0 when the class has no positives.
pub fn fnr(stats: &ConfusionStats, c: u8) -> f64 {
    let counts = stats.class(c).expect("class not tracked in stats");
    let denom = counts.true_pos + counts.false_neg;
    if denom == 0 {
        0.0
    } else {
        counts.false_neg as f64 / denom as f64
    }
}

/// How the overall IoU aggregates the per-class counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TotalIouMode {
    /// Unweighted mean of the per-class IoUs.
    #[default]
    Mean,
    /// Pooled counts: sum(TP) / sum(TP + FP + FN) over classes.
    Micro,
}

/// Aggregate IoU over all classes tracked by `stats`.
pub fn total_iou(stats: &ConfusionStats, mode: TotalIouMode) -> f64 {
    match mode {
        TotalIouMode::Mean => {
            let sum: f64 = stats.classes().iter().map(|&c| iou(stats, c)).sum();
            sum / stats.classes().len() as f64
        }
        TotalIouMode::Micro => {
            let (mut tp, mut denom) = (0u64, 0u64);
            for &c in stats.classes() {
                let counts = stats.class(c).unwrap();
                tp += counts.true_pos;
                denom += counts.true_pos + counts.false_pos + counts.false_neg;
            }
            if denom == 0 {
                1.0
            } else {
                tp as f64 / denom as f64
            }
        }
    }
}

/// One method's evaluation row: raw metrics plus the composite score.
/// All fractions are in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub method: String,
    pub fire_fnr: f64,
    pub veg_iou: f64,
    pub total_iou: f64,
    #[serde(default)]
    pub score: f64,
}

impl MetricRecord {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fire_fnr", self.fire_fnr),
            ("veg_iou", self.veg_iou),
            ("total_iou", self.total_iou),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParam(format!(
                    "{name} = {v} outside [0, 1] for '{}'",
                    self.method
                )));
            }
        }
        Ok(())
    }
}

/// Pixel composition of a set of masks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PixelStats {
    /// Count per class id 0..=3.
    pub counts: [u64; NUM_CLASSES],
    /// Percentage per class (full precision; round at rendering).
    pub percents: [f64; NUM_CLASSES],
    pub total: u64,
}

impl PixelStats {
    pub fn from_masks<'a>(masks: impl IntoIterator<Item = &'a ClassMask>) -> Self {
        let mut counts = [0u64; NUM_CLASSES];
        let mut total = 0u64;
        for mask in masks {
            for &l in mask.labels() {
                counts[l as usize] += 1;
            }
            total += mask.labels().len() as u64;
        }
        let mut percents = [0.0; NUM_CLASSES];
        if total > 0 {
            for c in 0..NUM_CLASSES {
                percents[c] = 100.0 * counts[c] as f64 / total as f64;
            }
        }
        Self { counts, percents, total }
    }

    /// Table rendering with percentages to two decimals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (c, name) in CLASS_NAMES.iter().enumerate() {
            out.push_str(&format!(
                "{:<12} {:>12} {:>8.2}%\n",
                name, self.counts[c], self.percents[c]
            ));
        }
        out.push_str(&format!("{:<12} {:>12}\n", "total", self.total));
        out
    }
}
