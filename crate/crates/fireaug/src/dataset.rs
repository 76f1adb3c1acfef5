//! Dataset manifests and deterministic splitting.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::SamplePair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Val => write!(f, "val"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// One manifest row. `params_json` holds the serialized transform parameters
/// that, together with `seed` and the source ids, regenerate the record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub out_image: String,
    pub out_mask: String,
    pub method: String,
    pub source_id: String,
    pub target_id: String,
    pub params_json: String,
    pub seed: u64,
    pub split: Split,
}

/// The dataset as records: original pairs and/or augmented outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DatasetManifest {
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for rec in &records {
            if !seen.insert(rec.out_image.as_str()) {
                return Err(Error::DuplicateId(rec.out_image.clone()));
            }
        }
        Ok(Self { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for rec in &self.records {
            writer.serialize(rec)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let records = reader
            .deserialize()
            .collect::<std::result::Result<Vec<ManifestRecord>, _>>()?;
        DatasetManifest::new(records)
    }

    /// Check that every referenced file exists under `base`.
    pub fn verify_files(&self, base: &Path) -> Result<()> {
        for rec in &self.records {
            for p in [&rec.out_image, &rec.out_mask] {
                let full = base.join(p);
                if !full.exists() {
                    return Err(Error::io(
                        full,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "missing manifest file"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic split assignment: shuffle ids by seed, then deal the first
/// `train` to Train, the next `val` to Val, and the rest to Test.
pub fn assign_splits(
    ids: &[String],
    counts: (usize, usize, usize),
    seed: u64,
) -> Result<Vec<(String, Split)>> {
    let (tr, va, te) = counts;
    if tr + va + te != ids.len() {
        return Err(Error::SplitMismatch(tr + va + te, ids.len()));
    }
    let mut shuffled: Vec<String> = ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    Ok(shuffled
        .into_iter()
        .enumerate()
        .map(|(i, id)| {
            let split = if i < tr {
                Split::Train
            } else if i < tr + va {
                Split::Val
            } else {
                Split::Test
            };
            (id, split)
        })
        .collect())
}

/// Split a dataset of pairs into train/val/test, returning a manifest of the
/// source records tagged with their split. The test split is the control
/// group: augmentation refuses test-tagged sources downstream.
pub fn split_dataset(
    pairs: &[SamplePair],
    counts: (usize, usize, usize),
    seed: u64,
) -> Result<DatasetManifest> {
    let ids: Vec<String> = pairs.iter().map(|p| p.id.clone()).collect();
    let assignments = assign_splits(&ids, counts, seed)?;
    let records = pairs
        .iter()
        .map(|pair| {
            let split = assignments
                .iter()
                .find(|(id, _)| *id == pair.id)
                .map(|(_, s)| *s)
                .expect("every pair gets an assignment");
            ManifestRecord {
                out_image: format!("{}.png", pair.id),
                out_mask: format!("{}_mask.png", pair.id),
                method: "source".into(),
                source_id: pair.id.clone(),
                target_id: pair.id.clone(),
                params_json: "{}".into(),
                seed,
                split,
            }
        })
        .collect();
    DatasetManifest::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{ClassMask, Raster};

    fn pairs(n: usize) -> Vec<SamplePair> {
        (0..n)
            .map(|i| {
                SamplePair::new(
                    Raster::filled(2, 2, [i as u8, 0, 0]),
                    ClassMask::filled(2, 2, 0).unwrap(),
                    format!("img{i:02}"),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn split_8_2_10() {
        let manifest = split_dataset(&pairs(20), (8, 2, 10), 7).unwrap();
        let count = |s: Split| manifest.records.iter().filter(|r| r.split == s).count();
        assert_eq!(count(Split::Train), 8);
        assert_eq!(count(Split::Val), 2);
        assert_eq!(count(Split::Test), 10);
    }

    #[test]
    fn split_is_deterministic() {
        let a = split_dataset(&pairs(20), (8, 2, 10), 99).unwrap();
        let b = split_dataset(&pairs(20), (8, 2, 10), 99).unwrap();
        assert_eq!(a, b);
        let c = split_dataset(&pairs(20), (8, 2, 10), 100).unwrap();
        assert_ne!(a, c, "a different seed should shuffle differently");
    }

    #[test]
    fn split_all_train() {
        let manifest = split_dataset(&pairs(20), (20, 0, 0), 1).unwrap();
        assert!(manifest.records.iter().all(|r| r.split == Split::Train));
    }

    #[test]
    fn split_count_mismatch() {
        assert!(split_dataset(&pairs(20), (8, 2, 9), 1).is_err());
    }

    #[test]
    fn manifest_rejects_duplicate_outputs() {
        let rec = ManifestRecord {
            out_image: "a.png".into(),
            out_mask: "a_mask.png".into(),
            method: "source".into(),
            source_id: "a".into(),
            target_id: "a".into(),
            params_json: "{}".into(),
            seed: 0,
            split: Split::Train,
        };
        assert!(DatasetManifest::new(vec![rec.clone(), rec]).is_err());
    }

    #[test]
    fn manifest_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = split_dataset(&pairs(5), (3, 1, 1), 11).unwrap();
        let path = dir.path().join("manifest.csv");
        manifest.write_csv(&path).unwrap();
        assert_eq!(DatasetManifest::read_csv(&path).unwrap(), manifest);
    }
}
