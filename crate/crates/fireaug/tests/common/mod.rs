//! Shared test oracles and fixtures. Every oracle here is written
//! independently of the implementation path it checks: set algebra over
//! absolute coordinates for morphology, double loops for metrics.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fireaug::morph::Segment;
use fireaug::raster::{ClassMask, Raster, SamplePair, CLASS_FIRE};

pub type Coords = BTreeSet<(i64, i64)>;

/// Kernel offsets for an odd square kernel.
fn kernel_offsets(size: u32) -> Vec<(i64, i64)> {
    let r = ((size - 1) / 2) as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            out.push((dx, dy));
        }
    }
    out
}

pub fn seg_coords(seg: &Segment) -> Coords {
    seg.set_coords().into_iter().collect()
}

/// Dilation as the union of kernel-offset shifts of the input set.
pub fn dilate_oracle(set: &Coords, kernel_size: u32) -> Coords {
    let mut out = Coords::new();
    for &(dx, dy) in &kernel_offsets(kernel_size) {
        for &(x, y) in set {
            out.insert((x + dx, y + dy));
        }
    }
    out
}

/// Erosion as the intersection of kernel-offset shifts of the input set.
pub fn erode_oracle(set: &Coords, kernel_size: u32) -> Coords {
    let mut out: Option<Coords> = None;
    for &(dx, dy) in &kernel_offsets(kernel_size) {
        let shifted: Coords = set.iter().map(|&(x, y)| (x - dx, y - dy)).collect();
        out = Some(match out {
            None => shifted,
            Some(acc) => acc.intersection(&shifted).copied().collect(),
        });
    }
    out.unwrap_or_default()
}

/// 8-connected components by repeated set expansion, as coordinate sets.
pub fn flood_fill_oracle(mask: &ClassMask, class: u8) -> Vec<Coords> {
    let mut remaining: Coords = Coords::new();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) == class {
                remaining.insert((x as i64, y as i64));
            }
        }
    }
    let mut components = Vec::new();
    while let Some(&start) = remaining.iter().next() {
        let mut comp = Coords::new();
        let mut frontier = vec![start];
        remaining.remove(&start);
        comp.insert(start);
        while let Some((x, y)) = frontier.pop() {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let p = (x + dx, y + dy);
                    if remaining.remove(&p) {
                        comp.insert(p);
                        frontier.push(p);
                    }
                }
            }
        }
        components.push(comp);
    }
    components
}

/// Per-pixel one-vs-rest counting for one class: (tp, fp, fn, tn).
pub fn confusion_oracle(pred: &ClassMask, gt: &ClassMask, class: u8) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut fnn, mut tn) = (0, 0, 0, 0);
    for y in 0..pred.height() {
        for x in 0..pred.width() {
            match (pred.get(x, y) == class, gt.get(x, y) == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                (false, false) => tn += 1,
            }
        }
    }
    (tp, fp, fnn, tn)
}

pub fn iou_oracle(pred: &ClassMask, gt: &ClassMask, class: u8) -> f64 {
    let (tp, fp, fnn, _) = confusion_oracle(pred, gt, class);
    let denom = tp + fp + fnn;
    if denom == 0 {
        1.0
    } else {
        tp as f64 / denom as f64
    }
}

pub fn fnr_oracle(pred: &ClassMask, gt: &ClassMask, class: u8) -> f64 {
    let (tp, _, fnn, _) = confusion_oracle(pred, gt, class);
    let denom = tp + fnn;
    if denom == 0 {
        0.0
    } else {
        fnn as f64 / denom as f64
    }
}

/// Random mask where each pixel is fire with probability `fire_prob`, else a
/// random non-fire class.
pub fn random_mask(rng: &mut ChaCha8Rng, w: u32, h: u32, fire_prob: f64) -> ClassMask {
    let labels = (0..w as usize * h as usize)
        .map(|_| {
            if rng.gen::<f64>() < fire_prob {
                CLASS_FIRE
            } else {
                rng.gen_range(0..3u8)
            }
        })
        .collect();
    ClassMask::new(w, h, labels).unwrap()
}

/// Random binary fire segment on a w x h grid (at least one set bit).
pub fn random_segment(rng: &mut ChaCha8Rng, w: u32, h: u32, density: f64) -> Segment {
    loop {
        let bits: Vec<bool> = (0..w as usize * h as usize)
            .map(|_| rng.gen::<f64>() < density)
            .collect();
        if bits.iter().any(|&b| b) {
            let origin = (rng.gen_range(-4..20), rng.gen_range(-4..20));
            return Segment::from_bits(w, h, bits, origin, CLASS_FIRE).tight_cropped();
        }
    }
}

/// Deterministic synthetic sample: vegetation/ash background with a few
/// solid fire blobs large enough to survive the standard copy-paste filter.
pub fn synthetic_pair(id: &str, size: u32, seed: u64) -> SamplePair {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = Raster::filled(size, size, [0, 0, 0]);
    let mut mask = ClassMask::filled(size, size, 0).unwrap();

    for y in 0..size {
        for x in 0..size {
            // Vegetation field with ash patches in the top band.
            let (label, rgb) = if y < size / 4 && (x / 16) % 2 == 0 {
                (1u8, [110u8, 108, 100])
            } else {
                (2u8, [30 + (x % 40) as u8, 90 + (y % 60) as u8, 35])
            };
            mask.set(x, y, label);
            img.set(x, y, rgb);
        }
    }

    let blobs = rng.gen_range(1..=3);
    for _ in 0..blobs {
        let side = rng.gen_range(12..=20.min(size / 3));
        let x0 = rng.gen_range(0..size - side);
        let y0 = rng.gen_range(0..size - side);
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                mask.set(x, y, CLASS_FIRE);
                img.set(
                    x,
                    y,
                    [220 + rng.gen_range(0..36) as u8, rng.gen_range(40..120), 10],
                );
            }
        }
    }
    SamplePair::new(img, mask, id).unwrap()
}

/// The eight-source fixture used by cardinality and pixel-total checks.
pub fn eight_sources(size: u32) -> Vec<SamplePair> {
    (0..8)
        .map(|i| synthetic_pair(&format!("src{i}"), size, 1000 + i as u64))
        .collect()
}
