//! Augmented dataset generation: rotation, brightness, contrast, standard
//! copy-paste, and centralized copy-paste (eroded fire cores).
//!
//! Every output record carries a [`Provenance`] sufficient to regenerate it
//! bit-exactly. Copy-paste records draw their randomness from a per-record
//! stream seeded by `hash(seed, method, source, target, rep)`, so generation
//! order (or parallel execution) cannot change any output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::color::{hsv_to_rgb, rgb_to_hsv};
use crate::dataset::{DatasetManifest, ManifestRecord, Split};
use crate::error::{Error, Result};
use crate::morph::{
    connected_components, dilate, erode, filter_by_area, rotate_segment_with, Kernel, Segment,
};
use crate::raster::{clip_u8, Raster, SamplePair, CLASS_FIRE};
use crate::util::stable_hash64;

/// Pre-scale factor that keeps every rotation angle free of out-of-frame fill.
pub const ROTATION_PRESCALE: f64 = 1.66;

/// Rotation angles: 5° through 350° in 15° steps. Starting at 5° avoids
/// duplicating the unrotated originals.
pub fn rotation_angles() -> [f64; 24] {
    std::array::from_fn(|k| 5.0 + 15.0 * k as f64)
}

/// Brightness factors 1.00 through 2.15 in 0.05 steps.
pub fn brightness_factors() -> [f64; 24] {
    std::array::from_fn(|k| (100 + 5 * k) as f64 / 100.0)
}

/// Contrast factors 0.50 through 1.65 in 0.05 steps.
pub fn contrast_alphas() -> [f64; 24] {
    std::array::from_fn(|k| (50 + 5 * k) as f64 / 100.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rotation,
    Brightness,
    Contrast,
    StdCopyPaste,
    Ccpda,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Method::Rotation => "rotation",
            Method::Brightness => "brightness",
            Method::Contrast => "contrast",
            Method::StdCopyPaste => "std_copy_paste",
            Method::Ccpda => "ccpda",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotation" => Ok(Method::Rotation),
            "brightness" => Ok(Method::Brightness),
            "contrast" => Ok(Method::Contrast),
            "std_copy_paste" => Ok(Method::StdCopyPaste),
            "ccpda" => Ok(Method::Ccpda),
            other => Err(Error::InvalidParam(format!("unknown method '{other}'"))),
        }
    }
}

/// Where pasted segments land on the target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PastePlacement {
    /// Uniform placement, retried until it avoids existing fire.
    Random,
    /// Bounding-box top-left anchored at `(x_frac * W, y_frac * H)`, with a
    /// fixed rotation angle; invalid placement is a hard error.
    Fixed { x_frac: f64, y_frac: f64, theta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub method: Method,
    /// Source image count; must equal the input list length.
    pub n: usize,
    /// Repetitions per (source, target) pair for copy-paste methods.
    pub r: u32,
    pub seed: u64,
    /// Square kernel size for standard copy-paste dilation.
    pub dilation_kernel: u32,
    /// Minimum area after rotation for standard copy-paste segments.
    pub min_area_std: usize,
    /// Fraction of the equivalent-circle radius to erode in CCPDA
    /// (0.0, 0.10, 0.20, 0.30, ...). Zero means identity.
    pub erosion_percent: f64,
    /// CCPDA minimum core area. `None` uses each segment's erosion kernel
    /// size, which is far below the standard 100-pixel threshold; the two
    /// thresholds are intentionally not reconciled.
    pub min_area_ccpda: Option<usize>,
    pub placement: PastePlacement,
    pub max_placement_tries: u32,
    /// Independent inclusion probability per segment; 1.0 pastes all.
    pub subset_prob: f64,
    /// Apply the standard dilation step in CCPDA too (off in study mode;
    /// keeping it would partially cancel the erosion).
    pub ccpda_dilate: bool,
    /// Apply a random per-segment rotation in CCPDA (off in study mode).
    pub ccpda_rotate: bool,
}

impl AugmentConfig {
    pub fn new(method: Method, n: usize) -> Self {
        Self {
            method,
            n,
            r: 1,
            seed: 0,
            dilation_kernel: 5,
            min_area_std: 100,
            erosion_percent: 0.0,
            min_area_ccpda: None,
            placement: PastePlacement::Random,
            max_placement_tries: 100,
            subset_prob: 1.0,
            ccpda_dilate: false,
            ccpda_rotate: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParam("n must be >= 1".into()));
        }
        if self.r == 0 {
            return Err(Error::InvalidParam("r must be >= 1".into()));
        }
        Kernel::new(self.dilation_kernel)?;
        if !(0.0..1.0).contains(&self.erosion_percent) {
            return Err(Error::InvalidParam(
                "erosion_percent must be in [0, 1)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.subset_prob) {
            return Err(Error::InvalidParam("subset_prob must be in [0, 1]".into()));
        }
        if self.max_placement_tries == 0 {
            return Err(Error::InvalidParam(
                "max_placement_tries must be >= 1".into(),
            ));
        }
        if let PastePlacement::Fixed { x_frac, y_frac, .. } = self.placement {
            if !(0.0..1.0).contains(&x_frac) || !(0.0..1.0).contains(&y_frac) {
                return Err(Error::InvalidParam(
                    "fixed placement fractions must be in [0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Everything needed to regenerate one output bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Method,
    pub source_id: String,
    pub target_id: String,
    pub params: serde_json::Value,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct RotationParams {
    angle: f64,
    prescale: f64,
}

#[derive(Serialize, Deserialize)]
struct BrightnessParams {
    factor: f64,
}

#[derive(Serialize, Deserialize)]
struct ContrastParams {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct CopyPasteParams {
    rep: u32,
    dilation_kernel: u32,
    min_area_std: usize,
    erosion_percent: f64,
    min_area_ccpda: Option<usize>,
    placement: PastePlacement,
    max_placement_tries: u32,
    subset_prob: f64,
    ccpda_dilate: bool,
    ccpda_rotate: bool,
}

impl CopyPasteParams {
    fn of(cfg: &AugmentConfig, rep: u32) -> Self {
        Self {
            rep,
            dilation_kernel: cfg.dilation_kernel,
            min_area_std: cfg.min_area_std,
            erosion_percent: cfg.erosion_percent,
            min_area_ccpda: cfg.min_area_ccpda,
            placement: cfg.placement,
            max_placement_tries: cfg.max_placement_tries,
            subset_prob: cfg.subset_prob,
            ccpda_dilate: cfg.ccpda_dilate,
            ccpda_rotate: cfg.ccpda_rotate,
        }
    }

    fn to_config(&self, method: Method, n: usize) -> AugmentConfig {
        AugmentConfig {
            method,
            n,
            r: self.rep + 1,
            seed: 0,
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

/// A binary fire segment plus the RGB pixels it covers in its source image,
/// one entry per bitmap cell.
#[derive(Clone, Debug)]
pub struct FireSegment {
    pub segment: Segment,
    pub pixels: Vec<[u8; 3]>,
}

impl FireSegment {
    /// Capture the source pixels under a segment's bitmap. The segment must
    /// already be clipped to the source frame.
    fn capture(pair: &SamplePair, segment: Segment) -> Self {
        let (ox, oy) = segment.origin();
        let mut pixels = vec![[0u8; 3]; segment.width() as usize * segment.height() as usize];
        for y in 0..segment.height() {
            for x in 0..segment.width() {
                if segment.get(x, y) {
                    let px = (ox + x as i64) as u32;
                    let py = (oy + y as i64) as u32;
                    pixels[y as usize * segment.width() as usize + x as usize] =
                        pair.image.get(px, py);
                }
            }
        }
        Self { segment, pixels }
    }

    fn rotated(&self, theta: f64) -> FireSegment {
        let (segment, pixels) = rotate_segment_with(&self.segment, &self.pixels, theta);
        FireSegment { segment, pixels }
    }
}

/// Standard copy-paste extraction: fire components → dilation → per-segment
/// rotation → area filter. The dilated footprint deliberately picks up
/// nearby background or class-adjacent pixels for context.
///
/// The rotation angle is uniform over `[0°, 360°)` per segment, except under
/// fixed placement where the configured angle applies.
pub fn extract_fire_segments_std(
    pair: &SamplePair,
    cfg: &AugmentConfig,
    rng: &mut impl Rng,
) -> Result<Vec<FireSegment>> {
    let kernel = Kernel::new(cfg.dilation_kernel)?;
    let mut out = Vec::new();
    for comp in connected_components(&pair.mask, CLASS_FIRE) {
        let dilated = dilate(&comp, kernel).clipped_to_frame(pair.width(), pair.height());
        let captured = FireSegment::capture(pair, dilated);
        let theta = match cfg.placement {
            PastePlacement::Fixed { theta, .. } => theta,
            PastePlacement::Random => rng.gen_range(0.0..360.0),
        };
        let rotated = captured.rotated(theta);
        if rotated.segment.area() >= cfg.min_area_std {
            out.push(rotated);
        }
    }
    Ok(out)
}

/// Erosion kernel for a CCPDA segment: half-width `max(1, round(p * r_eq))`
/// with `r_eq = sqrt(area / pi)`, so boundary removal scales with cluster
/// size. `p = 0` is the identity kernel.
pub fn ccpda_kernel(erosion_percent: f64, area: usize) -> Result<Kernel> {
    if erosion_percent == 0.0 {
        return Kernel::new(1);
    }
    let r_eq = (area as f64 / std::f64::consts::PI).sqrt();
    let half = (erosion_percent * r_eq).round().max(1.0) as u32;
    Kernel::new(2 * half + 1)
}

/// CCPDA extraction: fire components → erosion to the high-confidence core →
/// area filter. No dilation and no rotation unless the config flags enable
/// them (they are off in study mode).
pub fn extract_fire_segments_ccpda(
    pair: &SamplePair,
    cfg: &AugmentConfig,
) -> Result<Vec<FireSegment>> {
    let mut out = Vec::new();
    for comp in connected_components(&pair.mask, CLASS_FIRE) {
        let base = if cfg.ccpda_dilate {
            dilate(&comp, Kernel::new(cfg.dilation_kernel)?)
                .clipped_to_frame(pair.width(), pair.height())
        } else {
            comp
        };
        let kernel = ccpda_kernel(cfg.erosion_percent, base.area())?;
        let core = erode(&base, kernel);
        let min_area = cfg.min_area_ccpda.unwrap_or(kernel.size() as usize);
        let kept = filter_by_area(vec![core], min_area);
        for seg in kept {
            out.push(FireSegment::capture(pair, seg));
        }
    }
    Ok(out)
}

/// One successfully placed segment: its index in the input list and the
/// bounding-box top-left on the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placed {
    pub seg_index: usize,
    pub origin: (u32, u32),
}

/// Paste segments onto a target. A placement is valid iff the footprint lies
/// fully inside the frame and touches zero existing fire pixels (including
/// fire pasted earlier in this call). Random placement retries up to
/// `max_tries` and then skips the segment; fixed placement errors instead of
/// silently clipping.
pub fn paste(
    target: &SamplePair,
    segs: &[FireSegment],
    placement: PastePlacement,
    max_tries: u32,
    rng: &mut impl Rng,
    out_id: &str,
) -> Result<(SamplePair, Vec<Placed>)> {
    let w = target.width();
    let h = target.height();
    let mut image = target.image.clone();
    let mut mask = target.mask.clone();
    let mut placed = Vec::new();

    for (seg_index, fire_seg) in segs.iter().enumerate() {
        let seg = &fire_seg.segment;
        if seg.is_empty() {
            continue;
        }
        let (sw, sh) = (seg.width(), seg.height());
        if sw > w || sh > h {
            match placement {
                PastePlacement::Fixed { .. } => {
                    return Err(Error::Placement(format!(
                        "segment {sw}x{sh} exceeds {w}x{h} frame"
                    )))
                }
                PastePlacement::Random => continue,
            }
        }

        let fits = |mask: &crate::raster::ClassMask, ox: u32, oy: u32| -> bool {
            for y in 0..sh {
                for x in 0..sw {
                    if seg.get(x, y) && mask.get(ox + x, oy + y) == CLASS_FIRE {
                        return false;
                    }
                }
            }
            true
        };

        let origin = match placement {
            PastePlacement::Fixed { x_frac, y_frac, .. } => {
                let ox = (x_frac * w as f64).floor() as u32;
                let oy = (y_frac * h as f64).floor() as u32;
                if ox + sw > w || oy + sh > h {
                    return Err(Error::Placement(format!(
                        "fixed anchor ({ox},{oy}) pushes {sw}x{sh} segment outside {w}x{h} frame"
                    )));
                }
                if !fits(&mask, ox, oy) {
                    return Err(Error::Placement(format!(
                        "fixed anchor ({ox},{oy}) overlaps existing fire"
                    )));
                }
                Some((ox, oy))
            }
            PastePlacement::Random => {
                let mut found = None;
                for _ in 0..max_tries {
                    let ox = rng.gen_range(0..=w - sw);
                    let oy = rng.gen_range(0..=h - sh);
                    if fits(&mask, ox, oy) {
                        found = Some((ox, oy));
                        break;
                    }
                }
                found
            }
        };

        let Some((ox, oy)) = origin else {
            continue; // no valid position found; skip this segment
        };
        for y in 0..sh {
            for x in 0..sw {
                if seg.get(x, y) {
                    let rgb = fire_seg.pixels[y as usize * sw as usize + x as usize];
                    image.set(ox + x, oy + y, rgb);
                    mask.set(ox + x, oy + y, CLASS_FIRE);
                }
            }
        }
        placed.push(Placed {
            seg_index,
            origin: (ox, oy),
        });
    }

    Ok((SamplePair::new(image, mask, out_id)?, placed))
}

fn find_pair<'a>(d: &'a [SamplePair], id: &str) -> Result<&'a SamplePair> {
    d.iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::UnknownId(id.to_string()))
}

fn rotation_record(pair: &SamplePair, angle: f64, prescale: f64) -> Result<SamplePair> {
    SamplePair::new(
        pair.image.rotate_prescaled(angle, prescale),
        pair.mask.rotate_prescaled(angle, prescale),
        format!("{}_rot{:03}", pair.id, angle as u32),
    )
}

/// V-channel brightness scaling; the mask is reused unchanged.
pub fn scale_brightness(img: &Raster, factor: f64) -> Raster {
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let [r, g, b] = img.get(x, y);
            let (h, s, v) = rgb_to_hsv(r, g, b);
            let v = (v * factor).clamp(0.0, 255.0);
            let (r, g, b) = hsv_to_rgb(h, s, v);
            out.set(x, y, [r, g, b]);
        }
    }
    out
}

/// Per-channel contrast scaling `I' = I * alpha + beta`, clipped to 8-bit.
pub fn scale_contrast(img: &Raster, alpha: f64, beta: f64) -> Raster {
    let data = img
        .data()
        .iter()
        .map(|&v| clip_u8(v as f64 * alpha + beta))
        .collect();
    Raster::new(img.width(), img.height(), data).expect("dimensions preserved")
}

/// 24 rotated pairs per input at angles 5°..350°, prescaled by 1.66 so no
/// border fill appears; image and mask get the identical transform.
pub fn gen_rotation_set(d: &[SamplePair]) -> Result<Vec<(SamplePair, Provenance)>> {
    let mut out = Vec::with_capacity(d.len() * 24);
    for pair in d {
        for angle in rotation_angles() {
            let rotated = rotation_record(pair, angle, ROTATION_PRESCALE)?;
            let prov = Provenance {
                method: Method::Rotation,
                source_id: pair.id.clone(),
                target_id: pair.id.clone(),
                params: serde_json::to_value(RotationParams {
                    angle,
                    prescale: ROTATION_PRESCALE,
                })?,
                seed: 0,
            };
            out.push((rotated, prov));
        }
    }
    Ok(out)
}

/// 24 brightness-scaled pairs per input; masks are duplicated unmodified.
pub fn gen_brightness_set(d: &[SamplePair]) -> Result<Vec<(SamplePair, Provenance)>> {
    let mut out = Vec::with_capacity(d.len() * 24);
    for pair in d {
        for factor in brightness_factors() {
            let scaled = SamplePair::new(
                scale_brightness(&pair.image, factor),
                pair.mask.clone(),
                format!("{}_bright{factor:.2}", pair.id),
            )?;
            let prov = Provenance {
                method: Method::Brightness,
                source_id: pair.id.clone(),
                target_id: pair.id.clone(),
                params: serde_json::to_value(BrightnessParams { factor })?,
                seed: 0,
            };
            out.push((scaled, prov));
        }
    }
    Ok(out)
}

/// 24 contrast-scaled pairs per input; masks are duplicated unmodified.
pub fn gen_contrast_set(d: &[SamplePair]) -> Result<Vec<(SamplePair, Provenance)>> {
    let mut out = Vec::with_capacity(d.len() * 24);
    for pair in d {
        for alpha in contrast_alphas() {
            let scaled = SamplePair::new(
                scale_contrast(&pair.image, alpha, 0.0),
                pair.mask.clone(),
                format!("{}_con{alpha:.2}", pair.id),
            )?;
            let prov = Provenance {
                method: Method::Contrast,
                source_id: pair.id.clone(),
                target_id: pair.id.clone(),
                params: serde_json::to_value(ContrastParams { alpha, beta: 0.0 })?,
                seed: 0,
            };
            out.push((scaled, prov));
        }
    }
    Ok(out)
}

/// One copy-paste record from an already-seeded RNG stream. Shared by
/// generation and provenance replay so the two can never drift apart.
fn copy_paste_record(
    source: &SamplePair,
    target: &SamplePair,
    method: Method,
    cfg: &AugmentConfig,
    rng: &mut ChaCha8Rng,
    out_id: &str,
) -> Result<(SamplePair, Vec<Placed>)> {
    let mut segs = match method {
        Method::StdCopyPaste => extract_fire_segments_std(source, cfg, rng)?,
        Method::Ccpda => {
            let mut segs = extract_fire_segments_ccpda(source, cfg)?;
            if cfg.ccpda_rotate {
                segs = segs
                    .iter()
                    .map(|s| {
                        let theta = match cfg.placement {
                            PastePlacement::Fixed { theta, .. } => theta,
                            PastePlacement::Random => rng.gen_range(0.0..360.0),
                        };
                        s.rotated(theta)
                    })
                    .collect();
            }
            segs
        }
        other => {
            return Err(Error::InvalidParam(format!(
                "{other} is not a copy-paste method"
            )))
        }
    };
    if cfg.subset_prob < 1.0 {
        segs.retain(|_| rng.gen::<f64>() < cfg.subset_prob);
    }
    paste(
        target,
        &segs,
        cfg.placement,
        cfg.max_placement_tries,
        rng,
        out_id,
    )
}

fn copy_paste_out_id(method: Method, source: &str, target: &str, rep: u32) -> String {
    format!("{method}_{source}_to_{target}_r{rep}")
}

fn record_seed(cfg_seed: u64, method: Method, source: &str, target: &str, rep: u32) -> u64 {
    stable_hash64(
        cfg_seed,
        &[&method.to_string(), source, target, &rep.to_string()],
    )
}

/// Generate the full augmented set in memory.
///
/// Copy-paste methods iterate all ordered (source, target) pairs, source =
/// target included, over `r` repetitions: exactly `n² · r` records, even when
/// no segment could be placed. Rotation/brightness/contrast yield `24 · n`.
pub fn generate(d: &[SamplePair], cfg: &AugmentConfig) -> Result<Vec<(SamplePair, Provenance)>> {
    cfg.validate()?;
    if d.len() != cfg.n {
        return Err(Error::SourceCount {
            expected: cfg.n,
            got: d.len(),
        });
    }
    {
        let mut ids: Vec<&str> = d.iter().map(|p| p.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateId(dup[0].to_string()));
        }
    }

    match cfg.method {
        Method::Rotation => gen_rotation_set(d),
        Method::Brightness => gen_brightness_set(d),
        Method::Contrast => gen_contrast_set(d),
        Method::StdCopyPaste | Method::Ccpda => {
            let mut out = Vec::with_capacity(d.len() * d.len() * cfg.r as usize);
            for rep in 0..cfg.r {
                for source in d {
                    for target in d {
                        let seed = record_seed(cfg.seed, cfg.method, &source.id, &target.id, rep);
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let out_id = copy_paste_out_id(cfg.method, &source.id, &target.id, rep);
                        let (pair, _) =
                            copy_paste_record(source, target, cfg.method, cfg, &mut rng, &out_id)?;
                        let prov = Provenance {
                            method: cfg.method,
                            source_id: source.id.clone(),
                            target_id: target.id.clone(),
                            params: serde_json::to_value(CopyPasteParams::of(cfg, rep))?,
                            seed,
                        };
                        out.push((pair, prov));
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Rebuild one output pair from its provenance and the source dataset.
/// Bit-identical to the original generation.
pub fn regenerate(d: &[SamplePair], prov: &Provenance) -> Result<SamplePair> {
    let source = find_pair(d, &prov.source_id)?;
    match prov.method {
        Method::Rotation => {
            let p: RotationParams = serde_json::from_value(prov.params.clone())?;
            rotation_record(source, p.angle, p.prescale)
        }
        Method::Brightness => {
            let p: BrightnessParams = serde_json::from_value(prov.params.clone())?;
            SamplePair::new(
                scale_brightness(&source.image, p.factor),
                source.mask.clone(),
                format!("{}_bright{:.2}", source.id, p.factor),
            )
        }
        Method::Contrast => {
            let p: ContrastParams = serde_json::from_value(prov.params.clone())?;
            SamplePair::new(
                scale_contrast(&source.image, p.alpha, p.beta),
                source.mask.clone(),
                format!("{}_con{:.2}", source.id, p.alpha),
            )
        }
        Method::StdCopyPaste | Method::Ccpda => {
            let target = find_pair(d, &prov.target_id)?;
            let p: CopyPasteParams = serde_json::from_value(prov.params.clone())?;
            let cfg = p.to_config(prov.method, d.len());
            let mut rng = ChaCha8Rng::seed_from_u64(prov.seed);
            let out_id = copy_paste_out_id(prov.method, &prov.source_id, &prov.target_id, p.rep);
            let (pair, _) =
                copy_paste_record(source, target, prov.method, &cfg, &mut rng, &out_id)?;
            Ok(pair)
        }
    }
}

/// Generate, write the PNG tree under `out_dir/<method>/`, and write
/// `manifest.csv`. Outputs inherit the train split tag; the caller is
/// responsible for never feeding test-split sources in.
pub fn build_dataset(
    d: &[SamplePair],
    cfg: &AugmentConfig,
    out_dir: &std::path::Path,
) -> Result<DatasetManifest> {
    let outputs = generate(d, cfg)?;
    let method_dir = out_dir.join(cfg.method.to_string());
    std::fs::create_dir_all(&method_dir).map_err(|e| Error::io(&method_dir, e))?;

    let mut records = Vec::with_capacity(outputs.len());
    for (pair, prov) in &outputs {
        crate::pngio::write_pair(&method_dir, pair)?;
        records.push(ManifestRecord {
            out_image: format!("{}/{}.png", cfg.method, pair.id),
            out_mask: format!("{}/{}_mask.png", cfg.method, pair.id),
            method: prov.method.to_string(),
            source_id: prov.source_id.clone(),
            target_id: prov.target_id.clone(),
            params_json: serde_json::to_string(&prov.params)?,
            seed: prov.seed,
            split: Split::Train,
        });
    }
    let manifest = DatasetManifest::new(records)?;
    manifest.write_csv(&out_dir.join("manifest.csv"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{ClassMask, CLASS_BACKGROUND, CLASS_VEGETATION};

    fn fire_square_pair(id: &str, size: u32, fire_side: u32) -> SamplePair {
        let mut img = Raster::filled(size, size, [60, 120, 40]);
        let mut mask = ClassMask::filled(size, size, CLASS_VEGETATION).unwrap();
        let off = 2;
        for y in off..off + fire_side {
            for x in off..off + fire_side {
                img.set(x, y, [240, 80, 20]);
                mask.set(x, y, CLASS_FIRE);
            }
        }
        SamplePair::new(img, mask, id).unwrap()
    }

    fn no_fire_pair(id: &str, size: u32) -> SamplePair {
        SamplePair::new(
            Raster::filled(size, size, [10, 90, 10]),
            ClassMask::filled(size, size, CLASS_BACKGROUND).unwrap(),
            id,
        )
        .unwrap()
    }

    #[test]
    fn angle_and_factor_tables() {
        let angles = rotation_angles();
        assert_eq!(angles.len(), 24);
        assert_eq!(angles[0], 5.0);
        assert_eq!(angles[1], 20.0);
        assert_eq!(angles[23], 350.0);

        let factors = brightness_factors();
        assert_eq!(factors[0], 1.00);
        assert_eq!(factors[23], 2.15);

        let alphas = contrast_alphas();
        assert_eq!(alphas[0], 0.50);
        assert_eq!(alphas[23], 1.65);
    }

    #[test]
    fn rotation_set_counts_and_dims() {
        let d = vec![fire_square_pair("a", 32, 6)];
        let out = gen_rotation_set(&d).unwrap();
        assert_eq!(out.len(), 24);
        for (pair, prov) in &out {
            assert_eq!((pair.width(), pair.height()), (32, 32));
            assert_eq!(prov.method, Method::Rotation);
        }
    }

    #[test]
    fn brightness_identity_factor() {
        let d = vec![fire_square_pair("a", 16, 4)];
        let out = gen_brightness_set(&d).unwrap();
        assert_eq!(out.len(), 24);
        // Factor 1.00 is first: unchanged within ±1 per channel (HSV roundtrip).
        let first = &out[0].0;
        for (got, want) in first.image.data().iter().zip(d[0].image.data()) {
            assert!((*got as i32 - *want as i32).abs() <= 1);
        }
        // Masks are byte-identical for every factor.
        for (pair, _) in &out {
            assert_eq!(pair.mask, d[0].mask);
        }
    }

    #[test]
    fn brightness_clips_value_channel() {
        // V = 200, factor 2.15 clips to 255: gray input stays gray.
        let img = Raster::filled(2, 2, [200, 200, 200]);
        let out = scale_brightness(&img, 2.15);
        assert_eq!(out.get(0, 0), [255, 255, 255]);
    }

    #[test]
    fn contrast_alpha_one_is_identity() {
        let img = Raster::filled(3, 3, [100, 150, 200]);
        assert_eq!(scale_contrast(&img, 1.0, 0.0), img);
    }

    #[test]
    fn contrast_direct_formula() {
        let img = Raster::filled(1, 1, [100, 100, 100]);
        assert_eq!(scale_contrast(&img, 0.5, 0.0).get(0, 0), [50, 50, 50]);
    }

    #[test]
    fn contrast_set_count() {
        let d = vec![fire_square_pair("a", 16, 4), fire_square_pair("b", 16, 4)];
        let out = gen_contrast_set(&d).unwrap();
        assert_eq!(out.len(), 48);
        for (pair, _) in &out {
            assert_eq!(pair.mask, d[0].mask);
        }
    }

    #[test]
    fn std_extraction_keeps_large_segment() {
        let pair = fire_square_pair("a", 64, 20);
        let cfg = AugmentConfig::new(Method::StdCopyPaste, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let segs = extract_fire_segments_std(&pair, &cfg, &mut rng).unwrap();
        assert_eq!(segs.len(), 1);
        assert!(segs[0].segment.area() >= 400);
    }

    #[test]
    fn std_extraction_filters_small_blob() {
        // 5x5 blob dilates under K5 to a 9x9 square: 81 px, below the
        // 100-pixel threshold (area frozen from the shift-union oracle).
        let pair = fire_square_pair("a", 64, 5);
        let cfg = AugmentConfig::new(Method::StdCopyPaste, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);

        let comps = connected_components(&pair.mask, CLASS_FIRE);
        let dilated = dilate(&comps[0], Kernel::new(5).unwrap());
        assert_eq!(dilated.area(), 81);

        let segs = extract_fire_segments_std(&pair, &cfg, &mut rng).unwrap();
        assert!(segs.is_empty());
    }

    #[test]
    fn std_extraction_no_fire() {
        let pair = no_fire_pair("a", 32);
        let cfg = AugmentConfig::new(Method::StdCopyPaste, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(extract_fire_segments_std(&pair, &cfg, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn ccpda_zero_erosion_is_identity() {
        let pair = fire_square_pair("a", 32, 8);
        let mut cfg = AugmentConfig::new(Method::Ccpda, 1);
        cfg.erosion_percent = 0.0;
        let segs = extract_fire_segments_ccpda(&pair, &cfg).unwrap();
        let comps = connected_components(&pair.mask, CLASS_FIRE);
        assert_eq!(segs.len(), comps.len());
        assert_eq!(segs[0].segment, comps[0]);
    }

    #[test]
    fn ccpda_ten_percent_erodes_core() {
        // 10x10 solid square at 10%: r_eq = sqrt(100/pi) ≈ 5.64, half-width 1,
        // kernel K3, core 8x8 = 64 px (frozen from the erosion oracle).
        let pair = fire_square_pair("a", 32, 10);
        let mut cfg = AugmentConfig::new(Method::Ccpda, 1);
        cfg.erosion_percent = 0.10;
        let segs = extract_fire_segments_ccpda(&pair, &cfg).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].segment.area(), 64);
        assert_eq!(
            (segs[0].segment.width(), segs[0].segment.height()),
            (8, 8)
        );
    }

    #[test]
    fn ccpda_thin_segment_erodes_away() {
        // A 2-pixel-wide strip is thinner than any erosion kernel.
        let mut img = Raster::filled(32, 32, [0, 0, 0]);
        let mut mask = ClassMask::filled(32, 32, CLASS_BACKGROUND).unwrap();
        for y in 4..24 {
            for x in 4..6 {
                img.set(x, y, [250, 90, 20]);
                mask.set(x, y, CLASS_FIRE);
            }
        }
        let pair = SamplePair::new(img, mask, "strip").unwrap();
        let mut cfg = AugmentConfig::new(Method::Ccpda, 1);
        cfg.erosion_percent = 0.30;
        assert!(extract_fire_segments_ccpda(&pair, &cfg).unwrap().is_empty());
    }

    #[test]
    fn paste_disjoint_union_count() {
        let source = fire_square_pair("src", 64, 20);
        let target = no_fire_pair("tgt", 64);
        let cfg = AugmentConfig::new(Method::StdCopyPaste, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let segs = extract_fire_segments_std(&source, &cfg, &mut rng).unwrap();
        let before = target.mask.count(CLASS_FIRE);
        let (out, placed) = paste(
            &target,
            &segs,
            PastePlacement::Random,
            100,
            &mut rng,
            "out",
        )
        .unwrap();
        assert_eq!(placed.len(), 1);
        let pasted_area: usize = placed
            .iter()
            .map(|p| segs[p.seg_index].segment.area())
            .sum();
        assert_eq!(out.mask.count(CLASS_FIRE), before + pasted_area);
    }

    #[test]
    fn paste_fixed_anchor_quarter() {
        let source = fire_square_pair("src", 256, 30);
        let target = no_fire_pair("tgt", 256);
        let mut cfg = AugmentConfig::new(Method::Ccpda, 1);
        cfg.placement = PastePlacement::Fixed {
            x_frac: 0.25,
            y_frac: 0.25,
            theta: 0.0,
        };
        let segs = extract_fire_segments_ccpda(&source, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, placed) = paste(&target, &segs, cfg.placement, 100, &mut rng, "out").unwrap();
        assert_eq!(placed.len(), 1);
        assert_eq!(placed[0].origin, (64, 64));
    }

    #[test]
    fn paste_fixed_overlap_is_error() {
        let source = fire_square_pair("src", 64, 10);
        // Target already on fire everywhere: fixed placement must fail loudly.
        let target = SamplePair::new(
            Raster::filled(64, 64, [200, 50, 10]),
            ClassMask::filled(64, 64, CLASS_FIRE).unwrap(),
            "tgt",
        )
        .unwrap();
        let mut cfg = AugmentConfig::new(Method::Ccpda, 1);
        cfg.placement = PastePlacement::Fixed {
            x_frac: 0.25,
            y_frac: 0.25,
            theta: 0.0,
        };
        let segs = extract_fire_segments_ccpda(&source, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = paste(&target, &segs, cfg.placement, 100, &mut rng, "out");
        assert!(matches!(err, Err(Error::Placement(_))));
    }

    #[test]
    fn paste_random_skips_when_no_room() {
        let source = fire_square_pair("src", 64, 10);
        let target = SamplePair::new(
            Raster::filled(64, 64, [200, 50, 10]),
            ClassMask::filled(64, 64, CLASS_FIRE).unwrap(),
            "tgt",
        )
        .unwrap();
        let cfg = AugmentConfig::new(Method::StdCopyPaste, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let segs = extract_fire_segments_std(&source, &cfg, &mut rng).unwrap();
        let (out, placed) = paste(
            &target,
            &segs,
            PastePlacement::Random,
            25,
            &mut rng,
            "out",
        )
        .unwrap();
        assert!(placed.is_empty());
        assert_eq!(out.mask, target.mask);
    }

    #[test]
    fn generate_copy_paste_cardinality() {
        let d = vec![
            fire_square_pair("a", 48, 16),
            fire_square_pair("b", 48, 14),
            no_fire_pair("c", 48),
        ];
        let mut cfg = AugmentConfig::new(Method::StdCopyPaste, 3);
        cfg.r = 2;
        cfg.seed = 9;
        let out = generate(&d, &cfg).unwrap();
        assert_eq!(out.len(), 3 * 3 * 2);
    }

    #[test]
    fn generate_is_deterministic() {
        let d = vec![fire_square_pair("a", 48, 16), fire_square_pair("b", 48, 12)];
        let mut cfg = AugmentConfig::new(Method::StdCopyPaste, 2);
        cfg.r = 2;
        cfg.seed = 1234;
        let one = generate(&d, &cfg).unwrap();
        let two = generate(&d, &cfg).unwrap();
        for ((p1, v1), (p2, v2)) in one.iter().zip(&two) {
            assert_eq!(p1, p2);
            assert_eq!(v1, v2);
        }
    }

    #[test]
    fn regenerate_matches_generated() {
        let d = vec![fire_square_pair("a", 48, 16), fire_square_pair("b", 48, 12)];
        for method in [Method::StdCopyPaste, Method::Ccpda, Method::Rotation] {
            let mut cfg = AugmentConfig::new(method, 2);
            cfg.r = 1;
            cfg.seed = 77;
            cfg.erosion_percent = if method == Method::Ccpda { 0.10 } else { 0.0 };
            let out = generate(&d, &cfg).unwrap();
            for (pair, prov) in &out {
                let replayed = regenerate(&d, prov).unwrap();
                assert_eq!(&replayed, pair, "method {method}");
            }
        }
    }

    #[test]
    fn generate_rejects_wrong_n() {
        let d = vec![fire_square_pair("a", 32, 8)];
        let cfg = AugmentConfig::new(Method::StdCopyPaste, 2);
        assert!(matches!(
            generate(&d, &cfg),
            Err(Error::SourceCount { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = AugmentConfig::new(Method::Ccpda, 4);
        cfg.erosion_percent = 1.0;
        assert!(cfg.validate().is_err());
        cfg.erosion_percent = 0.2;
        cfg.dilation_kernel = 4;
        assert!(cfg.validate().is_err());
        cfg.dilation_kernel = 5;
        cfg.placement = PastePlacement::Fixed {
            x_frac: 1.0,
            y_frac: 0.0,
            theta: 0.0,
        };
        assert!(cfg.validate().is_err());
    }
}
