//! Raster and mask primitives shared by every other module: pixel storage,
//! resizing, rotation with pre-scaling, and value clipping.
//!
//! Images are 8-bit RGB, row-major. Masks carry one class label per pixel
//! from the four-class scheme used throughout the toolkit.

use crate::error::{Error, Result};

pub const CLASS_BACKGROUND: u8 = 0;
pub const CLASS_ASH: u8 = 1;
pub const CLASS_VEGETATION: u8 = 2;
pub const CLASS_FIRE: u8 = 3;
pub const NUM_CLASSES: usize = 4;
pub const CLASS_NAMES: [&str; NUM_CLASSES] = ["background", "ash", "vegetation", "fire"];

/// Clamp a real value into the 8-bit range, rounding to nearest.
#[inline]
pub fn clip_u8(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

/// 8-bit RGB image, row-major, three channels per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        let expected = width as usize * height as usize * 3;
        if data.len() != expected {
            return Err(Error::InvalidParam(format!(
                "raster data length {} != {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self { width, height, data })
    }

    /// Uniform image of a single color.
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgb);
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Bilinear resize to exactly `(w, h)`. Same-size resize is the identity.
    pub fn resize(&self, w: u32, h: u32) -> Result<Raster> {
        if w == 0 || h == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut out = Vec::with_capacity(w as usize * h as usize * 3);
        let sx_scale = self.width as f64 / w as f64;
        let sy_scale = self.height as f64 / h as f64;
        for y in 0..h {
            let sy = ((y as f64 + 0.5) * sy_scale - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = sy.floor() as u32;
            let y1 = (y0 + 1).min(self.height - 1);
            let fy = sy - y0 as f64;
            for x in 0..w {
                let sx = ((x as f64 + 0.5) * sx_scale - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = sx.floor() as u32;
                let x1 = (x0 + 1).min(self.width - 1);
                let fx = sx - x0 as f64;
                let p00 = self.get(x0, y0);
                let p10 = self.get(x1, y0);
                let p01 = self.get(x0, y1);
                let p11 = self.get(x1, y1);
                for c in 0..3 {
                    let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
                    let bot = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
                    out.push(clip_u8(top * (1.0 - fy) + bot * fy));
                }
            }
        }
        Raster::new(w, h, out)
    }

    /// Scale about the center by `prescale`, rotate by `angle` degrees, and
    /// center-crop back to the original dimensions.
    ///
    /// Sampling is bilinear with clamp-to-edge, so no black fill ever appears;
    /// with `prescale` ≥ √2 on square-ish frames every sample falls inside the
    /// scaled image anyway.
    pub fn rotate_prescaled(&self, angle_deg: f64, prescale: f64) -> Raster {
        let (sin, cos) = angle_deg.to_radians().sin_cos();
        let cx = (self.width as f64 - 1.0) / 2.0;
        let cy = (self.height as f64 - 1.0) / 2.0;
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for x in 0..self.width {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                // Inverse transform: undo rotation, then undo the upscale.
                let ux = (cos * dx + sin * dy) / prescale + cx;
                let uy = (-sin * dx + cos * dy) / prescale + cy;
                let sx = ux.clamp(0.0, (self.width - 1) as f64);
                let sy = uy.clamp(0.0, (self.height - 1) as f64);
                let x0 = sx.floor() as u32;
                let y0 = sy.floor() as u32;
                let x1 = (x0 + 1).min(self.width - 1);
                let y1 = (y0 + 1).min(self.height - 1);
                let fx = sx - x0 as f64;
                let fy = sy - y0 as f64;
                let p00 = self.get(x0, y0);
                let p10 = self.get(x1, y0);
                let p01 = self.get(x0, y1);
                let p11 = self.get(x1, y1);
                for c in 0..3 {
                    let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
                    let bot = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
                    data.push(clip_u8(top * (1.0 - fy) + bot * fy));
                }
            }
        }
        Raster {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Per-pixel class labels for one image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMask {
    width: u32,
    height: u32,
    labels: Vec<u8>,
}

impl ClassMask {
    pub fn new(width: u32, height: u32, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::InvalidParam(format!(
                "mask label count {} != {}x{}",
                labels.len(),
                width,
                height
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::InvalidLabel(bad));
        }
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: u32, height: u32, label: u8) -> Result<Self> {
        if label as usize >= NUM_CLASSES {
            return Err(Error::InvalidLabel(label));
        }
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            width,
            height,
            labels: vec![label; width as usize * height as usize],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, label: u8) {
        debug_assert!((label as usize) < NUM_CLASSES);
        self.labels[y as usize * self.width as usize + x as usize] = label;
    }

    /// Number of pixels labeled `class`.
    pub fn count(&self, class: u8) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// Nearest-neighbor resize; labels are never blended.
    pub fn resize(&self, w: u32, h: u32) -> Result<ClassMask> {
        if w == 0 || h == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut labels = Vec::with_capacity(w as usize * h as usize);
        let sx_scale = self.width as f64 / w as f64;
        let sy_scale = self.height as f64 / h as f64;
        for y in 0..h {
            let sy = (((y as f64 + 0.5) * sy_scale).floor() as u32).min(self.height - 1);
            for x in 0..w {
                let sx = (((x as f64 + 0.5) * sx_scale).floor() as u32).min(self.width - 1);
                labels.push(self.get(sx, sy));
            }
        }
        Ok(ClassMask { width: w, height: h, labels })
    }

    /// Mask counterpart of [`Raster::rotate_prescaled`] with nearest-neighbor
    /// sampling so labels stay valid.
    pub fn rotate_prescaled(&self, angle_deg: f64, prescale: f64) -> ClassMask {
        let (sin, cos) = angle_deg.to_radians().sin_cos();
        let cx = (self.width as f64 - 1.0) / 2.0;
        let cy = (self.height as f64 - 1.0) / 2.0;
        let mut labels = Vec::with_capacity(self.labels.len());
        for y in 0..self.height {
            for x in 0..self.width {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                let ux = (cos * dx + sin * dy) / prescale + cx;
                let uy = (-sin * dx + cos * dy) / prescale + cy;
                let sx = (ux + 0.5).floor().clamp(0.0, (self.width - 1) as f64) as u32;
                let sy = (uy + 0.5).floor().clamp(0.0, (self.height - 1) as f64) as u32;
                labels.push(self.get(sx, sy));
            }
        }
        ClassMask {
            width: self.width,
            height: self.height,
            labels,
        }
    }
}

/// One dataset sample: an image, its mask, and a unique id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePair {
    pub image: Raster,
    pub mask: ClassMask,
    pub id: String,
}

impl SamplePair {
    pub fn new(image: Raster, mask: ClassMask, id: impl Into<String>) -> Result<Self> {
        if image.width() != mask.width() || image.height() != mask.height() {
            return Err(Error::DimensionMismatch(
                image.width(),
                image.height(),
                mask.width(),
                mask.height(),
            ));
        }
        Ok(Self {
            image,
            mask,
            id: id.into(),
        })
    }

    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }
}
