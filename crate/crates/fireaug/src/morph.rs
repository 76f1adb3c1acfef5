//! Binary-mask machinery for copy-paste augmentation: connected components,
//! square-kernel dilation and erosion, segment rotation, and area filtering.

use crate::error::{Error, Result};
use crate::raster::ClassMask;

/// Square structuring element of odd size (e.g. 5 for a 5-pixel kernel).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Kernel {
    size: u32,
}

impl Kernel {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::InvalidParam(format!(
                "kernel size must be odd and >= 1, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Half-width: how far the kernel reaches from its center.
    pub fn radius(&self) -> u32 {
        (self.size - 1) / 2
    }
}

/// One connected component as a tight binary bitmap plus its offset in the
/// parent image. `origin` can be negative after dilation near a border.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    width: u32,
    height: u32,
    bits: Vec<bool>,
    origin: (i64, i64),
    area: usize,
    source_class: u8,
}

impl Segment {
    /// Build a segment from an explicit bitmap. The stored area is derived
    /// from the bits, never trusted from the caller.
    pub fn from_bits(
        width: u32,
        height: u32,
        bits: Vec<bool>,
        origin: (i64, i64),
        source_class: u8,
    ) -> Self {
        assert_eq!(bits.len(), width as usize * height as usize);
        let area = bits.iter().filter(|&&b| b).count();
        Self {
            width,
            height,
            bits,
            origin,
            area,
            source_class,
        }
    }

    /// Explicitly empty segment (e.g. fully eroded away).
    pub fn empty(source_class: u8) -> Self {
        Self {
            width: 0,
            height: 0,
            bits: Vec::new(),
            origin: (0, 0),
            area: 0,
            source_class,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.area == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn origin(&self) -> (i64, i64) {
        self.origin
    }

    pub fn area(&self) -> usize {
        self.area
    }

    pub fn source_class(&self) -> u8 {
        self.source_class
    }

    /// Bit at local bitmap coordinates.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    /// Set bits as absolute parent-image coordinates.
    pub fn set_coords(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(self.area);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push((self.origin.0 + x as i64, self.origin.1 + y as i64));
                }
            }
        }
        out
    }

    /// Re-crop the bitmap to the bounding box of its set bits, adjusting the
    /// origin. An all-clear bitmap collapses to the empty segment.
    pub fn tight_cropped(&self) -> Segment {
        let mut min_x = u32::MAX;
        let mut min_y = u32::MAX;
        let mut max_x = 0u32;
        let mut max_y = 0u32;
        let mut any = false;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    any = true;
                    min_x = min_x.min(x);
                    min_y = min_y.min(y);
                    max_x = max_x.max(x);
                    max_y = max_y.max(y);
                }
            }
        }
        if !any {
            return Segment::empty(self.source_class);
        }
        let w = max_x - min_x + 1;
        let h = max_y - min_y + 1;
        if (w, h) == (self.width, self.height) {
            return self.clone();
        }
        let mut bits = Vec::with_capacity(w as usize * h as usize);
        for y in min_y..=max_y {
            for x in min_x..=max_x {
                bits.push(self.get(x, y));
            }
        }
        Segment::from_bits(
            w,
            h,
            bits,
            (self.origin.0 + min_x as i64, self.origin.1 + min_y as i64),
            self.source_class,
        )
    }

    /// Intersect the bitmap with the parent frame `[0,w) x [0,h)`, dropping
    /// bits that fall outside, then tight-crop.
    pub fn clipped_to_frame(&self, frame_w: u32, frame_h: u32) -> Segment {
        if self.is_empty() {
            return self.clone();
        }
        let mut bits = self.bits.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                let px = self.origin.0 + x as i64;
                let py = self.origin.1 + y as i64;
                if px < 0 || py < 0 || px >= frame_w as i64 || py >= frame_h as i64 {
                    bits[y as usize * self.width as usize + x as usize] = false;
                }
            }
        }
        Segment::from_bits(self.width, self.height, bits, self.origin, self.source_class)
            .tight_cropped()
    }
}

/// All maximal 8-connected components of pixels labeled `class`, in row-major
/// discovery order. Returns an empty list when the class is absent.
pub fn connected_components(mask: &ClassMask, class: u8) -> Vec<Segment> {
    let w = mask.width() as usize;
    let h = mask.height() as usize;
    let mut visited = vec![false; w * h];
    let mut segments = Vec::new();

    for start in 0..w * h {
        if visited[start] || mask.labels()[start] != class {
            continue;
        }
        // Flood fill this component, tracking its bounding box.
        let mut stack = vec![start];
        visited[start] = true;
        let mut points = Vec::new();
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (w, h, 0usize, 0usize);
        while let Some(idx) = stack.pop() {
            let x = idx % w;
            let y = idx / w;
            points.push((x, y));
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let nidx = ny as usize * w + nx as usize;
                    if !visited[nidx] && mask.labels()[nidx] == class {
                        visited[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }
        let bw = (max_x - min_x + 1) as u32;
        let bh = (max_y - min_y + 1) as u32;
        let mut bits = vec![false; bw as usize * bh as usize];
        for (x, y) in points {
            bits[(y - min_y) * bw as usize + (x - min_x)] = true;
        }
        segments.push(Segment::from_bits(
            bw,
            bh,
            bits,
            (min_x as i64, min_y as i64),
            class,
        ));
    }
    segments
}

/// Minkowski dilation by a square kernel. The bitmap grows by the kernel
/// radius on each side and the origin shifts accordingly.
pub fn dilate(s: &Segment, k: Kernel) -> Segment {
    if s.is_empty() || k.size() == 1 {
        return s.clone();
    }
    let r = k.radius() as i64;
    let ow = s.width + 2 * k.radius();
    let oh = s.height + 2 * k.radius();
    let mut bits = vec![false; ow as usize * oh as usize];
    for y in 0..s.height {
        for x in 0..s.width {
            if !s.get(x, y) {
                continue;
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    let ox = x as i64 + r + dx;
                    let oy = y as i64 + r + dy;
                    bits[oy as usize * ow as usize + ox as usize] = true;
                }
            }
        }
    }
    Segment::from_bits(
        ow,
        oh,
        bits,
        (s.origin.0 - r, s.origin.1 - r),
        s.source_class,
    )
}

/// Minkowski erosion by a square kernel. Anything outside the bitmap counts
/// as background, so bits within the kernel radius of the bitmap edge erode
/// away. May return the empty segment.
pub fn erode(s: &Segment, k: Kernel) -> Segment {
    if s.is_empty() || k.size() == 1 {
        return s.clone();
    }
    let r = k.radius();
    if s.width <= 2 * r || s.height <= 2 * r {
        return Segment::empty(s.source_class);
    }
    let mut bits = vec![false; s.width as usize * s.height as usize];
    for y in r..s.height - r {
        for x in r..s.width - r {
            let mut keep = true;
            'window: for dy in 0..k.size() {
                for dx in 0..k.size() {
                    if !s.get(x - r + dx, y - r + dy) {
                        keep = false;
                        break 'window;
                    }
                }
            }
            if keep {
                bits[y as usize * s.width as usize + x as usize] = true;
            }
        }
    }
    Segment::from_bits(s.width, s.height, bits, s.origin, s.source_class).tight_cropped()
}

/// Rotate a segment's bitmap about its bounding-box center with
/// nearest-neighbor resampling, then tight-crop. The bounding-box center
/// stays fixed in parent coordinates (up to integer rounding).
pub fn rotate_segment(s: &Segment, theta_deg: f64) -> Segment {
    rotate_segment_with(s, &vec![(); s.bits.len()], theta_deg).0
}

/// Rotate a segment together with one payload value per bitmap cell (the
/// copy-paste path uses this to carry RGB pixels through the same mapping).
pub fn rotate_segment_with<T: Copy + Default>(
    s: &Segment,
    payload: &[T],
    theta_deg: f64,
) -> (Segment, Vec<T>) {
    assert_eq!(payload.len(), s.bits.len());
    if s.is_empty() {
        return (s.clone(), Vec::new());
    }

    let (sin, cos) = theta_deg.to_radians().sin_cos();
    let w = s.width as f64;
    let h = s.height as f64;
    // Rotated bounding box of the w x h rectangle; the 1e-9 slack keeps
    // right-angle rotations from picking up a spurious extra row/column.
    let ow = ((w * cos.abs() + h * sin.abs()) - 1e-9).ceil().max(1.0) as u32;
    let oh = ((w * sin.abs() + h * cos.abs()) - 1e-9).ceil().max(1.0) as u32;

    let cx = w / 2.0;
    let cy = h / 2.0;
    let ocx = ow as f64 / 2.0;
    let ocy = oh as f64 / 2.0;

    let mut bits = vec![false; ow as usize * oh as usize];
    let mut vals = vec![T::default(); ow as usize * oh as usize];
    for oy in 0..oh {
        for ox in 0..ow {
            let dx = ox as f64 + 0.5 - ocx;
            let dy = oy as f64 + 0.5 - ocy;
            // Inverse rotation back into the source bitmap.
            let ux = cos * dx + sin * dy + cx;
            let uy = -sin * dx + cos * dy + cy;
            let ix = ux.floor();
            let iy = uy.floor();
            if ix < 0.0 || iy < 0.0 || ix >= w || iy >= h {
                continue;
            }
            let src = iy as usize * s.width as usize + ix as usize;
            if s.bits[src] {
                let dst = oy as usize * ow as usize + ox as usize;
                bits[dst] = true;
                vals[dst] = payload[src];
            }
        }
    }

    // Keep the bbox center fixed in parent space.
    let origin = (
        s.origin.0 + (s.width as i64 - ow as i64).div_euclid(2),
        s.origin.1 + (s.height as i64 - oh as i64).div_euclid(2),
    );
    let rotated = Segment::from_bits(ow, oh, bits.clone(), origin, s.source_class);
    let cropped = rotated.tight_cropped();
    if cropped.is_empty() {
        return (cropped, Vec::new());
    }
    // Apply the identical crop to the payload.
    let off_x = (cropped.origin.0 - origin.0) as u32;
    let off_y = (cropped.origin.1 - origin.1) as u32;
    let mut cropped_vals = Vec::with_capacity(cropped.bits.len());
    for y in 0..cropped.height {
        for x in 0..cropped.width {
            cropped_vals.push(vals[(y + off_y) as usize * ow as usize + (x + off_x) as usize]);
        }
    }
    (cropped, cropped_vals)
}

/// Keep segments with `area >= min_area`, preserving order.
pub fn filter_by_area(segs: Vec<Segment>, min_area: usize) -> Vec<Segment> {
    segs.into_iter().filter(|s| s.area() >= min_area).collect()
}
