//! PNG I/O: 8-bit RGB images and paletted class masks.
//!
//! Masks are written as indexed-color PNGs where palette index i *is* class
//! id i; reading keeps the raw indices (no palette expansion), so the class
//! ids round-trip bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::raster::{ClassMask, Raster, SamplePair, NUM_CLASSES};

/// Display palette for the four classes: background, ash, vegetation, fire.
/// The colors are only for viewing; the indices carry the labels.
pub const MASK_PALETTE: [[u8; 3]; NUM_CLASSES] = [
    [0, 0, 0],
    [128, 128, 128],
    [34, 139, 34],
    [255, 69, 0],
];

pub fn write_raster_png(raster: &Raster, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), raster.width(), raster.height());
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(raster.data())?;
    Ok(())
}

pub fn read_raster_png(path: &Path) -> Result<Raster> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or_else(|| {
        Error::PngFormat(format!("{}: image too large", path.display()))
    })?];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());

    let rgb = match info.color_type {
        png::ColorType::Rgb => buf,
        png::ColorType::Rgba => buf
            .chunks_exact(4)
            .flat_map(|p| [p[0], p[1], p[2]])
            .collect(),
        png::ColorType::Grayscale => buf.iter().flat_map(|&v| [v, v, v]).collect(),
        png::ColorType::GrayscaleAlpha => buf
            .chunks_exact(2)
            .flat_map(|p| [p[0], p[0], p[0]])
            .collect(),
        other => {
            return Err(Error::PngFormat(format!(
                "{}: unsupported color type {other:?} for an RGB raster",
                path.display()
            )))
        }
    };
    Raster::new(info.width, info.height, rgb)
}

pub fn write_mask_png(mask: &ClassMask, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), mask.width(), mask.height());
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    encoder.set_palette(MASK_PALETTE.concat());
    let mut writer = encoder.write_header()?;
    writer.write_image_data(mask.labels())?;
    Ok(())
}

pub fn read_mask_png(path: &Path) -> Result<ClassMask> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    // Keep palette indices as-is; expanding to RGB would lose the contract.
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or_else(|| {
        Error::PngFormat(format!("{}: mask too large", path.display()))
    })?];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());

    if info.color_type != png::ColorType::Indexed {
        return Err(Error::PngFormat(format!(
            "{}: masks must be indexed-color PNGs, got {:?}",
            path.display(),
            info.color_type
        )));
    }
    let labels = unpack_indexed(&buf, info.width, info.height, info.bit_depth as u8);
    ClassMask::new(info.width, info.height, labels)
}

/// Unpack indexed scanlines of depth 1/2/4/8 into one index byte per pixel.
fn unpack_indexed(buf: &[u8], width: u32, height: u32, depth: u8) -> Vec<u8> {
    if depth == 8 {
        return buf.to_vec();
    }
    let per_byte = 8 / depth as usize;
    let mask = (1u16 << depth) as u8 - 1;
    let line_bytes = (width as usize * depth as usize).div_ceil(8);
    let mut out = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height as usize {
        let line = &buf[y * line_bytes..(y + 1) * line_bytes];
        for x in 0..width as usize {
            let byte = line[x / per_byte];
            let shift = 8 - depth as usize * (x % per_byte + 1);
            out.push((byte >> shift) & mask);
        }
    }
    out
}

/// Conventional file names for a sample id inside a dataset directory.
pub fn pair_paths(dir: &Path, id: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{id}.png")), dir.join(format!("{id}_mask.png")))
}

pub fn write_pair(dir: &Path, pair: &SamplePair) -> Result<()> {
    let (img_path, mask_path) = pair_paths(dir, &pair.id);
    write_raster_png(&pair.image, &img_path)?;
    write_mask_png(&pair.mask, &mask_path)?;
    Ok(())
}

/// Load all `<id>.png` + `<id>_mask.png` pairs from a directory, sorted by id.
pub fn load_pairs(dir: &Path) -> Result<Vec<SamplePair>> {
    let mut ids = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(stem) = name.strip_suffix(".png") {
            if !stem.ends_with("_mask") {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    ids.dedup();

    let mut pairs = Vec::with_capacity(ids.len());
    for id in ids {
        let (img_path, mask_path) = pair_paths(dir, &id);
        let image = read_raster_png(&img_path)?;
        let mask = read_mask_png(&mask_path)?;
        pairs.push(SamplePair::new(image, mask, id)?);
    }
    Ok(pairs)
}
