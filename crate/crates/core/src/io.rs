//! PNG and binary PPM/PGM codecs for the pipeline's inputs and outputs.
//!
//! Inputs are 8-bit color images (PNG or P6 PPM) and binary edge maps
//! (nonzero means edge). Outputs are 8-bit edge PNGs (255 = edge) and
//! 16-bit grayscale ESM dumps, linearly rescaled with the scale factor
//! reported back to the caller for sidecar metadata.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{Error, Result};
use crate::image::{EdgeMap, Plane, RgbImage};

/// Pick the output codec from a file extension (png, ppm, pgm).
pub fn format_for_path(path: &Path) -> Result<ImageFormat> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("png") => Ok(ImageFormat::Png),
        Some("ppm") | Some("pgm") | Some("pnm") => Ok(ImageFormat::Pnm),
        other => Err(Error::InvalidParameter(format!(
            "unsupported output extension {:?} (use png, ppm, or pgm)",
            other.unwrap_or("<none>")
        ))),
    }
}

/// Load an 8-bit color image (PNG or binary PPM).
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path)?.to_rgb8();
    let (w, h) = img.dimensions();
    RgbImage::new(w as usize, h as usize, img.into_raw())
}

/// Load a binary edge map: any nonzero luma sample counts as an edge.
pub fn load_edge_map(path: &Path) -> Result<EdgeMap> {
    let img = image::open(path)?.to_luma8();
    let (w, h) = img.dimensions();
    let edges = img.into_raw().into_iter().map(|v| v != 0).collect();
    EdgeMap::new(w as usize, h as usize, edges)
}

fn rgb_buffer(img: &RgbImage) -> ImageBuffer<Rgb<u8>, Vec<u8>> {
    ImageBuffer::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .expect("length validated by RgbImage")
}

/// Encode a color image in the given format.
pub fn encode_rgb(img: &RgbImage, format: ImageFormat) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    DynamicImage::ImageRgb8(rgb_buffer(img)).write_to(&mut Cursor::new(&mut bytes), format)?;
    Ok(bytes)
}

/// Encode an edge map as 8-bit grayscale (255 = edge, 0 = background).
pub fn encode_edge_map(map: &EdgeMap, format: ImageFormat) -> Result<Vec<u8>> {
    let data: Vec<u8> = (0..map.height())
        .flat_map(|y| (0..map.width()).map(move |x| (x, y)))
        .map(|(x, y)| if map.get(x, y) { 255u8 } else { 0u8 })
        .collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(map.width() as u32, map.height() as u32, data)
            .expect("length matches dimensions");
    let mut bytes = Vec::new();
    DynamicImage::ImageLuma8(buf).write_to(&mut Cursor::new(&mut bytes), format)?;
    Ok(bytes)
}

/// Encode a nonnegative plane as 16-bit grayscale PNG, linearly rescaled so
/// the maximum sample maps to 65535. Returns the bytes and the maximum
/// value used as the scale reference (0 for an all-zero plane).
pub fn encode_plane_png16(plane: &Plane) -> Result<(Vec<u8>, f64)> {
    let max = plane.max_value().max(0.0);
    let data: Vec<u16> = if max > 0.0 {
        plane
            .data()
            .iter()
            .map(|&v| ((v / max).clamp(0.0, 1.0) * 65535.0).round() as u16)
            .collect()
    } else {
        vec![0; plane.data().len()]
    };
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(plane.width() as u32, plane.height() as u32, data)
            .expect("length matches dimensions");
    let mut bytes = Vec::new();
    DynamicImage::ImageLuma16(buf).write_to(&mut Cursor::new(&mut bytes), ImageFormat::Png)?;
    Ok((bytes, max))
}

/// Convenience save built on [`encode_rgb`] with the codec chosen from the
/// extension.
pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let bytes = encode_rgb(img, format_for_path(path)?)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Convenience save built on [`encode_edge_map`].
pub fn save_edge_map(map: &EdgeMap, path: &Path) -> Result<()> {
    let bytes = encode_edge_map(map, format_for_path(path)?)?;
    std::fs::write(path, bytes)?;
    Ok(())
}
