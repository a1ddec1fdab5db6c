//! Pixel-buffer primitives and the classic image-processing kernels behind
//! the underline detector: grayscale conversion, Otsu thresholding, Canny
//! edge detection, and a horizontal-line Hough transform. Also hosts the
//! deterministic synthetic renderer that turns simulator screens into
//! pixels, and PNG import/export for fixtures and report frames.

mod canny;
mod draw;
mod hough;
mod otsu;
mod render;

pub use canny::canny_edges;
pub use draw::{draw_line, fill_rect, fill_rounded_rect, stroke_rect, Rgb};
pub use hough::{hough_horizontal_lines, HoughLine};
pub use otsu::otsu_threshold;
pub use render::{render_screen, render_screen_page};

use std::path::Path;

use thiserror::Error;

use crate::ui_model::BoundingBox;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("buffer size mismatch: {width}x{height}x{channels} needs {expected} bytes, got {got}")]
    SizeMismatch {
        width: usize,
        height: usize,
        channels: usize,
        expected: usize,
        got: usize,
    },
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    BadChannels(usize),
    #[error("patch has zero area after clamping to the buffer")]
    EmptyPatch,
    #[error("png error: {0}")]
    Png(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Row-major byte image, 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl PixelBuffer {
    pub fn new_filled(width: usize, height: usize, channels: usize, value: u8) -> Self {
        assert!(width >= 1 && height >= 1, "degenerate buffer");
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        PixelBuffer {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn from_raw(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<u8>,
    ) -> Result<Self, ImagingError> {
        if channels != 1 && channels != 3 {
            return Err(ImagingError::BadChannels(channels));
        }
        let expected = width * height * channels;
        if data.len() != expected || width == 0 || height == 0 {
            return Err(ImagingError::SizeMismatch {
                width,
                height,
                channels,
                expected,
                got: data.len(),
            });
        }
        Ok(PixelBuffer {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn is_gray(&self) -> bool {
        self.channels == 1
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn put(&mut self, x: usize, y: usize, c: usize, value: u8) {
        self.data[(y * self.width + x) * self.channels + c] = value;
    }
}

/// Binary edge image aligned with its source buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize) -> Self {
        EdgeMap {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Converts to single-channel luma with the BT.601 weights
/// (`0.299 R + 0.587 G + 0.114 B`, rounded). Gray input passes through.
pub fn to_grayscale(buf: &PixelBuffer) -> PixelBuffer {
    if buf.is_gray() {
        return buf.clone();
    }
    let mut out = PixelBuffer::new_filled(buf.width, buf.height, 1, 0);
    for y in 0..buf.height {
        for x in 0..buf.width {
            let r = buf.sample(x, y, 0) as f64;
            let g = buf.sample(x, y, 1) as f64;
            let b = buf.sample(x, y, 2) as f64;
            let luma = (0.299 * r + 0.587 * g + 0.114 * b).round();
            out.put(x, y, 0, luma.clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// Thresholds a gray buffer: pixels strictly above `threshold` become 255
/// (foreground), the rest 0.
pub fn binarize(gray: &PixelBuffer, threshold: u8) -> PixelBuffer {
    assert!(gray.is_gray(), "binarize needs a gray buffer");
    let mut out = gray.clone();
    for v in &mut out.data {
        *v = if *v > threshold { 255 } else { 0 };
    }
    out
}

/// Copies the sub-region under `bounds`, clamped to the buffer. Fails when
/// the clamped region has zero area.
pub fn extract_patch(buf: &PixelBuffer, bounds: &BoundingBox) -> Result<PixelBuffer, ImagingError> {
    let x0 = bounds.x0.max(0) as usize;
    let y0 = bounds.y0.max(0) as usize;
    let x1 = (bounds.x1.max(0) as usize).min(buf.width);
    let y1 = (bounds.y1.max(0) as usize).min(buf.height);
    if x1 <= x0 || y1 <= y0 {
        return Err(ImagingError::EmptyPatch);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let mut out = PixelBuffer::new_filled(w, h, buf.channels, 0);
    for y in 0..h {
        for x in 0..w {
            for c in 0..buf.channels {
                out.put(x, y, c, buf.sample(x0 + x, y0 + y, c));
            }
        }
    }
    Ok(out)
}

/// Writes a buffer as a PNG file.
pub fn write_png(path: &Path, buf: &PixelBuffer) -> Result<(), ImagingError> {
    let (w, h) = (buf.width as u32, buf.height as u32);
    match buf.channels {
        1 => {
            let img = image::GrayImage::from_raw(w, h, buf.data.clone())
                .ok_or_else(|| ImagingError::Png("bad gray buffer".to_owned()))?;
            img.save(path).map_err(|e| ImagingError::Png(e.to_string()))
        }
        3 => {
            let img = image::RgbImage::from_raw(w, h, buf.data.clone())
                .ok_or_else(|| ImagingError::Png("bad rgb buffer".to_owned()))?;
            img.save(path).map_err(|e| ImagingError::Png(e.to_string()))
        }
        other => Err(ImagingError::BadChannels(other)),
    }
}

/// Reads a PNG into an RGB buffer (gray files stay single-channel).
pub fn read_png(path: &Path) -> Result<PixelBuffer, ImagingError> {
    let img = image::open(path).map_err(|e| ImagingError::Png(e.to_string()))?;
    match img {
        image::DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            PixelBuffer::from_raw(w, h, 1, g.into_raw())
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            PixelBuffer::from_raw(w, h, 3, rgb.into_raw())
        }
    }
}
