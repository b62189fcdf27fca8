//! Pixel grids, PGM/PNG I/O and the 5x5 median prefilter.
//!
//! Coordinates follow image convention: `x` indexes columns left to right,
//! `y` indexes rows top to bottom, and pixel `(x, y)` has its center at the
//! real point `(x as f64, y as f64)`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const PNG_SIGNATURE: &[u8] = &[0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// An 8-bit grayscale image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                width,
                height,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Returns the image with every intensity `v` replaced by `255 - v`.
    pub fn negated(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| 255 - v).collect(),
        }
    }

    /// Encodes the image as binary PGM (P5, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        encode_p5(self.width, self.height, &self.pixels)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

/// A foreground/background mask stored row-major. `true` marks ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::DimensionMismatch {
                width,
                height,
                actual: mask.len(),
            });
        }
        Ok(BinaryImage {
            width,
            height,
            mask,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            mask: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    /// Bounds-checked lookup; anything outside the image is background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.mask[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.mask[y * self.width + x] = value;
    }

    pub fn foreground_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Renders ink as 0 and background as 255.
    pub fn to_gray(&self) -> Result<GrayImage> {
        GrayImage::new(
            self.width,
            self.height,
            self.mask.iter().map(|&m| if m { 0 } else { 255 }).collect(),
        )
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let body: Vec<u8> = self.mask.iter().map(|&m| if m { 0 } else { 255 }).collect();
        encode_p5(self.width, self.height, &body)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

fn encode_p5(width: usize, height: usize, body: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(body);
    out
}

/// Reads a PGM (P2 or P5) or PNG file into an 8-bit grayscale image.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::UnsupportedFormat { reason, .. } => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason,
        },
        Error::MalformedImage { reason, .. } => Error::MalformedImage {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    })
}

/// Decodes PGM or PNG bytes. Errors carry an empty path; [`load_image`]
/// fills it in.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else {
        Err(Error::UnsupportedFormat {
            path: Default::default(),
            reason: "expected PGM (P2/P5) or PNG".into(),
        })
    }
}

fn malformed(reason: impl Into<String>) -> Error {
    Error::MalformedImage {
        path: Default::default(),
        reason: reason.into(),
    }
}

struct PgmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmHeader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(format!("{what} out of range")))
    }
}

fn rescale(v: u32, maxval: u32) -> u8 {
    if maxval == 255 {
        return v as u8;
    }
    // round(v * 255 / maxval) in integer arithmetic
    ((2 * v as u64 * 255 + maxval as u64) / (2 * maxval as u64)) as u8
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let binary = bytes[1] == b'5';
    let mut hdr = PgmHeader { bytes, pos: 2 };
    let width = hdr.next_uint("width")? as usize;
    let height = hdr.next_uint("height")? as usize;
    let maxval = hdr.next_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    if maxval == 0 || maxval > 65535 {
        return Err(malformed(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| malformed("dimensions overflow"))?;
    let mut pixels = Vec::with_capacity(count);

    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = hdr.pos + 1;
        let depth = if maxval < 256 { 1 } else { 2 };
        let body = bytes
            .get(start..start + count * depth)
            .ok_or_else(|| malformed("truncated raster"))?;
        for chunk in body.chunks_exact(depth) {
            let v = if depth == 1 {
                chunk[0] as u32
            } else {
                u16::from_be_bytes([chunk[0], chunk[1]]) as u32
            };
            if v > maxval {
                return Err(malformed(format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(rescale(v, maxval));
        }
    } else {
        for _ in 0..count {
            let v = hdr.next_uint("sample")?;
            if v > maxval {
                return Err(malformed(format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(rescale(v, maxval));
        }
    }
    GrayImage::new(width, height, pixels)
}

fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| malformed(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    let pixels = if decoded.color().has_color() {
        decoded
            .to_rgb8()
            .pixels()
            .map(|p| luma(p[0], p[1], p[2]))
            .collect()
    } else {
        decoded.to_luma8().into_raw()
    };
    GrayImage::new(width, height, pixels)
}

/// Replaces every pixel with the median (13th order statistic) of its 5x5
/// neighborhood. Coordinates outside the image clamp to the nearest edge.
///
/// Runs a sliding 256-bin histogram along each row, so the cost per pixel
/// is independent of the window contents.
pub fn median_filter_5x5(img: &GrayImage) -> GrayImage {
    const RADIUS: i64 = 2;
    const RANK: u32 = 13;
    let (w, h) = (img.width as i64, img.height as i64);
    let clamp_x = |x: i64| x.clamp(0, w - 1) as usize;
    let clamp_y = |y: i64| y.clamp(0, h - 1) as usize;

    let mut out = vec![0u8; img.pixels.len()];
    for y in 0..h {
        let rows: [usize; 5] = std::array::from_fn(|i| clamp_y(y + i as i64 - RADIUS));
        let mut hist = [0u32; 256];
        for dx in -RADIUS..=RADIUS {
            let cx = clamp_x(dx);
            for &ry in &rows {
                hist[img.get(cx, ry) as usize] += 1;
            }
        }
        for x in 0..w {
            if x > 0 {
                let leaving = clamp_x(x - 1 - RADIUS);
                let entering = clamp_x(x + RADIUS);
                for &ry in &rows {
                    hist[img.get(leaving, ry) as usize] -= 1;
                    hist[img.get(entering, ry) as usize] += 1;
                }
            }
            let mut seen = 0;
            let mut median = 0u8;
            for (v, &c) in hist.iter().enumerate() {
                seen += c;
                if seen >= RANK {
                    median = v as u8;
                    break;
                }
            }
            out[(y * w + x) as usize] = median;
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: out,
    }
}
