//! Precomputed saliency maps and box-footprint queries.
//!
//! Maps are 8-bit; the summed-area table is kept in integer levels so box
//! sums are exact.

use std::path::Path;

use crate::error::{Error, Result};
use crate::layout::BBox;

#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    levels: Vec<u8>,
    /// (width + 1) x (height + 1) prefix sums of `levels`, row-major.
    integral: Vec<u64>,
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PixelRect {
    pub fn count(&self) -> usize {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Pixels whose centers fall inside `[lo, hi]`; at least the pixel holding
/// the span's midpoint.
fn pixel_span(lo: f64, hi: f64, n: usize) -> (usize, usize) {
    let nf = n as f64;
    let first = (lo * nf - 0.5).ceil().max(0.0);
    let last = (hi * nf - 0.5).floor().min(nf - 1.0);
    if first <= last {
        (first as usize, last as usize + 1)
    } else {
        let mid = (0.5 * (lo + hi) * nf).floor().clamp(0.0, nf - 1.0) as usize;
        (mid, mid + 1)
    }
}

impl SaliencyMap {
    pub fn from_levels(width: usize, height: usize, levels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Saliency("map has a zero dimension".into()));
        }
        if levels.len() != width * height {
            return Err(Error::Saliency(format!(
                "expected {} pixels, got {}",
                width * height,
                levels.len()
            )));
        }
        let stride = width + 1;
        let mut integral = vec![0u64; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0u64;
            for x in 0..width {
                row += u64::from(levels[y * width + x]);
                integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row;
            }
        }
        Ok(Self {
            width,
            height,
            levels,
            integral,
        })
    }

    /// Quantize real values in [0, 1] to 8-bit levels.
    pub fn from_values(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Saliency("values must lie in [0, 1]".into()));
        }
        let levels = values.iter().map(|v| (v * 255.0).round() as u8).collect();
        Self::from_levels(width, height, levels)
    }

    /// Load an 8-bit grayscale PGM (P5) or PNG file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::decode(&bytes)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(b"P5") {
            parse_pgm(bytes)
        } else if bytes.starts_with(b"\x89PNG") {
            let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
                .map_err(|e| Error::Saliency(e.to_string()))?
                .to_luma8();
            let (w, h) = img.dimensions();
            Self::from_levels(w as usize, h as usize, img.into_raw())
        } else {
            Err(Error::Saliency(
                "unsupported format (expected binary PGM or PNG)".into(),
            ))
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn level(&self, x: usize, y: usize) -> u8 {
        self.levels[y * self.width + x]
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        f64::from(self.level(x, y)) / 255.0
    }

    /// Pixel footprint of a normalized box.
    pub fn footprint(&self, b: &BBox) -> PixelRect {
        let (x0, x1) = pixel_span(b.left(), b.right(), self.width);
        let (y0, y1) = pixel_span(b.top(), b.bottom(), self.height);
        PixelRect { x0, y0, x1, y1 }
    }

    /// Sum of 8-bit levels over a pixel rectangle.
    pub fn level_sum(&self, r: &PixelRect) -> u64 {
        let s = self.width + 1;
        self.integral[r.y1 * s + r.x1] + self.integral[r.y0 * s + r.x0]
            - self.integral[r.y0 * s + r.x1]
            - self.integral[r.y1 * s + r.x0]
    }

    /// Mean saliency inside the box footprint.
    pub fn mean_in_box(&self, b: &BBox) -> f64 {
        let r = self.footprint(b);
        self.level_sum(&r) as f64 / (255.0 * r.count() as f64)
    }
}

fn parse_pgm(bytes: &[u8]) -> Result<SaliencyMap> {
    let bad = |m: &str| Error::Saliency(format!("PGM: {m}"));
    let mut pos = 2;
    let mut header = [0usize; 3];
    for field in &mut header {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("malformed header"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("malformed header"));
    }
    pos += 1;
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit maps are supported"));
    }
    let n = width.checked_mul(height).ok_or_else(|| bad("dimensions overflow"))?;
    let data = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated pixel data"))?;
    let levels = if maxval == 255 {
        data.to_vec()
    } else {
        data.iter()
            .map(|&v| ((f64::from(v.min(maxval as u8)) * 255.0 / maxval as f64).round()) as u8)
            .collect()
    };
    SaliencyMap::from_levels(width, height, levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(w: usize, h: usize, data: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n# test\n{w} {h}\n255\n").into_bytes();
        v.extend_from_slice(data);
        v
    }

    #[test]
    fn decodes_pgm() {
        let m = SaliencyMap::decode(&pgm(2, 2, &[0, 255, 255, 0])).unwrap();
        assert_eq!((m.width(), m.height()), (2, 2));
        assert_eq!(
            [m.value(0, 0), m.value(1, 0), m.value(0, 1), m.value(1, 1)],
            [0.0, 1.0, 1.0, 0.0]
        );
        let one = SaliencyMap::decode(&pgm(1, 1, &[128])).unwrap();
        assert!((one.value(0, 0) - 0.50196).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SaliencyMap::decode(&pgm(2, 2, &[0, 255, 255])).is_err());
        assert!(SaliencyMap::decode(&pgm(0, 2, &[])).is_err());
        assert!(SaliencyMap::decode(b"GIF89a").is_err());
        assert!(SaliencyMap::decode(b"P5\n2 2\n65535\n").is_err());
    }

    #[test]
    fn png_matches_pgm() {
        let mut buf = Vec::new();
        let img = image::GrayImage::from_raw(2, 1, vec![10, 200]).unwrap();
        img.write_to(&mut std::io::Cursor::new(&mut buf), image::ImageFormat::Png)
            .unwrap();
        let m = SaliencyMap::decode(&buf).unwrap();
        assert_eq!((m.level(0, 0), m.level(1, 0)), (10, 200));
    }

    #[test]
    fn footprint_of_half_canvas() {
        let m = SaliencyMap::from_levels(8, 4, vec![0; 32]).unwrap();
        let r = m.footprint(&BBox::from_edges(0.5, 0.0, 1.0, 1.0));
        assert_eq!(
            r,
            PixelRect {
                x0: 4,
                y0: 0,
                x1: 8,
                y1: 4
            }
        );
        // a sliver still covers one pixel
        assert_eq!(m.footprint(&BBox::new(0.3, 0.5, 0.001, 0.001)).count(), 1);
    }

    #[test]
    fn box_means() {
        let mut levels = vec![0u8; 16 * 16];
        for y in 0..16 {
            for x in 0..8 {
                levels[y * 16 + x] = 255;
            }
        }
        let m = SaliencyMap::from_levels(16, 16, levels).unwrap();
        assert_eq!(m.mean_in_box(&BBox::from_edges(0.0, 0.0, 0.5, 1.0)), 1.0);
        assert_eq!(m.mean_in_box(&BBox::from_edges(0.5, 0.0, 1.0, 1.0)), 0.0);
        assert_eq!(m.mean_in_box(&BBox::from_edges(0.25, 0.0, 0.75, 1.0)), 0.5);
    }
}
