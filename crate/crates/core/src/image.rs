//! Single-channel 8-bit images plus the crop/resample steps applied before
//! place recognition and pose regression.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::dims("non-empty image", format!("{width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::dims(width * height, pixels.len()));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                pixels.push(f(u, v));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u8 {
        self.pixels[v * self.width + u]
    }

    pub fn crop(&self, rect: Rect) -> Result<Self> {
        if rect.width == 0
            || rect.height == 0
            || rect.x + rect.width > self.width
            || rect.y + rect.height > self.height
        {
            return Err(Error::dims(
                format!("crop inside {}x{}", self.width, self.height),
                format!("{rect:?}"),
            ));
        }
        let mut pixels = Vec::with_capacity(rect.width * rect.height);
        for v in rect.y..rect.y + rect.height {
            let row = v * self.width;
            pixels.extend_from_slice(&self.pixels[row + rect.x..row + rect.x + rect.width]);
        }
        Self::new(rect.width, rect.height, pixels)
    }

    /// Bilinear resample with pixel-center alignment, returning intensities
    /// scaled to [0, 1].
    pub fn resize_normalized(&self, width: usize, height: usize) -> Vec<f32> {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let mut out = Vec::with_capacity(width * height);
        for v in 0..height {
            let fy = ((v as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let wy = fy - y0 as f64;
            for u in 0..width {
                let fx = ((u as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let wx = fx - x0 as f64;
                let top = self.get(x0, y0) as f64 * (1.0 - wx) + self.get(x1, y0) as f64 * wx;
                let bot = self.get(x0, y1) as f64 * (1.0 - wx) + self.get(x1, y1) as f64 * wx;
                out.push(((top * (1.0 - wy) + bot * wy) / 255.0) as f32);
            }
        }
        out
    }

    pub fn resize(&self, width: usize, height: usize) -> Result<Self> {
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let data = self.resize_normalized(width, height);
        Self::new(
            width,
            height,
            data.iter()
                .map(|&x| (x * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path)?.into_luma8();
        let (w, h) = img.dimensions();
        Self::new(w as usize, h as usize, img.into_raw())
    }

    /// Writes PGM or PNG depending on the file extension.
    pub fn save(&self, path: &Path) -> Result<()> {
        let buf = image::GrayImage::from_raw(
            self.width as u32,
            self.height as u32,
            self.pixels.clone(),
        )
        .expect("buffer length checked at construction");
        let is_pgm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        if is_pgm {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let enc = image::codecs::pnm::PnmEncoder::new(std::io::BufWriter::new(file))
                .with_subtype(image::codecs::pnm::PnmSubtype::Graymap(
                    image::codecs::pnm::SampleEncoding::Binary,
                ));
            use image::ImageEncoder;
            enc.write_image(
                buf.as_raw(),
                self.width as u32,
                self.height as u32,
                image::ExtendedColorType::L8,
            )?;
            Ok(())
        } else {
            buf.save(path)?;
            Ok(())
        }
    }
}

/// Axis-aligned pixel window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }
}

/// Crop-then-resize applied to raw frames before a model sees them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Preprocess {
    pub crop: Option<Rect>,
    pub resize: Option<(usize, usize)>,
}

impl Preprocess {
    pub fn apply(&self, image: &GrayImage) -> Result<GrayImage> {
        let cropped = match self.crop {
            Some(r) => image.crop(r)?,
            None => image.clone(),
        };
        match self.resize {
            Some((w, h)) => cropped.resize(w, h),
            None => Ok(cropped),
        }
    }

    /// Applies the crop and resamples straight to normalized floats.
    pub fn apply_normalized(&self, image: &GrayImage, width: usize, height: usize) -> Result<Vec<f32>> {
        let cropped = match self.crop {
            Some(r) => image.crop(r)?,
            None => image.clone(),
        };
        Ok(cropped.resize_normalized(width, height))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_extracts_window() {
        let img = GrayImage::from_fn(4, 3, |u, v| (v * 4 + u) as u8).unwrap();
        let c = img.crop(Rect::new(1, 1, 2, 2)).unwrap();
        assert_eq!(c.pixels(), &[5, 6, 9, 10]);
        assert!(img.crop(Rect::new(3, 0, 2, 1)).is_err());
    }

    #[test]
    fn identity_resize_preserves_values() {
        let img = GrayImage::from_fn(5, 4, |u, v| (u * 40 + v * 3) as u8).unwrap();
        let f = img.resize_normalized(5, 4);
        for (a, &b) in f.iter().zip(img.pixels()) {
            assert!((a * 255.0 - b as f32).abs() < 1e-3);
        }
    }

    #[test]
    fn downsample_by_two_averages_blocks() {
        let img = GrayImage::new(2, 2, vec![0, 100, 200, 100]).unwrap();
        let f = img.resize_normalized(1, 1);
        assert!((f[0] * 255.0 - 100.0).abs() < 1e-3);
    }

    #[test]
    fn pgm_and_png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(7, 3, |u, v| (u * 31 + v * 7) as u8).unwrap();
        for name in ["a.pgm", "a.png"] {
            let p = dir.path().join(name);
            img.save(&p).unwrap();
            assert_eq!(GrayImage::load(&p).unwrap(), img);
        }
    }
}
