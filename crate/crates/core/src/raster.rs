use crate::colorspace::SrgbColor;
use crate::error::{Error, Result};

/// Row-major image of sRGB pixels, optionally with a coverage mask
/// (`false` = transparent).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<SrgbColor>,
    mask: Option<Vec<bool>>,
}

impl Raster {
    pub fn new(width: usize, height: usize, pixels: Vec<SrgbColor>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("raster dimensions must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "raster {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            pixels,
            mask: None,
        })
    }

    pub fn filled(width: usize, height: usize, color: SrgbColor) -> Result<Self> {
        Raster::new(width, height, vec![color; width * height])
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.pixels.len() {
            return Err(Error::invalid("mask length must match pixel count"));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[SrgbColor] {
        &self.pixels
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn get(&self, x: usize, y: usize) -> SrgbColor {
        self.pixels[y * self.width + x]
    }

    /// Apply `f` to every pixel, keeping dimensions and mask.
    pub fn map_pixels(&self, f: impl Fn(SrgbColor) -> SrgbColor + Sync) -> Raster {
        use rayon::prelude::*;
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.pixels.par_iter().map(|&p| f(p)).collect(),
            mask: self.mask.clone(),
        }
    }

    pub fn try_map_pixels(
        &self,
        f: impl Fn(SrgbColor) -> Result<SrgbColor> + Sync,
    ) -> Result<Raster> {
        use rayon::prelude::*;
        let pixels = self
            .pixels
            .par_iter()
            .map(|&p| f(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Raster {
            width: self.width,
            height: self.height,
            pixels,
            mask: self.mask.clone(),
        })
    }
}
