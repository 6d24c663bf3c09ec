//! Three-component composition mapping on an inverted trigonal pyramid.
//!
//! Total intensity sets lightness and scales the circumradius of a
//! white-centered equilateral triangle in the a*-b* plane; the relative
//! composition picks a point inside that triangle by barycentric mixing of
//! the vertex coordinates. Pair channels with vertices so that the components
//! drawn red and green overlap as little as possible spatially.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorspace::{lab_to_srgb_reporting, lch_to_lab, LabColor, LchColor, SrgbColor};
use crate::error::{Error, Result};
use crate::gamut::{in_gamut, GamutPolicy};
use crate::{Ceiling, Mapped};

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionField {
    width: usize,
    height: usize,
    channels: [Vec<f64>; 3],
    labels: [String; 3],
}

impl CompositionField {
    pub fn new(
        width: usize,
        height: usize,
        channels: [Vec<f64>; 3],
        labels: [String; 3],
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(
                "composition field dimensions must be positive",
            ));
        }
        for (k, ch) in channels.iter().enumerate() {
            if ch.len() != width * height {
                return Err(Error::invalid(format!(
                    "channel {} has {} values, expected {}",
                    k + 1,
                    ch.len(),
                    width * height
                )));
            }
            if let Some(i) = ch.iter().position(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::invalid(format!(
                    "channel {} value {} at index {i} is negative or non-finite",
                    k + 1,
                    ch[i]
                )));
            }
        }
        Ok(CompositionField {
            width,
            height,
            channels,
            labels,
        })
    }

    /// Build from a per-pixel function returning the three intensities.
    pub fn from_fn(
        width: usize,
        height: usize,
        labels: [&str; 3],
        f: impl Fn(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut channels: [Vec<f64>; 3] = Default::default();
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                for k in 0..3 {
                    channels[k].push(v[k]);
                }
            }
        }
        CompositionField::new(width, height, channels, labels.map(String::from))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> &[Vec<f64>; 3] {
        &self.channels
    }

    pub fn labels(&self) -> &[String; 3] {
        &self.labels
    }

    pub fn pixel(&self, i: usize) -> [f64; 3] {
        [
            self.channels[0][i],
            self.channels[1][i],
            self.channels[2][i],
        ]
    }

    pub fn max_total(&self) -> f64 {
        (0..self.width * self.height)
            .map(|i| self.pixel(i).iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn channel_maxima(&self) -> [f64; 3] {
        self.channels
            .each_ref()
            .map(|ch| ch.iter().copied().fold(0.0, f64::max))
    }
}

/// Pyramid geometry. Component k sits at hue `h0 + k·120°`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleSpec {
    pub l_max: f64,
    pub r_max: f64,
    pub h0: f64,
}

impl Default for TriangleSpec {
    fn default() -> Self {
        TriangleSpec {
            l_max: 61.50,
            r_max: 60.14,
            h0: 33.73,
        }
    }
}

const VERTEX_EPS: f64 = 1e-3;

impl TriangleSpec {
    pub fn vertices(&self) -> [LabColor; 3] {
        [0.0, 120.0, 240.0].map(|k| lch_to_lab(LchColor::new(self.l_max, self.r_max, self.h0 + k)))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_max > 0.0 && self.l_max <= 100.0) {
            return Err(Error::invalid(format!(
                "l_max must lie in (0,100], got {}",
                self.l_max
            )));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::invalid(format!(
                "r_max must be positive, got {}",
                self.r_max
            )));
        }
        if !self.h0.is_finite() {
            return Err(Error::invalid("h0 must be finite"));
        }
        if let Some(k) = self
            .vertices()
            .iter()
            .position(|&v| !in_gamut(v, VERTEX_EPS))
        {
            return Err(Error::invalid(format!(
                "triangle vertex {} (L={}, R={}) is outside the sRGB gamut",
                k + 1,
                self.l_max,
                self.r_max
            )));
        }
        Ok(())
    }
}

fn check_components(c: &[f64; 3]) -> Result<()> {
    if let Some(v) = c.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::invalid(format!(
            "component {v} is negative or non-finite"
        )));
    }
    Ok(())
}

pub fn composition_color(c: [f64; 3], c_total_max: f64, spec: &TriangleSpec) -> Result<LabColor> {
    check_components(&c)?;
    if !(c_total_max > 0.0 && c_total_max.is_finite()) {
        return Err(Error::invalid(format!(
            "c_total_max must be positive, got {c_total_max}"
        )));
    }
    let total: f64 = c.iter().sum();
    let intensity = (total / c_total_max).min(1.0);
    let weights = if total > 0.0 {
        c.map(|ci| ci / total)
    } else {
        [1.0 / 3.0; 3]
    };
    let (mut a, mut b) = (0.0, 0.0);
    for (k, w) in weights.iter().enumerate() {
        let (s, co) = (spec.h0 + 120.0 * k as f64).to_radians().sin_cos();
        a += w * co;
        b += w * s;
    }
    let radius = intensity * spec.r_max;
    Ok(LabColor::new(
        intensity * spec.l_max,
        radius * a,
        radius * b,
    ))
}

/// Traditional reference: each channel drives one sRGB primary linearly.
pub fn rgb_mixing_color(c: [f64; 3], maxima: [f64; 3]) -> Result<SrgbColor> {
    check_components(&c)?;
    if maxima.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::invalid(format!(
            "channel maxima must be positive, got {maxima:?}"
        )));
    }
    Ok(SrgbColor::new(
        (c[0] / maxima[0]).min(1.0),
        (c[1] / maxima[1]).min(1.0),
        (c[2] / maxima[2]).min(1.0),
    ))
}

pub fn map_composition_field(
    field: &CompositionField,
    spec: &TriangleSpec,
    c_total_max: Ceiling,
    policy: GamutPolicy,
) -> Result<Mapped> {
    spec.validate()?;
    let ceiling = match c_total_max {
        Ceiling::Fixed(v) => v,
        Ceiling::Auto => {
            let t = field.max_total();
            if t <= 0.0 {
                return Err(Error::invalid(
                    "all-zero field: automatic total ceiling is undefined",
                ));
            }
            t
        }
    };
    let out = (0..field.width * field.height)
        .into_par_iter()
        .map(|i| lab_to_srgb_reporting(composition_color(field.pixel(i), ceiling, spec)?, policy))
        .collect::<Result<Vec<_>>>()?;
    Mapped::from_pairs(field.width, field.height, out, ceiling)
}

/// Per-channel maxima for the RGB-mixing reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelMaxima {
    /// Each channel normalized by its own maximum.
    Auto,
    Fixed([f64; 3]),
}

pub fn map_rgb_mixing_field(
    field: &CompositionField,
    maxima: ChannelMaxima,
) -> Result<crate::Raster> {
    let maxima = match maxima {
        ChannelMaxima::Fixed(m) => m,
        ChannelMaxima::Auto => field
            .channel_maxima()
            .map(|m| if m > 0.0 { m } else { 1.0 }),
    };
    let pixels = (0..field.width * field.height)
        .into_par_iter()
        .map(|i| rgb_mixing_color(field.pixel(i), maxima))
        .collect::<Result<Vec<_>>>()?;
    crate::Raster::new(field.width, field.height, pixels)
}

/// Column-wise channel means over a band of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RowProfile {
    pub labels: [String; 3],
    pub channels: [Vec<f64>; 3],
}

pub fn row_profile(
    field: &CompositionField,
    row_start: usize,
    row_count: usize,
) -> Result<RowProfile> {
    if row_count == 0 {
        return Err(Error::invalid("row_count must be at least 1"));
    }
    if row_start
        .checked_add(row_count)
        .is_none_or(|end| end > field.height)
    {
        return Err(Error::invalid(format!(
            "rows {row_start}..{} exceed field height {}",
            row_start.saturating_add(row_count),
            field.height
        )));
    }
    let w = field.width;
    let channels = field.channels.each_ref().map(|ch| {
        (0..w)
            .map(|x| {
                (row_start..row_start + row_count)
                    .map(|y| ch[y * w + x])
                    .sum::<f64>()
                    / row_count as f64
            })
            .collect()
    });
    Ok(RowProfile {
        labels: field.labels.clone(),
        channels,
    })
}

impl RowProfile {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::invalid(format!("writing profile CSV: {e}"));
        w.write_record(["col", &self.labels[0], &self.labels[1], &self.labels[2]])
            .map_err(to_err)?;
        for x in 0..self.channels[0].len() {
            w.write_record([
                x.to_string(),
                self.channels[0][x].to_string(),
                self.channels[1][x].to_string(),
                self.channels[2][x].to_string(),
            ])
            .map_err(to_err)?;
        }
        w.flush()
            .map_err(|e| Error::invalid(format!("writing profile CSV: {e}")))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
