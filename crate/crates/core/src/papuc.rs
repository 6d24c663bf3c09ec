//! Phase-amplitude color wheels for 2D vector fields.
//!
//! A vector with angle θ and normalized magnitude m lands on the surface of
//! an inverted cone in CIELAB: the tip is black at L* = 0, the base is the
//! ring of chroma `c_max` at L* = `l_max`. Angle maps to hue, magnitude maps
//! linearly to both lightness and chroma.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorspace::{
    delta_e, hsv_to_srgb, lab_to_srgb_reporting, lch_to_lab, normalize_degrees, srgb_to_lab,
    HsvColor, LabColor, LchColor, SrgbColor,
};
use crate::error::{Error, Result};
use crate::gamut::{in_gamut, GamutPolicy};
use crate::{Ceiling, Mapped};

/// Just-noticeable CIE76 difference.
pub const DEFAULT_JND: f64 = 2.3;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    width: usize,
    height: usize,
    data: Vec<[f64; 2]>,
}

impl VectorField2D {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 2]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("vector field dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "vector field {width}x{height} needs {} vectors, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(i) = data
            .iter()
            .position(|v| !v[0].is_finite() || !v[1].is_finite())
        {
            return Err(Error::invalid(format!("non-finite vector at index {i}")));
        }
        Ok(VectorField2D {
            width,
            height,
            data,
        })
    }

    /// Sample `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> [f64; 2],
    ) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        VectorField2D::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[f64; 2]] {
        &self.data
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }
}

/// Cone geometry of the perceptually uniform wheel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WheelSpec {
    /// Lightness of the cone base.
    pub l_max: f64,
    /// Chroma radius of the cone base.
    pub c_max: f64,
    /// Hue (degrees) assigned to θ = 0. The default is the CIELAB hue of the
    /// sRGB red primary, so θ = 0 reads as red as on an HSV wheel.
    pub hue_offset: f64,
}

impl Default for WheelSpec {
    fn default() -> Self {
        WheelSpec {
            l_max: 74.0,
            c_max: 40.0,
            hue_offset: 40.0,
        }
    }
}

/// Gamut tolerance for validating the full-magnitude ring.
const RING_EPS: f64 = 1e-3;

impl WheelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_max > 0.0 && self.l_max <= 100.0) {
            return Err(Error::invalid(format!(
                "l_max must lie in (0,100], got {}",
                self.l_max
            )));
        }
        if !(self.c_max > 0.0 && self.c_max.is_finite()) {
            return Err(Error::invalid(format!(
                "c_max must be positive, got {}",
                self.c_max
            )));
        }
        if !self.hue_offset.is_finite() {
            return Err(Error::invalid("hue_offset must be finite"));
        }
        for deg in 0..360 {
            let c = lch_to_lab(LchColor::new(self.l_max, self.c_max, deg as f64));
            if !in_gamut(c, RING_EPS) {
                return Err(Error::invalid(format!(
                    "cone base L={} C={} leaves the sRGB gamut at hue {deg}°",
                    self.l_max, self.c_max
                )));
            }
        }
        Ok(())
    }
}

fn check_magnitude(m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::invalid(format!(
            "magnitude must lie in [0,1], got {m}"
        )));
    }
    Ok(())
}

/// Color of a vector with angle `theta` (radians) and normalized magnitude `m`.
pub fn wheel_color(theta: f64, m: f64, spec: &WheelSpec) -> Result<LabColor> {
    check_magnitude(m)?;
    let h = normalize_degrees(spec.hue_offset + theta.to_degrees());
    Ok(lch_to_lab(LchColor::new(m * spec.l_max, m * spec.c_max, h)))
}

/// The HSV reference wheel: hue from angle, value from magnitude, full saturation.
pub fn hsv_wheel_color(theta: f64, m: f64) -> Result<SrgbColor> {
    check_magnitude(m)?;
    hsv_to_srgb(HsvColor::new(normalize_degrees(theta.to_degrees()), 1.0, m))
}

fn resolve_vmax(field: &VectorField2D, vmax: Ceiling) -> Result<f64> {
    match vmax {
        Ceiling::Fixed(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ceiling::Fixed(v) => Err(Error::invalid(format!("vmax must be positive, got {v}"))),
        Ceiling::Auto => {
            let v = field.max_magnitude();
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::invalid(
                    "all-zero field: automatic vmax is undefined",
                ))
            }
        }
    }
}

fn polar(v: [f64; 2], vmax: f64) -> (f64, f64) {
    let m = (v[0].hypot(v[1]) / vmax).min(1.0);
    (v[1].atan2(v[0]), m)
}

/// Render a vector field on the perceptually uniform cone.
pub fn map_vector_field(
    field: &VectorField2D,
    spec: &WheelSpec,
    vmax: Ceiling,
    policy: GamutPolicy,
) -> Result<Mapped> {
    spec.validate()?;
    let vmax = resolve_vmax(field, vmax)?;
    let out = field
        .data
        .par_iter()
        .map(|&v| {
            let (theta, m) = polar(v, vmax);
            lab_to_srgb_reporting(wheel_color(theta, m, spec)?, policy)
        })
        .collect::<Result<Vec<_>>>()?;
    Mapped::from_pairs(field.width, field.height, out, vmax)
}

/// Render a vector field with the HSV reference wheel.
pub fn map_vector_field_hsv(field: &VectorField2D, vmax: Ceiling) -> Result<Mapped> {
    let vmax = resolve_vmax(field, vmax)?;
    let out = field
        .data
        .par_iter()
        .map(|&v| {
            let (theta, m) = polar(v, vmax);
            Ok((hsv_wheel_color(theta, m)?, false))
        })
        .collect::<Result<Vec<_>>>()?;
    Mapped::from_pairs(field.width, field.height, out, vmax)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wheel {
    Uniform(WheelSpec),
    Hsv,
}

/// Perceptual and lightness profiles of a color wheel at fixed magnitude.
/// Derivatives are in ΔE per degree of vector angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WheelAnalysis {
    #[serde(rename = "angles_deg")]
    pub angles: Vec<f64>,
    #[serde(rename = "dE_per_deg")]
    pub perceptual_derivative: Vec<f64>,
    pub lightness: Vec<f64>,
    #[serde(rename = "min_discernible_angle_deg")]
    pub min_discernible_angle: f64,
    pub jnd: f64,
}

impl WheelAnalysis {
    pub fn min_derivative(&self) -> f64 {
        self.perceptual_derivative
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_derivative(&self) -> f64 {
        self.perceptual_derivative
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_derivative(&self) -> f64 {
        self.perceptual_derivative.iter().sum::<f64>() / self.perceptual_derivative.len() as f64
    }

    /// Coefficient of variation (population) of the derivative.
    pub fn derivative_cv(&self) -> f64 {
        let mean = self.mean_derivative();
        let n = self.perceptual_derivative.len() as f64;
        let var = self
            .perceptual_derivative
            .iter()
            .map(|d| (d - mean).powi(2))
            .sum::<f64>()
            / n;
        var.sqrt() / mean
    }

    /// Angles where the derivative has a strict local maximum, on the circle.
    pub fn local_maxima(&self) -> Vec<f64> {
        let d = &self.perceptual_derivative;
        let n = d.len();
        (0..n)
            .filter(|&i| {
                let prev = d[(i + n - 1) % n];
                let next = d[(i + 1) % n];
                d[i] > prev && d[i] >= next
            })
            .map(|i| self.angles[i])
            .collect()
    }
}

pub fn analyze_wheel(wheel: Wheel, m: f64, steps: usize, jnd: f64) -> Result<WheelAnalysis> {
    check_magnitude(m)?;
    if steps < 360 {
        return Err(Error::invalid(format!(
            "steps must be at least 360, got {steps}"
        )));
    }
    if !(jnd > 0.0 && jnd.is_finite()) {
        return Err(Error::invalid(format!("jnd must be positive, got {jnd}")));
    }
    if m == 0.0 {
        return Err(Error::DegenerateWheel(
            "magnitude 0 maps every angle to black".into(),
        ));
    }
    if let Wheel::Uniform(spec) = &wheel {
        spec.validate()?;
    }
    let step = 360.0 / steps as f64;
    let angles: Vec<f64> = (0..steps).map(|i| i as f64 * step).collect();
    let colors = angles
        .iter()
        .map(|&deg| match &wheel {
            Wheel::Uniform(spec) => wheel_color(deg.to_radians(), m, spec),
            Wheel::Hsv => srgb_to_lab(hsv_wheel_color(deg.to_radians(), m)?),
        })
        .collect::<Result<Vec<_>>>()?;
    let perceptual_derivative: Vec<f64> = (0..steps)
        .map(|i| {
            let prev = colors[(i + steps - 1) % steps];
            let next = colors[(i + 1) % steps];
            delta_e(prev, next) / (2.0 * step)
        })
        .collect();
    let lightness = colors.iter().map(|c| c.l).collect();
    let min = perceptual_derivative
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::DegenerateWheel(
            "perceptual derivative vanishes at some angle".into(),
        ));
    }
    Ok(WheelAnalysis {
        angles,
        perceptual_derivative,
        lightness,
        min_discernible_angle: jnd / min,
        jnd,
    })
}
