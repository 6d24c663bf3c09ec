//! Deuteranomaly simulation and lightness / chromaticity ablations.
//!
//! Simulation uses the physiologically based matrices of Machado, Oliveira
//! and Fernandes (2009), tabulated at severity steps of 0.1 in
//! `data/deuteranomaly.csv` and linearly interpolated in between. The
//! matrices act on linear RGB.

use std::sync::LazyLock;

use crate::colorspace::{
    lab_to_srgb, linear_to_srgb, mat_mul, srgb_to_lab, srgb_to_linear, LabColor, LinearRgb,
};
use crate::error::{Error, Result};
use crate::gamut::GamutPolicy;
use crate::raster::Raster;

const TABLE_CSV: &str = include_str!("../data/deuteranomaly.csv");

type Matrix = [[f64; 3]; 3];

/// The eleven matrices for severity 0.0, 0.1, ..., 1.0.
static DEUTERANOMALY: LazyLock<Vec<Matrix>> =
    LazyLock::new(|| parse_table(TABLE_CSV).expect("bundled deuteranomaly table is valid"));

fn parse_table(text: &str) -> Result<Vec<Matrix>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::invalid(format!("deuteranomaly table: {e}")))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::invalid(format!("deuteranomaly table row {i}: {e}")))?;
        if vals.len() != 10 || (vals[0] - i as f64 / 10.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "deuteranomaly table row {i} is malformed"
            )));
        }
        out.push([
            [vals[1], vals[2], vals[3]],
            [vals[4], vals[5], vals[6]],
            [vals[7], vals[8], vals[9]],
        ]);
    }
    if out.len() != 11 {
        return Err(Error::invalid("deuteranomaly table needs 11 rows"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CvdKind {
    #[default]
    Deuteranomaly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvdModel {
    pub kind: CvdKind,
    pub severity: f64,
}

impl CvdModel {
    pub fn deuteranomaly(severity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&severity) {
            return Err(Error::invalid(format!(
                "severity must lie in [0,1], got {severity}"
            )));
        }
        Ok(CvdModel {
            kind: CvdKind::Deuteranomaly,
            severity,
        })
    }

    /// Simulation matrix on linear RGB.
    pub fn matrix(&self) -> Result<Matrix> {
        if !(0.0..=1.0).contains(&self.severity) {
            return Err(Error::invalid(format!(
                "severity must lie in [0,1], got {}",
                self.severity
            )));
        }
        let table = &*DEUTERANOMALY;
        let pos = self.severity * 10.0;
        let lo = (pos.floor() as usize).min(9);
        let t = pos - lo as f64;
        let (a, b) = (&table[lo], &table[lo + 1]);
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (1.0 - t) * a[i][j] + t * b[i][j];
            }
        }
        Ok(m)
    }

    pub fn apply(&self, c: crate::SrgbColor) -> Result<crate::SrgbColor> {
        let m = self.matrix()?;
        Ok(apply_matrix(&m, c))
    }
}

fn apply_matrix(m: &Matrix, c: crate::SrgbColor) -> crate::SrgbColor {
    let lin = mat_mul(m, srgb_to_linear(c).to_array());
    linear_to_srgb(LinearRgb::from_array(lin)).clamped()
}

pub fn simulate_cvd(img: &Raster, model: &CvdModel) -> Result<Raster> {
    let m = model.matrix()?;
    Ok(img.map_pixels(|p| apply_matrix(&m, p)))
}

/// Drop chroma, keep lightness: a*, b* → 0.
pub fn desaturate(img: &Raster) -> Result<Raster> {
    img.try_map_pixels(|p| {
        let lab = srgb_to_lab(p)?;
        lab_to_srgb(LabColor::new(lab.l, 0.0, 0.0), GamutPolicy::Clip)
    })
}

pub const DEFAULT_FLAT_LIGHTNESS: f64 = 75.0;

/// Replace every pixel's lightness with `l0`, keeping hue and as much chroma as fits.
pub fn flatten_lightness(img: &Raster, l0: f64) -> Result<Raster> {
    if !(0.0..=100.0).contains(&l0) {
        return Err(Error::invalid(format!("L0 must lie in [0,100], got {l0}")));
    }
    img.try_map_pixels(|p| {
        let lab = srgb_to_lab(p)?;
        lab_to_srgb(LabColor::new(l0, lab.a, lab.b), GamutPolicy::Compress)
    })
}
