//! sRGB gamut membership of Lab colors and the inscribed-shape searches
//! that fix the mapping geometries.

use std::collections::HashMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorspace::{lab_to_srgb_unchecked, lch_to_lab, normalize_degrees, LabColor, LchColor};
use crate::error::{Error, Result};

/// What to do when a Lab color has no exact sRGB representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GamutPolicy {
    /// Reject with [`Error::OutOfGamut`].
    Error,
    /// Clamp each channel to [0,1].
    Clip,
    /// Reduce chroma at fixed lightness and hue until the color fits.
    #[default]
    Compress,
}

impl FromStr for GamutPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(GamutPolicy::Error),
            "clip" => Ok(GamutPolicy::Clip),
            "compress" => Ok(GamutPolicy::Compress),
            other => Err(Error::invalid(format!(
                "unknown gamut policy {other:?} (expected compress, clip or error)"
            ))),
        }
    }
}

/// Upper end of the chroma bracket for all bisections.
pub const CHROMA_BRACKET: f64 = 200.0;

/// Width at which the chroma bisections stop.
pub const CHROMA_TOLERANCE: f64 = 1e-4;

pub fn in_gamut(c: LabColor, eps: f64) -> bool {
    lab_to_srgb_unchecked(c).in_gamut(eps)
}

fn color_at(l: f64, chroma: f64, hue_deg: f64) -> LabColor {
    lch_to_lab(LchColor::new(l, chroma, hue_deg))
}

/// Largest chroma in [0, hi] for which `fits` holds, assuming `fits(0)`.
fn bisect_chroma(hi: f64, fits: impl Fn(f64) -> bool) -> f64 {
    if fits(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > CHROMA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest in-gamut chroma at lightness `l` and hue `hue_deg`.
pub fn max_chroma(l: f64, hue_deg: f64) -> f64 {
    if !in_gamut(color_at(l, 0.0, hue_deg), 0.0) {
        return 0.0;
    }
    bisect_chroma(CHROMA_BRACKET, |c| in_gamut(color_at(l, c, hue_deg), 0.0))
}

/// Hue sampling of [`max_inscribed_circle`], in degrees.
pub const CIRCLE_HUE_STEP: f64 = 0.25;

/// Radius of the largest neutral-centered circle in the a*-b* plane at
/// lightness `l` that lies entirely inside the gamut.
pub fn max_inscribed_circle(l: f64) -> f64 {
    let n = (360.0 / CIRCLE_HUE_STEP).round() as usize;
    (0..n)
        .into_par_iter()
        .map(|i| max_chroma(l, i as f64 * CIRCLE_HUE_STEP))
        .reduce(|| f64::INFINITY, f64::min)
}

/// The largest white-centered equilateral triangle found in the gamut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleSolution {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// Hue of the first vertex, canonical in [0,120).
    pub hue_deg: f64,
}

impl TriangleSolution {
    pub fn vertices(&self) -> [LabColor; 3] {
        triangle_vertices(self.l, self.r, self.hue_deg)
    }
}

pub fn triangle_vertices(l: f64, r: f64, h0: f64) -> [LabColor; 3] {
    [0.0, 120.0, 240.0].map(|k| color_at(l, r, h0 + k))
}

/// Largest circumradius such that all three vertices at (`l`, `h0 + k·120°`) are in gamut.
pub fn triangle_radius(l: f64, h0: f64) -> f64 {
    if !in_gamut(color_at(l, 0.0, h0), 0.0) {
        return 0.0;
    }
    bisect_chroma(CHROMA_BRACKET, |r| {
        triangle_vertices(l, r, h0)
            .iter()
            .all(|&v| in_gamut(v, 0.0))
    })
}

/// Grid steps of the coarse passes; the final pass uses the requested steps.
const COARSE_STEPS: [f64; 2] = [1.0, 0.25];

/// Coarse-to-fine search for the largest white-centered equilateral
/// triangle inside the gamut, over `l_range` and first-vertex hue in [0,120).
/// Equal radii resolve toward the lexicographically smaller (L, h0).
pub fn find_composition_triangle(
    l_range: (f64, f64),
    l_step: f64,
    h_step: f64,
) -> Result<TriangleSolution> {
    let (l_min, l_max) = l_range;
    if !(l_min.is_finite() && l_max.is_finite()) || l_min > l_max {
        return Err(Error::invalid(format!(
            "empty lightness range [{l_min}, {l_max}]"
        )));
    }
    if l_min < 0.0 || l_max > 100.0 {
        return Err(Error::invalid("lightness range must lie within [0,100]"));
    }
    if !(l_step > 0.0 && l_step <= 0.25) || !(h_step > 0.0 && h_step <= 0.25) {
        return Err(Error::invalid(format!(
            "steps must lie in (0, 0.25], got L step {l_step}, hue step {h_step}"
        )));
    }

    let mut search = TriangleSearch::default();
    let mut best: Option<(f64, f64, f64)> = None;
    let passes = COARSE_STEPS
        .iter()
        .map(|&s| (s.max(l_step), s.max(h_step)))
        .chain(std::iter::once((l_step, h_step)));
    for (pass, (ls, hs)) in passes.enumerate() {
        let (l_window, h_window) = match best {
            None => ((l_min, l_max), (0.0, 120.0 - hs)),
            Some((l0, h0, _)) => {
                let span = COARSE_STEPS[pass - 1];
                (
                    ((l0 - span).max(l_min), (l0 + span).min(l_max)),
                    (h0 - span, h0 + span),
                )
            }
        };
        let ls_grid = grid(l_window.0, l_window.1, ls, l_min);
        let hs_grid = grid(h_window.0, h_window.1, hs, 0.0);
        best = Some(search.best_on(&ls_grid, &hs_grid));
    }
    let (l, h0, r) = best.expect("at least one pass ran");
    Ok(TriangleSolution {
        l,
        r,
        hue_deg: canonical_h0(h0),
    })
}

fn canonical_h0(h0: f64) -> f64 {
    let h = normalize_degrees(h0).rem_euclid(120.0);
    if h >= 120.0 {
        0.0
    } else {
        h
    }
}

/// Points of the lattice `origin + k·step` inside [lo, hi].
fn grid(lo: f64, hi: f64, step: f64, origin: f64) -> Vec<f64> {
    let k0 = ((lo - origin) / step - 1e-9).ceil() as i64;
    let k1 = ((hi - origin) / step + 1e-9).floor() as i64;
    (k0..=k1).map(|k| origin + k as f64 * step).collect()
}

/// Radius cache keyed by the grid cell, shared across the refinement passes.
#[derive(Default)]
struct TriangleSearch {
    cache: HashMap<(i64, i64), f64>,
}

fn cell_key(l: f64, h0: f64) -> (i64, i64) {
    (
        (l * 1e6).round() as i64,
        (canonical_h0(h0) * 1e6).round() as i64,
    )
}

impl TriangleSearch {
    /// Returns (L, h0, R) of the best cell.
    fn best_on(&mut self, ls: &[f64], hs: &[f64]) -> (f64, f64, f64) {
        let cells: Vec<(f64, f64)> = ls
            .iter()
            .flat_map(|&l| hs.iter().map(move |&h| (l, h)))
            .collect();
        let missing: Vec<(f64, f64)> = cells
            .iter()
            .copied()
            .filter(|&(l, h)| !self.cache.contains_key(&cell_key(l, h)))
            .collect();
        let computed: Vec<((i64, i64), f64)> = missing
            .par_iter()
            .map(|&(l, h)| (cell_key(l, h), triangle_radius(l, h)))
            .collect();
        self.cache.extend(computed);

        let mut best = (cells[0].0, cells[0].1, f64::NEG_INFINITY);
        for &(l, h) in &cells {
            let r = self.cache[&cell_key(l, h)];
            let better = r > best.2
                || (r == best.2 && (l, canonical_h0(h)) < (best.0, canonical_h0(best.1)));
            if better {
                best = (l, h, r);
            }
        }
        best
    }
}
