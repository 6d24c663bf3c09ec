//! Conversions among sRGB, linear RGB, CIE XYZ, CIELAB, LCh and HSV, plus the
//! CIE76 color difference.
//!
//! All conversions use the D65 white point and the CIE 1931 2° observer:
//! X = 0.95047, Y = 1.00000, Z = 1.08883. The sRGB transfer function is
//! extended to negative inputs by odd symmetry so that out-of-gamut
//! intermediates stay representable.

use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamut::GamutPolicy;

/// D65 reference white (Y normalized to 1).
pub const WHITE_D65: [f64; 3] = [0.95047, 1.00000, 1.08883];

/// Channel tolerance used when deciding whether an sRGB triple is in gamut.
pub const GAMUT_TOLERANCE: f64 = 1e-9;

/// Chroma tolerance of the COMPRESS gamut policy.
pub const COMPRESS_TOLERANCE: f64 = 1e-4;

/// CIE xy chromaticities of the sRGB red, green and blue primaries.
const PRIMARIES_XY: [[f64; 2]; 3] = [[0.64, 0.33], [0.30, 0.60], [0.15, 0.06]];

/// Linear RGB → XYZ, built from the primaries so that RGB (1,1,1) maps
/// exactly onto [`WHITE_D65`].
static SRGB_TO_XYZ: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| {
    let col = |[x, y]: [f64; 2]| [x / y, 1.0, (1.0 - x - y) / y];
    let p = PRIMARIES_XY.map(col);
    let primaries = [
        [p[0][0], p[1][0], p[2][0]],
        [p[0][1], p[1][1], p[2][1]],
        [p[0][2], p[1][2], p[2][2]],
    ];
    let scale = mat_mul(&invert3(&primaries), WHITE_D65);
    primaries.map(|row| [row[0] * scale[0], row[1] * scale[1], row[2] * scale[2]])
});

static XYZ_TO_SRGB: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| invert3(&SRGB_TO_XYZ));

pub fn srgb_to_xyz_matrix() -> [[f64; 3]; 3] {
    *SRGB_TO_XYZ
}

// CIELAB piecewise breakpoint.
const DELTA: f64 = 6.0 / 29.0;

/// Gamma-encoded sRGB, nominally in [0,1] per channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SrgbColor {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl SrgbColor {
    pub const BLACK: SrgbColor = SrgbColor::new(0.0, 0.0, 0.0);
    pub const WHITE: SrgbColor = SrgbColor::new(1.0, 1.0, 1.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        SrgbColor { r, g, b }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn from_array([r, g, b]: [f64; 3]) -> Self {
        SrgbColor { r, g, b }
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }

    /// All channels in [-eps, 1+eps].
    pub fn in_gamut(&self, eps: f64) -> bool {
        self.to_array().iter().all(|&c| c >= -eps && c <= 1.0 + eps)
    }

    pub fn clamped(self) -> Self {
        SrgbColor::from_array(self.to_array().map(|c| c.clamp(0.0, 1.0)))
    }

    /// 8-bit quantization by `round(c * 255)` after clamping.
    pub fn to_rgb8(self) -> [u8; 3] {
        self.to_array()
            .map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8)
    }

    pub fn from_rgb8([r, g, b]: [u8; 3]) -> Self {
        SrgbColor::new(r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0)
    }
}

/// A point in CIELAB.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        LabColor { l, a, b }
    }

    pub fn is_finite(&self) -> bool {
        self.l.is_finite() && self.a.is_finite() && self.b.is_finite()
    }

    pub fn chroma(&self) -> f64 {
        self.a.hypot(self.b)
    }

    pub fn to_lch(self) -> LchColor {
        lab_to_lch(self)
    }
}

/// Cylindrical CIELAB: lightness, chroma, hue in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LchColor {
    pub l: f64,
    pub c: f64,
    pub h: f64,
}

impl LchColor {
    pub const fn new(l: f64, c: f64, h: f64) -> Self {
        LchColor { l, c, h }
    }

    pub fn to_lab(self) -> LabColor {
        lch_to_lab(self)
    }
}

/// Hexcone HSV. `h` in degrees, `s` and `v` in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HsvColor {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl HsvColor {
    pub const fn new(h: f64, s: f64, v: f64) -> Self {
        HsvColor { h, s, v }
    }
}

/// Linear-light RGB with sRGB primaries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearRgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl LinearRgb {
    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn from_array([r, g, b]: [f64; 3]) -> Self {
        LinearRgb { r, g, b }
    }
}

/// CIE XYZ with Y of the white point equal to 1.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct XyzColor {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    [
        [
            cof(1, 2, 1, 2) / det,
            -cof(0, 2, 1, 2) / det,
            cof(0, 1, 1, 2) / det,
        ],
        [
            -cof(1, 2, 0, 2) / det,
            cof(0, 2, 0, 2) / det,
            -cof(0, 1, 0, 2) / det,
        ],
        [
            cof(1, 2, 0, 1) / det,
            -cof(0, 2, 0, 1) / det,
            cof(0, 1, 0, 1) / det,
        ],
    ]
}

pub(crate) fn mat_mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    m.map(|row| row[0] * v[0] + row[1] * v[1] + row[2] * v[2])
}

/// sRGB decoding (electro-optical transfer), odd-symmetric.
pub fn srgb_decode(c: f64) -> f64 {
    let a = c.abs();
    let lin = if a <= 0.04045 {
        a / 12.92
    } else {
        ((a + 0.055) / 1.055).powf(2.4)
    };
    lin.copysign(c)
}

/// sRGB encoding, the inverse of [`srgb_decode`].
pub fn srgb_encode(c: f64) -> f64 {
    let a = c.abs();
    let enc = if a <= 0.0031308 {
        12.92 * a
    } else {
        1.055 * a.powf(1.0 / 2.4) - 0.055
    };
    enc.copysign(c)
}

pub fn srgb_to_linear(c: SrgbColor) -> LinearRgb {
    LinearRgb::from_array(c.to_array().map(srgb_decode))
}

pub fn linear_to_srgb(c: LinearRgb) -> SrgbColor {
    SrgbColor::from_array(c.to_array().map(srgb_encode))
}

pub fn linear_to_xyz(c: LinearRgb) -> XyzColor {
    let [x, y, z] = mat_mul(&SRGB_TO_XYZ, c.to_array());
    XyzColor { x, y, z }
}

pub fn xyz_to_linear(c: XyzColor) -> LinearRgb {
    LinearRgb::from_array(mat_mul(&XYZ_TO_SRGB, [c.x, c.y, c.z]))
}

fn lab_f(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > DELTA {
        t * t * t
    } else {
        3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
    }
}

pub fn xyz_to_lab(c: XyzColor) -> LabColor {
    let fx = lab_f(c.x / WHITE_D65[0]);
    let fy = lab_f(c.y / WHITE_D65[1]);
    let fz = lab_f(c.z / WHITE_D65[2]);
    LabColor::new(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

pub fn lab_to_xyz(c: LabColor) -> XyzColor {
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    XyzColor {
        x: WHITE_D65[0] * lab_f_inv(fx),
        y: WHITE_D65[1] * lab_f_inv(fy),
        z: WHITE_D65[2] * lab_f_inv(fz),
    }
}

pub fn srgb_to_lab(c: SrgbColor) -> Result<LabColor> {
    if !c.is_finite() {
        return Err(Error::invalid(format!("non-finite sRGB color {c:?}")));
    }
    Ok(xyz_to_lab(linear_to_xyz(srgb_to_linear(c))))
}

/// The exact Lab → sRGB chain with no gamut handling.
pub fn lab_to_srgb_unchecked(c: LabColor) -> SrgbColor {
    linear_to_srgb(xyz_to_linear(lab_to_xyz(c)))
}

pub fn lab_to_srgb(c: LabColor, policy: GamutPolicy) -> Result<SrgbColor> {
    lab_to_srgb_reporting(c, policy).map(|(rgb, _)| rgb)
}

/// Like [`lab_to_srgb`], also reporting whether the policy had to adjust the color.
pub fn lab_to_srgb_reporting(c: LabColor, policy: GamutPolicy) -> Result<(SrgbColor, bool)> {
    if !c.is_finite() {
        return Err(Error::invalid(format!("non-finite Lab color {c:?}")));
    }
    let rgb = lab_to_srgb_unchecked(c);
    if rgb.in_gamut(GAMUT_TOLERANCE) {
        return Ok((rgb.clamped(), false));
    }
    match policy {
        GamutPolicy::Error => Err(Error::OutOfGamut(c)),
        GamutPolicy::Clip => Ok((rgb.clamped(), true)),
        GamutPolicy::Compress => Ok((compress_chroma(c), true)),
    }
}

/// Bisect chroma downward at fixed L and hue until the color fits.
fn compress_chroma(c: LabColor) -> SrgbColor {
    let lch = lab_to_lch(c);
    let at = |chroma: f64| lab_to_srgb_unchecked(lch_to_lab(LchColor::new(lch.l, chroma, lch.h)));
    // Lightness outside the gamut's range: no chroma helps, fall back to the neutral clip.
    if !at(0.0).in_gamut(GAMUT_TOLERANCE) {
        return at(0.0).clamped();
    }
    let (mut lo, mut hi) = (0.0, lch.c);
    while hi - lo > COMPRESS_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if at(mid).in_gamut(GAMUT_TOLERANCE) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo).clamped()
}

/// CIE76 color difference: Euclidean distance in CIELAB.
pub fn delta_e(x: LabColor, y: LabColor) -> f64 {
    let (dl, da, db) = (x.l - y.l, x.a - y.a, x.b - y.b);
    (dl * dl + da * da + db * db).sqrt()
}

/// Hue is normalized to [0,360); at zero chroma the hue is 0.
pub fn lab_to_lch(c: LabColor) -> LchColor {
    let chroma = c.a.hypot(c.b);
    let h = if chroma == 0.0 {
        0.0
    } else {
        normalize_degrees(c.b.atan2(c.a).to_degrees())
    };
    LchColor::new(c.l, chroma, h)
}

pub fn lch_to_lab(c: LchColor) -> LabColor {
    let (s, k) = c.h.to_radians().sin_cos();
    LabColor::new(c.l, c.c * k, c.c * s)
}

/// Wrap an angle in degrees into [0,360).
pub fn normalize_degrees(h: f64) -> f64 {
    let r = h.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

pub fn hsv_to_srgb(c: HsvColor) -> Result<SrgbColor> {
    if !(0.0..=1.0).contains(&c.s) || !(0.0..=1.0).contains(&c.v) || !c.h.is_finite() {
        return Err(Error::invalid(format!(
            "HSV saturation and value must lie in [0,1], got {c:?}"
        )));
    }
    let h = normalize_degrees(c.h) / 60.0;
    let sector = h.floor();
    let f = h - sector;
    let p = c.v * (1.0 - c.s);
    let q = c.v * (1.0 - c.s * f);
    let t = c.v * (1.0 - c.s * (1.0 - f));
    let v = c.v;
    let (r, g, b) = match sector as u8 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    Ok(SrgbColor::new(r, g, b))
}
