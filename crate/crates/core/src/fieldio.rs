//! Field ingestion (raw f32 with a JSON sidecar header, or CSV grids),
//! PNG output and legend rendering.
//!
//! Raw format: the header is a JSON object with exactly the keys
//! `width`, `height`, `channels`, `dtype` (`"f32"`), `byte_order` (`"LE"`)
//! and `layout` (`"row-major-interleaved"`). The payload is
//! `width * height * channels` little-endian IEEE-754 binary32 values,
//! pixel-interleaved, rows top to bottom.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cmpuc::{composition_color, CompositionField, TriangleSpec};
use crate::colorspace::{lab_to_srgb, SrgbColor};
use crate::error::{Error, Result};
use crate::gamut::GamutPolicy;
use crate::papuc::{wheel_color, VectorField2D, WheelSpec};
use crate::raster::Raster;

pub const DTYPE_F32: &str = "f32";
pub const BYTE_ORDER_LE: &str = "LE";
pub const LAYOUT_INTERLEAVED: &str = "row-major-interleaved";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub dtype: String,
    pub byte_order: String,
    pub layout: String,
}

impl FieldHeader {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        FieldHeader {
            width,
            height,
            channels,
            dtype: DTYPE_F32.into(),
            byte_order: BYTE_ORDER_LE.into(),
            layout: LAYOUT_INTERLEAVED.into(),
        }
    }

    pub fn payload_len(&self) -> usize {
        self.width * self.height * self.channels * 4
    }

    fn check(&self) -> Result<()> {
        if self.dtype != DTYPE_F32 {
            return Err(Error::Unsupported(format!("dtype {:?}", self.dtype)));
        }
        if self.byte_order != BYTE_ORDER_LE {
            return Err(Error::Unsupported(format!(
                "byte_order {:?}",
                self.byte_order
            )));
        }
        if self.layout != LAYOUT_INTERLEAVED {
            return Err(Error::Unsupported(format!("layout {:?}", self.layout)));
        }
        if !(2..=3).contains(&self.channels) {
            return Err(Error::Unsupported(format!(
                "{} channels (expected 2 or 3)",
                self.channels
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid("field dimensions must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Vector(VectorField2D),
    Composition(CompositionField),
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

pub fn parse_header(text: &str, source: &str) -> Result<FieldHeader> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: source.to_string(),
        line: e.line() as u64,
        msg: e.to_string(),
    })
}

/// Decode a payload against its header.
pub fn decode_field(header: &FieldHeader, payload: &[u8]) -> Result<Field> {
    header.check()?;
    if payload.len() != header.payload_len() {
        return Err(Error::SizeMismatch {
            expected: header.payload_len(),
            actual: payload.len(),
        });
    }
    let mut values = Vec::with_capacity(payload.len() / 4);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("chunk of 4"));
        if !v.is_finite() {
            return Err(Error::NonFinite { offset: i * 4 });
        }
        values.push(v as f64);
    }
    let (w, h) = (header.width, header.height);
    match header.channels {
        2 => {
            let data = values.chunks_exact(2).map(|v| [v[0], v[1]]).collect();
            Ok(Field::Vector(VectorField2D::new(w, h, data)?))
        }
        _ => {
            let mut channels: [Vec<f64>; 3] = Default::default();
            for px in values.chunks_exact(3) {
                for k in 0..3 {
                    channels[k].push(px[k]);
                }
            }
            let labels = ["c1", "c2", "c3"].map(String::from);
            Ok(Field::Composition(CompositionField::new(
                w, h, channels, labels,
            )?))
        }
    }
}

pub fn load_field(header_path: &Path, data_path: &Path) -> Result<Field> {
    let text = String::from_utf8(read_bytes(header_path)?).map_err(|_| Error::Parse {
        path: header_path.display().to_string(),
        line: 0,
        msg: "header is not UTF-8".into(),
    })?;
    let header = parse_header(&text, &header_path.display().to_string())?;
    decode_field(&header, &read_bytes(data_path)?)
}

pub fn encode_field(field: &Field) -> (FieldHeader, Vec<u8>) {
    let (header, values): (FieldHeader, Vec<f64>) = match field {
        Field::Vector(f) => (
            FieldHeader::new(f.width(), f.height(), 2),
            f.data().iter().flat_map(|v| *v).collect(),
        ),
        Field::Composition(f) => (
            FieldHeader::new(f.width(), f.height(), 3),
            (0..f.width() * f.height())
                .flat_map(|i| f.pixel(i))
                .collect(),
        ),
    };
    let bytes = values
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect();
    (header, bytes)
}

pub fn save_field(field: &Field, header_path: &Path, data_path: &Path) -> Result<()> {
    let (header, bytes) = encode_field(field);
    let json = serde_json::to_string_pretty(&header).expect("header serializes");
    std::fs::write(header_path, json + "\n").map_err(|e| Error::io(header_path, e))?;
    std::fs::write(data_path, bytes).map_err(|e| Error::io(data_path, e))
}

/// A rectangular grid of reals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

pub fn parse_csv_grid(text: &str, source: &str) -> Result<Grid> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut width = 0;
    let mut values = Vec::new();
    let mut height = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            path: source.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if height == 0 {
            width = rec.len();
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                path: source.to_string(),
                line,
                msg: format!("{field:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: source.to_string(),
                    line,
                    msg: format!("non-finite value {field:?}"),
                });
            }
            values.push(v);
        }
        height += 1;
    }
    if height == 0 || width == 0 {
        return Err(Error::Parse {
            path: source.to_string(),
            line: 1,
            msg: "empty grid".into(),
        });
    }
    Ok(Grid {
        width,
        height,
        values,
    })
}

pub fn load_csv_channel(path: &Path) -> Result<Grid> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: "file is not UTF-8".into(),
    })?;
    parse_csv_grid(&text, &path.display().to_string())
}

/// Combine three equally sized grids into a composition field.
pub fn composition_from_grids(grids: [Grid; 3], labels: [String; 3]) -> Result<CompositionField> {
    let (w, h) = (grids[0].width, grids[0].height);
    if grids.iter().any(|g| g.width != w || g.height != h) {
        return Err(Error::invalid("composition channels differ in size"));
    }
    CompositionField::new(w, h, grids.map(|g| g.values), labels)
}

pub fn encode_png(raster: &Raster) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, raster.width() as u32, raster.height() as u32);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_source_srgb(png::SrgbRenderingIntent::Perceptual);
        let data: Vec<u8> = match raster.mask() {
            None => {
                enc.set_color(png::ColorType::Rgb);
                raster.pixels().iter().flat_map(|p| p.to_rgb8()).collect()
            }
            Some(mask) => {
                enc.set_color(png::ColorType::Rgba);
                raster
                    .pixels()
                    .iter()
                    .zip(mask)
                    .flat_map(|(p, &on)| {
                        let [r, g, b] = p.to_rgb8();
                        [r, g, b, if on { 255 } else { 0 }]
                    })
                    .collect()
            }
        };
        let mut w = enc.write_header().expect("in-memory PNG header");
        w.write_image_data(&data).expect("in-memory PNG data");
    }
    out
}

pub fn save_png(raster: &Raster, path: &Path) -> Result<()> {
    std::fs::write(path, encode_png(raster)).map_err(|e| Error::io(path, e))
}

pub fn decode_png(bytes: &[u8], source: &Path) -> Result<Raster> {
    let png_err = |msg: String| Error::Png {
        path: source.to_path_buf(),
        msg,
    };
    let mut dec = png::Decoder::new(bytes);
    dec.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = dec.read_info().map_err(|e| png_err(e.to_string()))?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| png_err(e.to_string()))?;
    let buf = &buf[..info.buffer_size()];
    let (w, h) = (info.width as usize, info.height as usize);
    let stride = match info.color_type {
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        other => return Err(png_err(format!("unsupported color type {other:?}"))),
    };
    let mut pixels = Vec::with_capacity(w * h);
    let mut mask = Vec::with_capacity(w * h);
    for px in buf.chunks_exact(stride) {
        let (rgb, alpha) = match stride {
            1 => ([px[0]; 3], 255),
            2 => ([px[0]; 3], px[1]),
            3 => ([px[0], px[1], px[2]], 255),
            _ => ([px[0], px[1], px[2]], px[3]),
        };
        pixels.push(SrgbColor::from_rgb8(rgb));
        mask.push(alpha > 0);
    }
    let raster = Raster::new(w, h, pixels)?;
    if stride == 2 || stride == 4 {
        raster.with_mask(mask)
    } else {
        Ok(raster)
    }
}

pub fn load_png(path: &Path) -> Result<Raster> {
    decode_png(&read_bytes(path)?, path)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LegendKind {
    Wheel(WheelSpec),
    /// Labels are for the caller's annotation; they are not rasterized.
    Triangle(TriangleSpec, [String; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Background {
    #[default]
    White,
    Transparent,
}

/// Geometry shared by both legends: the center pixel and the radius, in pixels.
pub fn legend_geometry(size: usize) -> (usize, f64) {
    let center = size / 2;
    (center, (size / 2 - 1) as f64)
}

/// Render a color-wheel or mixing-triangle legend of `size`×`size` pixels.
///
/// The wheel puts m = r / radius and θ = azimuth (counterclockwise, y up)
/// through [`wheel_color`]. The triangle places component k at image angle
/// `h0 + k·120°` on the circumradius and sweeps barycentric weights at full
/// intensity through [`composition_color`].
pub fn render_legend(kind: &LegendKind, size: usize, background: Background) -> Result<Raster> {
    if size < 64 {
        return Err(Error::invalid(format!(
            "legend size must be at least 64, got {size}"
        )));
    }
    let (center, radius) = legend_geometry(size);
    let mut pixels = Vec::with_capacity(size * size);
    let mut mask = Vec::with_capacity(size * size);
    let bg = SrgbColor::WHITE;
    let corners = match kind {
        LegendKind::Triangle(spec, _) => {
            spec.validate()?;
            Some([0.0, 120.0, 240.0].map(|k: f64| {
                let (s, c) = (spec.h0 + k).to_radians().sin_cos();
                (radius * c, radius * s)
            }))
        }
        LegendKind::Wheel(spec) => {
            spec.validate()?;
            None
        }
    };
    for y in 0..size {
        for x in 0..size {
            let dx = x as f64 - center as f64;
            let dy = center as f64 - y as f64;
            let color = match (kind, corners) {
                (LegendKind::Wheel(spec), _) => {
                    let r = dx.hypot(dy);
                    if r <= radius {
                        let lab = wheel_color(dy.atan2(dx), r / radius, spec)?;
                        Some(lab_to_srgb(lab, GamutPolicy::Compress)?)
                    } else {
                        None
                    }
                }
                (LegendKind::Triangle(spec, _), Some(v)) => barycentric((dx, dy), &v)
                    .map(|w| lab_to_srgb(composition_color(w, 1.0, spec)?, GamutPolicy::Compress))
                    .transpose()?,
                _ => unreachable!("triangle legends always have corners"),
            };
            pixels.push(color.unwrap_or(bg));
            mask.push(color.is_some());
        }
    }
    let raster = Raster::new(size, size, pixels)?;
    match background {
        Background::White => Ok(raster),
        Background::Transparent => raster.with_mask(mask),
    }
}

/// Barycentric weights of `p` in the triangle, or `None` outside it.
fn barycentric(p: (f64, f64), v: &[(f64, f64); 3]) -> Option<[f64; 3]> {
    let (x, y) = p;
    let [(x1, y1), (x2, y2), (x3, y3)] = *v;
    let det = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3);
    let w1 = ((y2 - y3) * (x - x3) + (x3 - x2) * (y - y3)) / det;
    let w2 = ((y3 - y1) * (x - x3) + (x1 - x3) * (y - y3)) / det;
    let w3 = 1.0 - w1 - w2;
    let tol = -1e-9;
    (w1 >= tol && w2 >= tol && w3 >= tol).then(|| [w1.max(0.0), w2.max(0.0), w3.max(0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::srgb_to_lab;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zeros_vector_field() {
        let header = FieldHeader::new(2, 2, 2);
        let f = decode_field(&header, &[0u8; 32]).unwrap();
        match f {
            Field::Vector(v) => assert_eq!(v.data(), &[[0.0, 0.0]; 4]),
            other => panic!("expected a vector field, got {other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        let header = FieldHeader::new(3, 2, 2);
        assert!(matches!(
            decode_field(&header, &[0u8; 32]),
            Err(Error::SizeMismatch {
                expected: 48,
                actual: 32
            })
        ));
        let mut bad = FieldHeader::new(1, 1, 2);
        bad.dtype = "f64".into();
        assert!(matches!(
            decode_field(&bad, &[0u8; 8]),
            Err(Error::Unsupported(_))
        ));
        let four = FieldHeader::new(1, 1, 4);
        assert!(matches!(
            decode_field(&four, &[0u8; 16]),
            Err(Error::Unsupported(_))
        ));

        let mut payload = vec![0u8; 16];
        payload[8..12].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            decode_field(&FieldHeader::new(2, 1, 2), &payload),
            Err(Error::NonFinite { offset: 8 })
        ));

        let extra = r#"{"width":1,"height":1,"channels":2,"dtype":"f32","byte_order":"LE","layout":"row-major-interleaved","units":"nm"}"#;
        assert!(matches!(
            parse_header(extra, "h.json"),
            Err(Error::Parse { .. })
        ));
        let missing = r#"{"width":1,"height":1,"channels":2,"dtype":"f32","byte_order":"LE"}"#;
        assert!(parse_header(missing, "h.json").is_err());
    }

    #[test]
    fn composition_payload_is_interleaved() {
        let values: Vec<u8> = [1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0]
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        let Field::Composition(c) = decode_field(&FieldHeader::new(2, 1, 3), &values).unwrap()
        else {
            panic!("expected composition");
        };
        assert_eq!(c.channels()[0], vec![1.0, 4.0]);
        assert_eq!(c.channels()[2], vec![3.0, 6.0]);
    }

    #[test]
    fn csv_examples() {
        let g = parse_csv_grid("0,1\n2,3", "t").unwrap();
        assert_eq!((g.width, g.height), (2, 2));
        assert_eq!(g.values, vec![0.0, 1.0, 2.0, 3.0]);
        let g = parse_csv_grid("5", "t").unwrap();
        assert_eq!(g.values, vec![5.0]);
        assert!(matches!(parse_csv_grid("", "t"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_csv_grid("0,1\n2,3\n4\n", "t"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_csv_grid("1,x", "t"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_csv_grid("1,inf", "t").is_err());
    }

    #[test]
    fn png_quantization() {
        let white = Raster::filled(1, 1, SrgbColor::WHITE).unwrap();
        let back = decode_png(&encode_png(&white), Path::new("mem")).unwrap();
        assert_eq!(back.get(0, 0).to_rgb8(), [255, 255, 255]);
        assert_eq!(SrgbColor::new(0.5, 0.5, 0.5).to_rgb8(), [128, 128, 128]);
    }

    #[test]
    fn png_round_trip_with_mask() {
        let px = (0..12)
            .map(|i| SrgbColor::from_rgb8([i * 20, 255 - i * 7, 3 * i]))
            .collect();
        let r = Raster::new(4, 3, px)
            .unwrap()
            .with_mask((0..12).map(|i| i % 3 != 0).collect())
            .unwrap();
        let back = decode_png(&encode_png(&r), Path::new("mem")).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn wheel_legend() {
        let spec = WheelSpec::default();
        let size = 96;
        let legend =
            render_legend(&LegendKind::Wheel(spec), size, Background::Transparent).unwrap();
        let (c, radius) = legend_geometry(size);
        assert_eq!(legend.get(c, c), SrgbColor::BLACK);
        assert!(!legend.mask().unwrap()[0]);
        // Pixel oracle: polar coordinates of the pixel through wheel_color.
        for &(x, y) in &[(c + 20, c), (c, c - 30), (c - 10, c + 25), (c + 44, c + 3)] {
            let (dx, dy) = (x as f64 - c as f64, c as f64 - y as f64);
            let want = lab_to_srgb(
                wheel_color(dy.atan2(dx), dx.hypot(dy) / radius, &spec).unwrap(),
                GamutPolicy::Compress,
            )
            .unwrap();
            assert_eq!(legend.get(x, y), want);
        }
    }

    #[test]
    fn triangle_legend() {
        let spec = TriangleSpec::default();
        let labels = ["P", "Pt", "Ca"].map(String::from);
        let legend =
            render_legend(&LegendKind::Triangle(spec, labels), 64, Background::White).unwrap();
        let (c, _) = legend_geometry(64);
        let lab = srgb_to_lab(legend.get(c, c)).unwrap();
        assert_abs_diff_eq!(lab.l, 61.50, epsilon = 1e-4);
        assert!(lab.chroma() < 1e-3);
        assert_eq!(legend.get(0, 0), SrgbColor::WHITE);
        assert!(render_legend(
            &LegendKind::Wheel(WheelSpec::default()),
            32,
            Background::White
        )
        .is_err());
    }
}
