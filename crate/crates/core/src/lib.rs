//! Perceptually uniform color mapping of vector and composition fields.
//!
//! The working space is CIELAB (D65, CIE76 ΔE). Two mapping geometries are
//! provided: a cone for 2D vector fields ([`papuc`]) and an inverted trigonal
//! pyramid for three-component composition fields ([`cmpuc`]), each with its
//! traditional HSV / RGB-mixing counterpart for comparison. Supporting modules
//! cover gamut searches, color-vision-deficiency simulation, colormap
//! linting and field / image I/O.

pub mod cli;
pub mod cmaplint;
pub mod cmpuc;
pub mod colorspace;
pub mod cvd;
pub mod error;
pub mod fieldio;
pub mod gamut;
pub mod papuc;
pub mod raster;

pub use colorspace::{delta_e, LabColor, LchColor, SrgbColor};
pub use error::{Error, Result};
pub use gamut::GamutPolicy;
pub use raster::Raster;

/// Normalization ceiling for field magnitudes or totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ceiling {
    /// Use the maximum found in the field.
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for Ceiling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Ceiling::Auto);
        }
        s.parse::<f64>()
            .map(Ceiling::Fixed)
            .map_err(|_| Error::InvalidInput(format!("expected a number or \"auto\", got {s:?}")))
    }
}

/// A rendered field plus the number of pixels the gamut policy had to adjust
/// and the ceiling that was actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct Mapped {
    pub raster: Raster,
    pub adjusted: usize,
    pub ceiling: f64,
}

impl Mapped {
    pub(crate) fn from_pairs(
        width: usize,
        height: usize,
        pairs: Vec<(SrgbColor, bool)>,
        ceiling: f64,
    ) -> Result<Self> {
        let adjusted = pairs.iter().filter(|p| p.1).count();
        let pixels = pairs.into_iter().map(|p| p.0).collect();
        Ok(Mapped {
            raster: Raster::new(width, height, pixels)?,
            adjusted,
            ceiling,
        })
    }
}
