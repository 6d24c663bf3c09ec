//! Scalar colormap analysis: arc length in CIELAB (total contrast),
//! perceptual derivative profile, lightness linearity.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::colorspace::{delta_e, srgb_to_lab, SrgbColor};
use crate::error::{Error, Result};

const VIRIDIS_CSV: &str = include_str!("../data/viridis.csv");
const JET_CSV: &str = include_str!("../data/jet.csv");

/// Samples at uniform parameter spacing over t ∈ [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct Colormap {
    name: String,
    entries: Vec<SrgbColor>,
}

impl Colormap {
    pub fn new(name: impl Into<String>, entries: Vec<SrgbColor>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::invalid(format!(
                "a colormap needs at least 2 entries, got {}",
                entries.len()
            )));
        }
        if let Some(i) = entries.iter().position(|c| !c.in_gamut(1e-9)) {
            return Err(Error::invalid(format!(
                "colormap entry {i} {:?} is outside [0,1]",
                entries[i]
            )));
        }
        Ok(Colormap {
            name: name.into(),
            entries,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[SrgbColor] {
        &self.entries
    }

    /// Parse `r,g,b` rows of floats in [0,1]. Lines starting with `#` are ignored.
    pub fn from_csv_reader(
        name: impl Into<String>,
        source: &str,
        reader: impl Read,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(source, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let parse_err = |msg: String| Error::Parse {
                path: source.to_string(),
                line,
                msg,
            };
            if rec.len() != 3 {
                return Err(parse_err(format!("expected 3 fields, found {}", rec.len())));
            }
            let mut c = [0.0; 3];
            for (k, field) in rec.iter().enumerate() {
                c[k] = field
                    .parse()
                    .map_err(|_| parse_err(format!("{field:?} is not a number")))?;
            }
            entries.push(SrgbColor::from_array(c));
        }
        Colormap::new(name, entries)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Colormap::from_csv_reader(name, &path.display().to_string(), file)
    }

    /// The 256-entry matplotlib viridis table.
    pub fn viridis() -> Self {
        Colormap::from_csv_reader("viridis", "data/viridis.csv", VIRIDIS_CSV.as_bytes())
            .expect("bundled viridis table is valid")
    }

    /// The 256-entry matplotlib jet table.
    pub fn jet() -> Self {
        Colormap::from_csv_reader("jet", "data/jet.csv", JET_CSV.as_bytes())
            .expect("bundled jet table is valid")
    }

    /// `n` samples linearly interpolated in sRGB between two colors.
    pub fn linear(
        name: impl Into<String>,
        from: SrgbColor,
        to: SrgbColor,
        n: usize,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("a colormap needs at least 2 entries"));
        }
        let entries = (0..n)
            .map(|i| lerp(from, to, i as f64 / (n - 1) as f64))
            .collect();
        Colormap::new(name, entries)
    }

    /// Resample to `n` entries by piecewise-linear interpolation in sRGB.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("a colormap needs at least 2 entries"));
        }
        let last = (self.entries.len() - 1) as f64;
        let entries = (0..n)
            .map(|i| {
                let pos = i as f64 / (n - 1) as f64 * last;
                let k = (pos.floor() as usize).min(self.entries.len() - 2);
                lerp(self.entries[k], self.entries[k + 1], pos - k as f64)
            })
            .collect();
        Colormap::new(self.name.clone(), entries)
    }

    pub fn reversed(&self) -> Self {
        let mut entries = self.entries.clone();
        entries.reverse();
        Colormap {
            name: self.name.clone(),
            entries,
        }
    }
}

fn lerp(a: SrgbColor, b: SrgbColor, t: f64) -> SrgbColor {
    SrgbColor::new(
        a.r + (b.r - a.r) * t,
        a.g + (b.g - a.g) * t,
        a.b + (b.b - a.b) * t,
    )
}

fn csv_error(source: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        path: source.to_string(),
        line,
        msg: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LintReport {
    pub name: String,
    /// Sum of adjacent ΔE.
    pub arc_length: f64,
    /// ΔE per unit t between adjacent samples.
    #[serde(rename = "dE_profile")]
    pub de_profile: Vec<f64>,
    pub lightness_profile: Vec<f64>,
    /// L* strictly increasing or strictly decreasing.
    pub lightness_monotonic: bool,
    /// Population coefficient of variation of `dE_profile`; 0 when degenerate.
    pub uniformity_cv: f64,
    /// Smallest perceivable change in t: JND over the steepest profile value.
    pub min_perceivable_step: Option<f64>,
    pub jnd: f64,
    /// Every entry has the same color.
    pub degenerate: bool,
}

pub fn lint_colormap(c: &Colormap, jnd: f64) -> Result<LintReport> {
    if c.entries.len() < 2 {
        return Err(Error::invalid("a colormap needs at least 2 entries"));
    }
    let labs = c
        .entries
        .iter()
        .map(|&e| srgb_to_lab(e))
        .collect::<Result<Vec<_>>>()?;
    let dt = 1.0 / (labs.len() - 1) as f64;
    let steps: Vec<f64> = labs.windows(2).map(|w| delta_e(w[0], w[1])).collect();
    let arc_length: f64 = steps.iter().sum();
    let de_profile: Vec<f64> = steps.iter().map(|d| d / dt).collect();
    let lightness_profile: Vec<f64> = labs.iter().map(|l| l.l).collect();
    let lightness_monotonic = lightness_profile.windows(2).all(|w| w[1] > w[0])
        || lightness_profile.windows(2).all(|w| w[1] < w[0]);

    let degenerate = arc_length == 0.0;
    let n = de_profile.len() as f64;
    let mean = de_profile.iter().sum::<f64>() / n;
    let uniformity_cv = if degenerate {
        0.0
    } else {
        let var = de_profile.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
        var.sqrt() / mean
    };
    let steepest = de_profile.iter().copied().fold(0.0, f64::max);
    Ok(LintReport {
        name: c.name.clone(),
        arc_length,
        de_profile,
        lightness_profile,
        lightness_monotonic,
        uniformity_cv,
        min_perceivable_step: (!degenerate).then(|| jnd / steepest),
        jnd,
        degenerate,
    })
}

pub fn arc_length(c: &Colormap) -> Result<f64> {
    let labs = c
        .entries
        .iter()
        .map(|&e| srgb_to_lab(e))
        .collect::<Result<Vec<_>>>()?;
    Ok(labs.windows(2).map(|w| delta_e(w[0], w[1])).sum())
}

/// Ratio of total contrast (arc lengths) of two colormaps.
pub fn contrast_ratio(a: &Colormap, b: &Colormap) -> Result<f64> {
    let denom = arc_length(b)?;
    if denom == 0.0 {
        return Err(Error::Degenerate(format!(
            "colormap {:?} has zero arc length",
            b.name
        )));
    }
    Ok(arc_length(a)? / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::LabColor;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_map() {
        let c = Colormap::new("flat", vec![SrgbColor::new(0.2, 0.4, 0.6); 5]).unwrap();
        let r = lint_colormap(&c, 2.3).unwrap();
        assert_eq!(r.arc_length, 0.0);
        assert!(r.degenerate);
        assert_eq!(r.min_perceivable_step, None);
        assert!(!r.lightness_monotonic);
    }

    #[test]
    fn black_to_white() {
        let c = Colormap::new("bw", vec![SrgbColor::BLACK, SrgbColor::WHITE]).unwrap();
        let r = lint_colormap(&c, 2.3).unwrap();
        assert_abs_diff_eq!(r.arc_length, 100.0, epsilon = 1e-4);
        assert_eq!(r.de_profile.len(), 1);
        assert_eq!(r.uniformity_cv, 0.0);
        assert!(r.lightness_monotonic);
        assert_abs_diff_eq!(r.min_perceivable_step.unwrap(), 0.023, epsilon = 1e-6);
    }

    #[test]
    fn too_few_entries() {
        assert!(Colormap::new("one", vec![SrgbColor::BLACK]).is_err());
        assert!(
            Colormap::new("bad", vec![SrgbColor::BLACK, SrgbColor::new(1.5, 0.0, 0.0)]).is_err()
        );
    }

    #[test]
    fn reference_tables() {
        let viridis = lint_colormap(&Colormap::viridis(), 2.3).unwrap();
        let jet = lint_colormap(&Colormap::jet(), 2.3).unwrap();
        assert_eq!(viridis.lightness_profile.len(), 256);
        assert!(viridis.lightness_monotonic);
        assert!(!jet.lightness_monotonic);
        assert!(jet.uniformity_cv > 0.3, "jet cv {}", jet.uniformity_cv);
        // CIE76 figures computed independently from the same tables.
        assert_abs_diff_eq!(viridis.uniformity_cv, 0.1928, epsilon = 0.002);
        assert_abs_diff_eq!(jet.uniformity_cv, 0.3885, epsilon = 0.002);
        assert!(viridis.uniformity_cv < jet.uniformity_cv);
    }

    #[test]
    fn contrast_examples() {
        let v = Colormap::viridis();
        assert_eq!(contrast_ratio(&v, &v).unwrap(), 1.0);

        let wbl = Colormap::new("bw", vec![SrgbColor::BLACK, SrgbColor::WHITE]).unwrap();
        let gray = crate::colorspace::lab_to_srgb(
            LabColor::new(50.0, 0.0, 0.0),
            crate::GamutPolicy::Error,
        )
        .unwrap();
        let half = Colormap::new("half", vec![SrgbColor::BLACK, gray]).unwrap();
        assert_abs_diff_eq!(contrast_ratio(&wbl, &half).unwrap(), 2.0, epsilon = 1e-5);

        let flat = Colormap::new("flat", vec![SrgbColor::WHITE; 3]).unwrap();
        assert!(matches!(
            contrast_ratio(&v, &flat),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn reversal_and_refinement() {
        for c in [Colormap::viridis(), Colormap::jet()] {
            let a = arc_length(&c).unwrap();
            assert_abs_diff_eq!(arc_length(&c.reversed()).unwrap(), a, epsilon = 1e-9);
            let fine = arc_length(&c.resample(1024).unwrap()).unwrap();
            assert!((fine - a).abs() / a < 0.01, "{}: {a} vs {fine}", c.name());
        }
    }

    #[test]
    fn csv_parsing() {
        let c = Colormap::from_csv_reader(
            "x",
            "inline",
            "# comment\n0,0,0\n 0.5 , 0.5,0.5\n1,1,1\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(c.entries().len(), 3);
        assert_eq!(c.entries()[1], SrgbColor::new(0.5, 0.5, 0.5));
        let err = Colormap::from_csv_reader("x", "inline", "0,0,0\n0,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err =
            Colormap::from_csv_reader("x", "inline", "0,0,0\n0,a,0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }
}
