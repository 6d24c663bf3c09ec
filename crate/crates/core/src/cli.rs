//! The `puviz` command line.
//!
//! Every command writes its outputs plus a `<output>.params.json` sidecar
//! holding the fully resolved parameter set. JSON numbers are rounded to six
//! significant digits so that reruns are byte-identical.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cmaplint::{contrast_ratio, lint_colormap, Colormap};
use crate::cmpuc::{
    map_composition_field, map_rgb_mixing_field, row_profile, ChannelMaxima, CompositionField,
    TriangleSpec,
};
use crate::cvd::{desaturate, flatten_lightness, simulate_cvd, CvdModel};
use crate::error::{Error, Result};
use crate::fieldio::{
    composition_from_grids, load_csv_channel, load_field, load_png, render_legend, save_png,
    Background, Field, LegendKind,
};
use crate::gamut::{find_composition_triangle, GamutPolicy};
use crate::papuc::{analyze_wheel, map_vector_field, map_vector_field_hsv, Wheel, WheelSpec};
use crate::Ceiling;

/// Environment variable capping the worker count (0 = automatic).
pub const THREADS_ENV: &str = "PUVIZ_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "puviz",
    version,
    about = "Perceptually uniform color mapping of vector and composition fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a 2-channel vector field on the perceptually uniform color wheel.
    MapVector(MapVector),
    /// Render a 3-channel composition field on the mixing pyramid.
    MapComposition(MapComposition),
    /// Simulate deuteranomaly on a PNG.
    SimulateCvd(SimulateCvd),
    /// Perceptual-derivative and lightness profile of a color wheel.
    AnalyzeWheel(AnalyzeWheel),
    /// Search the largest white-centered triangle inside the sRGB gamut.
    FindTriangle(FindTriangle),
    /// Analyze a scalar colormap, optionally comparing contrast with another.
    LintCmap(LintCmap),
    /// Drop chroma from a PNG, keeping CIELAB lightness.
    Desaturate(Desaturate),
    /// Set every pixel of a PNG to one CIELAB lightness.
    FlattenLightness(FlattenLightness),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Compress,
    Clip,
    Error,
}

impl From<PolicyArg> for GamutPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Compress => GamutPolicy::Compress,
            PolicyArg::Clip => GamutPolicy::Clip,
            PolicyArg::Error => GamutPolicy::Error,
        }
    }
}

#[derive(Debug, Args)]
struct LegendArgs {
    /// Write a legend PNG to this path.
    #[arg(long)]
    legend: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    legend_size: usize,
    /// Transparent legend background instead of white.
    #[arg(long)]
    legend_transparent: bool,
}

impl LegendArgs {
    fn background(&self) -> Background {
        if self.legend_transparent {
            Background::Transparent
        } else {
            Background::White
        }
    }
}

#[derive(Debug, Args)]
struct MapVector {
    #[arg(long)]
    header: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Magnitude mapped to the cone base, or "auto" for the field maximum.
    #[arg(long, default_value = "auto")]
    vmax: Ceiling,
    #[arg(long, default_value_t = WheelSpec::default().hue_offset, allow_negative_numbers = true)]
    hue_offset: f64,
    #[arg(long, default_value_t = WheelSpec::default().l_max)]
    lmax: f64,
    #[arg(long, default_value_t = WheelSpec::default().c_max)]
    cmax: f64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Compress)]
    policy: PolicyArg,
    /// Also render the HSV reference mapping.
    #[arg(long)]
    reference_hsv: Option<PathBuf>,
    #[command(flatten)]
    legend: LegendArgs,
}

#[derive(Debug, Args)]
struct MapComposition {
    /// Channel CSV grid, given three times in vertex order.
    #[arg(long = "ch")]
    channels: Vec<PathBuf>,
    /// Raw 3-channel field header (alternative to --ch).
    #[arg(long, requires = "data", conflicts_with = "channels")]
    header: Option<PathBuf>,
    #[arg(long, requires = "header")]
    data: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    #[arg(long)]
    out: PathBuf,
    /// Total intensity mapped to full lightness, or "auto" for the field maximum.
    #[arg(long, default_value = "auto")]
    ctotal_max: Ceiling,
    #[arg(long, default_value_t = TriangleSpec::default().l_max)]
    lmax: f64,
    #[arg(long, default_value_t = TriangleSpec::default().r_max)]
    rmax: f64,
    #[arg(long, default_value_t = TriangleSpec::default().h0, allow_negative_numbers = true)]
    h0: f64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Compress)]
    policy: PolicyArg,
    /// Also render the RGB-mixing reference mapping.
    #[arg(long)]
    reference_rgb: Option<PathBuf>,
    #[command(flatten)]
    legend: LegendArgs,
    /// Row-averaged profile, e.g. `rows=44:20,out=profile.csv`.
    #[arg(long)]
    profile: Option<ProfileArg>,
}

#[derive(Debug, Clone)]
struct ProfileArg {
    start: usize,
    count: usize,
    out: PathBuf,
}

impl std::str::FromStr for ProfileArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut rows = None;
        let mut out = None;
        for part in s.split(',') {
            match part.split_once('=') {
                Some(("rows", v)) => {
                    let (a, b) = v
                        .split_once(':')
                        .ok_or_else(|| format!("rows must be START:COUNT, got {v:?}"))?;
                    let a = a.parse().map_err(|_| format!("bad row start {a:?}"))?;
                    let b = b.parse().map_err(|_| format!("bad row count {b:?}"))?;
                    rows = Some((a, b));
                }
                Some(("out", v)) => out = Some(PathBuf::from(v)),
                _ => return Err(format!("unknown profile option {part:?}")),
            }
        }
        let (start, count) = rows.ok_or("profile needs rows=START:COUNT")?;
        let out = out.ok_or("profile needs out=CSV")?;
        Ok(ProfileArg { start, count, out })
    }
}

#[derive(Debug, Args)]
struct SimulateCvd {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    severity: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WheelArg {
    Pu,
    Hsv,
}

#[derive(Debug, Args)]
struct AnalyzeWheel {
    #[arg(long, value_enum)]
    wheel: WheelArg,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = 3600)]
    steps: usize,
    #[arg(long, default_value_t = crate::papuc::DEFAULT_JND)]
    jnd: f64,
    #[arg(long, default_value_t = WheelSpec::default().hue_offset, allow_negative_numbers = true)]
    hue_offset: f64,
    #[arg(long, default_value_t = WheelSpec::default().l_max)]
    lmax: f64,
    #[arg(long, default_value_t = WheelSpec::default().c_max)]
    cmax: f64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct FindTriangle {
    #[arg(long, default_value_t = 30.0)]
    lmin: f64,
    #[arg(long, default_value_t = 90.0)]
    lmax: f64,
    #[arg(long, default_value_t = 0.05)]
    lstep: f64,
    #[arg(long, default_value_t = 0.05)]
    hstep: f64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct LintCmap {
    /// Colormap CSV (`r,g,b` rows), or `builtin:viridis` / `builtin:jet`.
    #[arg(long)]
    cmap: String,
    /// Second colormap; the report gains its lint and the contrast ratio cmap / compare.
    #[arg(long)]
    compare: Option<String>,
    #[arg(long, default_value_t = crate::papuc::DEFAULT_JND)]
    jnd: f64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct Desaturate {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FlattenLightness {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = crate::cvd::DEFAULT_FLAT_LIGHTNESS)]
    l0: f64,
}

/// Round a finite float to six significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(sig6).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serialize with six significant digits and a trailing newline.
pub fn to_json_text(value: &impl serde::Serialize) -> String {
    let mut v = serde_json::to_value(value).expect("report serializes");
    round_json(&mut v);
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    std::fs::write(path, to_json_text(value)).map_err(|e| Error::io(path, e))
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".params.json");
    PathBuf::from(s)
}

fn write_sidecar(output: &Path, command: &str, params: Value) -> Result<()> {
    let record = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
    });
    write_json(&sidecar_path(output), &record)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn opt_path(p: &Option<PathBuf>) -> Value {
    p.as_deref()
        .map_or(Value::Null, |p| Value::String(path_str(p)))
}

fn policy_name(p: PolicyArg) -> &'static str {
    match p {
        PolicyArg::Compress => "compress",
        PolicyArg::Clip => "clip",
        PolicyArg::Error => "error",
    }
}

fn run_map_vector(args: &MapVector) -> Result<()> {
    let field = match load_field(&args.header, &args.data)? {
        Field::Vector(f) => f,
        Field::Composition(_) => {
            return Err(Error::invalid("map-vector needs a 2-channel field"));
        }
    };
    let spec = WheelSpec {
        l_max: args.lmax,
        c_max: args.cmax,
        hue_offset: args.hue_offset,
    };
    let mapped = map_vector_field(&field, &spec, args.vmax, args.policy.into())?;
    save_png(&mapped.raster, &args.out)?;
    if let Some(path) = &args.reference_hsv {
        let hsv = map_vector_field_hsv(&field, Ceiling::Fixed(mapped.ceiling))?;
        save_png(&hsv.raster, path)?;
    }
    if let Some(path) = &args.legend.legend {
        let legend = render_legend(
            &LegendKind::Wheel(spec),
            args.legend.legend_size,
            args.legend.background(),
        )?;
        save_png(&legend, path)?;
    }
    write_sidecar(
        &args.out,
        "map-vector",
        json!({
            "header": path_str(&args.header),
            "data": path_str(&args.data),
            "out": path_str(&args.out),
            "width": field.width(),
            "height": field.height(),
            "vmax": mapped.ceiling,
            "vmax_mode": if matches!(args.vmax, Ceiling::Auto) { "auto" } else { "fixed" },
            "wheel": spec,
            "policy": policy_name(args.policy),
            "adjusted_pixels": mapped.adjusted,
            "reference_hsv": opt_path(&args.reference_hsv),
            "legend": opt_path(&args.legend.legend),
            "legend_size": args.legend.legend_size,
            "legend_transparent": args.legend.legend_transparent,
        }),
    )
}

fn load_composition(args: &MapComposition) -> Result<CompositionField> {
    let labels: [String; 3] = match &args.labels {
        Some(l) => l
            .clone()
            .try_into()
            .map_err(|_| Error::invalid("--labels needs exactly three names"))?,
        None => ["c1", "c2", "c3"].map(String::from),
    };
    if let (Some(h), Some(d)) = (&args.header, &args.data) {
        return match load_field(h, d)? {
            Field::Composition(f) => {
                CompositionField::new(f.width(), f.height(), f.channels().clone(), labels)
            }
            Field::Vector(_) => Err(Error::invalid("map-composition needs a 3-channel field")),
        };
    }
    if args.channels.len() != 3 {
        return Err(Error::invalid(format!(
            "map-composition needs exactly three --ch files (or --header/--data), got {}",
            args.channels.len()
        )));
    }
    let grids = [
        load_csv_channel(&args.channels[0])?,
        load_csv_channel(&args.channels[1])?,
        load_csv_channel(&args.channels[2])?,
    ];
    composition_from_grids(grids, labels)
}

fn run_map_composition(args: &MapComposition) -> Result<()> {
    let field = load_composition(args)?;
    let spec = TriangleSpec {
        l_max: args.lmax,
        r_max: args.rmax,
        h0: args.h0,
    };
    let mapped = map_composition_field(&field, &spec, args.ctotal_max, args.policy.into())?;
    save_png(&mapped.raster, &args.out)?;
    if let Some(path) = &args.reference_rgb {
        save_png(&map_rgb_mixing_field(&field, ChannelMaxima::Auto)?, path)?;
    }
    if let Some(path) = &args.legend.legend {
        let kind = LegendKind::Triangle(spec, field.labels().clone());
        save_png(
            &render_legend(&kind, args.legend.legend_size, args.legend.background())?,
            path,
        )?;
    }
    if let Some(p) = &args.profile {
        row_profile(&field, p.start, p.count)?.save_csv(&p.out)?;
    }
    write_sidecar(
        &args.out,
        "map-composition",
        json!({
            "channels": args.channels.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
            "header": opt_path(&args.header),
            "data": opt_path(&args.data),
            "labels": field.labels(),
            "out": path_str(&args.out),
            "width": field.width(),
            "height": field.height(),
            "ctotal_max": mapped.ceiling,
            "ctotal_max_mode": if matches!(args.ctotal_max, Ceiling::Auto) { "auto" } else { "fixed" },
            "triangle": spec,
            "policy": policy_name(args.policy),
            "adjusted_pixels": mapped.adjusted,
            "reference_rgb": opt_path(&args.reference_rgb),
            "reference_rgb_maxima": field.channel_maxima(),
            "legend": opt_path(&args.legend.legend),
            "legend_size": args.legend.legend_size,
            "legend_transparent": args.legend.legend_transparent,
            "profile": args.profile.as_ref().map(|p| json!({
                "row_start": p.start,
                "row_count": p.count,
                "out": path_str(&p.out),
            })),
        }),
    )
}

fn run_simulate_cvd(args: &SimulateCvd) -> Result<()> {
    let model = CvdModel::deuteranomaly(args.severity)?;
    let img = load_png(&args.input)?;
    save_png(&simulate_cvd(&img, &model)?, &args.out)?;
    write_sidecar(
        &args.out,
        "simulate-cvd",
        json!({
            "in": path_str(&args.input),
            "out": path_str(&args.out),
            "model": "deuteranomaly",
            "severity": args.severity,
        }),
    )
}

fn run_analyze_wheel(args: &AnalyzeWheel) -> Result<()> {
    let spec = WheelSpec {
        l_max: args.lmax,
        c_max: args.cmax,
        hue_offset: args.hue_offset,
    };
    let wheel = match args.wheel {
        WheelArg::Pu => Wheel::Uniform(spec),
        WheelArg::Hsv => Wheel::Hsv,
    };
    let analysis = analyze_wheel(wheel, args.m, args.steps, args.jnd)?;
    write_json(&args.report, &analysis)?;
    write_sidecar(
        &args.report,
        "analyze-wheel",
        json!({
            "wheel": match args.wheel { WheelArg::Pu => "pu", WheelArg::Hsv => "hsv" },
            "spec": matches!(args.wheel, WheelArg::Pu).then_some(spec),
            "m": args.m,
            "steps": args.steps,
            "jnd": args.jnd,
            "report": path_str(&args.report),
        }),
    )
}

fn run_find_triangle(args: &FindTriangle) -> Result<()> {
    let solution = find_composition_triangle((args.lmin, args.lmax), args.lstep, args.hstep)?;
    write_json(&args.report, &solution)?;
    write_sidecar(
        &args.report,
        "find-triangle",
        json!({
            "lmin": args.lmin,
            "lmax": args.lmax,
            "lstep": args.lstep,
            "hstep": args.hstep,
            "report": path_str(&args.report),
        }),
    )
}

fn load_colormap(spec: &str) -> Result<Colormap> {
    match spec {
        "builtin:viridis" => Ok(Colormap::viridis()),
        "builtin:jet" => Ok(Colormap::jet()),
        other if other.starts_with("builtin:") => Err(Error::invalid(format!(
            "unknown builtin colormap {other:?} (known: builtin:viridis, builtin:jet)"
        ))),
        path => Colormap::load_csv(Path::new(path)),
    }
}

fn run_lint_cmap(args: &LintCmap) -> Result<()> {
    let cmap = load_colormap(&args.cmap)?;
    let report = lint_colormap(&cmap, args.jnd)?;
    let value = match &args.compare {
        None => serde_json::to_value(&report).expect("report serializes"),
        Some(other) => {
            let other = load_colormap(other)?;
            json!({
                "cmap": report,
                "compare": lint_colormap(&other, args.jnd)?,
                "contrast_ratio": contrast_ratio(&cmap, &other)?,
            })
        }
    };
    write_json(&args.report, &value)?;
    write_sidecar(
        &args.report,
        "lint-cmap",
        json!({
            "cmap": args.cmap,
            "compare": args.compare,
            "jnd": args.jnd,
            "report": path_str(&args.report),
        }),
    )
}

fn run_desaturate(args: &Desaturate) -> Result<()> {
    save_png(&desaturate(&load_png(&args.input)?)?, &args.out)?;
    write_sidecar(
        &args.out,
        "desaturate",
        json!({ "in": path_str(&args.input), "out": path_str(&args.out) }),
    )
}

fn run_flatten(args: &FlattenLightness) -> Result<()> {
    save_png(
        &flatten_lightness(&load_png(&args.input)?, args.l0)?,
        &args.out,
    )?;
    write_sidecar(
        &args.out,
        "flatten-lightness",
        json!({ "in": path_str(&args.input), "out": path_str(&args.out), "l0": args.l0 }),
    )
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::MapVector(a) => run_map_vector(a),
        Command::MapComposition(a) => run_map_composition(a),
        Command::SimulateCvd(a) => run_simulate_cvd(a),
        Command::AnalyzeWheel(a) => run_analyze_wheel(a),
        Command::FindTriangle(a) => run_find_triangle(a),
        Command::LintCmap(a) => run_lint_cmap(a),
        Command::Desaturate(a) => run_desaturate(a),
        Command::FlattenLightness(a) => run_flatten(a),
    }
}

/// Worker count from `PUVIZ_THREADS`; `None` means automatic.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::invalid(format!(
                "{THREADS_ENV} must be a non-negative integer, got {s:?}"
            ))),
        },
    }
}

fn run_parsed(cli: Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&cli.command))
}

/// Parse `argv` and run one command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_parsed(cli) {
        Ok(()) => 0,
        Err(e) => {
            let msg = json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{msg}");
            e.exit_code()
        }
    }
}
