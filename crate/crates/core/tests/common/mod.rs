#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Run the built binary with an optional `PUVIZ_THREADS` value.
pub fn puviz(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_puviz"));
    cmd.args(args).env_remove("PUVIZ_THREADS");
    if let Some(t) = threads {
        cmd.env("PUVIZ_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

pub fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

pub fn map_vector_args(out: &Path) -> Vec<String> {
    [
        "map-vector",
        "--header",
        path(&fixture("vortex.json")),
        "--data",
        path(&fixture("vortex.f32")),
        "--out",
        path(out),
    ]
    .map(String::from)
    .to_vec()
}

pub fn map_composition_args(out: &Path) -> Vec<String> {
    let mut v = vec!["map-composition".to_string()];
    for ch in ["two_phase_p.csv", "two_phase_pt.csv", "two_phase_ca.csv"] {
        v.push("--ch".into());
        v.push(path(&fixture(ch)).into());
    }
    v.extend(["--labels", "P,Pt,Ca", "--out", path(out)].map(String::from));
    v
}

/// Plain-text CSV grid, independent of the library parser.
pub fn read_grid(name: &str) -> Vec<Vec<f64>> {
    std::fs::read_to_string(fixture(name))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect()
}

/// Reference CIELAB to 8-bit sRGB with published D65 constants.
pub fn oracle_lab_to_rgb8(l: f64, a: f64, b: f64) -> [u8; 3] {
    const W: [f64; 3] = [0.95047, 1.0, 1.08883];
    const M: [[f64; 3]; 3] = [
        [3.2404542, -1.5371385, -0.4985314],
        [-0.9692660, 1.8760108, 0.0415560],
        [0.0556434, -0.2040259, 1.0572252],
    ];
    let fy = (l + 16.0) / 116.0;
    let f = [fy + a / 500.0, fy, fy - b / 200.0];
    let inv = |t: f64| {
        if t > 6.0 / 29.0 {
            t.powi(3)
        } else {
            3.0 * (6.0f64 / 29.0).powi(2) * (t - 4.0 / 29.0)
        }
    };
    let xyz = [W[0] * inv(f[0]), W[1] * inv(f[1]), W[2] * inv(f[2])];
    let mut out = [0u8; 3];
    for (i, row) in M.iter().enumerate() {
        let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
        let v = if lin <= 0.0031308 {
            12.92 * lin
        } else {
            1.055 * lin.powf(1.0 / 2.4) - 0.055
        };
        out[i] = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    }
    out
}

/// Decode an RGB8 PNG into (width, height, pixels) with the `png` crate.
pub fn read_rgb8(p: &Path) -> (u32, u32, Vec<[u8; 3]>) {
    let decoder = png::Decoder::new(std::fs::File::open(p).unwrap());
    let mut reader = decoder.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).unwrap();
    assert_eq!(info.color_type, png::ColorType::Rgb);
    let px = buf[..info.buffer_size()]
        .chunks(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    (info.width, info.height, px)
}
