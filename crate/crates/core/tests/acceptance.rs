//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::Instant;

use common::*;
use puviz::cmaplint::{contrast_ratio, Colormap};
use puviz::cmpuc::{composition_color, rgb_mixing_color, TriangleSpec};
use puviz::colorspace::{lab_to_srgb, lab_to_srgb_unchecked, srgb_to_lab, GAMUT_TOLERANCE};
use puviz::cvd::CvdModel;
use puviz::gamut::{find_composition_triangle, in_gamut, max_inscribed_circle, triangle_vertices};
use puviz::papuc::{analyze_wheel, wheel_color, Wheel, WheelSpec};
use puviz::{delta_e, GamutPolicy, LabColor, SrgbColor};
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn lab(c: SrgbColor) -> LabColor {
    srgb_to_lab(c).unwrap()
}

fn triangle_optimum() -> Outcome {
    let t = Instant::now();
    let s = find_composition_triangle((30.0, 90.0), 0.05, 0.05).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let inside = s.vertices().iter().all(|&v| in_gamut(v, 1e-6));
    let maximal = triangle_vertices(s.l, s.r + 0.5, s.hue_deg)
        .iter()
        .any(|&v| !in_gamut(v, 0.0));
    let pass = within(s.l, 61.50, 0.25)
        && within(s.r, 60.14, 0.3)
        && within(s.hue_deg, 33.73, 0.5)
        && secs < 120.0
        && inside
        && maximal;
    outcome(
        pass,
        format!(
            "L={:.3} (61.50±0.25) R={:.3} (60.14±0.3) h0={:.3} (33.73±0.5) in {secs:.2}s (<120s) vertices in gamut={inside} R+0.5 leaves gamut={maximal}",
            s.l, s.r, s.hue_deg
        ),
    )
}

fn cone_base() -> Outcome {
    let t = Instant::now();
    let circle = max_inscribed_circle(74.0);
    let spec = WheelSpec::default();
    let mut samples = 0;
    let mut outside = 0;
    for mi in 0..=100 {
        for deg in 0..3600 {
            let c =
                wheel_color((deg as f64 / 10.0).to_radians(), mi as f64 / 100.0, &spec).unwrap();
            samples += 1;
            if !lab_to_srgb_unchecked(c).in_gamut(GAMUT_TOLERANCE) {
                outside += 1;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        circle >= 40.0 && outside == 0,
        format!("max_inscribed_circle(74)={circle:.4} (>=40) cone samples outside gamut={outside}/{samples} in {secs:.2}s"),
    )
}

fn discernible_angle() -> Outcome {
    let a = analyze_wheel(Wheel::Uniform(WheelSpec::default()), 1.0, 3600, 2.3).unwrap();
    let (lo, hi) = (a.min_derivative(), a.max_derivative());
    let analytic = 2.0 * std::f64::consts::PI * 40.0 / 360.0;
    let pass = within(a.min_discernible_angle, 3.30, 0.05)
        && within(lo, 0.698, 0.007)
        && within(hi, 0.698, 0.007);
    outcome(
        pass,
        format!(
            "min discernible angle={:.4}° (3.30±0.05) dE/° in [{lo:.5}, {hi:.5}] (0.698±0.007, analytic {analytic:.5})",
            a.min_discernible_angle
        ),
    )
}

fn lightness_ratios() -> Outcome {
    let [r, g, b] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        .map(|c| lab(SrgbColor::from_array(c)).l);
    let (gb, rb) = (g / b, r / b);
    outcome(
        within(gb, 2.72, 0.02) && within(rb, 1.65, 0.02),
        format!("L*(green)/L*(blue)={gb:.4} (2.72±0.02) L*(red)/L*(blue)={rb:.4} (1.65±0.02)"),
    )
}

fn hsv_nonuniformity() -> Outcome {
    let a = analyze_wheel(Wheel::Hsv, 1.0, 3600, 2.3).unwrap();
    let ratio = a.max_derivative() / a.min_derivative();
    let maxima = a.local_maxima();
    let circ = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(360.0);
        d.min(360.0 - d)
    };
    let missing: Vec<f64> = [0.0, 60.0, 120.0, 180.0, 240.0, 300.0]
        .into_iter()
        .filter(|&h| !maxima.iter().any(|&m| circ(m, h) <= 2.0))
        .collect();
    let listed: Vec<String> = maxima.iter().map(|m| format!("{m:.1}")).collect();
    outcome(
        ratio >= 8.0 && missing.is_empty(),
        format!(
            "max/min dE/°={ratio:.2} (>=8) local maxima at [{}]° hues without a maximum within 2°: {missing:?}",
            listed.join(", ")
        ),
    )
}

fn contrast_claim() -> Outcome {
    let green = Colormap::linear(
        "black-green",
        SrgbColor::BLACK,
        SrgbColor::new(0.0, 1.0, 0.0),
        256,
    )
    .unwrap();
    let ratio = contrast_ratio(&Colormap::viridis(), &green).unwrap();
    outcome(
        within(ratio, 1.3, 0.1),
        format!("contrast_ratio(viridis, black->green)={ratio:.4} (1.3±0.1)"),
    )
}

fn fairness() -> Outcome {
    let spec = TriangleSpec::default();
    let mut spread: f64 = 0.0;
    for conc in [0.1, 0.25, 0.5, 0.8, 1.0] {
        let ls: Vec<f64> = (0..3)
            .map(|k| {
                let mut c = [0.0; 3];
                c[k] = conc;
                let rgb = lab_to_srgb(
                    composition_color(c, 1.0, &spec).unwrap(),
                    GamutPolicy::Compress,
                )
                .unwrap();
                lab(rgb).l
            })
            .collect();
        let hi = ls.iter().copied().fold(f64::MIN, f64::max);
        let lo = ls.iter().copied().fold(f64::MAX, f64::min);
        spread = spread.max(hi - lo);
    }
    let rgb: Vec<f64> = (0..3)
        .map(|k| {
            let mut c = [0.0; 3];
            c[k] = 1.0;
            lab(rgb_mixing_color(c, [1.0; 3]).unwrap()).l
        })
        .collect();
    let rgb_ratio =
        rgb.iter().copied().fold(f64::MIN, f64::max) / rgb.iter().copied().fold(f64::MAX, f64::min);
    outcome(
        spread <= 1e-9 && rgb_ratio >= 2.7,
        format!("pyramid lightness spread across pure components={spread:.2e} (<=1e-9) RGB-mixing lightness ratio={rgb_ratio:.4} (>=2.7)"),
    )
}

fn round_trip_and_metric() -> Outcome {
    let mut worst: f64 = 0.0;
    for r in 0..17 {
        for g in 0..17 {
            for b in 0..17 {
                let c = SrgbColor::new(r as f64 / 16.0, g as f64 / 16.0, b as f64 / 16.0);
                let back = lab_to_srgb(lab(c), GamutPolicy::Clip).unwrap();
                for (x, y) in c.to_array().into_iter().zip(back.to_array()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }

    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut random = || {
        LabColor::new(
            rng.gen_range(0.0..100.0),
            rng.gen_range(-128.0..128.0),
            rng.gen_range(-128.0..128.0),
        )
    };
    let mut violations = 0;
    for _ in 0..10_000 {
        let (x, y, z) = (random(), random(), random());
        let (xy, yz, xz) = (delta_e(x, y), delta_e(y, z), delta_e(x, z));
        let ok = delta_e(x, x) == 0.0 && xy > 0.0 && xy == delta_e(y, x) && xz <= xy + yz + 1e-12;
        if !ok {
            violations += 1;
        }
    }
    outcome(
        worst <= 1e-6 && violations == 0,
        format!("17³ sRGB->Lab->sRGB max channel error={worst:.2e} (<=1e-6) metric axiom violations={violations}/10000"),
    )
}

fn cvd_properties() -> Outcome {
    let identity = CvdModel::deuteranomaly(0.0).unwrap();
    let full = CvdModel::deuteranomaly(1.0).unwrap();
    let mut id_err: f64 = 0.0;
    for r in 0..9 {
        for g in 0..9 {
            for b in 0..9 {
                let c = SrgbColor::new(r as f64 / 8.0, g as f64 / 8.0, b as f64 / 8.0);
                let s = identity.apply(c).unwrap();
                for (x, y) in c.to_array().into_iter().zip(s.to_array()) {
                    id_err = id_err.max((x - y).abs());
                }
            }
        }
    }
    let mut gray_err: f64 = 0.0;
    for severity in [0.0, 0.35, 0.7, 1.0] {
        let model = CvdModel::deuteranomaly(severity).unwrap();
        for i in 0..=20 {
            let v = i as f64 / 20.0;
            let s = model.apply(SrgbColor::new(v, v, v)).unwrap();
            for y in s.to_array() {
                gray_err = gray_err.max((y - v).abs());
            }
        }
    }
    let (red, green) = (SrgbColor::new(1.0, 0.0, 0.0), SrgbColor::new(0.0, 1.0, 0.0));
    let before = delta_e(lab(red), lab(green));
    let after = delta_e(
        lab(full.apply(red).unwrap()),
        lab(full.apply(green).unwrap()),
    );
    outcome(
        id_err <= 1e-6 && gray_err <= 1e-4 && after < before,
        format!("severity-0 max error={id_err:.2e} (<=1e-6) gray max error={gray_err:.2e} (<=1e-4) dE(red,green) {before:.2} -> {after:.2} at severity 1"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    let mut runs = 0;
    for (name, golden) in [
        ("vortex", "vortex_golden.png"),
        ("two_phase", "two_phase_golden.png"),
    ] {
        let expected = std::fs::read(fixture(golden)).unwrap();
        for threads in [Some("1"), None] {
            for attempt in 0..2 {
                let out = dir.path().join(format!(
                    "{name}-{}-{attempt}.png",
                    threads.unwrap_or("auto")
                ));
                let args = if name == "vortex" {
                    map_vector_args(&out)
                } else {
                    map_composition_args(&out)
                };
                let argv: Vec<&str> = args.iter().map(String::as_str).collect();
                let status = puviz(&argv, threads).status;
                runs += 1;
                if !status.success() || std::fs::read(&out).ok().as_deref() != Some(&expected[..]) {
                    mismatches.push(out.file_name().unwrap().to_string_lossy().into_owned());
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{runs} runs (2 fixtures x threads {{1, auto}} x 2) byte-identical to goldens; mismatches: {mismatches:?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("triangle optimum", triangle_optimum),
        ("cone base validity", cone_base),
        ("minimum discernible angle", discernible_angle),
        ("primary lightness ratios", lightness_ratios),
        ("HSV non-uniformity", hsv_nonuniformity),
        ("contrast claim", contrast_claim),
        ("fairness", fairness),
        ("round trip and metric", round_trip_and_metric),
        ("CVD properties", cvd_properties),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
