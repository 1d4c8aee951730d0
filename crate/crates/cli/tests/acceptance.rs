//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p fuselage-cli --test acceptance -- --nocapture`.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fuselage_core::corruption::CorruptionKind;
use fuselage_core::eval::corpus::golden_corpus;
use fuselage_core::eval::{run_degradation_grid, GridConfig, Scenario};
use fuselage_core::fusion::{
    fuse_inverse_variance, multi_source_nms, oracle_multi_source_nms, random_instance, Decay, FusionConfig,
};
use fuselage_core::geometry::{GaussianBox, Modality};
use fuselage_core::io::{self, DetectionRecord, KittiCalib, Pnm};
use fuselage_core::projection::{
    center_bottom_crop, project_points_cropped, CalibMatrices, PointCloud, PointXyzi, DEFAULT_MAX_RANGE,
    DEFAULT_OUT_SIZE, KITTI_IMAGE_SIZE,
};
use fuselage_core::rng::{CounterRng, Sequence};
use fuselage_core::uncertainty::{
    attenuated_loss, attenuated_loss_grad, default_levels, ece_curve, LossSample, PairedPrediction,
};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn seq(seed: u64, stream: u64, i: u64) -> Sequence {
    Sequence::new(CounterRng::new(seed, stream).substream(i))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for i in 0..10_000u64 {
        let mut rng = seq(101, 1, i);
        let (t1, t2) = if rng.uniform() < 0.5 {
            FusionConfig::REFERENCE_GATES
        } else {
            FusionConfig::EXPERIMENT_GATES
        };
        let mut cfg = FusionConfig::with_gates(t1, t2);
        if rng.uniform() < 0.3 {
            cfg.decay = Decay::Linear;
        }
        let (n_r, n_d) = (rng.below(9), rng.below(9));
        let (rgb, depth) = random_instance(&mut rng, n_r, n_d);
        if multi_source_nms(&rgb, &depth, &cfg) != oracle_multi_source_nms(&rgb, &depth, &cfg) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(mismatches == 0 && secs < 60.0, format!("{mismatches} mismatches in 10^4 frames, {secs:.2} s"))
}

fn two_box_fusion() -> Outcome {
    let b = |x: f64, v: f64| GaussianBox::new([x, 0.0, 4.0, 4.0], [v; 4], 0.9, 0, Modality::Rgb).unwrap();
    let (a, c) = (b(0.0, 1.0), b(4.0, 4.0));
    let x = fuse_inverse_variance(&a, [&a, &c]).unwrap().mean[0];
    let (p, q) = (b(3.0, 2.5), b(7.0, 2.5));
    let mean = fuse_inverse_variance(&p, [&p, &q]).unwrap().mean[0];
    check((x - 0.8).abs() <= 1e-12 && mean == 5.0, format!("x = {x}, equal-variance mean = {mean}"))
}

fn loss_sample(target: [f64; 4], mu: [f64; 4], var: [f64; 4]) -> LossSample {
    LossSample::new(target, mu, var, 0.5, 0.5, true).unwrap()
}

fn gradient_and_stationary_point() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let mut rng = seq(102, 3, i);
        let target: [f64; 4] = std::array::from_fn(|_| rng.range(-50.0, 50.0));
        let mu = std::array::from_fn(|k| target[k] + rng.range(-10.0, 10.0));
        let var = std::array::from_fn(|_| rng.range(1e-3f64.ln(), 1e3f64.ln()).exp());
        let s = loss_sample(target, mu, var);
        let (d_mu, d_var) = attenuated_loss_grad(&s);
        for k in 0..4 {
            let h = 1e-6 * s.pred_mu[k].abs().max(1.0);
            let (mut p, mut m) = (s, s);
            p.pred_mu[k] += h;
            m.pred_mu[k] -= h;
            worst = worst.max(rel(d_mu[k], (attenuated_loss(&p) - attenuated_loss(&m)) / (2.0 * h)));
            let h = 1e-5 * s.pred_var[k];
            let (mut p, mut m) = (s, s);
            p.pred_var[k] += h;
            m.pred_var[k] -= h;
            worst = worst.max(rel(d_var[k], (attenuated_loss(&p) - attenuated_loss(&m)) / (2.0 * h)));
        }
    }
    let mut worst_stationary: f64 = 0.0;
    for i in 0..100u64 {
        let mut rng = seq(103, 3, i);
        let r = rng.range(0.05, 20.0);
        let f = |lv: f64| attenuated_loss(&loss_sample([r, 0.0, 0.0, 0.0], [0.0; 4], [lv.exp(), 1.0, 1.0, 1.0]));
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (1e-6f64.ln(), 1e6f64.ln());
        while b - a > 1e-10 {
            let (c, d) = (b - inv_phi * (b - a), a + inv_phi * (b - a));
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let v = ((a + b) / 2.0).exp();
        worst_stationary = worst_stationary.max((v - r * r).abs() / (r * r));
    }
    check(
        worst < 1e-5 && worst_stationary < 1e-6,
        format!("max gradient rel error {worst:.2e}, max stationary-point rel error {worst_stationary:.2e}"),
    )
}

fn calibration() -> Outcome {
    let paired: Vec<PairedPrediction> = (0..100_000u64)
        .map(|i| {
            let mut rng = seq(104, 4, i);
            let pred_mu = std::array::from_fn(|_| rng.range(0.0, 500.0));
            let pred_var: [f64; 4] = std::array::from_fn(|_| rng.range(0.01f64.ln(), 100f64.ln()).exp());
            let target = std::array::from_fn(|k| pred_mu[k] + pred_var[k].sqrt() * rng.normal());
            PairedPrediction { pred_var, pred_mu, target }
        })
        .collect();
    let ece = ece_curve(&paired, &default_levels()).map_err(|e| e.to_string())?.ece;
    let over: Vec<PairedPrediction> = (0..1000)
        .map(|i| PairedPrediction { pred_var: [1e-12; 4], pred_mu: [0.0; 4], target: [1.0 + f64::from(i); 4] })
        .collect();
    let curve = ece_curve(&over, &default_levels()).map_err(|e| e.to_string())?;
    let zero = curve.bins.iter().filter(|b| b.expected < 1.0).all(|b| b.observed == 0.0);
    check(ece < 0.02 && zero, format!("ece {ece:.4}, overconfident observed all zero: {zero}"))
}

fn grid_criteria() -> [Outcome; 3] {
    let start = Instant::now();
    let g = match run_degradation_grid(&golden_corpus(), &GridConfig::default()) {
        Ok(g) => g,
        Err(e) => return [Err(e.to_string()), Err(e.to_string()), Err(e.to_string())],
    };
    let secs = start.elapsed().as_secs_f64();
    let m = |s, k, l| g.map(s, k, l).unwrap();

    let mut worst_step = f64::NEG_INFINITY;
    for kind in CorruptionKind::ALL {
        for s in [Scenario::Rgb, Scenario::Depth] {
            for l in 1..5 {
                worst_step = worst_step.max(m(s, kind, l + 1) - m(s, kind, l));
            }
        }
    }
    let trend = check(
        worst_step <= 0.005 && secs < 300.0,
        format!("largest single-modal step {worst_step:+.4} mAP, grid {secs:.2} s"),
    );

    let mut worst_ratio: f64 = 0.0;
    let mut dominated = true;
    for kind in CorruptionKind::ALL {
        for (fused, noisy) in [
            (Scenario::NoisyRgbDepth { selective: true }, Scenario::Rgb),
            (Scenario::RgbNoisyDepth { selective: true }, Scenario::Depth),
        ] {
            let drop_fused = m(fused, kind, 0) - m(fused, kind, 5);
            let drop_single = m(noisy, kind, 0) - m(noisy, kind, 5);
            worst_ratio = worst_ratio.max(drop_fused / drop_single);
        }
        for l in 0..=5 {
            dominated &= m(Scenario::NoisyRgbDepth { selective: true }, kind, l) >= m(Scenario::Rgb, kind, l);
        }
    }
    let robust = check(
        worst_ratio < 0.25 && dominated,
        format!("worst fused/single drop ratio {worst_ratio:.3}, NR-D >= noisy RGB everywhere: {dominated}"),
    );

    let mut worst_margin = f64::INFINITY;
    for kind in CorruptionKind::ALL {
        for l in 3..=5 {
            worst_margin = worst_margin.min(
                m(Scenario::NoisyBoth { selective: true }, kind, l) - m(Scenario::NoisyBoth { selective: false }, kind, l),
            );
        }
    }
    let selection = check(worst_margin >= 0.01, format!("smallest selective - avg margin {worst_margin:+.4} mAP"));
    [trend, robust, selection]
}

fn run(threads: u8, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fuselage"))
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .env_remove("FUSELAGE_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// Runs the corrupt/simulate/fuse/eval pipeline into `root` and returns every
/// output file's bytes, keyed by relative path.
fn pipeline(root: &Path, threads: u8) -> Result<Vec<(String, Vec<u8>)>, String> {
    let p = |s: &str| root.join(s).to_str().unwrap().to_string();
    let images = p("images");
    std::fs::create_dir_all(&images).map_err(|e| e.to_string())?;
    let mut rng = seq(105, 8, 0);
    for i in 0..4 {
        let pnm = Pnm {
            width: 96,
            height: 48,
            channels: 3,
            maxval: 255,
            samples: (0..96 * 48 * 3).map(|_| rng.below(256) as u16).collect(),
        };
        io::write_pnm(&root.join(format!("images/{i:06}.ppm")), &pnm).map_err(|e| e.to_string())?;
    }
    for kind in ["gaussian_noise", "motion_blur", "frost"] {
        run(threads, &["corrupt", "--input", &images, "--out", &p(kind), "--kind", kind, "--level", "3", "--seed", "5"])?;
    }
    run(
        threads,
        &["simulate", "--out", &p("sim"), "--dump", "clean", "--dump", "frost:4", "--seed", "9", "--svg"],
    )?;
    for method in ["selective", "avg"] {
        run(
            threads,
            &[
                "fuse",
                "--rgb",
                &p("sim/frost_4_rgb.txt"),
                "--depth",
                &p("sim/frost_4_depth.txt"),
                "--out",
                &p(&format!("fused_{method}.txt")),
                "--method",
                method,
            ],
        )?;
        run(
            threads,
            &[
                "eval",
                "--detections",
                &p(&format!("fused_{method}.txt")),
                "--labels",
                &p("sim/labels.txt"),
                "--out",
                &p(&format!("eval_{method}.csv")),
            ],
        )?;
    }
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.push((rel, std::fs::read(&path).map_err(|e| e.to_string())?));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = pipeline(&dir.path().join("a"), 1)?;
    let b = pipeline(&dir.path().join("b"), 1)?;
    let c = pipeline(&dir.path().join("c"), 8)?;
    let differing: Vec<&str> = a
        .iter()
        .filter(|x| !b.contains(x) || !c.contains(x))
        .map(|x| x.0.as_str())
        .collect();
    check(
        a.len() == b.len() && a.len() == c.len() && differing.is_empty(),
        format!("{} output files compared over 2 runs and 1 vs 8 threads, differing: {differing:?}", a.len()),
    )
}

fn wild(rng: &mut Sequence) -> f64 {
    match rng.below(3) {
        0 => rng.range(-1000.0, 1000.0),
        1 => 10f64.powf(rng.range(-300.0, 300.0)),
        _ => -rng.uniform() / 3.0,
    }
}

fn round_trips() -> Outcome {
    let mut failures = Vec::new();
    for i in 0..1000u64 {
        let mut rng = seq(106, 9, i);
        let recs: Vec<DetectionRecord> = (0..rng.below(12))
            .map(|k| {
                let mean = [wild(&mut rng), wild(&mut rng), 1.0 + rng.uniform() * 90.0, 1e-3 + rng.uniform()];
                let var = std::array::from_fn(|_| wild(&mut rng).abs().max(1e-300));
                let bbox = GaussianBox::new(mean, var, rng.uniform(), (k % 3) as u8, Modality::Depth).unwrap();
                DetectionRecord { frame_id: format!("f{}", rng.below(50)), bbox }
            })
            .collect();
        let text = io::render_detections(&recs).map_err(|e| e.to_string())?;
        if io::parse_detections(&text, "mem").ok().as_ref() != Some(&recs) {
            failures.push(format!("detections #{i}"));
        }

        let frames = fuselage_core::eval::corpus::synthetic_corpus(1 + rng.below(6), i);
        let text = io::render_corpus(&frames).map_err(|e| e.to_string())?;
        if io::parse_corpus(&text, "mem").ok().as_ref() != Some(&frames) {
            failures.push(format!("corpus #{i}"));
        }

        let calib = KittiCalib {
            p2: std::array::from_fn(|_| std::array::from_fn(|_| wild(&mut rng))),
            r0_rect: std::array::from_fn(|_| std::array::from_fn(|_| wild(&mut rng))),
            tr_velo_to_cam: std::array::from_fn(|_| std::array::from_fn(|_| wild(&mut rng))),
        };
        if io::parse_calib(&io::render_calib(&calib), "mem").ok().as_ref() != Some(&calib) {
            failures.push(format!("calib #{i}"));
        }

        let cloud = PointCloud {
            points: (0..rng.below(40))
                .map(|_| {
                    let mut f = || f64::from(wild(&mut rng) as f32);
                    PointXyzi { x: f(), y: f(), z: f(), intensity: f() }
                })
                .collect(),
        };
        if io::decode_velodyne(&io::encode_velodyne(&cloud)).as_ref() != Some(&cloud) {
            failures.push(format!("velodyne #{i}"));
        }

        let channels = if rng.uniform() < 0.5 { 1 } else { 3 };
        let maxval = 1 + rng.below(65535) as u16;
        let (width, height) = (rng.below(30), rng.below(20));
        let samples = (0..width * height * channels).map(|_| rng.below(usize::from(maxval) + 1) as u16).collect();
        let pnm = Pnm { width, height, channels, maxval, samples };
        let ok = io::encode_pnm(&pnm).ok().and_then(|b| io::decode_pnm(&b).ok()).as_ref() == Some(&pnm);
        if !ok {
            failures.push(format!("pnm #{i}"));
        }
    }

    let calib: CalibMatrices = io::read_calib(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/calib_kitti.txt"),
    )
    .map_err(|e| e.to_string())?;
    let worst = projection_round_trip(&calib);
    check(
        failures.is_empty() && worst < 1e-6,
        format!("5 formats x 1000 instances, failures {failures:?}; projection worst ray error {worst:.2e}"),
    )
}

/// Points on pixel centres of the crop, several per pixel; the stored depth
/// must back-project onto the nearest one.
fn projection_round_trip(calib: &CalibMatrices) -> f64 {
    let (dx, dy) = center_bottom_crop(KITTI_IMAGE_SIZE, DEFAULT_OUT_SIZE);
    let mut worst: f64 = 0.0;
    for frame in 0..3 {
        let mut rng = seq(107, 10, frame);
        let mut points = Vec::new();
        let mut nearest = std::collections::HashMap::<(usize, usize), [f64; 3]>::new();
        for _ in 0..2000 {
            let (col, row) = (rng.below(DEFAULT_OUT_SIZE.0), rng.below(DEFAULT_OUT_SIZE.1));
            for _ in 0..1 + rng.below(3) {
                let cam = calib.back_project((col as i64 + dx) as f64, (row as i64 + dy) as f64, rng.range(2.0, 79.0));
                let d = [cam[0] - calib.t[0], cam[1] - calib.t[1], cam[2] - calib.t[2]];
                let s: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| calib.r[j][i] * d[j]).sum());
                points.push(PointXyzi { x: s[0], y: s[1], z: s[2], intensity: 0.0 });
                let c = calib.to_camera(s);
                let w = nearest.entry((col, row)).or_insert(c);
                if c[2] < w[2] {
                    *w = c;
                }
            }
        }
        let img = project_points_cropped(&PointCloud { points }, calib, KITTI_IMAGE_SIZE, DEFAULT_OUT_SIZE, DEFAULT_MAX_RANGE)
            .expect("fixture projects");
        for ((col, row), c) in nearest {
            let z = img.get(col, row) * DEFAULT_MAX_RANGE;
            let b = calib.back_project((col as i64 + dx) as f64, (row as i64 + dy) as f64, z);
            let err = (0..3).map(|k| (b[k] - c[k]).powi(2)).sum::<f64>().sqrt();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(err / norm);
        }
    }
    worst
}

fn performance_floor() -> Outcome {
    let frames: Vec<_> = (0..10_000u64)
        .map(|i| random_instance(&mut seq(108, 11, i), 50, 50))
        .collect();
    let cfg = FusionConfig::default();
    let start = Instant::now();
    let mut kept = 0usize;
    for (rgb, depth) in &frames {
        kept += multi_source_nms(rgb, depth, &cfg).len();
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 2.0, format!("10^4 frames x 100 boxes in {secs:.3} s ({kept} boxes kept)"))
}

#[test]
fn acceptance() {
    let [c5, c6, c7] = grid_criteria();
    let results = [
        ("oracle equivalence", oracle_equivalence()),
        ("two-box inverse-variance fusion", two_box_fusion()),
        ("loss gradient and stationary point", gradient_and_stationary_point()),
        ("calibration soundness", calibration()),
        ("degradation trend", c5),
        ("fusion robustness", c6),
        ("selection benefit", c7),
        ("determinism", determinism()),
        ("round trips", round_trips()),
        ("performance floor", performance_floor()),
    ];
    let mut failed = Vec::new();
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(d) => println!("criterion {:>2} PASS {name}: {d}", i + 1),
            Err(d) => {
                println!("criterion {:>2} FAIL {name}: {d}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
