//! `fuselage`: project, corrupt, simulate, fuse, evaluate and calibrate.
//!
//! Every subcommand validates its flags before touching the filesystem and
//! writes outputs in canonical order (sorted by file stem or frame id), so
//! results do not depend on `--threads`.

mod plot;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use fuselage_core::corruption::{corrupt, CorruptionKind, CorruptionSpec, Raster, MAX_LEVEL};
use fuselage_core::eval::corpus::{golden_corpus, synthetic_corpus};
use fuselage_core::eval::sim::frame_key;
use fuselage_core::eval::{
    evaluate, match_detections, report_rows, run_degradation_grid, simulate_detections, split_622, GridConfig,
    GroundTruthFrame, ReportRow, Scenario, SimDetectorSpec,
};
use fuselage_core::fusion::{avg_fusion, multi_source_nms, Decay, DetectionSet, FusionConfig};
use fuselage_core::geometry::{GaussianBox, Modality};
use fuselage_core::io;
use fuselage_core::io::DetectionRecord;
use fuselage_core::projection::{center_bottom_crop, project_with_offset, DEFAULT_MAX_RANGE};
use fuselage_core::uncertainty::{default_levels, ece_curve, scatter_correlations, PairedPrediction, ScatterPoint};

use plot::{extent, line_plot, scatter_plot, Axes, Series};

#[derive(Parser)]
#[command(name = "fuselage", version, about = "Uncertainty-aware camera/LiDAR late fusion toolkit")]
struct Cli {
    /// Worker threads [default: all cores]. Outputs do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project velodyne scans to 16-bit depth PGMs.
    Project(ProjectArgs),
    /// Apply a seeded corruption to every PGM/PPM in a directory.
    Corrupt(CorruptArgs),
    /// Fuse camera and depth detection files frame by frame.
    Fuse(FuseArgs),
    /// Score detections against labels (per-class AP, mAP).
    Eval(EvalArgs),
    /// Run simulated detectors over a corpus and the degradation grid.
    Simulate(SimulateArgs),
    /// Interval calibration (ECE) and IoU/variance/score correlations.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Random seed.
    #[arg(long, env = "FUSELAGE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct FusionArgs {
    /// Lower IoU gate (ambiguous overlap starts here).
    #[arg(long, default_value_t = FusionConfig::EXPERIMENT_GATES.0)]
    t1: f64,
    /// Upper IoU gate (corroborated overlap starts here).
    #[arg(long, default_value_t = FusionConfig::EXPERIMENT_GATES.1)]
    t2: f64,
    /// Score decay: `linear`, `gaussian` or `gaussian:<sigma>`.
    #[arg(long, default_value = "gaussian")]
    decay: Decay,
    /// Boxes scoring below this are dropped.
    #[arg(long, default_value_t = 0.01)]
    score_floor: f64,
    /// IoU threshold of single-modality NMS.
    #[arg(long, default_value_t = 0.45)]
    nms_iou: f64,
    /// Fuse across classes instead of per class.
    #[arg(long)]
    class_agnostic: bool,
}

impl FusionArgs {
    fn config(&self) -> Result<FusionConfig> {
        let cfg = FusionConfig {
            t1: self.t1,
            t2: self.t2,
            decay: self.decay,
            single_modal_nms_iou: self.nms_iou,
            score_floor: self.score_floor,
            per_class: !self.class_agnostic,
        };
        cfg.validate().context("invalid fusion flags")?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ProjectArgs {
    /// Directory of `<frame>.bin` velodyne scans.
    #[arg(long)]
    velodyne: PathBuf,
    /// Directory of `<frame>.txt` KITTI calibration files.
    #[arg(long)]
    calib: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Depth in meters that maps to 1.0.
    #[arg(long, default_value_t = DEFAULT_MAX_RANGE)]
    max_range: f64,
    /// Output raster width.
    #[arg(long, default_value_t = 512)]
    width: usize,
    /// Output raster height.
    #[arg(long, default_value_t = 128)]
    height: usize,
    /// Full camera image width; the output is its centre-bottom crop.
    #[arg(long, default_value_t = 1242)]
    image_width: usize,
    #[arg(long, default_value_t = 375)]
    image_height: usize,
}

#[derive(Args)]
struct CorruptArgs {
    /// Directory of `.pgm` / `.ppm` rasters.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// gaussian_noise, motion_blur or frost.
    #[arg(long)]
    kind: CorruptionKind,
    /// Severity, 0 (copy) to 5.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=MAX_LEVEL as i64))]
    level: u8,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FuseMethod {
    /// Uncertainty-aware multi-source NMS.
    Selective,
    /// Random half-drop then NMS baseline.
    Avg,
}

#[derive(Args)]
struct FuseArgs {
    /// Camera detection records.
    #[arg(long)]
    rgb: PathBuf,
    /// Depth detection records.
    #[arg(long)]
    depth: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "selective")]
    method: FuseMethod,
    #[command(flatten)]
    fusion: FusionArgs,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Split {
    All,
    Train,
    Val,
    Test,
}

#[derive(Args)]
struct LabelArgs {
    /// Corpus text file, or a directory of KITTI `label_2` files.
    #[arg(long)]
    labels: PathBuf,
    /// 6:2:2 subset of the labelled frames to use.
    #[arg(long, value_enum, default_value = "all")]
    split: Split,
    /// Seed of the 6:2:2 shuffle.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    /// Detection records.
    #[arg(long)]
    detections: PathBuf,
    #[command(flatten)]
    labels: LabelArgs,
    /// CSV report path.
    #[arg(long)]
    out: PathBuf,
    /// Minimum IoU for a true positive.
    #[arg(long, default_value_t = 0.5)]
    iou_gate: f64,
    /// Value of the `scenario` column.
    #[arg(long, default_value = "eval")]
    scenario: String,
    /// Value of the `noise_kind` column.
    #[arg(long, default_value = "none")]
    noise_kind: String,
    /// Value of the `level` column.
    #[arg(long, default_value_t = 0)]
    level: u8,
}

#[derive(Args)]
struct SimulateArgs {
    /// Corpus file or KITTI label directory [default: the golden synthetic corpus].
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Generate a synthetic corpus of this many frames instead.
    #[arg(long, conflicts_with = "labels")]
    frames: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Corruption kinds of the grid.
    #[arg(long, value_delimiter = ',', default_value = "gaussian_noise,motion_blur,frost")]
    kinds: Vec<CorruptionKind>,
    /// Severities of the grid.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5",
          value_parser = clap::value_parser!(u8).range(0..=MAX_LEVEL as i64))]
    levels: Vec<u8>,
    /// Write detections for `clean` or `<kind>:<level>` (repeatable).
    #[arg(long = "dump", default_value = "clean")]
    dumps: Vec<String>,
    /// How closely reported variances track the true error, in [0, 1].
    #[arg(long)]
    fidelity: Option<f64>,
    /// Clean-condition coordinate noise of the camera detector, pixels.
    #[arg(long)]
    rgb_sigma: Option<f64>,
    /// Clean-condition coordinate noise of the depth detector, pixels.
    #[arg(long)]
    depth_sigma: Option<f64>,
    /// Mean background false positives per frame and detector.
    #[arg(long)]
    fp_rate: Option<f64>,
    /// Matching IoU for the grid report.
    #[arg(long, default_value_t = 0.5)]
    iou_gate: f64,
    /// Also render the grid as SVG.
    #[arg(long)]
    svg: bool,
    #[command(flatten)]
    fusion: FusionArgs,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Detection records.
    #[arg(long)]
    detections: PathBuf,
    #[command(flatten)]
    labels: LabelArgs,
    /// Output directory for `ece.csv`, `scatter.csv` and `summary.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Minimum IoU to pair a detection with an object.
    #[arg(long, default_value_t = 0.3)]
    iou_gate: f64,
    /// Also render the curve and scatters as SVG.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(usize::from(n)).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Project(a) => cmd_project(a),
        Command::Corrupt(a) => cmd_corrupt(a),
        Command::Fuse(a) => cmd_fuse(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn check_gate(name: &str, v: f64) -> Result<()> {
    ensure!(v > 0.0 && v <= 1.0, "--{name} must be in (0, 1], got {v}");
    Ok(())
}

/// Files in `dir` with one of `exts`, sorted by name.
fn list_files(dir: &Path, exts: &[&str]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))? {
        let path = entry.with_context(|| format!("cannot read directory {}", dir.display()))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if path.is_file() && exts.contains(&ext) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn fmt6(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.6}")
    }
}

fn cmd_project(a: ProjectArgs) -> Result<()> {
    ensure!(a.max_range > 0.0 && a.max_range.is_finite(), "--max-range must be positive");
    ensure!(a.width > 0 && a.height > 0, "--width and --height must be positive");
    ensure!(
        a.width <= a.image_width && a.height <= a.image_height,
        "output {}x{} does not fit in the {}x{} image",
        a.width,
        a.height,
        a.image_width,
        a.image_height
    );
    let scans = list_files(&a.velodyne, &["bin"])?;
    let calibs: Vec<PathBuf> = scans.iter().map(|s| a.calib.join(format!("{}.txt", stem(s)))).collect();
    if let Some(missing) = calibs.iter().find(|c| !c.is_file()) {
        bail!("missing calibration file {}", missing.display());
    }
    create_dir(&a.out)?;
    let offset = center_bottom_crop((a.image_width, a.image_height), (a.width, a.height));

    let rows: Vec<(String, String, usize, usize)> = scans
        .par_iter()
        .zip(&calibs)
        .map(|(scan, calib)| -> Result<_> {
            let cloud = io::read_velodyne(scan)?;
            let c = io::read_calib(calib)?;
            let img = project_with_offset(&cloud, &c, (a.width, a.height), offset, a.max_range)
                .with_context(|| format!("projecting {}", scan.display()))?;
            let name = format!("{}.pgm", stem(scan));
            let raster = Raster::from_data(img.width, img.height, 1, img.pixels)?;
            io::write_raster(&a.out.join(&name), &raster, u16::MAX)?;
            let filled = raster.data.iter().filter(|v| **v > 0.0).count();
            Ok((stem(scan), name, cloud.points.len(), filled))
        })
        .collect::<Result<_>>()?;

    let mut w = csv_writer(&a.out.join("manifest.csv"))?;
    w.write_record(["frame_id", "path", "points", "filled_pixels"])?;
    for (id, name, points, filled) in &rows {
        w.write_record([id, name, &points.to_string(), &filled.to_string()])?;
    }
    w.flush()?;
    eprintln!("projected {} frames into {}", rows.len(), a.out.display());
    Ok(())
}

fn cmd_corrupt(a: CorruptArgs) -> Result<()> {
    let base = CorruptionSpec::new(a.kind, a.level, a.seed.seed)?;
    let files = list_files(&a.input, &["pgm", "ppm"])?;
    create_dir(&a.out)?;
    let rows: Vec<(String, u64)> = files
        .par_iter()
        .map(|path| -> Result<_> {
            let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
            let pnm = io::decode_pnm(&bytes).with_context(|| format!("{}", path.display()))?;
            let name = path.file_name().expect("listed files have names").to_string_lossy().into_owned();
            let spec = CorruptionSpec {
                seed: base.seed ^ frame_key(&stem(path)),
                ..base
            };
            let out = a.out.join(&name);
            if spec.level == 0 {
                std::fs::write(&out, &bytes).with_context(|| format!("cannot write {}", out.display()))?;
            } else {
                let img = corrupt(&pnm.to_raster(), &spec)?;
                io::write_raster(&out, &img, pnm.maxval)?;
            }
            Ok((name, spec.seed))
        })
        .collect::<Result<_>>()?;

    let mut w = csv_writer(&a.out.join("manifest.csv"))?;
    w.write_record(["path", "kind", "level", "seed", "file_seed"])?;
    for (name, file_seed) in &rows {
        w.write_record([
            name.as_str(),
            a.kind.as_str(),
            &a.level.to_string(),
            &a.seed.seed.to_string(),
            &file_seed.to_string(),
        ])?;
    }
    w.flush()?;
    eprintln!("corrupted {} rasters ({} level {})", rows.len(), a.kind.as_str(), a.level);
    Ok(())
}

/// Detection records grouped by frame id, checking the declared modality.
fn load_detections(path: &Path, expect: Option<Modality>) -> Result<BTreeMap<String, Vec<GaussianBox>>> {
    let mut frames: BTreeMap<String, Vec<GaussianBox>> = BTreeMap::new();
    for r in io::read_detections(path)? {
        if let Some(m) = expect {
            ensure!(
                r.bbox.modality == m,
                "{}: frame {} has a {} record in the {} input",
                path.display(),
                r.frame_id,
                r.bbox.modality,
                m
            );
        }
        frames.entry(r.frame_id).or_default().push(r.bbox);
    }
    Ok(frames)
}

fn to_records<'a>(frames: impl IntoIterator<Item = (&'a String, &'a [GaussianBox])>) -> Vec<DetectionRecord> {
    frames
        .into_iter()
        .flat_map(|(id, boxes)| {
            boxes.iter().map(move |b| DetectionRecord {
                frame_id: id.clone(),
                bbox: *b,
            })
        })
        .collect()
}

fn cmd_fuse(a: FuseArgs) -> Result<()> {
    let cfg = a.fusion.config()?;
    let rgb = load_detections(&a.rgb, Some(Modality::Rgb))?;
    let depth = load_detections(&a.depth, Some(Modality::Depth))?;
    let mut ids: Vec<&String> = rgb.keys().chain(depth.keys()).collect();
    ids.sort();
    ids.dedup();

    let set = |m: &BTreeMap<String, Vec<GaussianBox>>, id: &str| -> Result<DetectionSet> {
        Ok(DetectionSet::from_boxes(m.get(id).cloned().unwrap_or_default())?)
    };
    let fused: Vec<(String, Vec<GaussianBox>)> = ids
        .par_iter()
        .map(|id| -> Result<_> {
            let (r, d) = (set(&rgb, id)?, set(&depth, id)?);
            let out = match a.method {
                FuseMethod::Selective => multi_source_nms(&r, &d, &cfg),
                FuseMethod::Avg => avg_fusion(&r, &d, &cfg, a.seed.seed ^ frame_key(id)),
            };
            Ok(((*id).clone(), out.into_boxes()))
        })
        .collect::<Result<_>>()?;

    let records = to_records(fused.iter().map(|(id, b)| (id, b.as_slice())));
    io::write_detections(&a.out, &records)?;
    eprintln!("fused {} frames into {} detections", fused.len(), records.len());
    Ok(())
}

fn load_labels(a: &LabelArgs) -> Result<Vec<GroundTruthFrame>> {
    let mut frames = if a.labels.is_dir() {
        let mut frames = Vec::new();
        let mut errors = 0;
        let mut degenerate = 0;
        for path in list_files(&a.labels, &["txt"])? {
            let (f, report) = io::read_kitti_labels(&path)?;
            for e in &report.errors {
                eprintln!("warning: {e}");
            }
            errors += report.errors.len();
            degenerate += report.degenerate;
            frames.push(f);
        }
        if errors + degenerate > 0 {
            eprintln!("warning: skipped {errors} malformed lines and {degenerate} degenerate boxes");
        }
        frames
    } else {
        io::read_corpus(&a.labels)?
    };
    frames.sort_by(|x, y| x.frame_id.cmp(&y.frame_id));
    if let Some(w) = frames.windows(2).find(|w| w[0].frame_id == w[1].frame_id) {
        bail!("{}: duplicate frame id {}", a.labels.display(), w[0].frame_id);
    }
    if a.split != Split::All {
        let (train, val, test) = split_622(frames.len(), a.split_seed);
        let mut keep = match a.split {
            Split::Train => train,
            Split::Val => val,
            _ => test,
        };
        keep.sort_unstable();
        frames = keep.into_iter().map(|i| frames[i].clone()).collect();
    }
    Ok(frames)
}

/// Detections aligned with `frames`; unknown frame ids are an error.
fn align(
    path: &Path,
    frames: &[GroundTruthFrame],
    mut dets: BTreeMap<String, Vec<GaussianBox>>,
    strict: bool,
) -> Result<Vec<Vec<GaussianBox>>> {
    let aligned: Vec<Vec<GaussianBox>> = frames.iter().map(|f| dets.remove(&f.frame_id).unwrap_or_default()).collect();
    if strict {
        if let Some(id) = dets.keys().next() {
            bail!("{}: frame {id} has no labels", path.display());
        }
    }
    Ok(aligned)
}

fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["scenario", "noise_kind", "level", "class", "ap", "map", "tp", "fp", "fn"])?;
    for r in rows {
        w.write_record([
            r.scenario.as_str(),
            &r.noise_kind,
            &r.level.to_string(),
            &r.class,
            &fmt6(r.ap),
            &fmt6(r.map),
            &r.tp.to_string(),
            &r.fp.to_string(),
            &r.fn_.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    check_gate("iou-gate", a.iou_gate)?;
    let frames = load_labels(&a.labels)?;
    let dets = load_detections(&a.detections, None)?;
    let strict = a.labels.split == Split::All;
    let aligned = align(&a.detections, &frames, dets, strict)?;
    let report = evaluate(frames.iter().zip(aligned.iter().map(Vec::as_slice)), a.iou_gate);
    write_report(&a.out, &report_rows(&a.scenario, &a.noise_kind, a.level, &report))?;
    println!("mAP {:.6} over {} frames", report.map, frames.len());
    Ok(())
}

/// `clean` or `<kind>:<level>`.
fn parse_dump(s: &str) -> Result<CorruptionSpec> {
    if s == "clean" {
        return Ok(CorruptionSpec::clean());
    }
    let (kind, level) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("--dump {s:?}: expected `clean` or `<kind>:<level>`"))?;
    let kind: CorruptionKind = kind.parse().with_context(|| format!("--dump {s:?}"))?;
    let level: u8 = level.parse().with_context(|| format!("--dump {s:?}: bad level"))?;
    CorruptionSpec::new(kind, level, 0).with_context(|| format!("--dump {s:?}"))
}

fn dump_name(c: &CorruptionSpec) -> String {
    if c.level == 0 {
        "clean".to_string()
    } else {
        format!("{}_{}", c.kind.as_str(), c.level)
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let fusion = a.fusion.config()?;
    check_gate("iou-gate", a.iou_gate)?;
    let dumps = a.dumps.iter().map(|d| parse_dump(d)).collect::<Result<Vec<_>>>()?;
    let mut rgb = SimDetectorSpec::camera_default();
    let mut depth = SimDetectorSpec::lidar_default();
    for spec in [&mut rgb, &mut depth] {
        spec.seed = a.seed.seed;
        if let Some(f) = a.fidelity {
            spec.fidelity = f;
        }
        if let Some(fp) = a.fp_rate {
            spec.fp_rate = fp;
        }
    }
    if let Some(s) = a.rgb_sigma {
        rgb.sigma_base = s;
    }
    if let Some(s) = a.depth_sigma {
        depth.sigma_base = s;
    }
    rgb.validate().context("camera detector flags")?;
    depth.validate().context("depth detector flags")?;

    let corpus = match (&a.labels, a.frames) {
        (Some(path), _) => load_labels(&LabelArgs {
            labels: path.clone(),
            split: Split::All,
            split_seed: 0,
        })?,
        (None, Some(n)) => synthetic_corpus(n, a.seed.seed),
        (None, None) => golden_corpus(),
    };
    ensure!(!corpus.is_empty(), "no labelled frames");

    let cfg = GridConfig {
        rgb,
        depth,
        fusion,
        kinds: a.kinds.clone(),
        levels: a.levels.clone(),
        iou_gate: a.iou_gate,
        baseline_seed: a.seed.seed,
    };
    let grid = run_degradation_grid(&corpus, &cfg)?;

    create_dir(&a.out)?;
    io::write_corpus(&a.out.join("labels.txt"), &corpus)?;
    write_report(&a.out.join("grid.csv"), &grid.rows())?;
    for c in &dumps {
        for spec in [&rgb, &depth] {
            let sets: Vec<Vec<GaussianBox>> = corpus
                .par_iter()
                .map(|f| simulate_detections(f, spec, c).into_boxes())
                .collect();
            let records = to_records(corpus.iter().map(|f| &f.frame_id).zip(sets.iter().map(Vec::as_slice)));
            let name = format!("{}_{}.txt", dump_name(c), spec.modality);
            io::write_detections(&a.out.join(name), &records)?;
        }
    }
    if a.svg {
        for &kind in &a.kinds {
            let series: Vec<Series> = Scenario::ALL
                .iter()
                .map(|&s| Series {
                    name: s.name().to_string(),
                    points: a
                        .levels
                        .iter()
                        .filter_map(|&l| grid.map(s, kind, l).map(|m| (f64::from(l), m)))
                        .collect(),
                })
                .collect();
            let ax = Axes {
                title: format!("mAP under {}", kind.as_str()),
                x_label: "severity".into(),
                y_label: "mAP".into(),
                x_range: (0.0, f64::from(MAX_LEVEL)),
                y_range: (0.0, 1.0),
            };
            write_text(&a.out.join(format!("grid_{}.svg", kind.as_str())), &line_plot(&ax, &series, false))?;
        }
    }
    for &kind in &a.kinds {
        let row: Vec<String> = a
            .levels
            .iter()
            .map(|&l| format!("{:.4}", grid.map(Scenario::NoisyBoth { selective: true }, kind, l).unwrap_or(f64::NAN)))
            .collect();
        println!("{:<15} nr-nd mAP {}", kind.as_str(), row.join(" "));
    }
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs) -> Result<()> {
    check_gate("iou-gate", a.iou_gate)?;
    let frames = load_labels(&a.labels)?;
    let dets = load_detections(&a.detections, None)?;
    let aligned = align(&a.detections, &frames, dets, a.labels.split == Split::All)?;

    let mut paired = Vec::new();
    let mut scatter = Vec::new();
    for (f, d) in frames.iter().zip(&aligned) {
        for m in match_detections(d, f, a.iou_gate) {
            scatter.push(ScatterPoint {
                iou: m.iou,
                variance: m.det.mean_variance(),
                score: m.det.score,
            });
            if let Some(j) = m.gt_index {
                paired.push(PairedPrediction {
                    pred_var: m.det.var,
                    pred_mu: m.det.mean,
                    target: f.objects[j].bbox.to_center(),
                });
            }
        }
    }
    let curve = ece_curve(&paired, &default_levels()).context("calibration curve")?;
    let stats = scatter_correlations(scatter).context("correlations")?;

    create_dir(&a.out)?;
    let mut w = csv_writer(&a.out.join("ece.csv"))?;
    w.write_record(["expected", "observed", "count"])?;
    for b in &curve.bins {
        w.write_record([fmt6(b.expected), fmt6(b.observed), b.count.to_string()])?;
    }
    w.flush()?;

    let mut w = csv_writer(&a.out.join("scatter.csv"))?;
    w.write_record(["iou", "variance", "score"])?;
    for p in &stats.scatter {
        w.write_record([format!("{:.6}", p.iou), format!("{:.6e}", p.variance), format!("{:.6}", p.score)])?;
    }
    w.flush()?;

    let mut w = csv_writer(&a.out.join("summary.csv"))?;
    w.write_record(["metric", "value", "degenerate"])?;
    w.write_record(["ece", &fmt6(curve.ece), "false"])?;
    w.write_record(["paired_detections", &paired.len().to_string(), "false"])?;
    for (name, c) in [
        ("pearson_iou_variance", stats.iou_variance),
        ("pearson_iou_score", stats.iou_score),
        ("pearson_variance_score", stats.variance_score),
    ] {
        w.write_record([name, &fmt6(c.value), &c.degenerate.to_string()])?;
    }
    w.flush()?;

    if a.svg {
        let ax = Axes {
            title: "Interval calibration".into(),
            x_label: "expected coverage".into(),
            y_label: "observed coverage".into(),
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
        };
        let series = [Series {
            name: format!("ece {:.4}", curve.ece),
            points: curve.bins.iter().map(|b| (b.expected, b.observed)).collect(),
        }];
        write_text(&a.out.join("calibration.svg"), &line_plot(&ax, &series, true))?;
        for (file, y_label, pick) in [
            ("scatter_variance.svg", "mean variance", (|p: &ScatterPoint| p.variance) as fn(&ScatterPoint) -> f64),
            ("scatter_score.svg", "score", |p: &ScatterPoint| p.score),
        ] {
            let ax = Axes {
                title: format!("IoU vs {y_label}"),
                x_label: "IoU".into(),
                y_label: y_label.into(),
                x_range: (0.0, 1.0),
                y_range: extent(stats.scatter.iter().map(pick)),
            };
            let series = [Series {
                name: "detections".into(),
                points: stats.scatter.iter().map(|p| (p.iou, pick(p))).collect(),
            }];
            write_text(&a.out.join(file), &scatter_plot(&ax, &series))?;
        }
    }
    println!(
        "ece {:.6} over {} paired detections; pearson(iou, variance) {:.4}",
        curve.ece,
        paired.len(),
        stats.iou_variance.value
    );
    Ok(())
}
