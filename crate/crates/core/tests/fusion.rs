use std::time::Instant;

use fuselage_core::fusion::{
    multi_source_nms, oracle_multi_source_nms, random_instance, softer_nms, softer_update, Decay, DetectionSet,
    FusionConfig,
};
use fuselage_core::eval::corpus::synthetic_corpus;
use fuselage_core::geometry::{GaussianBox, Modality};
use fuselage_core::rng::{CounterRng, Sequence};

fn random_config(rng: &mut Sequence) -> FusionConfig {
    let (t1, t2) = if rng.uniform() < 0.5 {
        FusionConfig::REFERENCE_GATES
    } else {
        FusionConfig::EXPERIMENT_GATES
    };
    let mut cfg = FusionConfig::with_gates(t1, t2);
    if rng.uniform() < 0.3 {
        cfg.decay = Decay::Linear;
    }
    cfg.per_class = rng.uniform() < 0.8;
    cfg
}

#[test]
fn matches_oracle_on_ten_thousand_frames() {
    let root = CounterRng::new(1, 0xD1FF);
    let start = Instant::now();
    for i in 0..10_000u64 {
        let mut rng = Sequence::new(root.substream(i));
        let cfg = random_config(&mut rng);
        let (n_r, n_d) = (rng.below(9), rng.below(9));
        let (rgb, depth) = random_instance(&mut rng, n_r, n_d);
        let fast = multi_source_nms(&rgb, &depth, &cfg);
        let slow = oracle_multi_source_nms(&rgb, &depth, &cfg);
        assert_eq!(fast, slow, "frame {i} cfg {cfg:?}\nrgb {rgb:?}\ndepth {depth:?}");
    }
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn output_size_and_score_range() {
    let root = CounterRng::new(2, 0xD1FF);
    for i in 0..2000u64 {
        let mut rng = Sequence::new(root.substream(i));
        let cfg = random_config(&mut rng);
        let (n_r, n_d) = (rng.below(30), rng.below(30));
        let (rgb, depth) = random_instance(&mut rng, n_r, n_d);
        let out = multi_source_nms(&rgb, &depth, &cfg);
        assert!(out.len() <= rgb.len() + depth.len());
        for b in out.boxes() {
            assert!(b.score > 0.0 && b.score <= 1.0, "{b:?}");
            b.validate().unwrap();
        }
        let scores: Vec<f64> = out.scores().collect();
        assert!(scores.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn fused_coordinates_stay_in_the_hull_of_their_class() {
    let root = CounterRng::new(3, 0xD1FF);
    for i in 0..2000u64 {
        let mut rng = Sequence::new(root.substream(i));
        let cfg = FusionConfig::default();
        let (rgb, depth) = random_instance(&mut rng, 12, 12);
        for b in multi_source_nms(&rgb, &depth, &cfg).boxes() {
            let same_class: Vec<&GaussianBox> = rgb
                .boxes()
                .iter()
                .chain(depth.boxes())
                .filter(|x| x.class_id == b.class_id)
                .collect();
            for k in 0..4 {
                let lo = same_class.iter().map(|x| x.mean[k]).fold(f64::INFINITY, f64::min);
                let hi = same_class.iter().map(|x| x.mean[k]).fold(f64::NEG_INFINITY, f64::max);
                assert!(lo <= b.mean[k] && b.mean[k] <= hi, "coord {k} {} not in [{lo}, {hi}]", b.mean[k]);
            }
        }
    }
}

fn gb(mean: [f64; 4], var: f64, score: f64, modality: Modality) -> GaussianBox {
    GaussianBox::new(mean, [var; 4], score, 0, modality).unwrap()
}

#[test]
fn two_box_fusion_lies_between_members() {
    let root = CounterRng::new(4, 0xD1FF);
    for i in 0..1000u64 {
        let mut rng = Sequence::new(root.substream(i));
        let a = [rng.range(50.0, 60.0), 40.0, 40.0, 30.0];
        let b = [a[0] + rng.range(-2.0, 2.0), a[1] + rng.range(-2.0, 2.0), 40.0 + rng.range(-2.0, 2.0), 30.0];
        let pool = [gb(a, rng.range(0.1, 10.0), 0.9, Modality::Rgb), gb(b, rng.range(0.1, 10.0), 0.8, Modality::Depth)];
        let f = softer_update(&pool, 0, 0.3);
        for k in 0..4 {
            let (lo, hi) = (a[k].min(b[k]), a[k].max(b[k]));
            assert!(lo <= f.mean[k] && f.mean[k] <= hi);
        }
    }
}

#[test]
fn shrinking_one_modality_variance_pulls_fusion_toward_it() {
    let root = CounterRng::new(5, 0xD1FF);
    let cfg = FusionConfig::default();
    for i in 0..1000u64 {
        let mut rng = Sequence::new(root.substream(i));
        let r = [100.0, 60.0, 50.0, 40.0];
        let d = [100.0 + rng.range(0.5, 3.0), 60.0 - rng.range(0.5, 3.0), 50.0 + rng.range(0.5, 2.0), 40.0];
        let (vr, vd) = (rng.range(0.5, 5.0), rng.range(0.5, 5.0));
        let factor = rng.range(0.05, 0.95);
        let fuse = |var_d: f64| {
            let rgb = DetectionSet::from_boxes(vec![gb(r, vr, 0.9, Modality::Rgb)]).unwrap();
            let depth = DetectionSet::from_boxes(vec![gb(d, var_d, 0.8, Modality::Depth)]).unwrap();
            let out = multi_source_nms(&rgb, &depth, &cfg);
            assert_eq!(out.len(), 1, "pair must be corroborated");
            out.boxes()[0]
        };
        let before = fuse(vd);
        let after = fuse(vd * factor);
        for k in 0..3 {
            assert!(
                (after.mean[k] - d[k]).abs() < (before.mean[k] - d[k]).abs(),
                "coord {k}: {} -> {} toward {}",
                before.mean[k],
                after.mean[k],
                d[k]
            );
        }
    }
}

#[test]
fn identical_sets_reproduce_coordinates() {
    // Ground-truth objects overlap by at most 0.2 IoU, below every t1, so
    // each box is only ever corroborated by its own twin.
    let corpus = synthetic_corpus(1000, 6);
    let root = CounterRng::new(6, 0xD1FF);
    for (i, frame) in corpus.iter().enumerate() {
        let mut rng = Sequence::new(root.substream(i as u64));
        let boxes: Vec<GaussianBox> = frame
            .objects
            .iter()
            .map(|o| {
                let var = std::array::from_fn(|_| rng.range(0.1, 10.0));
                GaussianBox::from_corners(&o.bbox, var, rng.range(0.05, 1.0), o.class_id, Modality::Rgb)
            })
            .collect();
        let rgb = DetectionSet::from_boxes(boxes.clone()).unwrap();
        let depth =
            DetectionSet::from_boxes(boxes.iter().map(|b| GaussianBox { modality: Modality::Depth, ..*b }).collect())
                .unwrap();
        for cfg in [FusionConfig::default(), FusionConfig::with_gates(0.3, 0.5)] {
            let out = multi_source_nms(&rgb, &depth, &cfg);
            assert_eq!(out.len(), boxes.len());
            for b in out.boxes() {
                assert!(boxes.iter().any(|x| x.mean == b.mean), "fused mean {:?} is not an input box", b.mean);
            }
        }
    }
}

#[test]
fn one_empty_modality_is_softer_nms_of_the_other() {
    let root = CounterRng::new(7, 0xD1FF);
    for i in 0..1000u64 {
        let mut rng = Sequence::new(root.substream(i));
        let cfg = random_config(&mut rng);
        let n = rng.below(15);
        let (rgb, _) = random_instance(&mut rng, n, 0);
        let empty = DetectionSet::new();
        assert_eq!(multi_source_nms(&rgb, &empty, &cfg), softer_nms(&rgb, &cfg));
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let root = CounterRng::new(8, 0xD1FF);
    let frames: Vec<(DetectionSet, DetectionSet)> = (0..500u64)
        .map(|i| random_instance(&mut Sequence::new(root.substream(i)), 40, 40))
        .collect();
    let cfg = FusionConfig::default();
    let run = || -> Vec<DetectionSet> { frames.iter().map(|(r, d)| multi_source_nms(r, d, &cfg)).collect() };
    let first = run();
    let parallel: Vec<DetectionSet> = std::thread::scope(|s| {
        let handles: Vec<_> = frames
            .chunks(100)
            .map(|chunk| s.spawn(|| chunk.iter().map(|(r, d)| multi_source_nms(r, d, &cfg)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(first, run());
    assert_eq!(first, parallel);
}
