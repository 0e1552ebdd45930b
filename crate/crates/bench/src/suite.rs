//! Named scenario families used by the experiments and tests.

use keysel::{FrameSize, PipelineConfig, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::{Motion, ObjectSpec, ScenarioSpec};

/// Seeds of the committed salient-plus-distractors suite.
pub const SUITE_SEEDS: [u64; 10] = [101, 102, 103, 104, 105, 106, 107, 108, 109, 110];
pub const SUITE_TARGETS: usize = 2;
pub const SUITE_DISTRACTORS: usize = 8;
pub const SUITE_FRAMES: usize = 40;
pub const SUITE_M: usize = 10;

fn descriptor(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| round3(rng.random_range(-1.0..=1.0))).collect()
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Two salient objects present throughout plus eight barely salient
/// distractors that appear before frame `SUITE_M - 3` and stay for three to
/// five frames. Distractors are not part of the ground truth. Clutter
/// stays below the spawn objectness so the pool holds at most ten IDs.
pub fn salient_plus_distractors(seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 8;
    let mut objects = Vec::new();
    let anchors = [(6.0, 6.0, 0.3, 0.1), (40.0, 28.0, -0.3, -0.1)];
    for (i, &(x, y, vx, vy)) in anchors.iter().enumerate() {
        let mut motion = Motion::linear(
            (x + round3(rng.random_range(-2.0..=2.0)), y + round3(rng.random_range(-2.0..=2.0))),
            (vx, vy),
        );
        if i == 1 {
            motion.amplitude = (0.0, 2.0);
            motion.period = 16.0;
        }
        objects.push(ObjectSpec {
            motion,
            size: (12, 10),
            descriptor_center: descriptor(&mut rng, dim),
            descriptor_sigma: 0.05,
            saliency: 0.9,
            objectness: 0.95,
            visible: vec![(0, SUITE_FRAMES)],
            target: true,
        });
    }
    for _ in 0..SUITE_DISTRACTORS {
        let start = rng.random_range(0..=SUITE_M - 4);
        let len = rng.random_range(3..=5);
        let w = rng.random_range(6..=9);
        let h = rng.random_range(6..=9);
        objects.push(ObjectSpec {
            motion: Motion::linear(
                (
                    f64::from(rng.random_range(0..64 - w)),
                    f64::from(rng.random_range(0..48 - h)),
                ),
                (round3(rng.random_range(-0.5..=0.5)), round3(rng.random_range(-0.5..=0.5))),
            ),
            size: (w, h),
            descriptor_center: descriptor(&mut rng, dim),
            descriptor_sigma: 0.05,
            saliency: round3(rng.random_range(0.05..=0.2)),
            objectness: 0.85,
            visible: vec![(start, start + len)],
            target: false,
        });
    }
    ScenarioSpec {
        frame_count: SUITE_FRAMES,
        frame_size: FrameSize::new(64, 48),
        descriptor_dim: dim,
        objects,
        bbox_jitter: 0.4,
        drop_prob: 0.05,
        clutter_rate: 0.5,
        clutter_objectness: (0.0, 0.6),
        clutter_size: (3, 7),
        seed: seed.wrapping_mul(7919),
    }
}

pub fn committed_suite() -> Vec<ScenarioSpec> {
    SUITE_SEEDS.iter().map(|&s| salient_plus_distractors(s)).collect()
}

/// Tracker settings for the suite: growth horizon [`SUITE_M`], searched weights.
pub fn suite_config<T: Scalar>() -> PipelineConfig<T> {
    PipelineConfig {
        m: SUITE_M,
        ..PipelineConfig::default()
    }
}

/// Small random scenario kept inside the exhaustive solver's limits: at most
/// three detections per frame in the first two frames (so at most six IDs),
/// at most five afterwards, with occasional exact duplicate detections.
pub fn oracle_fixture<T: Scalar>(seed: u64) -> (ScenarioSpec, PipelineConfig<T>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 4;
    let n = rng.random_range(1..=3);
    let objects = (0..n)
        .map(|_| ObjectSpec {
            motion: Motion::linear(
                (f64::from(rng.random_range(0..24)), f64::from(rng.random_range(0..16))),
                (round3(rng.random_range(-2.0..=2.0)), round3(rng.random_range(-2.0..=2.0))),
            ),
            size: (rng.random_range(3..=8), rng.random_range(3..=8)),
            descriptor_center: descriptor(&mut rng, dim),
            descriptor_sigma: round3(rng.random_range(0.0..=0.3)),
            saliency: round3(rng.random_range(0.0..=1.0)),
            objectness: round3(rng.random_range(0.6..=1.0)),
            visible: vec![(0, 5)],
            target: true,
        })
        .collect();
    let spec = ScenarioSpec {
        frame_count: 5,
        frame_size: FrameSize::new(32, 24),
        descriptor_dim: dim,
        objects,
        bbox_jitter: round3(rng.random_range(0.0..=1.5)),
        drop_prob: 0.15,
        clutter_rate: 0.8,
        clutter_objectness: (0.3, 1.0),
        clutter_size: (2, 8),
        seed: seed ^ 0xA5A5,
    };
    let config = PipelineConfig {
        m: 2,
        k: rng.random_range(1..=4),
        tau1: T::lit(round3(rng.random_range(0.3..=0.7))),
        tau2: T::lit(round3(rng.random_range(0.2..=0.5))),
        ..PipelineConfig::default()
    };
    (spec, config)
}

/// Caps per-frame detections for [`oracle_fixture`] scenarios and duplicates
/// one detection in some frames to force exact score ties.
pub fn constrain_oracle_input<T: Scalar>(input: &mut keysel::SequenceInput<T>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for (t, dets) in input.candidates.iter_mut().enumerate() {
        let cap = if t < 2 { 3 } else { 5 };
        if !dets.is_empty() && dets.len() < cap && rng.random_bool(0.3) {
            let d = dets[0].clone();
            dets.push(d);
        }
        dets.truncate(cap);
    }
}

/// Throughput fixture: 100 frames, 16 persistent objects plus clutter for
/// about 20 detections per frame.
pub fn throughput_scenario() -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let dim = 8;
    let objects = (0..16)
        .map(|i| ObjectSpec {
            motion: Motion {
                start: (f64::from(20 + 70 * (i % 4)), f64::from(20 + 50 * (i / 4))),
                velocity: (round3(rng.random_range(-0.4..=0.4)), round3(rng.random_range(-0.4..=0.4))),
                amplitude: (round3(rng.random_range(0.0..=4.0)), 0.0),
                period: 25.0,
            },
            size: (rng.random_range(16..=30), rng.random_range(16..=30)),
            descriptor_center: descriptor(&mut rng, dim),
            descriptor_sigma: 0.05,
            saliency: round3(rng.random_range(0.1..=1.0)),
            objectness: 0.9,
            visible: vec![(0, 100)],
            target: true,
        })
        .collect();
    ScenarioSpec {
        frame_count: 100,
        frame_size: FrameSize::new(320, 240),
        descriptor_dim: dim,
        objects,
        bbox_jitter: 0.8,
        drop_prob: 0.0,
        clutter_rate: 4.0,
        clutter_objectness: (0.0, 0.6),
        clutter_size: (5, 20),
        seed: 99,
    }
}
