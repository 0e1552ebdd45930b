use std::path::Path;

use keysel::datamodel::io::save_sequence;
use keysel::FrameSize;
use keysel_bench::suite::{self, SUITE_DISTRACTORS, SUITE_FRAMES, SUITE_M, SUITE_SEEDS, SUITE_TARGETS};
use keysel_bench::{generate_scenario, ScenarioSpec};

/// Central interval of Poisson(lambda) holding at least `mass`, from the pmf.
fn poisson_interval(lambda: f64, mass: f64) -> (usize, usize) {
    let tail = (1.0 - mass) / 2.0;
    let n = (lambda * 3.0) as usize + 50;
    let mut pmf = Vec::with_capacity(n);
    let mut log_p = -lambda;
    for k in 0..n {
        if k > 0 {
            log_p += lambda.ln() - (k as f64).ln();
        }
        pmf.push(log_p.exp());
    }
    let mut cdf = 0.0;
    let lo = pmf
        .iter()
        .position(|p| {
            cdf += p;
            cdf > tail
        })
        .unwrap();
    let mut cdf = 0.0;
    let hi = pmf
        .iter()
        .position(|p| {
            cdf += p;
            cdf >= 1.0 - tail
        })
        .unwrap();
    (lo, hi)
}

#[test]
fn poisson_interval_helper() {
    // Poisson(1) cdf: 0.368, 0.736, 0.920, 0.981
    assert_eq!(poisson_interval(1.0, 0.5), (0, 2));
    assert_eq!(poisson_interval(1.0, 0.9), (0, 3));
}

#[test]
fn clutter_count_within_poisson_interval() {
    let spec = ScenarioSpec {
        frame_count: 100,
        frame_size: FrameSize::new(64, 48),
        descriptor_dim: 4,
        objects: Vec::new(),
        bbox_jitter: 0.0,
        drop_prob: 0.0,
        clutter_rate: 2.0,
        clutter_objectness: (0.0, 1.0),
        clutter_size: (2, 6),
        seed: 11,
    };
    let (lo, hi) = poisson_interval(200.0, 0.99);
    assert!((160..=170).contains(&lo) && (230..=240).contains(&hi), "{lo}..{hi}");
    let (input, gt) = generate_scenario::<f64>(&spec).unwrap();
    let total: usize = input.candidates.iter().map(Vec::len).sum();
    assert!((lo..=hi).contains(&total), "{total} outside {lo}..={hi}");
    assert!(gt.iter().all(|m| m.is_empty()));
}

fn dir_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn generator_is_byte_deterministic() {
    let spec = suite::salient_plus_distractors(SUITE_SEEDS[0]);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    save_sequence(&generate_scenario::<f64>(&spec).unwrap().0, a.path()).unwrap();
    save_sequence(&generate_scenario::<f64>(&spec).unwrap().0, b.path()).unwrap();
    let (ba, bb) = (dir_bytes(a.path()), dir_bytes(b.path()));
    assert!(ba.len() > 3);
    assert_eq!(ba, bb);
}

fn suites_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/suites"))
}

#[test]
fn committed_suite_files_match_builder() {
    let built = suite::committed_suite();
    assert_eq!(built.len(), SUITE_SEEDS.len());
    for (seed, spec) in SUITE_SEEDS.iter().zip(&built) {
        let path = suites_dir().join(format!("salient_plus_distractors/seed_{seed}.txt"));
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(&ScenarioSpec::parse(&path.display().to_string(), &text).unwrap(), spec);
        assert_eq!(text, spec.to_text());
    }
    let text = std::fs::read_to_string(suites_dir().join("throughput.txt")).unwrap();
    assert_eq!(ScenarioSpec::parse("throughput.txt", &text).unwrap(), suite::throughput_scenario());
}

#[test]
fn committed_suite_shape() {
    for spec in suite::committed_suite() {
        assert_eq!(spec.frame_count, SUITE_FRAMES);
        let targets: Vec<_> = spec.objects.iter().filter(|o| o.target).collect();
        let distractors: Vec<_> = spec.objects.iter().filter(|o| !o.target).collect();
        assert_eq!(targets.len(), SUITE_TARGETS);
        assert_eq!(distractors.len(), SUITE_DISTRACTORS);
        for t in targets {
            assert!((0..SUITE_FRAMES).all(|f| t.visible_at(f)));
        }
        for d in distractors {
            assert!(d.saliency < 0.5);
            let (start, end) = d.visible[0];
            assert_eq!(d.visible.len(), 1);
            assert!(start <= SUITE_M - 4 && (3..=5).contains(&(end - start)));
        }
    }
}
