//! Seeded synthetic sequences of moving rectangles with exact ground truth.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use keysel::datamodel::BoundingBox;
use keysel::kv::KeyValues;
use keysel::{
    CandidateProposal, CandidateSource, Error, FrameSize, InstanceId, LabelMap, Result, RleMask,
    SaliencyMap, Scalar, SequenceInput,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

/// Top-left corner over time: `start + velocity * t + amplitude * sin(2 pi t / period)`.
/// Zero amplitude gives linear motion.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub start: (f64, f64),
    pub velocity: (f64, f64),
    pub amplitude: (f64, f64),
    pub period: f64,
}

impl Motion {
    pub fn linear(start: (f64, f64), velocity: (f64, f64)) -> Self {
        Self {
            start,
            velocity,
            amplitude: (0.0, 0.0),
            period: 1.0,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.amplitude == (0.0, 0.0)
    }

    pub fn position(&self, t: usize) -> (f64, f64) {
        let t = t as f64;
        let phase = (TAU * t / self.period).sin();
        (
            self.start.0 + self.velocity.0 * t + self.amplitude.0 * phase,
            self.start.1 + self.velocity.1 * t + self.amplitude.1 * phase,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub motion: Motion,
    pub size: (u32, u32),
    pub descriptor_center: Vec<f64>,
    pub descriptor_sigma: f64,
    /// Saliency value painted inside the object's true mask.
    pub saliency: f64,
    /// Objectness reported for the object's detections.
    pub objectness: f64,
    /// Half-open frame ranges `[start, end)` during which the object exists.
    pub visible: Vec<(usize, usize)>,
    /// Whether the object is part of the ground truth.
    pub target: bool,
}

impl ObjectSpec {
    pub fn visible_at(&self, t: usize) -> bool {
        self.visible.iter().any(|&(a, b)| a <= t && t < b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub frame_count: usize,
    pub frame_size: FrameSize,
    pub descriptor_dim: usize,
    pub objects: Vec<ObjectSpec>,
    /// Standard deviation of the per-coordinate detection box jitter, pixels.
    pub bbox_jitter: f64,
    pub drop_prob: f64,
    /// Mean number of clutter detections per frame.
    pub clutter_rate: f64,
    pub clutter_objectness: (f64, f64),
    pub clutter_size: (u32, u32),
    pub seed: u64,
}

fn spec_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frame_count == 0 {
            return Err(spec_err("frame_count must be positive"));
        }
        if self.frame_size.width == 0 || self.frame_size.height == 0 {
            return Err(spec_err("frame size must be non-zero"));
        }
        if self.descriptor_dim == 0 {
            return Err(spec_err("descriptor_dim must be positive"));
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(self.bbox_jitter >= 0.0 && self.bbox_jitter.is_finite()) {
            return Err(spec_err("bbox_jitter must be non-negative"));
        }
        if !unit(self.drop_prob) {
            return Err(spec_err("drop_prob must lie in [0, 1]"));
        }
        if !(self.clutter_rate >= 0.0 && self.clutter_rate.is_finite()) {
            return Err(spec_err("clutter_rate must be non-negative"));
        }
        let (lo, hi) = self.clutter_objectness;
        if !(unit(lo) && unit(hi) && lo <= hi) {
            return Err(spec_err("clutter objectness range must be ordered within [0, 1]"));
        }
        let (smin, smax) = self.clutter_size;
        if smin == 0 || smin > smax {
            return Err(spec_err("clutter size range must be ordered and positive"));
        }
        for (i, o) in self.objects.iter().enumerate() {
            let bad = |what: &str| spec_err(format!("object {i}: {what}"));
            if o.size.0 == 0 || o.size.1 == 0 {
                return Err(bad("size must be positive"));
            }
            if o.descriptor_center.len() != self.descriptor_dim {
                return Err(bad("descriptor length differs from descriptor_dim"));
            }
            if !(o.descriptor_sigma >= 0.0 && o.descriptor_sigma.is_finite()) {
                return Err(bad("descriptor_sigma must be non-negative"));
            }
            if !unit(o.saliency) || !unit(o.objectness) {
                return Err(bad("saliency and objectness must lie in [0, 1]"));
            }
            if o.motion.period.is_nan() || o.motion.period <= 0.0 {
                return Err(bad("period must be positive"));
            }
            if o.visible.iter().any(|&(a, b)| a > b) {
                return Err(bad("visibility windows must be ordered"));
            }
        }
        Ok(())
    }

    pub fn parse(file: &str, text: &str) -> Result<Self> {
        let kv = KeyValues::parse(file, text)?;
        let mut count = 0usize;
        for k in kv.keys() {
            if let Some(rest) = k.strip_prefix("object.") {
                let idx: usize = rest
                    .split('.')
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| spec_err(format!("bad object key `{k}`")))?;
                count = count.max(idx + 1);
            }
        }
        kv.reject_unknown(|k| match k.strip_prefix("object.") {
            Some(rest) => rest
                .split_once('.')
                .is_some_and(|(_, field)| OBJECT_KEYS.contains(&field)),
            None => SCENE_KEYS.contains(&k),
        })?;
        let need = |key: &str| -> Result<String> {
            kv.raw(key)
                .map(str::to_string)
                .ok_or_else(|| spec_err(format!("missing key `{key}`")))
        };
        let mut spec = ScenarioSpec {
            frame_count: need("frame_count")?.parse().map_err(|_| spec_err("bad frame_count"))?,
            frame_size: FrameSize::new(
                need("width")?.parse().map_err(|_| spec_err("bad width"))?,
                need("height")?.parse().map_err(|_| spec_err("bad height"))?,
            ),
            descriptor_dim: need("descriptor_dim")?
                .parse()
                .map_err(|_| spec_err("bad descriptor_dim"))?,
            objects: Vec::with_capacity(count),
            bbox_jitter: 0.0,
            drop_prob: 0.0,
            clutter_rate: 0.0,
            clutter_objectness: (0.0, 0.5),
            clutter_size: (3, 8),
            seed: 0,
        };
        kv.read("bbox_jitter", &mut spec.bbox_jitter)?;
        kv.read("drop_prob", &mut spec.drop_prob)?;
        kv.read("clutter_rate", &mut spec.clutter_rate)?;
        kv.read("clutter_objectness_min", &mut spec.clutter_objectness.0)?;
        kv.read("clutter_objectness_max", &mut spec.clutter_objectness.1)?;
        kv.read("clutter_size_min", &mut spec.clutter_size.0)?;
        kv.read("clutter_size_max", &mut spec.clutter_size.1)?;
        kv.read("seed", &mut spec.seed)?;
        for i in 0..count {
            let key = |f: &str| format!("object.{i}.{f}");
            let num = |f: &str, default: f64| -> Result<f64> { Ok(kv.get(&key(f))?.unwrap_or(default)) };
            let width: u32 = kv.get(&key("width"))?.ok_or_else(|| spec_err(format!("missing {}", key("width"))))?;
            let height: u32 = kv.get(&key("height"))?.ok_or_else(|| spec_err(format!("missing {}", key("height"))))?;
            let descriptor_center = match kv.raw(&key("descriptor")) {
                Some(s) => parse_list(s).map_err(|e| spec_err(format!("{}: {e}", key("descriptor"))))?,
                None => vec![0.0; spec.descriptor_dim],
            };
            let visible = match kv.raw(&key("visible")) {
                Some(s) => parse_windows(s).map_err(|e| spec_err(format!("{}: {e}", key("visible"))))?,
                None => vec![(0, spec.frame_count)],
            };
            let target = match kv.raw(&key("target")) {
                None | Some("true") => true,
                Some("false") => false,
                Some(other) => return Err(spec_err(format!("{}: expected true or false, got `{other}`", key("target")))),
            };
            spec.objects.push(ObjectSpec {
                motion: Motion {
                    start: (num("x", 0.0)?, num("y", 0.0)?),
                    velocity: (num("vx", 0.0)?, num("vy", 0.0)?),
                    amplitude: (num("amplitude_x", 0.0)?, num("amplitude_y", 0.0)?),
                    period: num("period", 1.0)?,
                },
                size: (width, height),
                descriptor_center,
                descriptor_sigma: num("descriptor_sigma", 0.0)?,
                saliency: num("saliency", 1.0)?,
                objectness: num("objectness", 1.0)?,
                visible,
                target,
            });
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("frame_count", self.frame_count.to_string());
        put("width", self.frame_size.width.to_string());
        put("height", self.frame_size.height.to_string());
        put("descriptor_dim", self.descriptor_dim.to_string());
        put("seed", self.seed.to_string());
        put("bbox_jitter", self.bbox_jitter.to_string());
        put("drop_prob", self.drop_prob.to_string());
        put("clutter_rate", self.clutter_rate.to_string());
        put("clutter_objectness_min", self.clutter_objectness.0.to_string());
        put("clutter_objectness_max", self.clutter_objectness.1.to_string());
        put("clutter_size_min", self.clutter_size.0.to_string());
        put("clutter_size_max", self.clutter_size.1.to_string());
        for (i, o) in self.objects.iter().enumerate() {
            let k = |f: &str| format!("object.{i}.{f}");
            put(&k("x"), o.motion.start.0.to_string());
            put(&k("y"), o.motion.start.1.to_string());
            put(&k("vx"), o.motion.velocity.0.to_string());
            put(&k("vy"), o.motion.velocity.1.to_string());
            put(&k("amplitude_x"), o.motion.amplitude.0.to_string());
            put(&k("amplitude_y"), o.motion.amplitude.1.to_string());
            put(&k("period"), o.motion.period.to_string());
            put(&k("width"), o.size.0.to_string());
            put(&k("height"), o.size.1.to_string());
            put(&k("descriptor"), join(&o.descriptor_center));
            put(&k("descriptor_sigma"), o.descriptor_sigma.to_string());
            put(&k("saliency"), o.saliency.to_string());
            put(&k("objectness"), o.objectness.to_string());
            let windows: Vec<String> = o.visible.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            put(&k("visible"), windows.join(","));
            put(&k("target"), o.target.to_string());
        }
        s
    }
}

const SCENE_KEYS: &[&str] = &[
    "frame_count",
    "width",
    "height",
    "descriptor_dim",
    "seed",
    "bbox_jitter",
    "drop_prob",
    "clutter_rate",
    "clutter_objectness_min",
    "clutter_objectness_max",
    "clutter_size_min",
    "clutter_size_max",
];

const OBJECT_KEYS: &[&str] = &[
    "x",
    "y",
    "vx",
    "vy",
    "amplitude_x",
    "amplitude_y",
    "period",
    "width",
    "height",
    "descriptor",
    "descriptor_sigma",
    "saliency",
    "objectness",
    "visible",
    "target",
];

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_windows(s: &str) -> std::result::Result<Vec<(usize, usize)>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|w| {
            let (a, b) = w.trim().split_once('-').ok_or("expected start-end")?;
            let a = a.parse::<usize>().map_err(|e| e.to_string())?;
            let b = b.parse::<usize>().map_err(|e| e.to_string())?;
            Ok((a, b))
        })
        .collect()
}

fn cast<T: Scalar>(v: f64) -> T {
    T::lit(v)
}

fn candidate<T: Scalar>(frame: usize, mask: RleMask, objectness: f64, descriptor: Vec<f64>) -> Option<CandidateProposal<T>> {
    let bbox = BoundingBox::from_mask(&mask)?;
    Some(CandidateProposal {
        frame_index: frame,
        bbox,
        mask,
        objectness: cast(objectness),
        descriptor: descriptor.into_iter().map(cast).collect(),
        source: CandidateSource::Detector,
    })
}

/// Renders the scenario. Returns the tracker input (carrying the ground truth)
/// and the ground-truth label maps.
///
/// Ground-truth IDs are object index + 1 and cover target objects only. Where
/// objects overlap, the lower-indexed one is in front. Detections are the
/// jittered full rectangles, followed by clutter boxes with uniform random
/// descriptors in `[-1, 1]`.
pub fn generate_scenario<T: Scalar>(spec: &ScenarioSpec) -> Result<(SequenceInput<T>, Vec<LabelMap>)> {
    spec.validate()?;
    let size = spec.frame_size;
    let (w, h) = (size.width, size.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let clutter = if spec.clutter_rate > 0.0 {
        Some(Poisson::new(spec.clutter_rate).map_err(|e| spec_err(e.to_string()))?)
    } else {
        None
    };

    let mut candidates = Vec::with_capacity(spec.frame_count);
    let mut saliency = Vec::with_capacity(spec.frame_count);
    let mut ground_truth = Vec::with_capacity(spec.frame_count);
    for t in 0..spec.frame_count {
        let mut dets = Vec::new();
        let mut sal = vec![0.0f64; size.pixels()];
        let mut gt = LabelMap::new(size);
        let mut covered = RleMask::empty(w, h);
        for (i, o) in spec.objects.iter().enumerate() {
            if !o.visible_at(t) {
                continue;
            }
            let (x, y) = o.motion.position(t);
            let (xr, yr) = (x.round() as i64, y.round() as i64);
            let truth = RleMask::rectangle(w, h, xr, yr, o.size.0, o.size.1);
            if truth.is_empty() {
                continue;
            }
            for (row, col, len) in truth.row_segments() {
                let base = (row * w) as usize;
                for v in &mut sal[base + col as usize..base + (col + len) as usize] {
                    *v = v.max(o.saliency);
                }
            }
            if o.target {
                let visible = truth.difference(&covered)?;
                if !visible.is_empty() {
                    gt.insert(InstanceId(i as u32 + 1), visible)?;
                }
            }
            covered = covered.union(&truth)?;

            if rng.random::<f64>() < spec.drop_prob {
                continue;
            }
            let mut jitter = || spec.bbox_jitter * unit.sample(&mut rng);
            let jx = (x + jitter()).round() as i64;
            let jy = (y + jitter()).round() as i64;
            let jw = (f64::from(o.size.0) + jitter()).round().max(1.0) as u32;
            let jh = (f64::from(o.size.1) + jitter()).round().max(1.0) as u32;
            let descriptor: Vec<f64> = o
                .descriptor_center
                .iter()
                .map(|c| c + o.descriptor_sigma * unit.sample(&mut rng))
                .collect();
            let mask = RleMask::rectangle(w, h, jx, jy, jw, jh);
            dets.extend(candidate(t, mask, o.objectness, descriptor));
        }
        let n_clutter = clutter.map_or(0, |p| p.sample(&mut rng) as usize);
        for _ in 0..n_clutter {
            let (smin, smax) = spec.clutter_size;
            let cw = rng.random_range(smin..=smax);
            let ch = rng.random_range(smin..=smax);
            let cx = rng.random_range(0..w.saturating_sub(cw).max(1)) as i64;
            let cy = rng.random_range(0..h.saturating_sub(ch).max(1)) as i64;
            let (lo, hi) = spec.clutter_objectness;
            let objectness = rng.random_range(lo..=hi);
            let descriptor = (0..spec.descriptor_dim)
                .map(|_| rng.random_range(-1.0..=1.0))
                .collect();
            let mask = RleMask::rectangle(w, h, cx, cy, cw, ch);
            dets.extend(candidate(t, mask, objectness, descriptor));
        }
        candidates.push(dets);
        saliency.push(SaliencyMap::new(w, h, sal.into_iter().map(cast).collect())?);
        ground_truth.push(gt);
    }
    let input = SequenceInput {
        frame_size: size,
        descriptor_dim: spec.descriptor_dim,
        candidates,
        saliency,
        ground_truth: Some(ground_truth.clone()),
    };
    Ok((input, ground_truth))
}
