use std::fmt::Write as _;
use std::str::FromStr;

use crate::datamodel::FrameSize;
use crate::error::{Error, Result};
use crate::kv::KeyValues;
use crate::metrics::default_boundary_tolerance;
use crate::pool::PoolConfig;
use crate::scalar::Scalar;
use crate::scoring::{ScoreWeights, TrajectoryMetric};
use crate::selection::{SelectionMode, SelectionWeights};

/// Which mask propagator produces the per-instance propagated candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagatorKind {
    /// Shift the last mask by the predicted motion.
    #[default]
    Motion,
    None,
    /// Read true masks from the sequence's ground truth (testing only).
    GroundTruth,
}

impl FromStr for PropagatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "motion" => Ok(Self::Motion),
            "none" => Ok(Self::None),
            "groundtruth" => Ok(Self::GroundTruth),
            other => Err(Error::Config(format!("unknown propagator `{other}`"))),
        }
    }
}

impl std::fmt::Display for PropagatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Motion => "motion",
            Self::None => "none",
            Self::GroundTruth => "groundtruth",
        })
    }
}

/// Every tunable of a tracking run.
///
/// Stored as a flat `key = value` file. Recognised keys are listed in
/// [`PipelineConfig::KEYS`]; anything else is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<T> {
    pub w_iou: T,
    pub w_traj: T,
    pub w_reid: T,
    pub w_rel: T,
    /// `None` means half the frame diagonal.
    pub alpha_traj: Option<T>,
    pub alpha_reid: T,
    pub traj_metric: TrajectoryMetric,
    pub tau1: T,
    pub tau2: T,
    pub m: usize,
    pub k: usize,
    pub spawn_objectness_min: T,
    pub spawn_overlap_max: T,
    pub propagated_objectness: T,
    pub w_sal: T,
    pub w_freq: T,
    pub selection_mode: SelectionMode,
    /// `None` means `ceil(0.008 * diagonal)`.
    pub boundary_tolerance: Option<T>,
    pub propagator: PropagatorKind,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        let w = ScoreWeights::<T>::searched(T::one(), T::one());
        let sel = SelectionWeights::<T>::searched();
        Self {
            w_iou: w.iou,
            w_traj: w.traj,
            w_reid: w.reid,
            w_rel: w.rel,
            alpha_traj: None,
            alpha_reid: T::one(),
            traj_metric: TrajectoryMetric::Euclidean,
            tau1: T::lit(0.55),
            tau2: T::lit(0.35),
            m: 10,
            k: 20,
            spawn_objectness_min: T::lit(0.7),
            spawn_overlap_max: T::lit(0.2),
            propagated_objectness: T::lit(0.5),
            w_sal: sel.saliency,
            w_freq: sel.frequency,
            selection_mode: SelectionMode::Key,
            boundary_tolerance: None,
            propagator: PropagatorKind::Motion,
        }
    }
}

impl<T: Scalar> PipelineConfig<T> {
    pub const KEYS: &'static [&'static str] = &[
        "w_iou",
        "w_traj",
        "w_reid",
        "w_rel",
        "alpha_traj",
        "alpha_reid",
        "traj_metric",
        "tau1",
        "tau2",
        "m",
        "k",
        "spawn_objectness_min",
        "spawn_overlap_max",
        "propagated_objectness",
        "w_sal",
        "w_freq",
        "selection_mode",
        "selection_seed",
        "boundary_tolerance",
        "propagator",
    ];

    pub fn parse(file: &str, text: &str) -> Result<Self> {
        let kv = KeyValues::parse(file, text)?;
        kv.reject_unknown(|k| Self::KEYS.contains(&k))?;
        let mut c = Self::default();
        kv.read("w_iou", &mut c.w_iou)?;
        kv.read("w_traj", &mut c.w_traj)?;
        kv.read("w_reid", &mut c.w_reid)?;
        kv.read("w_rel", &mut c.w_rel)?;
        c.alpha_traj = optional(&kv, "alpha_traj")?;
        kv.read("alpha_reid", &mut c.alpha_reid)?;
        if let Some(s) = kv.raw("traj_metric") {
            c.traj_metric = s.parse()?;
        }
        kv.read("tau1", &mut c.tau1)?;
        kv.read("tau2", &mut c.tau2)?;
        kv.read("m", &mut c.m)?;
        kv.read("k", &mut c.k)?;
        kv.read("spawn_objectness_min", &mut c.spawn_objectness_min)?;
        kv.read("spawn_overlap_max", &mut c.spawn_overlap_max)?;
        kv.read("propagated_objectness", &mut c.propagated_objectness)?;
        kv.read("w_sal", &mut c.w_sal)?;
        kv.read("w_freq", &mut c.w_freq)?;
        let seed: Option<u64> = kv.get("selection_seed")?;
        c.selection_mode = match kv.raw("selection_mode").unwrap_or("key") {
            "key" => SelectionMode::Key,
            "random" => SelectionMode::Random {
                seed: seed.unwrap_or(0),
            },
            other => return Err(Error::Config(format!("unknown selection_mode `{other}`"))),
        };
        c.boundary_tolerance = optional(&kv, "boundary_tolerance")?;
        if let Some(s) = kv.raw("propagator") {
            c.propagator = s.parse()?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Canonical text form; `parse(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let auto = |v: Option<T>| v.map_or_else(|| "auto".to_string(), |v| v.to_string());
        let (mode, seed) = match self.selection_mode {
            SelectionMode::Key => ("key", 0),
            SelectionMode::Random { seed } => ("random", seed),
        };
        for (k, v) in [
            ("w_iou", self.w_iou.to_string()),
            ("w_traj", self.w_traj.to_string()),
            ("w_reid", self.w_reid.to_string()),
            ("w_rel", self.w_rel.to_string()),
            ("alpha_traj", auto(self.alpha_traj)),
            ("alpha_reid", self.alpha_reid.to_string()),
            ("traj_metric", self.traj_metric.to_string()),
            ("tau1", self.tau1.to_string()),
            ("tau2", self.tau2.to_string()),
            ("m", self.m.to_string()),
            ("k", self.k.to_string()),
            ("spawn_objectness_min", self.spawn_objectness_min.to_string()),
            ("spawn_overlap_max", self.spawn_overlap_max.to_string()),
            ("propagated_objectness", self.propagated_objectness.to_string()),
            ("w_sal", self.w_sal.to_string()),
            ("w_freq", self.w_freq.to_string()),
            ("selection_mode", mode.to_string()),
            ("selection_seed", seed.to_string()),
            ("boundary_tolerance", auto(self.boundary_tolerance)),
            ("propagator", self.propagator.to_string()),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.pool_config(FrameSize::new(1, 1)).validate()?;
        self.selection_weights().validate()?;
        if let Some(t) = self.boundary_tolerance {
            if t.is_nan() || t < T::zero() {
                return Err(Error::Config(format!("boundary_tolerance must be non-negative, got {t}")));
            }
        }
        Ok(())
    }

    pub fn score_weights(&self, frame: FrameSize) -> ScoreWeights<T> {
        ScoreWeights {
            iou: self.w_iou,
            traj: self.w_traj,
            reid: self.w_reid,
            rel: self.w_rel,
            alpha_traj: self
                .alpha_traj
                .unwrap_or_else(|| T::lit(0.5) * frame.diagonal::<T>()),
            alpha_reid: self.alpha_reid,
        }
    }

    pub fn pool_config(&self, frame: FrameSize) -> PoolConfig<T> {
        PoolConfig {
            tau_growing: self.tau1,
            tau_locked: self.tau2,
            growth_horizon: self.m,
            max_instances: self.k,
            spawn_objectness_min: self.spawn_objectness_min,
            spawn_overlap_max: self.spawn_overlap_max,
            propagated_objectness: self.propagated_objectness,
            weights: self.score_weights(frame),
            traj_metric: self.traj_metric,
        }
    }

    pub fn selection_weights(&self) -> SelectionWeights<T> {
        SelectionWeights {
            saliency: self.w_sal,
            frequency: self.w_freq,
        }
    }

    pub fn tolerance(&self, frame: FrameSize) -> T {
        self.boundary_tolerance
            .unwrap_or_else(|| default_boundary_tolerance(frame))
    }
}

fn optional<T: Scalar>(kv: &KeyValues, key: &str) -> Result<Option<T>> {
    match kv.raw(key) {
        None | Some("auto") => Ok(None),
        Some(_) => kv.get(key),
    }
}
