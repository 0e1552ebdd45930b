//! Seeded uniform random search over association and selection weights.

use std::fmt::Write as _;

use keysel::kv::KeyValues;
use keysel::{Error, PipelineConfig, Result, Scalar, SequenceInput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::experiment::mean_score;

/// Names of the searched parameters, in sampling order.
pub const PARAMS: [&str; 8] = ["w_iou", "w_traj", "w_reid", "w_rel", "tau1", "tau2", "w_sal", "w_freq"];

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    /// Inclusive `(low, high)` per entry of [`PARAMS`].
    pub ranges: [(f64, f64); 8],
    pub trials: usize,
    pub seed: u64,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            ranges: [
                (0.0, 1.0),
                (0.0, 1.0),
                (0.0, 1.0),
                (0.0, 0.1),
                (0.3, 0.8),
                (0.2, 0.6),
                (0.0, 1.0),
                (0.0, 1.0),
            ],
            trials: 50,
            seed: 0,
        }
    }
}

impl SearchSpace {
    /// Space containing exactly one configuration.
    pub fn point(values: [f64; 8]) -> Self {
        Self {
            ranges: values.map(|v| (v, v)),
            trials: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in PARAMS.iter().zip(self.ranges) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!("{name}: range [{lo}, {hi}] is not ordered")));
            }
            if name.starts_with("w_") && lo < 0.0 {
                return Err(Error::Config(format!("{name}: weights cannot be negative")));
            }
        }
        if self.ranges[6].1 == 0.0 && self.ranges[7].1 == 0.0 {
            return Err(Error::Config("w_sal and w_freq cannot both be fixed at zero".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses `name = low, high` lines plus optional `trials` and `seed`.
    /// A single value fixes the parameter.
    pub fn parse(file: &str, text: &str) -> Result<Self> {
        let kv = KeyValues::parse(file, text)?;
        kv.reject_unknown(|k| PARAMS.contains(&k) || k == "trials" || k == "seed")?;
        let mut space = Self::default();
        for (i, name) in PARAMS.iter().enumerate() {
            if let Some(raw) = kv.raw(name) {
                let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
                let num = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Config(format!("{name}: {e}")))
                };
                space.ranges[i] = match parts.as_slice() {
                    [v] => (num(v)?, num(v)?),
                    [lo, hi] => (num(lo)?, num(hi)?),
                    _ => return Err(Error::Config(format!("{name}: expected `low, high`"))),
                };
            }
        }
        kv.read("trials", &mut space.trials)?;
        kv.read("seed", &mut space.seed)?;
        space.validate()?;
        Ok(space)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, (lo, hi)) in PARAMS.iter().zip(self.ranges) {
            let _ = writeln!(s, "{name} = {lo}, {hi}");
        }
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    /// Draws every trial's parameters up front so the draw sequence does not
    /// depend on evaluation order.
    pub fn sample(&self) -> Vec<[f64; 8]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.trials)
            .map(|_| self.ranges.map(|(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) }))
            .collect()
    }
}

/// Applies sampled values for [`PARAMS`] on top of `base`.
pub fn apply_params<T: Scalar>(base: &PipelineConfig<T>, values: &[f64; 8]) -> PipelineConfig<T> {
    let v = values.map(T::lit);
    PipelineConfig {
        w_iou: v[0],
        w_traj: v[1],
        w_reid: v[2],
        w_rel: v[3],
        tau1: v[4],
        tau2: v[5],
        w_sal: v[6],
        w_freq: v[7],
        ..base.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial<T> {
    pub index: usize,
    pub params: [f64; 8],
    pub score: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome<T> {
    pub best: PipelineConfig<T>,
    pub best_index: usize,
    pub best_score: T,
    /// Every trial, ordered by index.
    pub trials: Vec<Trial<T>>,
}

impl<T: Scalar> SearchOutcome<T> {
    /// Whitespace-separated trial log with a header line.
    pub fn log_text(&self) -> String {
        let mut s = format!("trial {} global_mean\n", PARAMS.join(" "));
        for t in &self.trials {
            let _ = write!(s, "{}", t.index);
            for p in t.params {
                let _ = write!(s, " {p}");
            }
            let _ = writeln!(s, " {}", t.score);
        }
        s
    }
}

/// Evaluates `space.trials` uniformly sampled configurations on `scenarios`
/// and returns the best by mean global mean (earliest trial on ties).
pub fn search_hyperparams<T: Scalar>(
    space: &SearchSpace,
    scenarios: &[SequenceInput<T>],
    base: &PipelineConfig<T>,
) -> Result<SearchOutcome<T>> {
    space.validate()?;
    if scenarios.is_empty() {
        return Err(Error::Invalid("search needs at least one scenario".into()));
    }
    let samples = space.sample();
    let trials = samples
        .par_iter()
        .enumerate()
        .map(|(index, params)| {
            let cfg = apply_params(base, params);
            Ok(Trial {
                index,
                params: *params,
                score: mean_score(scenarios, &cfg)?,
            })
        })
        .collect::<Result<Vec<Trial<T>>>>()?;
    let best = trials
        .iter()
        .fold(&trials[0], |b, t| if t.score > b.score { t } else { b });
    Ok(SearchOutcome {
        best: apply_params(base, &best.params),
        best_index: best.index,
        best_score: best.score,
        trials,
    })
}
