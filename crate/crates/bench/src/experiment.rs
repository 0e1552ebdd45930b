//! Key versus random instance selection across pool budgets.

use std::fmt::Write as _;

use keysel::{evaluate, run_sequence, Error, PipelineConfig, Result, Scalar, SelectionMode, SequenceInput};
use rayon::prelude::*;

/// Global mean J&F of one tracking run against the input's ground truth.
pub fn score_run<T: Scalar>(input: &SequenceInput<T>, config: &PipelineConfig<T>) -> Result<T> {
    let gt = input
        .ground_truth
        .as_deref()
        .ok_or_else(|| Error::Invalid("scenario has no ground truth".into()))?;
    let result = run_sequence(input, config)?;
    Ok(evaluate(&result.labels, gt, config.tolerance(input.frame_size))?.global_mean)
}

/// Mean score over several scenarios.
pub fn mean_score<T: Scalar>(scenarios: &[SequenceInput<T>], config: &PipelineConfig<T>) -> Result<T> {
    let scores = scenarios
        .par_iter()
        .map(|s| score_run(s, config))
        .collect::<Result<Vec<T>>>()?;
    Ok(scores.iter().copied().sum::<T>() / T::from_usize_lossy(scores.len().max(1)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRow<T> {
    pub k: usize,
    /// Suite-mean global mean with key selection.
    pub key: T,
    /// Suite-mean global mean with random selection, averaged over seeds.
    pub random: T,
    /// Per-seed suite means for random selection.
    pub random_per_seed: Vec<T>,
}

impl<T: Scalar> SelectionRow<T> {
    pub fn gap(&self) -> T {
        self.key - self.random
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTable<T> {
    pub rows: Vec<SelectionRow<T>>,
}

impl<T: Scalar> SelectionTable<T> {
    /// One column per K, rows for key selection, random selection and the gap.
    pub fn to_text(&self) -> String {
        let mut s = format!("{:<8}", "K");
        for r in &self.rows {
            let _ = write!(s, " {:>8}", r.k);
        }
        s.push('\n');
        for (label, f) in [
            ("key", (|r: &SelectionRow<T>| r.key) as fn(&SelectionRow<T>) -> T),
            ("random", |r| r.random),
            ("gap", |r| r.gap()),
        ] {
            let _ = write!(s, "{label:<8}");
            for r in &self.rows {
                let _ = write!(s, " {:>8.4}", f(r).to_f64().unwrap_or(f64::NAN));
            }
            s.push('\n');
        }
        s
    }
}

/// For each K, runs every scenario once with key selection and once per seed
/// with random selection.
pub fn selection_experiment<T: Scalar>(
    scenarios: &[SequenceInput<T>],
    k_values: &[usize],
    seeds: &[u64],
    base: &PipelineConfig<T>,
) -> Result<SelectionTable<T>> {
    let mut rows = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let key_cfg = PipelineConfig {
            k,
            selection_mode: SelectionMode::Key,
            ..base.clone()
        };
        let key = mean_score(scenarios, &key_cfg)?;
        let random_per_seed = seeds
            .par_iter()
            .map(|&seed| {
                let cfg = PipelineConfig {
                    k,
                    selection_mode: SelectionMode::Random { seed },
                    ..base.clone()
                };
                mean_score(scenarios, &cfg)
            })
            .collect::<Result<Vec<T>>>()?;
        let random = random_per_seed.iter().copied().sum::<T>() / T::from_usize_lossy(seeds.len().max(1));
        rows.push(SelectionRow {
            k,
            key,
            random,
            random_per_seed,
        });
    }
    Ok(SelectionTable { rows })
}
