//! One-off key-instance selection at the end of the growth horizon.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datamodel::InstanceId;
use crate::error::{Error, Result};
use crate::pool::{ObjectPool, TrackedInstance};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionWeights<T> {
    pub saliency: T,
    pub frequency: T,
}

impl<T: Scalar> SelectionWeights<T> {
    pub fn searched() -> Self {
        Self {
            saliency: T::lit(0.5),
            frequency: T::lit(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |w: T| w >= T::zero() && w.is_finite();
        if !ok(self.saliency) || !ok(self.frequency) {
            return Err(Error::Config("w_sal and w_freq must be non-negative".into()));
        }
        if self.saliency == T::zero() && self.frequency == T::zero() {
            return Err(Error::Config("w_sal and w_freq cannot both be zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMode {
    #[default]
    Key,
    /// Uniform random K-subset, the comparison baseline.
    Random { seed: u64 },
}

/// Mean per-appearance saliency inside the instance's masks.
pub fn saliency_score<T: Scalar>(instance: &TrackedInstance<T>) -> T {
    let f = instance.frequency();
    if f == 0 {
        return T::zero();
    }
    (instance.saliency_sum() / T::from_usize_lossy(f)).unit_clamp()
}

/// Fraction of the first `horizon` frames in which the instance appeared.
pub fn frequency_score<T: Scalar>(instance: &TrackedInstance<T>, horizon: usize) -> T {
    (T::from_usize_lossy(instance.frequency()) / T::from_usize_lossy(horizon.max(1))).unit_clamp()
}

pub fn selection_score<T: Scalar>(
    instance: &TrackedInstance<T>,
    weights: &SelectionWeights<T>,
    horizon: usize,
) -> T {
    weights.saliency * saliency_score(instance) + weights.frequency * frequency_score(instance, horizon)
}

/// IDs of the `k` best-scoring instances; ties go to the lower ID.
pub fn rank_key_instances<T: Scalar>(
    pool: &ObjectPool<T>,
    k: usize,
    weights: &SelectionWeights<T>,
    horizon: usize,
) -> BTreeSet<InstanceId> {
    let mut scored: Vec<(T, InstanceId)> = pool
        .instances()
        .iter()
        .map(|i| (selection_score(i, weights, horizon), i.id()))
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("selection scores are finite")
            .then(a.1.cmp(&b.1))
    });
    scored.into_iter().take(k).map(|(_, id)| id).collect()
}

/// Prunes the pool to its `k` key instances and locks it.
pub fn select_key_instances<T: Scalar>(
    pool: &mut ObjectPool<T>,
    k: usize,
    weights: &SelectionWeights<T>,
    horizon: usize,
) -> BTreeSet<InstanceId> {
    let keep = rank_key_instances(pool, k, weights, horizon);
    pool.retain_and_lock(&keep);
    keep
}

/// Prunes the pool to a uniformly random `k`-subset and locks it.
pub fn random_select_instances<T: Scalar>(pool: &mut ObjectPool<T>, k: usize, seed: u64) -> BTreeSet<InstanceId> {
    let ids = pool.ids();
    let keep: BTreeSet<InstanceId> = if ids.len() <= k {
        ids.into_iter().collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample(&mut rng, ids.len(), k).into_iter().map(|i| ids[i]).collect()
    };
    pool.retain_and_lock(&keep);
    keep
}

pub fn select<T: Scalar>(
    pool: &mut ObjectPool<T>,
    mode: SelectionMode,
    k: usize,
    weights: &SelectionWeights<T>,
    horizon: usize,
) -> BTreeSet<InstanceId> {
    match mode {
        SelectionMode::Key => select_key_instances(pool, k, weights, horizon),
        SelectionMode::Random { seed } => random_select_instances(pool, k, seed),
    }
}
