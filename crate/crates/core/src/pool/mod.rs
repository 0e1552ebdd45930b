//! The object pool: tracked instances and their spawn/update/prune lifecycle.

mod assign;
mod propagate;

pub use assign::{assign_ids, associate, AssignmentSet, AssignmentSolver, GreedyAssignment};
pub use propagate::{GroundTruthPropagator, MaskPropagator, MotionPropagator, NoPropagation};

use std::collections::BTreeSet;

use crate::datamodel::{
    mask_iou, mask_mean_saliency, BoxVector, CandidateProposal, CandidateSource, InstanceId,
    RleMask, SaliencyMap,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scoring::{ScoreWeights, TrajectoryMetric};

/// A persistent object identity.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedInstance<T> {
    id: InstanceId,
    descriptor_pool: Vec<Vec<T>>,
    bbox_history: Vec<(usize, BoxVector<T>)>,
    last_mask: RleMask,
    frequency: usize,
    saliency_sum: T,
    created_at: usize,
}

impl<T: Scalar> TrackedInstance<T> {
    /// New instance seeded from a candidate, with one appearance on record.
    pub fn spawn(
        id: InstanceId,
        frame: usize,
        candidate: &CandidateProposal<T>,
        saliency: &SaliencyMap<T>,
    ) -> Result<Self> {
        let saliency_sum = mask_mean_saliency(&candidate.mask, saliency)?;
        Ok(Self {
            id,
            descriptor_pool: vec![candidate.descriptor.clone()],
            bbox_history: vec![(frame, candidate.bbox.to_vector())],
            last_mask: candidate.mask.clone(),
            frequency: 1,
            saliency_sum,
            created_at: frame,
        })
    }

    /// Assembles an instance from raw state, checking its invariants.
    pub fn from_parts(
        id: InstanceId,
        descriptor_pool: Vec<Vec<T>>,
        bbox_history: Vec<(usize, BoxVector<T>)>,
        last_mask: RleMask,
        frequency: usize,
        saliency_sum: T,
        created_at: usize,
    ) -> Result<Self> {
        if id.0 == 0 {
            return Err(Error::Invalid("instance id must be positive".into()));
        }
        if descriptor_pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        if bbox_history.is_empty() || bbox_history.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Invalid(
                "box history must be non-empty and strictly increasing in frame".into(),
            ));
        }
        let last_frame = bbox_history.last().expect("non-empty").0;
        if bbox_history[0].0 < created_at || frequency == 0 || frequency > last_frame - created_at + 1 {
            return Err(Error::Invalid(format!(
                "frequency {frequency} inconsistent with lifetime {created_at}..={last_frame}"
            )));
        }
        Ok(Self {
            id,
            descriptor_pool,
            bbox_history,
            last_mask,
            frequency,
            saliency_sum,
            created_at,
        })
    }

    /// Records a successful assignment in `frame`.
    pub fn record(&mut self, frame: usize, candidate: &CandidateProposal<T>, mean_saliency: T) {
        debug_assert!(frame > self.last_frame());
        self.descriptor_pool.push(candidate.descriptor.clone());
        self.bbox_history.push((frame, candidate.bbox.to_vector()));
        self.last_mask = candidate.mask.clone();
        self.frequency += 1;
        self.saliency_sum = self.saliency_sum + mean_saliency;
    }

    pub fn id(&self) -> InstanceId {
        self.id
    }

    pub fn descriptor_pool(&self) -> &[Vec<T>] {
        &self.descriptor_pool
    }

    pub fn latest_descriptor(&self) -> &[T] {
        self.descriptor_pool.last().expect("pool is never empty")
    }

    pub fn bbox_history(&self) -> &[(usize, BoxVector<T>)] {
        &self.bbox_history
    }

    pub fn last_box(&self) -> BoxVector<T> {
        self.bbox_history.last().expect("history is never empty").1
    }

    pub fn last_frame(&self) -> usize {
        self.bbox_history.last().expect("history is never empty").0
    }

    pub fn last_mask(&self) -> &RleMask {
        &self.last_mask
    }

    pub fn frequency(&self) -> usize {
        self.frequency
    }

    pub fn saliency_sum(&self) -> T {
        self.saliency_sum
    }

    pub fn created_at(&self) -> usize {
        self.created_at
    }
}

/// Constant-velocity extrapolation of the box center from the last two
/// history entries; size is carried over from the last entry.
pub fn predict_box<T: Scalar>(instance: &TrackedInstance<T>, target_frame: usize) -> BoxVector<T> {
    let history = instance.bbox_history();
    let (t2, last) = history[history.len() - 1];
    if history.len() < 2 {
        return last;
    }
    let (t1, prev) = history[history.len() - 2];
    let dt = T::from_usize_lossy(t2 - t1);
    let ahead = T::from_usize_lossy(target_frame) - T::from_usize_lossy(t2);
    let vx = (last.cx - prev.cx) / dt;
    let vy = (last.cy - prev.cy) / dt;
    last.translated(vx * ahead, vy * ahead)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// New instances may still be added.
    Growing,
    /// Key instances have been selected; the pool only shrinks or updates.
    Locked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolConfig<T> {
    /// Assignment threshold before key selection.
    pub tau_growing: T,
    /// Assignment threshold after key selection.
    pub tau_locked: T,
    /// Number of frames during which new instances may be added (M).
    pub growth_horizon: usize,
    /// Maximum number of instances kept at selection (K).
    pub max_instances: usize,
    pub spawn_objectness_min: T,
    pub spawn_overlap_max: T,
    pub propagated_objectness: T,
    pub weights: ScoreWeights<T>,
    pub traj_metric: TrajectoryMetric,
}

impl<T: Scalar> PoolConfig<T> {
    pub fn with_weights(weights: ScoreWeights<T>) -> Self {
        Self {
            tau_growing: T::lit(0.55),
            tau_locked: T::lit(0.35),
            growth_horizon: 10,
            max_instances: 20,
            spawn_objectness_min: T::lit(0.7),
            spawn_overlap_max: T::lit(0.2),
            propagated_objectness: T::lit(0.5),
            weights,
            traj_metric: TrajectoryMetric::Euclidean,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.growth_horizon < 1 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.max_instances < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.tau_growing.is_finite() && self.tau_locked.is_finite()) {
            return Err(Error::Config("tau1 and tau2 must be finite".into()));
        }
        for (name, v) in [
            ("spawn_objectness_min", self.spawn_objectness_min),
            ("spawn_overlap_max", self.spawn_overlap_max),
            ("propagated_objectness", self.propagated_objectness),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn threshold(&self, phase: Phase) -> T {
        match phase {
            Phase::Growing => self.tau_growing,
            Phase::Locked => self.tau_locked,
        }
    }
}

/// Ordered registry of tracked instances. Instances are kept in ascending ID
/// order and IDs are never reused.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectPool<T> {
    instances: Vec<TrackedInstance<T>>,
    next_id: u32,
    phase: Phase,
}

impl<T: Scalar> Default for ObjectPool<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ObjectPool<T> {
    pub fn new() -> Self {
        Self {
            instances: Vec::new(),
            next_id: 1,
            phase: Phase::Growing,
        }
    }

    /// Pool holding the given instances, e.g. for replaying a saved state.
    pub fn from_instances(mut instances: Vec<TrackedInstance<T>>, phase: Phase) -> Result<Self> {
        instances.sort_by_key(|i| i.id());
        if instances.windows(2).any(|w| w[0].id() == w[1].id()) {
            return Err(Error::Invalid("duplicate instance id".into()));
        }
        let next_id = instances.last().map_or(1, |i| i.id().0 + 1);
        Ok(Self {
            instances,
            next_id,
            phase,
        })
    }

    pub fn instances(&self) -> &[TrackedInstance<T>] {
        &self.instances
    }

    pub fn get(&self, id: InstanceId) -> Option<&TrackedInstance<T>> {
        self.instances
            .binary_search_by_key(&id, |i| i.id())
            .ok()
            .map(|i| &self.instances[i])
    }

    pub fn ids(&self) -> Vec<InstanceId> {
        self.instances.iter().map(|i| i.id()).collect()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn next_id(&self) -> InstanceId {
        InstanceId(self.next_id)
    }

    fn add(&mut self, frame: usize, candidate: &CandidateProposal<T>, saliency: &SaliencyMap<T>) -> Result<InstanceId> {
        let id = InstanceId(self.next_id);
        self.instances
            .push(TrackedInstance::spawn(id, frame, candidate, saliency)?);
        self.next_id += 1;
        Ok(id)
    }

    /// Applies one frame's matching. `assignments` rows follow pool order and
    /// its columns index `candidates`.
    pub fn apply_assignments(
        &mut self,
        frame: usize,
        assignments: &AssignmentSet,
        candidates: &[CandidateProposal<T>],
        saliency: &SaliencyMap<T>,
    ) -> Result<()> {
        if assignments.rows() != self.instances.len() || assignments.cols() != candidates.len() {
            return Err(Error::Invalid(format!(
                "assignment set is {}x{}, pool/candidates are {}x{}",
                assignments.rows(),
                assignments.cols(),
                self.instances.len(),
                candidates.len()
            )));
        }
        for (row, col) in assignments.pairs() {
            let cand = &candidates[col];
            let mean = mask_mean_saliency(&cand.mask, saliency)?;
            self.instances[row].record(frame, cand, mean);
        }
        Ok(())
    }

    /// Adds new instances for unassigned detector candidates.
    ///
    /// In frame 0 every candidate at or above `spawn_objectness_min` spawns.
    /// Later, a candidate must also overlap every mask assigned in this frame
    /// (including ones spawned just before it) by less than `spawn_overlap_max`.
    /// Returns the new IDs with the candidate index each came from.
    pub fn spawn_new_ids(
        &mut self,
        frame: usize,
        candidates: &[CandidateProposal<T>],
        unassigned: &[usize],
        saliency: &SaliencyMap<T>,
        config: &PoolConfig<T>,
    ) -> Result<Vec<(InstanceId, usize)>> {
        let mut spawned = Vec::new();
        if self.phase != Phase::Growing {
            return Ok(spawned);
        }
        let mut claimed: Vec<RleMask> = self
            .instances
            .iter()
            .filter(|i| i.last_frame() == frame)
            .map(|i| i.last_mask().clone())
            .collect();
        for &idx in unassigned {
            let cand = &candidates[idx];
            if cand.source != CandidateSource::Detector || cand.objectness < config.spawn_objectness_min {
                continue;
            }
            if frame > 0 {
                let mut overlaps = false;
                for m in &claimed {
                    if mask_iou::<T>(&cand.mask, m)? >= config.spawn_overlap_max {
                        overlaps = true;
                        break;
                    }
                }
                if overlaps {
                    continue;
                }
            }
            let id = self.add(frame, cand, saliency)?;
            claimed.push(cand.mask.clone());
            spawned.push((id, idx));
        }
        Ok(spawned)
    }

    /// Keeps only the listed instances and stops further spawning.
    pub fn retain_and_lock(&mut self, keep: &BTreeSet<InstanceId>) {
        self.instances.retain(|i| keep.contains(&i.id()));
        self.phase = Phase::Locked;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{BinaryMask, BoundingBox};

    fn cand(width: u32, pixels: &[usize], objectness: f64) -> CandidateProposal<f64> {
        let mask = RleMask::encode(&BinaryMask::from_indices(width, 1, pixels.iter().copied()));
        CandidateProposal {
            frame_index: 0,
            bbox: BoundingBox::from_mask(&mask).unwrap(),
            mask,
            objectness,
            descriptor: vec![0.0],
            source: CandidateSource::Detector,
        }
    }

    fn sal(width: u32, v: f64) -> SaliencyMap<f64> {
        SaliencyMap::uniform(width, 1, v).unwrap()
    }

    fn config() -> PoolConfig<f64> {
        PoolConfig::with_weights(ScoreWeights::searched(10.0, 1.0))
    }

    fn history(entries: &[(usize, f64, f64)]) -> TrackedInstance<f64> {
        let n = entries.len();
        TrackedInstance::from_parts(
            InstanceId(1),
            vec![vec![0.0]; n],
            entries
                .iter()
                .map(|&(t, cx, cy)| (t, BoxVector::new(cx, cy, 10.0, 10.0)))
                .collect(),
            RleMask::empty(4, 4),
            n,
            0.0,
            entries[0].0,
        )
        .unwrap()
    }

    #[test]
    fn predict_single_entry_is_identity() {
        let inst = history(&[(0, 5.0, 5.0)]);
        assert_eq!(predict_box(&inst, 3), BoxVector::new(5.0, 5.0, 10.0, 10.0));
    }

    #[test]
    fn predict_linear() {
        let inst = history(&[(3, 0.0, 0.0), (4, 10.0, 0.0)]);
        assert_eq!(predict_box(&inst, 5), BoxVector::new(20.0, 0.0, 10.0, 10.0));
    }

    #[test]
    fn predict_with_gap() {
        let inst = history(&[(2, 0.0, 0.0), (4, 10.0, 0.0)]);
        assert_eq!(predict_box(&inst, 5), BoxVector::new(15.0, 0.0, 10.0, 10.0));
    }

    #[test]
    fn from_parts_checks_invariants() {
        let b = BoxVector::new(0.0, 0.0, 1.0, 1.0);
        let mk = |pool: Vec<Vec<f64>>, hist: Vec<(usize, BoxVector<f64>)>, freq| {
            TrackedInstance::from_parts(InstanceId(1), pool, hist, RleMask::empty(2, 2), freq, 0.0, 0)
        };
        assert!(mk(vec![], vec![(0, b)], 1).is_err());
        assert!(mk(vec![vec![0.0]], vec![], 1).is_err());
        assert!(mk(vec![vec![0.0]], vec![(1, b), (1, b)], 1).is_err());
        assert!(mk(vec![vec![0.0]], vec![(0, b), (1, b)], 3).is_err());
        assert!(mk(vec![vec![0.0]], vec![(0, b), (1, b)], 2).is_ok());
    }

    #[test]
    fn apply_without_matches_changes_nothing() {
        let mut pool = ObjectPool::new();
        let c = vec![cand(8, &[1, 2], 0.9)];
        pool.spawn_new_ids(0, &c, &[0], &sal(8, 0.5), &config()).unwrap();
        let before = pool.clone();
        pool.apply_assignments(1, &AssignmentSet::empty(1, 1), &c, &sal(8, 0.5))
            .unwrap();
        assert_eq!(pool, before);
    }

    #[test]
    fn apply_one_match_grows_pool_and_frequency() {
        let mut pool = ObjectPool::new();
        let c = vec![cand(8, &[1, 2], 0.9)];
        pool.spawn_new_ids(0, &c, &[0], &sal(8, 0.0), &config()).unwrap();
        let mut a = AssignmentSet::empty(1, 1);
        a.bind(0, 0);
        pool.apply_assignments(1, &a, &c, &sal(8, 0.4)).unwrap();
        let inst = &pool.instances()[0];
        assert_eq!(inst.descriptor_pool().len(), 2);
        assert_eq!(inst.frequency(), 2);
        pool.apply_assignments(2, &a, &c, &sal(8, 0.6)).unwrap();
        let inst = &pool.instances()[0];
        // spawn contributed 0.0, then 0.4 and 0.6
        assert!((inst.saliency_sum() - 1.0).abs() < 1e-12);
        assert_eq!(inst.bbox_history().len(), 3);
    }

    #[test]
    fn first_frame_spawns_confident_candidates() {
        let mut pool = ObjectPool::new();
        let c = vec![cand(8, &[1], 0.9), cand(8, &[5], 0.3)];
        let new = pool.spawn_new_ids(0, &c, &[0, 1], &sal(8, 0.1), &config()).unwrap();
        assert_eq!(new, vec![(InstanceId(1), 0)]);
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.instances()[0].frequency(), 1);
        assert!((pool.instances()[0].saliency_sum() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn overlapping_candidate_does_not_spawn() {
        let mut pool = ObjectPool::new();
        let c0 = vec![cand(8, &[0, 1, 2, 3], 0.9)];
        pool.spawn_new_ids(0, &c0, &[0], &sal(8, 0.1), &config()).unwrap();
        // frame 3: instance re-assigned to {0..3}; new candidate {2,3} has IoU 0.5
        let mut a = AssignmentSet::empty(1, 1);
        a.bind(0, 0);
        pool.apply_assignments(3, &a, &c0, &sal(8, 0.1)).unwrap();
        let c = vec![cand(8, &[0, 1, 2, 3], 0.9), cand(8, &[2, 3], 0.95)];
        let new = pool.spawn_new_ids(3, &c, &[1], &sal(8, 0.1), &config()).unwrap();
        assert!(new.is_empty());
        // a disjoint one does spawn
        let c = vec![cand(8, &[0, 1, 2, 3], 0.9), cand(8, &[6, 7], 0.95)];
        let new = pool.spawn_new_ids(3, &c, &[1], &sal(8, 0.1), &config()).unwrap();
        assert_eq!(new, vec![(InstanceId(2), 1)]);
    }

    #[test]
    fn duplicate_spawns_in_one_frame_are_suppressed_after_first_frame() {
        let mut pool = ObjectPool::new();
        let c = vec![cand(8, &[1, 2], 0.9), cand(8, &[1, 2], 0.9)];
        let new = pool.spawn_new_ids(2, &c, &[0, 1], &sal(8, 0.1), &config()).unwrap();
        assert_eq!(new.len(), 1);
    }

    #[test]
    fn locked_pool_never_spawns() {
        let mut pool = ObjectPool::new();
        pool.retain_and_lock(&BTreeSet::new());
        let c = vec![cand(8, &[1], 0.99)];
        assert!(pool.spawn_new_ids(0, &c, &[0], &sal(8, 0.1), &config()).unwrap().is_empty());
        assert!(pool.is_empty());
    }

    #[test]
    fn propagated_candidates_never_spawn() {
        let mut pool = ObjectPool::new();
        let mut c = cand(8, &[1], 0.99);
        c.source = CandidateSource::Propagated(InstanceId(4));
        assert!(pool.spawn_new_ids(0, &[c], &[0], &sal(8, 0.1), &config()).unwrap().is_empty());
    }

    #[test]
    fn ids_increase_and_are_not_reused() {
        let mut pool = ObjectPool::new();
        let c = vec![cand(8, &[1], 0.9), cand(8, &[5], 0.9)];
        pool.spawn_new_ids(0, &c, &[0, 1], &sal(8, 0.1), &config()).unwrap();
        pool.retain_and_lock(&[InstanceId(2)].into_iter().collect());
        assert_eq!(pool.ids(), vec![InstanceId(2)]);
        assert_eq!(pool.next_id(), InstanceId(3));
        assert_eq!(pool.phase(), Phase::Locked);
    }
}
