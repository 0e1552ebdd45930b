//! Frame-by-frame driver tying scoring, the object pool and key selection
//! together, plus label-map rasterisation and overlay rendering.

mod config;
mod render;

pub use config::{PipelineConfig, PropagatorKind};
pub use render::{id_color, overlay_pixels, render_overlay, BACKGROUND};

use std::cmp::Ordering;

use crate::datamodel::{
    CandidateProposal, FrameSize, InstanceId, LabelMap, MatchedCandidate, ProvenanceKind,
    ProvenanceRecord, RleMask, SaliencyMap, SequenceInput, SequenceResult,
};
use crate::error::{Error, Result};
use crate::pool::{
    associate, predict_box, AssignmentSolver, GreedyAssignment, GroundTruthPropagator,
    MaskPropagator, MotionPropagator, NoPropagation, ObjectPool, Phase, PoolConfig,
};
use crate::scalar::Scalar;
use crate::scoring::{build_score_matrix, InstanceProbe};
use crate::selection::{select, SelectionMode, SelectionWeights};

/// Labels and provenance produced by one [`Tracker::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput<T> {
    pub labels: LabelMap,
    pub provenance: Vec<ProvenanceRecord<T>>,
}

/// Sequential tracking state for one video.
pub struct Tracker<'a, T: Scalar> {
    frame_size: FrameSize,
    descriptor_dim: usize,
    pool_config: PoolConfig<T>,
    selection_weights: SelectionWeights<T>,
    selection_mode: SelectionMode,
    pool: ObjectPool<T>,
    propagator: Box<dyn MaskPropagator<T> + 'a>,
    solver: &'a dyn AssignmentSolver<T>,
    frame: usize,
}

impl<'a, T: Scalar> Tracker<'a, T> {
    pub fn new(
        config: &PipelineConfig<T>,
        frame_size: FrameSize,
        descriptor_dim: usize,
        propagator: Box<dyn MaskPropagator<T> + 'a>,
        solver: &'a dyn AssignmentSolver<T>,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            frame_size,
            descriptor_dim,
            pool_config: config.pool_config(frame_size),
            selection_weights: config.selection_weights(),
            selection_mode: config.selection_mode,
            pool: ObjectPool::new(),
            propagator,
            solver,
            frame: 0,
        })
    }

    pub fn pool(&self) -> &ObjectPool<T> {
        &self.pool
    }

    /// Index of the next frame to be processed.
    pub fn frame(&self) -> usize {
        self.frame
    }

    /// Processes the next frame.
    pub fn step(
        &mut self,
        detections: &[CandidateProposal<T>],
        saliency: &SaliencyMap<T>,
    ) -> Result<FrameOutput<T>> {
        let t = self.frame;
        if saliency.size() != self.frame_size.as_tuple() {
            return Err(Error::DimensionMismatch {
                left: saliency.size(),
                right: self.frame_size.as_tuple(),
            });
        }
        for c in detections {
            c.validate(self.frame_size, self.descriptor_dim)?;
        }

        let instances = self.pool.instances();
        let mut candidates = detections.to_vec();
        let mut propagated_source = Vec::new();
        let mut own_mask: Vec<Option<usize>> = vec![None; instances.len()];
        for (row, inst) in instances.iter().enumerate() {
            if let Some(c) = self.propagator.propagate(inst, t, self.frame_size) {
                own_mask[row] = Some(candidates.len());
                propagated_source.push(row);
                candidates.push(c);
            }
        }
        let probes: Vec<InstanceProbe<'_, T>> = instances
            .iter()
            .zip(&own_mask)
            .map(|(inst, own)| InstanceProbe {
                descriptors: inst.descriptor_pool(),
                predicted: predict_box(inst, t),
                mask: own.map_or(inst.last_mask(), |c| &candidates[c].mask),
            })
            .collect();
        let matrix = build_score_matrix(
            &probes,
            &candidates,
            &self.pool_config.weights,
            self.pool_config.traj_metric,
        )?;
        let threshold = self.pool_config.threshold(self.pool.phase());
        let assignment = associate(
            &matrix,
            detections.len(),
            &propagated_source,
            threshold,
            self.solver,
        )?;

        let ids = self.pool.ids();
        let mut painted: Vec<(InstanceId, usize, Option<T>)> = Vec::new();
        let mut provenance = Vec::new();
        for (row, col) in assignment.pairs() {
            let total = matrix.total(row, col);
            let candidate = if col < detections.len() {
                MatchedCandidate::Detector(col)
            } else {
                MatchedCandidate::Propagated(ids[propagated_source[col - detections.len()]])
            };
            provenance.push(ProvenanceRecord {
                frame: t,
                instance: ids[row],
                kind: ProvenanceKind::Assigned { total_score: total },
                candidate,
            });
            painted.push((ids[row], col, Some(total)));
        }
        self.pool
            .apply_assignments(t, &assignment, &candidates, saliency)?;

        let unassigned: Vec<usize> = (0..detections.len())
            .filter(|&c| assignment.instance_of(c).is_none())
            .collect();
        let spawned =
            self.pool
                .spawn_new_ids(t, &candidates, &unassigned, saliency, &self.pool_config)?;
        for &(id, col) in &spawned {
            provenance.push(ProvenanceRecord {
                frame: t,
                instance: id,
                kind: ProvenanceKind::Spawned,
                candidate: MatchedCandidate::Detector(col),
            });
            painted.push((id, col, None));
        }
        provenance.sort_by_key(|r| r.instance);

        if self.pool.phase() == Phase::Growing && t + 1 == self.pool_config.growth_horizon {
            select(
                &mut self.pool,
                self.selection_mode,
                self.pool_config.max_instances,
                &self.selection_weights,
                self.pool_config.growth_horizon,
            );
        }

        painted.retain(|(id, _, _)| self.pool.get(*id).is_some());
        let masks: Vec<(InstanceId, &RleMask, Option<T>)> = painted
            .iter()
            .map(|&(id, col, score)| (id, &candidates[col].mask, score))
            .collect();
        let labels = rasterize(self.frame_size, &masks)?;
        self.frame += 1;
        Ok(FrameOutput { labels, provenance })
    }
}

/// Paints masks into a pixel-exclusive label map. Where masks overlap, an
/// assignment beats a spawn, a higher score beats a lower one, and a lower ID
/// breaks remaining ties.
pub fn rasterize<T: Scalar>(
    frame_size: FrameSize,
    masks: &[(InstanceId, &RleMask, Option<T>)],
) -> Result<LabelMap> {
    let mut order: Vec<&(InstanceId, &RleMask, Option<T>)> = masks.iter().collect();
    order.sort_by(|a, b| {
        let by_score = match (a.2, b.2) {
            (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(Ordering::Equal),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        by_score.then(a.0.cmp(&b.0))
    });
    let mut map = LabelMap::new(frame_size);
    let mut claimed = RleMask::empty(frame_size.width, frame_size.height);
    for (id, mask, _) in order {
        let own = mask.difference(&claimed)?;
        if !own.is_empty() {
            claimed = claimed.union(&own)?;
            map.insert(*id, own)?;
        }
    }
    Ok(map)
}

fn propagator_for<'a, T: Scalar>(
    input: &'a SequenceInput<T>,
    config: &PipelineConfig<T>,
) -> Result<Box<dyn MaskPropagator<T> + 'a>> {
    Ok(match config.propagator {
        PropagatorKind::Motion => Box::new(MotionPropagator {
            objectness: config.propagated_objectness,
        }),
        PropagatorKind::None => Box::new(NoPropagation),
        PropagatorKind::GroundTruth => {
            let gt = input.ground_truth.as_deref().ok_or_else(|| {
                Error::Config("the groundtruth propagator needs ground truth in the input".into())
            })?;
            Box::new(GroundTruthPropagator {
                ground_truth: gt,
                objectness: config.propagated_objectness,
            })
        }
    })
}

/// Runs the tracker over a whole sequence with greedy assignment.
pub fn run_sequence<T: Scalar>(
    input: &SequenceInput<T>,
    config: &PipelineConfig<T>,
) -> Result<SequenceResult<T>> {
    run_sequence_with(input, config, &GreedyAssignment)
}

/// Runs the tracker with a caller-supplied assignment solver.
pub fn run_sequence_with<T: Scalar>(
    input: &SequenceInput<T>,
    config: &PipelineConfig<T>,
    solver: &dyn AssignmentSolver<T>,
) -> Result<SequenceResult<T>> {
    input.validate()?;
    let mut tracker = Tracker::new(
        config,
        input.frame_size,
        input.descriptor_dim,
        propagator_for(input, config)?,
        solver,
    )?;
    let mut labels = Vec::with_capacity(input.frame_count());
    let mut provenance = Vec::new();
    for (dets, sal) in input.candidates.iter().zip(&input.saliency) {
        let out = tracker.step(dets, sal)?;
        labels.push(out.labels);
        provenance.extend(out.provenance);
    }
    Ok(SequenceResult {
        frame_size: input.frame_size,
        labels,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{BinaryMask, BoundingBox, CandidateSource};

    fn rect(size: FrameSize, x: u32, y: u32, w: u32, h: u32) -> RleMask {
        let mut b = BinaryMask::new(size.width, size.height);
        for yy in y..y + h {
            for xx in x..x + w {
                b.set(xx, yy, true);
            }
        }
        RleMask::encode(&b)
    }

    fn det(frame: usize, mask: RleMask, desc: Vec<f64>) -> CandidateProposal<f64> {
        CandidateProposal {
            frame_index: frame,
            bbox: BoundingBox::from_mask(&mask).unwrap(),
            mask,
            objectness: 0.9,
            descriptor: desc,
            source: CandidateSource::Detector,
        }
    }

    /// Two rectangles moving right by 2 px per frame; object A sits on
    /// saliency 1.0, object B on 0.0 and is detected only every other frame.
    fn two_objects(frames: usize, b_every_other: bool) -> SequenceInput<f64> {
        let size = FrameSize::new(40, 20);
        let mut candidates = Vec::new();
        let mut saliency = Vec::new();
        for t in 0..frames {
            let x = 2 * t as u32;
            let a = rect(size, x, 2, 5, 5);
            let b = rect(size, x, 12, 5, 5);
            let mut list = vec![det(t, a.clone(), vec![1.0, 0.0])];
            if !b_every_other || t % 2 == 0 {
                list.push(det(t, b, vec![0.0, 1.0]));
            }
            candidates.push(list);
            let mut values = vec![0.0; size.pixels()];
            for (row, col, len) in a.row_segments() {
                for c in col..col + len {
                    values[(row * size.width + c) as usize] = 1.0;
                }
            }
            saliency.push(SaliencyMap::new(size.width, size.height, values).unwrap());
        }
        SequenceInput {
            frame_size: size,
            descriptor_dim: 2,
            candidates,
            saliency,
            ground_truth: None,
        }
    }

    #[test]
    fn single_frame_single_spawn() {
        let size = FrameSize::new(8, 8);
        let m = rect(size, 1, 1, 3, 3);
        let input = SequenceInput {
            frame_size: size,
            descriptor_dim: 1,
            candidates: vec![vec![det(0, m.clone(), vec![0.0])]],
            saliency: vec![SaliencyMap::uniform(8, 8, 0.5).unwrap()],
            ground_truth: None,
        };
        let r = run_sequence(&input, &PipelineConfig::default()).unwrap();
        assert_eq!(r.labels[0].len(), 1);
        assert_eq!(r.labels[0].get(InstanceId(1)), Some(&m));
        assert_eq!(r.provenance.len(), 1);
        assert_eq!(r.provenance[0].kind, ProvenanceKind::Spawned);
    }

    #[test]
    fn linear_motion_keeps_ids() {
        let input = two_objects(5, false);
        let config = PipelineConfig {
            k: 2,
            m: 3,
            ..Default::default()
        };
        let r = run_sequence(&input, &config).unwrap();
        for (t, map) in r.labels.iter().enumerate() {
            let ids: Vec<_> = map.ids().collect();
            assert_eq!(ids, vec![InstanceId(1), InstanceId(2)], "frame {t}");
            assert_eq!(
                map.get(InstanceId(1)).unwrap(),
                &input.candidates[t][0].mask
            );
        }
    }

    #[test]
    fn selection_keeps_salient_frequent_object() {
        let input = two_objects(5, true);
        let config = PipelineConfig {
            k: 1,
            m: 3,
            ..Default::default()
        };
        let r = run_sequence(&input, &config).unwrap();
        for map in &r.labels[2..] {
            assert!(map.ids().all(|id| id == InstanceId(1)));
        }
        assert!(r.labels[4].get(InstanceId(1)).is_some());
    }

    #[test]
    fn deterministic() {
        let input = two_objects(6, true);
        let config = PipelineConfig::default();
        assert_eq!(
            run_sequence(&input, &config).unwrap(),
            run_sequence(&input, &config).unwrap()
        );
    }

    #[test]
    fn rasterize_priority() {
        let size = FrameSize::new(6, 1);
        let a = rect(size, 0, 0, 4, 1);
        let b = rect(size, 2, 0, 4, 1);
        let map = rasterize(size, &[(InstanceId(1), &a, None), (InstanceId(2), &b, Some(0.6))]).unwrap();
        assert_eq!(map.to_dense(), vec![1, 1, 2, 2, 2, 2]);
        let map = rasterize(size, &[(InstanceId(2), &a, Some(0.7)), (InstanceId(1), &b, Some(0.7))]).unwrap();
        assert_eq!(map.to_dense(), vec![2, 2, 1, 1, 1, 1]);
        let map = rasterize(size, &[(InstanceId(1), &a, Some(0.6)), (InstanceId(2), &b, Some(0.9))]).unwrap();
        assert_eq!(map.to_dense(), vec![1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn groundtruth_propagator_needs_ground_truth() {
        let input = two_objects(2, false);
        let config = PipelineConfig {
            propagator: PropagatorKind::GroundTruth,
            ..Default::default()
        };
        assert!(matches!(run_sequence(&input, &config), Err(Error::Config(_))));
    }
}
