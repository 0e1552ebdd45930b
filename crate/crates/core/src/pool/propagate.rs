//! Mask propagation: carrying an instance's last mask into the next frame.

use crate::datamodel::{
    mask_iou, BoundingBox, CandidateProposal, CandidateSource, FrameSize, LabelMap, RleMask,
};
use crate::scalar::Scalar;

use super::{predict_box, TrackedInstance};

pub trait MaskPropagator<T: Scalar> {
    /// Returns the instance's mask carried into `target_frame` as a propagated
    /// candidate, or `None` when nothing of it remains in the frame.
    fn propagate(
        &self,
        instance: &TrackedInstance<T>,
        target_frame: usize,
        frame_size: FrameSize,
    ) -> Option<CandidateProposal<T>>;
}

fn propagated_candidate<T: Scalar>(
    instance: &TrackedInstance<T>,
    target_frame: usize,
    mask: RleMask,
    objectness: T,
) -> Option<CandidateProposal<T>> {
    let bbox = BoundingBox::from_mask(&mask)?;
    Some(CandidateProposal {
        frame_index: target_frame,
        bbox,
        mask,
        objectness,
        descriptor: instance.latest_descriptor().to_vec(),
        source: CandidateSource::Propagated(instance.id()),
    })
}

/// Shifts the last mask by the displacement of the predicted box center.
#[derive(Debug, Clone, Copy)]
pub struct MotionPropagator<T> {
    pub objectness: T,
}

impl<T: Scalar> MaskPropagator<T> for MotionPropagator<T> {
    fn propagate(
        &self,
        instance: &TrackedInstance<T>,
        target_frame: usize,
        _frame_size: FrameSize,
    ) -> Option<CandidateProposal<T>> {
        let last = instance.last_box();
        let predicted = predict_box(instance, target_frame);
        let dx = (predicted.cx - last.cx).round().to_i64()?;
        let dy = (predicted.cy - last.cy).round().to_i64()?;
        let mask = instance.last_mask().translate(dx, dy);
        propagated_candidate(instance, target_frame, mask, self.objectness)
    }
}

/// Produces no propagated candidates.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPropagation;

impl<T: Scalar> MaskPropagator<T> for NoPropagation {
    fn propagate(&self, _: &TrackedInstance<T>, _: usize, _: FrameSize) -> Option<CandidateProposal<T>> {
        None
    }
}

/// Test oracle: follows the ground-truth object that best overlaps the
/// instance's last mask and returns that object's true mask in the target frame.
#[derive(Debug, Clone, Copy)]
pub struct GroundTruthPropagator<'a, T> {
    pub ground_truth: &'a [LabelMap],
    pub objectness: T,
}

impl<T: Scalar> MaskPropagator<T> for GroundTruthPropagator<'_, T> {
    fn propagate(
        &self,
        instance: &TrackedInstance<T>,
        target_frame: usize,
        _frame_size: FrameSize,
    ) -> Option<CandidateProposal<T>> {
        let seen = self.ground_truth.get(instance.last_frame())?;
        let mut best: Option<(T, _)> = None;
        for (id, mask) in seen.iter() {
            let iou: T = mask_iou(mask, instance.last_mask()).ok()?;
            if iou > T::zero() && best.as_ref().is_none_or(|(b, _)| iou > *b) {
                best = Some((iou, id));
            }
        }
        let (_, id) = best?;
        let mask = self.ground_truth.get(target_frame)?.get(id)?.clone();
        propagated_candidate(instance, target_frame, mask, self.objectness)
    }
}
