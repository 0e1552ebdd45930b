//! Region Jaccard (J) and boundary F-measure (F) evaluation of label-map
//! sequences, with identity-free matching of predicted to ground-truth instances.

mod boundary;
mod matching;

pub use boundary::{boundary_f, boundary_f_of, Boundary};
pub use matching::{
    best_matching, exhaustive_matching, hungarian_matching, matching_total, EXHAUSTIVE_LIMIT,
};

use std::collections::{BTreeMap, BTreeSet};

use crate::datamodel::{mask_iou, FrameSize, InstanceId, LabelMap, RleMask};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Region similarity. Two empty masks agree perfectly and score 1.
pub fn jaccard<T: Scalar>(pred: &RleMask, gt: &RleMask) -> Result<T> {
    pred.check_same_size(gt)?;
    if pred.is_empty() && gt.is_empty() {
        return Ok(T::one());
    }
    mask_iou(pred, gt)
}

/// `ceil(0.008 * diagonal)` pixels.
pub fn default_boundary_tolerance<T: Scalar>(frame: FrameSize) -> T {
    (T::lit(0.008) * frame.diagonal::<T>()).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceMeasures<T> {
    pub mean: T,
    /// Fraction of frames scoring strictly above 0.5.
    pub recall: T,
    /// Mean of the first temporal quartile minus mean of the last.
    pub decay: T,
}

fn mean<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    values.iter().copied().sum::<T>() / T::from_usize_lossy(values.len())
}

/// Mean, recall and decay of a per-frame series.
///
/// Decay splits the series into four contiguous bins, the earlier bins taking
/// the remainder. With fewer than four frames the last non-empty bin stands in
/// for the last quartile.
pub fn sequence_measures<T: Scalar>(values: &[T]) -> SequenceMeasures<T> {
    let n = values.len();
    if n == 0 {
        return SequenceMeasures {
            mean: T::zero(),
            recall: T::zero(),
            decay: T::zero(),
        };
    }
    let half = T::lit(0.5);
    let recall = T::from_usize_lossy(values.iter().filter(|v| **v > half).count()) / T::from_usize_lossy(n);
    let mut bins = Vec::with_capacity(4);
    let mut start = 0;
    for i in 0..4 {
        let len = n / 4 + usize::from(i < n % 4);
        if len > 0 {
            bins.push(&values[start..start + len]);
        }
        start += len;
    }
    let decay = mean(bins[0]) - mean(bins[bins.len() - 1]);
    SequenceMeasures {
        mean: mean(values),
        recall,
        decay,
    }
}

/// Per-frame J and F of one (prediction, ground truth) pairing over the
/// ground-truth instance's lifespan.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMeasure<T> {
    pub first_frame: usize,
    pub j: Vec<T>,
    pub f: Vec<T>,
}

impl<T: Scalar> InstanceMeasure<T> {
    fn zeros(first_frame: usize, len: usize) -> Self {
        Self {
            first_frame,
            j: vec![T::zero(); len],
            f: vec![T::zero(); len],
        }
    }

    /// `(mean J + mean F) / 2`, the quantity instance matching maximises.
    pub fn pair_score(&self) -> T {
        (mean(&self.j) + mean(&self.f)) / T::lit(2.0)
    }
}

/// Optimal one-to-one pairing of ground-truth and predicted instances.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMatching<T> {
    pub gt_ids: Vec<InstanceId>,
    pub pred_ids: Vec<InstanceId>,
    /// `measures[g][p]` for ground-truth index `g` and prediction index `p`.
    pub measures: Vec<Vec<InstanceMeasure<T>>>,
    /// Chosen prediction index for each ground-truth index.
    pub assignment: Vec<Option<usize>>,
}

impl<T: Scalar> InstanceMatching<T> {
    pub fn pairs(&self) -> Vec<(InstanceId, InstanceId)> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(g, p)| p.map(|p| (self.pred_ids[p], self.gt_ids[g])))
            .collect()
    }

    pub fn total(&self) -> T {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(g, p)| p.map(|p| self.measures[g][p].pair_score()))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceReport<T> {
    pub j_mean: T,
    pub j_recall: T,
    pub j_decay: T,
    pub f_mean: T,
    pub f_recall: T,
    pub f_decay: T,
    pub global_mean: T,
}

impl<T: Scalar> SequenceReport<T> {
    pub fn rows(&self) -> [(&'static str, T); 7] {
        [
            ("global_mean", self.global_mean),
            ("j_mean", self.j_mean),
            ("j_recall", self.j_recall),
            ("j_decay", self.j_decay),
            ("f_mean", self.f_mean),
            ("f_recall", self.f_recall),
            ("f_decay", self.f_decay),
        ]
    }

    /// Aligned human-readable table.
    pub fn to_table(&self) -> String {
        let mut s = format!("{:<12} {:>8}\n", "measure", "value");
        for (k, v) in self.rows() {
            s.push_str(&format!("{k:<12} {:>8.4}\n", v.to_f64().unwrap_or(f64::NAN)));
        }
        s
    }

    /// `key: value` lines.
    pub fn to_key_values(&self) -> String {
        self.rows().iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    }
}

fn check_aligned(pred: &[LabelMap], gt: &[LabelMap]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::Invalid(format!(
            "prediction has {} frames, ground truth {}",
            pred.len(),
            gt.len()
        )));
    }
    for (p, g) in pred.iter().zip(gt) {
        if p.size() != g.size() {
            return Err(Error::DimensionMismatch {
                left: p.size().as_tuple(),
                right: g.size().as_tuple(),
            });
        }
    }
    Ok(())
}

struct FrameCache<'a> {
    maps: &'a [LabelMap],
    boundaries: Vec<BTreeMap<InstanceId, Boundary>>,
}

impl<'a> FrameCache<'a> {
    fn new(maps: &'a [LabelMap]) -> Self {
        let boundaries = maps
            .iter()
            .map(|m| m.iter().map(|(id, mask)| (id, Boundary::of(mask))).collect())
            .collect();
        Self { maps, boundaries }
    }

    fn ids(&self) -> Vec<InstanceId> {
        let set: BTreeSet<InstanceId> = self.maps.iter().flat_map(|m| m.ids()).collect();
        set.into_iter().collect()
    }
}

fn lifespan(maps: &[LabelMap], id: InstanceId) -> (usize, usize) {
    let first = maps.iter().position(|m| m.get(id).is_some()).expect("id occurs");
    let last = maps.iter().rposition(|m| m.get(id).is_some()).expect("id occurs");
    (first, last)
}

fn measure_pair<T: Scalar>(
    pred: &FrameCache<'_>,
    gt: &FrameCache<'_>,
    p: InstanceId,
    g: InstanceId,
    span: (usize, usize),
    tolerance: T,
) -> Result<InstanceMeasure<T>> {
    let empty = Boundary::of(&RleMask::empty(1, 1));
    let mut out = InstanceMeasure::zeros(span.0, span.1 - span.0 + 1);
    for (k, f) in (span.0..=span.1).enumerate() {
        let pm = pred.maps[f].get(p);
        let gm = gt.maps[f].get(g);
        out.j[k] = match (pm, gm) {
            (None, None) => T::one(),
            (Some(a), Some(b)) => jaccard(a, b)?,
            _ => T::zero(),
        };
        let pb = pred.boundaries[f].get(&p).unwrap_or(&empty);
        let gb = gt.boundaries[f].get(&g).unwrap_or(&empty);
        out.f[k] = boundary_f_of(pb, gb, tolerance);
    }
    Ok(out)
}

/// Pairs predicted and ground-truth instances so the summed
/// `(mean J + mean F) / 2` is maximal.
pub fn match_instances<T: Scalar>(
    pred: &[LabelMap],
    gt: &[LabelMap],
    tolerance: T,
) -> Result<InstanceMatching<T>> {
    check_aligned(pred, gt)?;
    let pred_cache = FrameCache::new(pred);
    let gt_cache = FrameCache::new(gt);
    let pred_ids = pred_cache.ids();
    let gt_ids = gt_cache.ids();
    let mut measures = Vec::with_capacity(gt_ids.len());
    for &g in &gt_ids {
        let span = lifespan(gt, g);
        let row = pred_ids
            .iter()
            .map(|&p| measure_pair(&pred_cache, &gt_cache, p, g, span, tolerance))
            .collect::<Result<Vec<_>>>()?;
        measures.push(row);
    }
    let weights: Vec<Vec<T>> = measures
        .iter()
        .map(|row| row.iter().map(InstanceMeasure::pair_score).collect())
        .collect();
    let assignment = best_matching(&weights, pred_ids.len());
    Ok(InstanceMatching {
        gt_ids,
        pred_ids,
        measures,
        assignment,
    })
}

/// Averages per-instance statistics over ground-truth instances. Unmatched
/// ground-truth instances contribute zeros.
pub fn report_from_matching<T: Scalar>(matching: &InstanceMatching<T>, gt: &[LabelMap]) -> Result<SequenceReport<T>> {
    if matching.gt_ids.is_empty() {
        return Err(Error::Invalid("ground truth contains no instances".into()));
    }
    let mut acc = [T::zero(); 6];
    for (g, &gid) in matching.gt_ids.iter().enumerate() {
        let m = match matching.assignment[g] {
            Some(p) => matching.measures[g][p].clone(),
            None => {
                let (first, last) = lifespan(gt, gid);
                InstanceMeasure::zeros(first, last - first + 1)
            }
        };
        let j = sequence_measures(&m.j);
        let f = sequence_measures(&m.f);
        for (a, v) in acc.iter_mut().zip([j.mean, j.recall, j.decay, f.mean, f.recall, f.decay]) {
            *a = *a + v;
        }
    }
    let n = T::from_usize_lossy(matching.gt_ids.len());
    let [j_mean, j_recall, j_decay, f_mean, f_recall, f_decay] = acc.map(|v| v / n);
    Ok(SequenceReport {
        j_mean,
        j_recall,
        j_decay,
        f_mean,
        f_recall,
        f_decay,
        global_mean: (j_mean + f_mean) / T::lit(2.0),
    })
}

pub fn evaluate<T: Scalar>(pred: &[LabelMap], gt: &[LabelMap], tolerance: T) -> Result<SequenceReport<T>> {
    let matching = match_instances(pred, gt, tolerance)?;
    report_from_matching(&matching, gt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::BinaryMask;

    const EPS: f64 = 1e-12;

    fn row(w: u32, px: &[usize]) -> RleMask {
        RleMask::encode(&BinaryMask::from_indices(w, 1, px.iter().copied()))
    }

    #[test]
    fn jaccard_examples() {
        let m = row(8, &[1, 2, 3]);
        assert_eq!(jaccard::<f64>(&m, &m).unwrap(), 1.0);
        assert_eq!(jaccard::<f64>(&row(8, &[]), &row(8, &[])).unwrap(), 1.0);
        assert!((jaccard::<f64>(&row(8, &[0, 1]), &row(8, &[0, 1, 2, 3])).unwrap() - 0.5).abs() < EPS);
        assert!(jaccard::<f64>(&row(8, &[]), &row(4, &[])).is_err());
    }

    #[test]
    fn measures_examples() {
        let s = sequence_measures(&[0.3f64; 6]);
        assert_eq!(s.decay, 0.0);
        let s = sequence_measures(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((s.mean - 0.5_f64).abs() < EPS);
        assert!((s.recall - 0.5_f64).abs() < EPS);
        assert!((s.decay - 1.0_f64).abs() < EPS);
        assert_eq!(sequence_measures(&[0.6f64; 3]).recall, 1.0);
        assert_eq!(sequence_measures(&[0.5f64; 3]).recall, 0.0);
    }

    #[test]
    fn quartile_bins_give_remainder_to_early_bins() {
        // n = 5 -> bins of 2,1,1,1: first = mean(1, 0.5), last = 0
        let s = sequence_measures(&[1.0, 0.5, 0.2, 0.1, 0.0]);
        assert!((s.decay - 0.75_f64).abs() < EPS);
        // n = 2 -> bins 1,1 and two empty ones
        let s = sequence_measures(&[0.9, 0.4]);
        assert!((s.decay - 0.5_f64).abs() < EPS);
        assert_eq!(sequence_measures(&[0.7]).decay, 0.0);
    }

    #[test]
    fn default_tolerance() {
        // diagonal of 640x480 is 800 -> 6.4 -> 7
        assert_eq!(default_boundary_tolerance::<f64>(FrameSize::new(640, 480)), 7.0);
        assert_eq!(default_boundary_tolerance::<f64>(FrameSize::new(64, 48)), 1.0);
    }

    fn maps(size: FrameSize, frames: &[&[(u32, &[usize])]]) -> Vec<LabelMap> {
        frames
            .iter()
            .map(|f| {
                let mut m = LabelMap::new(size);
                for (id, px) in f.iter() {
                    m.insert(InstanceId(*id), row(size.width, px)).unwrap();
                }
                m
            })
            .collect()
    }

    #[test]
    fn permuted_ids_score_perfectly() {
        let size = FrameSize::new(10, 1);
        let gt = maps(size, &[&[(1, &[0, 1]), (2, &[5, 6])], &[(1, &[1, 2]), (2, &[6, 7])]]);
        let pred = maps(size, &[&[(7, &[0, 1]), (3, &[5, 6])], &[(7, &[1, 2]), (3, &[6, 7])]]);
        let r = evaluate(&pred, &gt, 1.0).unwrap();
        assert_eq!(r.global_mean, 1.0);
        assert_eq!(r.j_decay, 0.0);
        let m = match_instances(&pred, &gt, 1.0).unwrap();
        assert_eq!(m.pairs(), vec![(InstanceId(7), InstanceId(1)), (InstanceId(3), InstanceId(2))]);
    }

    #[test]
    fn no_predictions_score_zero() {
        let size = FrameSize::new(10, 1);
        let gt = maps(size, &[&[(1, &[0, 1])], &[(1, &[1, 2])]]);
        let pred = maps(size, &[&[], &[]]);
        let r = evaluate(&pred, &gt, 1.0).unwrap();
        assert_eq!(r.j_mean, 0.0);
        assert_eq!(r.f_mean, 0.0);
        assert_eq!(r.global_mean, 0.0);
    }

    #[test]
    fn misaligned_inputs_rejected() {
        let size = FrameSize::new(10, 1);
        let gt = maps(size, &[&[(1, &[0, 1])]]);
        let pred = maps(size, &[&[], &[]]);
        assert!(evaluate(&pred, &gt, 1.0).is_err());
        let other = maps(FrameSize::new(9, 1), &[&[]]);
        assert!(matches!(evaluate(&other, &gt, 1.0), Err(Error::DimensionMismatch { .. })));
        let empty_gt = maps(size, &[&[]]);
        assert!(evaluate(&maps(size, &[&[]]), &empty_gt, 1.0).is_err());
    }

    #[test]
    fn report_formats() {
        let r = SequenceReport {
            j_mean: 0.5,
            j_recall: 0.5,
            j_decay: 0.0,
            f_mean: 1.0,
            f_recall: 1.0,
            f_decay: 0.0,
            global_mean: 0.75,
        };
        assert!(r.to_key_values().contains("global_mean: 0.75\n"));
        assert!(r.to_table().contains("global_mean    0.7500"));
    }
}
