//! Pairwise instance/candidate association scores.
//!
//! Four cues are combined per (instance, candidate) cell: mask overlap,
//! distance from the instance's predicted box, nearest-neighbour appearance
//! distance against the instance's positive descriptor pool, and that
//! appearance score relative to the best instance for the same candidate.

use crate::datamodel::{mask_iou, BoxVector, CandidateProposal, RleMask};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights<T> {
    pub iou: T,
    pub traj: T,
    pub reid: T,
    pub rel: T,
    /// Box distance (pixels) at which the trajectory score reaches zero.
    pub alpha_traj: T,
    /// Descriptor distance at which the appearance score reaches zero.
    pub alpha_reid: T,
}

impl<T: Scalar> ScoreWeights<T> {
    /// Cue weights found by the original hyperparameter search.
    pub fn searched(alpha_traj: T, alpha_reid: T) -> Self {
        Self {
            iou: T::lit(0.12),
            traj: T::lit(0.575),
            reid: T::lit(0.3),
            rel: T::lit(0.0065),
            alpha_traj,
            alpha_reid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("w_iou", self.iou),
            ("w_traj", self.traj),
            ("w_reid", self.reid),
            ("w_rel", self.rel),
        ] {
            if !(w >= T::zero() && w.is_finite()) {
                return Err(Error::Config(format!("{name} must be a finite non-negative number, got {w}")));
            }
        }
        for (name, a) in [("alpha_traj", self.alpha_traj), ("alpha_reid", self.alpha_reid)] {
            if !(a > T::zero() && a.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {a}")));
            }
        }
        Ok(())
    }

    pub fn weight_sum(&self) -> T {
        self.iou + self.traj + self.reid + self.rel
    }
}

/// How the trajectory cue turns two box vectors into a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrajectoryMetric {
    /// Euclidean norm of the componentwise `(cx, cy, w, h)` difference.
    #[default]
    Euclidean,
    /// Literal inner product of the two vectors. The resulting score is
    /// clamped to `[0, 1]` since a negative product would otherwise exceed 1.
    InnerProduct,
}

impl std::str::FromStr for TrajectoryMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "inner_product" => Ok(Self::InnerProduct),
            other => Err(Error::Config(format!("unknown trajectory metric `{other}`"))),
        }
    }
}

impl std::fmt::Display for TrajectoryMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Euclidean => "euclidean",
            Self::InnerProduct => "inner_product",
        })
    }
}

fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum::<T>()
        .sqrt()
}

pub fn score_traj<T: Scalar>(
    predicted: &BoxVector<T>,
    candidate: &BoxVector<T>,
    alpha_traj: T,
    metric: TrajectoryMetric,
) -> T {
    let p = predicted.as_array();
    let c = candidate.as_array();
    let d = match metric {
        TrajectoryMetric::Euclidean => euclidean(&p, &c),
        TrajectoryMetric::InnerProduct => p.iter().zip(&c).map(|(a, b)| *a * *b).sum(),
    };
    (T::one() - (d / alpha_traj).min(T::one())).unit_clamp()
}

/// Appearance score from the nearest descriptor in the instance's positive pool.
pub fn score_reid<T: Scalar>(pool: &[Vec<T>], descriptor: &[T], alpha_reid: T) -> Result<T> {
    let mut nearest: Option<T> = None;
    for d in pool {
        if d.len() != descriptor.len() {
            return Err(Error::DescriptorLength {
                expected: d.len(),
                got: descriptor.len(),
            });
        }
        let dist = euclidean(d, descriptor);
        nearest = Some(nearest.map_or(dist, |n| n.min(dist)));
    }
    let nearest = nearest.ok_or(Error::EmptyPool)?;
    Ok(T::one() - (nearest / alpha_reid).min(T::one()))
}

/// Normalizes one candidate's appearance scores by their maximum over instances.
/// An all-zero column stays zero.
pub fn score_rel<T: Scalar>(column: &[T]) -> Vec<T> {
    let max = column.iter().copied().fold(T::zero(), T::max);
    if max <= T::zero() {
        return vec![T::zero(); column.len()];
    }
    column.iter().map(|v| *v / max).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentScores<T> {
    pub iou: T,
    pub traj: T,
    pub reid: T,
    pub rel: T,
}

pub fn score_total<T: Scalar>(c: &ComponentScores<T>, w: &ScoreWeights<T>) -> T {
    w.iou * c.iou + w.traj * c.traj + w.reid * c.reid + w.rel * c.rel
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreCell<T> {
    pub components: ComponentScores<T>,
    pub total: T,
}

/// Row-major `instances x candidates` table of scores for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix<T> {
    rows: usize,
    cols: usize,
    cells: Vec<ScoreCell<T>>,
}

impl<T: Scalar> ScoreMatrix<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![ScoreCell::default(); rows * cols],
        }
    }

    /// Matrix carrying only totals, for driving assignment directly.
    pub fn from_totals(rows: usize, cols: usize, totals: &[T]) -> Self {
        assert_eq!(totals.len(), rows * cols, "totals must be rows*cols");
        Self {
            rows,
            cols,
            cells: totals
                .iter()
                .map(|&total| ScoreCell {
                    components: ComponentScores::default(),
                    total,
                })
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn cell(&self, row: usize, col: usize) -> &ScoreCell<T> {
        &self.cells[row * self.cols + col]
    }

    #[inline]
    pub fn total(&self, row: usize, col: usize) -> T {
        self.cell(row, col).total
    }

    fn cell_mut(&mut self, row: usize, col: usize) -> &mut ScoreCell<T> {
        &mut self.cells[row * self.cols + col]
    }

    /// Sub-matrix keeping the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut cells = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                cells.push(*self.cell(r, c));
            }
        }
        Self {
            rows: rows.len(),
            cols: cols.len(),
            cells,
        }
    }
}

/// What the scorer needs to know about one tracked instance this frame.
#[derive(Debug, Clone, Copy)]
pub struct InstanceProbe<'a, T> {
    pub descriptors: &'a [Vec<T>],
    pub predicted: BoxVector<T>,
    /// Mask compared against candidates: the instance propagated into this
    /// frame, or its last assigned mask.
    pub mask: &'a RleMask,
}

pub fn build_score_matrix<T: Scalar>(
    instances: &[InstanceProbe<'_, T>],
    candidates: &[CandidateProposal<T>],
    weights: &ScoreWeights<T>,
    metric: TrajectoryMetric,
) -> Result<ScoreMatrix<T>> {
    let mut m = ScoreMatrix::new(instances.len(), candidates.len());
    for (n, cand) in candidates.iter().enumerate() {
        let cand_box = cand.bbox.to_vector();
        for (l, inst) in instances.iter().enumerate() {
            let cell = m.cell_mut(l, n);
            cell.components.iou = mask_iou(inst.mask, &cand.mask)?;
            cell.components.traj = score_traj(&inst.predicted, &cand_box, weights.alpha_traj, metric);
            cell.components.reid = score_reid(inst.descriptors, &cand.descriptor, weights.alpha_reid)?;
        }
        let column: Vec<T> = (0..instances.len()).map(|l| m.cell(l, n).components.reid).collect();
        for (l, rel) in score_rel(&column).into_iter().enumerate() {
            let cell = m.cell_mut(l, n);
            cell.components.rel = rel;
            cell.total = score_total(&cell.components, weights);
        }
    }
    Ok(m)
}
