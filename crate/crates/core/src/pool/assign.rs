use crate::error::Result;
use crate::scalar::Scalar;
use crate::scoring::ScoreMatrix;

/// One-to-one partial matching between matrix rows (instances) and columns (candidates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentSet {
    by_row: Vec<Option<usize>>,
    by_col: Vec<Option<usize>>,
}

impl AssignmentSet {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            by_row: vec![None; rows],
            by_col: vec![None; cols],
        }
    }

    /// Binds a free row to a free column. Returns false if either is taken.
    pub fn bind(&mut self, row: usize, col: usize) -> bool {
        if self.by_row[row].is_some() || self.by_col[col].is_some() {
            return false;
        }
        self.by_row[row] = Some(col);
        self.by_col[col] = Some(row);
        true
    }

    pub fn candidate_of(&self, row: usize) -> Option<usize> {
        self.by_row[row]
    }

    pub fn instance_of(&self, col: usize) -> Option<usize> {
        self.by_col[col]
    }

    pub fn rows(&self) -> usize {
        self.by_row.len()
    }

    pub fn cols(&self) -> usize {
        self.by_col.len()
    }

    /// `(row, col)` pairs in row order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.by_row
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| (r, c)))
    }

    pub fn len(&self) -> usize {
        self.pairs().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Resolves a score matrix into a matching under a score threshold.
///
/// Rows are in ascending instance-ID order, so "lower row" means "lower ID".
pub trait AssignmentSolver<T: Scalar> {
    fn solve(&self, matrix: &ScoreMatrix<T>, threshold: T) -> Result<AssignmentSet>;
}

/// Globally greedy resolution: repeatedly bind the highest remaining cell while
/// it clears the threshold. Ties go to the lower row, then the lower column.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyAssignment;

impl<T: Scalar> AssignmentSolver<T> for GreedyAssignment {
    fn solve(&self, matrix: &ScoreMatrix<T>, threshold: T) -> Result<AssignmentSet> {
        Ok(assign_ids(matrix, threshold))
    }
}

pub fn assign_ids<T: Scalar>(matrix: &ScoreMatrix<T>, threshold: T) -> AssignmentSet {
    let mut cells: Vec<(T, usize, usize)> = Vec::new();
    for r in 0..matrix.rows() {
        for c in 0..matrix.cols() {
            let s = matrix.total(r, c);
            if s >= threshold {
                cells.push((s, r, c));
            }
        }
    }
    cells.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("scores are finite")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut out = AssignmentSet::empty(matrix.rows(), matrix.cols());
    for (_, r, c) in cells {
        out.bind(r, c);
    }
    out
}

/// Two-round association over a matrix whose first `detector_cols` columns are
/// detector candidates and whose remaining columns are propagated masks.
///
/// Detector candidates are resolved first. Instances left unmatched then
/// compete for the propagated masks whose source instance is also unmatched.
/// `propagated_source[i]` is the row that produced propagated column
/// `detector_cols + i`.
pub fn associate<T: Scalar>(
    matrix: &ScoreMatrix<T>,
    detector_cols: usize,
    propagated_source: &[usize],
    threshold: T,
    solver: &dyn AssignmentSolver<T>,
) -> Result<AssignmentSet> {
    debug_assert_eq!(detector_cols + propagated_source.len(), matrix.cols());
    let mut out = AssignmentSet::empty(matrix.rows(), matrix.cols());

    let all_rows: Vec<usize> = (0..matrix.rows()).collect();
    let det_cols: Vec<usize> = (0..detector_cols).collect();
    let first = solver.solve(&matrix.select(&all_rows, &det_cols), threshold)?;
    for (r, c) in first.pairs() {
        out.bind(r, c);
    }

    let free_rows: Vec<usize> = all_rows
        .into_iter()
        .filter(|&r| out.candidate_of(r).is_none())
        .collect();
    let prop_cols: Vec<usize> = propagated_source
        .iter()
        .enumerate()
        .filter(|(_, &src)| out.candidate_of(src).is_none())
        .map(|(i, _)| detector_cols + i)
        .collect();
    if !free_rows.is_empty() && !prop_cols.is_empty() {
        let second = solver.solve(&matrix.select(&free_rows, &prop_cols), threshold)?;
        for (r, c) in second.pairs() {
            out.bind(free_rows[r], prop_cols[c]);
        }
    }
    Ok(out)
}
