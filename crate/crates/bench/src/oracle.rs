//! Reference tracker whose assignment step is solved by brute force.

use std::cmp::Ordering;

use keysel::pipeline::run_sequence_with;
use keysel::pool::{AssignmentSet, AssignmentSolver};
use keysel::{Error, PipelineConfig, Result, Scalar, ScoreMatrix, SequenceInput, SequenceResult};

/// Largest per-round problem the exhaustive solver accepts.
pub const ORACLE_LIMIT: usize = 6;

/// Enumerates every one-to-one partial matching over cells at or above the
/// threshold and returns the one with no blocking pair: no unused cell that
/// ranks ahead of whatever both its row and its column ended up with.
/// Cells rank by score (descending), then row, then column.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExhaustiveSolver;

fn rank<T: Scalar>(m: &ScoreMatrix<T>, a: (usize, usize), b: (usize, usize)) -> Ordering {
    m.total(b.0, b.1)
        .partial_cmp(&m.total(a.0, a.1))
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
        .then(a.1.cmp(&b.1))
}

fn enumerate(
    row: usize,
    allowed: &[Vec<bool>],
    used: &mut [bool],
    current: &mut Vec<Option<usize>>,
    visit: &mut dyn FnMut(&[Option<usize>]),
) {
    if row == allowed.len() {
        visit(current);
        return;
    }
    current.push(None);
    enumerate(row + 1, allowed, used, current, visit);
    current.pop();
    for c in 0..used.len() {
        if allowed[row][c] && !used[c] {
            used[c] = true;
            current.push(Some(c));
            enumerate(row + 1, allowed, used, current, visit);
            current.pop();
            used[c] = false;
        }
    }
}

impl<T: Scalar> AssignmentSolver<T> for ExhaustiveSolver {
    fn solve(&self, matrix: &ScoreMatrix<T>, threshold: T) -> Result<AssignmentSet> {
        let (rows, cols) = (matrix.rows(), matrix.cols());
        if rows > ORACLE_LIMIT || cols > ORACLE_LIMIT {
            return Err(Error::SizeLimit {
                rows,
                cols,
                limit: ORACLE_LIMIT,
            });
        }
        let allowed: Vec<Vec<bool>> = (0..rows)
            .map(|r| (0..cols).map(|c| matrix.total(r, c) >= threshold).collect())
            .collect();
        let mut stable: Vec<Vec<Option<usize>>> = Vec::new();
        let mut visit = |m: &[Option<usize>]| {
            let mut col_owner = vec![None; cols];
            for (r, c) in m.iter().enumerate() {
                if let Some(c) = c {
                    col_owner[*c] = Some(r);
                }
            }
            let beats = |cell: (usize, usize), held: Option<(usize, usize)>| {
                held.is_none_or(|h| rank(matrix, cell, h) == Ordering::Less)
            };
            let blocked = (0..rows).any(|r| {
                (0..cols).any(|c| {
                    allowed[r][c]
                        && m[r] != Some(c)
                        && beats((r, c), m[r].map(|pc| (r, pc)))
                        && beats((r, c), col_owner[c].map(|pr| (pr, c)))
                })
            });
            if !blocked {
                stable.push(m.to_vec());
            }
        };
        enumerate(0, &allowed, &mut vec![false; cols], &mut Vec::new(), &mut visit);
        if stable.len() != 1 {
            return Err(Error::Invalid(format!(
                "expected exactly one stable matching, found {}",
                stable.len()
            )));
        }
        let mut out = AssignmentSet::empty(rows, cols);
        for (r, c) in stable[0].iter().enumerate() {
            if let Some(c) = c {
                out.bind(r, *c);
            }
        }
        Ok(out)
    }
}

/// The full pipeline with [`ExhaustiveSolver`] in place of the greedy rule.
pub fn oracle_track<T: Scalar>(input: &SequenceInput<T>, config: &PipelineConfig<T>) -> Result<SequenceResult<T>> {
    run_sequence_with(input, config, &ExhaustiveSolver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use keysel::pool::assign_ids;

    #[test]
    fn agrees_with_greedy_on_small_tables() {
        let tables: [(usize, usize, Vec<f64>); 4] = [
            (2, 1, vec![0.9, 0.8]),
            (2, 2, vec![0.7, 0.7, 0.7, 0.7]),
            (3, 3, vec![0.9, 0.85, 0.1, 0.88, 0.2, 0.6, 0.3, 0.61, 0.59]),
            (2, 3, vec![0.2, 0.3, 0.1, 0.4, 0.1, 0.5]),
        ];
        for (r, c, t) in tables {
            let m = ScoreMatrix::from_totals(r, c, &t);
            let a = ExhaustiveSolver.solve(&m, 0.55).unwrap();
            assert_eq!(a, assign_ids(&m, 0.55));
        }
    }

    #[test]
    fn size_limit() {
        let m = ScoreMatrix::<f64>::new(7, 1);
        assert!(matches!(ExhaustiveSolver.solve(&m, 0.5), Err(Error::SizeLimit { rows: 7, .. })));
    }
}
