//! Maximum-weight one-to-one matching on small dense score tables.

use crate::scalar::Scalar;

/// Largest side for which [`best_matching`] enumerates permutations.
pub const EXHAUSTIVE_LIMIT: usize = 8;

fn square<T: Scalar>(weights: &[Vec<T>], cols: usize) -> (usize, Vec<T>) {
    let n = weights.len().max(cols);
    let mut w = vec![T::zero(); n * n];
    for (r, row) in weights.iter().enumerate() {
        w[r * n..r * n + row.len()].copy_from_slice(row);
    }
    (n, w)
}

fn unpad(perm: &[usize], rows: usize, cols: usize) -> Vec<Option<usize>> {
    perm.iter()
        .take(rows)
        .map(|&c| (c < cols).then_some(c))
        .collect()
}

/// Maximum-weight matching by enumerating all permutations of the zero-padded
/// square table. On ties the lexicographically first permutation wins.
pub fn exhaustive_matching<T: Scalar>(weights: &[Vec<T>], cols: usize) -> Vec<Option<usize>> {
    let rows = weights.len();
    let (n, w) = square(weights, cols);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_total: Option<T> = None;

    loop {
        let total: T = perm.iter().enumerate().map(|(r, &c)| w[r * n + c]).sum();
        if best_total.is_none_or(|b| total > b) {
            best_total = Some(total);
            best.copy_from_slice(&perm);
        }
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).expect("exists");
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    unpad(&best, rows, cols)
}

/// Maximum-weight matching via the O(n^3) Hungarian method with potentials.
pub fn hungarian_matching<T: Scalar>(weights: &[Vec<T>], cols: usize) -> Vec<Option<usize>> {
    let rows = weights.len();
    let (n, w) = square(weights, cols);
    if n == 0 {
        return Vec::new();
    }
    let max = w.iter().copied().fold(T::zero(), T::max);
    // minimise cost = max - weight; 1-based arrays with a virtual column 0
    let cost = |r: usize, c: usize| max - w[(r - 1) * n + (c - 1)];
    let inf = T::infinity();
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for r in 1..=n {
        owner[0] = r;
        let mut c0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[c0] = true;
            let r0 = owner[c0];
            let mut delta = inf;
            let mut c1 = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let cur = cost(r0, c) - u[r0] - v[c];
                if cur < minv[c] {
                    minv[c] = cur;
                    way[c] = c0;
                }
                if minv[c] < delta {
                    delta = minv[c];
                    c1 = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[owner[c]] = u[owner[c]] + delta;
                    v[c] = v[c] - delta;
                } else {
                    minv[c] = minv[c] - delta;
                }
            }
            c0 = c1;
            if owner[c0] == 0 {
                break;
            }
        }
        loop {
            let c1 = way[c0];
            owner[c0] = owner[c1];
            c0 = c1;
            if c0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for c in 1..=n {
        perm[owner[c] - 1] = c - 1;
    }
    unpad(&perm, rows, cols)
}

/// Optimal matching: exhaustive for tables up to 8x8, Hungarian beyond.
pub fn best_matching<T: Scalar>(weights: &[Vec<T>], cols: usize) -> Vec<Option<usize>> {
    if weights.len() <= EXHAUSTIVE_LIMIT && cols <= EXHAUSTIVE_LIMIT {
        exhaustive_matching(weights, cols)
    } else {
        hungarian_matching(weights, cols)
    }
}

pub fn matching_total<T: Scalar>(weights: &[Vec<T>], matching: &[Option<usize>]) -> T {
    matching
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| weights[r][c]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_example() {
        let w = vec![vec![0.9, 0.2], vec![0.3, 0.8]];
        let m = exhaustive_matching(&w, 2);
        assert_eq!(m, vec![Some(0), Some(1)]);
        assert!((matching_total(&w, &m) - 1.7_f64).abs() < 1e-12);
        assert_eq!(hungarian_matching(&w, 2), m);
    }

    #[test]
    fn rectangular_tables() {
        let w = vec![vec![0.1, 0.9, 0.5]];
        assert_eq!(best_matching(&w, 3), vec![Some(1)]);
        assert_eq!(hungarian_matching(&w, 3), vec![Some(1)]);
        let tall = vec![vec![0.2], vec![0.7], vec![0.4]];
        assert_eq!(best_matching(&tall, 1), vec![None, Some(0), None]);
        assert_eq!(hungarian_matching(&tall, 1), vec![None, Some(0), None]);
    }

    #[test]
    fn empty_tables() {
        assert!(best_matching::<f64>(&[], 0).is_empty());
        assert!(hungarian_matching::<f64>(&[], 3).is_empty());
        assert_eq!(best_matching::<f64>(&[vec![], vec![]], 0), vec![None, None]);
    }

    #[test]
    fn hungarian_agrees_with_enumeration_on_pseudo_random_tables() {
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1000) as f64 / 1000.0
        };
        for rows in 1..=6 {
            for cols in 1..=6 {
                let w: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| next()).collect()).collect();
                let a = matching_total(&w, &exhaustive_matching(&w, cols));
                let b = matching_total(&w, &hungarian_matching(&w, cols));
                assert!((a - b).abs() < 1e-9, "{rows}x{cols}: {a} vs {b}");
            }
        }
    }
}
