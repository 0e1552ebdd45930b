//! Mask boundaries and the tolerance-based boundary F-measure.

use crate::datamodel::RleMask;
use crate::error::Result;
use crate::scalar::Scalar;

/// Boundary pixels of one mask plus their inclusive bounding rectangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    pixels: Vec<(u32, u32)>,
    bounds: Option<(u32, u32, u32, u32)>,
}

impl Boundary {
    /// Foreground pixels that touch the background (4-neighbourhood) or the image border.
    pub fn of(mask: &RleMask) -> Self {
        let Some((x0, y0, x1, y1)) = mask.bounds() else {
            return Self {
                pixels: Vec::new(),
                bounds: None,
            };
        };
        let (w, h) = mask.size();
        // local grid with a one-pixel margin so every neighbour lookup is in range
        let lw = (x1 - x0 + 2) as usize;
        let lh = (y1 - y0 + 2) as usize;
        let mut grid = vec![false; lw * lh];
        for (row, col, len) in mask.row_segments() {
            let ly = (row - y0 + 1) as usize;
            let lx = (col - x0 + 1) as usize;
            grid[ly * lw + lx..ly * lw + lx + len as usize].fill(true);
        }
        let mut pixels = Vec::new();
        let mut bx = (u32::MAX, u32::MAX, 0u32, 0u32);
        for ly in 1..lh - 1 {
            for lx in 1..lw - 1 {
                if !grid[ly * lw + lx] {
                    continue;
                }
                let x = x0 + lx as u32 - 1;
                let y = y0 + ly as u32 - 1;
                let on_border = x == 0 || y == 0 || x == w - 1 || y == h - 1;
                let touches_bg = !grid[ly * lw + lx - 1]
                    || !grid[ly * lw + lx + 1]
                    || !grid[(ly - 1) * lw + lx]
                    || !grid[(ly + 1) * lw + lx];
                if on_border || touches_bg {
                    pixels.push((x, y));
                    bx = (bx.0.min(x), bx.1.min(y), bx.2.max(x), bx.3.max(y));
                }
            }
        }
        Self {
            bounds: (!pixels.is_empty()).then_some(bx),
            pixels,
        }
    }

    pub fn pixels(&self) -> &[(u32, u32)] {
        &self.pixels
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }
}

/// Squared-distance transform of a 1-D sampled function (lower envelope of parabolas).
fn distance_1d(f: &[f64], out: &mut [f64], sites: &mut Vec<usize>, edges: &mut Vec<f64>) {
    sites.clear();
    edges.clear();
    for q in 0..f.len() {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        loop {
            match sites.last() {
                Some(&p) => {
                    let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                    if s <= *edges.last().expect("paired with sites") {
                        sites.pop();
                        edges.pop();
                        continue;
                    }
                    sites.push(q);
                    edges.push(s);
                }
                None => {
                    sites.push(q);
                    edges.push(f64::NEG_INFINITY);
                }
            }
            break;
        }
    }
    if sites.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < sites.len() && edges[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - sites[k] as f64;
        *o = d * d + f[sites[k]];
    }
}

/// Exact squared Euclidean distance from every cell of a `w x h` grid to the nearest feature cell.
pub(crate) fn squared_distance_transform(features: &[bool], w: usize, h: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = features
        .iter()
        .map(|&f| if f { 0.0 } else { f64::INFINITY })
        .collect();
    let mut sites = Vec::new();
    let mut edges = Vec::new();
    let mut col = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = grid[y * w + x];
        }
        distance_1d(&col, &mut col_out, &mut sites, &mut edges);
        for y in 0..h {
            grid[y * w + x] = col_out[y];
        }
    }
    let mut row_out = vec![0.0; w];
    for y in 0..h {
        distance_1d(&grid[y * w..(y + 1) * w], &mut row_out, &mut sites, &mut edges);
        grid[y * w..(y + 1) * w].copy_from_slice(&row_out);
    }
    grid
}

/// Number of `query` pixels within `tolerance` of some `target` pixel.
fn count_within<T: Scalar>(query: &Boundary, target: &Boundary, tolerance: T) -> usize {
    let (qa, ta) = match (query.bounds, target.bounds) {
        (Some(q), Some(t)) => (q, t),
        _ => return 0,
    };
    let x0 = qa.0.min(ta.0);
    let y0 = qa.1.min(ta.1);
    let w = (qa.2.max(ta.2) - x0 + 1) as usize;
    let h = (qa.3.max(ta.3) - y0 + 1) as usize;
    let mut features = vec![false; w * h];
    for &(x, y) in &target.pixels {
        features[(y - y0) as usize * w + (x - x0) as usize] = true;
    }
    let dist = squared_distance_transform(&features, w, h);
    let limit = tolerance * tolerance;
    query
        .pixels
        .iter()
        .filter(|&&(x, y)| {
            let d = dist[(y - y0) as usize * w + (x - x0) as usize];
            T::from_f64(d).is_some_and(|d| d <= limit)
        })
        .count()
}

/// Smallest possible squared distance between the two boundaries' bounding rectangles.
fn rect_gap_sq(a: (u32, u32, u32, u32), b: (u32, u32, u32, u32)) -> f64 {
    let gap = |lo_a: u32, hi_a: u32, lo_b: u32, hi_b: u32| -> f64 {
        if lo_b > hi_a {
            (lo_b - hi_a) as f64
        } else if lo_a > hi_b {
            (lo_a - hi_b) as f64
        } else {
            0.0
        }
    };
    let dx = gap(a.0, a.2, b.0, b.2);
    let dy = gap(a.1, a.3, b.1, b.3);
    dx * dx + dy * dy
}

/// Boundary F-measure between precomputed boundaries.
pub fn boundary_f_of<T: Scalar>(pred: &Boundary, gt: &Boundary, tolerance: T) -> T {
    match (pred.bounds, gt.bounds) {
        (None, None) => return T::one(),
        (None, _) | (_, None) => return T::zero(),
        (Some(a), Some(b)) => {
            let gap = T::from_f64(rect_gap_sq(a, b)).expect("finite");
            if gap > tolerance * tolerance {
                return T::zero();
            }
        }
    }
    let precision = T::from_usize_lossy(count_within(pred, gt, tolerance)) / T::from_usize_lossy(pred.len());
    let recall = T::from_usize_lossy(count_within(gt, pred, tolerance)) / T::from_usize_lossy(gt.len());
    if precision + recall == T::zero() {
        return T::zero();
    }
    (T::lit(2.0) * precision * recall / (precision + recall)).unit_clamp()
}

/// Boundary F-measure of `pred` against `gt` with a pixel distance tolerance.
/// Two empty boundaries score 1; exactly one empty boundary scores 0.
pub fn boundary_f<T: Scalar>(pred: &RleMask, gt: &RleMask, tolerance: T) -> Result<T> {
    pred.check_same_size(gt)?;
    Ok(boundary_f_of(&Boundary::of(pred), &Boundary::of(gt), tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::BinaryMask;

    fn rect(w: u32, h: u32, x0: u32, y0: u32, rw: u32, rh: u32) -> RleMask {
        let mut m = BinaryMask::new(w, h);
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                m.set(x, y, true);
            }
        }
        RleMask::encode(&m)
    }

    #[test]
    fn boundary_of_filled_rectangle_is_its_ring() {
        let b = Boundary::of(&rect(10, 10, 2, 2, 4, 3));
        // 4x3 rectangle: 4*3 - interior (2*1) = 10 boundary pixels
        assert_eq!(b.len(), 10);
        assert!(!b.pixels().contains(&(3, 3)));
    }

    #[test]
    fn image_border_counts_as_background() {
        let full = rect(3, 3, 0, 0, 3, 3);
        assert_eq!(Boundary::of(&full).len(), 8);
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let w = 7;
        let h = 5;
        let features: Vec<bool> = (0..w * h).map(|i| i % 11 == 3 || i == 30).collect();
        let dist = squared_distance_transform(&features, w, h);
        for y in 0..h {
            for x in 0..w {
                let mut best = f64::INFINITY;
                for fy in 0..h {
                    for fx in 0..w {
                        if features[fy * w + fx] {
                            let d = ((x as f64 - fx as f64).powi(2)) + ((y as f64 - fy as f64).powi(2));
                            best = best.min(d);
                        }
                    }
                }
                assert_eq!(dist[y * w + x], best, "({x},{y})");
            }
        }
    }

    #[test]
    fn identical_masks_score_one() {
        let m = rect(12, 12, 3, 3, 5, 4);
        assert_eq!(boundary_f::<f64>(&m, &m, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn distant_masks_score_zero() {
        let a = rect(20, 20, 0, 0, 3, 3);
        let b = rect(20, 20, 14, 14, 3, 3);
        assert_eq!(boundary_f::<f64>(&a, &b, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn one_pixel_shift_within_tolerance_one() {
        let a = rect(16, 16, 4, 4, 5, 5);
        let b = rect(16, 16, 5, 4, 5, 5);
        assert_eq!(boundary_f::<f64>(&a, &b, 1.0).unwrap(), 1.0);
        assert!(boundary_f::<f64>(&a, &b, 0.0).unwrap() < 1.0);
    }

    #[test]
    fn empty_conventions() {
        let e = RleMask::empty(8, 8);
        let m = rect(8, 8, 1, 1, 2, 2);
        assert_eq!(boundary_f::<f64>(&e, &e, 2.0).unwrap(), 1.0);
        assert_eq!(boundary_f::<f64>(&e, &m, 2.0).unwrap(), 0.0);
        assert_eq!(boundary_f::<f64>(&m, &e, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn infinite_tolerance_accepts_everything() {
        let a = rect(20, 20, 0, 0, 3, 3);
        let b = rect(20, 20, 14, 14, 3, 3);
        assert_eq!(boundary_f::<f64>(&a, &b, f64::INFINITY).unwrap(), 1.0);
    }
}
