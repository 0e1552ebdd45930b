//! Row-major run-length mask container.
//!
//! Counts alternate background/foreground and always start with a background
//! run, which may be zero. A 2x2 full mask is `[0, 4]`; an empty one is `[4]`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::types::SaliencyMap;

/// Dense binary grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::Invalid(format!(
                "grid {}x{} needs {} pixels, got {}",
                width,
                height,
                width as usize * height as usize,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Sets every pixel listed by linear (row-major) index.
    pub fn from_indices(width: u32, height: u32, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::new(width, height);
        for i in indices {
            m.bits[i] = true;
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Linear indices of set pixels in ascending order.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
            .collect()
    }
}

/// Run-length encoded binary mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RleMask {
    width: u32,
    height: u32,
    counts: Vec<u32>,
}

impl RleMask {
    /// Mask with no foreground pixels.
    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            counts: vec![width * height],
        }
    }

    /// Validates raw counts and stores them in canonical form (zero-length
    /// interior runs merged away, trailing zero run dropped).
    pub fn from_counts(width: u32, height: u32, counts: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedRle(format!(
                "frame must be non-empty, got {width}x{height}"
            )));
        }
        if counts.is_empty() {
            return Err(Error::MalformedRle("no runs".into()));
        }
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        let expected = width as u64 * height as u64;
        if total != expected {
            return Err(Error::MalformedRle(format!(
                "run lengths sum to {total}, expected {expected} ({width}x{height})"
            )));
        }
        if counts.windows(2).any(|w| w[0] == 0 && w[1] == 0) {
            return Err(Error::MalformedRle("adjacent zero-length runs".into()));
        }

        let mut canonical: Vec<u32> = Vec::with_capacity(counts.len());
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 && i > 0 {
                continue;
            }
            // After skipping a zero run the parity of `canonical` may already
            // match this run's colour, in which case the run extends the last one.
            let is_foreground = i % 2 == 1;
            let last_is_foreground = canonical.len().is_multiple_of(2);
            if !canonical.is_empty() && is_foreground == last_is_foreground {
                *canonical.last_mut().expect("non-empty") += c;
            } else {
                canonical.push(c);
            }
        }
        if canonical.len() > 1 && *canonical.last().expect("non-empty") == 0 {
            canonical.pop();
        }
        Ok(Self {
            width,
            height,
            counts: canonical,
        })
    }

    /// Builds a mask from sorted, non-overlapping foreground runs given as
    /// `(start, len)` in linear row-major indices.
    pub fn from_runs(width: u32, height: u32, runs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let total = width * height;
        let mut counts = Vec::new();
        let mut pos = 0u32;
        for (start, len) in runs {
            if len == 0 {
                continue;
            }
            debug_assert!(start >= pos, "runs must be sorted and disjoint");
            let gap = start - pos;
            if gap == 0 && !counts.is_empty() {
                *counts.last_mut().expect("non-empty") += len;
            } else {
                counts.push(gap);
                counts.push(len);
            }
            pos = start + len;
        }
        if pos < total || counts.is_empty() {
            counts.push(total - pos);
        }
        Self {
            width,
            height,
            counts,
        }
    }

    /// Axis-aligned rectangle `[x, x + w) x [y, y + h)` clipped to the frame.
    pub fn rectangle(width: u32, height: u32, x: i64, y: i64, w: u32, h: u32) -> Self {
        let x0 = x.clamp(0, i64::from(width)) as u32;
        let x1 = (x + i64::from(w)).clamp(0, i64::from(width)) as u32;
        let y0 = y.clamp(0, i64::from(height)) as u32;
        let y1 = (y + i64::from(h)).clamp(0, i64::from(height)) as u32;
        if x0 >= x1 || y0 >= y1 {
            return Self::empty(width, height);
        }
        Self::from_runs(width, height, (y0..y1).map(|r| (r * width + x0, x1 - x0)))
    }

    pub fn encode(mask: &BinaryMask) -> Self {
        let mut counts = Vec::new();
        let mut current = false;
        let mut run = 0u32;
        for &bit in &mask.bits {
            if bit != current {
                counts.push(run);
                run = 0;
                current = bit;
            }
            run += 1;
        }
        counts.push(run);
        Self {
            width: mask.width,
            height: mask.height,
            counts,
        }
    }

    pub fn decode(&self) -> BinaryMask {
        let mut bits = Vec::with_capacity(self.pixel_count());
        for (i, &c) in self.counts.iter().enumerate() {
            bits.extend(std::iter::repeat_n(i % 2 == 1, c as usize));
        }
        BinaryMask {
            width: self.width,
            height: self.height,
            bits,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    /// Foreground runs as `(start, len)` in linear row-major indices.
    pub fn runs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let mut pos = 0u32;
        self.counts.iter().enumerate().filter_map(move |(i, &c)| {
            let start = pos;
            pos += c;
            (i % 2 == 1).then_some((start, c))
        })
    }

    /// Foreground runs split at row boundaries: `(row, x_start, len)`.
    pub fn row_segments(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        let w = self.width;
        self.runs().flat_map(move |(start, len)| {
            let mut out = Vec::new();
            let mut s = start;
            let end = start + len;
            while s < end {
                let row = s / w;
                let col = s % w;
                let seg = (w - col).min(end - s);
                out.push((row, col, seg));
                s += seg;
            }
            out
        })
    }

    pub fn check_same_size(&self, other: &RleMask) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(())
    }

    pub fn intersection_area(&self, other: &RleMask) -> Result<u64> {
        self.check_same_size(other)?;
        let mut a = self.runs().peekable();
        let mut b = other.runs().peekable();
        let mut inter = 0u64;
        while let (Some(&(sa, la)), Some(&(sb, lb))) = (a.peek(), b.peek()) {
            let ea = sa + la;
            let eb = sb + lb;
            let lo = sa.max(sb);
            let hi = ea.min(eb);
            if hi > lo {
                inter += (hi - lo) as u64;
            }
            if ea <= eb {
                a.next();
            } else {
                b.next();
            }
        }
        Ok(inter)
    }

    /// Tight pixel bounds `(x0, y0, x1, y1)`, exclusive on the max side.
    pub fn bounds(&self) -> Option<(u32, u32, u32, u32)> {
        let mut acc: Option<(u32, u32, u32, u32)> = None;
        for (row, col, len) in self.row_segments() {
            let (x0, y0, x1, y1) = acc.unwrap_or((col, row, col + len, row + 1));
            acc = Some((x0.min(col), y0.min(row), x1.max(col + len), y1.max(row + 1)));
        }
        acc
    }

    /// Shifts the foreground by `(dx, dy)` pixels; pixels leaving the frame are dropped.
    pub fn translate(&self, dx: i64, dy: i64) -> RleMask {
        let w = self.width as i64;
        let h = self.height as i64;
        let runs = self.row_segments().filter_map(|(row, col, len)| {
            let y = row as i64 + dy;
            if y < 0 || y >= h {
                return None;
            }
            let x0 = (col as i64 + dx).max(0);
            let x1 = (col as i64 + len as i64 + dx).min(w);
            (x1 > x0).then(|| ((y * w + x0) as u32, (x1 - x0) as u32))
        });
        RleMask::from_runs(self.width, self.height, runs.collect::<Vec<_>>())
    }

    /// Set union; both masks must share dimensions.
    pub fn union(&self, other: &RleMask) -> Result<RleMask> {
        self.check_same_size(other)?;
        let mut all: Vec<(u32, u32)> = self.runs().chain(other.runs()).collect();
        all.sort_unstable();
        let mut merged: Vec<(u32, u32)> = Vec::with_capacity(all.len());
        for (s, l) in all {
            match merged.last_mut() {
                Some((ms, ml)) if s <= *ms + *ml => {
                    let end = (*ms + *ml).max(s + l);
                    *ml = end - *ms;
                }
                _ => merged.push((s, l)),
            }
        }
        Ok(RleMask::from_runs(self.width, self.height, merged))
    }

    /// Pixels of `self` not in `other`.
    pub fn difference(&self, other: &RleMask) -> Result<RleMask> {
        self.check_same_size(other)?;
        let mut out = Vec::new();
        let others: Vec<(u32, u32)> = other.runs().collect();
        let mut j = 0usize;
        for (s, l) in self.runs() {
            let mut cur = s;
            let end = s + l;
            while j < others.len() && others[j].0 + others[j].1 <= cur {
                j += 1;
            }
            let mut k = j;
            while cur < end {
                match others.get(k) {
                    Some(&(os, ol)) if os < end => {
                        if os > cur {
                            out.push((cur, os - cur));
                        }
                        cur = cur.max(os + ol);
                        k += 1;
                    }
                    _ => {
                        out.push((cur, end - cur));
                        cur = end;
                    }
                }
            }
        }
        Ok(RleMask::from_runs(self.width, self.height, out))
    }
}

/// Intersection over union; two empty masks score 0.
pub fn mask_iou<T: Scalar>(a: &RleMask, b: &RleMask) -> Result<T> {
    let inter = a.intersection_area(b)?;
    let union = a.area() + b.area() - inter;
    if union == 0 {
        return Ok(T::zero());
    }
    Ok(T::from_u64(inter).expect("u64") / T::from_u64(union).expect("u64"))
}

/// Mean saliency over the mask's foreground; an empty mask scores 0.
pub fn mask_mean_saliency<T: Scalar>(mask: &RleMask, saliency: &SaliencyMap<T>) -> Result<T> {
    if mask.size() != saliency.size() {
        return Err(Error::DimensionMismatch {
            left: mask.size(),
            right: saliency.size(),
        });
    }
    let values = saliency.values();
    let mut sum = T::zero();
    let mut n = 0u64;
    for (start, len) in mask.runs() {
        let s = start as usize;
        sum = sum + values[s..s + len as usize].iter().copied().sum::<T>();
        n += len as u64;
    }
    if n == 0 {
        return Ok(T::zero());
    }
    Ok((sum / T::from_u64(n).expect("u64")).unit_clamp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(len: u32, set: &[usize]) -> RleMask {
        RleMask::encode(&BinaryMask::from_indices(len, 1, set.iter().copied()))
    }

    #[test]
    fn rectangle_clips() {
        let r = RleMask::rectangle(4, 3, 1, 1, 2, 5);
        assert_eq!(r.decode().indices(), vec![5, 6, 9, 10]);
        assert!(RleMask::rectangle(4, 3, 4, 0, 2, 2).is_empty());
        assert!(RleMask::rectangle(4, 3, -3, 0, 3, 2).is_empty());
        assert_eq!(RleMask::rectangle(4, 3, -1, -1, 9, 9).counts(), &[0, 12]);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(RleMask::encode(&BinaryMask::new(2, 2)).counts(), &[4]);
        let full = BinaryMask::from_bits(2, 2, vec![true; 4]).unwrap();
        assert_eq!(RleMask::encode(&full).counts(), &[0, 4]);
        assert_eq!(row(4, &[1, 2]).counts(), &[1, 2, 1]);
    }

    #[test]
    fn decode_examples() {
        let m = RleMask::from_counts(2, 2, vec![4]).unwrap().decode();
        assert_eq!(m.count(), 0);
        let m = RleMask::from_counts(2, 2, vec![0, 4]).unwrap().decode();
        assert_eq!(m.count(), 4);
        let m = RleMask::from_counts(4, 1, vec![1, 2, 1]).unwrap().decode();
        assert_eq!(m.indices(), vec![1, 2]);
    }

    #[test]
    fn malformed_counts_rejected() {
        assert!(matches!(
            RleMask::from_counts(2, 2, vec![3]),
            Err(Error::MalformedRle(_))
        ));
        assert!(matches!(
            RleMask::from_counts(2, 2, vec![1, 0, 0, 3]),
            Err(Error::MalformedRle(_))
        ));
        assert!(RleMask::from_counts(0, 2, vec![0]).is_err());
        assert!(RleMask::from_counts(2, 2, vec![]).is_err());
    }

    #[test]
    fn non_canonical_counts_are_normalized() {
        let m = RleMask::from_counts(4, 1, vec![1, 0, 3]).unwrap();
        assert_eq!(m.counts(), &[4]);
        let m = RleMask::from_counts(4, 1, vec![1, 2, 0, 1, 0]).unwrap();
        assert_eq!(m.counts(), &[1, 3]);
        assert_eq!(m, row(4, &[1, 2, 3]));
    }

    #[test]
    fn iou_examples() {
        let a = row(8, &[0, 1, 2, 3]);
        let b = row(8, &[2, 3, 4, 5]);
        assert!((mask_iou::<f64>(&a, &b).unwrap() - 2.0 / 6.0).abs() < 1e-12);
        assert_eq!(mask_iou::<f64>(&a, &a).unwrap(), 1.0);
        assert_eq!(mask_iou::<f64>(&row(8, &[0]), &row(8, &[5])).unwrap(), 0.0);
        assert_eq!(mask_iou::<f64>(&row(8, &[]), &row(8, &[])).unwrap(), 0.0);
        assert!(matches!(
            mask_iou::<f64>(&row(8, &[]), &row(4, &[])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mean_saliency_examples() {
        let uniform = SaliencyMap::uniform(8, 1, 0.7).unwrap();
        assert!((mask_mean_saliency(&row(8, &[1, 4, 5]), &uniform).unwrap() - 0.7_f64).abs() < 1e-12);
        assert_eq!(mask_mean_saliency(&row(8, &[]), &uniform).unwrap(), 0.0);
        let two = SaliencyMap::new(4, 1, vec![0.2, 0.0, 0.8, 1.0]).unwrap();
        assert!((mask_mean_saliency(&row(4, &[0, 2]), &two).unwrap() - 0.5_f64).abs() < 1e-12);
        assert!(mask_mean_saliency(&row(8, &[0]), &two).is_err());
    }

    #[test]
    fn translate_shifts_and_clips() {
        assert_eq!(row(8, &[2, 3]).translate(2, 0), row(8, &[4, 5]));
        assert!(row(4, &[3]).translate(2, 0).is_empty());
        let m = RleMask::encode(&BinaryMask::from_indices(3, 3, [0, 1, 3, 4]));
        let shifted = m.translate(1, 1);
        assert_eq!(shifted.decode().indices(), vec![4, 5, 7, 8]);
        assert_eq!(m.translate(0, 0), m);
        assert!(m.translate(0, 5).is_empty());
    }

    #[test]
    fn bounds_of_block() {
        let m = RleMask::encode(&BinaryMask::from_indices(4, 3, [5, 6, 9, 10]));
        assert_eq!(m.bounds(), Some((1, 1, 3, 3)));
        assert_eq!(RleMask::empty(4, 3).bounds(), None);
    }

    #[test]
    fn union_and_difference() {
        let a = row(8, &[0, 1, 2]);
        let b = row(8, &[2, 3, 6]);
        assert_eq!(a.union(&b).unwrap(), row(8, &[0, 1, 2, 3, 6]));
        assert_eq!(a.difference(&b).unwrap(), row(8, &[0, 1]));
        assert_eq!(b.difference(&a).unwrap(), row(8, &[3, 6]));
    }
}
