use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::rle::RleMask;

/// Persistent instance identifier. Always positive; 0 is background in label maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId(pub u32);

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameSize {
    pub width: u32,
    pub height: u32,
}

impl FrameSize {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub fn pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn diagonal<T: Scalar>(&self) -> T {
        T::from_u32(self.width)
            .expect("u32")
            .hypot(T::from_u32(self.height).expect("u32"))
    }

    pub fn as_tuple(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

/// Axis-aligned box in pixels, `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox<T> {
    pub x: T,
    pub y: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(x: T, y: T, w: T, h: T) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Invalid("box origin must be finite".into()));
        }
        if !(w > T::zero() && h > T::zero() && w.is_finite() && h.is_finite()) {
            return Err(Error::Invalid(format!("box extent must be positive, got {w}x{h}")));
        }
        Ok(Self { x, y, w, h })
    }

    /// Tight box around the mask foreground, `None` for an empty mask.
    pub fn from_mask(mask: &RleMask) -> Option<Self> {
        let (x0, y0, x1, y1) = mask.bounds()?;
        let c = |v: u32| T::from_u32(v).expect("u32");
        Some(Self {
            x: c(x0),
            y: c(y0),
            w: c(x1 - x0),
            h: c(y1 - y0),
        })
    }

    pub fn to_vector(&self) -> BoxVector<T> {
        let two = T::lit(2.0);
        BoxVector {
            cx: self.x + self.w / two,
            cy: self.y + self.h / two,
            w: self.w,
            h: self.h,
        }
    }
}

/// Center-size box representation `(cx, cy, w, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxVector<T> {
    pub cx: T,
    pub cy: T,
    pub w: T,
    pub h: T,
}

impl<T: Scalar> BoxVector<T> {
    pub fn new(cx: T, cy: T, w: T, h: T) -> Self {
        Self { cx, cy, w, h }
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.cx, self.cy, self.w, self.h]
    }

    pub fn translated(&self, dx: T, dy: T) -> Self {
        Self {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }
}

/// Per-pixel saliency in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap<T> {
    width: u32,
    height: u32,
    values: Vec<T>,
}

impl<T: Scalar> SaliencyMap<T> {
    pub fn new(width: u32, height: u32, values: Vec<T>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::Invalid(format!(
                "saliency map {}x{} needs {} values, got {}",
                width,
                height,
                width as usize * height as usize,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::Invalid(format!("saliency value {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn uniform(width: u32, height: u32, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
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

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidateSource {
    Detector,
    Propagated(InstanceId),
}

/// One object hypothesis in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateProposal<T> {
    pub frame_index: usize,
    pub bbox: BoundingBox<T>,
    pub mask: RleMask,
    pub objectness: T,
    pub descriptor: Vec<T>,
    pub source: CandidateSource,
}

impl<T: Scalar> CandidateProposal<T> {
    pub fn validate(&self, frame: FrameSize, descriptor_dim: usize) -> Result<()> {
        if self.mask.size() != frame.as_tuple() {
            return Err(Error::DimensionMismatch {
                left: self.mask.size(),
                right: frame.as_tuple(),
            });
        }
        if !(self.objectness >= T::zero() && self.objectness <= T::one()) {
            return Err(Error::Invalid(format!(
                "objectness {} outside [0, 1]",
                self.objectness
            )));
        }
        if self.descriptor.len() != descriptor_dim {
            return Err(Error::DescriptorLength {
                expected: descriptor_dim,
                got: self.descriptor.len(),
            });
        }
        if self.descriptor.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("descriptor has non-finite entries".into()));
        }
        Ok(())
    }
}

/// Pixel-exclusive instance labelling of one frame, stored as one RLE per ID.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    size: FrameSize,
    instances: BTreeMap<InstanceId, RleMask>,
}

impl LabelMap {
    pub fn new(size: FrameSize) -> Self {
        Self {
            size,
            instances: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> FrameSize {
        self.size
    }

    /// Adds an instance mask; rejects ID 0, empty masks, duplicates and overlaps.
    pub fn insert(&mut self, id: InstanceId, mask: RleMask) -> Result<()> {
        if id.0 == 0 {
            return Err(Error::Invalid("label 0 is reserved for background".into()));
        }
        if mask.size() != self.size.as_tuple() {
            return Err(Error::DimensionMismatch {
                left: mask.size(),
                right: self.size.as_tuple(),
            });
        }
        if mask.is_empty() {
            return Err(Error::Invalid(format!("instance {id} has an empty mask")));
        }
        if self.instances.contains_key(&id) {
            return Err(Error::Invalid(format!("instance {id} listed twice")));
        }
        for (other, m) in &self.instances {
            if m.intersection_area(&mask)? > 0 {
                return Err(Error::Invalid(format!(
                    "instances {other} and {id} overlap; label maps are pixel-exclusive"
                )));
            }
        }
        self.instances.insert(id, mask);
        Ok(())
    }

    pub fn get(&self, id: InstanceId) -> Option<&RleMask> {
        self.instances.get(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = InstanceId> + '_ {
        self.instances.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (InstanceId, &RleMask)> {
        self.instances.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Dense label image, 0 = background.
    pub fn to_dense(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.size.pixels()];
        for (id, mask) in &self.instances {
            for (s, l) in mask.runs() {
                out[s as usize..(s + l) as usize].fill(id.0);
            }
        }
        out
    }

    pub fn from_dense(size: FrameSize, labels: &[u32]) -> Result<Self> {
        if labels.len() != size.pixels() {
            return Err(Error::Invalid("dense label map has wrong length".into()));
        }
        let mut runs: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let r = runs.entry(l).or_default();
            match r.last_mut() {
                Some((s, len)) if *s + *len == i as u32 => *len += 1,
                _ => r.push((i as u32, 1)),
            }
        }
        let mut map = Self::new(size);
        for (id, r) in runs {
            map.instances
                .insert(InstanceId(id), RleMask::from_runs(size.width, size.height, r));
        }
        Ok(map)
    }
}

/// Everything the tracker consumes for one video.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInput<T> {
    pub frame_size: FrameSize,
    pub descriptor_dim: usize,
    /// Detector candidates, one list per frame.
    pub candidates: Vec<Vec<CandidateProposal<T>>>,
    pub saliency: Vec<SaliencyMap<T>>,
    pub ground_truth: Option<Vec<LabelMap>>,
}

impl<T: Scalar> SequenceInput<T> {
    pub fn frame_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.candidates.len();
        if t == 0 {
            return Err(Error::Invalid("sequence has no frames".into()));
        }
        if self.frame_size.width == 0 || self.frame_size.height == 0 {
            return Err(Error::Invalid("frame size must be non-zero".into()));
        }
        if self.saliency.len() != t {
            return Err(Error::MissingFrame {
                frame: self.saliency.len().min(t),
                what: format!("{} saliency maps for {t} frames", self.saliency.len()),
            });
        }
        for (f, (cands, sal)) in self.candidates.iter().zip(&self.saliency).enumerate() {
            if sal.size() != self.frame_size.as_tuple() {
                return Err(Error::DimensionMismatch {
                    left: sal.size(),
                    right: self.frame_size.as_tuple(),
                });
            }
            for c in cands {
                if c.frame_index != f {
                    return Err(Error::Invalid(format!(
                        "candidate in frame list {f} claims frame {}",
                        c.frame_index
                    )));
                }
                if c.source != CandidateSource::Detector {
                    return Err(Error::Invalid(
                        "input candidates must come from the detector".into(),
                    ));
                }
                c.validate(self.frame_size, self.descriptor_dim)?;
            }
        }
        if let Some(gt) = &self.ground_truth {
            if gt.len() != t {
                return Err(Error::MissingFrame {
                    frame: gt.len().min(t),
                    what: format!("{} ground-truth frames for {t} frames", gt.len()),
                });
            }
            if let Some(m) = gt.iter().find(|m| m.size() != self.frame_size) {
                return Err(Error::DimensionMismatch {
                    left: m.size().as_tuple(),
                    right: self.frame_size.as_tuple(),
                });
            }
        }
        Ok(())
    }
}

/// Which candidate an assignment consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchedCandidate {
    /// Index into the frame's detector candidate list.
    Detector(usize),
    /// Mask propagated from the given instance.
    Propagated(InstanceId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProvenanceKind<T> {
    /// Matched an existing instance with this total score.
    Assigned { total_score: T },
    /// Created a new instance.
    Spawned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProvenanceRecord<T> {
    pub frame: usize,
    pub instance: InstanceId,
    pub kind: ProvenanceKind<T>,
    pub candidate: MatchedCandidate,
}

/// Tracker output: one label map per frame plus how each label came about.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult<T> {
    pub frame_size: FrameSize,
    pub labels: Vec<LabelMap>,
    pub provenance: Vec<ProvenanceRecord<T>>,
}

impl<T> SequenceResult<T> {
    pub fn frame_count(&self) -> usize {
        self.labels.len()
    }
}
