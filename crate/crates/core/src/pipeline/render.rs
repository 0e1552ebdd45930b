use std::fs;
use std::path::Path;

use crate::datamodel::{InstanceId, SequenceInput, SequenceResult};
use crate::error::{Error, Result};

pub const BACKGROUND: [u8; 3] = [128, 128, 128];

/// Deterministic colour for an instance ID, never equal to [`BACKGROUND`].
pub fn id_color(id: InstanceId) -> [u8; 3] {
    // splitmix64 finaliser
    let mut z = u64::from(id.0).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    let mut c = [z as u8, (z >> 8) as u8, (z >> 16) as u8];
    if c == BACKGROUND {
        c[0] = 255;
    }
    c
}

/// RGB pixels of one frame: background grey with each instance in its colour.
pub fn overlay_pixels<T>(result: &SequenceResult<T>, frame: usize) -> Result<Vec<[u8; 3]>> {
    let map = result.labels.get(frame).ok_or_else(|| Error::MissingFrame {
        frame,
        what: format!("result has {} frames", result.labels.len()),
    })?;
    Ok(map
        .to_dense()
        .into_iter()
        .map(|l| if l == 0 { BACKGROUND } else { id_color(InstanceId(l)) })
        .collect())
}

/// Writes frame `frame` of `result` as a binary PPM (P6).
pub fn render_overlay<T>(
    input: &SequenceInput<T>,
    result: &SequenceResult<T>,
    frame: usize,
    out: &Path,
) -> Result<()> {
    if input.frame_size != result.frame_size {
        return Err(Error::DimensionMismatch {
            left: input.frame_size.as_tuple(),
            right: result.frame_size.as_tuple(),
        });
    }
    let pixels = overlay_pixels(result, frame)?;
    let size = result.frame_size;
    let mut bytes = format!("P6\n{} {}\n255\n", size.width, size.height).into_bytes();
    bytes.reserve(pixels.len() * 3);
    for p in pixels {
        bytes.extend_from_slice(&p);
    }
    fs::write(out, bytes).map_err(|e| Error::io(out, e))
}
