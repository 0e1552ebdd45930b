//! Domain types, the RLE mask codec and on-disk formats.

pub mod io;
mod rle;
mod types;

pub use rle::{mask_iou, mask_mean_saliency, BinaryMask, RleMask};
pub use types::*;
