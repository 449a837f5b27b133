//! Frame loading, shot segmentation and duration signatures.

mod frame;
mod manifest;
mod segment;

pub use frame::{luma, parse_ppm_frame, Frame};
pub use manifest::{FrameManifest, FrameRate, ManifestEntry};
pub use segment::{
    detect_shot_boundaries, difference_energy, duration_signature, frame_difference,
    shots_from_cuts, DurationSignature, FrameDifferences, SegmentationConfig, Shot,
};

use std::path::Path;

use crate::error::{Error, Result};

/// Loads every frame listed in `manifest`, resolving paths against `base`.
pub fn load_frames(manifest: &FrameManifest, base: &Path) -> Result<Vec<Frame>> {
    manifest
        .entries()
        .iter()
        .map(|e| {
            let path = base.join(&e.frame_path);
            let bytes = std::fs::read(&path).map_err(|err| Error::io(&path, err))?;
            parse_ppm_frame(&bytes)
        })
        .collect()
}
