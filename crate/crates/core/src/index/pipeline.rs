//! Signature extraction, corpus indexing and querying.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;

use super::config::Config;
use super::signature::write_signature;
use crate::color::shot_color_signature;
use crate::error::{Error, Result};
use crate::ingest::{detect_shot_boundaries, load_frames, Frame, FrameManifest};
use crate::matcher::{
    rank_results, relevance, MatchConfig, MatchResult, ShotSignature, VideoSignature,
};
use crate::texture::{classify_shot_texture, key_frame_indices, GaborBank, TrainedSvmModel};

/// Runs segmentation and the three per-shot extractors.
#[derive(Debug, Clone)]
pub struct Extractor {
    cfg: Config,
    bank: GaborBank,
    model: TrainedSvmModel,
}

impl Extractor {
    pub fn new(cfg: Config, model: TrainedSvmModel) -> Result<Self> {
        cfg.validate()?;
        let bank = GaborBank::from_config(&cfg.gabor)?;
        Ok(Extractor { cfg, bank, model })
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn model(&self) -> &TrainedSvmModel {
        &self.model
    }

    pub fn extract(
        &self,
        video_id: &str,
        manifest: &FrameManifest,
        frames: &[Frame],
    ) -> Result<VideoSignature> {
        let shots = detect_shot_boundaries(manifest, frames, &self.cfg.segmentation)?;
        let sigs = shots
            .iter()
            .map(|s| {
                let color = shot_color_signature(&frames[s.start_frame..=s.end_frame])?;
                let keys: Vec<&Frame> =
                    key_frame_indices(s.start_frame, s.end_frame, s.duration_ms)
                        .into_iter()
                        .map(|k| &frames[k])
                        .collect();
                let texture =
                    classify_shot_texture(&keys, &self.bank, &self.model, self.cfg.tau_present)?;
                Ok(ShotSignature {
                    duration_ms: s.duration_ms,
                    color,
                    texture,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        VideoSignature::new(video_id, sigs)
    }

    /// Reads a manifest and its frames (paths relative to the manifest).
    pub fn extract_manifest(&self, video_id: &str, manifest_path: &Path) -> Result<VideoSignature> {
        let manifest = FrameManifest::read(manifest_path)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let frames = load_frames(&manifest, base)?;
        self.extract(video_id, &manifest, &frames)
    }
}

/// Video id for a manifest path: the directory name for `<id>/manifest.txt`,
/// otherwise the file stem.
pub fn video_id_for(manifest_path: &Path) -> String {
    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned());
    if manifest_path
        .file_name()
        .is_some_and(|n| n == "manifest.txt")
    {
        if let Some(dir) = manifest_path.parent().and_then(|d| d.file_name()) {
            return dir.to_string_lossy().into_owned();
        }
    }
    stem(manifest_path).unwrap_or_else(|| "video".into())
}

/// Manifests under `dir`: every `<sub>/manifest.txt` and every `*.manifest`,
/// sorted by path.
pub fn find_manifests(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            let m = path.join("manifest.txt");
            if m.is_file() {
                out.push(m);
            }
        } else if path.extension().is_some_and(|e| e == "manifest") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IndexSummary {
    pub indexed: usize,
    pub skipped: usize,
}

/// Extracts every manifest under `dir` in parallel and writes the records in
/// path order. Manifests that fail to load are skipped with a warning.
pub fn index_corpus(dir: &Path, out: &Path, extractor: &Extractor) -> Result<IndexSummary> {
    let manifests = find_manifests(dir)?;
    let results: Vec<Result<VideoSignature>> = manifests
        .par_iter()
        .map(|m| extractor.extract_manifest(&video_id_for(m), m))
        .collect();

    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    let mut summary = IndexSummary::default();
    for (path, res) in manifests.iter().zip(results) {
        match res {
            Ok(sig) => {
                w.write_all(write_signature(&sig).as_bytes())
                    .map_err(|e| Error::io(out, e))?;
                summary.indexed += 1;
            }
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                summary.skipped += 1;
            }
        }
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok(summary)
}

/// Scores `query` against every index video, ranks, and keeps results whose
/// unmatched fraction `1 - E` is at most `mismatch_threshold`.
pub fn query_corpus(
    query: &VideoSignature,
    index: &[VideoSignature],
    cfg: &MatchConfig,
    mismatch_threshold: f64,
) -> Result<Vec<MatchResult>> {
    if index.is_empty() {
        return Err(Error::Empty("index"));
    }
    let mut results: Vec<MatchResult> = index
        .par_iter()
        .map(|v| relevance(query, v, cfg))
        .collect::<Result<_>>()?;
    results.retain(|r| 1.0 - r.exhaustivity <= mismatch_threshold);
    rank_results(&mut results);
    Ok(results)
}
