//! Frame manifests: the per-frame timing of a decoded video.
//!
//! On disk a manifest is UTF-8 text:
//!
//! ```text
//! ndvd-manifest v1 fps=25/1
//! 0 frames/000000.ppm
//! 40 frames/000001.ppm
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const MAGIC: &str = "ndvd-manifest";

/// Nominal frame rate as a positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument(format!(
                "invalid frame rate {num}/{den}"
            )));
        }
        Ok(FrameRate { num, den })
    }

    pub fn fps(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// One frame period in milliseconds.
    pub fn period_ms(self) -> f64 {
        1000.0 * self.den as f64 / self.num as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub timestamp_ms: u64,
    pub frame_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameManifest {
    entries: Vec<ManifestEntry>,
    fps: FrameRate,
}

impl FrameManifest {
    pub fn new(entries: Vec<ManifestEntry>, fps: FrameRate) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Manifest("no frames listed".into()));
        }
        if let Some(w) = entries
            .windows(2)
            .find(|w| w[1].timestamp_ms <= w[0].timestamp_ms)
        {
            return Err(Error::Manifest(format!(
                "timestamps not strictly increasing at {} ms",
                w[1].timestamp_ms
            )));
        }
        Ok(FrameManifest { entries, fps })
    }

    /// A manifest whose timestamps are `round(k * 1000 / fps)`; paths are synthetic.
    pub fn uniform(n_frames: usize, fps: FrameRate) -> Result<Self> {
        let entries = (0..n_frames)
            .map(|k| ManifestEntry {
                timestamp_ms: frame_timestamp_ms(k, fps),
                frame_path: PathBuf::from(format!("frames/{k:06}.ppm")),
            })
            .collect();
        FrameManifest::new(entries, fps)
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn fps(&self) -> FrameRate {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn timestamp(&self, frame: usize) -> u64 {
        self.entries[frame].timestamp_ms
    }

    /// Start time of frame `frame`, or for one past the last frame the
    /// last timestamp extrapolated by one nominal frame period.
    pub fn boundary_time(&self, frame: usize) -> u64 {
        if frame < self.entries.len() {
            self.entries[frame].timestamp_ms
        } else {
            let last = self.entries[self.entries.len() - 1].timestamp_ms;
            last + self.fps.period_ms().round().max(1.0) as u64
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Manifest("empty manifest".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MAGIC) {
            return Err(Error::Manifest(format!("missing `{MAGIC}` header")));
        }
        match parts.next() {
            Some("v1") => {}
            Some(v) => return Err(Error::Version(v.to_string())),
            None => return Err(Error::Manifest("missing version".into())),
        }
        let fps = parts
            .next()
            .and_then(|f| f.strip_prefix("fps="))
            .and_then(|f| f.split_once('/'))
            .and_then(|(n, d)| Some((n.parse().ok()?, d.parse().ok()?)))
            .ok_or_else(|| Error::Manifest("expected fps=<num>/<den>".into()))?;
        let fps = FrameRate::new(fps.0, fps.1)?;

        let mut entries = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (ts, path) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::parse(idx + 1, "expected `<timestamp_ms> <path>`"))?;
            let timestamp_ms = ts
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("bad timestamp `{ts}`")))?;
            entries.push(ManifestEntry {
                timestamp_ms,
                frame_path: PathBuf::from(path.trim()),
            });
        }
        FrameManifest::new(entries, fps)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} v1 fps={}/{}\n", self.fps.num, self.fps.den);
        for e in &self.entries {
            let _ = writeln!(out, "{} {}", e.timestamp_ms, e.frame_path.display());
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FrameManifest::parse(&text)
    }
}

pub(crate) fn frame_timestamp_ms(k: usize, fps: FrameRate) -> u64 {
    (k as f64 * fps.period_ms()).round() as u64
}
