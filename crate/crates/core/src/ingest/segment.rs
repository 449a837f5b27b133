//! Abrupt-cut shot segmentation from grey-level histogram differences.

use std::borrow::Borrow;

use super::frame::Frame;
use super::manifest::FrameManifest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationConfig {
    /// Histogram bins; must divide 256.
    pub bins: usize,
    /// Multiplier on the standard deviation of consecutive differences.
    pub alpha: f64,
    /// Absolute floor a difference must exceed to count as a cut.
    pub floor: f64,
    /// Optional veto: a cut also needs the mean squared grey difference
    /// (grey scaled to [0,1]) to exceed this value.
    pub energy_floor: Option<f64>,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            bins: 64,
            alpha: 3.0,
            floor: 0.15,
            energy_floor: None,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 || 256 % self.bins != 0 {
            return Err(Error::InvalidArgument(format!(
                "histogram bins must divide 256, got {}",
                self.bins
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidArgument(
                "alpha must be finite and >= 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::InvalidArgument("floor must lie in [0,1]".into()));
        }
        Ok(())
    }
}

/// A maximal run of frames between two cuts. Frame indices are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shot {
    pub start_frame: usize,
    pub end_frame: usize,
    pub duration_ms: u64,
}

impl Shot {
    pub fn frame_count(&self) -> usize {
        self.end_frame - self.start_frame + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurationSignature {
    pub durations_ms: Vec<u64>,
}

fn grey_histogram(frame: &Frame, bins: usize) -> Vec<u32> {
    let shift = (256 / bins).trailing_zeros();
    let mut hist = vec![0u32; bins];
    for &g in frame.grey() {
        hist[(g as usize) >> shift] += 1;
    }
    hist
}

fn check_dims(a: &Frame, b: &Frame) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            a_w: a.width(),
            a_h: a.height(),
            b_w: b.width(),
            b_h: b.height(),
        });
    }
    Ok(())
}

fn histogram_distance(ha: &[u32], hb: &[u32], pixels: usize) -> f64 {
    let l1: u64 = ha
        .iter()
        .zip(hb)
        .map(|(&x, &y)| (x as i64 - y as i64).unsigned_abs())
        .sum();
    0.5 * l1 as f64 / pixels as f64
}

/// Half the L1 distance between the frames' grey histograms, normalised by
/// pixel count. Always in [0,1].
pub fn frame_difference(a: &Frame, b: &Frame, bins: usize) -> Result<f64> {
    check_dims(a, b)?;
    if bins == 0 || 256 % bins != 0 {
        return Err(Error::InvalidArgument(format!(
            "histogram bins must divide 256, got {bins}"
        )));
    }
    let ha = grey_histogram(a, bins);
    let hb = grey_histogram(b, bins);
    Ok(histogram_distance(&ha, &hb, a.grey().len()))
}

/// Mean squared grey difference with grey scaled to [0,1].
pub fn difference_energy(a: &Frame, b: &Frame) -> Result<f64> {
    check_dims(a, b)?;
    let sum: f64 = a
        .grey()
        .iter()
        .zip(b.grey())
        .map(|(&x, &y)| {
            let d = (x as f64 - y as f64) / 255.0;
            d * d
        })
        .sum();
    Ok(sum / a.grey().len() as f64)
}

/// Consecutive-frame measurements collected in one pass over a frame stream.
#[derive(Debug, Clone, Default)]
pub struct FrameDifferences {
    /// `hist[i]` is the histogram difference between frames `i` and `i + 1`.
    pub hist: Vec<f64>,
    /// Difference energies, filled only when the energy veto is enabled.
    pub energy: Vec<f64>,
    pub n_frames: usize,
}

impl FrameDifferences {
    pub fn compute<I>(frames: I, cfg: &SegmentationConfig) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Borrow<Frame>,
    {
        cfg.validate()?;
        let mut out = FrameDifferences::default();
        let mut prev: Option<(I::Item, Vec<u32>)> = None;
        for frame in frames {
            let hist = grey_histogram(frame.borrow(), cfg.bins);
            if let Some((prev_frame, prev_hist)) = &prev {
                let pf: &Frame = prev_frame.borrow();
                check_dims(pf, frame.borrow())?;
                out.hist
                    .push(histogram_distance(prev_hist, &hist, pf.grey().len()));
                if cfg.energy_floor.is_some() {
                    out.energy.push(difference_energy(pf, frame.borrow())?);
                }
            }
            out.n_frames += 1;
            prev = Some((frame, hist));
        }
        if out.n_frames == 0 {
            return Err(Error::Empty("frame stream"));
        }
        Ok(out)
    }

    /// Indices `i` such that a cut lies between frames `i` and `i + 1`.
    pub fn cuts(&self, cfg: &SegmentationConfig) -> Vec<usize> {
        if self.hist.is_empty() {
            return Vec::new();
        }
        let n = self.hist.len() as f64;
        let mean = self.hist.iter().sum::<f64>() / n;
        let var = self
            .hist
            .iter()
            .map(|d| (d - mean) * (d - mean))
            .sum::<f64>()
            / n;
        let threshold = mean + cfg.alpha * var.sqrt();
        self.hist
            .iter()
            .enumerate()
            .filter(|&(i, &d)| {
                d > threshold
                    && d > cfg.floor
                    && cfg.energy_floor.is_none_or(|floor| self.energy[i] > floor)
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// Turns cut positions into shots that partition `manifest`'s frame range.
pub fn shots_from_cuts(manifest: &FrameManifest, cuts: &[usize]) -> Vec<Shot> {
    let mut shots = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    let ends = cuts
        .iter()
        .copied()
        .chain(std::iter::once(manifest.len() - 1));
    for end in ends {
        shots.push(Shot {
            start_frame: start,
            end_frame: end,
            duration_ms: manifest.boundary_time(end + 1) - manifest.boundary_time(start),
        });
        start = end + 1;
    }
    shots
}

/// Splits a frame stream into shots at abrupt cuts.
///
/// A cut is declared between frames `i` and `i + 1` when their histogram
/// difference exceeds both `mean + alpha * std` over all consecutive
/// differences and the absolute floor.
pub fn detect_shot_boundaries<I>(
    manifest: &FrameManifest,
    frames: I,
    cfg: &SegmentationConfig,
) -> Result<Vec<Shot>>
where
    I: IntoIterator,
    I::Item: Borrow<Frame>,
{
    let diffs = FrameDifferences::compute(frames, cfg)?;
    if diffs.n_frames != manifest.len() {
        return Err(Error::Manifest(format!(
            "manifest lists {} frames but the stream has {}",
            manifest.len(),
            diffs.n_frames
        )));
    }
    Ok(shots_from_cuts(manifest, &diffs.cuts(cfg)))
}

pub fn duration_signature(shots: &[Shot]) -> Result<DurationSignature> {
    if shots.is_empty() {
        return Err(Error::Empty("shot list"));
    }
    Ok(DurationSignature {
        durations_ms: shots.iter().map(|s| s.duration_ms).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::manifest::{FrameManifest, FrameRate, ManifestEntry};
    use proptest::prelude::*;
    use std::path::PathBuf;

    fn grey_frame(values: &[u8]) -> Frame {
        Frame::from_grey(values.len(), 1, values.to_vec()).unwrap()
    }

    fn solid(v: u8) -> Frame {
        Frame::from_grey(8, 8, vec![v; 64]).unwrap()
    }

    fn fps25() -> FrameRate {
        FrameRate::new(25, 1).unwrap()
    }

    #[test]
    fn difference_examples() {
        let black = solid(0);
        let white = solid(255);
        assert_eq!(frame_difference(&black, &black, 64).unwrap(), 0.0);
        assert_eq!(frame_difference(&black, &white, 64).unwrap(), 1.0);
        let a = grey_frame(&[0, 0]);
        let b = grey_frame(&[0, 255]);
        assert_eq!(frame_difference(&a, &b, 64).unwrap(), 0.5);
    }

    #[test]
    fn difference_errors() {
        assert!(frame_difference(&solid(0), &grey_frame(&[0]), 64).is_err());
        assert!(frame_difference(&solid(0), &solid(0), 3).is_err());
    }

    #[test]
    fn constant_stream_is_one_shot() {
        let frames = vec![solid(90); 100];
        let m = FrameManifest::uniform(100, fps25()).unwrap();
        let shots = detect_shot_boundaries(&m, &frames, &SegmentationConfig::default()).unwrap();
        assert_eq!(
            shots,
            vec![Shot {
                start_frame: 0,
                end_frame: 99,
                duration_ms: 4000
            }]
        );
    }

    #[test]
    fn single_hard_cut() {
        let frames: Vec<Frame> = (0..100)
            .map(|i| solid(if i < 50 { 0 } else { 255 }))
            .collect();
        let m = FrameManifest::uniform(100, fps25()).unwrap();
        let shots = detect_shot_boundaries(&m, &frames, &SegmentationConfig::default()).unwrap();
        assert_eq!(shots.len(), 2);
        assert_eq!((shots[0].start_frame, shots[0].end_frame), (0, 49));
        assert_eq!((shots[1].start_frame, shots[1].end_frame), (50, 99));
        assert_eq!(shots[0].duration_ms, 2000);
    }

    #[test]
    fn three_scene_stream() {
        let frames: Vec<Frame> = (0..100)
            .map(|i| {
                solid(match i {
                    0..30 => 20,
                    30..70 => 140,
                    _ => 240,
                })
            })
            .collect();
        let m = FrameManifest::uniform(100, fps25()).unwrap();
        let shots = detect_shot_boundaries(&m, &frames, &SegmentationConfig::default()).unwrap();
        let starts: Vec<usize> = shots.iter().map(|s| s.start_frame).collect();
        assert_eq!(starts, vec![0, 30, 70]);
    }

    #[test]
    fn energy_veto_suppresses_cut() {
        // Histograms differ completely but the pixel-wise change is tiny.
        let a = grey_frame(&[100; 16]);
        let b = grey_frame(&[104; 16]);
        let frames: Vec<Frame> = (0..40)
            .map(|i| if i < 20 { a.clone() } else { b.clone() })
            .collect();
        let m = FrameManifest::uniform(40, fps25()).unwrap();
        let mut cfg = SegmentationConfig::default();
        assert_eq!(detect_shot_boundaries(&m, &frames, &cfg).unwrap().len(), 2);
        cfg.energy_floor = Some(0.01);
        assert_eq!(detect_shot_boundaries(&m, &frames, &cfg).unwrap().len(), 1);
    }

    #[test]
    fn stream_length_must_match_manifest() {
        let m = FrameManifest::uniform(3, fps25()).unwrap();
        let frames = vec![solid(0); 2];
        assert!(detect_shot_boundaries(&m, &frames, &SegmentationConfig::default()).is_err());
        let none: Vec<Frame> = Vec::new();
        assert!(matches!(
            detect_shot_boundaries(&m, &none, &SegmentationConfig::default()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn durations_from_planted_boundaries() {
        // cuts at 0 / 500 / 1500 ms, video ends at 3000 ms; 10 ms frames
        let entries = (0..300)
            .map(|k| ManifestEntry {
                timestamp_ms: 10 * k,
                frame_path: PathBuf::from(format!("{k}")),
            })
            .collect();
        let m = FrameManifest::new(entries, FrameRate::new(100, 1).unwrap()).unwrap();
        let shots = shots_from_cuts(&m, &[49, 149]);
        assert_eq!(
            duration_signature(&shots).unwrap().durations_ms,
            vec![500, 1000, 1500]
        );
    }

    #[test]
    fn single_shot_duration() {
        let m = FrameManifest::uniform(25, fps25()).unwrap();
        let shots = shots_from_cuts(&m, &[]);
        assert_eq!(duration_signature(&shots).unwrap().durations_ms, vec![1000]);
        assert!(duration_signature(&[]).is_err());
    }

    #[test]
    fn reference_nine_value_signature() {
        // Cut times reproducing the nine-shot, two-minute example clip.
        let expected = [1170u64, 2610, 1020, 8320, 19640, 20220, 23230, 27310, 16480];
        let entries = (0..12_000)
            .map(|k| ManifestEntry {
                timestamp_ms: 10 * k,
                frame_path: PathBuf::from(format!("{k}")),
            })
            .collect();
        let m = FrameManifest::new(entries, FrameRate::new(100, 1).unwrap()).unwrap();
        let mut cuts = Vec::new();
        let mut t = 0;
        for d in &expected[..8] {
            t += d;
            cuts.push((t / 10) as usize - 1);
        }
        let sig = duration_signature(&shots_from_cuts(&m, &cuts)).unwrap();
        assert_eq!(sig.durations_ms, expected);
    }

    fn frames_strategy() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
        (1usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(any::<u8>(), n),
                prop::collection::vec(any::<u8>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn difference_is_symmetric_and_bounded((a, b) in frames_strategy()) {
            let fa = grey_frame(&a);
            let fb = grey_frame(&b);
            let dab = frame_difference(&fa, &fb, 64).unwrap();
            let dba = frame_difference(&fb, &fa, 64).unwrap();
            prop_assert_eq!(dab, dba);
            prop_assert!((0.0..=1.0).contains(&dab));
            let ha = grey_histogram(&fa, 64);
            let hb = grey_histogram(&fb, 64);
            prop_assert_eq!(dab == 0.0, ha == hb);
        }

        #[test]
        fn shots_partition_frames(n in 1usize..200, raw in prop::collection::btree_set(0usize..199, 0..10)) {
            let m = FrameManifest::uniform(n, fps25()).unwrap();
            let cuts: Vec<usize> = raw.into_iter().filter(|&c| c + 1 < n).collect();
            let shots = shots_from_cuts(&m, &cuts);
            prop_assert_eq!(shots[0].start_frame, 0);
            prop_assert_eq!(shots.last().unwrap().end_frame, n - 1);
            for w in shots.windows(2) {
                prop_assert_eq!(w[0].end_frame + 1, w[1].start_frame);
            }
            let total: u64 = shots.iter().map(|s| s.duration_ms).sum();
            let span = m.boundary_time(n) - m.timestamp(0);
            prop_assert_eq!(total, span);
            prop_assert!(shots.iter().all(|s| s.duration_ms > 0));
        }
    }
}
