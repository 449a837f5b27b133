//! N-gram scan over shot signatures, scored by exhaustivity and specificity.

mod pair;
mod scan;

pub use pair::{
    cpt_match_kl, duration_match, shot_pair_match, PairScore, PreparedQueryShot, KL_EPSILON,
};
pub use scan::{
    exhaustivity, ngram_scan, rank_results, relevance, specificity, MatchResult, ScanAnchor,
};

use std::fmt;

use crate::color::ColorSignature;
use crate::error::{Error, Result};
use crate::lattice::{total_units, DEFAULT_Q_STEP};
use crate::texture::TextureSignature;

#[derive(Debug, Clone, PartialEq)]
pub struct ShotSignature {
    pub duration_ms: u64,
    pub color: ColorSignature,
    pub texture: TextureSignature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoSignature {
    video_id: String,
    shots: Vec<ShotSignature>,
}

impl VideoSignature {
    pub fn new(video_id: impl Into<String>, shots: Vec<ShotSignature>) -> Result<Self> {
        let video_id = video_id.into();
        if video_id.is_empty() || video_id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "video id `{video_id}` must be non-empty without whitespace"
            )));
        }
        if shots.is_empty() {
            return Err(Error::Empty("video signature"));
        }
        if shots.iter().any(|s| s.duration_ms == 0) {
            return Err(Error::InvalidArgument(
                "shot durations must be positive".into(),
            ));
        }
        Ok(VideoSignature { video_id, shots })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn shots(&self) -> &[ShotSignature] {
        &self.shots
    }

    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    pub fn durations(&self) -> Vec<u64> {
        self.shots.iter().map(|s| s.duration_ms).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowSize {
    /// `min(|Q|, |I|)` shots.
    Min,
    Shots(usize),
}

impl fmt::Display for WindowSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowSize::Min => f.write_str("min"),
            WindowSize::Shots(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    pub window: WindowSize,
    pub step: usize,
    pub tau_abs_ms: f64,
    pub tau_rel: f64,
    pub lambda_path: f64,
    pub w_col: f64,
    pub w_tex: f64,
    /// Color quantization step in percent.
    pub q_step: u32,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            window: WindowSize::Min,
            step: 1,
            tau_abs_ms: 80.0,
            tau_rel: 0.05,
            lambda_path: 0.25,
            w_col: 0.5,
            w_tex: 0.5,
            q_step: DEFAULT_Q_STEP,
        }
    }
}

impl MatchConfig {
    /// Settings for long re-broadcast queries.
    pub fn long_query() -> Self {
        MatchConfig {
            window: WindowSize::Shots(200),
            step: 20,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == WindowSize::Shots(0) {
            return Err(Error::InvalidArgument(
                "window must be at least one shot".into(),
            ));
        }
        if self.step == 0 {
            return Err(Error::InvalidArgument(
                "step must be at least one shot".into(),
            ));
        }
        if !(self.tau_abs_ms >= 0.0 && self.tau_rel >= 0.0) {
            return Err(Error::InvalidArgument(
                "duration tolerances must be >= 0".into(),
            ));
        }
        if !(self.lambda_path > 0.0 && self.lambda_path.is_finite()) {
            return Err(Error::InvalidArgument("lambda_path must be > 0".into()));
        }
        if !(self.w_col >= 0.0 && self.w_tex >= 0.0 && (self.w_col + self.w_tex - 1.0).abs() < 1e-9)
        {
            return Err(Error::InvalidArgument(
                "w_col and w_tex must be >= 0 and sum to 1".into(),
            ));
        }
        total_units(self.q_step)?;
        Ok(())
    }

    /// Window length for a query of `m` and an index of `n` shots.
    pub fn effective_window(&self, m: usize, n: usize) -> usize {
        let cap = m.min(n).max(1);
        match self.window {
            WindowSize::Min => cap,
            WindowSize::Shots(w) => w.clamp(1, cap),
        }
    }
}
