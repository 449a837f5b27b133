//! Flat `key = value` configuration covering every tunable in the pipeline.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::SegmentationConfig;
use crate::matcher::{MatchConfig, WindowSize};
use crate::texture::{GaborConfig, DEFAULT_KKT_TOLERANCE, DEFAULT_MAX_ITER};

/// RBF width for texture training; `Auto` uses the inverse median squared
/// distance between training vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSetting {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmSettings {
    pub gamma: GammaSetting,
    pub c: f64,
    pub kkt_tol: f64,
    pub max_iter: usize,
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings {
            gamma: GammaSetting::Auto,
            c: 100.0,
            kkt_tol: DEFAULT_KKT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub segmentation: SegmentationConfig,
    pub gabor: GaborConfig,
    pub tau_present: f64,
    pub svm: SvmSettings,
    pub matching: MatchConfig,
    /// Largest fraction of query shots allowed to stay unmatched.
    pub mismatch_threshold: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            segmentation: SegmentationConfig::default(),
            gabor: GaborConfig::default(),
            tau_present: 0.5,
            svm: SvmSettings::default(),
            matching: MatchConfig::default(),
            mismatch_threshold: 0.4,
        }
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::parse(line, format!("bad value `{v}` for `{key}`")))
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.segmentation.validate()?;
        crate::texture::GaborBank::from_config(&self.gabor)?;
        if !(self.tau_present > 0.0 && self.tau_present < 1.0) {
            return Err(Error::InvalidArgument(
                "texture.tau_present must be in (0,1)".into(),
            ));
        }
        if let GammaSetting::Fixed(g) = self.svm.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument("svm.gamma must be > 0".into()));
            }
        }
        if !(self.svm.c > 0.0 && self.svm.kkt_tol > 0.0 && self.svm.max_iter > 0) {
            return Err(Error::InvalidArgument(
                "svm settings must be positive".into(),
            ));
        }
        self.matching.validate()?;
        if !(0.0..=1.0).contains(&self.mismatch_threshold) {
            return Err(Error::InvalidArgument(
                "query.mismatch_threshold must be in [0,1]".into(),
            ));
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let ln = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(ln, "expected `key = value`"))?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "seg.bins" => cfg.segmentation.bins = num(ln, key, v)?,
                "seg.alpha" => cfg.segmentation.alpha = num(ln, key, v)?,
                "seg.floor" => cfg.segmentation.floor = num(ln, key, v)?,
                "seg.energy_floor" => {
                    cfg.segmentation.energy_floor = match v {
                        "off" | "none" => None,
                        _ => Some(num(ln, key, v)?),
                    }
                }
                "texture.kernel_size" => cfg.gabor.kernel_size = num(ln, key, v)?,
                "texture.f_min" => cfg.gabor.f_min = num(ln, key, v)?,
                "texture.f_max" => cfg.gabor.f_max = num(ln, key, v)?,
                "texture.sigma_factor" => cfg.gabor.sigma_factor = num(ln, key, v)?,
                "texture.tau_present" => cfg.tau_present = num(ln, key, v)?,
                "svm.gamma" => {
                    cfg.svm.gamma = match v {
                        "auto" => GammaSetting::Auto,
                        _ => GammaSetting::Fixed(num(ln, key, v)?),
                    }
                }
                "svm.c" => cfg.svm.c = num(ln, key, v)?,
                "svm.kkt_tol" => cfg.svm.kkt_tol = num(ln, key, v)?,
                "svm.max_iter" => cfg.svm.max_iter = num(ln, key, v)?,
                "color.q_step" => cfg.matching.q_step = num(ln, key, v)?,
                "match.window" => {
                    cfg.matching.window = match v {
                        "min" => WindowSize::Min,
                        _ => WindowSize::Shots(num(ln, key, v)?),
                    }
                }
                "match.step" => cfg.matching.step = num(ln, key, v)?,
                "match.tau_abs_ms" => cfg.matching.tau_abs_ms = num(ln, key, v)?,
                "match.tau_rel" => cfg.matching.tau_rel = num(ln, key, v)?,
                "match.lambda_path" => cfg.matching.lambda_path = num(ln, key, v)?,
                "match.w_col" => cfg.matching.w_col = num(ln, key, v)?,
                "match.w_tex" => cfg.matching.w_tex = num(ln, key, v)?,
                "query.mismatch_threshold" => cfg.mismatch_threshold = num(ln, key, v)?,
                _ => return Err(Error::parse(ln, format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Every key with its current value; parses back to `self`.
    pub fn to_text(&self) -> String {
        let s = &self.segmentation;
        let g = &self.gabor;
        let m = &self.matching;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("seg.bins", s.bins.to_string());
        kv("seg.alpha", s.alpha.to_string());
        kv("seg.floor", s.floor.to_string());
        kv(
            "seg.energy_floor",
            s.energy_floor.map_or("off".into(), |f| f.to_string()),
        );
        kv("texture.kernel_size", g.kernel_size.to_string());
        kv("texture.f_min", g.f_min.to_string());
        kv("texture.f_max", g.f_max.to_string());
        kv("texture.sigma_factor", g.sigma_factor.to_string());
        kv("texture.tau_present", self.tau_present.to_string());
        kv(
            "svm.gamma",
            match self.svm.gamma {
                GammaSetting::Auto => "auto".into(),
                GammaSetting::Fixed(x) => x.to_string(),
            },
        );
        kv("svm.c", self.svm.c.to_string());
        kv("svm.kkt_tol", self.svm.kkt_tol.to_string());
        kv("svm.max_iter", self.svm.max_iter.to_string());
        kv("color.q_step", m.q_step.to_string());
        kv("match.window", m.window.to_string());
        kv("match.step", m.step.to_string());
        kv("match.tau_abs_ms", m.tau_abs_ms.to_string());
        kv("match.tau_rel", m.tau_rel.to_string());
        kv("match.lambda_path", m.lambda_path.to_string());
        kv("match.w_col", m.w_col.to_string());
        kv("match.w_tex", m.w_tex.to_string());
        kv(
            "query.mismatch_threshold",
            self.mismatch_threshold.to_string(),
        );
        out
    }
}
