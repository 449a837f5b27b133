//! Perceptual color concepts.
//!
//! Pixels go from RGB to a hue/value/chroma triple and then through a fixed
//! decision table to one of eleven color concepts:
//!
//! | concept | rule                                   |
//! |---------|----------------------------------------|
//! | black   | v < 15                                 |
//! | white   | c < 10 and v > 85                      |
//! | grey    | c < 10 and 15 <= v <= 85               |
//! | red     | h in [345, 360) or [0, 20)             |
//! | skin    | h in [20, 40) and c < 45               |
//! | orange  | h in [20, 45), not skin                |
//! | yellow  | h in [45, 70)                          |
//! | green   | h in [70, 160)                         |
//! | cyan    | h in [160, 200)                        |
//! | blue    | h in [200, 260)                        |
//! | purple  | h in [260, 345)                        |
//!
//! Rules are applied top to bottom.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::{luma, Frame};

pub const N_COLOR_CONCEPTS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ColorConceptId {
    Black,
    Blue,
    Cyan,
    Green,
    Grey,
    Orange,
    Purple,
    Red,
    Skin,
    White,
    Yellow,
}

impl ColorConceptId {
    pub const ALL: [ColorConceptId; N_COLOR_CONCEPTS] = [
        ColorConceptId::Black,
        ColorConceptId::Blue,
        ColorConceptId::Cyan,
        ColorConceptId::Green,
        ColorConceptId::Grey,
        ColorConceptId::Orange,
        ColorConceptId::Purple,
        ColorConceptId::Red,
        ColorConceptId::Skin,
        ColorConceptId::White,
        ColorConceptId::Yellow,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ColorConceptId::Black => "black",
            ColorConceptId::Blue => "blue",
            ColorConceptId::Cyan => "cyan",
            ColorConceptId::Green => "green",
            ColorConceptId::Grey => "grey",
            ColorConceptId::Orange => "orange",
            ColorConceptId::Purple => "purple",
            ColorConceptId::Red => "red",
            ColorConceptId::Skin => "skin",
            ColorConceptId::White => "white",
            ColorConceptId::Yellow => "yellow",
        }
    }

    pub fn is_achromatic(self) -> bool {
        matches!(
            self,
            ColorConceptId::Black | ColorConceptId::Grey | ColorConceptId::White
        )
    }
}

impl fmt::Display for ColorConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ColorConceptId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown color concept `{s}`")))
    }
}

/// Hue in degrees [0,360), value and chroma in [0,100].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvcPixel {
    pub h: f64,
    pub v: f64,
    pub c: f64,
}

/// Hexcone hue, luma value and range chroma.
pub fn rgb_to_hvc(r: u8, g: u8, b: u8) -> HvcPixel {
    let max = r.max(g).max(b) as f64;
    let min = r.min(g).min(b) as f64;
    let delta = max - min;
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let h = if delta == 0.0 {
        0.0
    } else if max == rf {
        60.0 * ((gf - bf) / delta).rem_euclid(6.0)
    } else if max == gf {
        60.0 * ((bf - rf) / delta + 2.0)
    } else {
        60.0 * ((rf - gf) / delta + 4.0)
    };
    HvcPixel {
        h: if h >= 360.0 { h - 360.0 } else { h },
        v: luma(r, g, b) as f64 / 255.0 * 100.0,
        c: delta / 255.0 * 100.0,
    }
}

pub fn map_pixel_to_concept(p: HvcPixel) -> ColorConceptId {
    use ColorConceptId::*;
    if p.v < 15.0 {
        return Black;
    }
    if p.c < 10.0 {
        return if p.v > 85.0 { White } else { Grey };
    }
    let h = p.h;
    if !(20.0..345.0).contains(&h) {
        Red
    } else if h < 40.0 && p.c < 45.0 {
        Skin
    } else if h < 45.0 {
        Orange
    } else if h < 70.0 {
        Yellow
    } else if h < 160.0 {
        Green
    } else if h < 200.0 {
        Cyan
    } else if h < 260.0 {
        Blue
    } else {
        Purple
    }
}

pub fn rgb_concept(rgb: [u8; 3]) -> ColorConceptId {
    map_pixel_to_concept(rgb_to_hvc(rgb[0], rgb[1], rgb[2]))
}

/// Percentage of a shot's pixels falling in each color concept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorSignature {
    pub pct: [f64; N_COLOR_CONCEPTS],
}

impl ColorSignature {
    pub fn new(pct: [f64; N_COLOR_CONCEPTS]) -> Result<Self> {
        Self::with_tolerance(pct, 1e-6)
    }

    /// Like [`ColorSignature::new`] with a caller-chosen tolerance on the sum,
    /// for values that went through a fixed-precision text encoding.
    pub fn with_tolerance(pct: [f64; N_COLOR_CONCEPTS], tol: f64) -> Result<Self> {
        if pct
            .iter()
            .any(|p| !p.is_finite() || *p < 0.0 || *p > 100.0 + tol)
        {
            return Err(Error::InvalidArgument(
                "color percentage outside [0,100]".into(),
            ));
        }
        let sum: f64 = pct.iter().sum();
        if (sum - 100.0).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "color percentages sum to {sum}, expected 100"
            )));
        }
        Ok(ColorSignature { pct })
    }

    pub fn get(&self, c: ColorConceptId) -> f64 {
        self.pct[c.index()]
    }

    pub fn probabilities(&self) -> [f64; N_COLOR_CONCEPTS] {
        self.pct.map(|p| p / 100.0)
    }
}

pub fn frame_concept_counts(frame: &Frame) -> [u64; N_COLOR_CONCEPTS] {
    let mut counts = [0u64; N_COLOR_CONCEPTS];
    for px in frame.pixels() {
        counts[rgb_concept(px).index()] += 1;
    }
    counts
}

/// Averages per-frame concept percentages uniformly over a shot's frames.
pub fn shot_color_signature<I>(frames: I) -> Result<ColorSignature>
where
    I: IntoIterator,
    I::Item: Borrow<Frame>,
{
    let mut acc = [0f64; N_COLOR_CONCEPTS];
    let mut n = 0usize;
    for frame in frames {
        let frame = frame.borrow();
        let total = (frame.width() * frame.height()) as f64;
        for (a, c) in acc.iter_mut().zip(frame_concept_counts(frame)) {
            *a += c as f64 / total;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("shot frames"));
    }
    ColorSignature::new(acc.map(|a| a / n as f64 * 100.0))
}
