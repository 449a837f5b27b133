//! Line-oriented signature records.
//!
//! ```text
//! ndvd-sig v1 <video_id> <n_shots>
//! DUR <ms> ... <ms>
//! COL <11 percentages>                 (one per shot)
//! TEX <11 probabilities> | <11 bits>   (one per shot)
//! ```
//!
//! An index file is a sequence of such records. Reals are written with six
//! decimals.

use std::fmt::Write as _;
use std::path::Path;

use crate::color::{ColorSignature, N_COLOR_CONCEPTS};
use crate::error::{Error, Result};
use crate::matcher::{ShotSignature, VideoSignature};
use crate::texture::{TextureSignature, N_TEXTURE_CONCEPTS};

const MAGIC: &str = "ndvd-sig";

/// Color percentages written at six decimals may miss 100 by a few 1e-6.
const COLOR_SUM_TOLERANCE: f64 = 1e-4;

pub fn write_signature(sig: &VideoSignature) -> String {
    let mut out = format!("{MAGIC} v1 {} {}\nDUR", sig.video_id(), sig.len());
    for d in sig.durations() {
        let _ = write!(out, " {d}");
    }
    out.push('\n');
    for shot in sig.shots() {
        out.push_str("COL");
        for p in shot.color.pct {
            let _ = write!(out, " {p:.6}");
        }
        out.push_str("\nTEX");
        for p in shot.texture.prob {
            let _ = write!(out, " {p:.6}");
        }
        out.push_str(" |");
        for b in shot.texture.present {
            let _ = write!(out, " {}", u8::from(b));
        }
        out.push('\n');
    }
    out
}

pub fn write_signatures<'a>(sigs: impl IntoIterator<Item = &'a VideoSignature>) -> String {
    sigs.into_iter().map(write_signature).collect()
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        loop {
            let (i, l) = self.inner.next()?;
            if !l.trim().is_empty() {
                return Some((i + 1, l));
            }
        }
    }

    fn at_end(&mut self) -> bool {
        while let Some((_, l)) = self.inner.peek() {
            if l.trim().is_empty() {
                self.inner.next();
            } else {
                return false;
            }
        }
        true
    }

    fn expect(&mut self, tag: &str) -> Result<(usize, Vec<&'a str>)> {
        let (ln, line) = self
            .next_line()
            .ok_or_else(|| Error::parse(0, format!("unexpected end of record, expected {tag}")))?;
        let mut fields = line.split_whitespace();
        if fields.next() != Some(tag) {
            return Err(Error::parse(ln, format!("expected `{tag}` line")));
        }
        Ok((ln, fields.collect()))
    }
}

fn reals<const K: usize>(ln: usize, what: &str, fields: &[&str]) -> Result<[f64; K]> {
    if fields.len() != K {
        return Err(Error::parse(
            ln,
            format!("{what} needs {K} values, found {}", fields.len()),
        ));
    }
    let mut out = [0.0; K];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f
            .parse()
            .map_err(|_| Error::parse(ln, format!("malformed number `{f}`")))?;
    }
    Ok(out)
}

fn read_record(lines: &mut Lines<'_>) -> Result<VideoSignature> {
    let (ln, header) = lines
        .next_line()
        .ok_or_else(|| Error::parse(0, "empty signature"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.first() != Some(&MAGIC) {
        return Err(Error::parse(ln, "missing `ndvd-sig` header"));
    }
    match h.get(1) {
        Some(&"v1") => {}
        other => return Err(Error::Version(other.unwrap_or(&"").to_string())),
    }
    if h.len() != 4 {
        return Err(Error::parse(ln, "header needs a video id and a shot count"));
    }
    let id = h[2];
    let n: usize = h[3]
        .parse()
        .map_err(|_| Error::parse(ln, "malformed shot count"))?;

    let (ln, dur) = lines.expect("DUR")?;
    if dur.len() != n {
        return Err(Error::parse(
            ln,
            format!("expected {n} durations, found {}", dur.len()),
        ));
    }
    let durations: Vec<u64> = dur
        .iter()
        .map(|d| {
            d.parse()
                .map_err(|_| Error::parse(ln, format!("malformed duration `{d}`")))
        })
        .collect::<Result<_>>()?;

    let mut shots = Vec::with_capacity(n);
    for duration_ms in durations {
        let (ln, col) = lines.expect("COL")?;
        let pct: [f64; N_COLOR_CONCEPTS] = reals(ln, "COL", &col)?;
        let color = ColorSignature::with_tolerance(pct, COLOR_SUM_TOLERANCE)
            .map_err(|e| Error::parse(ln, e.to_string()))?;

        let (ln, tex) = lines.expect("TEX")?;
        let bar = tex
            .iter()
            .position(|f| *f == "|")
            .ok_or_else(|| Error::parse(ln, "TEX line needs `|` between probabilities and bits"))?;
        let prob: [f64; N_TEXTURE_CONCEPTS] = reals(ln, "TEX probabilities", &tex[..bar])?;
        if prob.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::parse(ln, "texture probability outside [0,1]"));
        }
        let bits = &tex[bar + 1..];
        if bits.len() != N_TEXTURE_CONCEPTS {
            return Err(Error::parse(
                ln,
                format!(
                    "TEX bits needs {N_TEXTURE_CONCEPTS} values, found {}",
                    bits.len()
                ),
            ));
        }
        let mut present = [false; N_TEXTURE_CONCEPTS];
        for (p, b) in present.iter_mut().zip(bits) {
            *p = match *b {
                "0" => false,
                "1" => true,
                _ => return Err(Error::parse(ln, format!("bit must be 0 or 1, got `{b}`"))),
            };
        }
        if !present.iter().any(|p| *p) {
            return Err(Error::parse(ln, "no texture concept present"));
        }
        shots.push(ShotSignature {
            duration_ms,
            color,
            texture: TextureSignature { present, prob },
        });
    }
    VideoSignature::new(id, shots)
}

pub fn read_signature(text: &str) -> Result<VideoSignature> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
    };
    let sig = read_record(&mut lines)?;
    if !lines.at_end() {
        return Err(Error::parse(0, "trailing content after signature"));
    }
    Ok(sig)
}

/// Reads every record of an index file.
pub fn read_signatures(text: &str) -> Result<Vec<VideoSignature>> {
    let mut lines = Lines {
        inner: text.lines().enumerate().peekable(),
    };
    let mut out = Vec::new();
    while !lines.at_end() {
        out.push(read_record(&mut lines)?);
    }
    Ok(out)
}

pub fn read_signature_file(path: &Path) -> Result<Vec<VideoSignature>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_signatures(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nine_shot_clip() -> VideoSignature {
        let durations = [1170, 2610, 1020, 8320, 19640, 20220, 23230, 27310, 16480];
        let mut pct = [0.0; 11];
        pct[0] = 100.0;
        let shots = durations
            .iter()
            .map(|&d| ShotSignature {
                duration_ms: d,
                color: ColorSignature::new(pct).unwrap(),
                texture: TextureSignature::from_concepts(&[
                    crate::texture::TextureConceptId::Uniform,
                ]),
            })
            .collect();
        VideoSignature::new("clip", shots).unwrap()
    }

    #[test]
    fn duration_line() {
        let text = write_signature(&nine_shot_clip());
        let dur: Vec<&str> = text.lines().filter(|l| l.starts_with("DUR")).collect();
        assert_eq!(
            dur,
            vec!["DUR 1170 2610 1020 8320 19640 20220 23230 27310 16480"]
        );
        assert!(text.starts_with("ndvd-sig v1 clip 9\n"));
        assert_eq!(read_signature(&text).unwrap(), nine_shot_clip());
    }

    #[test]
    fn errors() {
        let text = write_signature(&nine_shot_clip());
        assert!(matches!(
            read_signature(&text.replace("v1", "v2")),
            Err(Error::Version(_))
        ));
        let short = text.replacen("COL 100.000000 ", "COL ", 1);
        assert!(matches!(read_signature(&short), Err(Error::Parse { .. })));
        assert!(read_signature(&text.replacen("DUR 1170", "DUR x", 1)).is_err());
        assert!(read_signature(&text.replacen("| 0", "| 2", 1)).is_err());
        assert!(read_signature(&format!("{text}junk\n")).is_err());
        assert!(read_signature("").is_err());
    }

    #[test]
    fn multiple_records() {
        let a = nine_shot_clip();
        let text = write_signatures([&a, &a]);
        assert_eq!(read_signatures(&text).unwrap(), vec![a.clone(), a]);
        assert!(read_signatures("").unwrap().is_empty());
    }

    fn arb_shot() -> impl Strategy<Value = ShotSignature> {
        (
            1u64..100_000,
            proptest::collection::vec(0u32..1000, 11),
            proptest::array::uniform11(0u32..=1_000_000),
            0usize..11,
        )
            .prop_map(|(d, w, probs, forced)| {
                let mut w = w;
                w[0] += 1;
                let total: u32 = w.iter().sum();
                // percentages already at six decimals; the last absorbs rounding
                let mut pct = [0.0; 11];
                let mut acc = 0.0;
                for k in 0..10 {
                    pct[k] = (w[k] as f64 * 100.0 / total as f64 * 1e6).round() / 1e6;
                    acc += pct[k];
                }
                pct[10] = ((100.0 - acc) * 1e6).round().max(0.0) / 1e6;
                let prob = probs.map(|p| p as f64 / 1e6);
                let mut present = prob.map(|p| p >= 0.5);
                present[forced] = true;
                ShotSignature {
                    duration_ms: d,
                    color: ColorSignature::with_tolerance(pct, 1e-4).unwrap(),
                    texture: TextureSignature { present, prob },
                }
            })
    }

    proptest! {
        #[test]
        fn round_trip(shots in proptest::collection::vec(arb_shot(), 1..8)) {
            let sig = VideoSignature::new("v", shots).unwrap();
            let text = write_signature(&sig);
            let back = read_signature(&text).unwrap();
            prop_assert_eq!(write_signature(&back), text);
            prop_assert_eq!(back.durations(), sig.durations());
            for (a, b) in back.shots().iter().zip(sig.shots()) {
                prop_assert_eq!(a.texture.present, b.texture.present);
                for k in 0..11 {
                    prop_assert!((a.color.pct[k] - b.color.pct[k]).abs() < 1e-9);
                    prop_assert!((a.texture.prob[k] - b.texture.prob[k]).abs() < 1e-9);
                }
            }
        }
    }
}
