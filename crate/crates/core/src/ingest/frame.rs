//! Decoded frames and binary PPM/PGM codecs.

use crate::error::{Error, Result};

/// A decoded RGB frame with its derived 8-bit luma plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    rgb: Vec<u8>,
    grey: Vec<u8>,
}

/// ITU-R BT.601 luma, rounded to the nearest integer.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    // Integer form of round(0.299 R + 0.587 G + 0.114 B).
    let y = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((y + 500) / 1000) as u8
}

impl Frame {
    pub fn from_rgb(width: usize, height: usize, rgb: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(
                "frame dimensions must be positive".into(),
            ));
        }
        if rgb.len() != 3 * width * height {
            return Err(Error::InvalidArgument(format!(
                "rgb buffer has {} bytes, expected {}",
                rgb.len(),
                3 * width * height
            )));
        }
        let grey = rgb
            .chunks_exact(3)
            .map(|p| luma(p[0], p[1], p[2]))
            .collect();
        Ok(Frame {
            width,
            height,
            rgb,
            grey,
        })
    }

    /// Builds a frame from a grey plane; the plane is replicated into all three channels.
    pub fn from_grey(width: usize, height: usize, grey: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(
                "frame dimensions must be positive".into(),
            ));
        }
        if grey.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "grey buffer has {} bytes, expected {}",
                grey.len(),
                width * height
            )));
        }
        let rgb = grey.iter().flat_map(|&v| [v, v, v]).collect();
        Ok(Frame {
            width,
            height,
            rgb,
            grey,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let buf = rgb
            .iter()
            .copied()
            .cycle()
            .take(3 * width * height)
            .collect();
        Frame::from_rgb(width, height, buf)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rgb(&self) -> &[u8] {
        &self.rgb
    }

    pub fn grey(&self) -> &[u8] {
        &self.grey
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.rgb.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Encodes the frame as binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: usize,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' || !(bytes[1] == b'6' || bytes[1] == b'5') {
        return Err(Error::Image("expected P6 or P5 magic".into()));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&c) = bytes.get(pos) {
                        pos += 1;
                        if c == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(Error::Image("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|c| c.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Image("expected a decimal header field".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| Error::Image(format!("header field out of range: {text}")))?;
    }
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Image("missing whitespace after maxval".into())),
    }
    Ok(Header {
        magic: [bytes[0], bytes[1]],
        width: fields[0],
        height: fields[1],
        maxval: fields[2],
        data_offset: pos,
    })
}

/// Decodes a binary PPM (P6) or PGM (P5) image with maxval 255.
pub fn parse_ppm_frame(bytes: &[u8]) -> Result<Frame> {
    let header = parse_header(bytes)?;
    if header.maxval != 255 {
        return Err(Error::Image(format!(
            "maxval must be 255, got {}",
            header.maxval
        )));
    }
    if header.width == 0 || header.height == 0 {
        return Err(Error::Image("zero image dimension".into()));
    }
    let channels = if header.magic[1] == b'6' { 3 } else { 1 };
    let need = header
        .width
        .checked_mul(header.height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Image("image dimensions overflow".into()))?;
    let payload = &bytes[header.data_offset..];
    if payload.len() < need {
        return Err(Error::Image(format!(
            "truncated payload: {} of {} bytes",
            payload.len(),
            need
        )));
    }
    let payload = payload[..need].to_vec();
    if channels == 3 {
        Frame::from_rgb(header.width, header.height, payload)
    } else {
        Frame::from_grey(header.width, header.height, payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ppm(w: usize, h: usize, px: &[u8]) -> Vec<u8> {
        let mut v = format!("P6\n{w} {h}\n255\n").into_bytes();
        v.extend_from_slice(px);
        v
    }

    #[test]
    fn black_and_white_pixels() {
        assert_eq!(
            parse_ppm_frame(&ppm(1, 1, &[0, 0, 0])).unwrap().grey(),
            &[0]
        );
        assert_eq!(
            parse_ppm_frame(&ppm(1, 1, &[255, 255, 255]))
                .unwrap()
                .grey(),
            &[255]
        );
    }

    #[test]
    fn luma_of_primaries() {
        // 0.299 * 255 = 76.245, 0.587 * 255 = 149.685
        let f = parse_ppm_frame(&ppm(2, 1, &[255, 0, 0, 0, 255, 0])).unwrap();
        assert_eq!(f.grey(), &[76, 150]);
    }

    #[test]
    fn pgm_replicates_grey() {
        let mut bytes = b"P5\n# a comment\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[10, 200]);
        let f = parse_ppm_frame(&bytes).unwrap();
        assert_eq!(f.grey(), &[10, 200]);
        assert_eq!(f.rgb(), &[10, 10, 10, 200, 200, 200]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_ppm_frame(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(parse_ppm_frame(b"P6\n1 1\n65535\n\0\0\0\0\0\0").is_err());
        assert!(parse_ppm_frame(b"P6\n2 2\n255\n\0\0\0").is_err());
        assert!(parse_ppm_frame(b"P6\n2").is_err());
    }

    #[test]
    fn ppm_round_trip() {
        let f = Frame::from_rgb(2, 2, (0..12).map(|v| v * 20).collect()).unwrap();
        assert_eq!(parse_ppm_frame(&f.to_ppm()).unwrap(), f);
    }
}
