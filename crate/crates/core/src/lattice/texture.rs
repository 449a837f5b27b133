//! Texture lattice over 11-bit presence vectors.
//!
//! `a <= b` when every concept set in `b` is also set in `a`; the all-ones
//! point is the bottom and the all-zeros point the top.

use crate::texture::{TextureSignature, N_TEXTURE_CONCEPTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TextureLatticePoint {
    pub bits: [bool; N_TEXTURE_CONCEPTS],
}

impl TextureLatticePoint {
    pub const BOTTOM: TextureLatticePoint = TextureLatticePoint {
        bits: [true; N_TEXTURE_CONCEPTS],
    };
    pub const TOP: TextureLatticePoint = TextureLatticePoint {
        bits: [false; N_TEXTURE_CONCEPTS],
    };

    pub fn new(bits: [bool; N_TEXTURE_CONCEPTS]) -> Self {
        TextureLatticePoint { bits }
    }

    /// Bit `k` of `mask` is concept `k`.
    pub fn from_mask(mask: u16) -> Self {
        TextureLatticePoint {
            bits: std::array::from_fn(|k| mask >> k & 1 == 1),
        }
    }

    pub fn mask(&self) -> u16 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |m, (k, &b)| m | (b as u16) << k)
    }

    /// Number of absent concepts.
    pub fn zeros(&self) -> usize {
        self.bits.iter().filter(|b| !**b).count()
    }
}

impl From<&TextureSignature> for TextureLatticePoint {
    fn from(sig: &TextureSignature) -> Self {
        TextureLatticePoint { bits: sig.present }
    }
}

pub fn texture_leq(a: &TextureLatticePoint, b: &TextureLatticePoint) -> bool {
    if *a == TextureLatticePoint::BOTTOM || *b == TextureLatticePoint::TOP {
        return true;
    }
    !a.bits.iter().zip(&b.bits).any(|(&ak, &bk)| bk && !ak)
}

/// Shortest path length when every lattice edge toggles one concept.
pub fn path_tex(a: &TextureLatticePoint, b: &TextureLatticePoint) -> u32 {
    (a.mask() ^ b.mask()).count_ones()
}
