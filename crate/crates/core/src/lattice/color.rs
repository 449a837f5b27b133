//! At Most / At Least color lattices over signatures with a dominant set.

use std::fmt;

use super::partition::lattice_depth;
use super::total_units;
use crate::color::{ColorConceptId, ColorSignature, N_COLOR_CONCEPTS};
use crate::error::{Error, Result};

pub const DEFAULT_Q_STEP: u32 = 5;

/// Set of dominant color concepts, indexed canonically.
pub type DominantSet = [bool; N_COLOR_CONCEPTS];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorOrder {
    AtMost,
    AtLeast,
}

impl fmt::Display for ColorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorOrder::AtMost => "at-most",
            ColorOrder::AtLeast => "at-least",
        })
    }
}

/// How quantized secondary units are made to sum to the full mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Completion {
    /// Keep the measured secondaries; fix rounding drift on the largest one.
    #[default]
    RepairLargest,
    /// Spread the non-dominant mass evenly over the secondary slots.
    UniformSecondary,
}

/// Twelve-component color signature: dominant components in their own slots,
/// secondary components ascending in the remaining slots, then their sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DominantColorForm {
    comp: [u32; N_COLOR_CONCEPTS + 1],
    dominant: DominantSet,
    q_step: u32,
}

fn round_half_up(x: f64) -> u32 {
    (x + 0.5 + 1e-9).floor().max(0.0) as u32
}

/// Concepts worth at least one quantization unit in `sig`. When all eleven
/// qualify the smallest are dropped until ten remain.
pub fn dominant_concepts(sig: &ColorSignature, q_step: u32) -> Result<DominantSet> {
    total_units(q_step)?;
    let units = sig.pct.map(|p| round_half_up(p / q_step as f64));
    let mut dominant = units.map(|u| u >= 1);
    while dominant.iter().filter(|d| **d).count() > N_COLOR_CONCEPTS - 1 {
        let mut drop = None;
        for k in 0..N_COLOR_CONCEPTS {
            if dominant[k] && drop.is_none_or(|d: usize| sig.pct[k] < sig.pct[d]) {
                drop = Some(k);
            }
        }
        dominant[drop.expect("non-empty set")] = false;
    }
    Ok(dominant)
}

pub fn to_dominant_form(
    sig: &ColorSignature,
    dominant: &DominantSet,
    q_step: u32,
    completion: Completion,
) -> Result<DominantColorForm> {
    let total = total_units(q_step)?;
    let card = dominant.iter().filter(|d| **d).count();
    if card == 0 {
        return Err(Error::InvalidArgument("dominant set is empty".into()));
    }
    if card == N_COLOR_CONCEPTS {
        return Err(Error::InvalidArgument(
            "dominant set covers every concept; no secondary slot left".into(),
        ));
    }
    let mut units = sig.pct.map(|p| round_half_up(p / q_step as f64));
    let largest = |units: &[u32; N_COLOR_CONCEPTS], want_dominant: bool, positive: bool| {
        let mut best: Option<usize> = None;
        for k in 0..N_COLOR_CONCEPTS {
            if dominant[k] != want_dominant || (positive && units[k] == 0) {
                continue;
            }
            if best.is_none_or(|b| units[k] > units[b]) {
                best = Some(k);
            }
        }
        best
    };

    match completion {
        Completion::RepairLargest => loop {
            let sum: u32 = units.iter().sum();
            if sum == total {
                break;
            }
            if sum < total {
                let k = largest(&units, false, false).expect("a secondary slot exists");
                units[k] += 1;
            } else {
                let k = largest(&units, false, true)
                    .or_else(|| largest(&units, true, true))
                    .expect("positive mass exists");
                units[k] -= 1;
            }
        },
        Completion::UniformSecondary => {
            while dominant_sum(&units, dominant) > total {
                let k = largest(&units, true, true).expect("positive dominant mass");
                units[k] -= 1;
            }
            let spare = total - dominant_sum(&units, dominant);
            let m = (N_COLOR_CONCEPTS - card) as u32;
            let mut slot = 0;
            for k in 0..N_COLOR_CONCEPTS {
                if !dominant[k] {
                    // remainder lands on the later slots so the order stays ascending
                    units[k] = spare / m + u32::from(slot >= m - spare % m);
                    slot += 1;
                }
            }
        }
    }

    let mut secondary: Vec<u32> = (0..N_COLOR_CONCEPTS)
        .filter(|&k| !dominant[k])
        .map(|k| units[k])
        .collect();
    secondary.sort_unstable();
    let mut comp = [0u32; N_COLOR_CONCEPTS + 1];
    let mut next = secondary.iter();
    for k in 0..N_COLOR_CONCEPTS {
        comp[k] = if dominant[k] {
            units[k]
        } else {
            *next.next().expect("slot count matches")
        };
    }
    comp[N_COLOR_CONCEPTS] = secondary.iter().sum();
    Ok(DominantColorForm {
        comp,
        dominant: *dominant,
        q_step,
    })
}

fn dominant_sum(units: &[u32; N_COLOR_CONCEPTS], dominant: &DominantSet) -> u32 {
    units
        .iter()
        .zip(dominant)
        .filter(|(_, d)| **d)
        .map(|(u, _)| u)
        .sum()
}

impl DominantColorForm {
    /// Components in quantization units.
    pub fn units(&self) -> &[u32; N_COLOR_CONCEPTS + 1] {
        &self.comp
    }

    /// Components in percent.
    pub fn percent(&self) -> [u32; N_COLOR_CONCEPTS + 1] {
        self.comp.map(|u| u * self.q_step)
    }

    pub fn dominant(&self) -> &DominantSet {
        &self.dominant
    }

    pub fn dominant_card(&self) -> usize {
        self.dominant.iter().filter(|d| **d).count()
    }

    pub fn q_step(&self) -> u32 {
        self.q_step
    }

    pub fn dominant_mass(&self) -> u32 {
        dominant_sum(
            self.comp[..N_COLOR_CONCEPTS].try_into().unwrap(),
            &self.dominant,
        )
    }

    pub fn secondary_mass(&self) -> u32 {
        self.comp[N_COLOR_CONCEPTS]
    }

    /// Secondary components, ascending.
    pub fn secondaries(&self) -> Vec<u32> {
        (0..N_COLOR_CONCEPTS)
            .filter(|&k| !self.dominant[k])
            .map(|k| self.comp[k])
            .collect()
    }

    pub fn dominant_concepts(&self) -> Vec<ColorConceptId> {
        ColorConceptId::ALL
            .into_iter()
            .filter(|c| self.dominant[c.index()])
            .collect()
    }
}

fn check_compatible(a: &DominantColorForm, b: &DominantColorForm) -> Result<()> {
    if a.dominant != b.dominant || a.q_step != b.q_step {
        return Err(Error::InvalidArgument(
            "color forms have different dominant sets or quantization".into(),
        ));
    }
    Ok(())
}

/// `a <= b` in the chosen order: the componentwise rule on dominant
/// components, or `a == b`.
pub fn color_leq(a: &DominantColorForm, b: &DominantColorForm, mode: ColorOrder) -> Result<bool> {
    check_compatible(a, b)?;
    if a == b {
        return Ok(true);
    }
    let total = total_units(a.q_step)?;
    let dom = (0..N_COLOR_CONCEPTS).filter(|&k| a.dominant[k]);
    Ok(match mode {
        ColorOrder::AtMost => dom
            .into_iter()
            .all(|k| 1 <= a.comp[k] && a.comp[k] <= b.comp[k]),
        ColorOrder::AtLeast => dom
            .into_iter()
            .all(|k| b.comp[k] <= a.comp[k] && a.comp[k] <= total),
    })
}

/// Sum over unordered pairs of secondary slots of their absolute difference.
pub fn sublattice_balance(a: &DominantColorForm) -> u64 {
    let s = a.secondaries();
    let mut total = 0u64;
    for j in 0..s.len() {
        for k in j + 1..s.len() {
            total += s[j].abs_diff(s[k]) as u64;
        }
    }
    total
}

/// Largest balance reachable with the same secondary mass: all of it in one slot.
pub fn max_balance(a: &DominantColorForm) -> u64 {
    let m = (N_COLOR_CONCEPTS - a.dominant_card()) as u64;
    m.saturating_sub(1) * a.secondary_mass() as u64
}

/// At Most when the index form carries no more dominant mass than the query.
pub fn select_order(q: &DominantColorForm, i: &DominantColorForm) -> ColorOrder {
    if i.dominant_mass() <= q.dominant_mass() {
        ColorOrder::AtMost
    } else {
        ColorOrder::AtLeast
    }
}

/// Depth difference between the two sub-lattices plus a tie-break in [0, 1)
/// that grows with how unevenly `i` spreads its secondary mass.
pub fn path_col(q: &DominantColorForm, i: &DominantColorForm) -> Result<f64> {
    check_compatible(q, i)?;
    let card = q.dominant_card();
    let dq = lattice_depth(q.secondary_mass(), card, q.q_step)?;
    let di = lattice_depth(i.secondary_mass(), card, i.q_step)?;
    let balance = sublattice_balance(i) as f64 / (1.0 + max_balance(i) as f64);
    Ok(dq.abs_diff(di) as f64 + balance)
}
