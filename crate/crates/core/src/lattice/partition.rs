//! Integer partitions into a bounded number of parts.

use crate::error::{Error, Result};

/// `Part(n, k)` for every `n` in `0..=p`, by the recurrence
/// `Part(n, j) = Part(n, j - 1) + Part(n - j, j)` folded over `j = 1..=k`.
fn partition_row(p: usize, k: usize) -> Result<Vec<u64>> {
    let mut row = vec![0u64; p + 1];
    row[0] = 1;
    for j in 1..=k.min(p) {
        for n in j..=p {
            row[n] = row[n]
                .checked_add(row[n - j])
                .ok_or_else(|| Error::InvalidArgument(format!("Part({p}, {k}) overflows")))?;
        }
    }
    Ok(row)
}

/// Number of ways to write `p` as a sum of at most `k` positive parts,
/// ignoring order.
pub fn partition_count(p: u32, k: u32) -> Result<u64> {
    if k == 0 && p > 0 {
        return Err(Error::InvalidArgument(
            "Part(p, 0) is undefined for p > 0".into(),
        ));
    }
    Ok(partition_row(p as usize, k as usize)?[p as usize])
}

/// `1 + sum_{i=1..=p} Part(i, 11 - dominant_card)`, the depth of the
/// sub-lattice holding secondary mass `p` (in quantization units).
pub fn lattice_depth(p: u32, dominant_card: usize, q_step: u32) -> Result<u64> {
    if !(1..=10).contains(&dominant_card) {
        return Err(Error::InvalidArgument(format!(
            "dominant set must hold 1..=10 concepts, got {dominant_card}"
        )));
    }
    let total = super::total_units(q_step)?;
    if p > total {
        return Err(Error::InvalidArgument(format!(
            "secondary mass {p} exceeds {total} units"
        )));
    }
    let row = partition_row(p as usize, 11 - dominant_card)?;
    row[1..]
        .iter()
        .try_fold(1u64, |acc, &v| acc.checked_add(v))
        .ok_or_else(|| Error::InvalidArgument("lattice depth overflows".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Counts non-increasing sequences of positive parts summing to `p`.
    fn enumerate(p: u32, k: u32, max_part: u32) -> u64 {
        if p == 0 {
            return 1;
        }
        if k == 0 {
            return 0;
        }
        (1..=max_part.min(p))
            .map(|first| enumerate(p - first, k - 1, first))
            .sum()
    }

    #[test]
    fn worked_values() {
        assert_eq!(partition_count(2, 10).unwrap(), 2);
        assert_eq!(partition_count(0, 4).unwrap(), 1);
        assert_eq!(partition_count(0, 0).unwrap(), 1);
        assert_eq!(partition_count(5, 2).unwrap(), 3);
        assert!(partition_count(3, 0).is_err());
    }

    #[test]
    fn matches_enumeration() {
        for p in 0..=20 {
            for k in 1..=11 {
                assert_eq!(
                    partition_count(p, k).unwrap(),
                    enumerate(p, k, p),
                    "Part({p},{k})"
                );
            }
        }
    }

    #[test]
    fn depth_examples() {
        assert_eq!(lattice_depth(2, 1, 5).unwrap(), 4);
        assert_eq!(lattice_depth(0, 1, 5).unwrap(), 1);
        assert!(lattice_depth(21, 1, 5).is_err());
        assert!(lattice_depth(2, 0, 5).is_err());
        assert!(lattice_depth(2, 11, 5).is_err());
        assert!(lattice_depth(2, 1, 7).is_err());
    }

    proptest! {
        #[test]
        fn depth_is_monotone(p in 0u32..20, card in 1usize..=10) {
            prop_assert!(lattice_depth(p, card, 5).unwrap() <= lattice_depth(p + 1, card, 5).unwrap());
        }
    }
}
