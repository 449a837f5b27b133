//! Edit-distance baselines over shot-duration strings.
//!
//! Tokens are durations in milliseconds and two tokens are equal when
//! [`duration_match`] accepts them, with the first string as the query side.
//! Only insertions and deletions are allowed, each with weight one.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcher::{duration_match, MatchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Edit,
    Ned,
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineMethod::Edit => "edit",
            BaselineMethod::Ned => "ned",
        })
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edit" => Ok(BaselineMethod::Edit),
            "ned" => Ok(BaselineMethod::Ned),
            _ => Err(Error::InvalidArgument(format!(
                "unknown baseline method `{s}`"
            ))),
        }
    }
}

/// Minimum number of insertions and deletions turning `a` into `b`.
pub fn edit_distance(a: &[u64], b: &[u64], cfg: &MatchConfig) -> usize {
    let (m, n) = (a.len(), b.len());
    let mut prev: Vec<usize> = (0..=n).collect();
    let mut cur = vec![0; n + 1];
    for i in 1..=m {
        cur[0] = i;
        for j in 1..=n {
            let mut d = prev[j].min(cur[j - 1]) + 1;
            if duration_match(a[i - 1], b[j - 1], cfg) {
                d = d.min(prev[j - 1]);
            }
            cur[j] = d;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Minimum over edit paths of weight / length, where every elementary step
/// (including a zero-weight match) counts towards the length.
///
/// `w[i][j]` holds the least weight of a path of exactly `l` steps reaching
/// `(i, j)`; one layer per `l`, `O(|a| |b| (|a| + |b|))` time overall.
pub fn normalized_edit_distance(a: &[u64], b: &[u64], cfg: &MatchConfig) -> Result<f64> {
    let (m, n) = (a.len(), b.len());
    if m == 0 && n == 0 {
        return Err(Error::InvalidArgument("both strings are empty".into()));
    }
    const INF: u32 = u32::MAX;
    let w = n + 1;
    let eq: Vec<bool> = (0..m * n)
        .map(|k| duration_match(a[k / n], b[k % n], cfg))
        .collect();
    let mut prev = vec![INF; (m + 1) * w];
    prev[0] = 0;
    let mut cur = vec![INF; (m + 1) * w];
    let mut best = f64::INFINITY;
    for l in 1..=m + n {
        for i in 0..=m {
            for j in 0..=n {
                let mut v = INF;
                if i > 0 && prev[(i - 1) * w + j] != INF {
                    v = v.min(prev[(i - 1) * w + j] + 1);
                }
                if j > 0 && prev[i * w + j - 1] != INF {
                    v = v.min(prev[i * w + j - 1] + 1);
                }
                if i > 0 && j > 0 && eq[(i - 1) * n + j - 1] {
                    v = v.min(prev[(i - 1) * w + j - 1]);
                }
                cur[i * w + j] = v;
            }
        }
        let end = cur[m * w + n];
        if end != INF {
            best = best.min(end as f64 / l as f64);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(best)
}

/// Distances from `query` to every index entry, ascending, ties by id.
pub fn baseline_rank(
    query: &[u64],
    index: &[(String, Vec<u64>)],
    method: BaselineMethod,
    cfg: &MatchConfig,
) -> Result<Vec<(String, f64)>> {
    if index.is_empty() {
        return Err(Error::Empty("index"));
    }
    let mut ranked: Vec<(String, f64)> = index
        .par_iter()
        .map(|(id, tokens)| {
            let d = match method {
                BaselineMethod::Edit => edit_distance(query, tokens, cfg) as f64,
                BaselineMethod::Ned => normalized_edit_distance(query, tokens, cfg)?,
            };
            Ok((id.clone(), d))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strict() -> MatchConfig {
        MatchConfig {
            tau_abs_ms: 0.0,
            tau_rel: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn edit_examples() {
        let cfg = MatchConfig::default();
        assert_eq!(edit_distance(&[100, 200], &[100, 200], &cfg), 0);
        assert_eq!(edit_distance(&[], &[1, 2, 3], &cfg), 3);
        assert_eq!(edit_distance(&[100, 200, 300], &[100, 300], &strict()), 1);
        assert_eq!(edit_distance(&[1000, 2000], &[1040, 2000], &cfg), 0);
    }

    /// Enumerates every insert/delete/match path to `(m, n)`.
    fn ned_paths(
        a: &[u64],
        b: &[u64],
        cfg: &MatchConfig,
        i: usize,
        j: usize,
        w: u32,
        l: u32,
        best: &mut f64,
    ) {
        if i == a.len() && j == b.len() {
            *best = best.min(w as f64 / l as f64);
            return;
        }
        if i < a.len() {
            ned_paths(a, b, cfg, i + 1, j, w + 1, l + 1, best);
        }
        if j < b.len() {
            ned_paths(a, b, cfg, i, j + 1, w + 1, l + 1, best);
        }
        if i < a.len() && j < b.len() && duration_match(a[i], b[j], cfg) {
            ned_paths(a, b, cfg, i + 1, j + 1, w, l + 1, best);
        }
    }

    #[test]
    fn ned_examples() {
        let cfg = MatchConfig::default();
        assert_eq!(
            normalized_edit_distance(&[5, 6, 7], &[5, 6, 7], &strict()).unwrap(),
            0.0
        );
        assert_eq!(normalized_edit_distance(&[100], &[900], &cfg).unwrap(), 1.0);
        assert_eq!(normalized_edit_distance(&[], &[900], &cfg).unwrap(), 1.0);
        assert!(normalized_edit_distance(&[], &[], &cfg).is_err());
    }

    #[test]
    fn ranking() {
        let cfg = MatchConfig::default();
        let index = vec![
            ("c".to_string(), vec![1000, 2000, 3000]),
            ("b".to_string(), vec![5000]),
            ("a".to_string(), vec![5000]),
        ];
        let r = baseline_rank(&[1000, 2000, 3000], &index, BaselineMethod::Edit, &cfg).unwrap();
        assert_eq!(r[0], ("c".to_string(), 0.0));
        assert_eq!((r[1].0.as_str(), r[2].0.as_str()), ("a", "b"));
        assert!(baseline_rank(&[1], &[], BaselineMethod::Ned, &cfg).is_err());
        assert_eq!(
            "ned".parse::<BaselineMethod>().unwrap(),
            BaselineMethod::Ned
        );
        assert!("lcs".parse::<BaselineMethod>().is_err());
    }

    fn tokens() -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::vec(1u64..5, 0..7)
    }

    proptest! {
        #[test]
        fn ned_matches_path_enumeration(a in tokens(), b in tokens()) {
            prop_assume!(!a.is_empty() || !b.is_empty());
            let cfg = strict();
            let mut best = f64::INFINITY;
            ned_paths(&a, &b, &cfg, 0, 0, 0, 0, &mut best);
            let got = normalized_edit_distance(&a, &b, &cfg).unwrap();
            prop_assert!((got - best).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&got));
        }

        #[test]
        fn edit_metric_axioms(a in tokens(), b in tokens(), c in tokens()) {
            let cfg = strict();
            let ab = edit_distance(&a, &b, &cfg);
            prop_assert_eq!(ab, edit_distance(&b, &a, &cfg));
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(ab <= edit_distance(&a, &c, &cfg) + edit_distance(&c, &b, &cfg));
            prop_assert!(a.len().abs_diff(b.len()) <= ab && ab <= a.len() + b.len());
        }
    }
}
