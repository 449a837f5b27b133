//! The sliding-window scan and the final chronological pair selection.

use std::cmp::Ordering;

use super::pair::{score_prepared, PairScore, PreparedQueryShot};
use super::{MatchConfig, VideoSignature};
use crate::error::Result;

/// Best window alignment found by the scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanAnchor {
    pub query_pos: usize,
    pub index_offset: usize,
    pub window: usize,
    /// Matched shots on the anchor diagonal within the window.
    pub window_matches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub q: usize,
    pub i: usize,
    pub d_q: u64,
    pub d_i: u64,
    pub score: PairScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub index_id: String,
    pub anchor: ScanAnchor,
    pub pairs: Vec<MatchedPair>,
    pub exhaustivity: f64,
    pub specificity: f64,
    pub relevance: f64,
}

impl MatchResult {
    pub fn matched_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| (p.q, p.i)).collect()
    }

    pub fn best_query_pos(&self) -> usize {
        self.anchor.query_pos
    }

    pub fn best_index_offset(&self) -> usize {
        self.anchor.index_offset
    }

    /// One line per matched pair.
    pub fn trace_lines(&self) -> Vec<String> {
        self.pairs
            .iter()
            .map(|p| {
                format!(
                    "q={} i={} dq={} di={} klc={:.6} klt={:.6} pc={:.6} pt={:.6}",
                    p.q,
                    p.i,
                    p.d_q,
                    p.d_i,
                    p.score.kl_col,
                    p.score.kl_tex,
                    p.score.path_col,
                    p.score.path_tex as f64
                )
            })
            .collect()
    }
}

/// Window starts `0, S, 2S, ...` up to `len - window`, always including the last.
fn window_starts(len: usize, window: usize, step: usize) -> Vec<usize> {
    let last = len - window;
    let mut starts: Vec<usize> = (0..=last).step_by(step).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// `(1/|Q|) * sum over pairs of w_col exp(-kl_col) + w_tex exp(-kl_tex)`.
pub fn exhaustivity(pairs: &[PairScore], query_len: usize, cfg: &MatchConfig) -> f64 {
    if query_len == 0 {
        return 0.0;
    }
    let sum = pairs
        .iter()
        .map(|p| cfg.w_col * (-p.kl_col).exp() + cfg.w_tex * (-p.kl_tex).exp())
        .fold(0.0, |a, b| a + b);
    (sum / query_len as f64).clamp(0.0, 1.0)
}

/// `1 / (1 + lambda * mean(path_tex + path_col))`, and 1 without pairs.
pub fn specificity(pairs: &[PairScore], cfg: &MatchConfig) -> f64 {
    if pairs.is_empty() {
        return 1.0;
    }
    let mean = pairs
        .iter()
        .map(|p| p.path_tex as f64 + p.path_col)
        .sum::<f64>()
        / pairs.len() as f64;
    1.0 / (1.0 + cfg.lambda_path * mean)
}

/// Scans `q` against `i` and scores the resulting alignment.
///
/// Windows of `N` shots are stepped by `S` over both sequences; each query
/// window keeps the index window with the most matched shots on its
/// diagonal, and the best of those is the anchor. The reported pairs are
/// then the longest chronologically ordered list of matched shot pairs,
/// preferring pairs on the same side of the anchor in both videos.
pub fn ngram_scan(
    q: &VideoSignature,
    i: &VideoSignature,
    cfg: &MatchConfig,
) -> Result<MatchResult> {
    cfg.validate()?;
    let (m, n) = (q.len(), i.len());
    let prepared: Vec<PreparedQueryShot> = q
        .shots()
        .iter()
        .map(|s| PreparedQueryShot::new(s, cfg))
        .collect::<Result<_>>()?;
    let mut scores = Vec::with_capacity(m * n);
    for pq in &prepared {
        for si in i.shots() {
            scores.push(score_prepared(pq, si, cfg)?);
        }
    }
    let matched = |a: usize, b: usize| scores[a * n + b].matched;

    let window = cfg.effective_window(m, n);
    let mut anchor = ScanAnchor {
        query_pos: 0,
        index_offset: 0,
        window,
        window_matches: 0,
    };
    let mut have_anchor = false;
    let offsets = window_starts(n, window, cfg.step);
    for qp in window_starts(m, window, cfg.step) {
        // best index offset for this query window, smaller offset on ties
        let mut best = (0usize, offsets[0]);
        for (k, &io) in offsets.iter().enumerate() {
            let count = (0..window).filter(|&t| matched(qp + t, io + t)).count();
            if k == 0 || count > best.0 {
                best = (count, io);
            }
        }
        let better = !have_anchor
            || best.0 > anchor.window_matches
            || (best.0 == anchor.window_matches && best.1 < anchor.index_offset);
        if better {
            anchor = ScanAnchor {
                query_pos: qp,
                index_offset: best.1,
                window,
                window_matches: best.0,
            };
            have_anchor = true;
        }
    }

    // Longest common subsequence under the match predicate; among equally
    // long lists prefer the one with more pairs consistent with the anchor.
    let consistent = |a: usize, b: usize| (a >= anchor.query_pos) == (b >= anchor.index_offset);
    let gain = |a: usize, b: usize| (1usize, usize::from(consistent(a, b)));
    let add = |x: (usize, usize), y: (usize, usize)| (x.0 + y.0, x.1 + y.1);
    let w = n + 1;
    let mut best = vec![(0usize, 0usize); (m + 1) * (n + 1)];
    for a in (0..m).rev() {
        for b in (0..n).rev() {
            let mut v = best[(a + 1) * w + b].max(best[a * w + b + 1]);
            if matched(a, b) {
                v = v.max(add(gain(a, b), best[(a + 1) * w + b + 1]));
            }
            best[a * w + b] = v;
        }
    }
    let mut pairs = Vec::with_capacity(best[0].0);
    let (mut a, mut b) = (0, 0);
    while a < m && b < n {
        let here = best[a * w + b];
        if matched(a, b) && here == add(gain(a, b), best[(a + 1) * w + b + 1]) {
            let si = &i.shots()[b];
            pairs.push(MatchedPair {
                q: a,
                i: b,
                d_q: q.shots()[a].duration_ms,
                d_i: si.duration_ms,
                score: scores[a * n + b],
            });
            a += 1;
            b += 1;
        } else if best[(a + 1) * w + b] == here {
            a += 1;
        } else {
            b += 1;
        }
    }

    let pair_scores: Vec<PairScore> = pairs.iter().map(|p| p.score).collect();
    let e = exhaustivity(&pair_scores, m, cfg);
    let s = specificity(&pair_scores, cfg);
    Ok(MatchResult {
        index_id: i.video_id().to_string(),
        anchor,
        pairs,
        exhaustivity: e,
        specificity: s,
        relevance: e * s,
    })
}

/// Runs the scan and scores relevance as exhaustivity times specificity.
pub fn relevance(q: &VideoSignature, i: &VideoSignature, cfg: &MatchConfig) -> Result<MatchResult> {
    ngram_scan(q, i, cfg)
}

/// Sorts by relevance, then matched pairs, both descending, then index id.
pub fn rank_results(results: &mut [MatchResult]) {
    results.sort_by(|x, y| {
        y.relevance
            .partial_cmp(&x.relevance)
            .unwrap_or(Ordering::Equal)
            .then(y.pairs.len().cmp(&x.pairs.len()))
            .then_with(|| x.index_id.cmp(&y.index_id))
    });
}
