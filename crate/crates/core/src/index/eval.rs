//! Rankings, ground truth, and precision / recall / MAP.
//!
//! Ranking lines are `query_id rank video_id score [extra...]`; a query with
//! no line retrieved nothing. Ground-truth lines are
//! `query_id <tab> relevant_id[,relevant_id...] [<tab> set_name]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matcher::MatchResult;

pub const DEFAULT_SET: &str = "all";

/// Retrieved ids per query, in rank order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rankings {
    pub by_query: BTreeMap<String, Vec<String>>,
}

impl Rankings {
    pub fn insert(&mut self, query_id: impl Into<String>, ids: Vec<String>) {
        self.by_query.insert(query_id.into(), ids);
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() || f[0].starts_with('#') {
                continue;
            }
            if f.len() < 4 {
                return Err(Error::parse(
                    idx + 1,
                    "expected `query_id rank video_id score`",
                ));
            }
            let rank: usize = f[1]
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("bad rank `{}`", f[1])))?;
            f[3].parse::<f64>()
                .map_err(|_| Error::parse(idx + 1, format!("bad score `{}`", f[3])))?;
            rows.entry(f[0].to_string())
                .or_default()
                .push((rank, f[2].to_string()));
        }
        let by_query = rows
            .into_iter()
            .map(|(q, mut v)| {
                v.sort();
                (q, v.into_iter().map(|(_, id)| id).collect())
            })
            .collect();
        Ok(Rankings { by_query })
    }
}

/// Ranking lines for matcher results: `query rank id relevance pairs`.
pub fn format_match_ranking(query_id: &str, results: &[MatchResult]) -> String {
    let mut out = String::new();
    for (k, r) in results.iter().enumerate() {
        let _ = writeln!(
            out,
            "{query_id} {} {} {:.6} {}",
            k + 1,
            r.index_id,
            r.relevance,
            r.pairs.len()
        );
    }
    out
}

/// Ranking lines for baseline distances: `query rank id distance`.
pub fn format_distance_ranking(query_id: &str, ranked: &[(String, f64)]) -> String {
    let mut out = String::new();
    for (k, (id, d)) in ranked.iter().enumerate() {
        let _ = writeln!(out, "{query_id} {} {id} {d:.6}", k + 1);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthEntry {
    pub relevant: BTreeSet<String>,
    pub set: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub queries: BTreeMap<String, TruthEntry>,
}

impl GroundTruth {
    pub fn insert(&mut self, query_id: impl Into<String>, relevant: &[&str], set: &str) {
        self.queries.insert(
            query_id.into(),
            TruthEntry {
                relevant: relevant.iter().map(|s| s.to_string()).collect(),
                set: set.to_string(),
            },
        );
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut gt = GroundTruth::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(Error::parse(
                    idx + 1,
                    "expected `query_id<TAB>relevant_ids[<TAB>set]`",
                ));
            }
            let relevant: BTreeSet<String> = cols[1]
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            if relevant.is_empty() {
                return Err(Error::parse(idx + 1, "no relevant ids"));
            }
            let set = cols.get(2).map_or(DEFAULT_SET, |s| s.trim()).to_string();
            gt.queries
                .insert(cols[0].trim().to_string(), TruthEntry { relevant, set });
        }
        Ok(gt)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (q, e) in &self.queries {
            let rel: Vec<&str> = e.relevant.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{q}\t{}\t{}", rel.join(","), e.set);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryEval {
    pub query_id: String,
    pub set: String,
    pub precision: f64,
    pub recall: f64,
    pub average_precision: f64,
    pub top1: bool,
    pub correct: usize,
    pub false_positives: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetEval {
    pub set: String,
    pub n_queries: usize,
    pub map: f64,
    pub top1_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub queries: Vec<QueryEval>,
    pub sets: Vec<SetEval>,
    /// Mean of the per-set MAPs.
    pub overall_map: f64,
    pub correct: usize,
    pub false_positives: usize,
}

impl EvalReport {
    pub fn set(&self, name: &str) -> Option<&SetEval> {
        self.sets.iter().find(|s| s.set == name)
    }

    pub fn top1_rate(&self) -> f64 {
        if self.queries.is_empty() {
            return 0.0;
        }
        self.queries.iter().filter(|q| q.top1).count() as f64 / self.queries.len() as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for q in &self.queries {
            let _ = writeln!(
                out,
                "query {} set {} precision {:.6} recall {:.6} avep {:.6} correct {} false_positives {}",
                q.query_id, q.set, q.precision, q.recall, q.average_precision, q.correct, q.false_positives
            );
        }
        for s in &self.sets {
            let _ = writeln!(
                out,
                "set {} queries {} map {:.6} top1 {:.6}",
                s.set, s.n_queries, s.map, s.top1_rate
            );
        }
        let _ = writeln!(
            out,
            "overall map {:.6} correct {} false_positives {}",
            self.overall_map, self.correct, self.false_positives
        );
        out
    }
}

/// `(1/|R|) * sum over relevant ranks k of precision@k`.
pub fn average_precision(ranked: &[String], relevant: &BTreeSet<String>) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, id) in ranked.iter().enumerate() {
        if relevant.contains(id) {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    sum / relevant.len() as f64
}

pub fn evaluate(rankings: &Rankings, truth: &GroundTruth) -> Result<EvalReport> {
    if let Some(q) = rankings
        .by_query
        .keys()
        .find(|q| !truth.queries.contains_key(*q))
    {
        return Err(Error::InvalidArgument(format!(
            "query `{q}` has no ground truth"
        )));
    }
    if truth.queries.is_empty() {
        return Err(Error::Empty("ground truth"));
    }
    let empty = Vec::new();
    let mut queries = Vec::with_capacity(truth.queries.len());
    for (qid, entry) in &truth.queries {
        let ranked = rankings.by_query.get(qid).unwrap_or(&empty);
        let correct = ranked
            .iter()
            .filter(|id| entry.relevant.contains(*id))
            .count();
        queries.push(QueryEval {
            query_id: qid.clone(),
            set: entry.set.clone(),
            precision: if ranked.is_empty() {
                0.0
            } else {
                correct as f64 / ranked.len() as f64
            },
            recall: correct as f64 / entry.relevant.len() as f64,
            average_precision: average_precision(ranked, &entry.relevant),
            top1: ranked.first().is_some_and(|id| entry.relevant.contains(id)),
            correct,
            false_positives: ranked.len() - correct,
        });
    }

    let mut by_set: BTreeMap<&str, Vec<&QueryEval>> = BTreeMap::new();
    for q in &queries {
        by_set.entry(q.set.as_str()).or_default().push(q);
    }
    let sets: Vec<SetEval> = by_set
        .into_iter()
        .map(|(set, qs)| {
            let n = qs.len() as f64;
            SetEval {
                set: set.to_string(),
                n_queries: qs.len(),
                map: qs.iter().map(|q| q.average_precision).sum::<f64>() / n,
                top1_rate: qs.iter().filter(|q| q.top1).count() as f64 / n,
            }
        })
        .collect();
    let overall_map = sets.iter().map(|s| s.map).sum::<f64>() / sets.len() as f64;
    Ok(EvalReport {
        correct: queries.iter().map(|q| q.correct).sum(),
        false_positives: queries.iter().map(|q| q.false_positives).sum(),
        queries,
        sets,
        overall_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_and_second_rank() {
        let mut gt = GroundTruth::default();
        gt.insert("q1", &["a"], "s");
        gt.insert("q2", &["b"], "s");
        let mut r = Rankings::default();
        r.insert("q1", ids(&["a", "b"]));
        r.insert("q2", ids(&["b", "a"]));
        let rep = evaluate(&r, &gt).unwrap();
        assert_eq!(rep.overall_map, 1.0);
        assert_eq!(rep.top1_rate(), 1.0);

        r.insert("q1", ids(&["b", "a"]));
        r.insert("q2", ids(&["a", "b"]));
        let rep = evaluate(&r, &gt).unwrap();
        assert_eq!(rep.overall_map, 0.5);
        assert_eq!((rep.correct, rep.false_positives), (2, 2));
        assert_eq!(rep.queries[0].precision, 0.5);
    }

    #[test]
    fn missing_and_unknown_queries() {
        let gt = GroundTruth::parse("q1\ta,b\tinsert\nq2\tc\n").unwrap();
        assert_eq!(gt.queries["q2"].set, DEFAULT_SET);
        let r = Rankings::parse("q1 2 b 0.3 1\nq1 1 x 0.9 2\n").unwrap();
        assert_eq!(r.by_query["q1"], ids(&["x", "b"]));
        let rep = evaluate(&r, &gt).unwrap();
        let q1 = &rep.queries[0];
        assert_eq!((q1.precision, q1.recall), (0.5, 0.5));
        assert!((q1.average_precision - 0.25).abs() < 1e-12);
        assert_eq!(rep.queries[1].precision, 0.0);
        assert_eq!(rep.sets.len(), 2);
        assert!(evaluate(&Rankings::parse("zz 1 a 1.0\n").unwrap(), &gt).is_err());
        assert!(GroundTruth::parse("q1 a\n").is_err());
        assert!(Rankings::parse("q1 one a 1.0\n").is_err());
        assert_eq!(GroundTruth::parse(&gt.to_text()).unwrap(), gt);
    }

    proptest! {
        #[test]
        fn metrics_in_unit_interval(
            ranked in proptest::collection::vec(0u8..8, 0..8),
            relevant in proptest::collection::btree_set(0u8..8, 1..4),
        ) {
            let ranked: Vec<String> = {
                let mut seen = BTreeSet::new();
                ranked.into_iter().filter(|x| seen.insert(*x)).map(|x| x.to_string()).collect()
            };
            let rel: Vec<String> = relevant.iter().map(|x| x.to_string()).collect();
            let rel_refs: Vec<&str> = rel.iter().map(String::as_str).collect();
            let mut gt = GroundTruth::default();
            gt.insert("q", &rel_refs, "s");
            let mut r = Rankings::default();
            r.insert("q", ranked.clone());
            let rep = evaluate(&r, &gt).unwrap();
            let q = &rep.queries[0];
            for v in [q.precision, q.recall, q.average_precision, rep.overall_map] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert_eq!(q.correct + q.false_positives, ranked.len());
            prop_assert!(q.average_precision <= q.recall + 1e-12);
        }
    }
}
