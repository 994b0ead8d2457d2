//! Top-k retrieval metrics with binary relevance.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::GoldLabels;
use crate::error::{Error, Result};
use crate::ranking::RankedThemeList;

/// A ranked list of ids and the set of ids that are relevant to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    ranked_ids: Vec<String>,
    relevant_ids: BTreeSet<String>,
}

impl Judgment {
    pub fn new<R, S, T>(ranked: R, relevant: impl IntoIterator<Item = T>) -> Result<Self>
    where
        R: IntoIterator<Item = S>,
        S: Into<String>,
        T: Into<String>,
    {
        let ranked_ids: Vec<String> = ranked.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        if let Some(dup) = ranked_ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::InvalidParameter(format!("ranked id `{dup}` repeats")));
        }
        Ok(Self {
            ranked_ids,
            relevant_ids: relevant.into_iter().map(Into::into).collect(),
        })
    }

    pub fn ranked_ids(&self) -> &[String] {
        &self.ranked_ids
    }

    pub fn relevant_ids(&self) -> &BTreeSet<String> {
        &self.relevant_ids
    }

    /// `rel_i` for ranks `1..=k`; positions past the list end count as 0.
    fn relevance(&self, k: usize) -> impl Iterator<Item = bool> + '_ {
        (0..k).map(|i| {
            self.ranked_ids
                .get(i)
                .is_some_and(|id| self.relevant_ids.contains(id))
        })
    }

    fn hits(&self, k: usize) -> usize {
        self.relevance(k).filter(|&r| r).count()
    }

    fn require_relevant(&self) -> Result<usize> {
        match self.relevant_ids.len() {
            0 => Err(Error::EmptyRelevantSet),
            n => Ok(n),
        }
    }
}

fn require_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(())
}

pub fn recall_at_k(j: &Judgment, k: usize) -> Result<f64> {
    require_k(k)?;
    let relevant = j.require_relevant()?;
    Ok(j.hits(k) as f64 / relevant as f64)
}

pub fn precision_at_k(j: &Judgment, k: usize) -> Result<f64> {
    require_k(k)?;
    Ok(j.hits(k) as f64 / k as f64)
}

/// `Σ_{i≤k} P@i · rel_i / |relevant|`.
pub fn average_precision(j: &Judgment, k: usize) -> Result<f64> {
    require_k(k)?;
    let relevant = j.require_relevant()?;
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, rel) in j.relevance(k).enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / relevant as f64)
}

pub fn map_at_k(judgments: &[Judgment], k: usize) -> Result<f64> {
    if judgments.is_empty() {
        return Err(Error::NothingToEvaluate { skipped: 0 });
    }
    let mut sum = 0.0;
    for j in judgments {
        sum += average_precision(j, k)?;
    }
    Ok(sum / judgments.len() as f64)
}

/// Harmonic mean of MAP@k and recall@k, 0 when both are 0.
pub fn f1(map_k: f64, recall_k: f64) -> f64 {
    if map_k + recall_k == 0.0 {
        0.0
    } else {
        2.0 * map_k * recall_k / (map_k + recall_k)
    }
}

/// NDCG@k with gain `2^rel - 1` and discount `log2(i + 1)`.
pub fn ndcg_at_k(j: &Judgment, k: usize) -> Result<f64> {
    require_k(k)?;
    let dcg: f64 = j
        .relevance(k)
        .enumerate()
        .filter(|&(_, rel)| rel)
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum();
    let ideal_hits = j.relevant_ids.len().min(k);
    let idcg: f64 = (0..ideal_hits).map(|i| 1.0 / ((i + 2) as f64).log2()).sum();
    Ok(if idcg == 0.0 { 0.0 } else { dcg / idcg })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub k: usize,
    pub recall_at_k: f64,
    pub precision_at_k: f64,
    pub map_at_k: f64,
    pub f1: f64,
    pub ndcg_at_k: f64,
    pub query_count: usize,
    /// Rankings dropped for lack of a resolvable gold label.
    pub skipped: usize,
}

/// Arithmetic means over the judgments; F1 from the aggregated MAP and recall.
pub fn evaluate_judgments(judgments: &[Judgment], k: usize, skipped: usize) -> Result<MetricReport> {
    if judgments.is_empty() {
        return Err(Error::NothingToEvaluate { skipped });
    }
    let n = judgments.len() as f64;
    let (mut recall, mut precision, mut ap, mut ndcg) = (0.0, 0.0, 0.0, 0.0);
    for j in judgments {
        recall += recall_at_k(j, k)?;
        precision += precision_at_k(j, k)?;
        ap += average_precision(j, k)?;
        ndcg += ndcg_at_k(j, k)?;
    }
    let (recall, map) = (recall / n, ap / n);
    Ok(MetricReport {
        k,
        recall_at_k: recall,
        precision_at_k: precision / n,
        map_at_k: map,
        f1: f1(map, recall),
        ndcg_at_k: ndcg / n,
        query_count: judgments.len(),
        skipped,
    })
}

/// Scores each ranking against its appeal's gold theme. Rankings without a
/// resolved label are skipped and counted.
pub fn evaluate_run(rankings: &[RankedThemeList], gold: &GoldLabels, k: usize) -> Result<MetricReport> {
    let mut judgments = Vec::with_capacity(rankings.len());
    let mut skipped = 0;
    for ranking in rankings {
        match gold.get(&ranking.appeal_id) {
            Some(theme) => judgments.push(Judgment::new(
                ranking.entries.iter().map(|(id, _)| id.as_str()),
                [theme],
            )?),
            None => skipped += 1,
        }
    }
    evaluate_judgments(&judgments, k, skipped)
}
