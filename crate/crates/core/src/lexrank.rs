//! LexRank sentence centrality and the guided variant that mixes centrality
//! with each sentence's best BM25 match against the theme catalog.
//!
//! The guided score of sentence `s` is `alpha * γ̂(s) + beta * σ̂(s)`, where
//! `γ` is the LexRank centrality, `σ` the maximum BM25 score of the sentence
//! queried against every theme, and the hat denotes division by the vector
//! maximum.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bm25::Bm25Index;
use crate::error::{Error, Result};
use crate::textproc::{tokenize, Sentence, TokenSequence};

pub const DEFAULT_THRESHOLD: f64 = 0.1;
pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CentralityVariant {
    #[default]
    Degree,
    Continuous,
}

impl std::str::FromStr for CentralityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(Self::Degree),
            "continuous" => Ok(Self::Continuous),
            other => Err(Error::Config(format!("unknown centrality variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMode {
    Plain,
    #[default]
    Guided,
}

/// Symmetric sentence-similarity weights with an edge threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceGraph {
    n: usize,
    weights: Vec<f64>,
    threshold: f64,
}

impl SentenceGraph {
    /// Wraps a row-major `n × n` matrix, checking symmetry and range.
    pub fn from_weights(n: usize, weights: Vec<f64>, threshold: f64) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: n * n,
            });
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidParameter("weights must lie in [0, 1]".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if weights[i * n + j] != weights[j * n + i] {
                    return Err(Error::InvalidParameter("weights must be symmetric".into()));
                }
            }
        }
        Self { n, weights, threshold: 0.0 }.with_threshold(threshold)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&threshold) {
            return Err(Error::InvalidParameter(format!(
                "threshold = {threshold} must be in [0, 1)"
            )));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }
}

/// Sparse `tf · idf` vector with its Euclidean norm. Entries sorted by term id.
struct WeightedSentence {
    entries: Vec<(usize, f64)>,
    norm: f64,
}

/// Pairwise idf-modified cosine similarity. The idf is computed over the
/// given sentences only: `ln(n / df) + 1`.
pub fn similarity_matrix(sentences: &[TokenSequence]) -> Result<SentenceGraph> {
    let n = sentences.len();
    if sentences.iter().all(TokenSequence::is_empty) {
        return Err(Error::AllSentencesEmpty);
    }

    let mut term_ids: HashMap<&str, usize> = HashMap::new();
    let mut counts: Vec<HashMap<usize, u32>> = Vec::with_capacity(n);
    for sentence in sentences {
        let mut tf: HashMap<usize, u32> = HashMap::new();
        for token in sentence.iter() {
            let next = term_ids.len();
            let id = *term_ids.entry(token).or_insert(next);
            *tf.entry(id).or_default() += 1;
        }
        counts.push(tf);
    }

    let mut df = vec![0usize; term_ids.len()];
    for tf in &counts {
        for &id in tf.keys() {
            df[id] += 1;
        }
    }
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| (n as f64 / d as f64).ln() + 1.0)
        .collect();

    let vectors: Vec<WeightedSentence> = counts
        .into_iter()
        .map(|tf| {
            let mut entries: Vec<(usize, f64)> = tf
                .into_iter()
                .map(|(id, c)| (id, f64::from(c) * idf[id]))
                .collect();
            entries.sort_unstable_by_key(|&(id, _)| id);
            let norm = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
            WeightedSentence { entries, norm }
        })
        .collect();

    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        if vectors[i].entries.is_empty() {
            continue;
        }
        weights[i * n + i] = 1.0;
        for j in 0..i {
            if vectors[j].entries.is_empty() {
                continue;
            }
            let sim = (sparse_dot(&vectors[i].entries, &vectors[j].entries)
                / (vectors[i].norm * vectors[j].norm))
                .clamp(0.0, 1.0);
            weights[i * n + j] = sim;
            weights[j * n + i] = sim;
        }
    }

    Ok(SentenceGraph {
        n,
        weights,
        threshold: DEFAULT_THRESHOLD,
    })
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Per-sentence centrality `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    pub gamma: Vec<f64>,
    pub variant: CentralityVariant,
}

/// Fraction of the other sentences whose similarity reaches the threshold.
pub fn degree_centrality(graph: &SentenceGraph) -> CentralityScores {
    let n = graph.n;
    let denom = n.saturating_sub(1).max(1) as f64;
    let gamma = (0..n)
        .map(|s| {
            let degree = graph
                .row(s)
                .iter()
                .enumerate()
                .filter(|&(j, &w)| j != s && w >= graph.threshold)
                .count();
            degree as f64 / denom
        })
        .collect();
    CentralityScores {
        gamma,
        variant: CentralityVariant::Degree,
    }
}

/// Stationary distribution of the row-normalized weights, mixed with the
/// uniform distribution at rate `1 - damping`.
pub fn continuous_centrality(
    graph: &SentenceGraph,
    damping: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<CentralityScores> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "damping = {damping} must be in (0, 1)"
        )));
    }
    let n = graph.n;
    if n == 0 {
        return Err(Error::AllSentencesEmpty);
    }
    let uniform = 1.0 / n as f64;

    let transition: Vec<f64> = (0..n)
        .flat_map(|i| {
            let row = graph.row(i);
            let sum: f64 = row.iter().sum();
            row.iter()
                .map(move |&w| if sum > 0.0 { w / sum } else { uniform })
        })
        .collect();

    let teleport = (1.0 - damping) * uniform;
    let mut current = vec![uniform; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iterations {
        next.fill(teleport);
        for (i, &p) in current.iter().enumerate() {
            let mass = damping * p;
            for (slot, &t) in next.iter_mut().zip(&transition[i * n..(i + 1) * n]) {
                *slot += mass * t;
            }
        }
        let change: f64 = current.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut current, &mut next);
        if change < tolerance {
            let total: f64 = current.iter().sum();
            current.iter_mut().for_each(|g| *g /= total);
            return Ok(CentralityScores {
                gamma: current,
                variant: CentralityVariant::Continuous,
            });
        }
    }
    Err(Error::NoConvergence(max_iterations))
}

/// Per-sentence guidance `σ`: the best BM25 score of the sentence against
/// any theme.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceScores {
    pub sigma: Vec<f64>,
}

pub fn guidance_scores(sentences: &[TokenSequence], theme_index: &Bm25Index) -> GuidanceScores {
    GuidanceScores {
        sigma: sentences
            .iter()
            .map(|s| {
                if s.is_empty() {
                    0.0
                } else {
                    theme_index.max_score(s)
                }
            })
            .collect(),
    }
}

/// Divides by the maximum; a vector without a positive maximum is left as is.
fn max_normalized(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > 0.0 {
        values.iter().map(|v| v / max).collect()
    } else {
        values.to_vec()
    }
}

pub fn combined_scores(
    gamma: &CentralityScores,
    sigma: &GuidanceScores,
    alpha: f64,
    beta: f64,
) -> Result<Vec<f64>> {
    if gamma.gamma.len() != sigma.sigma.len() {
        return Err(Error::LengthMismatch {
            left: gamma.gamma.len(),
            right: sigma.sigma.len(),
        });
    }
    check_weights(alpha, beta)?;
    let g = max_normalized(&gamma.gamma);
    let s = max_normalized(&sigma.sigma);
    Ok(g.iter().zip(&s).map(|(g, s)| alpha * g + beta * s).collect())
}

fn check_weights(alpha: f64, beta: f64) -> Result<()> {
    let valid = alpha >= 0.0 && beta >= 0.0 && alpha + beta > 0.0;
    if !valid {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha}, beta = {beta}: both must be >= 0 with a positive sum"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummaryConfig {
    pub mode: SummaryMode,
    pub size: usize,
    pub alpha: f64,
    pub beta: f64,
    pub centrality: CentralityVariant,
    pub threshold: f64,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        Self {
            mode: SummaryMode::Guided,
            size: 15,
            alpha: 1.0,
            beta: 1.0,
            centrality: CentralityVariant::Degree,
            threshold: DEFAULT_THRESHOLD,
            damping: DEFAULT_DAMPING,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl SummaryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidParameter("summary size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.threshold) {
            return Err(Error::InvalidParameter(format!(
                "threshold = {} must be in [0, 1)",
                self.threshold
            )));
        }
        if self.mode == SummaryMode::Guided {
            check_weights(self.alpha, self.beta)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Chosen sentence indices, best score first.
    pub ranked: Vec<usize>,
    /// Chosen sentence indices in document order.
    pub selected: Vec<usize>,
    pub text: String,
}

/// Centrality, plus guidance when the mode is guided, for every sentence.
pub fn sentence_scores(
    tokens: &[TokenSequence],
    config: &SummaryConfig,
    theme_index: Option<&Bm25Index>,
) -> Result<Vec<f64>> {
    let graph = similarity_matrix(tokens)?.with_threshold(config.threshold)?;
    let gamma = match config.centrality {
        CentralityVariant::Degree => degree_centrality(&graph),
        CentralityVariant::Continuous => continuous_centrality(
            &graph,
            config.damping,
            config.tolerance,
            config.max_iterations,
        )?,
    };
    match config.mode {
        SummaryMode::Plain => Ok(gamma.gamma),
        SummaryMode::Guided => {
            let index = theme_index.ok_or(Error::MissingThemeIndex)?;
            let sigma = guidance_scores(tokens, index);
            combined_scores(&gamma, &sigma, config.alpha, config.beta)
        }
    }
}

/// Indices of the `size` best scores, ties broken by lower index.
pub fn select_top(scores: &[f64], size: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(size);
    order
}

/// Extractive summary of at most `config.size` sentences, joined by single
/// spaces in document order.
pub fn summarize(
    sentences: &[Sentence],
    config: &SummaryConfig,
    theme_index: Option<&Bm25Index>,
) -> Result<Summary> {
    config.validate()?;
    if config.mode == SummaryMode::Guided && theme_index.is_none() {
        return Err(Error::MissingThemeIndex);
    }
    let tokens: Vec<TokenSequence> = sentences.iter().map(|s| tokenize(&s.text)).collect();
    let scores = sentence_scores(&tokens, config, theme_index)?;

    let ranked = select_top(&scores, config.size);
    let mut selected = ranked.clone();
    selected.sort_unstable();
    let text = selected
        .iter()
        .map(|&i| sentences[i].text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Summary {
        ranked,
        selected,
        text,
    })
}
