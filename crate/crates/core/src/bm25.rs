//! Okapi BM25 over an in-memory document set.
//!
//! The index keeps both per-document term counts and an inverted posting
//! list. Scoring walks the distinct query terms in ascending lexicographic
//! order, so a score computed for one document and the same score produced
//! by [`Bm25Index::score_all`] are bit-identical.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::TokenSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IdfVariant {
    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, never negative.
    #[default]
    Nonnegative,
    /// `ln((N - df + 0.5) / (df + 0.5))` with negative values replaced by
    /// `epsilon` times the mean positive idf.
    EpsilonFloor,
}

impl std::str::FromStr for IdfVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonnegative" => Ok(IdfVariant::Nonnegative),
            "epsilon_floor" => Ok(IdfVariant::EpsilonFloor),
            other => Err(Error::Config(format!("unknown idf variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
    pub idf_variant: IdfVariant,
    pub epsilon: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self {
            k1: 1.5,
            b: 0.75,
            idf_variant: IdfVariant::Nonnegative,
            epsilon: 0.25,
        }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 >= 0.0 && self.k1.is_finite()) {
            return Err(Error::InvalidParameter(format!("k1 = {} must be >= 0", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParameter(format!("b = {} must be in [0, 1]", self.b)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} must be > 0",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Immutable term statistics over a document set.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    doc_ids: Vec<String>,
    positions: HashMap<String, usize>,
    term_frequencies: Vec<HashMap<String, u32>>,
    doc_lengths: Vec<usize>,
    avg_doc_length: f64,
    doc_freq: HashMap<String, usize>,
    idf: HashMap<String, f64>,
    postings: HashMap<String, Vec<(usize, u32)>>,
    params: Bm25Params,
}

impl Bm25Index {
    /// Builds the index. Fails on an empty document set, a document without
    /// tokens, a repeated id or out-of-range parameters.
    pub fn build<'a, I, S>(docs: I, params: Bm25Params) -> Result<Self>
    where
        I: IntoIterator<Item = (S, &'a TokenSequence)>,
        S: Into<String>,
    {
        params.validate()?;

        let mut doc_ids = Vec::new();
        let mut positions = HashMap::new();
        let mut term_frequencies = Vec::new();
        let mut doc_lengths = Vec::new();
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        let mut postings: HashMap<String, Vec<(usize, u32)>> = HashMap::new();

        for (id, tokens) in docs {
            let id = id.into();
            if tokens.is_empty() {
                return Err(Error::EmptyDocument(id));
            }
            let position = doc_ids.len();
            if positions.insert(id.clone(), position).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate document id `{id}`")));
            }

            let mut tf: HashMap<String, u32> = HashMap::new();
            for token in tokens.iter() {
                *tf.entry(token.to_owned()).or_default() += 1;
            }
            for (term, &count) in &tf {
                *doc_freq.entry(term.clone()).or_default() += 1;
                postings.entry(term.clone()).or_default().push((position, count));
            }

            doc_ids.push(id);
            doc_lengths.push(tokens.len());
            term_frequencies.push(tf);
        }

        if doc_ids.is_empty() {
            return Err(Error::EmptyIndex);
        }

        let avg_doc_length = doc_lengths.iter().sum::<usize>() as f64 / doc_lengths.len() as f64;
        let idf = compute_idf(&doc_freq, doc_ids.len(), &params);

        Ok(Self {
            doc_ids,
            positions,
            term_frequencies,
            doc_lengths,
            avg_doc_length,
            doc_freq,
            idf,
            postings,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn params(&self) -> &Bm25Params {
        &self.params
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_length(&self, doc_id: &str) -> Option<usize> {
        self.positions.get(doc_id).map(|&p| self.doc_lengths[p])
    }

    pub fn term_frequency(&self, doc_id: &str, term: &str) -> Option<u32> {
        let position = *self.positions.get(doc_id)?;
        Some(self.term_frequencies[position].get(term).copied().unwrap_or(0))
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    /// Inverse document frequency under the configured variant; 0 for
    /// terms outside the vocabulary.
    pub fn idf(&self, term: &str) -> f64 {
        self.idf.get(term).copied().unwrap_or(0.0)
    }

    pub fn score(&self, query: &TokenSequence, doc_id: &str) -> Result<f64> {
        let position = *self
            .positions
            .get(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))?;
        let tf = &self.term_frequencies[position];
        let dl = self.doc_lengths[position];

        let mut total = 0.0;
        for term in distinct_terms(query) {
            if let (Some(&count), Some(&idf)) = (tf.get(term), self.idf.get(term)) {
                total += self.term_weight(idf, count, dl);
            }
        }
        Ok(total)
    }

    /// Scores of `query` against every document, in index order.
    pub fn score_all(&self, query: &TokenSequence) -> Vec<f64> {
        let mut totals = vec![0.0; self.doc_ids.len()];
        for term in distinct_terms(query) {
            let (Some(postings), Some(&idf)) = (self.postings.get(term), self.idf.get(term)) else {
                continue;
            };
            for &(position, count) in postings {
                totals[position] += self.term_weight(idf, count, self.doc_lengths[position]);
            }
        }
        totals
    }

    /// Highest score of `query` over all documents.
    pub fn max_score(&self, query: &TokenSequence) -> f64 {
        self.score_all(query)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every document by descending score, ties by ascending id.
    pub fn rank(&self, query: &TokenSequence) -> Vec<(String, f64)> {
        let mut ranked: Vec<(String, f64)> = self
            .doc_ids
            .iter()
            .cloned()
            .zip(self.score_all(query))
            .collect();
        sort_by_score(&mut ranked);
        ranked
    }

    fn term_weight(&self, idf: f64, tf: u32, dl: usize) -> f64 {
        let Bm25Params { k1, b, .. } = self.params;
        let tf = f64::from(tf);
        let norm = 1.0 - b + b * dl as f64 / self.avg_doc_length;
        idf * tf * (k1 + 1.0) / (tf + k1 * norm)
    }
}

/// Descending by score, ties broken by ascending id.
pub(crate) fn sort_by_score(entries: &mut [(String, f64)]) {
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

fn distinct_terms(query: &TokenSequence) -> BTreeSet<&str> {
    query.iter().collect()
}

fn compute_idf(
    doc_freq: &HashMap<String, usize>,
    n_docs: usize,
    params: &Bm25Params,
) -> HashMap<String, f64> {
    let n = n_docs as f64;
    match params.idf_variant {
        IdfVariant::Nonnegative => doc_freq
            .iter()
            .map(|(term, &df)| {
                let df = df as f64;
                (term.clone(), (1.0 + (n - df + 0.5) / (df + 0.5)).ln())
            })
            .collect(),
        IdfVariant::EpsilonFloor => {
            let mut raw: Vec<(&String, f64)> = doc_freq
                .iter()
                .map(|(term, &df)| {
                    let df = df as f64;
                    (term, ((n - df + 0.5) / (df + 0.5)).ln())
                })
                .collect();
            // Sorted so the positive mean is summed in a fixed order.
            raw.sort_by(|a, b| a.0.cmp(b.0));
            let positives: Vec<f64> = raw.iter().map(|&(_, v)| v).filter(|&v| v > 0.0).collect();
            let floor = if positives.is_empty() {
                params.epsilon
            } else {
                params.epsilon * positives.iter().sum::<f64>() / positives.len() as f64
            };
            raw.into_iter()
                .map(|(term, v)| (term.clone(), if v < 0.0 { floor } else { v }))
                .collect()
        }
    }
}
