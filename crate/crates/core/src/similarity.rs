//! Appeal-to-theme scoring, either as a BM25 query against the theme index
//! or as cosine similarity between vectors.
//!
//! Vectors come from a precomputed embedding file or from the built-in
//! TF-IDF vectorizer.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bm25::Bm25Index;
use crate::error::{Error, Result};
use crate::textproc::TokenSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMethod {
    #[default]
    Bm25,
    Cosine,
}

impl SimilarityMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bm25 => "bm25",
            Self::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for SimilarityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bm25" => Ok(Self::Bm25),
            "cosine" => Ok(Self::Cosine),
            other => Err(Error::Config(format!("unknown similarity method `{other}`"))),
        }
    }
}

/// One score per catalog theme, in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThemeScores {
    pub scores: Vec<(String, f64)>,
    pub method: SimilarityMethod,
}

/// BM25 score of the appeal representation against every indexed theme.
pub fn score_by_bm25(summary_tokens: &TokenSequence, theme_index: &Bm25Index) -> ThemeScores {
    ThemeScores {
        scores: theme_index
            .doc_ids()
            .iter()
            .cloned()
            .zip(theme_index.score_all(summary_tokens))
            .collect(),
        method: SimilarityMethod::Bm25,
    }
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dense vectors keyed by document id, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize, vectors: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if let Some(bad) = vectors.values().find(|v| v.len() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: bad.len(),
            });
        }
        if !vectors.values().any(|v| norm(v) > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { dimension, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn vector(&self, id: &str) -> Result<&[f64]> {
        self.get(id)
            .ok_or_else(|| Error::MissingEmbedding(id.to_owned()))
    }

    /// Writes the tab-separated format read by [`load_embeddings`].
    pub fn to_tsv(&self) -> String {
        let mut out = format!("id\t{}\n", self.dimension);
        for (id, v) in &self.vectors {
            let comps: Vec<String> = v.iter().map(f64::to_string).collect();
            out.push_str(&format!("{id}\t{}\n", comps.join(",")));
        }
        out
    }
}

/// Reads `id<TAB>dim` followed by `id<TAB>v1,v2,…` lines. The header's
/// second field is the dimension, or the literal `dim` to take it from the
/// first vector.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&content, path)
}

fn parse_embeddings(content: &str, path: &Path) -> Result<EmbeddingTable> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?;
    let (head_id, head_dim) = header
        .split_once('\t')
        .ok_or_else(|| parse_err(header_line, "header must be `id<TAB>dim`".into()))?;
    if head_id.trim() != "id" {
        return Err(parse_err(header_line, "header must start with `id`".into()));
    }
    let mut dimension: Option<usize> = match head_dim.trim() {
        "dim" => None,
        d => Some(
            d.parse()
                .map_err(|_| parse_err(header_line, format!("bad dimension `{d}`")))?,
        ),
    };

    let mut vectors = BTreeMap::new();
    for (line_no, line) in lines {
        let (id, comps) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(line_no, "expected `id<TAB>components`".into()))?;
        let vector = comps
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| parse_err(line_no, format!("bad component: {e}")))?;
        if vector.iter().any(|c| !c.is_finite()) {
            return Err(parse_err(line_no, "non-finite component".into()));
        }
        let expected = *dimension.get_or_insert(vector.len());
        if vector.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: vector.len(),
            });
        }
        if vectors.insert(id.to_owned(), vector).is_some() {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                id: id.to_owned(),
                row: line_no,
            });
        }
    }

    EmbeddingTable::new(dimension.unwrap_or(0), vectors)
}

/// Sparse TF-IDF vectors over a shared vocabulary. Component for term `w`
/// is `tf(w) · (ln(N / df(w)) + 1)`.
#[derive(Debug, Clone)]
pub struct TfidfSpace {
    vocabulary: Vec<String>,
    vectors: Vec<Vec<(usize, f64)>>,
}

impl TfidfSpace {
    pub fn build<'a, I>(texts: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TokenSequence>,
    {
        let counts: Vec<BTreeMap<&str, u32>> = texts
            .into_iter()
            .map(|t| {
                let mut tf = BTreeMap::new();
                for token in t.iter() {
                    *tf.entry(token).or_insert(0) += 1;
                }
                tf
            })
            .collect();
        if counts.iter().all(BTreeMap::is_empty) {
            return Err(Error::AllSentencesEmpty);
        }

        let vocabulary: BTreeSet<&str> = counts.iter().flat_map(|tf| tf.keys().copied()).collect();
        let term_ids: HashMap<&str, usize> =
            vocabulary.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut df = vec![0usize; vocabulary.len()];
        for tf in &counts {
            for term in tf.keys() {
                df[term_ids[term]] += 1;
            }
        }
        let n = counts.len() as f64;
        let vectors = counts
            .iter()
            .map(|tf| {
                tf.iter()
                    .map(|(term, &c)| {
                        let id = term_ids[term];
                        (id, f64::from(c) * ((n / df[id] as f64).ln() + 1.0))
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            vocabulary: vocabulary.into_iter().map(str::to_owned).collect(),
            vectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn dense(&self, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.vocabulary.len()];
        for &(id, w) in &self.vectors[i] {
            v[id] = w;
        }
        v
    }

    /// Cosine between texts `i` and `j`.
    pub fn cosine(&self, i: usize, j: usize) -> Result<f64> {
        let (a, b) = (&self.vectors[i], &self.vectors[j]);
        let na = a.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        let nb = b.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let (mut x, mut y, mut dot) = (0, 0, 0.0);
        while x < a.len() && y < b.len() {
            match a[x].0.cmp(&b[y].0) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    dot += a[x].1 * b[y].1;
                    x += 1;
                    y += 1;
                }
            }
        }
        Ok((dot / (na * nb)).clamp(-1.0, 1.0))
    }
}

/// Dense TF-IDF table; dimension is the vocabulary size, components in
/// lexicographic term order.
pub fn tfidf_vectors(texts: &[(String, TokenSequence)]) -> Result<EmbeddingTable> {
    let space = TfidfSpace::build(texts.iter().map(|(_, t)| t))?;
    let mut vectors = BTreeMap::new();
    for (i, (id, _)) in texts.iter().enumerate() {
        if vectors.insert(id.clone(), space.dense(i)).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate text id `{id}`")));
        }
    }
    EmbeddingTable::new(space.dimension(), vectors)
}

/// Cosine of `appeal` against each theme vector, in the given theme order.
pub fn score_by_cosine(
    appeal: &[f64],
    themes: &[(String, &[f64])],
) -> Result<ThemeScores> {
    let scores = themes
        .iter()
        .map(|(id, v)| Ok((id.clone(), cosine(appeal, v)?)))
        .collect::<Result<_>>()?;
    Ok(ThemeScores {
        scores,
        method: SimilarityMethod::Cosine,
    })
}

/// Fallback path: a TF-IDF space over the catalog plus the appeal, with the
/// appeal scored against every theme.
pub fn score_by_tfidf(
    appeal: &TokenSequence,
    themes: &[(String, TokenSequence)],
) -> Result<ThemeScores> {
    let space = TfidfSpace::build(std::iter::once(appeal).chain(themes.iter().map(|(_, t)| t)))?;
    let scores = themes
        .iter()
        .enumerate()
        .map(|(i, (id, _))| Ok((id.clone(), space.cosine(0, i + 1)?)))
        .collect::<Result<_>>()?;
    Ok(ThemeScores {
        scores,
        method: SimilarityMethod::Cosine,
    })
}
