//! End-to-end classification of an appeal against the theme catalog.
//!
//! Per appeal: core extraction, noise removal, representation (full text or
//! a LexRank/guided LexRank summary), scoring against every theme, then the
//! top `k` themes by descending score.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bm25::{sort_by_score, Bm25Index, Bm25Params};
use crate::corpus::{AppealRecord, GoldLabels, ThemeCatalog};
use crate::error::{Error, Result};
use crate::lexrank::{summarize, SummaryConfig, SummaryMode};
use crate::similarity::{
    load_embeddings, score_by_bm25, score_by_cosine, score_by_tfidf, EmbeddingTable,
    SimilarityMethod, ThemeScores,
};
use crate::textproc::{extract_core, remove_noise, segment_sentences, tokenize, PreprocessConfig, TokenSequence};

pub const DEFAULT_K: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Fulltext,
    Lexrank,
    #[default]
    GuidedLexrank,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fulltext => "fulltext",
            Self::Lexrank => "lexrank",
            Self::GuidedLexrank => "guided_lexrank",
        }
    }

    pub fn summary_mode(self) -> Option<SummaryMode> {
        match self {
            Self::Fulltext => None,
            Self::Lexrank => Some(SummaryMode::Plain),
            Self::GuidedLexrank => Some(SummaryMode::Guided),
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fulltext" => Ok(Self::Fulltext),
            "lexrank" => Ok(Self::Lexrank),
            "guided_lexrank" => Ok(Self::GuidedLexrank),
            other => Err(Error::Config(format!("unknown representation `{other}`"))),
        }
    }
}

/// Where cosine similarity gets its vectors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum EmbeddingSource {
    /// TF-IDF over the catalog plus the appeal representation.
    #[default]
    TfidfFallback,
    /// Precomputed vectors keyed by appeal and theme id.
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub preprocess: PreprocessConfig,
    pub representation: Representation,
    pub summary: SummaryConfig,
    pub similarity: SimilarityMethod,
    pub bm25: Bm25Params,
    pub k: usize,
    pub embedding_source: EmbeddingSource,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            preprocess: PreprocessConfig::default(),
            representation: Representation::GuidedLexrank,
            summary: SummaryConfig::default(),
            similarity: SimilarityMethod::Bm25,
            bm25: Bm25Params::default(),
            k: DEFAULT_K,
            embedding_source: EmbeddingSource::TfidfFallback,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        self.bm25.validate()?;
        if let Some(mode) = self.representation.summary_mode() {
            SummaryConfig {
                mode,
                ..self.summary.clone()
            }
            .validate()?;
        }
        Ok(())
    }
}

/// Top-k themes for one appeal, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedThemeList {
    pub appeal_id: String,
    pub entries: Vec<(String, f64)>,
}

impl RankedThemeList {
    fn from_scores(appeal_id: &str, scores: ThemeScores, k: usize) -> Self {
        let mut entries = scores.scores;
        sort_by_score(&mut entries);
        entries.truncate(k);
        Self {
            appeal_id: appeal_id.to_owned(),
            entries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    /// Position of the appeal in the input list.
    pub position: usize,
    pub appeal_id: String,
    pub message: String,
}

/// Batch output: rankings in input order, minus the appeals that failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusRun {
    pub rankings: Vec<RankedThemeList>,
    pub failures: Vec<Failure>,
}

impl CorpusRun {
    /// Rankings with an empty list standing in for each failed appeal, in
    /// input order. Evaluating this counts failures as misses.
    pub fn rankings_with_failures(&self) -> Vec<RankedThemeList> {
        let mut all = self.rankings.clone();
        for f in &self.failures {
            let at = f.position.min(all.len());
            all.insert(
                at,
                RankedThemeList {
                    appeal_id: f.appeal_id.clone(),
                    entries: Vec::new(),
                },
            );
        }
        all
    }
}

/// Catalog-side state shared by every appeal: preprocessed theme tokens, the
/// theme BM25 index and optional precomputed embeddings.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    theme_tokens: Vec<(String, TokenSequence)>,
    theme_index: Bm25Index,
    embeddings: Option<EmbeddingTable>,
}

impl Pipeline {
    /// Prepares the catalog. Reads the embedding file when cosine similarity
    /// is configured with one.
    pub fn new(themes: &ThemeCatalog, config: PipelineConfig) -> Result<Self> {
        let embeddings = match (&config.similarity, &config.embedding_source) {
            (SimilarityMethod::Cosine, EmbeddingSource::File(path)) => Some(load_embeddings(path)?),
            _ => None,
        };
        Self::with_embeddings(themes, config, embeddings)
    }

    pub fn with_embeddings(
        themes: &ThemeCatalog,
        config: PipelineConfig,
        embeddings: Option<EmbeddingTable>,
    ) -> Result<Self> {
        config.validate()?;
        if themes.is_empty() {
            return Err(Error::EmptyCorpus("theme catalog".into()));
        }
        let theme_tokens: Vec<(String, TokenSequence)> = themes
            .iter()
            .map(|t| (t.id.clone(), tokenize(&remove_noise(&t.text, &config.preprocess))))
            .collect();
        let theme_index = Bm25Index::build(
            theme_tokens.iter().map(|(id, t)| (id.as_str(), t)),
            config.bm25,
        )?;
        if let Some(table) = &embeddings {
            for (id, _) in &theme_tokens {
                table.vector(id)?;
            }
        }
        Ok(Self {
            config,
            theme_tokens,
            theme_index,
            embeddings,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn theme_index(&self) -> &Bm25Index {
        &self.theme_index
    }

    /// Preprocessed text of the appeal.
    pub fn preprocess(&self, appeal: &AppealRecord) -> String {
        let core = extract_core(&appeal.raw_text, &self.config.preprocess.core_markers);
        remove_noise(core, &self.config.preprocess)
    }

    /// The text that gets scored: the preprocessed appeal or its summary.
    pub fn representation(&self, appeal: &AppealRecord) -> Result<String> {
        let text = self.preprocess(appeal);
        let empty = || Error::EmptyAfterPreprocessing(appeal.id.clone());
        if tokenize(&text).is_empty() {
            return Err(empty());
        }
        let Some(mode) = self.config.representation.summary_mode() else {
            return Ok(text);
        };
        let sentences = segment_sentences(&text);
        let config = SummaryConfig {
            mode,
            ..self.config.summary.clone()
        };
        match summarize(&sentences, &config, Some(&self.theme_index)) {
            Ok(summary) => Ok(summary.text),
            Err(Error::AllSentencesEmpty) => Err(empty()),
            Err(e) => Err(e),
        }
    }

    pub fn score(&self, appeal: &AppealRecord) -> Result<ThemeScores> {
        let tokens = tokenize(&self.representation(appeal)?);
        if tokens.is_empty() {
            return Err(Error::EmptyAfterPreprocessing(appeal.id.clone()));
        }
        match self.config.similarity {
            SimilarityMethod::Bm25 => Ok(score_by_bm25(&tokens, &self.theme_index)),
            SimilarityMethod::Cosine => match &self.embeddings {
                Some(table) => {
                    let themes: Vec<(String, &[f64])> = self
                        .theme_tokens
                        .iter()
                        .map(|(id, _)| Ok((id.clone(), table.vector(id)?)))
                        .collect::<Result<_>>()?;
                    score_by_cosine(table.vector(&appeal.id)?, &themes)
                }
                None => score_by_tfidf(&tokens, &self.theme_tokens),
            },
        }
    }

    pub fn classify(&self, appeal: &AppealRecord) -> Result<RankedThemeList> {
        Ok(RankedThemeList::from_scores(
            &appeal.id,
            self.score(appeal)?,
            self.config.k,
        ))
    }

    /// Classifies every appeal on `threads` workers. Output order follows
    /// input order regardless of the thread count.
    pub fn classify_corpus(&self, appeals: &[AppealRecord], threads: usize) -> CorpusRun {
        let results: Vec<Result<RankedThemeList>> = match rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| appeals.par_iter().map(|a| self.classify(a)).collect()),
            Err(_) => appeals.iter().map(|a| self.classify(a)).collect(),
        };

        let mut run = CorpusRun::default();
        for (position, (appeal, result)) in appeals.iter().zip(results).enumerate() {
            match result {
                Ok(ranking) => run.rankings.push(ranking),
                Err(e) => run.failures.push(Failure {
                    position,
                    appeal_id: appeal.id.clone(),
                    message: e.to_string(),
                }),
            }
        }
        run
    }
}

pub fn classify_appeal(
    appeal: &AppealRecord,
    themes: &ThemeCatalog,
    config: &PipelineConfig,
) -> Result<RankedThemeList> {
    Pipeline::new(themes, config.clone())?.classify(appeal)
}

/// Batch classification. Only catalog preparation can fail; per-appeal
/// errors land in [`CorpusRun::failures`].
pub fn classify_corpus(
    appeals: &[AppealRecord],
    themes: &ThemeCatalog,
    config: &PipelineConfig,
    threads: usize,
) -> Result<CorpusRun> {
    Ok(Pipeline::new(themes, config.clone())?.classify_corpus(appeals, threads))
}

pub const RANKINGS_HEADER: [&str; 6] = ["appeal_id", "rank", "theme_id", "score", "gold_theme_id", "hit"];

/// One row per ranked theme: appeal id, 1-based rank, theme id, score, gold
/// theme id (empty when unknown) and a 0/1 hit flag.
pub fn write_rankings<W: Write>(
    out: W,
    rankings: &[RankedThemeList],
    gold: &GoldLabels,
) -> Result<()> {
    let to_err = |e: csv::Error| Error::Csv {
        path: PathBuf::from("<rankings>"),
        source: e,
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RANKINGS_HEADER).map_err(to_err)?;
    for ranking in rankings {
        let gold_id = gold.get(&ranking.appeal_id).unwrap_or("");
        for (rank, (theme, score)) in ranking.entries.iter().enumerate() {
            let hit = if !gold_id.is_empty() && theme == gold_id { "1" } else { "0" };
            w.write_record([
                ranking.appeal_id.as_str(),
                &(rank + 1).to_string(),
                theme,
                &score.to_string(),
                gold_id,
                hit,
            ])
            .map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<rankings>", e))
}

pub fn write_rankings_file(path: &Path, rankings: &[RankedThemeList], gold: &GoldLabels) -> Result<()> {
    let mut buf = Vec::new();
    write_rankings(&mut buf, rankings, gold)?;
    crate::io::write_atomic(path, &buf)
}

/// Parses a rankings file back into per-appeal lists.
pub fn read_rankings(path: &Path) -> Result<Vec<RankedThemeList>> {
    let to_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut reader = csv::Reader::from_path(path).map_err(to_err)?;
    let headers = reader.headers().map_err(to_err)?.clone();
    if headers.iter().ne(RANKINGS_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {}", RANKINGS_HEADER.join(",")),
        });
    }
    let mut lists: Vec<RankedThemeList> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(to_err)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let score: f64 = record[3].parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("bad score `{}`", &record[3]),
        })?;
        let entry = (record[2].to_owned(), score);
        match lists.last_mut() {
            Some(last) if last.appeal_id == record[0] => last.entries.push(entry),
            _ => lists.push(RankedThemeList {
                appeal_id: record[0].to_owned(),
                entries: vec![entry],
            }),
        }
    }
    Ok(lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ThemeRecord;

    fn catalog(themes: &[(&str, &str)]) -> ThemeCatalog {
        ThemeCatalog::new(
            themes
                .iter()
                .map(|(id, text)| ThemeRecord {
                    id: (*id).into(),
                    text: (*text).into(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn appeal(id: &str, text: &str) -> AppealRecord {
        AppealRecord {
            id: id.into(),
            raw_text: text.into(),
            label_theme_id: None,
        }
    }

    fn ten_themes() -> ThemeCatalog {
        let texts = [
            "prescrição intercorrente execução fiscal",
            "dano moral indenização",
            "juros mora condenação fazenda",
            "aposentadoria especial ruído",
            "auxílio doença incapacidade",
            "imposto renda isenção",
            "contribuição previdenciária terço férias",
            "servidor público reajuste",
            "pensão morte dependente",
            "honorários advocatícios sucumbência",
        ];
        let owned: Vec<(String, &str)> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("T{i:02}"), *t))
            .collect();
        catalog(&owned.iter().map(|(a, b)| (a.as_str(), *b)).collect::<Vec<_>>())
    }

    #[test]
    fn default_output_has_six_entries() {
        let themes = ten_themes();
        let a = appeal("a1", "Trata-se de execução fiscal. Houve prescrição intercorrente no processo.");
        let ranked = classify_appeal(&a, &themes, &PipelineConfig::default()).unwrap();
        assert_eq!(ranked.entries.len(), 6);
        assert_eq!(ranked.entries[0].0, "T00");
        assert!(ranked.entries.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn singleton_catalog_always_ranks_its_theme() {
        let themes = catalog(&[("only", "tema único")]);
        let a = appeal("a", "Nada em comum aqui. Outra frase.");
        for representation in [Representation::Fulltext, Representation::Lexrank, Representation::GuidedLexrank] {
            for similarity in [SimilarityMethod::Bm25, SimilarityMethod::Cosine] {
                let config = PipelineConfig {
                    representation,
                    similarity,
                    ..PipelineConfig::default()
                };
                let ranked = classify_appeal(&a, &themes, &config).unwrap();
                assert_eq!(ranked.entries.len(), 1);
                assert_eq!(ranked.entries[0].0, "only");
            }
        }
    }

    #[test]
    fn no_overlap_ranks_by_theme_id() {
        let themes = catalog(&[("c", "gama"), ("a", "alfa"), ("b", "beta")]);
        let a = appeal("x", "Palavras totalmente diferentes.");
        let ranked = classify_appeal(&a, &themes, &PipelineConfig::default()).unwrap();
        let ids: Vec<&str> = ranked.entries.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(ranked.entries.iter().all(|(_, s)| *s == 0.0));
    }

    #[test]
    fn empty_after_preprocessing_is_a_logged_failure() {
        let themes = ten_themes();
        let appeals = vec![
            appeal("ok", "Execução fiscal com prescrição intercorrente."),
            appeal("empty", "de a o que 12345"),
        ];
        let run = classify_corpus(&appeals, &themes, &PipelineConfig::default(), 2).unwrap();
        assert_eq!(run.rankings.len(), 1);
        assert_eq!(run.failures.len(), 1);
        assert_eq!(run.failures[0].appeal_id, "empty");
        assert_eq!(run.failures[0].position, 1);
        let all = run.rankings_with_failures();
        assert_eq!(all[1].appeal_id, "empty");
        assert!(all[1].entries.is_empty());
    }

    #[test]
    fn corpus_preserves_input_order() {
        let themes = ten_themes();
        let appeals = vec![
            appeal("z", "Dano moral e indenização."),
            appeal("a", "Juros de mora contra a fazenda."),
        ];
        let run = classify_corpus(&appeals, &themes, &PipelineConfig::default(), 4).unwrap();
        let ids: Vec<&str> = run.rankings.iter().map(|r| r.appeal_id.as_str()).collect();
        assert_eq!(ids, ["z", "a"]);
    }

    #[test]
    fn fulltext_ignores_summary_size() {
        let themes = ten_themes();
        let a = appeal(
            "a",
            "Execução fiscal. Prescrição intercorrente. Dano moral. Honorários advocatícios.",
        );
        let base = PipelineConfig {
            representation: Representation::Fulltext,
            ..PipelineConfig::default()
        };
        let small = PipelineConfig {
            summary: SummaryConfig { size: 1, ..SummaryConfig::default() },
            ..base.clone()
        };
        assert_eq!(
            classify_appeal(&a, &themes, &base).unwrap(),
            classify_appeal(&a, &themes, &small).unwrap()
        );
    }

    #[test]
    fn embeddings_file_missing_vectors() {
        let themes = catalog(&[("t1", "alfa"), ("t2", "beta")]);
        let table = EmbeddingTable::new(
            2,
            [("t1".to_owned(), vec![1.0, 0.0]), ("t2".to_owned(), vec![0.0, 1.0]), ("a".to_owned(), vec![0.2, 0.9])]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let config = PipelineConfig {
            similarity: SimilarityMethod::Cosine,
            representation: Representation::Fulltext,
            ..PipelineConfig::default()
        };
        let pipeline = Pipeline::with_embeddings(&themes, config.clone(), Some(table.clone())).unwrap();
        let ranked = pipeline.classify(&appeal("a", "qualquer texto")).unwrap();
        assert_eq!(ranked.entries[0].0, "t2");
        assert!(matches!(
            pipeline.classify(&appeal("b", "qualquer texto")),
            Err(Error::MissingEmbedding(id)) if id == "b"
        ));

        let bigger = catalog(&[("t1", "alfa"), ("t3", "gama")]);
        assert!(Pipeline::with_embeddings(&bigger, config, Some(table)).is_err());
    }

    #[test]
    fn rankings_file_round_trip() {
        let rankings = vec![
            RankedThemeList { appeal_id: "a".into(), entries: vec![("T1".into(), 2.5), ("T2".into(), 0.1)] },
            RankedThemeList { appeal_id: "b".into(), entries: vec![("T2".into(), 1.0 / 3.0)] },
        ];
        let gold = GoldLabels {
            resolved: [("a".to_owned(), "T2".to_owned())].into_iter().collect(),
            ..GoldLabels::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rankings.csv");
        write_rankings_file(&path, &rankings, &gold).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("appeal_id,rank,theme_id,score,gold_theme_id,hit\na,1,T1,2.5,T2,0\na,2,T2,0.1,T2,1\n"));
        assert_eq!(read_rankings(&path).unwrap(), rankings);
    }
}
