//! Theme retrieval for long legal appeals.
//!
//! An appeal is preprocessed, reduced to an extractive summary by guided
//! LexRank (sentence centrality mixed with each sentence's best BM25 match
//! against the theme catalog), and the summary is scored against every
//! theme with BM25 or cosine similarity. The top `k` themes are the
//! suggestions; [`eval`] scores them against expert labels.

pub mod bm25;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod grid;
pub mod io;
pub mod lexrank;
pub mod ranking;
pub mod similarity;
pub mod textproc;

pub use bm25::{Bm25Index, Bm25Params, IdfVariant};
pub use corpus::{AppealRecord, ColumnMapping, GoldLabels, StatsReport, ThemeCatalog, ThemeRecord};
pub use error::{Error, Result};
pub use eval::{evaluate_run, Judgment, MetricReport};
pub use lexrank::{CentralityVariant, Summary, SummaryConfig, SummaryMode};
pub use ranking::{CorpusRun, EmbeddingSource, Pipeline, PipelineConfig, RankedThemeList, Representation};
pub use similarity::{EmbeddingTable, SimilarityMethod, ThemeScores};
pub use textproc::{PreprocessConfig, Sentence, Stopwords, TokenSequence};
